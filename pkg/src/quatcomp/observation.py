"""Sampling schemes, noise generation and observation sets.

All randomness flows through numpy's PCG64 generator.  Per-trial seeds
are derived from a master seed and trial indices through SeedSequence,
so parallel sweeps produce the same draws regardless of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError, PurityError
from .quat import QMatrix, Quaternion
from .weights import NoiseCovariance

WITH_REPLACEMENT = "with"
WITHOUT_REPLACEMENT = "without"


def derive_seed(master_seed: int, *indices: int) -> int:
    """Deterministic 64-bit child seed for (master, trial indices...)."""
    ss = np.random.SeedSequence([int(master_seed), *[int(i) for i in indices]])
    return int(ss.generate_state(1, np.uint64)[0])


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SamplingScheme:
    """Sampling kind ('with'/'without' replacement) plus a 64-bit seed."""

    kind: str
    seed: int

    def __post_init__(self):
        if self.kind not in (WITH_REPLACEMENT, WITHOUT_REPLACEMENT):
            raise DomainError(
                f"kind must be '{WITH_REPLACEMENT}' or "
                f"'{WITHOUT_REPLACEMENT}', got {self.kind!r}")


def _partial_fisher_yates(rng: np.random.Generator, total: int,
                          n: int) -> np.ndarray:
    """First n entries of a uniform permutation of range(total), O(n) space."""
    state: dict[int, int] = {}
    out = np.empty(n, dtype=np.int64)
    for k in range(n):
        j = int(rng.integers(k, total))
        out[k] = state.get(j, j)
        state[j] = state.get(k, k)
    return out


def sample_indices(scheme: SamplingScheme, d1: int, d2: int,
                   n: int) -> tuple[np.ndarray, np.ndarray]:
    """n uniform positions in a d1 x d2 grid as (rows, cols) arrays."""
    if d1 < 1 or d2 < 1 or n < 0:
        raise DomainError(f"bad sampling dims d1={d1}, d2={d2}, n={n}")
    total = d1 * d2
    rng = rng_from_seed(scheme.seed)
    if scheme.kind == WITH_REPLACEMENT:
        flat = rng.integers(0, total, size=n)
    else:
        if n > total:
            raise CapacityError(
                f"cannot draw {n} distinct positions from a {d1}x{d2} grid "
                f"({total} cells)")
        flat = _partial_fisher_yates(rng, total, n)
    return flat // d2, flat % d2


@dataclass(frozen=True)
class ObservationSet:
    """Sampled positions and (possibly noisy) pure quaternion values.

    `values` holds the imaginary 3-vectors, shape (n, 3); real parts are
    identically zero by the observation models.
    """

    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    kind: str
    d1: int
    d2: int
    noisy: bool = False
    cov: NoiseCovariance | None = field(default=None, repr=False)

    def __post_init__(self):
        for arr in (self.rows, self.cols, self.values):
            arr.setflags(write=False)
        if self.kind == WITHOUT_REPLACEMENT:
            flat = self.rows * self.d2 + self.cols
            if len(np.unique(flat)) != len(flat):
                raise DomainError(
                    "without-replacement observation set has repeated positions")

    @property
    def n(self) -> int:
        return len(self.rows)

    def entry(self, k: int) -> tuple[int, int, Quaternion]:
        return (int(self.rows[k]), int(self.cols[k]),
                Quaternion.pure(*self.values[k]))

    def max_abs(self) -> float:
        if self.n == 0:
            return 0.0
        return float(np.sqrt((self.values**2).sum(axis=1)).max())


def observe(theta: QMatrix, rows: np.ndarray, cols: np.ndarray,
            kind: str = WITHOUT_REPLACEMENT,
            noise: NoiseCovariance | None = None,
            seed: int = 0) -> ObservationSet:
    """Observe theta at the given positions, optionally noise-corrupted.

    Noisy values are entry + eps with eps a pure quaternion whose
    imaginary 3-vector is N(0, Sigma), drawn via the Cholesky factor.
    """
    if not theta.is_pixel:
        raise PurityError("observed matrix must be pure with nonnegative "
                          "imaginary components")
    vals = np.stack([theta.c1[rows, cols], theta.c2[rows, cols],
                     theta.c3[rows, cols]], axis=1)
    if noise is not None:
        rng = rng_from_seed(seed)
        eps = rng.standard_normal((len(rows), 3)) @ noise.chol.T
        vals = vals + eps
    return ObservationSet(rows=np.array(rows, dtype=np.int64),
                          cols=np.array(cols, dtype=np.int64),
                          values=np.ascontiguousarray(vals, dtype=np.float64),
                          kind=kind, d1=theta.d1, d2=theta.d2,
                          noisy=noise is not None, cov=noise)


def make_observations(theta: QMatrix, scheme: SamplingScheme, n: int,
                      noise: NoiseCovariance | None = None,
                      noise_seed: int | None = None) -> ObservationSet:
    """Sample positions under `scheme` and observe them in one call."""
    rows, cols = sample_indices(scheme, theta.d1, theta.d2, n)
    if noise_seed is None:
        noise_seed = derive_seed(scheme.seed, 1)
    return observe(theta, rows, cols, kind=scheme.kind, noise=noise,
                   seed=noise_seed)
