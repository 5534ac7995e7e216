"""Random nonnegative pure quaternion matrices of prescribed rank.

The exact generator multiplies structured quaternion factors whose real
parts cancel analytically, then lifts all imaginary channels by constant
integer shifts to make them nonnegative.  The block matrix
[L0, L1, L0+L2, L1-L2] always carries r-1 exact column dependencies
(-col(L0) - col(L1) + col(L0+L2) + col(L1-L2) = 0), so its null space is
nontrivial for every d1 and the construction works at any size.
"""

from __future__ import annotations

import numpy as np

from .errors import ConstructibilityError, DomainError
from .observation import rng_from_seed
from .quat import QMatrix

_NULL_TOL = 1e-10


def _null_space_basis(m: np.ndarray) -> np.ndarray:
    """Orthonormal null-space basis (columns) via full SVD."""
    _, s, vt = np.linalg.svd(m, full_matrices=True)
    cols = m.shape[1]
    if s.size == 0 or s[0] == 0.0:
        return vt.T
    r = int(np.sum(s > _NULL_TOL * s[0]))
    return vt[r:].T if r < cols else np.zeros((cols, 0))


def _gen_exact_from_rng(d1: int, d2: int, r: int,
                        rng: np.random.Generator) -> QMatrix:
    if r < 2:
        raise DomainError(f"rank must be >= 2, got {r}")
    if r > min(d1, d2):
        raise DomainError(f"rank {r} exceeds min(d1, d2) = {min(d1, d2)}")
    l0 = rng.uniform(0.0, 1.0, (d1, r - 1))
    l1 = rng.uniform(0.0, 1.0, (d1, r - 1))
    l2 = rng.uniform(0.0, 1.0, (d1, r - 1))
    k = _null_space_basis(np.hstack([l0, l1, l0 + l2, l1 - l2]))
    d3 = k.shape[1]
    if d3 == 0:
        raise ConstructibilityError(
            f"the {d1}x{4 * (r - 1)} block matrix has a trivial null space; "
            f"no valid right factor exists for (d1={d1}, r={r})")
    q = rng.uniform(0.0, 1.0, (d3, d2))
    rstack = k @ q
    m = r - 1
    r0, r1, r2, r3 = rstack[:m], rstack[m:2 * m], rstack[2 * m:3 * m], rstack[3 * m:]

    # product of L = L0 - L1 i - (L0+L2) j - (L1-L2) k with
    # R = R0 + R1 i + R2 j + R3 k; the real plane cancels by the
    # null-space condition and is dropped outright
    la, lb, lc, ld = l0, -l1, -(l0 + l2), -(l1 - l2)
    p1 = la @ r1 + lb @ r0 + lc @ r3 - ld @ r2
    p2 = la @ r2 - lb @ r3 + lc @ r0 + ld @ r1
    p3 = la @ r3 + lb @ r2 - lc @ r1 + ld @ r0

    # rank-1 nonnegativity lift: floor keeps the shift integral and the
    # shifted channels >= 0 exactly
    planes = [p - np.floor(p.min()) for p in (p1, p2, p3)]
    return QMatrix.from_pure(*planes)


def gen_exact(d1: int, d2: int, r: int, seed: int) -> QMatrix:
    """Random d1 x d2 nonnegative pure quaternion matrix of rank r.

    Draws L0, L1, L2 uniform on [0,1], builds the rank-(r-1) product of
    the structured quaternion factors, then applies the rank-1
    nonnegativity lift per imaginary channel.  Real part is exactly
    zero; rank equals r for generic draws; requires 2 <= r <= min(d1, d2).
    """
    return _gen_exact_from_rng(d1, d2, r, rng_from_seed(seed))


def gen_approx(d1: int, d2: int, r: int, seed: int) -> QMatrix:
    """Approximately rank-r variant: full rank, r dominant singular values.

    Perturbs the exact generator's output by -0.1 * tau * uniform noise
    per imaginary channel, tau being the smallest component over all
    channels, so every entry stays nonnegative.  The perturbation draws
    continue the same seeded stream, so the same seed reproduces both
    the base matrix and the perturbed one.
    """
    rng = rng_from_seed(seed)
    base = _gen_exact_from_rng(d1, d2, r, rng)
    tau = float(min(base.c1.min(), base.c2.min(), base.c3.min()))
    q1 = rng.uniform(0.0, 1.0, (d1, d2))
    q2 = rng.uniform(0.0, 1.0, (d1, d2))
    q3 = rng.uniform(0.0, 1.0, (d1, d2))
    return QMatrix.from_pure(base.c1 - 0.1 * tau * q1,
                             base.c2 - 0.1 * tau * q2,
                             base.c3 - 0.1 * tau * q3)
