"""Complex adjoint representation, quaternion SVD and singular value
thresholding.

A quaternion matrix A = A1 + A2*j (A1, A2 complex) is represented by the
2d1 x 2d2 complex block matrix

    [ A1        A2      ]
    [ -conj(A2) conj(A1) ]

which preserves addition, multiplication and conjugate transposition.
Its singular values come in equal pairs; averaging each sorted pair gives
the quaternion singular values, and one representative of each
J-symmetric singular-vector pair maps back to a quaternion unitary
factor.  J here is the block matrix [[0, I], [-I, 0]].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, RepresentationError
from .quat import QMatrix, matmul

# residual norms below this keep a candidate in the symplectic
# Gram-Schmidt pass; true partner columns come out at ~1e-15
_GS_KEEP = 1e-3


def to_adjoint(a: QMatrix) -> np.ndarray:
    """Complex adjoint matrix of shape (2*d1, 2*d2)."""
    a1 = a.c0 + 1j * a.c1
    a2 = a.c2 + 1j * a.c3
    top = np.hstack([a1, a2])
    bot = np.hstack([-np.conj(a2), np.conj(a1)])
    return np.vstack([top, bot])


def _j_conj(m: np.ndarray) -> np.ndarray:
    """J * conj(M) * J^T for the block structure map."""
    d1 = m.shape[0] // 2
    d2 = m.shape[1] // 2
    c = np.conj(m)
    # J @ X swaps block rows with a sign; X @ J^T swaps block cols
    top = np.hstack([c[d1:, d2:], -c[d1:, :d2]])
    bot = np.hstack([-c[:d1, d2:], c[:d1, :d2]])
    return np.vstack([top, bot])


def adjoint_symmetry_defect(m: np.ndarray) -> float:
    """Relative deviation from the J-symmetry that adjoints satisfy."""
    scale = max(1.0, float(np.linalg.norm(m)))
    return float(np.linalg.norm(m - _j_conj(m))) / scale


def from_adjoint(m: np.ndarray, tol: float = 1e-6) -> QMatrix:
    """Map a (2d1, 2d2) complex matrix back to a quaternion matrix.

    The input is symmetrized by averaging with J*conj(M)*J^T first, so
    numerically perturbed adjoints round-trip cleanly; asymmetry beyond
    `tol` (relative) raises instead.
    """
    if m.ndim != 2 or m.shape[0] % 2 or m.shape[1] % 2:
        raise RepresentationError(f"adjoint must have even shape, got {m.shape}")
    defect = adjoint_symmetry_defect(m)
    if defect > tol:
        raise RepresentationError(
            f"matrix violates adjoint structure: relative defect {defect:.3e}")
    m = (m + _j_conj(m)) / 2.0
    d1 = m.shape[0] // 2
    d2 = m.shape[1] // 2
    a1 = m[:d1, :d2]
    a2 = m[:d1, d2:]
    return QMatrix(a1.real, a1.imag, a2.real, a2.imag)


def _j_conj_cols(cols: np.ndarray) -> np.ndarray:
    """Partner columns J^T * conj(cols); partners complete each kept
    representative to the full complex basis."""
    n = cols.shape[0] // 2
    c = np.conj(cols)
    return np.vstack([c[n:], -c[:n]])


def _pair_cluster_bounds(s: np.ndarray, s1: float) -> list[tuple[int, int]]:
    """Split sorted singular values into even-sized clusters at gaps."""
    gap = max(1e-10 * s1, 1e-300)
    bounds = []
    start = 0
    for i in range(1, len(s)):
        if s[i - 1] - s[i] > gap and (i - start) % 2 == 0:
            bounds.append((start, i))
            start = i
    bounds.append((start, len(s)))
    return bounds


def _symplectic_select(cols: np.ndarray, clusters: list[tuple[int, int]]) -> np.ndarray:
    """Pick one representative per J-symmetric pair of columns.

    Within each cluster of (near-)equal singular values, Gram-Schmidt
    against both the kept representatives and their partners; exact
    partner columns project to ~0 and are dropped.
    """
    kept: list[np.ndarray] = []
    for lo, hi in clusters:
        want = (hi - lo) // 2
        got: list[np.ndarray] = []
        pending = [cols[:, i] for i in range(lo, hi)]
        for threshold in (0.3, _GS_KEEP, 1e-8):
            if len(got) == want:
                break
            rest = []
            for v in pending:
                if len(got) == want:
                    rest.append(v)
                    continue
                w = v.copy()
                for u in got:
                    w -= u * (np.conj(u) @ w)
                    up = _j_conj_cols(u[:, None])[:, 0]
                    w -= up * (np.conj(up) @ w)
                nrm = np.linalg.norm(w)
                if nrm > threshold:
                    got.append(w / nrm)
                else:
                    rest.append(v)
            pending = rest
        if len(got) != want:
            raise NumericalError(
                f"could not extract {want} paired singular vectors from a "
                f"cluster of {hi - lo}")
        kept.extend(got)
    return np.column_stack(kept) if kept else np.zeros((cols.shape[0], 0))


def _complete_symplectic(phi: np.ndarray, target: int,
                         candidates: np.ndarray) -> np.ndarray:
    """Extend kept columns to `target` total, preserving pair structure."""
    cols = [phi[:, i] for i in range(phi.shape[1])]
    pool = [candidates[:, i] for i in range(candidates.shape[1])]
    dim = phi.shape[0]
    pool.extend(np.eye(dim, dtype=complex)[:, i] for i in range(dim))
    for v in pool:
        if len(cols) >= target:
            break
        w = v.astype(complex).copy()
        for u in cols:
            w -= u * (np.conj(u) @ w)
            up = _j_conj_cols(u[:, None])[:, 0]
            w -= up * (np.conj(up) @ w)
        nrm = np.linalg.norm(w)
        if nrm > _GS_KEEP:
            cols.append(w / nrm)
    if len(cols) < target:
        raise NumericalError("failed to complete a quaternion unitary basis")
    return np.column_stack(cols)


def _phi_to_qmatrix(phi: np.ndarray) -> QMatrix:
    """Representative columns (2n, n) -> quaternion n x n matrix."""
    n = phi.shape[0] // 2
    v1 = phi[:n, :]
    v2 = -np.conj(phi[n:, :])
    return QMatrix(v1.real, v1.imag, v2.real, v2.imag)


@dataclass(frozen=True)
class QSVD:
    """Quaternion singular value decomposition A = U diag(sigma) V*."""

    u: QMatrix
    sigma: np.ndarray
    v: QMatrix

    def reconstruct(self) -> QMatrix:
        d1, d2 = self.u.d1, self.v.d1
        k = len(self.sigma)
        sig = np.zeros((d1, d2))
        sig[:k, :k] = np.diag(self.sigma)
        return matmul(matmul(self.u, QMatrix.from_real(sig)), self.v.hermitian())

    def rank(self, tol: float | None = None) -> int:
        if self.sigma.size == 0 or self.sigma[0] == 0.0:
            return 0
        if tol is None:
            tol = 1e-10 * max(self.u.d1, self.v.d1)
        return int(np.sum(self.sigma > tol * self.sigma[0]))


def adjoint_singular_values(a: QMatrix) -> np.ndarray:
    """All 2*min(d1,d2) singular values of the complex adjoint, sorted."""
    try:
        return np.linalg.svd(to_adjoint(a), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"complex SVD did not converge: {exc}") from exc


def singular_values(a: QMatrix) -> np.ndarray:
    """Quaternion singular values (each adjoint pair averaged), descending."""
    s = adjoint_singular_values(a)
    return (s[0::2] + s[1::2]) / 2.0


def qsvd(a: QMatrix) -> QSVD:
    """Full quaternion SVD with unitary quaternion factors."""
    m = to_adjoint(a)
    try:
        p, s, vh = np.linalg.svd(m, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"complex SVD did not converge: {exc}") from exc
    d1, d2 = a.shape
    kmin = min(d1, d2)
    sigma = (s[0:2 * kmin:2] + s[1:2 * kmin:2]) / 2.0
    s1 = float(s[0]) if s.size else 0.0

    # suffix of (numerically) zero singular values, plus the columns numpy
    # returns beyond 2*kmin, all live in one null cluster
    s_ext = np.concatenate([s, np.zeros(2 * d2 - len(s))])
    clusters = _pair_cluster_bounds(s_ext, s1 if s1 > 0 else 1.0)
    v_cols = np.conj(vh).T
    phi_v = _symplectic_select(v_cols, clusters)

    link_tol = 1e-11 * s1
    linked = int(np.sum(sigma > link_tol)) if s1 > 0 else 0
    u_cols = []
    for i in range(linked):
        w = m @ phi_v[:, i]
        u_cols.append(w / np.linalg.norm(w))
    phi_u = (np.column_stack(u_cols) if u_cols
             else np.zeros((2 * d1, 0), dtype=complex))
    phi_u = _complete_symplectic(phi_u, d1, p)

    u = _phi_to_qmatrix(phi_u)
    v = _phi_to_qmatrix(phi_v)
    sigma.setflags(write=False)
    return QSVD(u=u, sigma=sigma, v=v)


def rank(a: QMatrix, tol: float | None = None) -> int:
    """Numerical rank: singular values above tol * sigma_1.

    Default tol is 1e-10 * max(d1, d2).
    """
    s = singular_values(a)
    if s.size == 0 or s[0] == 0.0:
        return 0
    if tol is None:
        tol = 1e-10 * max(a.d1, a.d2)
    return int(np.sum(s > tol * s[0]))


def nuclear_norm(a: QMatrix) -> float:
    return float(singular_values(a).sum())


def operator_norm(a: QMatrix) -> float:
    s = singular_values(a)
    return float(s[0]) if s.size else 0.0


def spectral_norms(a: QMatrix) -> dict[str, float]:
    s = singular_values(a)
    return {"nuclear": float(s.sum()), "operator": float(s[0]) if s.size else 0.0}


def svt(a: QMatrix, tau: float) -> QMatrix:
    """Singular value thresholding U max(Sigma - tau, 0) V*.

    This is the proximal operator of tau * nuclear norm at A.  Computed in
    the adjoint domain: both elements of each singular value pair shrink
    by the same tau, and re-symmetrizing the thresholded adjoint repairs
    any numerical pair splitting before mapping back.
    """
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    m = to_adjoint(a)
    try:
        p, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"complex SVD did not converge: {exc}") from exc
    shrunk = np.maximum(s - tau, 0.0)
    nz = shrunk > 0
    d = (p[:, nz] * shrunk[nz]) @ vh[nz, :]
    d = (d + _j_conj(d)) / 2.0
    dd1 = a.d1
    dd2 = a.d2
    a1 = d[:dd1, :dd2]
    a2 = d[:dd1, dd2:]
    return QMatrix(a1.real, a1.imag, a2.real, a2.imag)
