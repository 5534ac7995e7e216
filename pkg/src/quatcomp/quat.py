"""Quaternion scalars, dense quaternion matrices and cross-channel weights.

A quaternion q = q0 + q1*i + q2*j + q3*k is stored as four float64
components.  Matrices are stored struct-of-arrays: four real planes of
shape (d1, d2), which keeps per-channel operations (weighting, projection,
complex-adjoint assembly) cheap and obvious.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, PurityError, ShapeMismatchError

_INV_FLOOR = 1e-300


class Quaternion:
    """Immutable quaternion scalar q0 + q1*i + q2*j + q3*k."""

    __slots__ = ("q0", "q1", "q2", "q3")

    def __init__(self, q0: float, q1: float, q2: float, q3: float):
        object.__setattr__(self, "q0", float(q0))
        object.__setattr__(self, "q1", float(q1))
        object.__setattr__(self, "q2", float(q2))
        object.__setattr__(self, "q3", float(q3))

    def __setattr__(self, name, value):
        raise AttributeError("Quaternion is immutable")

    @classmethod
    def pure(cls, q1: float, q2: float, q3: float) -> "Quaternion":
        return cls(0.0, q1, q2, q3)

    @property
    def is_pure(self) -> bool:
        return self.q0 == 0.0

    @property
    def is_pixel(self) -> bool:
        return self.q0 == 0.0 and self.q1 >= 0.0 and self.q2 >= 0.0 and self.q3 >= 0.0

    def conj(self) -> "Quaternion":
        return Quaternion(self.q0, -self.q1, -self.q2, -self.q3)

    def __abs__(self) -> float:
        return math.sqrt(self.q0**2 + self.q1**2 + self.q2**2 + self.q3**2)

    def inverse(self) -> "Quaternion":
        m2 = self.q0**2 + self.q1**2 + self.q2**2 + self.q3**2
        if m2 == 0.0 or math.sqrt(m2) < _INV_FLOOR:
            raise DomainError(
                f"cannot invert quaternion with magnitude {math.sqrt(m2)!r}")
        return Quaternion(self.q0 / m2, -self.q1 / m2, -self.q2 / m2, -self.q3 / m2)

    def vec(self) -> np.ndarray:
        """Imaginary part as a real 3-vector (q1, q2, q3)."""
        return np.array([self.q1, self.q2, self.q3])

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.q0 + other.q0, self.q1 + other.q1,
                          self.q2 + other.q2, self.q3 + other.q3)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.q0 - other.q0, self.q1 - other.q1,
                          self.q2 - other.q2, self.q3 - other.q3)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.q0, -self.q1, -self.q2, -self.q3)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return qmul(self, other)
        return Quaternion(self.q0 * other, self.q1 * other,
                          self.q2 * other, self.q3 * other)

    def __rmul__(self, other):
        # other is a real scalar; quaternion*quaternion goes through __mul__
        return Quaternion(self.q0 * other, self.q1 * other,
                          self.q2 * other, self.q3 * other)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Quaternion)
                and (self.q0, self.q1, self.q2, self.q3)
                == (other.q0, other.q1, other.q2, other.q3))

    def __hash__(self):
        return hash((self.q0, self.q1, self.q2, self.q3))

    def __repr__(self) -> str:
        return f"Quaternion({self.q0}, {self.q1}, {self.q2}, {self.q3})"


def qmul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product p*q (non-commutative, i*j = k = -j*i)."""
    return Quaternion(
        p.q0 * q.q0 - p.q1 * q.q1 - p.q2 * q.q2 - p.q3 * q.q3,
        p.q0 * q.q1 + p.q1 * q.q0 + p.q2 * q.q3 - p.q3 * q.q2,
        p.q0 * q.q2 - p.q1 * q.q3 + p.q2 * q.q0 + p.q3 * q.q1,
        p.q0 * q.q3 + p.q1 * q.q2 - p.q2 * q.q1 + p.q3 * q.q0,
    )


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


class QMatrix:
    """Dense quaternion matrix as four real component planes C0..C3."""

    __slots__ = ("c0", "c1", "c2", "c3", "d1", "d2", "_is_pure")

    def __init__(self, c0, c1, c2, c3):
        c0 = _freeze(c0)
        c1 = _freeze(c1)
        c2 = _freeze(c2)
        c3 = _freeze(c3)
        if not (c0.shape == c1.shape == c2.shape == c3.shape) or c0.ndim != 2:
            raise ShapeMismatchError(
                f"component planes must share one 2-d shape, got "
                f"{c0.shape}, {c1.shape}, {c2.shape}, {c3.shape}")
        object.__setattr__(self, "c0", c0)
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", c2)
        object.__setattr__(self, "c3", c3)
        object.__setattr__(self, "d1", c0.shape[0])
        object.__setattr__(self, "d2", c0.shape[1])
        object.__setattr__(self, "_is_pure", bool(np.all(c0 == 0.0)))

    def __setattr__(self, name, value):
        raise AttributeError("QMatrix is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def zeros(cls, d1: int, d2: int) -> "QMatrix":
        z = np.zeros((d1, d2))
        return cls(z, z, z, z)

    @classmethod
    def from_pure(cls, c1, c2, c3) -> "QMatrix":
        c1 = np.asarray(c1, dtype=np.float64)
        return cls(np.zeros_like(c1), c1, c2, c3)

    @classmethod
    def from_real(cls, c0) -> "QMatrix":
        c0 = np.asarray(c0, dtype=np.float64)
        z = np.zeros_like(c0)
        return cls(c0, z, z, z)

    @classmethod
    def eye(cls, d: int) -> "QMatrix":
        return cls.from_real(np.eye(d))

    @classmethod
    def from_entries(cls, entries) -> "QMatrix":
        """Build from a nested list of Quaternion scalars."""
        rows = len(entries)
        cols = len(entries[0])
        planes = [np.zeros((rows, cols)) for _ in range(4)]
        for i in range(rows):
            for j in range(cols):
                q = entries[i][j]
                planes[0][i, j] = q.q0
                planes[1][i, j] = q.q1
                planes[2][i, j] = q.q2
                planes[3][i, j] = q.q3
        return cls(*planes)

    # -- basic structure ----------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.d1, self.d2)

    @property
    def is_pure(self) -> bool:
        return self._is_pure

    @property
    def is_pixel(self) -> bool:
        return (self._is_pure and self.c1.min(initial=0.0) >= 0.0
                and self.c2.min(initial=0.0) >= 0.0
                and self.c3.min(initial=0.0) >= 0.0)

    def entry(self, i: int, j: int) -> Quaternion:
        return Quaternion(self.c0[i, j], self.c1[i, j], self.c2[i, j], self.c3[i, j])

    def components(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self.c0, self.c1, self.c2, self.c3)

    def channels(self) -> np.ndarray:
        """Imaginary channels stacked as an (d1, d2, 3) array."""
        return np.stack([self.c1, self.c2, self.c3], axis=-1)

    def abs_entries(self) -> np.ndarray:
        """Entrywise magnitudes |a_ij| as a real (d1, d2) array."""
        return np.sqrt(self.c0**2 + self.c1**2 + self.c2**2 + self.c3**2)

    # -- algebra -------------------------------------------------------

    def conj(self) -> "QMatrix":
        return QMatrix(self.c0, -self.c1, -self.c2, -self.c3)

    def transpose(self) -> "QMatrix":
        return QMatrix(self.c0.T, self.c1.T, self.c2.T, self.c3.T)

    def hermitian(self) -> "QMatrix":
        """Conjugate transpose A*."""
        return QMatrix(self.c0.T, -self.c1.T, -self.c2.T, -self.c3.T)

    def __add__(self, other: "QMatrix") -> "QMatrix":
        self._require_same_shape(other, "add")
        return QMatrix(self.c0 + other.c0, self.c1 + other.c1,
                       self.c2 + other.c2, self.c3 + other.c3)

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        self._require_same_shape(other, "subtract")
        return QMatrix(self.c0 - other.c0, self.c1 - other.c1,
                       self.c2 - other.c2, self.c3 - other.c3)

    def __neg__(self) -> "QMatrix":
        return QMatrix(-self.c0, -self.c1, -self.c2, -self.c3)

    def __mul__(self, s: float) -> "QMatrix":
        return QMatrix(self.c0 * s, self.c1 * s, self.c2 * s, self.c3 * s)

    __rmul__ = __mul__

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        return matmul(self, other)

    def _require_same_shape(self, other: "QMatrix", what: str):
        if self.shape != other.shape:
            raise ShapeMismatchError(
                f"cannot {what} matrices of shapes {self.shape} and {other.shape}")


def matmul(a: QMatrix, b: QMatrix) -> QMatrix:
    """Quaternion matrix product, expanded over real component planes."""
    if a.d2 != b.d1:
        raise ShapeMismatchError(
            f"cannot multiply matrices of shapes {a.shape} and {b.shape}")
    a0, a1, a2, a3 = a.components()
    b0, b1, b2, b3 = b.components()
    return QMatrix(
        a0 @ b0 - a1 @ b1 - a2 @ b2 - a3 @ b3,
        a0 @ b1 + a1 @ b0 + a2 @ b3 - a3 @ b2,
        a0 @ b2 - a1 @ b3 + a2 @ b0 + a3 @ b1,
        a0 @ b3 + a1 @ b2 - a2 @ b1 + a3 @ b0,
    )


def trace(a: QMatrix) -> Quaternion:
    """Sum of diagonal entries (a quaternion)."""
    k = min(a.d1, a.d2)
    idx = (np.arange(k), np.arange(k))
    return Quaternion(a.c0[idx].sum(), a.c1[idx].sum(),
                      a.c2[idx].sum(), a.c3[idx].sum())


def inner(a: QMatrix, b: QMatrix) -> Quaternion:
    """Standard inner product <A, B> = Tr(A* B)."""
    if a.shape != b.shape:
        raise ShapeMismatchError(
            f"inner product needs equal shapes, got {a.shape} and {b.shape}")
    a0, a1, a2, a3 = a.components()
    b0, b1, b2, b3 = b.components()
    # entrywise conj(a)*b summed; conj flips signs of a1..a3
    return Quaternion(
        np.sum(a0 * b0 + a1 * b1 + a2 * b2 + a3 * b3),
        np.sum(a0 * b1 - a1 * b0 - a2 * b3 + a3 * b2),
        np.sum(a0 * b2 + a1 * b3 - a2 * b0 - a3 * b1),
        np.sum(a0 * b3 - a1 * b2 + a2 * b1 - a3 * b0),
    )


def inner_real(a: QMatrix, b: QMatrix) -> float:
    """Real part of <A, B>, the Euclidean inner product of components."""
    if a.shape != b.shape:
        raise ShapeMismatchError(
            f"inner product needs equal shapes, got {a.shape} and {b.shape}")
    return float(np.sum(a.c0 * b.c0 + a.c1 * b.c1 + a.c2 * b.c2 + a.c3 * b.c3))


# -- cross-channel weights --------------------------------------------


class ChannelWeight:
    """Symmetric positive definite 3x3 weight with trace 3.

    Acts on the imaginary 3-vector of pure quaternions.  Caches the
    symmetric square root, the eigenvalue range and the largest entry,
    which the error-bound diagnostics need repeatedly.
    """

    __slots__ = ("w", "sqrt_w", "eigvals", "eigvecs", "lambda_min",
                 "lambda_max", "max_entry")

    def __init__(self, w):
        w = np.array(w, dtype=np.float64, copy=True)
        if w.shape != (3, 3):
            raise ShapeMismatchError(f"weight must be 3x3, got {w.shape}")
        if not np.allclose(w, w.T, atol=1e-12, rtol=0.0):
            raise DomainError("weight must be symmetric within 1e-12")
        w = (w + w.T) / 2.0
        vals, vecs = np.linalg.eigh(w)
        if vals[0] <= 0.0:
            raise DomainError(f"weight must be positive definite, "
                              f"eigenvalues {vals.tolist()}")
        if abs(vals.sum() - 3.0) > 1e-12:
            raise DomainError(f"weight trace must be 3 within 1e-12, "
                              f"got {vals.sum()!r}")
        sqrt_w = (vecs * np.sqrt(vals)) @ vecs.T
        w.setflags(write=False)
        sqrt_w.setflags(write=False)
        vals.setflags(write=False)
        vecs.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "sqrt_w", sqrt_w)
        object.__setattr__(self, "eigvals", vals)
        object.__setattr__(self, "eigvecs", vecs)
        object.__setattr__(self, "lambda_min", float(vals[0]))
        object.__setattr__(self, "lambda_max", float(vals[-1]))
        object.__setattr__(self, "max_entry", float(np.abs(w).max()))

    def __setattr__(self, name, value):
        raise AttributeError("ChannelWeight is immutable")

    @classmethod
    def identity(cls) -> "ChannelWeight":
        return cls(np.eye(3))

    @property
    def is_identity(self) -> bool:
        return bool(np.all(self.w == np.eye(3)))

    def apply_vec(self, v: np.ndarray, sqrt: bool = False) -> np.ndarray:
        """W @ v (or sqrt(W) @ v) for stacked 3-vectors of shape (..., 3)."""
        m = self.sqrt_w if sqrt else self.w
        return v @ m.T

    def magnitude(self, v: np.ndarray) -> np.ndarray:
        """Weighted magnitude sqrt(v^T W v) for stacked 3-vectors."""
        return np.sqrt(np.einsum("...i,ij,...j->...", v, self.w, v))

    def __repr__(self) -> str:
        return f"ChannelWeight({self.w.tolist()})"


def apply_weight(weight: ChannelWeight, a: QMatrix, sqrt: bool = False) -> QMatrix:
    """Entrywise left action of W (or sqrt(W)) on a pure quaternion matrix."""
    if not a.is_pure:
        raise PurityError("weighted operations require a pure quaternion matrix")
    m = weight.sqrt_w if sqrt else weight.w
    c1 = m[0, 0] * a.c1 + m[0, 1] * a.c2 + m[0, 2] * a.c3
    c2 = m[1, 0] * a.c1 + m[1, 1] * a.c2 + m[1, 2] * a.c3
    c3 = m[2, 0] * a.c1 + m[2, 1] * a.c2 + m[2, 2] * a.c3
    return QMatrix.from_pure(c1, c2, c3)


# -- non-spectral norms -----------------------------------------------


def fro_norm(a: QMatrix) -> float:
    return float(np.sqrt(np.sum(a.c0**2 + a.c1**2 + a.c2**2 + a.c3**2)))


def max_norm(a: QMatrix) -> float:
    """Largest entrywise magnitude max_ij |a_ij|."""
    return float(a.abs_entries().max())


def two_inf_norm(a: QMatrix) -> float:
    """Largest row norm, max_i sqrt(sum_j |a_ij|^2)."""
    sq = a.c0**2 + a.c1**2 + a.c2**2 + a.c3**2
    return float(np.sqrt(sq.sum(axis=1).max()))


def weighted_fro_norm(a: QMatrix, weight: ChannelWeight) -> float:
    return fro_norm(apply_weight(weight, a, sqrt=True))


def weighted_max_norm(a: QMatrix, weight: ChannelWeight) -> float:
    return max_norm(apply_weight(weight, a, sqrt=True))


def norms(a: QMatrix, weight: ChannelWeight | None = None) -> dict[str, float]:
    """All non-spectral norms; weighted variants when a weight is given."""
    out = {"fro": fro_norm(a), "max": max_norm(a), "two_inf": two_inf_norm(a)}
    if weight is not None:
        out["w_fro"] = weighted_fro_norm(a, weight)
        out["w_max"] = weighted_max_norm(a, weight)
    return out
