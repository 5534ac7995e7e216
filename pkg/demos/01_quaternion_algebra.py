"""Quaternion matrices, the complex adjoint, and the quaternion SVD.

A tour of the algebra layer: non-commutative products, norms, the
2d x 2d complex adjoint representation, and why keeping the real part
of a reconstruction is a bad idea for low-rank structure.
"""

import numpy as np

from quatcomp import (
    QMatrix,
    Quaternion,
    fro_norm,
    matmul,
    nuclear_norm,
    qmul,
    qsvd,
    rank,
    singular_values,
    to_adjoint,
)

# %% scalars: i*j = k but j*i = -k
i, j, k = Quaternion(0, 1, 0, 0), Quaternion(0, 0, 1, 0), Quaternion(0, 0, 0, 1)
print("i*j =", qmul(i, j))
print("j*i =", qmul(j, i))

q = Quaternion(1, 2, 3, 4)
print("|q|^2 =", abs(q) ** 2, " q*conj(q) =", qmul(q, q.conj()))

# %% a random quaternion matrix and its SVD via the complex adjoint
rng = np.random.default_rng(0)
a = QMatrix(*[rng.standard_normal((5, 4)) for _ in range(4)])
print("\nadjoint shape:", to_adjoint(a).shape)

dec = qsvd(a)
print("singular values:", np.round(dec.sigma, 4))
print("reconstruction error:", fro_norm(dec.reconstruct() - a))
print("U*U - I:", fro_norm(matmul(dec.u.hermitian(), dec.u) - QMatrix.eye(5)))

# %% dropping the real part can destroy low-rankness
a2 = QMatrix.from_entries([
    [Quaternion(1, 3, 0, 0), Quaternion(0, 0, -3, 1)],
    [Quaternion(1, 0, 3, 0), Quaternion(0, 3, 0, 1)],
])
a2_pure = QMatrix(np.zeros((2, 2)), a2.c1, a2.c2, a2.c3)
print("\nrank with real part:   ", rank(a2),
      " nuclear:", round(nuclear_norm(a2), 4))
print("rank real part removed:", rank(a2_pure),
      " nuclear:", round(nuclear_norm(a2_pure), 4))
print("singular values before/after:",
      np.round(singular_values(a2), 3), np.round(singular_values(a2_pure), 3))
