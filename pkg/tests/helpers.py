"""Shared helpers for building random test fixtures."""

import numpy as np

from quatcomp.quat import ChannelWeight, QMatrix, Quaternion


def rand_qmatrix(rng, d1, d2, pure=False):
    planes = [rng.standard_normal((d1, d2)) for _ in range(4)]
    if pure:
        planes[0] = np.zeros((d1, d2))
    return QMatrix(*planes)


def rand_quaternion(rng, pure=False):
    q = rng.standard_normal(4)
    if pure:
        q[0] = 0.0
    return Quaternion(*q)


def rand_trace3_weight(rng):
    """Random symmetric positive definite weight with trace exactly 3."""
    m = rng.standard_normal((3, 3))
    s = m @ m.T + 0.05 * np.eye(3)
    s *= 3.0 / np.trace(s)
    # renormalize once more to push the trace within 1e-12 of 3
    s *= 3.0 / np.trace(s)
    return ChannelWeight(s)


def rand_low_rank(rng, d1, d2, r):
    """Random quaternion matrix of rank exactly r (generic product)."""
    from quatcomp.quat import matmul
    left = rand_qmatrix(rng, d1, r)
    right = rand_qmatrix(rng, r, d2)
    return matmul(left, right)
