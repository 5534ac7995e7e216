import numpy as np
import pytest

from quatcomp.errors import DomainError, PurityError, ShapeMismatchError
from quatcomp.quat import (
    ChannelWeight,
    QMatrix,
    Quaternion,
    apply_weight,
    fro_norm,
    inner,
    matmul,
    max_norm,
    norms,
    qmul,
    trace,
    two_inf_norm,
    weighted_fro_norm,
)

from helpers import rand_qmatrix, rand_quaternion, rand_trace3_weight

I = Quaternion(0, 1, 0, 0)
J = Quaternion(0, 0, 1, 0)
K = Quaternion(0, 0, 0, 1)


def left_mult_matrix(p):
    """4x4 real matrix of q -> p*q, expanded by distributivity."""
    return np.array([
        [p.q0, -p.q1, -p.q2, -p.q3],
        [p.q1, p.q0, -p.q3, p.q2],
        [p.q2, p.q3, p.q0, -p.q1],
        [p.q3, -p.q2, p.q1, p.q0],
    ])


def as_vec4(q):
    return np.array([q.q0, q.q1, q.q2, q.q3])


class TestQuaternionScalar:
    def test_unit_products(self):
        assert qmul(I, J) == K
        assert qmul(J, I) == -K
        assert qmul(J, K) == I
        assert qmul(K, I) == J
        for u in (I, J, K):
            assert qmul(u, u) == Quaternion(-1, 0, 0, 0)

    def test_q_times_conj_is_squared_magnitude(self):
        q = Quaternion(1, 2, 3, 4)
        assert qmul(q, q.conj()) == Quaternion(30, 0, 0, 0)
        assert abs(q) ** 2 == pytest.approx(30.0)

    def test_matches_left_multiplication_oracle(self):
        rng = np.random.default_rng(101)
        for _ in range(200):
            p = rand_quaternion(rng)
            q = rand_quaternion(rng)
            expect = left_mult_matrix(p) @ as_vec4(q)
            np.testing.assert_allclose(as_vec4(qmul(p, q)), expect,
                                       rtol=1e-13, atol=1e-13)

    def test_conj_reverses_products(self):
        rng = np.random.default_rng(102)
        for _ in range(50):
            p = rand_quaternion(rng)
            q = rand_quaternion(rng)
            lhs = qmul(p, q).conj()
            rhs = qmul(q.conj(), p.conj())
            np.testing.assert_allclose(as_vec4(lhs), as_vec4(rhs), atol=1e-13)

    def test_magnitude_multiplicative(self):
        rng = np.random.default_rng(103)
        for _ in range(100):
            p = rand_quaternion(rng)
            q = rand_quaternion(rng)
            assert abs(qmul(p, q)) == pytest.approx(abs(p) * abs(q), rel=1e-12)

    def test_distributes_over_addition(self):
        rng = np.random.default_rng(104)
        p, q, r = (rand_quaternion(rng) for _ in range(3))
        lhs = qmul(p, q + r)
        rhs = qmul(p, q) + qmul(p, r)
        np.testing.assert_allclose(as_vec4(lhs), as_vec4(rhs), atol=1e-13)

    def test_inverse(self):
        q = Quaternion(1, -2, 0.5, 3)
        qi = q.inverse()
        np.testing.assert_allclose(as_vec4(qmul(q, qi)), [1, 0, 0, 0],
                                   atol=1e-14)
        with pytest.raises(DomainError):
            Quaternion(0, 0, 0, 0).inverse()

    def test_purity_flags(self):
        assert Quaternion.pure(1, 2, 3).is_pure
        assert Quaternion.pure(1, 2, 3).is_pixel
        assert not Quaternion.pure(-1, 2, 3).is_pixel
        assert not Quaternion(1, 0, 0, 0).is_pure


class TestQMatrix:
    def test_entry_storage_round_trip(self):
        rng = np.random.default_rng(105)
        planes = [rng.standard_normal((3, 4)) for _ in range(4)]
        a = QMatrix(*planes)
        for i in range(3):
            for j in range(4):
                q = a.entry(i, j)
                assert (q.q0, q.q1, q.q2, q.q3) == (
                    planes[0][i, j], planes[1][i, j],
                    planes[2][i, j], planes[3][i, j])

    def test_identity_is_neutral(self):
        rng = np.random.default_rng(106)
        a = rand_qmatrix(rng, 4, 4)
        prod = matmul(a, QMatrix.eye(4))
        assert fro_norm(prod - a) == 0.0

    def test_inner_product_gives_fro_norm(self):
        rng = np.random.default_rng(107)
        a = rand_qmatrix(rng, 5, 3)
        ip = inner(a, a)
        scale = fro_norm(a) ** 2
        assert abs(ip.q1) <= 1e-12 * scale
        assert abs(ip.q2) <= 1e-12 * scale
        assert abs(ip.q3) <= 1e-12 * scale
        assert ip.q0 == pytest.approx(scale, rel=1e-12)

    def test_product_hermitian_reversal(self):
        rng = np.random.default_rng(108)
        a = rand_qmatrix(rng, 3, 2)
        b = rand_qmatrix(rng, 2, 5)
        lhs = matmul(a, b).hermitian()
        rhs = matmul(b.hermitian(), a.hermitian())
        assert fro_norm(lhs - rhs) <= 1e-12 * max(1.0, fro_norm(lhs))

    def test_matmul_associates_with_entries(self):
        # 1x1 matrices reduce to scalar multiplication
        rng = np.random.default_rng(109)
        p = rand_quaternion(rng)
        q = rand_quaternion(rng)
        a = QMatrix.from_entries([[p]])
        b = QMatrix.from_entries([[q]])
        assert matmul(a, b).entry(0, 0) == qmul(p, q)

    def test_trace_sums_diagonal(self):
        rng = np.random.default_rng(110)
        a = rand_qmatrix(rng, 4, 4)
        t = trace(a)
        expect = sum((a.entry(i, i) for i in range(4)),
                     start=Quaternion(0, 0, 0, 0))
        np.testing.assert_allclose(as_vec4(t), as_vec4(expect), atol=1e-13)

    def test_shape_mismatch_names_both_shapes(self):
        a = QMatrix.zeros(2, 3)
        b = QMatrix.zeros(4, 5)
        with pytest.raises(ShapeMismatchError, match=r"\(2, 3\).*\(4, 5\)"):
            matmul(a, b)
        with pytest.raises(ShapeMismatchError):
            a + b

    def test_purity_flag(self):
        rng = np.random.default_rng(111)
        a = rand_qmatrix(rng, 3, 3, pure=True)
        assert a.is_pure
        assert not rand_qmatrix(rng, 3, 3).is_pure

    def test_immutable(self):
        a = QMatrix.zeros(2, 2)
        with pytest.raises((ValueError, AttributeError)):
            a.c0[0, 0] = 1.0


class TestNorms:
    def test_zero_matrix(self):
        z = QMatrix.zeros(3, 5)
        vals = norms(z, ChannelWeight.identity())
        assert all(v == 0.0 for v in vals.values())

    def test_single_entry_pythagoras(self):
        c1 = np.zeros((2, 2))
        c2 = np.zeros((2, 2))
        c1[0, 1] = 3.0
        c2[0, 1] = 4.0
        a = QMatrix.from_pure(c1, c2, np.zeros((2, 2)))
        assert fro_norm(a) == pytest.approx(5.0)
        assert max_norm(a) == pytest.approx(5.0)

    def test_norm_ordering(self):
        rng = np.random.default_rng(112)
        for _ in range(20):
            a = rand_qmatrix(rng, 6, 4)
            assert max_norm(a) <= two_inf_norm(a) + 1e-12
            assert two_inf_norm(a) <= fro_norm(a) + 1e-12

    def test_identity_weight_matches_plain(self):
        rng = np.random.default_rng(113)
        a = rand_qmatrix(rng, 4, 4, pure=True)
        vals = norms(a, ChannelWeight.identity())
        assert vals["w_fro"] == pytest.approx(vals["fro"], rel=1e-12)
        assert vals["w_max"] == pytest.approx(vals["max"], rel=1e-12)

    def test_weighted_fro_equals_explicit_sqrt_transform(self):
        rng = np.random.default_rng(114)
        w = ChannelWeight(np.diag([2.0, 0.5, 0.5]))
        a = rand_qmatrix(rng, 5, 5, pure=True)
        # independent path: scale each channel by sqrt of its diagonal weight
        scaled = QMatrix.from_pure(a.c1 * np.sqrt(2.0), a.c2 * np.sqrt(0.5),
                                   a.c3 * np.sqrt(0.5))
        assert weighted_fro_norm(a, w) == pytest.approx(fro_norm(scaled),
                                                        rel=1e-12)

    def test_weighted_norm_requires_purity(self):
        rng = np.random.default_rng(115)
        a = rand_qmatrix(rng, 3, 3)
        with pytest.raises(PurityError):
            norms(a, ChannelWeight.identity())


class TestApplyWeight:
    def test_identity(self):
        rng = np.random.default_rng(116)
        a = rand_qmatrix(rng, 4, 3, pure=True)
        out = apply_weight(ChannelWeight.identity(), a)
        assert fro_norm(out - a) == 0.0

    def test_diagonal_scaling(self):
        w = ChannelWeight(np.diag([2.9, 0.05, 0.05]))
        c1 = np.ones((2, 2))
        a = QMatrix.from_pure(c1, np.zeros((2, 2)), np.zeros((2, 2)))
        out = apply_weight(w, a)
        np.testing.assert_allclose(out.c1, 2.9 * np.ones((2, 2)))
        np.testing.assert_allclose(out.c2, 0.0)

    def test_sqrt_twice_equals_full(self):
        rng = np.random.default_rng(117)
        for _ in range(10):
            w = rand_trace3_weight(rng)
            a = rand_qmatrix(rng, 4, 4, pure=True)
            twice = apply_weight(w, apply_weight(w, a, sqrt=True), sqrt=True)
            once = apply_weight(w, a)
            assert fro_norm(twice - once) <= 1e-10 * max(1.0, fro_norm(once))

    def test_weighted_fro_two_code_paths(self):
        rng = np.random.default_rng(118)
        for _ in range(10):
            w = rand_trace3_weight(rng)
            a = rand_qmatrix(rng, 5, 4, pure=True)
            direct = weighted_fro_norm(a, w)
            explicit = fro_norm(apply_weight(w, a, sqrt=True))
            assert direct == pytest.approx(explicit, abs=1e-10)

    def test_rejects_non_pure(self):
        rng = np.random.default_rng(119)
        with pytest.raises(PurityError):
            apply_weight(ChannelWeight.identity(), rand_qmatrix(rng, 3, 3))


class TestChannelWeight:
    def test_validates_symmetry(self):
        m = np.eye(3)
        m[0, 1] = 1e-6
        with pytest.raises(DomainError):
            ChannelWeight(m)

    def test_validates_positive_definite(self):
        with pytest.raises(DomainError):
            ChannelWeight(np.diag([3.0, 0.0, 0.0]))
        with pytest.raises(DomainError):
            ChannelWeight(np.diag([4.0, -0.5, -0.5]))

    def test_validates_trace(self):
        with pytest.raises(DomainError):
            ChannelWeight(np.eye(3) * 1.1)

    def test_sqrt_squares_back(self):
        rng = np.random.default_rng(120)
        for _ in range(20):
            w = rand_trace3_weight(rng)
            np.testing.assert_allclose(w.sqrt_w @ w.sqrt_w, w.w, atol=1e-10)
