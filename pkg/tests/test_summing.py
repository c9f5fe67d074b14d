import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cstar_powernorms import (
    AlgebraDescriptor,
    AlgebraElement,
    ConstructionError,
    Frame,
    FrameError,
    ModuleOperator,
    ModuleVector,
    SearchBudget,
    ShapeError,
    UnsupportedAlgebraError,
    alg_abs,
    alg_classify,
    alg_leq,
    alg_sample,
    frame_verify,
    op_norm,
    pi1,
    pi2_estimate,
    pi2_frame,
    pi_adjoint_symmetry_check,
    sample_operator,
    sample_vector,
    standard_frame,
    theta,
    triangle_decomposition,
    vec_norm,
)
from cstar_powernorms import summing as sm
from strategies import commutative_descriptors, descriptors, ranks, seeds

C = AlgebraDescriptor((1,))
C2 = AlgebraDescriptor((1, 1))
M2 = AlgebraDescriptor((2,))
SMALL = SearchBudget(samples=1000, restarts=2, local_steps=20)


def scalar_op(rows):
    rows = np.asarray(rows, dtype=complex)
    return ModuleOperator(C, rows.shape[1], rows.shape[0], [rows])


def frobenius(t):
    return float(np.sqrt(sum(abs(z) ** 2 for z in np.asarray(t.mats[0]).ravel())))


class TestFrames:
    def test_standard_unit(self, desc):
        f = standard_frame(desc, 1)
        assert f.bounds == (1.0, 1.0) and f.normalized_tight
        assert f.vectors[0].entries[0].allclose(AlgebraElement.identity(desc), 0)

    def test_standard_tight_over_pairs(self):
        f = standard_frame(C2, 3)
        assert len(f.vectors) == 3
        c, d = frame_verify(f, trials=100, seed=0)
        assert abs(c - 1) <= 1e-12 and abs(d - 1) <= 1e-12

    def test_standard_identity_residual(self, desc):
        f = standard_frame(desc, 2)
        for i in range(100):
            x = sample_vector(desc, 2, i)
            total = sum((sm.inner_product(x, v) @ sm.inner_product(v, x) for v in f.vectors[1:]),
                        sm.inner_product(x, f.vectors[0]) @ sm.inner_product(f.vectors[0], x))
            assert total.allclose(sm.inner_product(x, x), 1e-12 * (1 + vec_norm(x) ** 2))

    def test_doubled_basis(self):
        vecs = standard_frame(C2, 2).vectors * 2
        c, d = frame_verify(Frame(vecs), trials=20)
        assert c == pytest.approx(2.0, abs=1e-12) and d == pytest.approx(2.0, abs=1e-12)

    def test_skew_pair_bounds(self):
        e1, e2 = ModuleVector.basis(C, 2, 0), ModuleVector.basis(C, 2, 1)
        c, d = frame_verify(Frame([e1, e1 + e2]), trials=50, seed=1)
        assert c == pytest.approx((3 - np.sqrt(5)) / 2, abs=1e-12)
        assert d == pytest.approx((3 + np.sqrt(5)) / 2, abs=1e-12)

    def test_not_a_frame(self):
        with pytest.raises(FrameError):
            Frame([ModuleVector.basis(C, 2, 0)])

    @given(commutative_descriptors, ranks, seeds)
    def test_rotated_frame_tight(self, d, m, seed):
        f = sm.rotated_frame(d, m, seed)
        assert f.normalized_tight


class TestPi2Frame:
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_identity(self, m):
        assert pi2_frame(ModuleOperator.identity(C, m)).value == pytest.approx(np.sqrt(m), 1e-15)

    @given(ranks, ranks, seeds)
    def test_frobenius(self, m, mp, seed):
        t = sample_operator(C, m, mp, seed=seed)
        assert abs(pi2_frame(t).value - frobenius(t)) <= 1e-10

    def test_zero(self):
        assert pi2_frame(ModuleOperator.zero(C2, 2, 2)).value == 0.0

    def test_needs_commutative(self):
        with pytest.raises(UnsupportedAlgebraError):
            pi2_frame(sample_operator(M2, 1, seed=0))

    def test_non_tight_rejected(self):
        e1, e2 = ModuleVector.basis(C, 2, 0), ModuleVector.basis(C, 2, 1)
        with pytest.raises(FrameError):
            pi2_frame(ModuleOperator.identity(C, 2), Frame([e1, e1 + e2]))

    def test_frame_must_match_domain(self):
        with pytest.raises(ShapeError):
            pi2_frame(ModuleOperator.identity(C, 2), standard_frame(C, 3))

    @given(commutative_descriptors, ranks, seeds)
    def test_frame_independence(self, d, m, seed):
        t = sample_operator(d, m, seed=seed)
        assert abs(pi2_frame(t).value - pi2_frame(t, sm.rotated_frame(d, m, seed)).value) <= 1e-9

    @given(commutative_descriptors, ranks, ranks, ranks, seeds)
    def test_ideal_inequalities(self, d, m1, m2, m3, seed):
        t = sample_operator(d, m1, m2, seed=seed)
        s = sample_operator(d, m2, m3, seed=seed + 1)
        p = pi2_frame(s @ t).value
        assert p <= op_norm(s) * pi2_frame(t).value + 1e-9
        assert p <= pi2_frame(s).value * op_norm(t) + 1e-9


class TestTheta:
    @given(ranks, ranks, seeds)
    def test_product_over_scalars(self, m, mp, seed):
        x, y = sample_vector(C, m, seed), sample_vector(C, mp, seed + 1)
        assert abs(pi2_frame(theta(y, x)).value - vec_norm(x) * vec_norm(y)) <= 1e-9

    @given(commutative_descriptors, ranks, ranks, seeds)
    def test_equals_operator_norm(self, d, m, mp, seed):
        x, y = sample_vector(d, m, seed), sample_vector(d, mp, seed + 1)
        th = theta(y, x)
        assert abs(pi2_frame(th).value - op_norm(th)) <= 1e-9
        assert pi2_frame(th).value <= vec_norm(x) * vec_norm(y) + 1e-9

    def test_disjoint_supports(self):
        # the vector-norm product is 1 while the operator vanishes
        x = ModuleVector(C2, 1, [np.array([[1.0]]), np.array([[0.0]])])
        y = ModuleVector(C2, 1, [np.array([[0.0]]), np.array([[1.0]])])
        assert vec_norm(x) * vec_norm(y) == 1.0
        assert pi2_frame(theta(y, x)).value == 0.0

    @given(st.sampled_from([(2,), (2, 1)]), ranks, seeds)
    def test_noncommutative_soundness(self, d, m, seed):
        x, y = sample_vector(d, m, seed), sample_vector(d, m, seed + 1)
        th = theta(y, x)
        rep = pi2_estimate(th, budget=SMALL, seed=seed)
        assert rep.value <= vec_norm(x) * vec_norm(y) + 1e-9
        assert rep.value >= op_norm(th) - 1e-9


class TestPi2Estimate:
    @given(descriptors, seeds)
    def test_on_algebra_attains_norm(self, d, seed):
        t = sample_operator(d, 1, seed=seed)
        rep = pi2_estimate(t, budget=SMALL, seed=seed)
        assert abs(rep.value - op_norm(t)) <= 1e-10

    def test_unit_witness_on_algebra(self, desc):
        t = sample_operator(desc, 1, seed=3)
        one = ModuleVector.basis(desc, 1, 0)
        assert vec_norm(t @ one) <= op_norm(t) + 1e-12
        val, _ = sm._tuple_value(list(t.mats), [one], desc.commutative(), "square")
        assert val == pytest.approx(vec_norm(t @ one), rel=1e-12)

    @given(commutative_descriptors, ranks, seeds)
    def test_commutative_bounds(self, d, m, seed):
        t = sample_operator(d, m, seed=seed)
        rep = pi2_estimate(t, budget=SearchBudget(), seed=seed)
        exact = pi2_frame(t).value
        assert rep.normalization == "exact_mu"
        assert 0.9 * exact <= rep.value <= exact + 1e-9

    def test_noncommutative_normalization(self):
        rep = pi2_estimate(sample_operator((2, 1), 2, seed=1), budget=SMALL, seed=0)
        assert rep.normalization == "certified_upper_bound"
        assert rep.estimate.kind == "lower_bound"

    @given(descriptors, ranks, seeds)
    def test_witness_admissible_and_faithful(self, d, m, seed):
        t = sample_operator(d, m, seed=seed)
        rep = pi2_estimate(t, budget=SMALL, seed=seed)
        xs = rep.estimate.witness
        assert sm.weighted_tuple_admissibility(xs) <= 1 + 1e-9
        direct = np.sqrt(sm.alg_norm(sm._square_sum([t @ x for x in xs])))
        assert abs(direct - rep.value) <= 1e-10

    def test_monotone_in_length(self):
        t = sample_operator(C2, 2, seed=4)
        vals = [pi2_estimate(t, n_max=n, budget=SMALL, seed=2).value for n in (1, 2, 4, 8)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_zero(self, desc):
        assert pi2_estimate(ModuleOperator.zero(desc, 2, 2), budget=SMALL).value == 0.0

    def test_bad_length(self):
        with pytest.raises(ValueError):
            pi2_estimate(ModuleOperator.identity(C, 2), n_max=0)


class TestPi1:
    def test_diagonal_trace_norm(self):
        assert pi1(scalar_op(np.diag([1.0, 2.0]))).value == pytest.approx(3.0, abs=1e-14)

    @given(ranks, seeds)
    def test_trace_norm(self, m, seed):
        t = sample_operator(C, m, seed=seed)
        assert abs(pi1(t).value - np.linalg.svd(t.mats[0], compute_uv=False).sum()) <= 1e-9

    @given(descriptors, seeds)
    def test_on_algebra_is_norm(self, d, seed):
        t = sample_operator(d, 1, seed=seed)
        assert abs(pi1(t, "estimate", budget=SMALL, seed=seed).value - op_norm(t)) <= 1e-10

    def test_zero(self):
        assert pi1(ModuleOperator.zero(C2, 2, 2)).value == 0.0

    @given(commutative_descriptors, ranks, seeds)
    def test_properties(self, d, m, seed):
        rng = np.random.default_rng(seed)
        t, s = sample_operator(d, m, seed=rng), sample_operator(d, m, seed=rng)
        pt, ps = pi1(t).value, pi1(s).value
        assert pi1(t + s).value <= pt + ps + 1e-9
        lam = complex(rng.normal(), rng.normal())
        assert pi1(t * lam).value == pytest.approx(abs(lam) * pt, rel=1e-12)
        assert op_norm(t) <= pt + 1e-9
        assert pi1(t @ s).value <= op_norm(t) * ps + 1e-9
        assert pi2_frame(t).value ** 2 <= op_norm(t) * pt + 1e-9
        assert pi1(t, "estimate", budget=SMALL, seed=seed).value <= pt + 1e-9

    def test_square_root_relation(self, rng):
        t = sample_operator(C2, 2, seed=rng)
        root = sm.op_abs(t)
        from cstar_powernorms.hilbert_module import op_sqrt_psd
        assert pi1(t).value == pytest.approx(pi2_frame(op_sqrt_psd(root)).value ** 2, rel=1e-10)

    def test_mode_checks(self):
        with pytest.raises(UnsupportedAlgebraError):
            pi1(sample_operator(M2, 1, seed=0))
        with pytest.raises(ValueError):
            pi1(ModuleOperator.identity(C, 1), mode="other")
        with pytest.raises(ShapeError):
            pi1(sample_operator(C, 1, 2, seed=0))


class TestTriangle:
    def test_scalar_cancellation(self):
        a, b = AlgebraElement(C, [[[1.0]]]), AlgebraElement(C, [[[-1.0]]])
        u, v = triangle_decomposition(a, b)
        assert "unitary" in alg_classify(u) and "unitary" in alg_classify(v)
        assert sm.triangle_margin(a, b, u, v) == pytest.approx(2.0)

    def test_commuting_positive(self):
        a = AlgebraElement(M2, [np.diag([1.0, 2.0])])
        b = AlgebraElement(M2, [np.diag([3.0, 0.5])])
        one = AlgebraElement.identity(M2)
        assert sm.triangle_margin(a, b, one, one) >= -1e-12
        u, v = triangle_decomposition(a, b)
        assert sm.triangle_margin(a, b, u, v) >= -1e-10

    def test_stored_non_triangle_pair(self):
        a = AlgebraElement(M2, [np.array([[1, 0], [0, 0]], dtype=complex)])
        b = AlgebraElement(M2, [np.array([[0, 1], [0, 0]], dtype=complex)])
        assert sm.plain_triangle_margin(a, b) == pytest.approx(1 - np.sqrt(2), abs=1e-12)
        u, v = triangle_decomposition(a, b)
        assert sm.triangle_margin(a, b, u, v) >= -1e-10

    @given(descriptors, seeds, st.sampled_from([0.0, 1e-6]))
    def test_random_pairs(self, d, seed, eps):
        a, b = alg_sample(d, "generic", seed), alg_sample(d, "generic", seed + 1)
        u, v = triangle_decomposition(a, b, eps)
        for w in (u, v):
            assert "unitary" in alg_classify(w, 1e-10)
        rhs = u.adjoint() @ alg_abs(a) @ u + v.adjoint() @ alg_abs(b) @ v
        assert alg_leq(alg_abs(a + b), rhs + AlgebraElement.identity(d) * eps, 1e-9)

    def test_validation(self):
        with pytest.raises(ShapeError):
            triangle_decomposition(alg_sample(C, "generic", 0), alg_sample(M2, "generic", 0))
        with pytest.raises(ValueError):
            triangle_decomposition(alg_sample(C, "generic", 0), alg_sample(C, "generic", 1), -1)

    def test_construction_error_type(self):
        assert issubclass(ConstructionError, ArithmeticError)


class TestAdjointSymmetry:
    @given(ranks, ranks, seeds)
    def test_scalars(self, m, mp, seed):
        t = sample_operator(C, m, mp, seed=seed)
        rep = pi_adjoint_symmetry_check(t)
        assert rep.mode == "exact" and rep.passed
        assert abs(frobenius(t) - frobenius(t.adjoint())) <= 1e-12

    def test_commutative_pair(self):
        rep = pi_adjoint_symmetry_check(sample_operator(C2, 2, seed=8))
        assert rep.mode == "exact" and rep.passed and rep.pi1 is not None

    @pytest.mark.parametrize("d,m,mp", [((2,), 2, 2), ((2, 1), 1, 2)])
    def test_noncommutative(self, d, m, mp):
        rep = pi_adjoint_symmetry_check(sample_operator(d, m, mp, seed=5), SMALL, 3)
        assert rep.mode == "statistical" and rep.passed
