import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cstar_powernorms import (
    AlgebraDescriptor,
    ModuleOperator,
    ModuleVector,
    ProjectionFamily,
    SearchBudget,
    ShapeError,
    local_ascent,
    projection_family_search,
    sample_vector,
    sphere_sample,
    vec_norm,
)
from cstar_powernorms.powernorms import hilbert_family_value, mu_objective
from cstar_powernorms.search import (
    argmax_first,
    candidate_map,
    cayley,
    random_skew,
    sub_rng,
)
from strategies import descriptors, ranks, seeds

C = AlgebraDescriptor((1,))
SMALL = SearchBudget(samples=300, restarts=2, local_steps=40)


class TestBudget:
    def test_defaults(self):
        b = SearchBudget()
        assert (b.samples, b.restarts, b.local_steps, b.step_scale,
                b.stagnation_halvings) == (5000, 8, 200, 0.1, 5)

    @pytest.mark.parametrize("field", ["samples", "restarts", "local_steps",
                                       "step_scale", "stagnation_halvings"])
    def test_negative_rejected(self, field):
        with pytest.raises(ValueError):
            SearchBudget(**{field: -1})

    def test_scaled_keeps_counts_positive(self):
        b = SearchBudget().scaled(1e-6)
        assert min(b.samples, b.restarts, b.local_steps) == 1


class TestSphereSample:
    @given(descriptors, ranks, seeds)
    def test_unit_norm(self, d, m, seed):
        for x in sphere_sample(m, d, 5, seed):
            assert abs(vec_norm(x) - 1) <= 1e-12

    def test_deterministic_per_index(self):
        a = sphere_sample(2, (2, 1), 10, 3)
        b = sphere_sample(2, (2, 1), 4, 3)
        assert all(x.array_equal(y) for x, y in zip(a[:4], b))

    def test_count_validated(self):
        with pytest.raises(ValueError):
            sphere_sample(1, (1,), 0, 0)

    def test_mean_is_zero_within_five_sigma(self):
        xs = sphere_sample(2, (2,), 10_000, 5)
        coords = np.stack([x.mats[0].ravel() for x in xs])
        mean = coords.mean(axis=0)
        sigma = coords.std(axis=0) / np.sqrt(len(xs))
        assert np.all(np.abs(mean.real) <= 5 * sigma) and np.all(np.abs(mean.imag) <= 5 * sigma)


class TestPrimitives:
    @given(st.integers(1, 6), seeds)
    def test_cayley_is_unitary(self, n, seed):
        u = cayley(random_skew(n, sub_rng(seed)))
        assert np.allclose(u.conj().T @ u, np.eye(n), atol=1e-12)

    def test_argmax_ties_lowest_index(self):
        assert argmax_first([1.0, 3.0, 3.0, 2.0]) == 1

    def test_candidate_map_thread_independent(self, monkeypatch):
        items = list(range(20))
        serial = candidate_map(lambda i: sub_rng(9, i).random(), items)
        monkeypatch.setenv("CSTAR_THREADS", "4")
        assert candidate_map(lambda i: sub_rng(9, i).random(), items) == serial


class TestProjectionFamily:
    def test_rejects_non_family(self):
        p = ModuleOperator.identity(C, 2)
        with pytest.raises(ShapeError):
            ProjectionFamily([p, p])

    def test_zero_members_allowed(self):
        fam = ProjectionFamily([ModuleOperator.identity(C, 2), ModuleOperator.zero(C, 2, 2)])
        assert max(fam.defects().values()) == 0.0

    def test_states_round_trip(self):
        fam, _ = projection_family_search(lambda f: 0.0, 3, (2, 1), 2, SMALL, 1)
        back = ProjectionFamily.from_states(fam.descriptor, fam.rank, fam.n, fam.to_states())
        for p, q in zip(fam.projections, back.projections):
            assert p.allclose(q, 1e-10)


class TestFamilySearch:
    def test_single_member_is_identity(self):
        x = sample_vector((2,), 2, 0)
        fam, value = projection_family_search(lambda f: vec_norm(f.projections[0] @ x), 1,
                                              (2,), 2, SMALL, 0)
        assert fam.projections[0].allclose(ModuleOperator.identity((2,), 2), 1e-12)
        assert value == pytest.approx(vec_norm(x), rel=1e-12)

    def test_constant_objective(self):
        fam, value = projection_family_search(lambda f: 2.5, 2, (1, 1), 2, SMALL, 0)
        assert value == 2.5
        assert max(fam.defects().values()) <= 1e-8

    def test_orthonormal_pair(self):
        xs = [ModuleVector.basis(C, 2, 0), ModuleVector.basis(C, 2, 1)]
        fam, value = projection_family_search(lambda f: hilbert_family_value(xs, f), 2, C, 2,
                                              SearchBudget(), 0)
        assert abs(value - np.sqrt(2)) <= 1e-6

    def test_orthonormal_pair_matches_angle_sweep(self):
        # oracle: rank-one P = v v*, v = (cos t, e^{ip} sin t); value ||P e1 + (1-P) e2||
        best = 0.0
        for t in np.linspace(0, np.pi, 721):
            for phase in np.linspace(0, 2 * np.pi, 73):
                v = np.array([np.cos(t), np.exp(1j * phase) * np.sin(t)])
                p = np.outer(v, v.conj())
                best = max(best, np.linalg.norm(p[:, 0] + (np.eye(2) - p)[:, 1]))
        assert abs(best - np.sqrt(2)) <= 1e-4

    def test_objective_errors_carry_context(self):
        def bad(f):
            raise ZeroDivisionError("boom")
        with pytest.raises(RuntimeError, match="candidate family"):
            projection_family_search(bad, 2, C, 2, SMALL, 0)

    @given(st.sampled_from([(1,), (2,), (1, 1)]), seeds)
    def test_feasible_and_witness_faithful(self, d, seed):
        xs = [sample_vector(d, 2, (seed, i)) for i in range(3)]
        fam, value = projection_family_search(lambda f: hilbert_family_value(xs, f), 3, d, 2,
                                              SMALL, seed)
        assert max(fam.defects().values()) <= 1e-8
        assert abs(hilbert_family_value(xs, fam) - value) <= 1e-10

    def test_deterministic(self):
        xs = [sample_vector((2, 1), 2, i) for i in range(2)]
        runs = [projection_family_search(lambda f: hilbert_family_value(xs, f), 2, (2, 1), 2,
                                         SMALL, 4) for _ in range(2)]
        assert runs[0][1] == runs[1][1]

    def test_threads_do_not_change_result(self, monkeypatch):
        xs = [sample_vector((2,), 2, i) for i in range(3)]
        def run():
            return projection_family_search(lambda f: hilbert_family_value(xs, f), 3, (2,), 2,
                                            SMALL, 8)[1]
        serial = run()
        monkeypatch.setenv("CSTAR_THREADS", "3")
        assert run() == serial

    def test_budget_monotone(self):
        xs = [sample_vector((2,), 2, 10 + i) for i in range(3)]
        values = []
        for budget in (SearchBudget(100, 1, 10), SearchBudget(300, 1, 10),
                       SearchBudget(300, 3, 10), SearchBudget(300, 3, 60)):
            values.append(projection_family_search(
                lambda f: hilbert_family_value(xs, f), 3, (2,), 2, budget, 2)[1])
        assert all(b >= a for a, b in zip(values, values[1:]))


class TestLocalAscent:
    def test_global_max_returns_start(self):
        a = np.diag([3.0, 1.0, 0.5])
        def quad(x):
            return float(np.real(x.mats[0][:, 0].conj() @ a @ x.mats[0][:, 0]))
        start = ModuleVector.basis(C, 3, 0)
        point, value = local_ascent(quad, start, SMALL, 0)
        assert point.array_equal(start) and value == 3.0

    @given(st.sampled_from([(1,), (2,), (2, 1)]), seeds)
    def test_mu_objective_nondecreasing(self, d, seed):
        xs = [sample_vector(d, 2, (seed, i)) for i in range(3)]
        start = sample_vector(d, 2, (seed, 9))
        start = start / vec_norm(start)
        point, value = local_ascent(lambda y: mu_objective(xs, y), start, SMALL, seed)
        assert value >= mu_objective(xs, start)
        assert abs(value - mu_objective(xs, point)) <= 1e-10
        assert abs(vec_norm(point) - 1) <= 1e-12

    def test_family_start(self):
        xs = [sample_vector((2,), 2, i) for i in range(2)]
        fam, v0 = projection_family_search(lambda f: hilbert_family_value(xs, f), 2, (2,), 2,
                                           SearchBudget(20, 0, 0), 0)
        fam2, v1 = local_ascent(lambda f: hilbert_family_value(xs, f), fam, SMALL, 0)
        assert v1 >= v0 and max(fam2.defects().values()) <= 1e-8

    def test_reproducible(self):
        xs = [sample_vector((2,), 1, i) for i in range(2)]
        start = ModuleVector.basis((2,), 1, 0)
        a = local_ascent(lambda y: mu_objective(xs, y), start, SMALL, 3)
        b = local_ascent(lambda y: mu_objective(xs, y), start, SMALL, 3)
        assert a[1] == b[1] and a[0].array_equal(b[0])
