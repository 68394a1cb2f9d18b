import random

import pytest

from app.algebra.descent import SubspaceV
from app.analysis.complexity import expected_step_count
from app.arithmetic.curve import INFINITY, make_instance
from app.errors import BudgetExhausted, DegenerateB, LiftMismatch, NoDecomposition, NoKernel, NoRationalPoint
from app.index_calculus.decompose import (
    FactorBase,
    Relation,
    TrialPoint,
    collect,
    compare_schedules,
    lift_combination,
    oracle_decompose,
    point_relation,
    random_R,
    relation_from_solution,
    run_trial,
    solve_system,
    trial_rng,
    try_decompose,
    verify_relation,
)
from app.index_calculus.linalg import RelationMatrix, extract_log, kernel_vectors, solve_log
from app.index_calculus.pollard import rho_solve, rho_solve_parallel, rho_walk


@pytest.fixture(scope="module")
def setup8(instance8):
    V = SubspaceV.low_degree(instance8.curve.ctx, 4)
    return instance8, V, FactorBase.build(instance8.curve, V)


def _affine_trials(sub, V, count, seed=0):
    out = []
    i = 0
    while len(out) < count:
        trial = random_R(sub, trial_rng(seed, i))
        i += 1
        if not trial.R.is_infinity and not V.contains(trial.R.x):
            out.append(trial)
    return out


class TestFactorBase:
    def test_canonical_points(self, setup8):
        sub, V, fb = setup8
        assert 0 < len(fb) < V.size
        assert fb.width == len(fb) + 1
        for x_bits, i in fb.index_of.items():
            P = fb.points[i]
            assert x_bits != 0
            assert P.x.bits == x_bits
            assert sub.curve.contains(P)
            assert P == sub.curve.lift_x(P.x)[0]
        assert fb.H == sub.H


class TestDecomposition:
    def test_relations_verify(self, setup8):
        sub, V, fb = setup8
        found = 0
        for trial in _affine_trials(sub, V, 30):
            try:
                result = try_decompose(sub, fb, trial, 2, V)
            except NoDecomposition as exc:
                assert exc.outcome is not None
                continue
            found += 1
            keys = set()
            for rel in result.relations:
                assert verify_relation(sub, fb, rel)
                assert rel.u == trial.u and rel.v == trial.v
                keys.add(tuple(sorted(rel.xs)))
            assert len(keys) == len(result.relations)
        assert found > 0

    @pytest.mark.parametrize("seed", range(6))
    def test_solver_agrees_with_oracle(self, setup8, seed):
        sub, V, _ = setup8
        trial = _affine_trials(sub, V, 1, seed=seed + 100)[0]
        _, _, outcome, solutions = solve_system(sub.curve, trial.R.x, 2, V)
        oracle = oracle_decompose(sub.curve, trial.R.x, 2, V)
        assert outcome.satisfiable == oracle.satisfiable
        assert {tuple(sorted(x.bits for x in xs)) for xs in solutions} == set(oracle.witnesses)

    def test_point_relation_for_R_in_V(self, setup8):
        sub, V, fb = setup8
        for u in range(1, sub.r):
            R = sub.curve.mul(u, sub.P)
            if not R.is_infinity and V.contains(R.x):
                rel = point_relation(sub, fb, TrialPoint(u, 0, R))
                assert rel.t == 1
                assert verify_relation(sub, fb, rel)
                return
        pytest.skip("no multiple of P with x in V")

    def test_direct_log_at_infinity(self, instance8):
        r, z = instance8.r, instance8.z_true
        v = 5
        trial = TrialPoint((-v * z) % r, v, INFINITY)
        assert trial.direct_log(r) == z
        assert TrialPoint(1, 0, INFINITY).direct_log(r) is None

    def test_run_trial_kinds(self, setup8):
        sub, V, fb = setup8
        kinds = {run_trial(sub, fb, 2, V, "t=m", 0, i).kind for i in range(20)}
        assert kinds <= {"solved", "failed", "in-V", "infinity"}
        assert "solved" in kinds

    def test_collect_is_deterministic(self, setup8):
        sub, V, fb = setup8
        first = collect(sub, fb, 2, V, 12, seed=3)
        second = collect(sub, fb, 2, V, 12, seed=3)
        assert len(first.relations) >= 12
        assert first.relations == second.relations
        assert first.trials == second.trials
        assert all(verify_relation(sub, fb, rel) for rel in first.relations)
        assert 0 < first.success_rate <= 1

    def test_collect_ignores_worker_count(self, setup8):
        sub, V, fb = setup8
        single = collect(sub, fb, 2, V, 8, seed=4, workers=1)
        pooled = collect(sub, fb, 2, V, 8, seed=4, workers=2)
        assert single.relations == pooled.relations

    def test_collect_reports_outcomes(self, setup8):
        sub, V, fb = setup8
        seen = []
        result = collect(sub, fb, 2, V, 5, seed=5, on_outcome=seen.append)
        assert [o.index for o in seen] == list(range(result.trials))

    def test_collect_budget(self, setup8):
        sub, V, fb = setup8
        with pytest.raises(BudgetExhausted):
            collect(sub, fb, 2, V, 1000, max_trials=3)

    def test_collect_rejects_unknown_schedule(self, setup8):
        sub, V, fb = setup8
        with pytest.raises(ValueError):
            collect(sub, fb, 2, V, 5, schedule="greedy")

    def test_escalation_never_loses_a_decomposition(self, instance8):
        V = SubspaceV.low_degree(instance8.curve.ctx, 3)
        fb = FactorBase.build(instance8.curve, V)
        for pair in compare_schedules(instance8, fb, 3, V, trials=4, seed=1):
            if pair.single:
                assert pair.escalated
            assert pair.t_escalated <= 3


def _conjugate_x(curve, H):
    """An x without a rational lift, and the x-coordinate of its lift plus H."""
    for x in curve.ctx.elements():
        if x.is_zero():
            continue
        try:
            curve.lift_x(x)
        except NoRationalPoint:
            C = curve.lift_x(x, allow_ext=True)[0]
            x_shift = curve.add(C, H).x
            if x_shift != x:
                return x, x_shift
    pytest.skip("every x lifts rationally")


class TestConjugateLifts:
    def test_conjugate_pair_cancels(self, instance8):
        curve, R = instance8.curve, instance8.P
        x1, _ = _conjugate_x(curve, instance8.H)
        V = SubspaceV(curve.ctx, 1, (R.x.bits,), "random")
        fb = FactorBase.build(curve, V)
        rel = relation_from_solution(instance8, fb, TrialPoint(1, 0, R), [x1, x1, R.x])
        assert rel.h2 == 0
        assert list(rel.coeffs) == [fb.index_of[R.x.bits]]
        assert verify_relation(instance8, fb, rel)

    def test_conjugates_summing_to_order_two_point(self, instance8):
        curve, R, H = instance8.curve, instance8.P, instance8.H
        x1, x2 = _conjugate_x(curve, H)
        x3 = curve.add(R, H).x
        V = SubspaceV(curve.ctx, 1, (x3.bits,), "random")
        fb = FactorBase.build(curve, V)
        rel = relation_from_solution(instance8, fb, TrialPoint(1, 0, R), [x1, x2, x3])
        assert rel.h2 == 1
        assert list(rel.coeffs) == [fb.index_of[x3.bits]]
        assert verify_relation(instance8, fb, rel)

    def test_lone_conjugate_does_not_close(self, instance8):
        curve, R = instance8.curve, instance8.P
        x1, _ = _conjugate_x(curve, instance8.H)
        with pytest.raises(LiftMismatch):
            lift_combination(curve, [x1, R.x], R)


class TestLinearAlgebra:
    def test_kernel_over_composite_modulus(self):
        relations = [
            Relation({0: 1, 1: 2}, 0, 1, 1, 2),
            Relation({0: 2, 1: 4}, 0, 2, 3, 2),
            Relation({0: 3, 1: 1}, 0, 4, 5, 2),
        ]
        M = RelationMatrix(relations, 3, 12)
        kernel = kernel_vectors(M)
        assert kernel
        for vec in kernel:
            assert any(vec)
            assert not any(M.apply(vec))

    def test_order_two_column_scaled(self):
        M = RelationMatrix([Relation({0: 1}, 1, 0, 1, 1)], 2, 12)
        assert M.rows() == [[1, 6]]

    @pytest.mark.parametrize("relation,width,modulus", [
        (Relation({0: 2}, 0, 1, 1, 1), 2, 6),
        # N = 2r with r = 7: the order-2 column holds r
        (Relation({}, 1, 1, 1, 1), 1, 14),
    ])
    def test_kernel_from_one_factor_only(self, relation, width, modulus):
        # no unit pivot splits the modulus; only one factor has a kernel
        M = RelationMatrix([relation], width, modulus)
        kernel = kernel_vectors(M)
        assert kernel
        for vec in kernel:
            assert vec[0] % modulus
            assert not any(M.apply(vec))

    def test_no_kernel(self):
        with pytest.raises(NoKernel):
            kernel_vectors(RelationMatrix([], 3, 12))
        with pytest.raises(NoKernel):
            kernel_vectors(RelationMatrix([Relation({0: 1}, 0, 1, 1, 1)], 2, 12))

    def test_extract_log(self):
        M = RelationMatrix([Relation({}, 0, 3, 5, 1), Relation({}, 0, 2, 0, 1)], 1, 14)
        assert extract_log([1, 0], M, 7) == 5
        with pytest.raises(DegenerateB):
            extract_log([0, 1], M, 7)

    def test_dump_header(self):
        M = RelationMatrix([Relation({0: 1}, 1, 0, 1, 1)], 2, 12)
        lines = M.dump().splitlines()
        assert lines[0] == "% modulus 12 rows 1 cols 2"
        assert lines[1:] == ["0 0 1", "0 1 6"]

    def test_logarithm_from_collected_relations(self, setup8):
        sub, V, fb = setup8
        relations = collect(sub, fb, 2, V, fb.width + 10, seed=6).relations
        z = solve_log(sub, fb, relations, random.Random(0))
        assert z == sub.z_true


class TestPollard:
    def test_rho_recovers_planted_log(self, instance8):
        result = rho_walk(instance8, random.Random(1))
        assert result.z == instance8.z_true
        assert result.steps > 0

    def test_rho_larger_field(self):
        sub = make_instance(14, "one", seed=3)
        assert rho_solve(sub, random.Random(2)) == sub.z_true

    def test_parallel_walks(self, instance8):
        assert rho_solve_parallel(instance8, [11, 12], workers=1) == instance8.z_true

    @pytest.mark.parametrize("n,seed", [(8, 1), (14, 3)])
    def test_mean_walk_length(self, n, seed):
        sub = make_instance(n, "one", seed=seed)
        steps = [rho_walk(sub, random.Random(s)).steps for s in range(40)]
        assert sum(steps) / len(steps) <= 3 * expected_step_count(sub.r)
