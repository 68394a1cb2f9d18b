import random

import pytest

from app.algebra.descent import BoolPoly, BoolSystem, SubspaceV, descend
from app.arithmetic.curve import BinaryCurve
from app.arithmetic.field import BinaryFieldCtx, FieldElement
from app.errors import TooLarge
from app.solver.gbsolver import (
    MonomialIndex,
    SolveStatus,
    brute_force_solutions,
    first_fall_degree,
    verify_first_fall,
    xl_solve,
)


def random_system(nvars, count, degree, rng, planted=None):
    """Random ANF polynomials; with `planted`, each is shifted to vanish there."""
    polys = []
    for _ in range(count):
        monos = set()
        for _ in range(rng.randint(2, 3 * nvars)):
            mask = 0
            for v in rng.sample(range(nvars), rng.randint(0, degree)):
                mask |= 1 << v
            monos ^= {mask}
        p = BoolPoly(monos)
        if planted is not None and p.evaluate(planted):
            p = p + BoolPoly.constant(1)
        polys.append(p)
    return BoolSystem.from_polys(polys, nvars)


class TestMonomialIndex:
    def test_rank_unrank_are_inverse_and_graded(self):
        index = MonomialIndex(7, 3)
        seen = set()
        for r in range(index.width):
            mask = index.unrank(r)
            assert index.rank(mask) == r
            assert index.degree_of(r) == bin(mask).count("1")
            seen.add(mask)
        assert len(seen) == 1 + 7 + 21 + 35

    def test_row_round_trip(self):
        index = MonomialIndex(5, 2)
        monos = [0, 0b1, 0b110]
        assert sorted(index.monomials(index.row(monos))) == sorted(monos)


class TestXLSolver:
    @pytest.mark.parametrize("seed", range(12))
    def test_matches_brute_force(self, seed):
        rng = random.Random(seed)
        nvars = rng.randint(4, 10)
        planted = rng.getrandbits(nvars) if seed % 2 else None
        system = random_system(nvars, rng.randint(nvars - 2, nvars + 3), 2, rng, planted)
        outcome = xl_solve(system)
        assert outcome.status is not SolveStatus.DEGREE_CAP_EXCEEDED
        assert outcome.solutions == brute_force_solutions(system)
        if planted is not None:
            assert planted in outcome.solutions

    @pytest.mark.slow
    def test_matches_brute_force_many(self):
        for seed in range(200):
            rng = random.Random(1000 + seed)
            nvars = rng.randint(6, 16)
            system = random_system(nvars, nvars + 2, rng.choice([2, 3]), rng, rng.getrandbits(nvars))
            assert xl_solve(system).solutions == brute_force_solutions(system)

    def test_inconsistent(self):
        x0 = BoolPoly.variable(0)
        system = BoolSystem.from_polys([x0, x0 + BoolPoly.constant(1)], 2)
        outcome = xl_solve(system)
        assert outcome.status is SolveStatus.INCONSISTENT
        assert not outcome.satisfiable
        assert outcome.solutions == []

    def test_underdetermined_system_enumerates_free_variables(self):
        x0, x1 = BoolPoly.variable(0), BoolPoly.variable(1)
        system = BoolSystem.from_polys([x0 + x1], 3)
        outcome = xl_solve(system)
        assert outcome.solutions == [0b000, 0b011, 0b100, 0b111]

    def test_empty_system(self):
        with pytest.raises(ValueError):
            xl_solve(BoolSystem.from_polys([], 3))

    def test_telemetry(self):
        rng = random.Random(3)
        system = random_system(8, 9, 2, rng, rng.getrandbits(8))
        outcome = xl_solve(system)
        telemetry = outcome.telemetry
        assert telemetry.steps
        assert 1 <= telemetry.d_max <= 4
        assert all(line.startswith("step=") for line in telemetry.lines())
        assert len(telemetry.matrix_dims) == len(telemetry.steps)

    def test_brute_force_limit(self):
        with pytest.raises(TooLarge):
            brute_force_solutions(BoolSystem.from_polys([BoolPoly.variable(0)], 30))


class TestDescendedSystems:
    @pytest.mark.parametrize("seed", range(4))
    def test_t2_systems_resolve_below_cap(self, seed):
        ctx = BinaryFieldCtx.default(9)
        curve = BinaryCurve(ctx, FieldElement(ctx, 0), FieldElement(ctx, 1))
        V = SubspaceV.low_degree(ctx, 5)
        rng = random.Random(seed)
        while True:
            R_X = ctx.random_element(rng)
            if not V.contains(R_X):
                break
        _, system = descend(curve, R_X, 2, V)
        outcome = xl_solve(system)
        assert outcome.status is not SolveStatus.DEGREE_CAP_EXCEEDED
        assert outcome.telemetry.d_max <= 4
        assert outcome.solutions == brute_force_solutions(system)


class TestFirstFall:
    @pytest.mark.parametrize("n", [5, 6, 7])
    def test_identity_and_degrees(self, n):
        ctx = BinaryFieldCtx.default(n)
        curve = BinaryCurve(ctx, FieldElement(ctx, 1), FieldElement(ctx, 1))
        report = verify_first_fall(curve)
        assert report.identity_holds
        assert max(report.coordinate_degrees) <= 3
        assert report.nominal_degree == 4
        assert max(report.constant_coordinate_degrees) == 3
        assert report.passed

    def test_first_fall_search(self):
        ctx = BinaryFieldCtx.default(5)
        curve = BinaryCurve(ctx, FieldElement(ctx, 0), FieldElement(ctx, 1))
        report = verify_first_fall(curve, search=True)
        assert report.first_fall == 4
        assert report.passed

    def test_first_fall_of_small_system(self):
        x0, x1, x2 = (BoolPoly.variable(i) for i in range(3))
        # x0 * (x0*x1 + x2) = x0*x1 + x0*x2 has degree 2 below the nominal 3
        system = BoolSystem.from_polys([x0 * x1 + x2], 3)
        assert first_fall_degree(system, max_degree=3) == 3
