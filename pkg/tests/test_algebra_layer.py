import random
from itertools import combinations_with_replacement, product

import pytest

from app.algebra.descent import BoolPoly, BoolSystem, FieldVector, SubspaceV, build_system, descend
from app.algebra.sumpoly import MultiPoly, SumPolyCache, resultant, s2, s3, s_m, term_listing
from app.arithmetic.curve import BinaryCurve, PrimeCurve
from app.arithmetic.field import BinaryFieldCtx, FieldElement, PrimeFieldCtx
from app.errors import BadArity, SizeLimit
from app.index_calculus.decompose import oracle_decompose
from app.solver.gbsolver import brute_force_solutions


def _curve(n, A=0, B=1):
    ctx = BinaryFieldCtx.default(n)
    return BinaryCurve(ctx, FieldElement(ctx, A), FieldElement(ctx, B))


def _outside(V, rng):
    while True:
        z = V.ctx.random_element(rng)
        if not V.contains(z):
            return z


class TestMultiPoly:
    def test_arithmetic_in_characteristic_two(self, field8):
        names = ("x", "y")
        x = MultiPoly.variable(field8, names, "x")
        y = MultiPoly.variable(field8, names, "y")
        assert (x + y) ** 2 == x ** 2 + y ** 2
        assert (x + x).is_zero()
        assert (x * y).total_degree() == 2

    def test_unknown_variable(self, field8):
        with pytest.raises(BadArity):
            MultiPoly.variable(field8, ("x",), "z")

    def test_resultant_of_linear_forms(self):
        ctx = PrimeFieldCtx(13)
        names = ("X", "a", "b")
        X, a, b = (MultiPoly.variable(ctx, names, v) for v in names)
        res = resultant(X - a, X - b, "X")
        assert res == (a - b).with_vars(res.vars) or res == (b - a).with_vars(res.vars)

    def test_substitute_then_eval(self, field8):
        S3 = s3(_curve(8))
        rng = random.Random(0)
        values = [field8.random_element(rng) for _ in range(3)]
        partial = S3.substitute({"x3": values[2]})
        assert partial.vars == ("x1", "x2")
        assert partial.eval(values[:2]) == S3.eval(values)


class TestSummationPolynomials:
    def test_s2(self):
        curve = _curve(5)
        S2 = s2(curve)
        x = FieldElement(curve.ctx, 7)
        assert S2.eval([x, x]).is_zero()

    def test_s3_shape(self):
        S3 = s3(_curve(7))
        assert S3.is_symmetric()
        assert [S3.degree(v) for v in S3.vars] == [2, 2, 2]
        assert len(S3) == 5

    def test_s3_vanishes_on_sums(self, curve5):
        points = [P for P in curve5.points() if not P.is_infinity]
        S3 = s3(curve5)
        for P, Q in product(points, repeat=2):
            R = curve5.add(P, Q)
            if R.is_infinity:
                continue
            assert S3.eval([P.x, Q.x, R.x]).is_zero()

    def test_s3_zero_exactly_when_lifts_sum_to_infinity(self):
        curve = _curve(4)
        S3 = s3(curve)
        lifts = {x.bits: curve.lift_x(x, allow_ext=True) for x in curve.ctx.elements()}
        for xs in combinations_with_replacement(range(16), 3):
            vanishes = S3.eval([FieldElement(curve.ctx, x) for x in xs]).is_zero()
            closes = any(curve.sum(combo).is_infinity for combo in product(*(lifts[x] for x in xs)))
            assert vanishes == closes, xs

    def test_s3_prime_curve(self):
        ctx = PrimeFieldCtx(13)
        curve = PrimeCurve(ctx, ctx.element(2), ctx.element(3))
        S3 = s3(curve)
        points = [P for P in curve.points() if not P.is_infinity]
        for P, Q in product(points, repeat=2):
            R = curve.add(P, Q)
            if R.is_infinity:
                continue
            assert S3.eval([P.x, Q.x, R.x]).is_zero()

    def test_s4_degree_and_vanishing(self, curve5):
        S4 = s_m(curve5, 4)
        assert [S4.degree(v) for v in S4.vars] == [4, 4, 4, 4]
        assert S4.is_symmetric()
        rng = random.Random(5)
        points = [P for P in curve5.points() if not P.is_infinity]
        checked = 0
        while checked < 40:
            P1, P2, P3 = (rng.choice(points) for _ in range(3))
            P4 = curve5.neg(curve5.sum([P1, P2, P3]))
            if P4.is_infinity:
                continue
            assert S4.eval([P1.x, P2.x, P3.x, P4.x]).is_zero()
            checked += 1

    @pytest.mark.slow
    @pytest.mark.parametrize("m", [5, 6])
    def test_higher_degree_law(self, curve5, m):
        S = s_m(curve5, m)
        assert [S.degree(v) for v in S.vars] == [2 ** (m - 2)] * m

    def test_cache_reuses_construction(self, curve5):
        cache = SumPolyCache()
        first = s_m(curve5, 4, cache)
        assert s_m(curve5, 4, cache) is first
        assert len(cache) == 2

    def test_arity_and_size_limits(self, curve5):
        with pytest.raises(BadArity):
            s_m(curve5, 2)
        with pytest.raises(SizeLimit):
            s_m(curve5, 99)

    def test_term_listing(self):
        lines = list(term_listing(s3(_curve(5))))
        assert len(lines) == 5
        assert lines[0] == "0x1 2 2 0"


class TestBoolPoly:
    def test_ring_operations(self):
        x0, x1 = BoolPoly.variable(0), BoolPoly.variable(1)
        one = BoolPoly.constant(1)
        assert x0 * x0 == x0
        assert (x0 + one) * x0 == BoolPoly()
        assert ((x0 + x1) * (x0 + x1)) == x0 + x1
        assert (x0 * x1 + one).degree() == 2
        assert BoolPoly().degree() == -1

    def test_substitute_and_evaluate(self):
        x0, x1, x2 = (BoolPoly.variable(i) for i in range(3))
        p = x0 * x1 + x2
        q = p.substitute(0, x2 + BoolPoly.constant(1))
        for a in range(8):
            x2_val = a >> 2 & 1
            assert q.evaluate(a) == p.evaluate((a & ~1) | (x2_val ^ 1))


class TestDescent:
    def test_field_vector_matches_field_arithmetic(self, field8):
        n = field8.n
        full = tuple(1 << j for j in range(n))
        a = FieldVector.from_basis(field8, 0, full)
        b = FieldVector.from_basis(field8, n, full)
        prod, sq, cube = a * b, a.square(), a ** 3
        rng = random.Random(7)
        for _ in range(100):
            assignment = rng.getrandbits(2 * n)
            av, bv = assignment & 0xFF, assignment >> n
            assert prod.evaluate(assignment) == field8.mul(av, bv)
            assert sq.evaluate(assignment) == field8.sqr(av)
            assert cube.evaluate(assignment) == field8.pow(av, 3)

    def test_subspace_membership(self, field8):
        V = SubspaceV.random(field8, 3, random.Random(1))
        members = {x.bits for x in V.elements()}
        assert len(members) == 8
        for x in field8.elements():
            assert V.contains(x) == (x.bits in members)
        low = SubspaceV.low_degree(field8, 3)
        assert [x.bits for x in low.elements()] == list(range(8))

    def test_build_system_chain(self):
        curve = _curve(7)
        V = SubspaceV.low_degree(curve.ctx, 3)
        R_X = FieldElement(curve.ctx, 0b1010000)
        eqs = build_system(curve, R_X, 4, V)
        assert [eq.describe() for eq in eqs] == ["S3(u1, x1, x2)", "S3(u1, u2, x3)", "S3(u2, x4, 0x50)"]
        with pytest.raises(BadArity):
            build_system(curve, R_X, 1, V)
        with pytest.raises(ValueError):
            build_system(curve, FieldElement(curve.ctx, 3), 2, V)

    def test_boolean_degrees(self):
        curve = _curve(7)
        V = SubspaceV.low_degree(curve.ctx, 3)
        R_X = _outside(V, random.Random(2))
        _, two = descend(curve, R_X, 2, V)
        assert two.nvars == 6
        assert two.max_degree() == 2

        _, three = descend(curve, R_X, 3, V)
        assert three.nvars == 3 * 3 + 7
        by_equation = {0: [], 1: []}
        for poly, (eq, _) in zip(three.polys, three.provenance):
            by_equation[eq].append(poly.degree())
        assert by_equation[0] == [3] * 7
        assert max(by_equation[1]) == 2

    @pytest.mark.parametrize("seed", range(5))
    def test_descended_solutions_match_oracle(self, seed):
        curve = _curve(8, A=1, B=1)
        V = SubspaceV.low_degree(curve.ctx, 4)
        R_X = _outside(V, random.Random(seed))
        _, system = descend(curve, R_X, 2, V)
        found = set()
        for assignment in brute_force_solutions(system):
            values = system.decode(assignment)
            found.add(tuple(sorted((values["x1"].bits, values["x2"].bits))))
        assert found == set(oracle_decompose(curve, R_X, 2, V).witnesses)

    def test_system_text(self):
        system = BoolSystem.from_polys([BoolPoly.variable(0) * BoolPoly.variable(1)], 2)
        assert system.to_text() == "b0*b1"
