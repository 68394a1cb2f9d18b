import random

import pytest

from app.arithmetic.curve import INFINITY, BinaryCurve, PrimeCurve, make_instance
from app.arithmetic.field import (
    BinaryFieldCtx,
    FieldElement,
    PrimeFieldCtx,
    QuadExtElement,
    default_modulus,
    ext_solve_quadratic,
    is_irreducible,
    random_irreducible,
)
from app.errors import DivisionByZero, NoRationalPoint, NoSolution, ReducibleModulus


class TestBinaryField:
    def test_default_modulus_is_least_irreducible(self):
        assert default_modulus(8) == 0x11B
        assert default_modulus(3) == 0b1011
        assert is_irreducible(0x11B)
        assert not is_irreducible(0x101)

    def test_reducible_modulus_rejected(self):
        with pytest.raises(ReducibleModulus):
            BinaryFieldCtx(8, 0x101)

    def test_random_irreducible(self):
        f = random_irreducible(11, random.Random(3))
        assert f.bit_length() == 12
        assert is_irreducible(f)

    def test_table_and_slow_multiplication_agree(self, field8):
        rng = random.Random(0)
        for _ in range(200):
            a, b = rng.getrandbits(8), rng.getrandbits(8)
            assert field8.mul(a, b) == field8._mul_slow(a, b)

    def test_inverse(self):
        ctx = BinaryFieldCtx.default(6)
        for x in ctx.elements():
            if x.is_zero():
                continue
            assert (x * x.inverse()).bits == 1
        with pytest.raises(DivisionByZero):
            FieldElement(ctx, 0).inverse()

    def test_inverse_without_tables(self):
        ctx = BinaryFieldCtx.default(20)
        x = FieldElement(ctx, 0x5A5A5)
        assert (x * x.inverse()).bits == 1

    def test_sqrt_and_frobenius(self, field8):
        for x in field8.elements():
            assert x.sqrt().square() == x

    @pytest.mark.parametrize("n", [7, 8])
    def test_half_trace_solves_artin_schreier(self, n):
        ctx = BinaryFieldCtx.default(n)
        for c in ctx.elements():
            if c.trace():
                with pytest.raises(NoSolution):
                    c.half_trace()
                continue
            w = c.half_trace()
            assert w.square() + w == c

    def test_trace_is_balanced(self, field8):
        ones = sum(x.trace() for x in field8.elements())
        assert ones == field8.order // 2


class TestQuadraticExtension:
    def test_delta_has_trace_one(self, field8):
        assert field8.trace(field8.delta) == 1

    def test_roots_of_trace_one_constants_lie_outside_base(self):
        ctx = BinaryFieldCtx.default(7)
        for c in ctx.elements():
            if not c.trace():
                continue
            w = ext_solve_quadratic(c)
            assert not w.in_base()
            assert w.square() + w == c

    def test_field_axioms_sample(self, field8):
        rng = random.Random(1)
        for _ in range(50):
            a = QuadExtElement.unpack(field8, rng.getrandbits(16))
            b = QuadExtElement.unpack(field8, rng.getrandbits(16))
            if b.is_zero():
                continue
            assert (a * b) / b == a
            assert a.conj().conj() == a
            assert (a * a.conj()).in_base()


class TestBinaryCurve:
    def test_instance_is_consistent(self, instance8):
        curve = instance8.curve
        assert curve.contains(instance8.P)
        assert curve.contains(instance8.Q)
        assert curve.mul(instance8.r, instance8.P).is_infinity
        assert curve.mul(instance8.z_true, instance8.P) == instance8.Q
        assert instance8.N % instance8.r == 0

    def test_order_two_point(self, instance8):
        curve = instance8.curve
        H = instance8.H
        assert H.x.is_zero()
        assert curve.contains(H)
        assert curve.add(H, H) is INFINITY

    def test_group_law_on_all_points(self):
        ctx = BinaryFieldCtx.default(5)
        curve = BinaryCurve(ctx, FieldElement(ctx, 1), FieldElement(ctx, 3))
        points = list(curve.points())
        assert len(points) == curve.group_order()
        rng = random.Random(2)
        for _ in range(100):
            P, Q, R = (rng.choice(points) for _ in range(3))
            S = curve.add(P, Q)
            assert curve.contains(S)
            assert curve.add(S, R) == curve.add(P, curve.add(Q, R))
            assert curve.add(P, curve.neg(P)).is_infinity

    def test_bsgs_matches_enumeration(self):
        ctx = BinaryFieldCtx.default(9)
        curve = BinaryCurve(ctx, FieldElement(ctx, 0), FieldElement(ctx, 5))
        assert curve.group_order(method="bsgs") == curve.group_order(method="enumerate")

    def test_lift_x_orders_and_rejects(self, field8):
        curve = BinaryCurve(field8, FieldElement(field8, 1), FieldElement(field8, 1))
        rational = nonrational = 0
        for x in field8.elements():
            if x.is_zero():
                continue
            try:
                P, Q = curve.lift_x(x)
            except NoRationalPoint:
                nonrational += 1
                for E in curve.lift_x(x, allow_ext=True):
                    assert not E.is_rational
                    assert curve.contains(E)
                continue
            rational += 1
            assert P.y.bits < Q.y.bits
            assert curve.neg(P) == Q
        assert rational and nonrational

    def test_make_instance_is_deterministic(self):
        a = make_instance(9, "random", seed=4)
        b = make_instance(9, "random", seed=4)
        assert a == b

    def test_make_instance_rejects_bad_mode(self):
        with pytest.raises(ValueError):
            make_instance(8, "zero")


class TestPrimeCurve:
    def test_group_law(self):
        ctx = PrimeFieldCtx(13)
        curve = PrimeCurve(ctx, ctx.element(2), ctx.element(3))
        points = list(curve.points())
        for P in points[:8]:
            for Q in points[:8]:
                assert curve.contains(curve.add(P, Q))
        assert all(curve.add(P, curve.neg(P)).is_infinity for P in points)

    def test_singular_curve_rejected(self):
        ctx = PrimeFieldCtx(11)
        with pytest.raises(ValueError):
            PrimeCurve(ctx, ctx.element(2), ctx.element(3))
