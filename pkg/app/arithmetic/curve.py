"""
Elliptic curves Y^2 + XY = X^3 + AX^2 + B over F_{2^n} (coordinates may lie in
the quadratic extension), short Weierstrass curves over small F_p, and
discrete-log instance generation.
"""
import logging
import random
from dataclasses import dataclass
from math import gcd, isqrt
from typing import Dict, Iterator, List, Optional

from sympy import factorint
from sympy.ntheory import sqrt_mod

from app.arithmetic.field import (
    BinaryFieldCtx,
    FieldElement,
    PrimeFieldCtx,
    PrimeFieldElement,
    QuadExtElement,
    demote,
    ext_solve_quadratic,
)
from app.config import config
from app.errors import DegenerateGroup, NoRationalPoint, NoSolution

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Point:
    """Affine point, or the point at infinity when x is None."""
    x: Optional[object] = None
    y: Optional[object] = None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    @property
    def is_rational(self) -> bool:
        return self.is_infinity or not (isinstance(self.x, QuadExtElement) or isinstance(self.y, QuadExtElement))

    def __repr__(self):
        if self.is_infinity:
            return "Point(inf)"
        return f"Point({self.x!r}, {self.y!r})"


INFINITY = Point()


def _point(x, y) -> Point:
    return Point(demote(x), demote(y))


def coord_key(value) -> int:
    """Total order on coordinates, used to pick canonical representatives."""
    if isinstance(value, QuadExtElement):
        return value.pack()
    return value.bits


class _GroupLaw:
    """Scalar multiplication shared by both curve families."""

    def mul(self, k: int, P: Point) -> Point:
        if k < 0:
            return self.mul(-k, self.neg(P))
        result = INFINITY
        addend = P
        while k:
            if k & 1:
                result = self.add(result, addend)
            addend = self.add(addend, addend)
            k >>= 1
        return result

    def sum(self, points) -> Point:
        total = INFINITY
        for P in points:
            total = self.add(total, P)
        return total


@dataclass(frozen=True)
class BinaryCurve(_GroupLaw):
    ctx: BinaryFieldCtx
    A: FieldElement
    B: FieldElement

    def __post_init__(self):
        if self.B.is_zero():
            raise ValueError("B = 0 gives a singular curve")

    def __repr__(self):
        return f"BinaryCurve(n={self.ctx.n}, f={self.ctx.f:#x}, A={self.A.bits:#x}, B={self.B.bits:#x})"

    def contains(self, P: Point) -> bool:
        if P.is_infinity:
            return True
        x, y = P.x, P.y
        lhs = y * y + x * y
        rhs = x * x * x + self.A * x * x + self.B
        return lhs == rhs

    def neg(self, P: Point) -> Point:
        if P.is_infinity:
            return P
        return _point(P.x, P.x + P.y)

    def double(self, P: Point) -> Point:
        if P.is_infinity or P.x.is_zero():
            return INFINITY
        x1, y1 = P.x, P.y
        lam = x1 + y1 / x1
        x3 = lam.square() + lam + self.A
        y3 = x1.square() + lam * x3 + x3
        return _point(x3, y3)

    def add(self, P: Point, Q: Point) -> Point:
        if P.is_infinity:
            return Q
        if Q.is_infinity:
            return P
        if P.x == Q.x:
            if P.y == Q.y:
                return self.double(P)
            return INFINITY
        lam = (P.y + Q.y) / (P.x + Q.x)
        x3 = lam.square() + lam + P.x + Q.x + self.A
        y3 = lam * (P.x + x3) + x3 + P.y
        return _point(x3, y3)

    def lift_x(self, x: FieldElement, allow_ext: bool = False) -> List[Point]:
        """
        Points with the given x-coordinate, ordered by y. For x != 0 the
        equation becomes w^2 + w = x + A + B/x^2 with y = x*w.
        """
        if x.is_zero():
            return [Point(x, self.B.sqrt())]
        c = x + self.A + self.B / x.square()
        try:
            w = c.half_trace()
        except NoSolution:
            if not allow_ext:
                raise NoRationalPoint(f"no rational point with x = {x.bits:#x}")
            w = ext_solve_quadratic(c)
        y = demote(x * w)
        ys = sorted([y, demote(y + x)], key=coord_key)
        return [Point(x, ys[0]), Point(x, ys[1])]

    def order2_points(self) -> List[Point]:
        return [Point(FieldElement(self.ctx, 0), self.B.sqrt())]

    def points(self) -> Iterator[Point]:
        """All rational points, infinity first. Desk-scale fields only."""
        yield INFINITY
        for x in self.ctx.elements():
            try:
                yield from self.lift_x(x)
            except NoRationalPoint:
                continue

    def random_point(self, rng: random.Random) -> Point:
        while True:
            x = self.ctx.random_element(rng)
            try:
                lifts = self.lift_x(x)
            except NoRationalPoint:
                continue
            return lifts[rng.randrange(len(lifts))]

    def group_order(self, rng: Optional[random.Random] = None, method: Optional[str] = None) -> int:
        if method is None:
            method = "enumerate" if self.ctx.n <= config.get("field.enumeration_max_n", 24) else "bsgs"
        if method == "enumerate":
            return self._order_by_enumeration()
        if method == "bsgs":
            return self._order_by_bsgs(rng or random.Random(self.ctx.n))
        raise ValueError(f"unknown group order method: {method}")

    def _order_by_enumeration(self) -> int:
        ctx = self.ctx
        # infinity and (0, sqrt(B))
        count = 2
        trace_a = ctx.trace(self.A.bits)
        sqrt_b = ctx.sqrt(self.B.bits)
        # Tr(B/x^2) = Tr(sqrt(B)/x)
        for x in range(1, ctx.order):
            if ctx.trace(x) ^ trace_a ^ ctx.trace(ctx.div(sqrt_b, x)) == 0:
                count += 2
        return count

    def _order_by_bsgs(self, rng: random.Random) -> int:
        q = self.ctx.order
        width = isqrt(4 * q)
        lo, hi = q + 1 - width, q + 1 + width
        exponent = 1
        for _ in range(64):
            G = self.random_point(rng)
            k = self._bsgs_multiple(G, lo, hi)
            order = self._exact_order(G, k)
            exponent = exponent * order // gcd(exponent, order)
            first = -(-lo // exponent) * exponent
            candidates = list(range(first, hi + 1, exponent))
            if len(candidates) == 1:
                logger.debug(f"group order {candidates[0]} found by BSGS")
                return candidates[0]
        raise DegenerateGroup("baby-step giant-step did not isolate the group order")

    def _bsgs_multiple(self, G: Point, lo: int, hi: int) -> int:
        m = isqrt(hi - lo) + 1
        baby: Dict[Point, int] = {}
        R = INFINITY
        for j in range(m):
            baby.setdefault(R, j)
            R = self.add(R, G)
        giant = R
        T = self.mul(lo, G)
        for i in range(m + 1):
            j = baby.get(self.neg(T))
            if j is not None:
                return lo + i * m + j
            T = self.add(T, giant)
        raise DegenerateGroup("no multiple of the point order inside the Hasse interval")

    def _exact_order(self, G: Point, k: int) -> int:
        for p in factorint(k):
            while k % p == 0 and self.mul(k // p, G).is_infinity:
                k //= p
        return k


@dataclass(frozen=True)
class PrimeCurve(_GroupLaw):
    """y^2 = x^3 + Ax + B over F_p, p >= 5."""
    ctx: PrimeFieldCtx
    A: PrimeFieldElement
    B: PrimeFieldElement

    def __post_init__(self):
        if (4 * self.A ** 3 + 27 * self.B ** 2).is_zero():
            raise ValueError("zero discriminant gives a singular curve")

    def contains(self, P: Point) -> bool:
        if P.is_infinity:
            return True
        return P.y * P.y == P.x ** 3 + self.A * P.x + self.B

    def neg(self, P: Point) -> Point:
        if P.is_infinity:
            return P
        return Point(P.x, -P.y)

    def add(self, P: Point, Q: Point) -> Point:
        if P.is_infinity:
            return Q
        if Q.is_infinity:
            return P
        if P.x == Q.x:
            if (P.y + Q.y).is_zero():
                return INFINITY
            lam = (3 * P.x * P.x + self.A) / (2 * P.y)
        else:
            lam = (Q.y - P.y) / (Q.x - P.x)
        x3 = lam * lam - P.x - Q.x
        y3 = lam * (P.x - x3) - P.y
        return Point(x3, y3)

    def lift_x(self, x: PrimeFieldElement) -> List[Point]:
        rhs = (x ** 3 + self.A * x + self.B).value
        if rhs == 0:
            return [Point(x, self.ctx.element(0))]
        roots = sqrt_mod(rhs, self.ctx.p, all_roots=True) or []
        return [Point(x, self.ctx.element(y)) for y in sorted(roots)]

    def points(self) -> Iterator[Point]:
        yield INFINITY
        for x in self.ctx.elements():
            yield from self.lift_x(x)


@dataclass(frozen=True)
class SubgroupCtx:
    curve: BinaryCurve
    P: Point
    r: int
    N: int
    Q: Point
    z_true: Optional[int] = None

    @property
    def cofactor(self) -> int:
        return self.N // self.r

    @property
    def H(self) -> Point:
        return self.curve.order2_points()[0]


B_MODES = ("one", "random")


def make_instance(n: int, b_mode: str = "one", seed: int = 0, f: Optional[int] = None) -> SubgroupCtx:
    """
    Deterministic discrete-log instance: r is the largest prime factor of
    #E, P = h*G has order r, and Q = z*P for a recorded random z.
    """
    if b_mode not in B_MODES:
        raise ValueError(f"B-mode must be one of {B_MODES}, got {b_mode!r}")
    rng = random.Random(seed)
    ctx = BinaryFieldCtx(n, f) if f is not None else BinaryFieldCtx.default(n)
    attempts = config.get("curve.instance_attempts", 64)

    for _ in range(attempts):
        A = ctx.random_element(rng)
        B = FieldElement(ctx, 1) if b_mode == "one" else ctx.random_nonzero(rng)
        curve = BinaryCurve(ctx, A, B)
        N = curve.group_order(rng=rng)
        r = max(factorint(N))
        if r <= 4:
            logger.debug(f"curve {curve} has no prime factor above 4 in N={N}; redrawing A")
            continue
        h = N // r
        while True:
            P = curve.mul(h, curve.random_point(rng))
            if not P.is_infinity:
                break
        z = rng.randrange(1, r)
        Q = curve.mul(z, P)
        logger.info(f"instance n={n} N={N} r={r} h={h} ({curve})")
        return SubgroupCtx(curve=curve, P=P, r=r, N=N, Q=Q, z_true=z)

    raise DegenerateGroup(f"no curve with a prime factor above 4 after {attempts} draws")
