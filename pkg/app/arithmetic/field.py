"""
Finite-field arithmetic: F_2[X]/(f) in polynomial basis, its quadratic
extension F_{2^{2n}} = F_{2^n}[beta]/(beta^2 + beta + delta), and small prime
fields used by the odd-characteristic S_3 check.

Field values are plain ints (coefficient masks) at the context level; the
element classes wrap them with operator overloading for readable formulas.
"""
import logging
import random
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, List, Optional, Tuple

from sympy import factorint, isprime

from app.config import config
from app.errors import DivisionByZero, NoSolution, ReducibleModulus

logger = logging.getLogger(__name__)

MAX_DEGREE = 32


# ---------------------------------------------------------------------------
# GF(2)[x] helpers on int masks
# ---------------------------------------------------------------------------

def poly_degree(a: int) -> int:
    return a.bit_length() - 1


def poly_mod(a: int, f: int) -> int:
    df = f.bit_length()
    while a.bit_length() >= df:
        a ^= f << (a.bit_length() - df)
    return a


def poly_mul(a: int, b: int) -> int:
    """Carry-less product."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_mod(a, b)
    return a


def is_irreducible(f: int) -> bool:
    """Irreducibility over F_2 via gcd(f, x^(2^i) - x) = 1 for i <= deg(f)/2."""
    n = poly_degree(f)
    if n < 1:
        return False
    if n == 1:
        return True
    x = 0b10
    h = x
    for _ in range(n // 2):
        h = poly_mod(poly_mul(h, h), f)
        if poly_gcd(f, h ^ x) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def default_modulus(n: int) -> int:
    """Lexicographically least irreducible polynomial of degree n."""
    for f in range((1 << n) | 1, 1 << (n + 1), 2):
        if is_irreducible(f):
            return f
    raise ReducibleModulus(f"no irreducible polynomial of degree {n}")


def random_irreducible(n: int, rng: random.Random) -> int:
    while True:
        f = (1 << n) | rng.getrandbits(n) | 1
        if is_irreducible(f):
            return f


def solve_gf2_linear(images: List[int], target: int) -> int:
    """
    Find a mask w with XOR of images[j] over set bits j of w equal to target.
    Raises NoSolution when target is outside the span.
    """
    basis = {}
    for j, image in enumerate(images):
        vec, combo = image, 1 << j
        while vec:
            pivot = vec.bit_length() - 1
            if pivot not in basis:
                basis[pivot] = (vec, combo)
                break
            bvec, bcombo = basis[pivot]
            vec ^= bvec
            combo ^= bcombo

    combo = 0
    while target:
        pivot = target.bit_length() - 1
        if pivot not in basis:
            raise NoSolution("target not in the span of the linear map")
        bvec, bcombo = basis[pivot]
        target ^= bvec
        combo ^= bcombo
    return combo


# ---------------------------------------------------------------------------
# Binary field F_{2^n}
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinaryFieldCtx:
    """
    F_2[X]/(f) with elements stored as n-bit coefficient masks in the basis
    1, alpha, ..., alpha^(n-1). Immutable; lookup tables are built lazily.
    """
    n: int
    f: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_DEGREE:
            raise ValueError(f"extension degree must be in [1, {MAX_DEGREE}], got {self.n}")
        if poly_degree(self.f) != self.n:
            raise ValueError(f"modulus {self.f:#x} does not have degree {self.n}")
        if not is_irreducible(self.f):
            raise ReducibleModulus(f"{self.f:#x} is reducible over F_2")

    @classmethod
    def default(cls, n: int) -> "BinaryFieldCtx":
        return cls(n, default_modulus(n))

    @property
    def order(self) -> int:
        return 1 << self.n

    @property
    def characteristic(self) -> int:
        return 2

    # -- lazily built tables ------------------------------------------------

    @cached_property
    def alpha_powers(self) -> Optional[Tuple[List[int], List[int]]]:
        """(exp, log) tables over a primitive element, or None above table_max_n."""
        if self.n > config.get("field.table_max_n", 16):
            return None
        q1 = self.order - 1
        g = self._primitive_element()
        exp = [0] * (2 * q1 + 1)
        log = [0] * self.order
        value = 1
        for i in range(q1):
            exp[i] = value
            log[value] = i
            value = self._mul_slow(value, g)
        for i in range(q1, 2 * q1 + 1):
            exp[i] = exp[i - q1]
        logger.debug(f"built log tables for n={self.n}, generator {g:#x}")
        return exp, log

    @cached_property
    def trace_mask(self) -> int:
        mask = 0
        for i in range(self.n):
            t = s = 1 << i
            for _ in range(self.n - 1):
                t = self._mul_slow(t, t)
                s ^= t
            if s & 1:
                mask |= 1 << i
        return mask

    @cached_property
    def _sqrt_images(self) -> List[int]:
        images = []
        for i in range(self.n):
            v = 1 << i
            for _ in range(self.n - 1):
                v = self._mul_slow(v, v)
            images.append(v)
        return images

    @cached_property
    def _half_trace_images(self) -> List[int]:
        images = []
        for i in range(self.n):
            v = s = 1 << i
            for _ in range((self.n - 1) // 2):
                v = self._mul_slow(v, v)
                v = self._mul_slow(v, v)
                s ^= v
            images.append(s)
        return images

    @cached_property
    def _artin_schreier_images(self) -> List[int]:
        return [self._mul_slow(1 << j, 1 << j) ^ (1 << j) for j in range(self.n)]

    @cached_property
    def delta(self) -> int:
        """Least element (mask order) of trace 1; defines the quadratic extension."""
        for d in range(self.order):
            if self.trace(d):
                return d
        raise NoSolution("field has no trace-one element")

    # -- raw int arithmetic -------------------------------------------------

    zero = 0
    one = 1

    def _mul_slow(self, a: int, b: int) -> int:
        n, f = self.n, self.f
        r = 0
        while b:
            if b & 1:
                r ^= a
            b >>= 1
            a <<= 1
            if a >> n:
                a ^= f
        return r

    def _primitive_element(self) -> int:
        q1 = self.order - 1
        primes = list(factorint(q1))
        for g in range(1 if self.n == 1 else 2, self.order):
            if all(self._pow_slow(g, q1 // p) != 1 for p in primes):
                return g
        raise ReducibleModulus("no primitive element found")

    def _pow_slow(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = self._mul_slow(r, a)
            a = self._mul_slow(a, a)
            e >>= 1
        return r

    def add(self, a: int, b: int) -> int:
        return a ^ b

    sub = add

    def neg(self, a: int) -> int:
        return a

    def is_zero(self, a: int) -> bool:
        return a == 0

    def from_int(self, k: int) -> int:
        return k & 1

    def mul(self, a: int, b: int) -> int:
        if not a or not b:
            return 0
        tables = self.alpha_powers
        if tables is None:
            return self._mul_slow(a, b)
        exp, log = tables
        return exp[log[a] + log[b]]

    def sqr(self, a: int) -> int:
        return self.mul(a, a)

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("inverse of zero in F_2^n")
        tables = self.alpha_powers
        if tables is not None:
            exp, log = tables
            return exp[self.order - 1 - log[a]]
        # extended Euclid on GF(2)[x]
        u, v = a, self.f
        g1, g2 = 1, 0
        while u != 1:
            j = u.bit_length() - v.bit_length()
            if j < 0:
                u, v = v, u
                g1, g2 = g2, g1
                j = -j
            u ^= v << j
            g1 ^= g2 << j
        return poly_mod(g1, self.f)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        r = 1
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    def sqrt(self, a: int) -> int:
        r = 0
        images = self._sqrt_images
        while a:
            low = a & -a
            r ^= images[low.bit_length() - 1]
            a ^= low
        return r

    def trace(self, a: int) -> int:
        return bin(a & self.trace_mask).count("1") & 1

    def half_trace(self, c: int) -> int:
        """A root w of w^2 + w = c; the other root is w + 1."""
        if self.trace(c):
            raise NoSolution(f"trace of {c:#x} is 1")
        if self.n % 2 == 1:
            w = 0
            images = self._half_trace_images
            while c:
                low = c & -c
                w ^= images[low.bit_length() - 1]
                c ^= low
            return w
        return solve_gf2_linear(self._artin_schreier_images, c)

    # -- element construction ----------------------------------------------

    def element(self, bits: int) -> "FieldElement":
        return FieldElement(self, bits)

    def raw_of(self, value) -> int:
        return value.bits if isinstance(value, FieldElement) else value

    def alpha(self) -> "FieldElement":
        return FieldElement(self, poly_mod(0b10, self.f))

    def random_element(self, rng: random.Random) -> "FieldElement":
        return FieldElement(self, rng.getrandbits(self.n))

    def random_nonzero(self, rng: random.Random) -> "FieldElement":
        while True:
            bits = rng.getrandbits(self.n)
            if bits:
                return FieldElement(self, bits)

    def elements(self) -> Iterator["FieldElement"]:
        for bits in range(self.order):
            yield FieldElement(self, bits)

    def format(self, bits: int) -> str:
        return f"{bits:#x}"


@dataclass(frozen=True)
class FieldElement:
    ctx: BinaryFieldCtx
    bits: int

    def __post_init__(self):
        if self.bits >> self.ctx.n:
            raise ValueError(f"{self.bits:#x} has bits at or above position {self.ctx.n}")

    def __repr__(self):
        return f"FieldElement({self.bits:#x})"

    def __add__(self, other):
        if isinstance(other, FieldElement):
            return FieldElement(self.ctx, self.bits ^ other.bits)
        return NotImplemented

    __sub__ = __add__

    def __neg__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, FieldElement):
            return FieldElement(self.ctx, self.ctx.mul(self.bits, other.bits))
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, FieldElement):
            return FieldElement(self.ctx, self.ctx.div(self.bits, other.bits))
        return NotImplemented

    def __pow__(self, e: int):
        return FieldElement(self.ctx, self.ctx.pow(self.bits, e))

    def square(self) -> "FieldElement":
        return FieldElement(self.ctx, self.ctx.sqr(self.bits))

    def sqrt(self) -> "FieldElement":
        return FieldElement(self.ctx, self.ctx.sqrt(self.bits))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.ctx, self.ctx.inv(self.bits))

    def trace(self) -> int:
        return self.ctx.trace(self.bits)

    def half_trace(self) -> "FieldElement":
        return FieldElement(self.ctx, self.ctx.half_trace(self.bits))

    def is_zero(self) -> bool:
        return self.bits == 0

    @property
    def raw(self) -> int:
        return self.bits


# ---------------------------------------------------------------------------
# Quadratic extension F_{2^{2n}}
# ---------------------------------------------------------------------------

def _as_ext(value) -> "QuadExtElement":
    if isinstance(value, QuadExtElement):
        return value
    if isinstance(value, FieldElement):
        return QuadExtElement(value, FieldElement(value.ctx, 0))
    raise TypeError(f"cannot embed {value!r} in the quadratic extension")


@dataclass(frozen=True)
class QuadExtElement:
    """a + beta*b with beta^2 = beta + delta."""
    a: FieldElement
    b: FieldElement

    @property
    def ctx(self) -> BinaryFieldCtx:
        return self.a.ctx

    @classmethod
    def beta(cls, ctx: BinaryFieldCtx) -> "QuadExtElement":
        return cls(FieldElement(ctx, 0), FieldElement(ctx, 1))

    def __repr__(self):
        return f"QuadExtElement({self.a.bits:#x} + beta*{self.b.bits:#x})"

    def __eq__(self, other):
        if isinstance(other, (QuadExtElement, FieldElement)):
            other = _as_ext(other)
            return self.a == other.a and self.b == other.b
        return NotImplemented

    def __hash__(self):
        if self.b.bits == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __add__(self, other):
        other = _as_ext(other)
        return QuadExtElement(self.a + other.a, self.b + other.b)

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __neg__(self):
        return self

    def __mul__(self, other):
        other = _as_ext(other)
        ctx = self.ctx
        a1, b1, a2, b2 = self.a.bits, self.b.bits, other.a.bits, other.b.bits
        bb = ctx.mul(b1, b2)
        a = ctx.mul(a1, a2) ^ ctx.mul(ctx.delta, bb)
        b = ctx.mul(a1, b2) ^ ctx.mul(a2, b1) ^ bb
        return QuadExtElement(FieldElement(ctx, a), FieldElement(ctx, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * _as_ext(other).inverse()

    def __rtruediv__(self, other):
        return _as_ext(other) * self.inverse()

    def square(self) -> "QuadExtElement":
        ctx = self.ctx
        b2 = ctx.sqr(self.b.bits)
        return QuadExtElement(FieldElement(ctx, ctx.sqr(self.a.bits) ^ ctx.mul(ctx.delta, b2)),
                              FieldElement(ctx, b2))

    def conj(self) -> "QuadExtElement":
        """Frobenius phi: beta -> beta + 1."""
        return QuadExtElement(self.a + self.b, self.b)

    def norm(self) -> FieldElement:
        ctx = self.ctx
        a, b = self.a.bits, self.b.bits
        return FieldElement(ctx, ctx.sqr(a) ^ ctx.mul(a, b) ^ ctx.mul(ctx.delta, ctx.sqr(b)))

    def inverse(self) -> "QuadExtElement":
        norm = self.norm()
        if norm.is_zero():
            raise DivisionByZero("inverse of zero in F_2^2n")
        inv = norm.inverse()
        conj = self.conj()
        return QuadExtElement(conj.a * inv, conj.b * inv)

    def is_zero(self) -> bool:
        return self.a.bits == 0 and self.b.bits == 0

    def in_base(self) -> bool:
        return self.b.bits == 0

    def to_base(self) -> FieldElement:
        if self.b.bits:
            raise ValueError(f"{self!r} is not in the base field")
        return self.a

    def pack(self) -> int:
        return self.a.bits | (self.b.bits << self.ctx.n)

    @classmethod
    def unpack(cls, ctx: BinaryFieldCtx, packed: int) -> "QuadExtElement":
        mask = ctx.order - 1
        return cls(FieldElement(ctx, packed & mask), FieldElement(ctx, packed >> ctx.n))


def demote(value):
    """Return a base-field element when an extension element has b = 0."""
    if isinstance(value, QuadExtElement) and value.b.bits == 0:
        return value.a
    return value


def ext_solve_quadratic(c) -> QuadExtElement:
    """Root of w^2 + w = c over F_{2^{2n}} by a 2n-dimensional linear solve."""
    c = _as_ext(c)
    ctx = c.ctx
    images = []
    for j in range(2 * ctx.n):
        e = QuadExtElement.unpack(ctx, 1 << j)
        images.append((e.square() + e).pack())
    return QuadExtElement.unpack(ctx, solve_gf2_linear(images, c.pack()))


# ---------------------------------------------------------------------------
# Small prime field F_p
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrimeFieldCtx:
    p: int

    def __post_init__(self):
        if not (5 <= self.p < 1 << 16 and isprime(self.p)):
            raise ValueError(f"prime field modulus must be a prime in [5, 2^16), got {self.p}")

    @property
    def order(self) -> int:
        return self.p

    @property
    def characteristic(self) -> int:
        return self.p

    zero = 0
    one = 1

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise DivisionByZero(f"inverse of zero mod {self.p}")
        return pow(a, -1, self.p)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def is_zero(self, a: int) -> bool:
        return a % self.p == 0

    def from_int(self, k: int) -> int:
        return k % self.p

    def element(self, value: int) -> "PrimeFieldElement":
        return PrimeFieldElement(self, value % self.p)

    def raw_of(self, value) -> int:
        return value.value if isinstance(value, PrimeFieldElement) else value % self.p

    def elements(self) -> Iterator["PrimeFieldElement"]:
        for v in range(self.p):
            yield PrimeFieldElement(self, v)

    def format(self, value: int) -> str:
        return str(value)


@dataclass(frozen=True)
class PrimeFieldElement:
    ctx: PrimeFieldCtx
    value: int

    @property
    def p(self) -> int:
        return self.ctx.p

    def __repr__(self):
        return f"PrimeFieldElement({self.value} mod {self.p})"

    def _coerce(self, other) -> Optional[int]:
        if isinstance(other, PrimeFieldElement):
            return other.value
        if isinstance(other, int):
            return other % self.p
        return None

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is None else PrimeFieldElement(self.ctx, (self.value + o) % self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is None else PrimeFieldElement(self.ctx, (self.value - o) % self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is None else PrimeFieldElement(self.ctx, (o - self.value) % self.p)

    def __neg__(self):
        return PrimeFieldElement(self.ctx, -self.value % self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is None else PrimeFieldElement(self.ctx, self.value * o % self.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is None else PrimeFieldElement(self.ctx, self.ctx.div(self.value, o))

    def __pow__(self, e: int):
        if e < 0:
            return PrimeFieldElement(self.ctx, pow(self.ctx.inv(self.value), -e, self.p))
        return PrimeFieldElement(self.ctx, pow(self.value, e, self.p))

    def square(self) -> "PrimeFieldElement":
        return self * self

    def inverse(self) -> "PrimeFieldElement":
        return PrimeFieldElement(self.ctx, self.ctx.inv(self.value))

    def is_zero(self) -> bool:
        return self.value == 0

    @property
    def raw(self) -> int:
        return self.value
