"""
Decomposition system over F_{2^n} and its Weil descent to Boolean ANF.

A field-valued Boolean function is kept as a FieldVector: n coordinate
BoolPolys in the polynomial basis. Substituting x = sum b_j v_j into an
equation and multiplying out these vectors gives the descended system.
"""
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from app.algebra.sumpoly import MultiPoly, s3
from app.arithmetic.curve import BinaryCurve
from app.arithmetic.field import BinaryFieldCtx, FieldElement, poly_mod, solve_gf2_linear
from app.errors import BadArity, NoSolution

V_MODES = ("low-degree", "random")


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def monomial_key(mask: int) -> Tuple[int, int]:
    """Graded order: degree first, ties broken by the mask as an integer."""
    return popcount(mask), mask


# ---------------------------------------------------------------------------
# Subspace V
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubspaceV:
    ctx: BinaryFieldCtx
    k: int
    basis: Tuple[int, ...]
    mode: str = "low-degree"

    def __post_init__(self):
        if not 1 <= self.k <= self.ctx.n:
            raise ValueError(f"subspace dimension must be in [1, {self.ctx.n}], got {self.k}")
        if len(self.basis) != self.k:
            raise ValueError("basis length does not match k")
        if _rank(self.basis) != self.k:
            raise ValueError("basis is not linearly independent over F_2")

    @classmethod
    def low_degree(cls, ctx: BinaryFieldCtx, k: int) -> "SubspaceV":
        """All polynomials in alpha of degree < k."""
        return cls(ctx, k, tuple(1 << j for j in range(k)), "low-degree")

    @classmethod
    def random(cls, ctx: BinaryFieldCtx, k: int, rng: random.Random) -> "SubspaceV":
        basis: List[int] = []
        while len(basis) < k:
            candidate = rng.getrandbits(ctx.n)
            if candidate and _rank(basis + [candidate]) == len(basis) + 1:
                basis.append(candidate)
        return cls(ctx, k, tuple(basis), "random")

    @classmethod
    def build(cls, ctx: BinaryFieldCtx, k: int, mode: str, rng: "Optional[random.Random]" = None) -> "SubspaceV":
        if mode == "low-degree":
            return cls.low_degree(ctx, k)
        if mode == "random":
            return cls.random(ctx, k, rng or random.Random(k))
        raise ValueError(f"V-mode must be one of {V_MODES}, got {mode!r}")

    @property
    def size(self) -> int:
        return 1 << self.k

    def element(self, coords: int) -> FieldElement:
        bits = 0
        for j, v in enumerate(self.basis):
            if coords >> j & 1:
                bits ^= v
        return FieldElement(self.ctx, bits)

    def elements(self) -> List[FieldElement]:
        return [self.element(c) for c in range(self.size)]

    def coords(self, x: FieldElement) -> Optional[int]:
        try:
            return solve_gf2_linear(list(self.basis), x.bits)
        except NoSolution:
            return None

    def contains(self, x: FieldElement) -> bool:
        if self.mode == "low-degree":
            return x.bits >> self.k == 0
        return self.coords(x) is not None


def _rank(vectors: Sequence[int]) -> int:
    pivots: Dict[int, int] = {}
    for vec in vectors:
        while vec:
            top = vec.bit_length() - 1
            if top not in pivots:
                pivots[top] = vec
                break
            vec ^= pivots[top]
    return len(pivots)


# ---------------------------------------------------------------------------
# Boolean polynomials in ANF
# ---------------------------------------------------------------------------

def _toggle(target: set, mask: int):
    if mask in target:
        target.remove(mask)
    else:
        target.add(mask)


def _anf_mul(a: Iterable[int], b: Iterable[int]) -> set:
    out: set = set()
    b = list(b)
    for m1 in a:
        for m2 in b:
            _toggle(out, m1 | m2)
    return out


class BoolPoly:
    """XOR of squarefree monomials; a monomial is a variable-index mask, 0 is the constant 1."""

    __slots__ = ("monomials",)

    def __init__(self, monomials: Iterable[int] = ()):
        self.monomials = frozenset(monomials)

    @classmethod
    def from_terms(cls, masks: Iterable[int]) -> "BoolPoly":
        """Build from a list where repeated monomials cancel in pairs."""
        out: set = set()
        for m in masks:
            _toggle(out, m)
        return cls(out)

    @classmethod
    def constant(cls, bit: int) -> "BoolPoly":
        return cls({0} if bit & 1 else ())

    @classmethod
    def variable(cls, index: int) -> "BoolPoly":
        return cls({1 << index})

    def __add__(self, other: "BoolPoly") -> "BoolPoly":
        return BoolPoly(self.monomials ^ other.monomials)

    def __mul__(self, other: "BoolPoly") -> "BoolPoly":
        return BoolPoly(_anf_mul(self.monomials, other.monomials))

    def __eq__(self, other) -> bool:
        return isinstance(other, BoolPoly) and self.monomials == other.monomials

    def __hash__(self):
        return hash(self.monomials)

    def __len__(self) -> int:
        return len(self.monomials)

    def __repr__(self):
        return f"BoolPoly({self.to_text()})"

    def is_zero(self) -> bool:
        return not self.monomials

    def degree(self) -> int:
        return max((popcount(m) for m in self.monomials), default=-1)

    def variables(self) -> int:
        mask = 0
        for m in self.monomials:
            mask |= m
        return mask

    def evaluate(self, assignment: int) -> int:
        """Value at the assignment given as a bit mask over variable indices."""
        value = 0
        for m in self.monomials:
            if assignment & m == m:
                value ^= 1
        return value

    def substitute(self, index: int, replacement: "BoolPoly") -> "BoolPoly":
        """Replace variable `index` by a polynomial not containing it."""
        bit = 1 << index
        out: set = set()
        for m in self.monomials:
            if m & bit:
                rest = m ^ bit
                for r in replacement.monomials:
                    _toggle(out, rest | r)
            else:
                _toggle(out, m)
        return BoolPoly(out)

    def to_text(self, names: Optional[Sequence[str]] = None) -> str:
        if not self.monomials:
            return "0"
        parts = []
        for m in sorted(self.monomials, key=monomial_key, reverse=True):
            if m == 0:
                parts.append("1")
                continue
            idx = [i for i in range(m.bit_length()) if m >> i & 1]
            parts.append("*".join(names[i] if names else f"v{i}" for i in idx))
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# Field-valued Boolean functions
# ---------------------------------------------------------------------------

class FieldVector:
    """n coordinate ANF polynomials of an F_{2^n}-valued Boolean function."""

    __slots__ = ("ctx", "coords")

    def __init__(self, ctx: BinaryFieldCtx, coords: List[set]):
        self.ctx = ctx
        self.coords = coords

    @classmethod
    def constant(cls, ctx: BinaryFieldCtx, bits: int) -> "FieldVector":
        return cls(ctx, [{0} if bits >> c & 1 else set() for c in range(ctx.n)])

    @classmethod
    def from_basis(cls, ctx: BinaryFieldCtx, start: int, basis: Sequence[int]) -> "FieldVector":
        """sum_j var_{start+j} * basis[j]."""
        coords = [set() for _ in range(ctx.n)]
        for j, v in enumerate(basis):
            for c in range(ctx.n):
                if v >> c & 1:
                    _toggle(coords[c], 1 << (start + j))
        return cls(ctx, coords)

    def __add__(self, other: "FieldVector") -> "FieldVector":
        return FieldVector(self.ctx, [a ^ b for a, b in zip(self.coords, other.coords)])

    def __mul__(self, other: "FieldVector") -> "FieldVector":
        ctx = self.ctx
        reduction = _reduction_table(ctx)
        out = [set() for _ in range(ctx.n)]
        for i, a in enumerate(self.coords):
            if not a:
                continue
            for j, b in enumerate(other.coords):
                if not b:
                    continue
                product = _anf_mul(a, b)
                if not product:
                    continue
                target = reduction[i + j]
                for c in range(ctx.n):
                    if target >> c & 1:
                        out[c] ^= product
        return FieldVector(ctx, out)

    def square(self) -> "FieldVector":
        # a_i^2 = a_i in the Boolean ring, so squaring is linear.
        ctx = self.ctx
        reduction = _reduction_table(ctx)
        out = [set() for _ in range(ctx.n)]
        for i, a in enumerate(self.coords):
            if not a:
                continue
            target = reduction[2 * i]
            for c in range(ctx.n):
                if target >> c & 1:
                    out[c] ^= a
        return FieldVector(ctx, out)

    def __pow__(self, e: int) -> "FieldVector":
        result = None
        base = self
        while e:
            if e & 1:
                result = base if result is None else result * base
            e >>= 1
            if e:
                base = base.square()
        return result if result is not None else FieldVector.constant(self.ctx, 1)

    def evaluate(self, assignment: int) -> int:
        bits = 0
        for c, coord in enumerate(self.coords):
            value = 0
            for m in coord:
                if assignment & m == m:
                    value ^= 1
            bits |= value << c
        return bits


_REDUCTION_CACHE: Dict[Tuple[int, int], List[int]] = {}


def _reduction_table(ctx: BinaryFieldCtx) -> List[int]:
    key = (ctx.n, ctx.f)
    if key not in _REDUCTION_CACHE:
        _REDUCTION_CACHE[key] = [poly_mod(1 << e, ctx.f) for e in range(2 * ctx.n - 1)]
    return _REDUCTION_CACHE[key]


def descend_poly(poly: MultiPoly, operands: Sequence[FieldVector]) -> FieldVector:
    """Evaluate a field polynomial at field-valued Boolean functions."""
    ctx = operands[0].ctx
    powers: Dict[Tuple[int, int], FieldVector] = {}
    total = FieldVector(ctx, [set() for _ in range(ctx.n)])
    for exps, coeff in poly.terms.items():
        factors = []
        for i, k in enumerate(exps):
            if k:
                if (i, k) not in powers:
                    powers[(i, k)] = operands[i] ** k
                factors.append(powers[(i, k)])
        if coeff != 1:
            factors.insert(0, FieldVector.constant(ctx, coeff))
        if not factors:
            term = FieldVector.constant(ctx, coeff)
        else:
            term = factors[0]
            for factor in factors[1:]:
                term = term * factor
        total = total + term
    return total


# ---------------------------------------------------------------------------
# Decomposition system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldVar:
    name: str
    restricted: bool


Operand = Union[FieldVar, FieldElement]


@dataclass(frozen=True)
class FieldEquation:
    poly: MultiPoly
    operands: Tuple[Operand, ...]

    def describe(self) -> str:
        args = [o.name if isinstance(o, FieldVar) else f"{o.bits:#x}" for o in self.operands]
        return f"S3({', '.join(args)})"

    def evaluate(self, values: Dict[str, FieldElement]) -> FieldElement:
        args = [values[o.name] if isinstance(o, FieldVar) else o for o in self.operands]
        return self.poly.eval(args)


def build_system(curve: BinaryCurve, R_X: FieldElement, t: int, V: SubspaceV) -> List[FieldEquation]:
    """
    The chain S3(u1, x1, x2), S3(u_i, u_{i+1}, x_{i+2}) for 1 <= i <= t-3,
    S3(u_{t-2}, x_t, R_X); for t = 2 the single equation S3(x1, x2, R_X).
    """
    if t < 2:
        raise BadArity(f"decomposition needs t >= 2, got {t}")
    if V.contains(R_X):
        raise ValueError("R_X lies in V: the caller records a t = 1 relation instead")
    S3 = s3(curve)
    x = [FieldVar(f"x{i}", True) for i in range(1, t + 1)]
    u = [FieldVar(f"u{i}", False) for i in range(1, t - 1)]
    if t == 2:
        return [FieldEquation(S3, (x[0], x[1], R_X))]
    equations = [FieldEquation(S3, (u[0], x[0], x[1]))]
    for i in range(t - 3):
        equations.append(FieldEquation(S3, (u[i], u[i + 1], x[i + 2])))
    equations.append(FieldEquation(S3, (u[t - 3], x[t - 1], R_X)))
    return equations


@dataclass
class BoolSystem:
    """Descended system: n coordinate equations per field equation."""
    nvars: int
    polys: List[BoolPoly]
    names: List[str] = field(default_factory=list)
    provenance: List[Tuple[int, int]] = field(default_factory=list)
    blocks: Dict[str, Tuple[int, Tuple[int, ...]]] = field(default_factory=dict)
    ctx: Optional[BinaryFieldCtx] = None

    def __post_init__(self):
        if not self.names:
            self.names = [f"b{i}" for i in range(self.nvars)]

    @classmethod
    def from_polys(cls, polys: Sequence[BoolPoly], nvars: int) -> "BoolSystem":
        return cls(nvars=nvars, polys=list(polys))

    def max_degree(self) -> int:
        return max((p.degree() for p in self.polys), default=-1)

    def coordinate_degrees(self) -> List[int]:
        return [p.degree() for p in self.polys]

    def is_solution(self, assignment: int) -> bool:
        return all(p.evaluate(assignment) == 0 for p in self.polys)

    def decode(self, assignment: int) -> Dict[str, FieldElement]:
        """Reassemble field values of every block from a Boolean assignment."""
        values = {}
        for name, (start, basis) in self.blocks.items():
            bits = 0
            for j, v in enumerate(basis):
                if assignment >> (start + j) & 1:
                    bits ^= v
            values[name] = FieldElement(self.ctx, bits)
        return values

    def to_text(self) -> str:
        return "\n".join(p.to_text(self.names) for p in self.polys)


def weil_descend(equations: Sequence[FieldEquation], V: SubspaceV, ctx: BinaryFieldCtx) -> BoolSystem:
    """
    x_i = sum_{j<k} b_ij v_j (V-restricted), u_i = sum_{j<n} c_ij alpha^j; each
    field equation gives its n coordinates in the polynomial basis.
    """
    restricted, full = [], []
    for eq in equations:
        for o in eq.operands:
            if isinstance(o, FieldVar):
                bucket = restricted if o.restricted else full
                if o.name not in bucket:
                    bucket.append(o.name)
    restricted.sort(key=lambda name: int(name[1:]))
    full.sort(key=lambda name: int(name[1:]))

    names: List[str] = []
    blocks: Dict[str, Tuple[int, Tuple[int, ...]]] = {}
    offset = 0
    for name in restricted:
        blocks[name] = (offset, V.basis)
        names.extend(f"b{offset + j}" for j in range(V.k))
        offset += V.k
    u_offset = offset
    for name in full:
        blocks[name] = (offset, tuple(1 << j for j in range(ctx.n)))
        names.extend(f"c{offset - u_offset + j}" for j in range(ctx.n))
        offset += ctx.n

    vectors = {name: FieldVector.from_basis(ctx, start, basis) for name, (start, basis) in blocks.items()}
    polys: List[BoolPoly] = []
    provenance: List[Tuple[int, int]] = []
    for eq_index, eq in enumerate(equations):
        operands = [vectors[o.name] if isinstance(o, FieldVar) else FieldVector.constant(ctx, o.bits)
                    for o in eq.operands]
        result = descend_poly(eq.poly, operands)
        for coord in range(ctx.n):
            polys.append(BoolPoly(result.coords[coord]))
            provenance.append((eq_index, coord))

    return BoolSystem(nvars=offset, polys=polys, names=names, provenance=provenance, blocks=blocks, ctx=ctx)


def descend(curve: BinaryCurve, R_X: FieldElement, t: int, V: SubspaceV) -> Tuple[List[FieldEquation], BoolSystem]:
    equations = build_system(curve, R_X, t, V)
    return equations, weil_descend(equations, V, curve.ctx)
