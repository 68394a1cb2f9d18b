"""
Sparse multivariate polynomials over a finite field, Sylvester resultants and
Summation polynomials S_m.

Coefficients are stored as raw field values (ints) and combined through the
field context, so a MultiPoly works unchanged over F_{2^n} and over F_p.
"""
import logging
import threading
from itertools import permutations
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from app.arithmetic.curve import BinaryCurve, PrimeCurve
from app.config import config
from app.errors import BadArity, SizeLimit, UnsupportedCurveForm, ZeroLeadingForm

logger = logging.getLogger(__name__)

Exponents = Tuple[int, ...]


class MultiPoly:
    """Sparse polynomial: exponent vector -> nonzero raw coefficient."""

    __slots__ = ("field", "vars", "terms")

    def __init__(self, field, vars: Sequence[str], terms: Optional[Mapping[Exponents, int]] = None):
        self.field = field
        self.vars = tuple(vars)
        self.terms: Dict[Exponents, int] = {}
        for exps, coeff in (terms or {}).items():
            if len(exps) != len(self.vars):
                raise BadArity(f"exponent vector {exps} does not match variables {self.vars}")
            if not field.is_zero(coeff):
                self.terms[tuple(exps)] = coeff

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, field, vars: Sequence[str], value) -> "MultiPoly":
        return cls(field, vars, {(0,) * len(vars): field.raw_of(value)})

    @classmethod
    def variable(cls, field, vars: Sequence[str], name: str) -> "MultiPoly":
        exps = tuple(1 if v == name else 0 for v in vars)
        if not any(exps):
            raise BadArity(f"{name} is not one of {tuple(vars)}")
        return cls(field, vars, {exps: field.one})

    def _new(self, terms: Dict[Exponents, int]) -> "MultiPoly":
        poly = MultiPoly.__new__(MultiPoly)
        poly.field = self.field
        poly.vars = self.vars
        poly.terms = terms
        return poly

    # -- arithmetic ---------------------------------------------------------

    def _aligned(self, other: "MultiPoly") -> "MultiPoly":
        if other.vars == self.vars:
            return other
        return other.with_vars(self.vars)

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        other = self._aligned(other)
        add, is_zero = self.field.add, self.field.is_zero
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            value = add(terms[exps], coeff) if exps in terms else coeff
            if is_zero(value):
                terms.pop(exps, None)
            else:
                terms[exps] = value
        return self._new(terms)

    def __neg__(self) -> "MultiPoly":
        neg = self.field.neg
        return self._new({e: neg(c) for e, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other: Union["MultiPoly", int]) -> "MultiPoly":
        field = self.field
        if not isinstance(other, MultiPoly):
            return self.scale(field.raw_of(other))
        other = self._aligned(other)
        mul, add, is_zero = field.mul, field.add, field.is_zero
        terms: Dict[Exponents, int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                value = mul(c1, c2)
                if exps in terms:
                    value = add(terms[exps], value)
                    if is_zero(value):
                        del terms[exps]
                        continue
                terms[exps] = value
        return self._new({e: c for e, c in terms.items() if not is_zero(c)})

    def scale(self, value: int) -> "MultiPoly":
        mul, is_zero = self.field.mul, self.field.is_zero
        if is_zero(value):
            return self._new({})
        return self._new({e: mul(c, value) for e, c in self.terms.items()})

    def __pow__(self, e: int) -> "MultiPoly":
        result = MultiPoly.constant(self.field, self.vars, self.field.one)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.terms == self._aligned(other).terms

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    def __repr__(self):
        return f"MultiPoly({self.to_text()})"

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def degree(self, var: str) -> int:
        i = self.vars.index(var)
        return max((e[i] for e in self.terms), default=-1)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def leading_coefficient(self) -> int:
        return self.terms[max(self.terms)]

    def monic(self) -> "MultiPoly":
        if not self.terms:
            return self
        return self.scale(self.field.inv(self.leading_coefficient()))

    def with_vars(self, new_vars: Sequence[str]) -> "MultiPoly":
        """Re-embed into a variable list containing every variable in use."""
        new_vars = tuple(new_vars)
        index = {v: i for i, v in enumerate(new_vars)}
        used = {v for e in self.terms for v, k in zip(self.vars, e) if k}
        missing = used - index.keys()
        if missing:
            raise BadArity(f"variables {sorted(missing)} dropped by re-embedding")
        positions = [index.get(v) for v in self.vars]
        terms = {}
        for exps, coeff in self.terms.items():
            target = [0] * len(new_vars)
            for pos, k in zip(positions, exps):
                if k:
                    target[pos] = k
            terms[tuple(target)] = coeff
        return MultiPoly(self.field, new_vars, terms)

    def rename(self, mapping: Mapping[str, str]) -> "MultiPoly":
        return MultiPoly(self.field, [mapping.get(v, v) for v in self.vars], self.terms)

    def permute(self, order: Sequence[int]) -> "MultiPoly":
        """Substitute vars[i] -> vars[order[i]]."""
        terms = {}
        for exps, coeff in self.terms.items():
            target = [0] * len(exps)
            for i, k in enumerate(exps):
                target[order[i]] = k
            terms[tuple(target)] = coeff
        return self._new(terms)

    def is_symmetric(self) -> bool:
        return all(self.permute(order) == self for order in permutations(range(len(self.vars))))

    def coeffs_in(self, var: str) -> List["MultiPoly"]:
        """Coefficients c_k (k = 0..deg) with self = sum c_k * var^k."""
        i = self.vars.index(var)
        rest = self.vars[:i] + self.vars[i + 1:]
        buckets: Dict[int, Dict[Exponents, int]] = {}
        for exps, coeff in self.terms.items():
            buckets.setdefault(exps[i], {})[exps[:i] + exps[i + 1:]] = coeff
        degree = max(buckets, default=-1)
        return [MultiPoly(self.field, rest, buckets.get(k, {})) for k in range(degree + 1)]

    def substitute(self, values: Mapping[str, object]) -> "MultiPoly":
        """Partial evaluation; the substituted variables are removed."""
        field = self.field
        keep = [i for i, v in enumerate(self.vars) if v not in values]
        fixed = [(i, field.raw_of(values[v])) for i, v in enumerate(self.vars) if v in values]
        powers = {i: _powers(field, value, self.degree(self.vars[i])) for i, value in fixed}
        terms: Dict[Exponents, int] = {}
        for exps, coeff in self.terms.items():
            for i, _ in fixed:
                coeff = field.mul(coeff, powers[i][exps[i]])
            key = tuple(exps[i] for i in keep)
            terms[key] = field.add(terms[key], coeff) if key in terms else coeff
        return MultiPoly(field, [self.vars[i] for i in keep], terms)

    def eval(self, assignment: Union[Sequence, Mapping[str, object]]):
        """Evaluate at a full assignment; powers are cached per variable."""
        field = self.field
        if isinstance(assignment, Mapping):
            assignment = [assignment[v] for v in self.vars]
        if len(assignment) != len(self.vars):
            raise BadArity(f"expected {len(self.vars)} values, got {len(assignment)}")
        raw = [field.raw_of(a) for a in assignment]
        powers = [_powers(field, value, self.degree(v)) for value, v in zip(raw, self.vars)]
        mul, add = field.mul, field.add
        acc = field.zero
        for exps, coeff in self.terms.items():
            term = coeff
            for i, k in enumerate(exps):
                if k:
                    term = mul(term, powers[i][k])
            acc = add(acc, term)
        return field.element(acc)

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps in sorted(self.terms, reverse=True):
            factors = [self.field.format(self.terms[exps])]
            for v, k in zip(self.vars, exps):
                if k == 1:
                    factors.append(v)
                elif k > 1:
                    factors.append(f"{v}^{k}")
            parts.append("*".join(factors))
        return " + ".join(parts)


def _powers(field, value: int, degree: int) -> List[int]:
    powers = [field.one]
    for _ in range(max(degree, 0)):
        powers.append(field.mul(powers[-1], value))
    return powers


def _union_vars(*polys: MultiPoly) -> Tuple[str, ...]:
    names: List[str] = []
    for poly in polys:
        names.extend(v for v in poly.vars if v not in names)
    return tuple(names)


# ---------------------------------------------------------------------------
# Resultants
# ---------------------------------------------------------------------------

def resultant(p: MultiPoly, q: MultiPoly, var: str) -> MultiPoly:
    """
    Res_var(p, q) as the Sylvester determinant, expanded by rows with the
    minors memoized on their column sets (no division in the coefficient ring).
    """
    names = _union_vars(p, q)
    p, q = p.with_vars(names), q.with_vars(names)
    P, Q = p.coeffs_in(var), q.coeffs_in(var)
    dp, dq = len(P) - 1, len(Q) - 1
    if dp <= 0 or dq <= 0:
        raise ZeroLeadingForm(f"both polynomials need positive degree in {var} (got {dp}, {dq})")
    field = p.field
    rest = tuple(v for v in names if v != var)
    zero = MultiPoly(field, rest)
    one = MultiPoly.constant(field, rest, field.one)
    size = dp + dq

    # q-rows (small entries) on top, p-rows last so the big products are
    # formed once in the deepest minors; sign corrected below.
    matrix: List[List[MultiPoly]] = []
    for i in range(dp):
        row = [zero] * size
        for j in range(dq + 1):
            row[i + j] = Q[dq - j]
        matrix.append(row)
    for i in range(dq):
        row = [zero] * size
        for j in range(dp + 1):
            row[i + j] = P[dp - j]
        matrix.append(row)

    memo: Dict[int, MultiPoly] = {}

    def minor(r: int, cols: int) -> MultiPoly:
        if r == size:
            return one
        if cols in memo:
            return memo[cols]
        total = zero
        position = 0
        for c in range(size):
            if not cols >> c & 1:
                continue
            entry = matrix[r][c]
            if not entry.is_zero():
                sub = minor(r + 1, cols & ~(1 << c))
                if not sub.is_zero():
                    term = entry * sub
                    total = total - term if position & 1 else total + term
            position += 1
        memo[cols] = total
        return total

    det = minor(0, (1 << size) - 1)
    if (dp * dq) & 1:
        det = -det
    return det


# ---------------------------------------------------------------------------
# Summation polynomials
# ---------------------------------------------------------------------------

def s2(curve) -> MultiPoly:
    field = curve.ctx
    names = ("x1", "x2")
    return MultiPoly.variable(field, names, "x1") - MultiPoly.variable(field, names, "x2")


def s3(curve) -> MultiPoly:
    """Third summation polynomial in x1, x2, x3."""
    names = ("x1", "x2", "x3")
    if isinstance(curve, BinaryCurve):
        field = curve.ctx
        one = field.one
        # (x1x2 + x1x3 + x2x3)^2 + x1x2x3 + B, squares expanded
        return MultiPoly(field, names, {
            (2, 2, 0): one,
            (2, 0, 2): one,
            (0, 2, 2): one,
            (1, 1, 1): one,
            (0, 0, 0): curve.B.bits,
        })
    if isinstance(curve, PrimeCurve):
        field = curve.ctx
        x1, x2, x3 = (MultiPoly.variable(field, names, v) for v in names)
        A = MultiPoly.constant(field, names, curve.A)
        B = MultiPoly.constant(field, names, curve.B)
        two = field.from_int(2)
        four = field.from_int(4)
        return ((x1 - x2) ** 2 * x3 ** 2
                - ((x1 + x2) * (x1 * x2 + A) + B * two) * x3 * two
                + (x1 * x2 - A) ** 2
                - B * (x1 + x2) * four)
    raise UnsupportedCurveForm(f"no S_3 formula for {type(curve).__name__}")


class SumPolyCache:
    """Per-curve memo of constructed S_m; construction is serialized."""

    def __init__(self):
        self._lock = threading.RLock()
        self._store: Dict[Tuple[object, int], MultiPoly] = {}

    def get(self, curve, m: int) -> MultiPoly:
        with self._lock:
            key = (curve, m)
            if key not in self._store:
                self._store[key] = _build_s_m(curve, m, self)
            return self._store[key]

    def __len__(self) -> int:
        return len(self._store)


default_cache = SumPolyCache()


def s_m(curve, m: int, cache: Optional[SumPolyCache] = None) -> MultiPoly:
    """S_m = Res_X(S_{m-1}(x1..x_{m-2}, X), S_3(x_{m-1}, x_m, X))."""
    if m < 3:
        raise BadArity(f"summation polynomials are built from m = 3 upward, got {m}")
    max_m = config.get("sumpoly.max_m", 7)
    if m > max_m:
        raise SizeLimit(f"m = {m} exceeds the configured maximum {max_m}")
    return (cache or default_cache).get(curve, m)


def _build_s_m(curve, m: int, cache: SumPolyCache) -> MultiPoly:
    if m == 3:
        return s3(curve)
    previous = cache.get(curve, m - 1)
    names = [f"x{i}" for i in range(1, m + 1)]
    F = previous.rename({f"x{m - 1}": "X"})
    G = s3(curve).rename({"x1": f"x{m - 1}", "x2": f"x{m}", "x3": "X"})
    result = resultant(F, G, "X").with_vars(names).monic()
    limit = config.get("sumpoly.max_terms", 1 << 22)
    if len(result) > limit:
        raise SizeLimit(f"S_{m} has {len(result)} terms, above the limit {limit}")
    logger.info(f"built S_{m} with {len(result)} terms")
    return result


def term_listing(poly: MultiPoly) -> Iterable[str]:
    """One line per term, highest exponent vector first."""
    for exps in sorted(poly.terms, reverse=True):
        yield f"{poly.field.format(poly.terms[exps])} {' '.join(str(k) for k in exps)}"
