"""
Degree-bounded XL elimination over F_2 for Boolean systems in ANF.

Rows of the Macaulay matrix are Python ints used as bitsets over a global
graded-colex ranking of squarefree monomials, so the leading bit of a row
is its largest monomial and the degree of a reduced row is read off its
leading column. At each degree bound D the generators are multiplied by
every monomial that keeps the product within D, rows whose degree fell are
multiplied again by single variables until nothing new appears, and any
linear polynomials found are substituted back before restarting. When no
linear polynomial shows up below the cap the solver guesses a variable.
"""
import enum
import logging
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from app.algebra.descent import BoolPoly, BoolSystem, FieldVector, descend_poly, popcount
from app.algebra.sumpoly import MultiPoly, s3
from app.arithmetic.curve import BinaryCurve
from app.config import config
from app.errors import ResourceLimit, TooLarge, UnsoundSolution

logger = logging.getLogger(__name__)


class MonomialIndex:
    """Graded colex ranking of squarefree monomials of degree <= max_degree."""

    def __init__(self, nvars: int, max_degree: int):
        self.nvars = nvars
        self.max_degree = min(max_degree, nvars)
        self.offsets = [0]
        for d in range(self.max_degree + 1):
            self.offsets.append(self.offsets[-1] + comb(nvars, d))
        self._ranks: Dict[int, int] = {}
        self._masks: Dict[int, int] = {}

    @property
    def width(self) -> int:
        return self.offsets[-1]

    def width_at(self, degree: int) -> int:
        return self.offsets[min(degree, self.max_degree) + 1]

    def rank(self, mask: int) -> int:
        r = self._ranks.get(mask)
        if r is None:
            r = self.offsets[popcount(mask)]
            i, rest = 1, mask
            while rest:
                low = rest & -rest
                r += comb(low.bit_length() - 1, i)
                i += 1
                rest ^= low
            self._ranks[mask] = r
        return r

    def unrank(self, r: int) -> int:
        mask = self._masks.get(r)
        if mask is None:
            d = bisect_right(self.offsets, r) - 1
            rest = r - self.offsets[d]
            mask = 0
            for i in range(d, 0, -1):
                p = i - 1
                while comb(p + 1, i) <= rest:
                    p += 1
                mask |= 1 << p
                rest -= comb(p, i)
            self._masks[r] = mask
        return mask

    def degree_of(self, column: int) -> int:
        return bisect_right(self.offsets, column) - 1

    def row(self, monomials) -> int:
        out = 0
        for m in monomials:
            out ^= 1 << self.rank(m)
        return out

    def monomials(self, row: int) -> List[int]:
        out = []
        while row:
            lead = row.bit_length() - 1
            out.append(self.unrank(lead))
            row ^= 1 << lead
        return out


def _times(monomials: Sequence[int], m: int) -> set:
    out: set = set()
    for x in monomials:
        y = x | m
        if y in out:
            out.remove(y)
        else:
            out.add(y)
    return out


class _Echelon:
    """Rows keyed by leading column; insertion reduces on leading terms only."""

    def __init__(self):
        self.pivots: Dict[int, int] = {}

    def insert(self, row: int) -> int:
        pivots = self.pivots
        while row:
            lead = row.bit_length() - 1
            p = pivots.get(lead)
            if p is None:
                pivots[lead] = row
                return row
            row ^= p
        return 0

    def __len__(self):
        return len(self.pivots)


@dataclass
class StepRecord:
    step: int
    degree: int
    rows: int
    cols: int
    new: int


@dataclass
class SolverTelemetry:
    steps: List[StepRecord] = field(default_factory=list)
    branches: int = 0

    @property
    def step_degrees(self) -> List[int]:
        # steps that produced nothing new are bookkeeping, not degree evidence
        return [s.degree for s in self.steps if s.new]

    @property
    def d_max(self) -> int:
        return max(self.step_degrees, default=0)

    @property
    def matrix_dims(self) -> List[Tuple[int, int]]:
        return [(s.rows, s.cols) for s in self.steps]

    @property
    def new_poly_counts(self) -> List[int]:
        return [s.new for s in self.steps]

    @property
    def peak_columns(self) -> int:
        return max((s.cols for s in self.steps), default=0)

    def lines(self) -> List[str]:
        return [f"step={s.step} degree={s.degree} rows={s.rows} cols={s.cols} new={s.new}" for s in self.steps]


class SolveStatus(enum.Enum):
    SOLUTIONS = "solutions"
    INCONSISTENT = "inconsistent"
    DEGREE_CAP_EXCEEDED = "degree-cap-exceeded"


@dataclass
class SolveOutcome:
    status: SolveStatus
    solutions: List[int]
    telemetry: SolverTelemetry

    @property
    def satisfiable(self) -> bool:
        return self.status is SolveStatus.SOLUTIONS


class _BudgetSpent(Exception):
    pass


class XLSolver:
    """One solve of one Boolean system; not shared between threads."""

    def __init__(self, nvars: int, d_cap: int, split_budget: int):
        self.nvars = nvars
        self.d_cap = d_cap
        self.split_budget = split_budget
        self.max_columns = config.get("solver.max_columns", 4_000_000)
        self.free_enum_limit = config.get("solver.free_enum_limit", 16)
        self.index = MonomialIndex(nvars, max(d_cap, 1))
        if self.index.width > self.max_columns:
            raise ResourceLimit(f"{self.index.width} columns exceed the bound of {self.max_columns}")
        self.telemetry = SolverTelemetry()

    # -- elimination at one degree bound ------------------------------------

    def closure(self, gens: List[BoolPoly], D: int) -> Tuple[_Echelon, int]:
        index = self.index
        echelon = _Echelon()
        seen = set()
        fallen = deque()
        falls = 0

        def push(row: int, nominal: int):
            nonlocal falls
            if not row or row in seen:
                return
            seen.add(row)
            reduced = echelon.insert(row)
            if reduced:
                degree = index.degree_of(reduced.bit_length() - 1)
                if degree < nominal:
                    falls += 1
                    fallen.append(reduced)

        for f in gens:
            monos = list(f.monomials)
            d = f.degree()
            for e in range(0, D - d + 1):
                for combo in combinations(range(self.nvars), e):
                    m = 0
                    for v in combo:
                        m |= 1 << v
                    push(index.row(_times(monos, m)), d + e)

        # rows whose degree fell are multiplied again until nothing new appears
        while fallen:
            row = fallen.popleft()
            degree = index.degree_of(row.bit_length() - 1)
            if degree >= D:
                continue
            monos = index.monomials(row)
            for v in range(self.nvars):
                push(index.row(_times(monos, 1 << v)), degree + 1)
        return echelon, falls

    # -- search --------------------------------------------------------------

    def solve(self, gens: List[BoolPoly]) -> List[int]:
        return self._search(gens, [])

    def _search(self, gens: List[BoolPoly], subs: List[Tuple[int, BoolPoly]]) -> List[int]:
        index = self.index
        while True:
            gens = [g for g in gens if not g.is_zero()]
            if any(g.monomials == {0} for g in gens):
                return []
            if not gens:
                return self._expand(subs)
            start = max(g.degree() for g in gens)
            linear: List[BoolPoly] = []
            for D in range(max(start, 1), self.d_cap + 1):
                echelon, falls = self.closure(gens, D)
                step = len(self.telemetry.steps) + 1
                record = StepRecord(step, D, len(echelon), index.width_at(D), falls)
                self.telemetry.steps.append(record)
                logger.debug(f"step={record.step} degree={D} rows={record.rows} cols={record.cols} new={falls}")
                if 0 in echelon.pivots:
                    return []
                linear = [BoolPoly(index.monomials(row)) for lead, row in echelon.pivots.items() if lead <= self.nvars]
                if linear:
                    break
            if not linear:
                return self._branch(gens, subs)
            subs = list(subs)
            for p in linear:
                p = self._apply(p, subs)
                if p.is_zero():
                    continue
                if p.monomials == {0}:
                    return []
                var = p.variables().bit_length() - 1
                expr = p + BoolPoly.variable(var)
                subs.append((var, expr))
                gens = [g.substitute(var, expr) for g in gens]

    def _apply(self, p: BoolPoly, subs: List[Tuple[int, BoolPoly]]) -> BoolPoly:
        for var, expr in subs:
            if p.variables() >> var & 1:
                p = p.substitute(var, expr)
        return p

    def _branch(self, gens: List[BoolPoly], subs: List[Tuple[int, BoolPoly]]) -> List[int]:
        if self.telemetry.branches >= self.split_budget:
            raise _BudgetSpent()
        self.telemetry.branches += 1
        var = self._branch_variable(gens)
        logger.debug(f"branching on b{var}")
        solutions = []
        for value in (0, 1):
            const = BoolPoly.constant(value)
            solutions.extend(self._search([g.substitute(var, const) for g in gens], subs + [(var, const)]))
        return solutions

    @staticmethod
    def _branch_variable(gens: List[BoolPoly]) -> int:
        low = min(g.degree() for g in gens)
        counts: Dict[int, int] = {}
        for g in gens:
            if g.degree() != low:
                continue
            for m in g.monomials:
                while m:
                    bit = m & -m
                    v = bit.bit_length() - 1
                    counts[v] = counts.get(v, 0) + 1
                    m ^= bit
        return min(counts, key=lambda v: (-counts[v], v))

    def _expand(self, subs: List[Tuple[int, BoolPoly]]) -> List[int]:
        bound = {var for var, _ in subs}
        free = [v for v in range(self.nvars) if v not in bound]
        if len(free) > self.free_enum_limit:
            raise ResourceLimit(f"{len(free)} unconstrained variables exceed the enumeration limit")
        solutions = []
        for bits in range(1 << len(free)):
            assignment = 0
            for i, v in enumerate(free):
                if bits >> i & 1:
                    assignment |= 1 << v
            for var, expr in reversed(subs):
                if expr.evaluate(assignment):
                    assignment |= 1 << var
            solutions.append(assignment)
        return solutions


def xl_solve(system: BoolSystem, d_cap: Optional[int] = None, split_budget: Optional[int] = None) -> SolveOutcome:
    if not system.polys:
        raise ValueError("cannot solve an empty system")
    d_cap = d_cap if d_cap is not None else config.get("solver.d_cap", 4)
    split_budget = split_budget if split_budget is not None else config.get("solver.split_budget", 4096)
    solver = XLSolver(system.nvars, d_cap, split_budget)
    try:
        solutions = solver.solve(list(system.polys))
    except _BudgetSpent:
        logger.warning(f"branching budget of {split_budget} spent below degree cap {d_cap}")
        return SolveOutcome(SolveStatus.DEGREE_CAP_EXCEEDED, [], solver.telemetry)

    solutions = sorted(set(solutions))
    for assignment in solutions:
        if not system.is_solution(assignment):
            raise UnsoundSolution(f"assignment {assignment:#x} does not satisfy the system")
    status = SolveStatus.SOLUTIONS if solutions else SolveStatus.INCONSISTENT
    logger.debug(f"xl_solve: {status.value}, {len(solutions)} solutions, d_max={solver.telemetry.d_max}")
    return SolveOutcome(status, solutions, solver.telemetry)


def brute_force_solutions(system: BoolSystem) -> List[int]:
    """Reference answer set by exhaustive enumeration."""
    limit = config.get("solver.brute_force_max_vars", 24)
    if system.nvars > limit:
        raise TooLarge(f"{system.nvars} variables exceed the brute-force limit of {limit}")
    polys = sorted(system.polys, key=len)
    return [a for a in range(1 << system.nvars) if all(p.evaluate(a) == 0 for p in polys)]


# ---------------------------------------------------------------------------
# First fall degree
# ---------------------------------------------------------------------------

def _span(gens: List[BoolPoly], nvars: int, D: int, index: MonomialIndex) -> _Echelon:
    echelon = _Echelon()
    for f in gens:
        d = f.degree()
        if d > D:
            continue
        monos = list(f.monomials)
        for e in range(0, D - d + 1):
            for combo in combinations(range(nvars), e):
                m = 0
                for v in combo:
                    m |= 1 << v
                echelon.insert(index.row(_times(monos, m)))
    return echelon


def first_fall_degree(system: BoolSystem, max_degree: int = 4) -> Optional[int]:
    """
    Smallest D at which span{m*f : deg m + deg f <= D} holds a polynomial of
    degree below D that the products bounded by D - 1 do not already give.
    """
    index = MonomialIndex(system.nvars, max_degree)
    previous = 0
    for D in range(1, max_degree + 1):
        echelon = _span(system.polys, system.nvars, D, index)
        below = sum(1 for lead in echelon.pivots if lead < index.offsets[D])
        if below > previous:
            logger.debug(f"first fall at degree {D}: {below - previous} new low-degree polynomials")
            return D
        previous = len(echelon)
    return None


@dataclass
class FirstFallReport:
    identity_holds: bool
    product_terms: str
    coordinate_degrees: List[int]
    nominal_degree: int
    constant_coordinate_degrees: List[int]
    first_fall: Optional[int] = None

    @property
    def passed(self) -> bool:
        fall_ok = self.first_fall is None or self.first_fall == self.nominal_degree
        return (self.identity_holds and max(self.coordinate_degrees) <= 3
                and self.nominal_degree == 4 and max(self.constant_coordinate_degrees) == 3 and fall_ok)


def verify_first_fall(curve: BinaryCurve, constant=None, search: bool = False) -> FirstFallReport:
    """
    Expand x1*S3(x1, x2, x3) and check it is
    x1^3x2^2 + x1^3x3^2 + x1x2^2x3^2 + x1^2x2x3 + B*x1, whose Boolean
    coordinates have degree 3 although deg x1 + deg_F2 S3 = 4.
    """
    ctx = curve.ctx
    S3 = s3(curve)
    x1 = MultiPoly.variable(ctx, S3.vars, S3.vars[0])
    x2 = MultiPoly.variable(ctx, S3.vars, S3.vars[1])
    x3 = MultiPoly.variable(ctx, S3.vars, S3.vars[2])
    product = x1 * S3
    expected = (x1 ** 3 * x2 ** 2 + x1 ** 3 * x3 ** 2 + x1 * x2 ** 2 * x3 ** 2
                + x1 ** 2 * x2 * x3 + x1 * MultiPoly.constant(ctx, S3.vars, curve.B))

    n = ctx.n
    full = tuple(1 << j for j in range(n))
    operands = [FieldVector.from_basis(ctx, i * n, full) for i in range(3)]
    degrees = [BoolPoly(c).degree() for c in descend_poly(product, operands).coords]
    s3_degree = max(BoolPoly(c).degree() for c in descend_poly(S3, operands).coords)

    z = constant if constant is not None else curve.B
    z_vec = FieldVector.constant(ctx, z.bits)
    const_degrees = [BoolPoly(c).degree() for c in descend_poly(product, operands[:2] + [z_vec]).coords]

    fall = None
    if search:
        polys = [BoolPoly(c) for c in descend_poly(S3, operands).coords]
        fall = first_fall_degree(BoolSystem.from_polys(polys, 3 * n), max_degree=4)

    report = FirstFallReport(
        identity_holds=product == expected,
        product_terms=product.to_text(),
        coordinate_degrees=degrees,
        nominal_degree=1 + s3_degree,
        constant_coordinate_degrees=const_degrees,
        first_fall=fall,
    )
    logger.info(f"first fall check n={n}: identity={report.identity_holds} degrees={degrees} fall={fall}")
    return report
