"""
Relation collection: random points R = uP + vQ, decomposition of R over the
factor base by solving the descended system, and lifting the solver's
x-coordinates back to points.
"""
import logging
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from app.algebra.descent import BoolSystem, SubspaceV, descend
from app.algebra.sumpoly import s_m, s3
from app.arithmetic.curve import BinaryCurve, Point, SubgroupCtx
from app.arithmetic.field import FieldElement
from app.config import config
from app.errors import (
    AssumptionViolation,
    BudgetExhausted,
    LiftMismatch,
    NoDecomposition,
    NoRationalPoint,
    SumPolyError,
    TooLarge,
)
from app.orchestration.trial_queue import TrialQueue
from app.solver.gbsolver import SolveOutcome, SolveStatus, xl_solve

logger = logging.getLogger(__name__)

SCHEDULES = ("t=m", "escalate")


def trial_rng(seed: int, index: int) -> random.Random:
    """Per-trial generator, independent of how trials are scheduled."""
    return random.Random(seed * 1_000_003 + index)


@dataclass
class FactorBase:
    """Canonical point (x, y_min) for every nonzero x in V that lifts rationally."""
    curve: BinaryCurve
    V: SubspaceV
    points: List[Point]
    index_of: Dict[int, int]

    @classmethod
    def build(cls, curve: BinaryCurve, V: SubspaceV) -> "FactorBase":
        points, index_of = [], {}
        for x in V.elements():
            if x.is_zero():
                continue
            try:
                canonical = curve.lift_x(x)[0]
            except NoRationalPoint:
                continue
            index_of[x.bits] = len(points)
            points.append(canonical)
        logger.info(f"factor base: {len(points)} points from |V| = {V.size}")
        return cls(curve, V, points, index_of)

    @property
    def H(self) -> Point:
        return self.curve.order2_points()[0]

    def __len__(self) -> int:
        return len(self.points)

    @property
    def width(self) -> int:
        """Factor-base columns plus the order-2 column."""
        return len(self.points) + 1


@dataclass
class Relation:
    """sum coeffs[i]*F_i + h2*H + u*P + v*Q = infinity."""
    coeffs: Dict[int, int]
    h2: int
    u: int
    v: int
    t: int
    xs: Tuple[int, ...] = ()

    def point_sum(self, sub: SubgroupCtx, fb: FactorBase) -> Point:
        curve = sub.curve
        total = curve.add(curve.mul(self.u, sub.P), curve.mul(self.v, sub.Q))
        for i, c in self.coeffs.items():
            total = curve.add(total, curve.mul(c, fb.points[i]))
        if self.h2 & 1:
            total = curve.add(total, fb.H)
        return total


def verify_relation(sub: SubgroupCtx, fb: FactorBase, rel: Relation) -> bool:
    return rel.point_sum(sub, fb).is_infinity


@dataclass
class TrialPoint:
    u: int
    v: int
    R: Point

    def direct_log(self, r: int) -> Optional[int]:
        """For R = infinity, u + v*z = 0 mod r gives z when v is invertible."""
        if not self.R.is_infinity or self.v % r == 0:
            return None
        return (-self.u * pow(self.v, -1, r)) % r


def random_R(sub: SubgroupCtx, rng: random.Random) -> TrialPoint:
    u = rng.randrange(sub.r)
    v = rng.randrange(sub.r)
    R = sub.curve.add(sub.curve.mul(u, sub.P), sub.curve.mul(v, sub.Q))
    return TrialPoint(u, v, R)


def point_relation(sub: SubgroupCtx, fb: FactorBase, trial: TrialPoint) -> Relation:
    """R_X in V: R itself is +-F or H, a relation with t = 1."""
    R = trial.R
    if R.x.is_zero():
        rel = Relation({}, 1, trial.u, trial.v, 1, (0,))
    else:
        i = fb.index_of[R.x.bits]
        sign = -1 if R == fb.points[i] else 1
        rel = Relation({i: sign}, 0, trial.u, trial.v, 1, (R.x.bits,))
    if not verify_relation(sub, fb, rel):
        raise LiftMismatch(f"single-point relation for R = {R} does not close")
    return rel


# ---------------------------------------------------------------------------
# Lifting solver solutions to points
# ---------------------------------------------------------------------------

def _lifts(curve: BinaryCurve, x: FieldElement) -> List[Point]:
    return curve.lift_x(x, allow_ext=True)


def lift_combination(curve: BinaryCurve, xs: Sequence[FieldElement], R: Point) -> List[Point]:
    """
    Points (x_i, y_i), y_i possibly in F_{q^2}, with sum + R = infinity.
    The last sign is read off the partial sum instead of being searched.
    """
    options = [_lifts(curve, x) for x in xs]
    for head in product(*options[:-1]):
        partial = curve.add(curve.sum(head), R)
        needed = curve.neg(partial)
        for last in options[-1]:
            if last == needed:
                return list(head) + [last]
    raise LiftMismatch(f"no lift of x = {[x.bits for x in xs]} closes against R")


def relation_from_solution(sub: SubgroupCtx, fb: FactorBase, trial: TrialPoint,
                           xs: Sequence[FieldElement]) -> Relation:
    curve = sub.curve
    chosen = lift_combination(curve, xs, trial.R)
    coeffs: Dict[int, int] = {}
    h2 = 0
    conjugate: List[Point] = []
    for P in chosen:
        if P.x.is_zero():
            h2 += 1
        elif not P.is_rational:
            conjugate.append(P)
        else:
            i = fb.index_of[P.x.bits]
            coeffs[i] = coeffs.get(i, 0) + (1 if P == fb.points[i] else -1)

    if conjugate:
        subsum = curve.sum(conjugate)
        # conj(S) = -S and S is rational, so S has order dividing 2
        if len(conjugate) == 1 or not (subsum.is_infinity or subsum == fb.H):
            raise LiftMismatch(f"{len(conjugate)} conjugate lifts sum to {subsum}")
        if not subsum.is_infinity:
            h2 += 1
        logger.debug(f"{len(conjugate)} conjugate lifts grouped into {subsum}")

    rel = Relation({i: c for i, c in coeffs.items() if c}, h2 % 2, trial.u, trial.v, len(xs),
                   tuple(x.bits for x in xs))
    if not verify_relation(sub, fb, rel):
        raise LiftMismatch(f"relation for xs = {rel.xs} fails the point identity")
    return rel


# ---------------------------------------------------------------------------
# Decomposition attempts
# ---------------------------------------------------------------------------

@dataclass
class DecompositionResult:
    relations: List[Relation]
    outcome: SolveOutcome
    system: BoolSystem
    solutions: List[Tuple[FieldElement, ...]] = field(default_factory=list)


def solve_system(curve: BinaryCurve, R_X: FieldElement, t: int, V: SubspaceV,
                 solver: Callable = xl_solve, d_cap: Optional[int] = None):
    """Build, descend and solve the decomposition system for one R_X."""
    equations, system = descend(curve, R_X, t, V)
    outcome = solver(system, d_cap=d_cap)
    if outcome.status is SolveStatus.DEGREE_CAP_EXCEEDED:
        raise AssumptionViolation(f"t={t} system for R_X={R_X.bits:#x} unresolved below the degree cap",
                                  system, outcome)
    solutions = []
    for assignment in outcome.solutions:
        values = system.decode(assignment)
        for eq in equations:
            if not eq.evaluate(values).is_zero():
                raise LiftMismatch(f"solution {assignment:#x} fails {eq.describe()}")
        solutions.append(tuple(values[f"x{i}"] for i in range(1, t + 1)))
    return equations, system, outcome, solutions


def try_decompose(sub: SubgroupCtx, fb: FactorBase, trial: TrialPoint, t: int, V: SubspaceV,
                  solver: Callable = xl_solve, d_cap: Optional[int] = None) -> DecompositionResult:
    R = trial.R
    if R.is_infinity or V.contains(R.x):
        raise ValueError("try_decompose needs an affine R with R_X outside V")
    _, system, outcome, solutions = solve_system(sub.curve, R.x, t, V, solver, d_cap)
    if not solutions:
        raise NoDecomposition(f"t={t} system for R_X={R.x.bits:#x} is inconsistent", outcome)
    relations, seen = [], set()
    for xs in solutions:
        key = tuple(sorted(x.bits for x in xs))
        if key not in seen:
            seen.add(key)
            relations.append(relation_from_solution(sub, fb, trial, xs))
    logger.debug(f"R_X={R.x.bits:#x} t={t}: {len(relations)} relations")
    return DecompositionResult(relations, outcome, system, solutions)


@dataclass
class OracleResult:
    satisfiable: bool
    witnesses: List[Tuple[int, ...]]
    checked: int


def oracle_decompose(curve: BinaryCurve, R_X: FieldElement, t: int, V: SubspaceV) -> OracleResult:
    """Evaluate S_{t+1}(x_1..x_t, R_X) over all unordered tuples from V."""
    from math import comb

    count = comb(V.size + t - 1, t)
    limit = config.get("decompose.oracle_max_tuples", 1 << 20)
    if count > limit:
        raise TooLarge(f"{count} tuples exceed the oracle limit of {limit}")
    poly = s3(curve) if t == 2 else s_m(curve, t + 1)
    elements = V.elements()
    witnesses = []
    for combo in combinations_with_replacement(range(V.size), t):
        args = [elements[i] for i in combo] + [R_X]
        if poly.eval(args).is_zero():
            witnesses.append(tuple(sorted(elements[i].bits for i in combo)))
    return OracleResult(bool(witnesses), witnesses, count)


# ---------------------------------------------------------------------------
# Collection
# ---------------------------------------------------------------------------

@dataclass
class TrialOutcome:
    index: int
    kind: str
    relations: List[Relation] = field(default_factory=list)
    direct_log: Optional[int] = None
    t_used: int = 0
    d_max: int = 0
    seconds: float = 0.0
    error: Optional[str] = None
    counterexample: Optional[dict] = None


def counterexample_payload(exc: AssumptionViolation, **context) -> dict:
    """JSON-ready record of a system the solver could not settle below the cap."""
    payload = {"context": context, "message": str(exc)}
    if exc.outcome is not None:
        payload["status"] = exc.outcome.status.value
        payload["d_max"] = exc.outcome.telemetry.d_max
        payload["telemetry"] = exc.outcome.telemetry.lines()
    if exc.system is not None:
        payload["nvars"] = exc.system.nvars
        payload["system"] = exc.system.to_text().splitlines()
    return payload


def run_trial(sub: SubgroupCtx, fb: FactorBase, m: int, V: SubspaceV, schedule: str,
              seed: int, index: int, d_cap: Optional[int] = None) -> TrialOutcome:
    start = time.perf_counter()
    trial = random_R(sub, trial_rng(seed, index))
    if trial.R.is_infinity:
        return TrialOutcome(index, "infinity", direct_log=trial.direct_log(sub.r))
    if V.contains(trial.R.x):
        return TrialOutcome(index, "in-V", [point_relation(sub, fb, trial)], t_used=1)

    ts = [m] if schedule == "t=m" else list(range(2, m + 1))
    d_max = 0
    for t in ts:
        try:
            result = try_decompose(sub, fb, trial, t, V, d_cap=d_cap)
        except NoDecomposition as exc:
            d_max = max(d_max, exc.outcome.telemetry.d_max if exc.outcome else 0)
            continue
        except AssumptionViolation as exc:
            return TrialOutcome(index, "cap-exceeded", t_used=t, error=str(exc),
                                seconds=time.perf_counter() - start,
                                counterexample=counterexample_payload(exc, R_X=trial.R.x.bits, t=t, m=m))
        d_max = max(d_max, result.outcome.telemetry.d_max)
        return TrialOutcome(index, "solved", result.relations, t_used=t, d_max=d_max,
                            seconds=time.perf_counter() - start)
    return TrialOutcome(index, "failed", d_max=d_max, seconds=time.perf_counter() - start)


def _run_trial_args(args) -> TrialOutcome:
    try:
        return run_trial(*args)
    except SumPolyError as exc:
        return TrialOutcome(args[6], "error", error=f"{type(exc).__name__}: {exc}")


@dataclass
class CollectResult:
    relations: List[Relation]
    trials: int
    successes: int
    direct_log: Optional[int] = None
    outcomes: List[TrialOutcome] = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0


def collect(sub: SubgroupCtx, fb: FactorBase, m: int, V: SubspaceV, target_count: int,
            schedule: str = "t=m", seed: int = 0, workers: int = 1,
            max_trials: Optional[int] = None, d_cap: Optional[int] = None,
            on_outcome: Optional[Callable[[TrialOutcome], None]] = None) -> CollectResult:
    """
    Run trials in index order until target_count verified relations are in
    hand. Batches run in parallel but are merged in trial order, so the
    result depends only on the seed.
    """
    if schedule not in SCHEDULES:
        raise ValueError(f"schedule must be one of {SCHEDULES}, got {schedule!r}")
    max_trials = max_trials or config.get("decompose.max_trials", 20000)
    result = CollectResult([], 0, 0)
    queue = TrialQueue()
    batch = max(1, workers) * 4
    next_index = 0

    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while len(result.relations) < target_count:
            if next_index >= max_trials:
                raise BudgetExhausted(
                    f"{len(result.relations)} of {target_count} relations after {max_trials} trials")
            indices = range(next_index, min(next_index + batch, max_trials))
            args = [(sub, fb, m, V, schedule, seed, i, d_cap) for i in indices]
            outcomes = executor.map(_run_trial_args, args) if executor else map(_run_trial_args, args)
            for outcome in outcomes:
                queue.push(outcome.index, outcome)
            next_index = indices.stop

            for outcome in queue.drain():
                if len(result.relations) >= target_count:
                    break
                result.trials += 1
                result.outcomes.append(outcome)
                if on_outcome:
                    on_outcome(outcome)
                if outcome.kind == "error":
                    logger.warning(f"trial {outcome.index} failed: {outcome.error}")
                if outcome.direct_log is not None and result.direct_log is None:
                    logger.info(f"trial {outcome.index} hit R = infinity; logarithm read off directly")
                    result.direct_log = outcome.direct_log
                if outcome.relations:
                    result.successes += 1
                    result.relations.extend(outcome.relations)
    finally:
        if executor:
            executor.shutdown()

    logger.info(f"collected {len(result.relations)} relations in {result.trials} trials "
                f"(success rate {result.success_rate:.3f})")
    return result


@dataclass
class PairedTrial:
    index: int
    single: bool
    escalated: bool
    t_escalated: int


def compare_schedules(sub: SubgroupCtx, fb: FactorBase, m: int, V: SubspaceV,
                      trials: int, seed: int = 0) -> List[PairedTrial]:
    """Run both schedules on the same R stream."""
    pairs = []
    for i in range(trials):
        single = run_trial(sub, fb, m, V, "t=m", seed, i)
        escalated = run_trial(sub, fb, m, V, "escalate", seed, i)
        pairs.append(PairedTrial(i, bool(single.relations), bool(escalated.relations), escalated.t_used))
    return pairs
