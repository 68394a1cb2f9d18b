"""
Drivers behind the command-line subcommands. Each run prints progress with
banners, ends with a summary block and, for `experiment` and `solve`, the
validation matrix.
"""
import logging
import random
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from math import ceil
from pathlib import Path
from typing import List, Optional, Union

from app.algebra.descent import SubspaceV
from app.algebra.sumpoly import MultiPoly, s_m, term_listing
from app.analysis.complexity import (
    CostModel,
    asymptotic_constant,
    crossover,
    format_sci,
    pollard_cost,
    probability,
    table3,
    truncate,
)
from app.arithmetic.curve import BinaryCurve, SubgroupCtx, make_instance
from app.arithmetic.field import BinaryFieldCtx, FieldElement, random_irreducible
from app.config import config
from app.errors import AssumptionViolation, ConfigError, InvariantViolation, SumPolyError
from app.index_calculus.decompose import (
    FactorBase,
    collect,
    counterexample_payload,
    solve_system,
    trial_rng,
)
from app.index_calculus.linalg import RelationMatrix, solve_log
from app.index_calculus.pollard import rho_solve_parallel
from app.input.config_file import ExperimentConfig
from app.input.instance_format import load_instance
from app.orchestration.error_handler import TrialErrorHandler
from app.orchestration.trial_queue import TrialQueue
from app.output.relation_log import read_relation_log, write_relation_log
from app.output.report_writer import ExperimentRow, experiment_csv, save_report, table3_csv
from app.validation.pipeline_validators import RunReport
from app.validation.validation_controller import ValidationController

logger = logging.getLogger(__name__)


def print_header(title: str):
    print("\n" + "=" * 50)
    print(title)
    print("=" * 50)


def print_validation(report: dict):
    print("Validation Matrix:")
    for row in report["matrix"]:
        status = "PASS" if row["passed"] else "FAIL"
        print(f"  {row['validator']}: {status} - {row['details']}")
    print(f" Validation mode: {'Strict' if report['strict_mode'] else 'Lenient'}")


# ---------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------

@dataclass
class ExperimentTrial:
    index: int
    R_X: int
    kind: str
    d_max: int = 0
    solutions: int = 0
    seconds: float = 0.0
    peak_cells: int = 0
    telemetry: List[str] = field(default_factory=list)
    error: Optional[str] = None
    counterexample: Optional[dict] = None

    @property
    def satisfiable(self) -> bool:
        return self.kind in ("satisfiable", "in-V")


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    row: ExperimentRow
    trials: List[ExperimentTrial]
    handler: TrialErrorHandler
    validation: dict

    @property
    def successes(self) -> int:
        return sum(1 for trial in self.trials if trial.satisfiable)


def experiment_curve(cfg: ExperimentConfig) -> BinaryCurve:
    f = random_irreducible(cfg.n, random.Random(cfg.seed)) if cfg.f_mode == "random" else None
    return make_instance(cfg.n, cfg.b_mode, cfg.seed, f).curve


def experiment_subspace(cfg: ExperimentConfig, ctx: BinaryFieldCtx) -> SubspaceV:
    return SubspaceV.build(ctx, cfg.k, cfg.v_mode, random.Random(cfg.seed + 1))


def random_R_X(ctx: BinaryFieldCtx, rng: random.Random) -> FieldElement:
    """A uniform element of F_{2^n}, standing in for the x-coordinate of a random point."""
    return ctx.random_element(rng)


def run_experiment_trial(curve: BinaryCurve, V: SubspaceV, t: int, seed: int, index: int,
                         d_cap: Optional[int] = None) -> ExperimentTrial:
    R_X = random_R_X(curve.ctx, trial_rng(seed, index))
    if V.contains(R_X):
        # R_X in V decomposes trivially, with t = 1
        return ExperimentTrial(index, R_X.bits, "in-V")
    start = time.perf_counter()
    try:
        _, _, outcome, solutions = solve_system(curve, R_X, t, V, d_cap=d_cap)
    except AssumptionViolation as exc:
        telemetry = exc.outcome.telemetry if exc.outcome else None
        return ExperimentTrial(index, R_X.bits, "cap-exceeded",
                               d_max=telemetry.d_max if telemetry else 0,
                               seconds=time.perf_counter() - start,
                               telemetry=telemetry.lines() if telemetry else [],
                               error=str(exc),
                               counterexample=counterexample_payload(exc, n=curve.ctx.n, R_X=R_X.bits, t=t))
    telemetry = outcome.telemetry
    return ExperimentTrial(
        index,
        R_X.bits,
        "satisfiable" if solutions else "inconsistent",
        d_max=telemetry.d_max,
        solutions=len(solutions),
        seconds=time.perf_counter() - start,
        peak_cells=max((rows * cols for rows, cols in telemetry.matrix_dims), default=0),
        telemetry=telemetry.lines(),
    )


def _experiment_trial_args(args) -> ExperimentTrial:
    try:
        return run_experiment_trial(*args)
    except SumPolyError as exc:
        return ExperimentTrial(args[4], 0, "error", error=f"{type(exc).__name__}: {exc}")


def map_trials(args: List[tuple], workers: int) -> List[ExperimentTrial]:
    """Run trials, in parallel when asked, and return them in trial order."""
    queue = TrialQueue()
    ordered: List[ExperimentTrial] = []
    if workers <= 1:
        for item in args:
            queue.push(item[4], _experiment_trial_args(item))
            ordered.extend(queue.drain())
        return ordered
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_experiment_trial_args, item) for item in args]
        for future in as_completed(futures):
            trial = future.result()
            queue.push(trial.index, trial)
            ordered.extend(queue.drain())
    return ordered


def run_experiment(cfg: ExperimentConfig, out: Optional[Union[str, Path]] = None,
                   include_timing: bool = False, strict_mode: Optional[bool] = None) -> ExperimentResult:
    print_header(f"Experiment n={cfg.n} m={cfg.m} t={cfg.t} k={cfg.k} B={cfg.b_mode} trials={cfg.trials}")
    curve = experiment_curve(cfg)
    V = experiment_subspace(cfg, curve.ctx)
    print(f"Curve: {curve}")
    print(f"Subspace V: dimension {V.k} ({V.mode})")

    args = [(curve, V, cfg.t, cfg.seed, i, cfg.d_cap) for i in range(cfg.trials)]
    handler = TrialErrorHandler()
    trials = map_trials(args, cfg.workers)
    for trial in trials:
        handler(trial)

    successes = sum(1 for trial in trials if trial.satisfiable)
    expected = truncate(probability(cfg.n, cfg.m, cfg.t, cfg.k))
    avg_seconds = sum(trial.seconds for trial in trials) / len(trials)
    peak_cells = max((trial.peak_cells for trial in trials), default=0)
    row = ExperimentRow(
        n=cfg.n,
        m=cfg.m,
        t=cfg.t,
        k=cfg.k,
        exp_prob=f"{successes / len(trials):.2f}",
        P=f"{expected:.4f}",
        d_max=max((trial.d_max for trial in trials), default=0),
        avg_seconds=f"{avg_seconds:.3f}",
        # dense GF(2) matrix estimate, one bit per cell
        memory_mb=f"{peak_cells / 8 / 2 ** 20:.1f}",
    )

    report = RunReport(
        d_max=[trial.d_max for trial in trials if trial.kind != "error"],
        d_cap=cfg.d_cap,
        cap_exceeded=handler.cap_exceeded,
        successes=successes,
        trials=len(trials),
        probability=expected,
    )
    validation = ValidationController(strict_mode=strict_mode).run_all(report)

    print_header("EXPERIMENT SUMMARY")
    print(f"Trials: {len(trials)}")
    print(f"Satisfiable: {successes} ({row.exp_prob} vs P={row.P})")
    print(f"d_max: {row.d_max}")
    for line in handler.summary_lines():
        print(line)
    print_validation(validation)

    csv_text = experiment_csv([row], include_timing=include_timing)
    if out:
        save_report(csv_text, out)
    else:
        print(csv_text, end="")
    return ExperimentResult(cfg, row, trials, handler, validation)


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

@dataclass
class SolveResult:
    sub: SubgroupCtx
    fb: FactorBase
    z: int
    z_rho: Optional[int]
    relations: list
    trials: int
    validation: dict


def run_solve(n: Optional[int] = None, seed: int = 0, m: Optional[int] = None, k: Optional[int] = None,
              b_mode: str = "one", schedule: str = "t=m", v_mode: str = "low-degree",
              check_pollard: bool = True, instance: Optional[Union[str, Path]] = None,
              workers: Optional[int] = None, d_cap: Optional[int] = None,
              relation_log: Optional[Union[str, Path]] = None,
              matrix_out: Optional[Union[str, Path]] = None,
              replay: Optional[Union[str, Path]] = None,
              strict_mode: Optional[bool] = None) -> SolveResult:
    workers = workers or config.get("experiment.workers", 1)
    sub = load_instance(instance) if instance else make_instance(n, b_mode, seed)
    curve = sub.curve
    n = curve.ctx.n
    m = m or config.get("decompose.default_m", 3)
    if not 2 <= m < n:
        raise ConfigError(f"need 2 <= m < n, got m={m}, n={n}")
    k = k or ceil(n / m)

    print_header(f"Solve n={n} m={m} k={k} schedule={schedule}")
    print(f"Curve: {curve}")
    print(f"#E = {sub.N}, r = {sub.r}, cofactor = {sub.cofactor}")

    V = SubspaceV.build(curve.ctx, k, v_mode, random.Random(seed + 1))
    fb = FactorBase.build(curve, V)
    target = fb.width + config.get("decompose.margin", 10)
    print(f"Factor base: {len(fb)} points, collecting {target} relations")

    handler = TrialErrorHandler()
    direct_log = None
    d_maxes: List[int] = []
    trials = 0
    if replay:
        relations = read_relation_log(Path(replay).read_text(encoding="utf-8"), sub, fb)
    else:
        collected = collect(sub, fb, m, V, target, schedule=schedule, seed=seed, workers=workers,
                            d_cap=d_cap, on_outcome=handler)
        relations = collected.relations
        direct_log = collected.direct_log
        trials = collected.trials
        d_maxes = [o.d_max for o in collected.outcomes if o.kind in ("solved", "failed")]
        print(f"Relations: {len(relations)} from {trials} trials "
              f"(success rate {collected.success_rate:.3f})")

    if relation_log:
        save_report(write_relation_log(relations), relation_log)
    if matrix_out:
        save_report(RelationMatrix.build(relations, fb, sub.N).dump(), matrix_out)

    if direct_log is not None:
        z = direct_log
    else:
        z = solve_log(sub, fb, relations, random.Random(seed))
    print(f"Index calculus: z = {z}")

    z_rho = None
    if check_pollard:
        seeds = [seed * 7919 + i for i in range(max(1, workers))]
        z_rho = rho_solve_parallel(sub, seeds, workers)
        print(f"Pollard rho: z = {z_rho}")

    if curve.mul(z, sub.P) != sub.Q:
        raise InvariantViolation(f"z = {z} does not satisfy zP = Q")

    report = RunReport(
        sub=sub,
        fb=fb,
        relations=relations,
        z_index=z,
        z_rho=z_rho,
        d_max=d_maxes,
        d_cap=d_cap or config.get("solver.d_cap", 4),
        cap_exceeded=handler.cap_exceeded,
    )
    validation = ValidationController(strict_mode=strict_mode).run_all(report)

    print_header("PIPELINE SUMMARY")
    print(f"z = {z}" + (f" (planted {sub.z_true})" if sub.z_true is not None else ""))
    for line in handler.summary_lines():
        print(line)
    print_validation(validation)
    if not validation["overall_passed"]:
        raise InvariantViolation("end-of-run validation failed")
    return SolveResult(sub, fb, z, z_rho, relations, trials, validation)


# ---------------------------------------------------------------------------
# table3, sumpoly, bench
# ---------------------------------------------------------------------------

def run_table3(omega: float = 3.0, variant: str = "block", char: int = 2,
               out: Optional[Union[str, Path]] = None) -> str:
    model = CostModel(omega=omega, variant=variant)
    csv_text = table3_csv(table3(model))
    if out:
        save_report(csv_text, out)
    else:
        print(csv_text, end="")

    n_cross = crossover(model)
    print_header("COST SUMMARY")
    if n_cross is None:
        print("No crossover in the scanned range")
    else:
        print(f"First n beating Pollard rho: {n_cross} (2^(n/2) = {format_sci(pollard_cost(n_cross))})")
    print(f"Asymptotic constant c = {asymptotic_constant(2):.4f}")
    if char != 2:
        # no pipeline behind odd characteristic; the constant is shown for comparison only
        print(f"Odd characteristic p={char}: c = {asymptotic_constant(char):.4f} (display only)")
    return csv_text


def sumpoly_curve(n: int, b_mode: str = "one", seed: int = 0) -> BinaryCurve:
    """S_m over a binary field does not involve A, so A = 0 here."""
    ctx = BinaryFieldCtx.default(n)
    B = FieldElement(ctx, 1) if b_mode == "one" else ctx.random_nonzero(random.Random(seed))
    return BinaryCurve(ctx, FieldElement(ctx, 0), B)


def run_sumpoly(m: int, b_mode: str = "one", n: int = 13, seed: int = 0,
                out: Optional[Union[str, Path]] = None, limit: Optional[int] = None) -> MultiPoly:
    curve = sumpoly_curve(n, b_mode, seed)
    print_header(f"S_{m} over {curve}")
    poly = s_m(curve, m)
    degrees = [poly.degree(v) for v in poly.vars]
    print(f"Terms: {len(poly)}")
    print(f"Degree per variable: {degrees}")
    print(f"Total degree: {poly.total_degree()}")

    lines = list(term_listing(poly))
    if out:
        save_report("\n".join(lines) + "\n", out)
    else:
        for line in lines[:limit] if limit else lines:
            print(line)
    return poly


def run_bench(cfg: ExperimentConfig, systems: int = 5) -> List[ExperimentTrial]:
    curve = experiment_curve(cfg)
    V = experiment_subspace(cfg, curve.ctx)
    print_header(f"Bench n={cfg.n} m={cfg.m} t={cfg.t} k={cfg.k}")
    results = []
    for i in range(systems):
        trial = _experiment_trial_args((curve, V, cfg.t, cfg.seed, i, cfg.d_cap))
        results.append(trial)
        print(f"\nSystem {i + 1}/{systems}: R_X={trial.R_X:#x} {trial.kind} "
              f"d_max={trial.d_max} {trial.seconds:.3f}s")
        for line in trial.telemetry:
            print(f"  {line}")
    total = sum(trial.seconds for trial in results)
    print_header("BENCH SUMMARY")
    print(f"Systems: {systems}")
    print(f"Average seconds per solve: {total / systems:.3f}" if systems else "No systems solved")
    return results
