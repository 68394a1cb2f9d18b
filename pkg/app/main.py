import argparse
import sys
from pathlib import Path

# Add the parent directory to Python path so we can import from app
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.config import configure_logging
from app.errors import SumPolyError
from app.input.config_file import ExperimentConfig, load_experiment_config
from app.orchestration.pipeline_controller import run_bench, run_experiment, run_solve, run_sumpoly, run_table3

EXPERIMENT_KEYS = ("n", "m", "t", "k", "b_mode", "trials", "seed", "d_cap", "schedule", "v_mode", "f_mode", "workers")


def _add_experiment_options(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="flat `key = value` experiment file")
    parser.add_argument("--n", type=int)
    parser.add_argument("--m", type=int)
    parser.add_argument("--t", type=int)
    parser.add_argument("--k", type=int)
    parser.add_argument("--B", dest="b_mode", choices=("one", "random"))
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--d-cap", dest="d_cap", type=int)
    parser.add_argument("--schedule", choices=("t=m", "escalate"))
    parser.add_argument("--V-mode", dest="v_mode", choices=("low-degree", "random"))
    parser.add_argument("--f-mode", dest="f_mode", choices=("default", "random"))
    parser.add_argument("--workers", type=int)


def experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {key: getattr(args, key, None) for key in EXPERIMENT_KEYS}
    if args.config:
        return load_experiment_config(args.config, **overrides)
    return ExperimentConfig.from_mapping({k: v for k, v in overrides.items() if v is not None})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sumpoly",
        description="Index-calculus discrete logarithms on binary elliptic curves via summation polynomials",
    )
    parser.add_argument("--log-level", help="override logging.level from config.json")
    sub = parser.add_subparsers(dest="command", required=True)

    exp = sub.add_parser("experiment", help="satisfiability rate and d_max of descended systems")
    _add_experiment_options(exp)
    exp.add_argument("--out", help="CSV output path")
    exp.add_argument("--timing", action="store_true", help="include timing and memory columns")
    exp.add_argument("--lenient", action="store_true", help="statistical checks only warn")

    solve = sub.add_parser("solve", help="full discrete-log pipeline on one instance")
    solve.add_argument("--n", type=int)
    solve.add_argument("--m", type=int)
    solve.add_argument("--k", type=int)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--B", dest="b_mode", choices=("one", "random"), default="one")
    solve.add_argument("--schedule", choices=("t=m", "escalate"), default="t=m")
    solve.add_argument("--V-mode", dest="v_mode", choices=("low-degree", "random"), default="low-degree")
    solve.add_argument("--d-cap", dest="d_cap", type=int)
    solve.add_argument("--workers", type=int)
    solve.add_argument("--instance", help="instance file instead of a generated curve")
    solve.add_argument("--check-pollard", dest="check_pollard", action="store_true", default=True)
    solve.add_argument("--no-check-pollard", dest="check_pollard", action="store_false")
    solve.add_argument("--relation-log", help="write collected relations here")
    solve.add_argument("--replay", help="read relations from a log instead of collecting")
    solve.add_argument("--matrix-out", help="write the relation matrix in coordinate form")

    t3 = sub.add_parser("table3", help="asymptotic cost table and Pollard crossover")
    t3.add_argument("--omega", type=float, default=3.0)
    t3.add_argument("--variant", choices=("block", "default-f4"), default="block")
    t3.add_argument("--char", type=int, default=2, help="odd p only changes the displayed constant")
    t3.add_argument("--out")

    sp = sub.add_parser("sumpoly", help="print a summation polynomial")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--B", dest="b_mode", choices=("one", "random"), default="one")
    sp.add_argument("--n", type=int, default=13)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--limit", type=int, help="print only the first terms")
    sp.add_argument("--out")

    bench = sub.add_parser("bench", help="solve a few descended systems and print solver telemetry")
    _add_experiment_options(bench)
    bench.add_argument("--systems", type=int, default=5)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        if args.command == "experiment":
            result = run_experiment(experiment_config(args), out=args.out, include_timing=args.timing,
                                    strict_mode=False if args.lenient else None)
            return 0 if result.validation["overall_passed"] else 1
        if args.command == "solve":
            if args.n is None and args.instance is None:
                print("Pipeline error: solve needs --n or --instance")
                return 2
            run_solve(n=args.n, seed=args.seed, m=args.m, k=args.k, b_mode=args.b_mode,
                      schedule=args.schedule, v_mode=args.v_mode, check_pollard=args.check_pollard,
                      instance=args.instance, workers=args.workers, d_cap=args.d_cap,
                      relation_log=args.relation_log, matrix_out=args.matrix_out, replay=args.replay)
        elif args.command == "table3":
            run_table3(omega=args.omega, variant=args.variant, char=args.char, out=args.out)
        elif args.command == "sumpoly":
            run_sumpoly(args.m, args.b_mode, args.n, args.seed, out=args.out, limit=args.limit)
        elif args.command == "bench":
            run_bench(experiment_config(args), systems=args.systems)
        return 0
    except KeyboardInterrupt:
        print("\nPipeline interrupted by user")
        return 130
    except (SumPolyError, ValueError) as e:
        print(f"\nPipeline error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
