"""Command-line experiment harness.

    asyncevo run --config experiment.json
    asyncevo sweep --domain sorting --M 2,10,50,250,1000 --K 1000 --L 1 --R 32 \
        --repeats 10 --seed 42 --out results/
    asyncevo compare fast/records.csv slow/records.csv
    asyncevo histogram results/trace_sorting_K1000_M10_seed42.csv --out results/

Exit codes: 0 success, 2 configuration error, 3 comparison error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..core import ConfigurationError
from .experiment import ExperimentSpec, GridPoint, StopRule, load_records_csv, run_experiment
from .histograms import TraceParseError, export_histograms
from .stats import ComparisonError, compare_runs

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPARISON = 3


def _parse_delay(text: str) -> dict:
    kind, _, rest = text.partition(":")
    values = [float(v) for v in rest.split(",") if v] if rest else []
    if kind == "constant":
        return {"kind": "constant", "duration": values[0] if values else 1.0}
    if kind == "linear":
        return {"kind": "linear", "time_per_unit": values[0] if values else 1.0}
    if kind == "gaussian":
        keys = ["mean_intercept", "mean_slope", "std_intercept", "std_slope", "floor"]
        out = {"kind": "gaussian"}
        out.update({k: v for k, v in zip(keys, values)})
        return out
    raise ConfigurationError(f"unknown delay model {text!r} (constant:|linear:|gaussian:)")


def _cmd_run(args) -> int:
    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    spec = ExperimentSpec.from_dict(raw)
    records = run_experiment(spec)
    converged = sum(1 for r in records if r.converged_time is not None)
    print(f"{len(records)} runs completed ({converged} converged); records in {spec.output_dir}/records.csv")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    ms = [int(v) for v in args.M.split(",") if v]
    if not ms:
        raise ConfigurationError("--M needs at least one value")
    spec = ExperimentSpec(
        domain=args.domain,
        grid=[GridPoint(K=args.K, M=m, L=args.L, R=args.R) for m in ms],
        repeats=args.repeats,
        seed_base=args.seed,
        stop=StopRule(max_generations=args.max_generations, on_solution=not args.no_stop_on_solution),
        output_dir=Path(args.out),
        delay_model=_parse_delay(args.delay) if args.delay else None,
        crossover_rate=args.crossover_rate,
        mutation_rate=args.mutation_rate,
        record_traces=args.traces,
        processes=args.processes,
    )
    records = run_experiment(spec)
    converged = sum(1 for r in records if r.converged_time is not None)
    print(f"{len(records)} runs completed ({converged} converged); records in {spec.output_dir}/records.csv")
    return EXIT_OK


def _cmd_compare(args) -> int:
    group_a = [r["converged_time"] for r in load_records_csv(args.csv_a)]
    group_b = [r["converged_time"] for r in load_records_csv(args.csv_b)]
    result = compare_runs(group_a, group_b)
    print(json.dumps(result.to_dict(), indent=2))
    return EXIT_OK


def _cmd_histogram(args) -> int:
    return_path, delay_path = export_histograms(args.trace, args.out)
    print(f"wrote {return_path} and {delay_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asyncevo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a batch-size sweep")
    p_sweep.add_argument("--domain", required=True, choices=["sorting", "mux", "cdn"])
    p_sweep.add_argument("--M", required=True, help="comma-separated batch sizes")
    p_sweep.add_argument("--K", type=int, required=True)
    p_sweep.add_argument("--L", type=int, required=True)
    p_sweep.add_argument("--R", type=int, required=True)
    p_sweep.add_argument("--repeats", type=int, default=10)
    p_sweep.add_argument("--seed", type=int, default=42)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--delay", default=None, help="constant:T | linear:T | gaussian:mi,ms,si,ss,floor")
    p_sweep.add_argument("--max-generations", type=int, default=1_000_000)
    p_sweep.add_argument("--no-stop-on-solution", action="store_true")
    p_sweep.add_argument("--crossover-rate", type=float, default=None)
    p_sweep.add_argument("--mutation-rate", type=float, default=None)
    p_sweep.add_argument("--traces", action="store_true", help="write per-run event traces")
    p_sweep.add_argument("--processes", type=int, default=1)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_cmp = sub.add_parser("compare", help="compare converged times of two record CSVs")
    p_cmp.add_argument("csv_a")
    p_cmp.add_argument("csv_b")
    p_cmp.set_defaults(func=_cmd_compare)

    p_hist = sub.add_parser("histogram", help="export return-time/queue-delay CSVs from a trace")
    p_hist.add_argument("trace")
    p_hist.add_argument("--out", default=".")
    p_hist.set_defaults(func=_cmd_histogram)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TraceParseError as exc:
        print(f"trace error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ComparisonError as exc:
        print(f"comparison error: {exc}", file=sys.stderr)
        return EXIT_COMPARISON
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
