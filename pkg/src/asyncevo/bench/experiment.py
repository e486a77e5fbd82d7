"""Experiment harness: grids of seeded runs with CSV export.

A spec names a domain, a grid of (K, M, L, R) points, a delay model, a repeat
count, and a stop rule; every grid point runs `repeats` times with seeds
seed_base + repeat index (matched across grid points so distribution shapes
can be compared seed by seed). Runs execute on the deterministic virtual-time
executor, optionally in parallel processes; results land in one records CSV.
"""
from __future__ import annotations

import concurrent.futures
import csv
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..codeepneat import CdnConfig, CdnRunner
from ..codeepneat.surrogate import SurrogateDomain
from ..core import ConfigurationError
from ..domains.multiplexer import MultiplexerDomain
from ..domains.sorting import SortingDomain
from ..engine import AesConfig, Engine
from ..scheduler import (
    DelayModel,
    GenerationGaussianDelay,
    LinearInSizeDelay,
    VirtualClusterExecutor,
    delay_model_from_dict,
    write_trace,
)

RECORDS_HEADER = ["domain", "K", "M", "L", "R", "seed", "converged_time", "generations", "best_fitness", "utilization"]

CDN_GEN_HEADER = [
    "generation",
    "virtual_time",
    "batch_best",
    "batch_mean",
    "best_so_far",
    "mean_node_count",
    "blueprint_species",
    "module_species",
]

# Per-domain defaults: delay model and variation rates used unless the spec overrides.
DOMAIN_DEFAULTS = {
    "sorting": {"delay": {"kind": "linear", "time_per_unit": 1.0}, "crossover_rate": 0.7, "mutation_rate": 1.0},
    "mux": {
        "delay": {
            "kind": "gaussian",
            "mean_intercept": 60.0,
            "mean_slope": 2.0,
            "std_intercept": 10.0,
            "std_slope": 0.5,
            "floor": 1.0,
        },
        "crossover_rate": 0.7,
        "mutation_rate": 1.0,
    },
    "cdn": {"delay": {"kind": "linear", "time_per_unit": 1.0}},
}


@dataclass(frozen=True)
class GridPoint:
    K: int
    M: int
    L: int
    R: int


@dataclass(frozen=True)
class StopRule:
    max_generations: int
    on_solution: bool = False


@dataclass
class ExperimentSpec:
    domain: str
    grid: list[GridPoint]
    repeats: int
    seed_base: int
    stop: StopRule
    output_dir: Path
    delay_model: dict | None = None  # serializable form; domain default when None
    crossover_rate: float | None = None
    mutation_rate: float | None = None
    record_traces: bool = False
    processes: int = 1

    def validate(self) -> None:
        if self.domain not in DOMAIN_DEFAULTS:
            raise ConfigurationError(f"unknown domain {self.domain!r}")
        if self.repeats < 1:
            raise ConfigurationError("repeats must be >= 1")
        if not self.grid:
            raise ConfigurationError("grid must be non-empty")
        for point in self.grid:
            if point.M > point.K:
                raise ConfigurationError(f"grid point {point} violates M <= K")
            if min(point.K, point.M, point.R) < 1 or point.L < 0:
                raise ConfigurationError(f"grid point {point} has non-positive fields")
        if self.stop.max_generations < 0:
            raise ConfigurationError("max_generations must be non-negative")

    def resolved_delay(self) -> dict:
        return self.delay_model or DOMAIN_DEFAULTS[self.domain]["delay"]

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentSpec":
        try:
            grid = [GridPoint(int(p["K"]), int(p["M"]), int(p["L"]), int(p["R"])) for p in raw["grid"]]
            stop_raw = raw["stop"]
            stop = StopRule(
                max_generations=int(stop_raw["max_generations"]),
                on_solution=bool(stop_raw.get("on_solution", False)),
            )
            return cls(
                domain=raw["domain"],
                grid=grid,
                repeats=int(raw["repeats"]),
                seed_base=int(raw["seed_base"]),
                stop=stop,
                output_dir=Path(raw["output_dir"]),
                delay_model=raw.get("delay_model"),
                crossover_rate=raw.get("crossover_rate"),
                mutation_rate=raw.get("mutation_rate"),
                record_traces=bool(raw.get("record_traces", False)),
                processes=int(raw.get("processes", 1)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad experiment config: {exc}") from exc


@dataclass
class RunRecord:
    domain: str
    point: GridPoint
    seed: int
    converged_time: float | None
    generations: int
    best_fitness: str
    mean_utilization: float
    event_trace_path: str | None = None
    virtual_time: float = 0.0
    elite_monotone: bool = True
    population_sizes_constant: bool = True

    def csv_row(self) -> list[str]:
        return [
            self.domain,
            str(self.point.K),
            str(self.point.M),
            str(self.point.L),
            str(self.point.R),
            str(self.seed),
            "" if self.converged_time is None else repr(self.converged_time),
            str(self.generations),
            self.best_fitness,
            repr(self.mean_utilization),
        ]


def _fitness_series_monotone(series: list) -> bool:
    return all(a <= b for a, b in zip(series, series[1:]))


def _build_domain(domain_name: str, seed: int):
    if domain_name == "sorting":
        return SortingDomain(8)
    if domain_name == "mux":
        return MultiplexerDomain(3)
    return SurrogateDomain(seed)


def _execute_run(args: dict) -> RunRecord:
    domain_name = args["domain"]
    point: GridPoint = args["point"]
    seed: int = args["seed"]
    delay = delay_model_from_dict(args["delay"])
    stop: StopRule = args["stop"]
    trace_path = args["trace_path"]

    if domain_name == "cdn":
        return _execute_cdn_run(args, point, seed, delay, stop, trace_path)

    domain = _build_domain(domain_name, seed)
    executor = VirtualClusterExecutor(
        domain, num_workers=point.R, delay_model=delay, seed=seed, record_trace=trace_path is not None
    )
    config = AesConfig(
        queue_size=point.K,
        batch_size=point.M,
        elite_count=point.L,
        target_generations=stop.max_generations,
        rng_seed=seed,
        stop_on_solution=stop.on_solution,
        crossover_rate=args["crossover_rate"],
        mutation_rate=args["mutation_rate"],
    )
    engine = Engine(config, domain, executor)
    result = engine.run()
    if trace_path is not None:
        write_trace(trace_path, executor.trace_rows)
    best = result.best
    return RunRecord(
        domain=domain_name,
        point=point,
        seed=seed,
        converged_time=result.converged_time,
        generations=result.generations,
        best_fitness=domain.fitness_str(best.fitness) if best else "",
        mean_utilization=executor.utilization_report().mean_utilization,
        event_trace_path=str(trace_path) if trace_path else None,
        virtual_time=result.elapsed_time,
        elite_monotone=_fitness_series_monotone(result.elite_best_series),
    )


def _execute_cdn_run(args, point: GridPoint, seed: int, delay, stop: StopRule, trace_path) -> RunRecord:
    domain = SurrogateDomain(seed)
    executor = VirtualClusterExecutor(
        domain, num_workers=point.R, delay_model=delay, seed=seed, record_trace=trace_path is not None
    )
    config = CdnConfig(
        queue_size=point.K,
        batch_size=point.M,
        elite_fraction_blueprints=point.L / 100.0,
        elite_fraction_modules=point.L / 100.0,
        target_generations=stop.max_generations,
        rng_seed=seed,
    )
    runner = CdnRunner(config, executor, domain)
    result = runner.run()
    if trace_path is not None:
        write_trace(trace_path, executor.trace_rows)
    gen_stats_path = args.get("cdn_gen_stats_path")
    if gen_stats_path is not None:
        with open(gen_stats_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CDN_GEN_HEADER)
            for rep in result.reports:
                writer.writerow(
                    [
                        rep.generation,
                        repr(rep.virtual_time),
                        repr(rep.batch_best),
                        repr(rep.batch_mean),
                        repr(rep.best_so_far),
                        repr(rep.mean_node_count),
                        rep.blueprint_species,
                        rep.module_species,
                    ]
                )
    sizes_ok = all(
        rep.blueprint_count == config.n_blueprints and rep.module_count == config.n_modules
        for rep in result.reports
    )
    best = result.reports[-1].best_so_far if result.reports else 0.0
    return RunRecord(
        domain="cdn",
        point=point,
        seed=seed,
        converged_time=None,  # open-ended: the stop rule is generation count
        generations=len(result.reports),
        best_fitness=repr(best),
        mean_utilization=executor.utilization_report().mean_utilization,
        event_trace_path=str(trace_path) if trace_path else None,
        virtual_time=result.elapsed_time,
        elite_monotone=_fitness_series_monotone([r.best_so_far for r in result.reports]),
        population_sizes_constant=sizes_ok,
    )


def run_experiment(spec: ExperimentSpec) -> list[RunRecord]:
    """Execute repeats x grid seeded runs and write the records CSV."""
    spec.validate()
    out = Path(spec.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigurationError(f"output directory {out} is not writable: {exc}") from exc

    defaults = DOMAIN_DEFAULTS[spec.domain]
    tasks = []
    for point in spec.grid:
        for r in range(spec.repeats):
            seed = spec.seed_base + r
            tag = f"{spec.domain}_K{point.K}_M{point.M}_seed{seed}"
            tasks.append(
                {
                    "domain": spec.domain,
                    "point": point,
                    "seed": seed,
                    "delay": spec.resolved_delay(),
                    "stop": spec.stop,
                    "crossover_rate": spec.crossover_rate
                    if spec.crossover_rate is not None
                    else defaults.get("crossover_rate", 0.7),
                    "mutation_rate": spec.mutation_rate
                    if spec.mutation_rate is not None
                    else defaults.get("mutation_rate", 0.3),
                    "trace_path": (out / f"trace_{tag}.csv") if spec.record_traces else None,
                    "cdn_gen_stats_path": (out / f"generations_{tag}.csv") if spec.domain == "cdn" else None,
                }
            )

    if spec.processes > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=spec.processes) as pool:
            records = list(pool.map(_execute_run, tasks))
    else:
        records = [_execute_run(t) for t in tasks]

    with open(out / "records.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORDS_HEADER)
        for rec in records:
            writer.writerow(rec.csv_row())
    return records


def load_records_csv(path) -> list[dict]:
    """Read a records CSV back as dicts with typed converged_time."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            row["converged_time"] = float(row["converged_time"]) if row["converged_time"] else None
            rows.append(row)
    return rows
