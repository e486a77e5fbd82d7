"""Multi-population asynchronous evolution loop over assembled networks.

Per generation: wait for a batch of evaluated networks, attribute their fitness
back to the blueprints and modules they were assembled from, merge those
fitnesses into the persistent populations, evolve both populations, then
assemble and submit a fresh batch.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from random import Random

from ..core import STREAM_BREEDING, ConfigurationError, Individual, derive_seed
from ..scheduler import DelayModel, LinearInSizeDelay, VirtualClusterExecutor
from .assembly import assemble_networks
from .evolution import attribute_fitness, evolve_population, merge_population
from .genomes import Genome, InnovationRegistry, genome_record, new_blueprint, new_module
from .species import Speciation
from .surrogate import SurrogateDomain


@dataclass(frozen=True)
class CdnConfig:
    n_blueprints: int = 20
    n_modules: int = 60
    elite_fraction_blueprints: float = 0.5
    elite_fraction_modules: float = 0.5
    s_blueprints: int = 1
    s_modules: int = 3
    queue_size: int = 300
    batch_size: int = 100
    target_generations: int = 30
    rng_seed: int = 0
    noise_sigma: float = 0.02
    compatibility_threshold: float = 1.0

    def validate(self) -> None:
        if self.batch_size < 1 or self.queue_size < self.batch_size:
            raise ConfigurationError("need 1 <= batch_size <= queue_size")
        if self.n_blueprints < 1 or self.n_modules < 1:
            raise ConfigurationError("populations must be non-empty")
        if self.s_blueprints < 1 or self.s_modules < 1:
            raise ConfigurationError("need at least one species per population")
        if not (0 < self.elite_fraction_blueprints <= 1 and 0 < self.elite_fraction_modules <= 1):
            raise ConfigurationError("elite fractions must lie in (0, 1]")
        if self.target_generations < 0:
            raise ConfigurationError("target_generations must be non-negative")


@dataclass
class CdnGenerationReport:
    generation: int
    virtual_time: float
    batch_best: float
    batch_mean: float
    best_so_far: float
    mean_node_count: float
    blueprint_count: int
    module_count: int
    blueprint_species: int
    module_species: int


@dataclass
class CdnRunResult:
    reports: list[CdnGenerationReport]
    elapsed_time: float

    def time_to_fitness(self, level: float) -> float | None:
        for rep in self.reports:
            if rep.best_so_far >= level:
                return rep.virtual_time
        return None


class CdnRunner:
    """Owns the two populations and drives the assembled-network batches."""

    def __init__(self, config: CdnConfig, executor, domain: SurrogateDomain):
        config.validate()
        self.config = config
        self.executor = executor
        self.domain = domain
        self.rng = Random(derive_seed(config.rng_seed, STREAM_BREEDING))
        self.archive: dict[int, Genome] = {}
        self.generation = 0
        self.best_so_far = 0.0
        self._next_genome_id = 0
        self._next_uid = 0
        self.module_registry = InnovationRegistry(next_node=2, next_edge=1)
        self.blueprint_registry = InnovationRegistry(next_node=2, next_edge=1)
        self.module_speciation = Speciation(
            "module", config.s_modules, threshold=config.compatibility_threshold
        )
        self.blueprint_speciation = Speciation(
            "blueprint", config.s_blueprints, threshold=config.compatibility_threshold
        )

        self.modules: list[Genome] = []
        for _ in range(config.n_modules):
            g = new_module(self._next_genome_id, self.rng)
            self._next_genome_id += 1
            self.modules.append(g)
            self.archive[g.id] = g
        self.module_speciation.initial_speciation(self.modules)

        self.blueprints: list[Genome] = []
        module_sids = self.module_speciation.species_ids()
        for _ in range(config.n_blueprints):
            g = new_blueprint(self._next_genome_id, module_sids, self.rng)
            self._next_genome_id += 1
            self.blueprints.append(g)
            self.archive[g.id] = g
        self.blueprint_speciation.initial_speciation(self.blueprints)
        self.initialized = False

    def _assemble_and_submit(self, count: int) -> list[Individual]:
        modules_by_id = {g.id: g for g in self.modules}
        nets = assemble_networks(
            count, self._next_uid, self.blueprints, self.module_speciation, modules_by_id, self.rng
        )
        self._next_uid += count
        individuals = [
            Individual(id=net.uid, genome=net, birth_generation=self.generation) for net in nets
        ]
        self.executor.submit(individuals)
        return individuals

    def initialize(self) -> None:
        if self.initialized:
            raise RuntimeError("already initialized")
        self._assemble_and_submit(self.config.queue_size)
        self.initialized = True

    def step(self) -> CdnGenerationReport:
        if not self.initialized:
            raise RuntimeError("initialize() must run before stepping")
        cfg = self.config
        batch = self.executor.await_batch(cfg.batch_size)
        attributed = attribute_fitness(batch)
        bp_attr = {gid: f for gid, f in attributed.items() if self.archive[gid].kind == "blueprint"}
        mod_attr = {gid: f for gid, f in attributed.items() if self.archive[gid].kind == "module"}
        self.blueprints = merge_population(
            self.blueprints, bp_attr, self.archive, self.blueprint_speciation
        )
        self.modules = merge_population(
            self.modules, mod_attr, self.archive, self.module_speciation
        )

        self.blueprints, self._next_genome_id = evolve_population(
            self.blueprints,
            self.blueprint_speciation,
            cfg.n_blueprints,
            cfg.elite_fraction_blueprints,
            self.blueprint_registry,
            self._next_genome_id,
            self.rng,
            module_species_ids=self.module_speciation.species_ids(),
        )
        self.modules, self._next_genome_id = evolve_population(
            self.modules,
            self.module_speciation,
            cfg.n_modules,
            cfg.elite_fraction_modules,
            self.module_registry,
            self._next_genome_id,
            self.rng,
        )
        for genome in self.blueprints + self.modules:
            self.archive[genome.id] = genome
        module_sids = self.module_speciation.species_ids()
        for bp in self.blueprints:
            bp.repair_pointers(module_sids, self.rng)

        self.generation += 1
        self._assemble_and_submit(cfg.batch_size)

        fitnesses = [ev.fitness for ev in batch]
        batch_best = max(fitnesses)
        self.best_so_far = max(self.best_so_far, batch_best)
        return CdnGenerationReport(
            generation=self.generation,
            virtual_time=self.executor.now(),
            batch_best=batch_best,
            batch_mean=sum(fitnesses) / len(fitnesses),
            best_so_far=self.best_so_far,
            mean_node_count=sum(ev.genome.node_count for ev in batch) / len(batch),
            blueprint_count=len(self.blueprints),
            module_count=len(self.modules),
            blueprint_species=len(self.blueprint_speciation.species),
            module_species=len(self.module_speciation.species),
        )

    def run(self) -> CdnRunResult:
        if not self.initialized:
            self.initialize()
        reports = []
        while self.generation < self.config.target_generations:
            reports.append(self.step())
        return CdnRunResult(reports=reports, elapsed_time=self.executor.now())

    def write_snapshot(self, path) -> None:
        """Dump both populations as structured text records."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"generation {self.generation}\n")
            for genome in self.blueprints + self.modules:
                fh.write(genome_record(genome) + "\n")


def run_cdn(
    config: CdnConfig,
    num_workers: int,
    delay_model: DelayModel | None = None,
    record_trace: bool = False,
) -> tuple[CdnRunResult, VirtualClusterExecutor]:
    """Convenience wrapper: surrogate domain + virtual executor + full run."""
    domain = SurrogateDomain(config.rng_seed, noise_sigma=config.noise_sigma)
    executor = VirtualClusterExecutor(
        domain,
        num_workers=num_workers,
        delay_model=delay_model or LinearInSizeDelay(1.0),
        seed=config.rng_seed,
        record_trace=record_trace,
    )
    runner = CdnRunner(config, executor, domain)
    return runner.run(), executor
