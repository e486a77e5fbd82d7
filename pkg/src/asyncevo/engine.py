"""Batched asynchronous evolution loop.

Each generation waits for the next `batch_size` evaluations to return, breeds
that many children from the elites plus the returned batch, updates the elite
archive, and resubmits. With batch_size == queue_size and constant delays the
loop degenerates to a plain generational EA.

RNG discipline (kept in lockstep by tests against the generational reference
in `reference.py` — do not reorder draws): initialization draws one
random_genome per queue slot; then per child, two randrange draws per
tournament (twice, with whole-tournament redraws while the second parent is
the first), one uniform draw for the crossover decision, operator draws if it
fires, one uniform draw for the mutation decision, operator draws if it fires.
Ties in tournaments go to the first-drawn contestant.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from random import Random
from typing import Sequence

from .core import (
    STREAM_BREEDING,
    ConfigurationError,
    Domain,
    EvaluatedIndividual,
    Executor,
    Individual,
    derive_seed,
)


@dataclass(frozen=True)
class AesConfig:
    """Run parameters for the batched asynchronous loop.

    queue_size is the number of candidates kept in the system, batch_size how
    many returns to wait for per generation; queue_size / batch_size is the
    asynchrony ratio (1 = synchronous baseline).
    """

    queue_size: int
    batch_size: int
    elite_count: int
    target_generations: int
    rng_seed: int = 0
    stop_on_solution: bool = False
    crossover_rate: float = 0.7
    mutation_rate: float = 0.3

    def validate(self) -> None:
        if self.queue_size < 1:
            raise ConfigurationError("queue_size must be positive")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be positive")
        if self.batch_size > self.queue_size:
            raise ConfigurationError("batch_size must not exceed queue_size")
        if self.elite_count < 0:
            raise ConfigurationError("elite_count must be non-negative")
        if self.elite_count >= self.queue_size:
            raise ConfigurationError("elite_count must be smaller than queue_size")
        if self.target_generations < 0:
            raise ConfigurationError("target_generations must be non-negative")
        if not 0.0 <= self.crossover_rate <= 1.0 or not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigurationError("operator rates must lie in [0, 1]")

    @property
    def async_ratio(self) -> float:
        return self.queue_size / self.batch_size


@dataclass
class EliteSet:
    """Capacity-bounded best-so-far archive, best first; ties keep the older id."""

    capacity: int
    members: list[EvaluatedIndividual] = field(default_factory=list)

    def update(self, returned: Sequence[EvaluatedIndividual]) -> None:
        combined = self.members + list(returned)
        combined.sort(key=lambda ev: ev.id)
        combined.sort(key=lambda ev: ev.fitness, reverse=True)
        self.members = combined[: self.capacity]

    @property
    def best(self) -> EvaluatedIndividual | None:
        return self.members[0] if self.members else None


def update_elites(elites: EliteSet, returned: Sequence[EvaluatedIndividual]) -> EliteSet:
    result = EliteSet(elites.capacity, list(elites.members))
    result.update(returned)
    return result


def binary_tournament(pool: Sequence[EvaluatedIndividual], rng: Random) -> EvaluatedIndividual:
    a = pool[rng.randrange(len(pool))]
    b = pool[rng.randrange(len(pool))]
    return a if a.fitness >= b.fitness else b


def select_parents(
    elites: EliteSet,
    returned: Sequence[EvaluatedIndividual],
    count: int,
    rng: Random,
) -> list[tuple[EvaluatedIndividual, EvaluatedIndividual]]:
    """Draw parent pairs by binary tournament over elites plus returns.

    Pairs may repeat across children; an individual is paired with itself only
    when the pool has a single member.
    """
    pool = elites.members + sorted(returned, key=lambda ev: ev.id)
    if not pool:
        raise RuntimeError("cannot select parents from an empty pool")
    pairs = []
    for _ in range(count):
        first = binary_tournament(pool, rng)
        second = binary_tournament(pool, rng)
        if len(pool) > 1:
            while second is first:
                second = binary_tournament(pool, rng)
        pairs.append((first, second))
    return pairs


@dataclass
class GenerationReport:
    generation: int
    virtual_time: float
    best_fitness: object
    batch_best_fitness: object
    parent_pool_size: int
    consumed: list[EvaluatedIndividual]
    children: list[Individual]
    solution: EvaluatedIndividual | None


@dataclass
class RunResult:
    converged: bool
    generations: int
    elapsed_time: float
    converged_time: float | None
    best: EvaluatedIndividual | None
    solution: EvaluatedIndividual | None
    elite_best_series: list


class Engine:
    """Single-threaded evolution loop; all parallelism lives behind the executor."""

    def __init__(self, config: AesConfig, domain: Domain, executor: Executor):
        config.validate()
        self.config = config
        self.domain = domain
        self.executor = executor
        self.rng = Random(derive_seed(config.rng_seed, STREAM_BREEDING))
        self.elites = EliteSet(config.elite_count)
        self.generation = 0
        self.initialized = False
        self.best: EvaluatedIndividual | None = None
        self.first_solution: EvaluatedIndividual | None = None
        self._next_id = 0

    def _new_individual(self, genome, parent_ids: tuple[int, ...] = ()) -> Individual:
        ind = Individual(
            id=self._next_id,
            genome=genome,
            birth_generation=self.generation,
            parent_ids=parent_ids,
        )
        self._next_id += 1
        return ind

    def initialize(self) -> None:
        """Seed the evaluation queue with queue_size random individuals."""
        if self.initialized:
            raise RuntimeError("run already initialized")
        seed_batch = [
            self._new_individual(self.domain.random_genome(self.rng))
            for _ in range(self.config.queue_size)
        ]
        self.executor.submit(seed_batch)
        self.initialized = True

    def _breed_child(self, p1: EvaluatedIndividual, p2: EvaluatedIndividual) -> Individual:
        genome = p1.genome
        if self.rng.random() < self.config.crossover_rate:
            genome = self.domain.crossover(p1.genome, p2.genome, self.rng)
        if self.rng.random() < self.config.mutation_rate:
            genome = self.domain.mutate(genome, self.rng)
        return self._new_individual(genome, parent_ids=(p1.id, p2.id))

    def step(self) -> GenerationReport:
        """Consume one batch, breed and resubmit as many children."""
        if not self.initialized:
            raise RuntimeError("initialize() must run before stepping")
        m = self.config.batch_size
        batch = self.executor.await_batch(m)
        pairs = select_parents(self.elites, batch, m, self.rng)
        pool_size = len(self.elites.members) + len(batch)
        self.generation += 1
        children = [self._breed_child(p1, p2) for p1, p2 in pairs]
        self.elites.update(batch)
        self.executor.submit(children)

        solution = None
        for ev in batch:  # batch is in finish order; first hit is the earliest
            if self.best is None or ev.fitness > self.best.fitness:
                self.best = ev
            if solution is None and self.domain.is_solution(ev.fitness):
                solution = ev
        if solution is not None and self.first_solution is None:
            self.first_solution = solution

        batch_best = max(batch, key=lambda ev: ev.fitness)
        best_overall = self.elites.best.fitness if self.elites.best is not None else batch_best.fitness
        return GenerationReport(
            generation=self.generation,
            virtual_time=self.executor.now(),
            best_fitness=max(best_overall, batch_best.fitness),
            batch_best_fitness=batch_best.fitness,
            parent_pool_size=pool_size,
            consumed=batch,
            children=children,
            solution=solution,
        )

    def run(self) -> RunResult:
        """Loop until target_generations, or the first returned solution if configured."""
        if not self.initialized:
            self.initialize()
        elite_best_series = []
        while self.generation < self.config.target_generations:
            report = self.step()
            elite_best_series.append(report.best_fitness)
            if self.config.stop_on_solution and self.first_solution is not None:
                break
        return RunResult(
            converged=self.first_solution is not None,
            generations=self.generation,
            elapsed_time=self.executor.now(),
            converged_time=self.first_solution.finish_time if self.first_solution else None,
            best=self.best,
            solution=self.first_solution,
            elite_best_series=elite_best_series,
        )
