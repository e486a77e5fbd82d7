"""Shared data model: individuals, evaluation records, and the domain/executor contracts."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Protocol, Sequence, runtime_checkable

import random

Genome = Any
Fitness = Any


def derive_seed(base: int, stream: int) -> int:
    """Derive an independent RNG seed from a base seed and a stream id.

    splitmix64-style mixing; stable across processes (no reliance on str hashing).
    """
    x = (base * 0x9E3779B97F4A7C15 + stream * 0xBF58476D1CE4E5B9 + 0x94D049BB133111EB) % (1 << 64)
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) % (1 << 64)
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) % (1 << 64)
    x ^= x >> 31
    return x


# stream ids for the independent RNG streams of one run
STREAM_BREEDING = 1
STREAM_DELAY = 2
STREAM_SURROGATE_TARGET = 3
STREAM_SURROGATE_NOISE = 4


@dataclass
class Individual:
    """A candidate queued for (or returned from) evaluation."""

    id: int
    genome: Genome
    birth_generation: int
    parent_ids: tuple[int, ...] = ()


@dataclass
class EvaluatedIndividual:
    """An individual plus its fitness and the full timing record of its evaluation."""

    individual: Individual
    fitness: Fitness
    submit_time: float
    dispatch_time: float
    finish_time: float
    worker_id: int

    def __post_init__(self) -> None:
        if not (self.submit_time <= self.dispatch_time <= self.finish_time):
            raise ValueError(
                f"timing must be ordered submit<=dispatch<=finish, got "
                f"{self.submit_time}, {self.dispatch_time}, {self.finish_time}"
            )

    @property
    def id(self) -> int:
        return self.individual.id

    @property
    def genome(self) -> Genome:
        return self.individual.genome


@runtime_checkable
class Domain(Protocol):
    """Problem-specific genome encoding, operators, and evaluation.

    evaluate() must be deterministic for a fixed genome; operators must always
    return genomes satisfying the domain's own invariants.
    """

    name: str

    def random_genome(self, rng: random.Random) -> Genome: ...

    def mutate(self, genome: Genome, rng: random.Random) -> Genome: ...

    def crossover(self, a: Genome, b: Genome, rng: random.Random) -> Genome: ...

    def evaluate(self, genome: Genome) -> Fitness: ...

    def is_solution(self, fitness: Fitness) -> bool: ...

    def genome_size(self, genome: Genome) -> int: ...

    def worst_fitness(self) -> Fitness: ...

    def genome_key(self, genome: Genome) -> str:
        """Canonical text form; used for serialization and multiset comparison."""
        ...

    def fitness_str(self, fitness: Fitness) -> str: ...


class Executor(Protocol):
    """Evaluation backend: a FIFO queue feeding R workers.

    The evolution loop is single-threaded and talks to the executor only through
    submit() and await_batch(); all parallelism (real or simulated) lives behind
    this boundary.
    """

    def submit(self, individuals: Sequence[Individual]) -> None: ...

    def await_batch(self, m: int) -> list[EvaluatedIndividual]: ...

    def now(self) -> float: ...


class ConfigurationError(ValueError):
    """Invalid run or experiment configuration."""


class RunAbortedError(RuntimeError):
    """The executor can no longer produce evaluations (all workers failed)."""
