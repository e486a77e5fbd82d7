"""Plain generational elitist EA, written independently of the batched engine.

Used as the equivalence oracle for the synchronous degenerate case: with
batch_size == queue_size and constant delays, the batched loop must produce
exactly the genomes this loop produces for the same seed. The RNG draw order
therefore follows the same documented discipline (see engine.py); everything
else here is a straight select -> breed K -> evaluate-all loop with no queue,
no executor, and no timing.
"""
from __future__ import annotations

from random import Random

from .core import STREAM_BREEDING, Domain, derive_seed


def generational_reference(
    domain: Domain,
    population_size: int,
    elite_count: int,
    generations: int,
    seed: int,
    crossover_rate: float = 0.7,
    mutation_rate: float = 0.3,
) -> list[list]:
    """Run the reference EA; returns the bred genomes of each generation."""
    rng = Random(derive_seed(seed, STREAM_BREEDING))
    next_id = 0

    def make(genome):
        nonlocal next_id
        entry = (next_id, genome, domain.evaluate(genome))
        next_id += 1
        return entry

    population = []
    for _ in range(population_size):
        population.append(make(domain.random_genome(rng)))

    def tournament(pool):
        a = pool[rng.randrange(len(pool))]
        b = pool[rng.randrange(len(pool))]
        return a if a[2] >= b[2] else b

    elites: list = []
    history: list[list] = []
    for _ in range(generations):
        pool = elites + population
        pairs = []
        for _ in range(population_size):
            p1 = tournament(pool)
            p2 = tournament(pool)
            if len(pool) > 1:
                while p2 is p1:
                    p2 = tournament(pool)
            pairs.append((p1, p2))
        children_genomes = []
        for p1, p2 in pairs:
            genome = p1[1]
            if rng.random() < crossover_rate:
                genome = domain.crossover(p1[1], p2[1], rng)
            if rng.random() < mutation_rate:
                genome = domain.mutate(genome, rng)
            children_genomes.append(genome)
        merged = sorted(elites + population, key=lambda e: e[0])
        merged.sort(key=lambda e: e[2], reverse=True)
        elites = merged[:elite_count]
        population = [make(g) for g in children_genomes]
        history.append(children_genomes)
    return history
