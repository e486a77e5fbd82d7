"""Disassembly bookkeeping and per-population NEAT-style evolution."""
from __future__ import annotations

from random import Random

from .genomes import Genome, InnovationRegistry, crossover_genomes
from .species import Speciation
from ..core import EvaluatedIndividual

CROSSOVER_RATE = 0.75
ADD_NODE_RATE = 0.12
ADD_EDGE_RATE = 0.12
PARAM_RATE = 0.6


def attribute_fitness(returned: list[EvaluatedIndividual]) -> dict[int, float]:
    """Mean fitness over the returned networks containing each blueprint/module."""
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for ev in returned:
        for gid in ev.genome.genome_ids():
            sums[gid] = sums.get(gid, 0.0) + ev.fitness
            counts[gid] = counts.get(gid, 0) + 1
    return {gid: sums[gid] / counts[gid] for gid in sorted(sums)}


def merge_population(
    population: list[Genome],
    attributed: dict[int, float],
    archive: dict[int, Genome],
    speciation: Speciation | None = None,
) -> list[Genome]:
    """Fold attributed fitnesses back into the population.

    Current members get their fitness replaced. Returnees that were already
    evicted re-enter the population carrying their new fitness (joining the
    nearest species), so structure that was bred, queued, and culled before its
    networks came back still competes on real feedback. The population may
    transiently exceed its size cap here; the following evolution step prunes
    it back to exactly the configured size.
    """
    from .genomes import genome_distance

    by_id = {g.id: g for g in population}
    result = list(population)
    for gid in sorted(attributed):
        if gid in by_id:
            by_id[gid].fitness = attributed[gid]
        else:
            genome = archive[gid]
            genome.fitness = attributed[gid]
            result.append(genome)
            by_id[gid] = genome
            if speciation is not None and speciation.species:
                home = min(
                    speciation.species,
                    key=lambda sp: (genome_distance(sp.representative, genome), sp.id),
                )
                home.members.append(gid)
    return result


def _largest_remainder(total: int, weights: list[float]) -> list[int]:
    if total == 0 or not weights:
        return [0] * len(weights)
    weight_sum = sum(weights)
    if weight_sum <= 0:
        weights = [1.0] * len(weights)  # all-zero fitness: split evenly
        weight_sum = float(len(weights))
    shares = [total * w / weight_sum for w in weights]
    base = [int(s) for s in shares]
    remainder = total - sum(base)
    order = sorted(range(len(weights)), key=lambda i: (-(shares[i] - base[i]), i))
    for i in order[:remainder]:
        base[i] += 1
    return base


def _tournament(pool: list[Genome], rng: Random) -> Genome:
    a = pool[rng.randrange(len(pool))]
    b = pool[rng.randrange(len(pool))]
    return a if (a.fitness, -a.id) >= (b.fitness, -b.id) else b


def evolve_population(
    population: list[Genome],
    speciation: Speciation,
    total_size: int,
    elite_fraction: float,
    registry: InnovationRegistry,
    next_genome_id: int,
    rng: Random,
    module_species_ids: list[int] | None = None,
) -> tuple[list[Genome], int]:
    """One NEAT generation: per-species elitism, fitness-proportional offspring
    quotas (largest remainder), within-species breeding, then re-speciation.

    Returns the new population (size exactly total_size) and the next genome id.
    """
    by_id = {g.id: g for g in population}
    species = list(speciation.species)
    ranked_members: list[list[Genome]] = []
    mean_fitness: list[float] = []
    for sp in species:
        members = [by_id[gid] for gid in sp.members if gid in by_id]
        members.sort(key=lambda g: g.id)
        members.sort(key=lambda g: g.fitness, reverse=True)
        ranked_members.append(members)
        mean_fitness.append(sum(g.fitness for g in members) / len(members) if members else 0.0)

    quotas = _largest_remainder(total_size, mean_fitness)
    new_population: list[Genome] = []
    for sp, members, quota in zip(species, ranked_members, quotas):
        if quota == 0 or not members:
            continue
        elite_count = max(1, int(elite_fraction * len(members)))
        elites = members[: min(elite_count, quota)]
        new_population.extend(elites)
        for _ in range(quota - len(elites)):
            p1 = _tournament(elites, rng)
            p2 = _tournament(elites, rng)
            if rng.random() < CROSSOVER_RATE and p2 is not p1:
                fitter, other = (p1, p2) if (p1.fitness, -p1.id) >= (p2.fitness, -p2.id) else (p2, p1)
                child = crossover_genomes(fitter, other, next_genome_id, rng)
            else:
                child = p1.clone(next_genome_id)
                child.fitness = 0.0
            next_genome_id += 1
            if rng.random() < ADD_NODE_RATE:
                child.mutate_add_node(registry, rng)
            if rng.random() < ADD_EDGE_RATE:
                child.mutate_add_edge(registry, rng)
            if rng.random() < PARAM_RATE:
                child.mutate_parameters(rng, module_species_ids)
            new_population.append(child)

    speciation.respeciate(new_population)
    return new_population, next_genome_id
