"""Speciation: partition a population into clusters of structurally similar genomes."""
from __future__ import annotations

from dataclasses import dataclass, field
from random import Random

from .genomes import Genome, genome_distance


@dataclass
class Species:
    id: int
    representative: Genome  # kept as a frozen copy; may no longer be in the population
    members: list[int] = field(default_factory=list)  # genome ids
    kind: str = "module"


class Speciation:
    """Maintains the species set of one population across generations.

    The compatibility threshold self-adjusts to hold the species count near the
    configured target.
    """

    def __init__(
        self,
        kind: str,
        target_count: int,
        threshold: float = 1.0,
        threshold_step: float = 0.1,
        min_threshold: float = 0.05,
    ):
        self.kind = kind
        self.target_count = target_count
        self.threshold = threshold
        self.threshold_step = threshold_step
        self.min_threshold = min_threshold
        self.species: list[Species] = []
        self._next_id = 0

    def _new_species(self, representative: Genome) -> Species:
        sp = Species(self._next_id, representative.clone(representative.id), kind=self.kind)
        self._next_id += 1
        return sp

    def species_ids(self) -> list[int]:
        return [sp.id for sp in self.species]

    def initial_speciation(self, population: list[Genome]) -> None:
        """Split a fresh population into exactly target_count species around seed genomes."""
        seeds = population[: self.target_count]
        self.species = [self._new_species(g) for g in seeds]
        for genome in population:
            best = min(
                self.species,
                key=lambda sp: (genome_distance(sp.representative, genome), sp.id),
            )
            best.members.append(genome.id)

    def respeciate(self, population: list[Genome]) -> None:
        """Reassign every genome to the first compatible species; create and prune as needed."""
        for sp in self.species:
            sp.members = []
        for genome in sorted(population, key=lambda g: g.id):
            placed = False
            for sp in self.species:
                if genome_distance(sp.representative, genome) < self.threshold:
                    sp.members.append(genome.id)
                    placed = True
                    break
            if not placed:
                sp = self._new_species(genome)
                sp.members.append(genome.id)
                self.species.append(sp)
        self.species = [sp for sp in self.species if sp.members]
        by_id = {g.id: g for g in population}
        for sp in self.species:
            sp.representative = by_id[sp.members[0]].clone(sp.members[0])
        self._adapt_threshold()

    def _adapt_threshold(self) -> None:
        if len(self.species) > self.target_count:
            self.threshold += self.threshold_step
        elif len(self.species) < self.target_count:
            self.threshold = max(self.min_threshold, self.threshold - self.threshold_step)
