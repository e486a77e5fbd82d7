"""Comparator-network genome for n-line sorting-network search.

Networks are judged by the zero-one principle: a network sorts every input iff
it sorts all 2^n binary vectors. Evaluation is bitsliced — line i of all 2^n
test vectors is packed into one 2^n-bit integer, so one comparator is two
bitwise ops regardless of how many vectors are in flight.
"""
from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from random import Random

# Smallest known sizes of valid networks; proven optimal for n <= 8.
KNOWN_OPTIMAL_SIZE = {1: 0, 2: 1, 3: 3, 4: 5, 5: 9, 6: 12, 7: 16, 8: 19}

MAX_ENUMERABLE_LINES = 20

Comparator = tuple[int, int]


@functools.total_ordering
@dataclass(frozen=True)
class SortingFitness:
    """Lexicographic fitness: sorted fraction first, then fewer comparators."""

    sorted_fraction: float
    comparator_count: int

    def _key(self) -> tuple[float, int]:
        return (self.sorted_fraction, -self.comparator_count)

    def __lt__(self, other: "SortingFitness") -> bool:
        return self._key() < other._key()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SortingFitness):
            return NotImplemented
        return self._key() == other._key()

    def __str__(self) -> str:
        return f"{self.sorted_fraction:.8g}/{self.comparator_count}"


@dataclass(frozen=True)
class SortingNetwork:
    n_lines: int
    comparators: tuple[Comparator, ...]

    def __post_init__(self) -> None:
        for lo, hi in self.comparators:
            if not (0 <= lo < hi < self.n_lines):
                raise ValueError(f"comparator ({lo},{hi}) out of range for {self.n_lines} lines")


def format_network(net: SortingNetwork) -> str:
    """Render as ((0,1),(2,3),...); the textual interchange form."""
    return "(" + ",".join(f"({lo},{hi})" for lo, hi in net.comparators) + ")"


def parse_network(text: str, n_lines: int) -> SortingNetwork:
    body = text.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise ValueError(f"malformed network text: {text!r}")
    pairs = re.findall(r"\((\d+)\s*,\s*(\d+)\)", body[1:-1])
    comparators = tuple((int(a), int(b)) for a, b in pairs)
    return SortingNetwork(n_lines, comparators)


def apply_network(net: SortingNetwork, values: list) -> list:
    """Run the comparators in order; sorts descending (largest to line 0)."""
    if len(values) != net.n_lines:
        raise ValueError(f"expected {net.n_lines} values, got {len(values)}")
    out = list(values)
    for lo, hi in net.comparators:
        if out[lo] < out[hi]:
            out[lo], out[hi] = out[hi], out[lo]
    return out


@functools.lru_cache(maxsize=8)
def _packed_lines(n: int) -> tuple[int, ...]:
    # bit j of lines[i] = value of line i in test vector j (j enumerates all 2^n inputs)
    lines = [0] * n
    for j in range(1 << n):
        for i in range(n):
            if (j >> i) & 1:
                lines[i] |= 1 << j
    return tuple(lines)


def evaluate_network(net: SortingNetwork) -> SortingFitness:
    """Zero-one evaluation over all 2^n binary vectors."""
    n = net.n_lines
    if n > MAX_ENUMERABLE_LINES:
        raise ValueError(f"cannot enumerate 2^{n} inputs; {MAX_ENUMERABLE_LINES} lines max")
    total = 1 << n
    lines = list(_packed_lines(n))
    for lo, hi in net.comparators:
        a, b = lines[lo], lines[hi]
        lines[lo] = a | b  # larger value moves to the lower index
        lines[hi] = a & b
    unsorted = 0
    for i in range(n - 1):
        unsorted |= ~lines[i] & lines[i + 1]
    unsorted &= (1 << total) - 1
    sorted_count = total - unsorted.bit_count()
    return SortingFitness(sorted_count / total, len(net.comparators))


def _random_comparator(n: int, rng: Random) -> Comparator:
    i = rng.randrange(n)
    j = rng.randrange(n - 1)
    if j >= i:
        j += 1
    return (i, j) if i < j else (j, i)


class SortingDomain:
    """Domain adapter for n-line sorting-network search."""

    def __init__(
        self,
        n_lines: int = 8,
        max_comparators: int = 64,
        target_size: int | None = None,
        init_min_len: int = 10,
        init_max_len: int = 40,
    ):
        if n_lines < 2:
            raise ValueError("need at least 2 lines")
        if target_size is None:
            target_size = KNOWN_OPTIMAL_SIZE.get(n_lines)
            if target_size is None:
                raise ValueError(f"no known optimum for n={n_lines}; pass target_size")
        self.name = "sorting"
        self.n_lines = n_lines
        self.max_comparators = max_comparators
        self.target_size = target_size
        self.init_min_len = init_min_len
        self.init_max_len = min(init_max_len, max_comparators)

    def random_genome(self, rng: Random) -> SortingNetwork:
        length = rng.randint(self.init_min_len, self.init_max_len)
        comps = tuple(_random_comparator(self.n_lines, rng) for _ in range(length))
        return SortingNetwork(self.n_lines, comps)

    def mutate(self, genome: SortingNetwork, rng: Random) -> SortingNetwork:
        comps = list(genome.comparators)
        op = rng.randrange(3)
        if not comps:
            op = 0  # empty network: forced insert
        if op == 0 and len(comps) >= self.max_comparators:
            op = 2  # full network: fall back to leg replacement
        if op == 0:
            comps.insert(rng.randrange(len(comps) + 1), _random_comparator(self.n_lines, rng))
        elif op == 1:
            del comps[rng.randrange(len(comps))]
        else:
            comps[rng.randrange(len(comps))] = _random_comparator(self.n_lines, rng)
        return SortingNetwork(self.n_lines, tuple(comps))

    def crossover(self, a: SortingNetwork, b: SortingNetwork, rng: Random) -> SortingNetwork:
        cut_a = rng.randrange(len(a.comparators) + 1)
        cut_b = rng.randrange(len(b.comparators) + 1)
        comps = (a.comparators[:cut_a] + b.comparators[cut_b:])[: self.max_comparators]
        return SortingNetwork(self.n_lines, comps)

    def evaluate(self, genome: SortingNetwork) -> SortingFitness:
        return evaluate_network(genome)

    def is_solution(self, fitness: SortingFitness) -> bool:
        return fitness.sorted_fraction == 1.0 and fitness.comparator_count <= self.target_size

    def genome_size(self, genome: SortingNetwork) -> int:
        return len(genome.comparators)

    def worst_fitness(self) -> SortingFitness:
        return SortingFitness(0.0, self.max_comparators)

    def genome_key(self, genome: SortingNetwork) -> str:
        return format_network(genome)

    def fitness_str(self, fitness: SortingFitness) -> str:
        return str(fitness)
