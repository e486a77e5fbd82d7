"""Structural stand-in for network training.

Scores an assembled network by how closely its shape matches a hidden,
run-level target profile (depth, size, layer mix, fan-in), plus seeded
Gaussian observation noise. Deterministic per (run seed, network uid), and
monotone: shrinking any single feature deviation never lowers the noise-free
score. Evaluation cost is modelled elsewhere as proportional to node count.
"""
from __future__ import annotations

import math
from random import Random

from ..core import STREAM_SURROGATE_NOISE, STREAM_SURROGATE_TARGET, derive_seed
from .assembly import AssembledNetwork
from .genomes import LAYER_TYPES

FEATURE_WEIGHTS = {
    "depth": 0.12,
    "node_count": 0.05,
    "histogram": 0.8,
    "fan_in": 0.3,
}


class SurrogateProfile:
    """Hidden target shape, derived deterministically from the run seed."""

    def __init__(self, run_seed: int):
        rng = Random(derive_seed(run_seed, STREAM_SURROGATE_TARGET))
        self.depth = rng.uniform(5.0, 9.0)
        self.node_count = rng.uniform(14.0, 26.0)
        raw = [rng.random() + 0.1 for _ in LAYER_TYPES]
        total = sum(raw)
        self.histogram = tuple(v / total for v in raw)
        self.fan_in = rng.uniform(1.1, 1.8)

    def deviation(self, features: tuple[float, float, tuple[float, ...], float]) -> float:
        depth, node_count, hist, fan_in = features
        return (
            FEATURE_WEIGHTS["depth"] * abs(depth - self.depth)
            + FEATURE_WEIGHTS["node_count"] * abs(node_count - self.node_count)
            + FEATURE_WEIGHTS["histogram"] * sum(abs(h - t) for h, t in zip(hist, self.histogram)) / 2.0
            + FEATURE_WEIGHTS["fan_in"] * abs(fan_in - self.fan_in)
        )


class SurrogateDomain:
    """Domain adapter evaluated behind the executor boundary."""

    def __init__(self, run_seed: int, noise_sigma: float = 0.02):
        self.name = "cdn"
        self.run_seed = run_seed
        self.noise_sigma = noise_sigma
        self.profile = SurrogateProfile(run_seed)
        self._noise_base = derive_seed(run_seed, STREAM_SURROGATE_NOISE)

    def evaluate(self, network: AssembledNetwork) -> float:
        if not network.nodes:
            return 0.0  # malformed graph
        score = math.exp(-self.profile.deviation(network.features()))
        if self.noise_sigma > 0:
            noise = Random(derive_seed(self._noise_base, network.uid)).gauss(0.0, self.noise_sigma)
            score += noise
        return min(1.0, max(0.0, score))

    def genome_size(self, network: AssembledNetwork) -> int:
        return network.node_count

    def is_solution(self, fitness: float) -> bool:
        return False  # open-ended optimization

    def worst_fitness(self) -> float:
        return 0.0

    def genome_key(self, network: AssembledNetwork) -> str:
        return network.describe()

    def fitness_str(self, fitness: float) -> str:
        return repr(float(fitness))
