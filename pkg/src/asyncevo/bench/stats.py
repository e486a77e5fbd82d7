"""Run-group comparison statistics."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from statistics import median

from scipy import stats as _scipy_stats

log = logging.getLogger(__name__)


class ComparisonError(ValueError):
    """A run-group comparison is impossible (empty group after exclusions)."""


def mann_whitney(a: list[float], b: list[float]) -> tuple[float, float]:
    """Two-sided Mann-Whitney rank-sum test; returns (U statistic of a, p-value)."""
    res = _scipy_stats.mannwhitneyu(a, b, alternative="two-sided")
    return float(res.statistic), float(res.pvalue)


def ks_distance_to_uniform(values: list[float]) -> float:
    """Kolmogorov-Smirnov distance of the sample to U[0, 1]."""
    if not values:
        raise ValueError("empty sample")
    return float(_scipy_stats.kstest(values, "uniform").statistic)


@dataclass
class ComparisonResult:
    median_a: float
    median_b: float
    speedup: float  # median_b / median_a: how much faster group A converged
    p_value: float
    n_a: int
    n_b: int
    excluded_a: int
    excluded_b: int
    test: str = "mann-whitney-u-two-sided"

    def to_dict(self) -> dict:
        return {
            "median_a": self.median_a,
            "median_b": self.median_b,
            "speedup": self.speedup,
            "p_value": self.p_value,
            "n_a": self.n_a,
            "n_b": self.n_b,
            "excluded_a": self.excluded_a,
            "excluded_b": self.excluded_b,
            "test": self.test,
        }


def compare_runs(group_a: list[float | None], group_b: list[float | None]) -> ComparisonResult:
    """Compare converged times of two run groups (None = run did not converge)."""
    kept_a = [t for t in group_a if t is not None]
    kept_b = [t for t in group_b if t is not None]
    excluded_a = len(group_a) - len(kept_a)
    excluded_b = len(group_b) - len(kept_b)
    if excluded_a or excluded_b:
        log.warning(
            "excluding non-converged runs from comparison: %d from group A, %d from group B",
            excluded_a,
            excluded_b,
        )
    if not kept_a or not kept_b:
        raise ComparisonError("a group has no converged runs to compare")
    _, p = mann_whitney(kept_a, kept_b)
    med_a, med_b = median(kept_a), median(kept_b)
    return ComparisonResult(
        median_a=med_a,
        median_b=med_b,
        speedup=med_b / med_a,
        p_value=p,
        n_a=len(kept_a),
        n_b=len(kept_b),
        excluded_a=excluded_a,
        excluded_b=excluded_b,
    )
