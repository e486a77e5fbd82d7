"""Asynchronous batched evolutionary computation with a virtual-time cluster simulator."""

from .core import ConfigurationError, Domain, EvaluatedIndividual, Executor, Individual, RunAbortedError
from .engine import AesConfig, EliteSet, Engine, GenerationReport, RunResult
from .scheduler import (
    ConstantDelay,
    GenerationGaussianDelay,
    LinearInSizeDelay,
    VirtualClusterExecutor,
    WallClockExecutor,
)

__all__ = [
    "AesConfig",
    "ConfigurationError",
    "ConstantDelay",
    "Domain",
    "EliteSet",
    "Engine",
    "EvaluatedIndividual",
    "Executor",
    "GenerationGaussianDelay",
    "GenerationReport",
    "Individual",
    "LinearInSizeDelay",
    "RunAbortedError",
    "RunResult",
    "VirtualClusterExecutor",
    "WallClockExecutor",
]
