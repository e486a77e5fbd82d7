"""Evaluation queue, delay models, and the two R-worker executors.

The virtual-time executor is a strictly single-threaded discrete-event
simulator: workers pull from a FIFO queue, finish events are ordered by
(time, worker id, individual id), so whole runs are bit-reproducible. The
wall-clock executor runs the same contract on real threads.
"""
from __future__ import annotations

import collections
import heapq
import itertools
import math
import threading
import time as _time
from dataclasses import dataclass, field
from random import Random
from typing import Callable, Iterable, Sequence

from .core import (
    STREAM_DELAY,
    ConfigurationError,
    Domain,
    EvaluatedIndividual,
    Individual,
    RunAbortedError,
    derive_seed,
)

TRACE_HEADER = "time,event,workerId,individualId,generation,queueLen,inFlight"


# ---------------------------------------------------------------------------
# Delay models
# ---------------------------------------------------------------------------


class ConstantDelay:
    """Every evaluation takes the same virtual time."""

    def __init__(self, duration: float):
        if duration <= 0:
            raise ConfigurationError("constant delay must be positive")
        self.duration = float(duration)

    def sample(self, genome_size: int, generation: int, rng: Random) -> float:
        return self.duration

    def to_dict(self) -> dict:
        return {"kind": "constant", "duration": self.duration}


class LinearInSizeDelay:
    """Evaluation time grows linearly with genome size.

    Size-zero genomes are charged one unit so delays stay strictly positive.
    """

    def __init__(self, time_per_unit: float = 1.0):
        if time_per_unit <= 0:
            raise ConfigurationError("time per unit must be positive")
        self.time_per_unit = float(time_per_unit)

    def sample(self, genome_size: int, generation: int, rng: Random) -> float:
        return max(genome_size, 1) * self.time_per_unit

    def to_dict(self) -> dict:
        return {"kind": "linear", "time_per_unit": self.time_per_unit}


class GenerationGaussianDelay:
    """Gaussian evaluation times whose mean and spread drift with the generation counter."""

    def __init__(
        self,
        mean_intercept: float = 60.0,
        mean_slope: float = 2.0,
        std_intercept: float = 10.0,
        std_slope: float = 0.5,
        floor: float = 1.0,
    ):
        if floor <= 0:
            raise ConfigurationError("delay floor must be positive")
        self.mean_intercept = float(mean_intercept)
        self.mean_slope = float(mean_slope)
        self.std_intercept = float(std_intercept)
        self.std_slope = float(std_slope)
        self.floor = float(floor)

    def sample(self, genome_size: int, generation: int, rng: Random) -> float:
        mean = self.mean_intercept + self.mean_slope * generation
        std = self.std_intercept + self.std_slope * generation
        return max(self.floor, rng.gauss(mean, std))

    def to_dict(self) -> dict:
        return {
            "kind": "gaussian",
            "mean_intercept": self.mean_intercept,
            "mean_slope": self.mean_slope,
            "std_intercept": self.std_intercept,
            "std_slope": self.std_slope,
            "floor": self.floor,
        }


DelayModel = ConstantDelay | LinearInSizeDelay | GenerationGaussianDelay


def delay_model_from_dict(spec: dict) -> DelayModel:
    kind = spec.get("kind")
    params = {k: v for k, v in spec.items() if k != "kind"}
    if kind == "constant":
        return ConstantDelay(**params)
    if kind == "linear":
        return LinearInSizeDelay(**params)
    if kind == "gaussian":
        return GenerationGaussianDelay(**params)
    raise ConfigurationError(f"unknown delay model kind {kind!r}")


def sample_delay(model: DelayModel, genome_size: int, generation: int, rng: Random) -> float:
    if genome_size < 0 or generation < 0:
        raise ValueError("genome size and generation must be non-negative")
    return model.sample(genome_size, generation, rng)


# ---------------------------------------------------------------------------
# Shared reporting types
# ---------------------------------------------------------------------------


@dataclass
class UtilizationReport:
    per_worker_busy_fraction: list[float]
    per_worker_idle_time: list[float]
    inter_return_times: list[float]

    @property
    def mean_utilization(self) -> float:
        if not self.per_worker_busy_fraction:
            return 0.0
        return sum(self.per_worker_busy_fraction) / len(self.per_worker_busy_fraction)


def write_trace(path, rows: Iterable[tuple]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(TRACE_HEADER + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# Virtual-time executor
# ---------------------------------------------------------------------------


@dataclass
class _Worker:
    id: int
    busy_until: float = 0.0
    current: Individual | None = None
    dispatch_time: float = 0.0
    submit_time: float = 0.0
    busy_total: float = 0.0


class VirtualClusterExecutor:
    """Discrete-event simulation of R workers pulling from a FIFO evaluation queue."""

    def __init__(
        self,
        domain: Domain,
        num_workers: int,
        delay_model: DelayModel,
        seed: int = 0,
        record_trace: bool = False,
        event_listener: Callable[..., None] | None = None,
    ):
        if num_workers < 1:
            raise ConfigurationError("need at least one worker")
        self.domain = domain
        self.num_workers = num_workers
        self.delay_model = delay_model
        self._delay_rng = Random(derive_seed(seed, STREAM_DELAY))
        self._clock = 0.0
        self._queue: collections.deque[tuple[Individual, float]] = collections.deque()
        self._workers = [_Worker(i) for i in range(num_workers)]
        self._idle: list[int] = list(range(num_workers))  # kept sorted, lowest id first
        self._events: list[tuple[float, int, int]] = []  # (time, worker_id, individual_id)
        self._buffer: collections.deque[EvaluatedIndividual] = collections.deque()
        self.submitted_total = 0
        self.consumed_total = 0
        self.batch_count = 0
        self._finish_times: list[float] = []
        self._trace: list[tuple] | None = [] if record_trace else None
        self._listener = event_listener

    # -- introspection ------------------------------------------------------

    def now(self) -> float:
        return self._clock

    @property
    def queued_count(self) -> int:
        return len(self._queue)

    @property
    def in_flight_count(self) -> int:
        return self.num_workers - len(self._idle)

    @property
    def buffered_count(self) -> int:
        return len(self._buffer)

    def in_flight_individuals(self) -> list[Individual]:
        return [w.current for w in self._workers if w.current is not None]

    @property
    def trace_rows(self) -> list[tuple]:
        if self._trace is None:
            raise ValueError("trace recording was not enabled")
        return self._trace

    def _record(self, event: str, worker_id: int, individual_id: int, generation: int) -> None:
        if self._trace is not None:
            self._trace.append(
                (
                    self._clock,
                    event,
                    worker_id,
                    individual_id,
                    generation,
                    len(self._queue),
                    self.in_flight_count,
                )
            )

    def _notify(self, kind: str) -> None:
        if self._listener is not None:
            self._listener(
                self._clock,
                kind,
                len(self._queue),
                self.in_flight_count,
                len(self._buffer),
                self.submitted_total,
                self.consumed_total,
            )

    # -- core operations ----------------------------------------------------

    def submit(self, individuals: Sequence[Individual]) -> None:
        for ind in individuals:
            self._queue.append((ind, self._clock))
            self.submitted_total += 1
            self._record("submit", -1, ind.id, ind.birth_generation)
        self._dispatch_idle()
        self._notify("submit")

    def _dispatch_idle(self) -> None:
        while self._idle and self._queue:
            worker = self._workers[self._idle.pop(0)]
            ind, submit_time = self._queue.popleft()
            delay = sample_delay(
                self.delay_model, self.domain.genome_size(ind.genome), ind.birth_generation, self._delay_rng
            )
            worker.current = ind
            worker.submit_time = submit_time
            worker.dispatch_time = self._clock
            worker.busy_until = self._clock + delay
            heapq.heappush(self._events, (worker.busy_until, worker.id, ind.id))
            self._record("dispatch", worker.id, ind.id, ind.birth_generation)

    def _process_next_event(self) -> None:
        finish_time, worker_id, _ind_id = heapq.heappop(self._events)
        self._clock = finish_time
        worker = self._workers[worker_id]
        ind = worker.current
        assert ind is not None
        fitness = self.domain.evaluate(ind.genome)
        self._buffer.append(
            EvaluatedIndividual(
                individual=ind,
                fitness=fitness,
                submit_time=worker.submit_time,
                dispatch_time=worker.dispatch_time,
                finish_time=finish_time,
                worker_id=worker_id,
            )
        )
        worker.busy_total += finish_time - worker.dispatch_time
        worker.current = None
        self._idle.append(worker_id)
        self._idle.sort()
        self._finish_times.append(finish_time)
        self._record("finish", worker_id, ind.id, ind.birth_generation)
        # a freed worker pulls the next queue entry within the same clock advance
        self._dispatch_idle()
        self._notify("finish")

    def await_batch(self, m: int) -> list[EvaluatedIndividual]:
        if m < 0:
            raise ConfigurationError("batch size must be non-negative")
        available = len(self._buffer) + self.in_flight_count + len(self._queue)
        if available < m:
            raise ConfigurationError(
                f"starvation: only {available} evaluations outstanding, {m} requested"
            )
        while len(self._buffer) < m:
            self._process_next_event()
        self.batch_count += 1
        batch = [self._buffer.popleft() for _ in range(m)]
        self.consumed_total += m
        for ev in batch:
            self._record("consume", -1, ev.id, self.batch_count)
        return batch

    def utilization_report(self) -> UtilizationReport:
        total = self._clock
        fractions = []
        idle = []
        for w in self._workers:
            busy = w.busy_total
            if w.current is not None:
                busy += max(0.0, total - w.dispatch_time)
            fractions.append(busy / total if total > 0 else 0.0)
            idle.append(max(0.0, total - busy))
        inter = [b - a for a, b in zip(self._finish_times, self._finish_times[1:])]
        return UtilizationReport(fractions, idle, inter)


# ---------------------------------------------------------------------------
# Wall-clock executor
# ---------------------------------------------------------------------------


class WallClockExecutor:
    """R evaluation threads behind the same submit/await contract.

    The delay model is honoured by sleeping `delay * time_scale` real seconds
    after each evaluation. A worker whose evaluation raises is considered dead;
    its individual is resubmitted to the queue head once, and marked failed
    with the domain's worst fitness on a second failure.
    """

    def __init__(
        self,
        domain: Domain,
        num_workers: int,
        delay_model: DelayModel,
        seed: int = 0,
        time_scale: float = 0.01,
        record_trace: bool = False,
    ):
        if num_workers < 1:
            raise ConfigurationError("need at least one worker")
        self.domain = domain
        self.num_workers = num_workers
        self.delay_model = delay_model
        self.time_scale = time_scale
        self._delay_rng = Random(derive_seed(seed, STREAM_DELAY))
        self._t0 = _time.monotonic()
        self._lock = threading.Lock()
        self._work_available = threading.Condition(self._lock)
        self._queue: collections.deque[tuple[Individual, float, int]] = collections.deque()
        self._results: collections.deque[EvaluatedIndividual] = collections.deque()
        self._results_available = threading.Condition(self._lock)
        self._in_flight = 0
        self._alive = num_workers
        self._closed = False
        self.submitted_total = 0
        self.consumed_total = 0
        self.batch_count = 0
        self._finish_times: list[float] = []
        self._busy_spans: dict[int, float] = {i: 0.0 for i in range(num_workers)}
        self._trace: list[tuple] | None = [] if record_trace else None
        self._threads = [
            threading.Thread(target=self._worker_loop, args=(i,), daemon=True, name=f"eval-worker-{i}")
            for i in range(num_workers)
        ]
        for t in self._threads:
            t.start()

    def now(self) -> float:
        return _time.monotonic() - self._t0

    @property
    def queued_count(self) -> int:
        with self._lock:
            return len(self._queue)

    @property
    def in_flight_count(self) -> int:
        with self._lock:
            return self._in_flight

    def _record(self, event: str, worker_id: int, individual_id: int, generation: int) -> None:
        if self._trace is not None:
            self._trace.append(
                (self.now(), event, worker_id, individual_id, generation, len(self._queue), self._in_flight)
            )

    @property
    def trace_rows(self) -> list[tuple]:
        if self._trace is None:
            raise ValueError("trace recording was not enabled")
        return self._trace

    def submit(self, individuals: Sequence[Individual]) -> None:
        with self._lock:
            for ind in individuals:
                self._queue.append((ind, self.now(), 0))
                self.submitted_total += 1
                self._record("submit", -1, ind.id, ind.birth_generation)
            self._work_available.notify_all()

    def _worker_loop(self, worker_id: int) -> None:
        while True:
            with self._lock:
                while not self._queue and not self._closed:
                    self._work_available.wait()
                if self._closed:
                    return
                ind, submit_time, attempts = self._queue.popleft()
                self._in_flight += 1
                dispatch_time = self.now()
                delay = sample_delay(
                    self.delay_model,
                    self.domain.genome_size(ind.genome),
                    ind.birth_generation,
                    self._delay_rng,
                )
                self._record("dispatch", worker_id, ind.id, ind.birth_generation)
            try:
                fitness = self.domain.evaluate(ind.genome)
            except Exception:
                # worker dies holding this individual
                with self._lock:
                    self._in_flight -= 1
                    self._alive -= 1
                    if attempts == 0:
                        self._queue.appendleft((ind, submit_time, 1))
                        self._work_available.notify()
                    else:
                        finish = self.now()
                        self._results.append(
                            EvaluatedIndividual(
                                individual=ind,
                                fitness=self.domain.worst_fitness(),
                                submit_time=submit_time,
                                dispatch_time=dispatch_time,
                                finish_time=finish,
                                worker_id=worker_id,
                            )
                        )
                        self._finish_times.append(finish)
                    self._results_available.notify_all()
                return
            _time.sleep(delay * self.time_scale)
            with self._lock:
                finish = self.now()
                self._busy_spans[worker_id] += finish - dispatch_time
                self._in_flight -= 1
                self._results.append(
                    EvaluatedIndividual(
                        individual=ind,
                        fitness=fitness,
                        submit_time=submit_time,
                        dispatch_time=dispatch_time,
                        finish_time=finish,
                        worker_id=worker_id,
                    )
                )
                self._finish_times.append(finish)
                self._record("finish", worker_id, ind.id, ind.birth_generation)
                self._results_available.notify_all()

    def await_batch(self, m: int) -> list[EvaluatedIndividual]:
        with self._lock:
            available = len(self._results) + self._in_flight + len(self._queue)
            if available < m:
                raise ConfigurationError(
                    f"starvation: only {available} evaluations outstanding, {m} requested"
                )
            while len(self._results) < m:
                if self._alive == 0:
                    raise RunAbortedError("all workers have failed")
                self._results_available.wait(timeout=0.05)
            self.batch_count += 1
            batch = [self._results.popleft() for _ in range(m)]
            self.consumed_total += m
            for ev in batch:
                self._record("consume", -1, ev.id, self.batch_count)
            return batch

    def utilization_report(self) -> UtilizationReport:
        with self._lock:
            total = self.now()
            fractions = [self._busy_spans[i] / total if total > 0 else 0.0 for i in range(self.num_workers)]
            idle = [max(0.0, total - self._busy_spans[i]) for i in range(self.num_workers)]
            inter = [b - a for a, b in zip(self._finish_times, self._finish_times[1:])]
        return UtilizationReport(fractions, idle, inter)

    def close(self) -> None:
        with self._lock:
            self._closed = True
            self._work_available.notify_all()
        for t in self._threads:
            t.join(timeout=2.0)

    def __enter__(self) -> "WallClockExecutor":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
