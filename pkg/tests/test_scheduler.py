import pytest
from random import Random

from asyncevo.core import ConfigurationError, Individual, RunAbortedError
from asyncevo.domains.sorting import SortingDomain
from asyncevo.scheduler import (
    ConstantDelay,
    GenerationGaussianDelay,
    LinearInSizeDelay,
    VirtualClusterExecutor,
    WallClockExecutor,
    delay_model_from_dict,
    sample_delay,
)


class StubDomain:
    """Genome is an int; evaluation returns it; size equals it (drives delays)."""

    name = "stub"

    def evaluate(self, genome):
        return genome

    def genome_size(self, genome):
        return genome

    def worst_fitness(self):
        return -1

    def fitness_str(self, fitness):
        return str(fitness)

    def genome_key(self, genome):
        return str(genome)


def make_individuals(sizes, generation=0, start_id=0):
    return [Individual(id=start_id + i, genome=s, birth_generation=generation) for i, s in enumerate(sizes)]


class FixedGauss:
    """Stands in for the RNG when a specific normal sample must be forced."""

    def __init__(self, value):
        self.value = value

    def gauss(self, mu, sigma):
        return self.value


class TestDelayModels:
    def test_constant(self):
        rng = Random(0)
        assert sample_delay(ConstantDelay(2.5), 10, 0, rng) == 2.5

    def test_linear_matches_size_ratio(self):
        rng = Random(0)
        d24 = sample_delay(LinearInSizeDelay(1.0), 24, 0, rng)
        d19 = sample_delay(LinearInSizeDelay(1.0), 19, 0, rng)
        assert (d24, d19) == (24.0, 19.0)
        assert abs(d24 / d19 - 1.26) < 0.01  # a fifth-ish more work for the bigger network

    def test_linear_charges_empty_genomes_one_unit(self):
        assert sample_delay(LinearInSizeDelay(0.5), 0, 0, Random(0)) == 0.5

    def test_gaussian_zero_variance_gives_the_mean(self):
        model = GenerationGaussianDelay(mean_intercept=60, mean_slope=2, std_intercept=0, std_slope=0)
        assert sample_delay(model, 5, 10, Random(1)) == 80.0

    def test_gaussian_clamps_at_floor(self):
        model = GenerationGaussianDelay(floor=0.1)
        assert model.sample(0, 0, FixedGauss(-5.0)) == 0.1

    def test_nonpositive_parameters_rejected(self):
        with pytest.raises(ConfigurationError):
            LinearInSizeDelay(0.0)
        with pytest.raises(ConfigurationError):
            ConstantDelay(-1.0)
        with pytest.raises(ConfigurationError):
            GenerationGaussianDelay(floor=0.0)

    def test_negative_inputs_rejected(self):
        with pytest.raises(ValueError):
            sample_delay(ConstantDelay(1.0), -1, 0, Random(0))

    def test_round_trip_from_dict(self):
        model = delay_model_from_dict({"kind": "gaussian", "mean_intercept": 5, "floor": 2})
        assert isinstance(model, GenerationGaussianDelay)
        assert model.floor == 2.0
        with pytest.raises(ConfigurationError):
            delay_model_from_dict({"kind": "nope"})


class TestSubmitDispatch:
    def test_idle_workers_pull_immediately(self):
        ex = VirtualClusterExecutor(StubDomain(), num_workers=3, delay_model=ConstantDelay(1.0))
        ex.submit(make_individuals([1] * 10))
        assert ex.in_flight_count == 3
        assert ex.queued_count == 7

    def test_empty_submit_is_noop(self):
        ex = VirtualClusterExecutor(StubDomain(), num_workers=2, delay_model=ConstantDelay(1.0))
        ex.submit([])
        assert ex.in_flight_count == 0
        assert ex.queued_count == 0

    def test_enough_workers_drain_the_queue_entirely(self):
        ex = VirtualClusterExecutor(StubDomain(), num_workers=4000, delay_model=ConstantDelay(1.0))
        ex.submit(make_individuals([1] * 4000))
        assert ex.queued_count == 0
        assert ex.in_flight_count == 4000


class TestAwaitBatch:
    def test_hand_trace_two_workers_three_jobs(self):
        # R=2, constant delay 1: two finish at t=1; the third dispatches at t=1, finishes at t=2
        ex = VirtualClusterExecutor(StubDomain(), num_workers=2, delay_model=ConstantDelay(1.0))
        ex.submit(make_individuals([5, 6, 7]))
        batch = ex.await_batch(3)
        assert ex.now() == 2.0
        assert [ev.finish_time for ev in batch] == [1.0, 1.0, 2.0]
        assert [ev.id for ev in batch] == [0, 1, 2]

    def test_single_await_returns_earliest_finisher(self):
        ex = VirtualClusterExecutor(StubDomain(), num_workers=2, delay_model=LinearInSizeDelay(1.0))
        ex.submit(make_individuals([9, 2]))
        batch = ex.await_batch(1)
        assert batch[0].genome == 2
        assert batch[0].finish_time == 2.0

    def test_starvation_detected_before_blocking(self):
        ex = VirtualClusterExecutor(StubDomain(), num_workers=2, delay_model=ConstantDelay(1.0))
        ex.submit(make_individuals([1, 1]))
        with pytest.raises(ConfigurationError, match="starvation"):
            ex.await_batch(3)

    def test_batch_matches_independent_completion_order_oracle(self):
        # brute-force re-simulation with plain lists: FIFO dispatch onto the
        # earliest-free worker, completions sorted by (time, worker id)
        sizes = [Random(99).randrange(1, 64) for _ in range(1000)]
        r, m = 32, 10
        ex = VirtualClusterExecutor(StubDomain(), num_workers=r, delay_model=LinearInSizeDelay(1.0))
        ex.submit(make_individuals(sizes))
        got = [ev.id for ev in ex.await_batch(m)]

        free_at = [0.0] * r
        completions = []
        for ind_id, size in enumerate(sizes):
            worker = min(range(r), key=lambda w: (free_at[w], w))
            finish = free_at[worker] + float(size)
            free_at[worker] = finish
            completions.append((finish, worker, ind_id))
        completions.sort()
        expected = [ind_id for _, _, ind_id in completions[:m]]
        assert got == expected

    def test_returns_are_finish_ordered_with_worker_tiebreak(self):
        ex = VirtualClusterExecutor(StubDomain(), num_workers=4, delay_model=ConstantDelay(2.0))
        ex.submit(make_individuals([1, 1, 1, 1]))
        batch = ex.await_batch(4)
        assert [ev.worker_id for ev in batch] == [0, 1, 2, 3]


class TestInvariants:
    def test_conservation_at_every_event(self):
        violations = []

        def listener(time, kind, queued, in_flight, buffered, submitted, consumed):
            if queued + in_flight + buffered != submitted - consumed:
                violations.append((time, kind))

        dom = SortingDomain(6)
        rng = Random(5)
        ex = VirtualClusterExecutor(
            dom, num_workers=7, delay_model=LinearInSizeDelay(1.0), event_listener=listener
        )
        k, m = 40, 8
        ex.submit([Individual(i, dom.random_genome(rng), 0) for i in range(k)])
        next_id = k
        for gen in range(1, 12):
            batch = ex.await_batch(m)
            children = [
                Individual(next_id + i, dom.mutate(batch[i % m].genome, rng), gen) for i in range(m)
            ]
            next_id += m
            ex.submit(children)
        assert violations == []
        assert ex.submitted_total == k + 11 * m

    def test_identical_seeds_give_identical_traces(self):
        def one_trace(seed):
            dom = SortingDomain(6)
            rng = Random(seed)
            ex = VirtualClusterExecutor(
                dom, num_workers=5, delay_model=GenerationGaussianDelay(10, 1, 3, 0.5, 1), seed=seed,
                record_trace=True,
            )
            ex.submit([Individual(i, dom.random_genome(rng), 0) for i in range(20)])
            for gen in range(1, 5):
                batch = ex.await_batch(4)
                ex.submit([Individual(20 + gen * 4 + i, ev.genome, gen) for i, ev in enumerate(batch)])
            return ex.trace_rows

        assert one_trace(3) == one_trace(3)

    def test_dispatch_order_equals_submission_order(self):
        dom = StubDomain()
        ex = VirtualClusterExecutor(dom, num_workers=3, delay_model=ConstantDelay(1.0), record_trace=True)
        ex.submit(make_individuals(list(range(1, 21))))
        ex.await_batch(20)
        submits = [r[3] for r in ex.trace_rows if r[1] == "submit"]
        dispatches = [r[3] for r in ex.trace_rows if r[1] == "dispatch"]
        assert dispatches == submits


class TestUtilization:
    def test_single_worker_back_to_back_is_fully_busy(self):
        ex = VirtualClusterExecutor(StubDomain(), num_workers=1, delay_model=LinearInSizeDelay(1.0))
        ex.submit(make_individuals([3, 5, 2]))
        ex.await_batch(3)
        report = ex.utilization_report()
        assert report.per_worker_busy_fraction == [1.0]
        assert report.per_worker_idle_time == [0.0]

    def test_synchronous_idle_gap_is_max_minus_own_finish(self):
        # two workers, sizes 2 and 5: the generation ends at t=5, worker 0 idles 3
        ex = VirtualClusterExecutor(StubDomain(), num_workers=2, delay_model=LinearInSizeDelay(1.0))
        ex.submit(make_individuals([2, 5]))
        ex.await_batch(2)
        report = ex.utilization_report()
        assert report.per_worker_idle_time == [3.0, 0.0]

    def test_inter_return_times_listed_in_order(self):
        ex = VirtualClusterExecutor(StubDomain(), num_workers=1, delay_model=LinearInSizeDelay(1.0))
        ex.submit(make_individuals([1, 2, 4]))
        ex.await_batch(3)
        assert ex.utilization_report().inter_return_times == [2.0, 4.0]


class FlakyDomain(StubDomain):
    """Evaluation raises for marked genomes a configurable number of times."""

    def __init__(self, fail_genomes, fail_times=1):
        self.remaining = {g: fail_times for g in fail_genomes}

    def evaluate(self, genome):
        if self.remaining.get(genome, 0) > 0:
            self.remaining[genome] -= 1
            raise RuntimeError("worker crashed")
        return genome


class TestWallClockExecutor:
    def test_evaluates_and_times_are_ordered(self):
        with WallClockExecutor(StubDomain(), num_workers=2, delay_model=ConstantDelay(1.0), time_scale=0.005) as ex:
            ex.submit(make_individuals([4, 7, 1]))
            batch = ex.await_batch(3)
        assert sorted(ev.fitness for ev in batch) == [1, 4, 7]
        for ev in batch:
            assert ev.submit_time <= ev.dispatch_time <= ev.finish_time

    def test_agrees_with_virtual_executor_on_batch_multisets(self):
        # constant delays, batch size aligned to worker waves: the batch
        # membership must match the simulator's batches exactly
        dom = SortingDomain(6)
        k, m, r, gens = 8, 4, 2, 4

        def batches(executor_factory):
            rng = Random(77)
            ex = executor_factory()
            ex.submit([Individual(i, dom.random_genome(rng), 0) for i in range(k)])
            out = []
            next_id = k
            for gen in range(1, gens + 1):
                batch = ex.await_batch(m)
                out.append(sorted((dom.genome_key(ev.genome), str(ev.fitness)) for ev in batch))
                children = [Individual(next_id + i, dom.mutate(ev.genome, rng), gen) for i, ev in enumerate(batch)]
                next_id += m
                ex.submit(children)
            if hasattr(ex, "close"):
                ex.close()
            return out

        virtual = batches(
            lambda: VirtualClusterExecutor(dom, num_workers=r, delay_model=ConstantDelay(1.0))
        )
        wall = batches(
            lambda: WallClockExecutor(dom, num_workers=r, delay_model=ConstantDelay(1.0), time_scale=0.02)
        )
        assert virtual == wall

    def test_failed_worker_requeues_individual_once(self):
        dom = FlakyDomain({42}, fail_times=1)
        with WallClockExecutor(dom, num_workers=2, delay_model=ConstantDelay(1.0), time_scale=0.002) as ex:
            ex.submit(make_individuals([42, 3]))
            batch = ex.await_batch(2)
        by_genome = {ev.genome: ev.fitness for ev in batch}
        assert by_genome[42] == 42  # retried on the surviving worker and succeeded

    def test_second_failure_scores_worst_fitness(self):
        dom = FlakyDomain({42}, fail_times=2)
        with WallClockExecutor(dom, num_workers=3, delay_model=ConstantDelay(1.0), time_scale=0.002) as ex:
            ex.submit(make_individuals([42, 3, 9]))
            batch = ex.await_batch(3)
        by_genome = {ev.genome: ev.fitness for ev in batch}
        assert by_genome[42] == dom.worst_fitness()

    def test_all_workers_dead_aborts_run(self):
        dom = FlakyDomain({1, 2}, fail_times=5)
        ex = WallClockExecutor(dom, num_workers=2, delay_model=ConstantDelay(1.0), time_scale=0.002)
        ex.submit(make_individuals([1, 2, 3]))
        with pytest.raises(RunAbortedError):
            ex.await_batch(3)

    def test_starvation_check(self):
        with WallClockExecutor(StubDomain(), num_workers=1, delay_model=ConstantDelay(1.0), time_scale=0.001) as ex:
            ex.submit(make_individuals([1]))
            with pytest.raises(ConfigurationError):
                ex.await_batch(2)
