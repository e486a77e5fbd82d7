import pytest
from random import Random

from asyncevo.domains.sorting import (
    SortingDomain,
    SortingFitness,
    SortingNetwork,
    apply_network,
    evaluate_network,
    format_network,
    parse_network,
)

FIG_NET_TEXT = "((0,1),(2,3),(0,2),(1,3),(1,2))"
FIG_NET = parse_network(FIG_NET_TEXT, 4)

# Batcher's odd-even merge for 8 lines: a known size-optimal 19-comparator network.
OPTIMAL_8 = SortingNetwork(
    8,
    (
        (0, 1), (2, 3), (4, 5), (6, 7),
        (0, 2), (1, 3), (4, 6), (5, 7),
        (1, 2), (5, 6),
        (0, 4), (1, 5), (2, 6), (3, 7),
        (2, 4), (3, 5),
        (1, 2), (3, 4), (5, 6),
    ),
)


def naive_sorted_fraction(net: SortingNetwork) -> float:
    """Independent oracle: apply comparators vector by vector, count sorted outputs."""
    n = net.n_lines
    good = 0
    for j in range(1 << n):
        out = apply_network(net, [(j >> i) & 1 for i in range(n)])
        if all(out[i] >= out[i + 1] for i in range(n - 1)):
            good += 1
    return good / (1 << n)


class TestApplyNetwork:
    def test_minimal_four_line_example(self):
        assert apply_network(FIG_NET, [0, 1, 1, 0]) == [1, 1, 0, 0]

    def test_empty_network_is_identity(self):
        net = SortingNetwork(4, ())
        assert apply_network(net, [3, 1, 2, 0]) == [3, 1, 2, 0]

    def test_single_comparator_swaps(self):
        net = SortingNetwork(2, ((0, 1),))
        assert apply_network(net, [0, 1]) == [1, 0]

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            apply_network(FIG_NET, [1, 0, 1])

    def test_output_is_permutation(self):
        rng = Random(3)
        dom = SortingDomain(8)
        for _ in range(50):
            net = dom.random_genome(rng)
            values = [rng.randrange(1000) for _ in range(8)]
            assert sorted(apply_network(net, values)) == sorted(values)


class TestEvaluateNetwork:
    def test_four_line_example_is_perfect_with_five_comparators(self):
        assert evaluate_network(FIG_NET) == SortingFitness(1.0, 5)

    def test_enumerates_all_256_vectors_for_eight_lines(self):
        # an empty 8-line network sorts exactly the 9 already-descending 0/1 vectors
        fitness = evaluate_network(SortingNetwork(8, ()))
        assert fitness.sorted_fraction == 9 / 256

    def test_removing_a_comparator_breaks_the_minimal_network(self):
        pruned = SortingNetwork(4, tuple(c for i, c in enumerate(FIG_NET.comparators) if i != 4))
        fitness = evaluate_network(pruned)
        assert fitness.sorted_fraction < 1.0
        assert fitness.sorted_fraction == naive_sorted_fraction(pruned)

    def test_known_optimal_nineteen_comparator_network(self):
        assert evaluate_network(OPTIMAL_8) == SortingFitness(1.0, 19)

    def test_bitsliced_matches_naive_oracle(self):
        rng = Random(11)
        dom = SortingDomain(6, init_min_len=0, init_max_len=20)
        for _ in range(40):
            net = dom.random_genome(rng)
            assert evaluate_network(net).sorted_fraction == naive_sorted_fraction(net)

    def test_too_many_lines_rejected(self):
        with pytest.raises(ValueError):
            evaluate_network(SortingNetwork(21, ()))

    def test_zero_one_principle_spot_check(self):
        # a 6-line network scoring 1.0 on bit vectors sorts arbitrary integers too
        rng = Random(5)
        net6 = SortingNetwork(
            6, ((0, 1), (2, 3), (4, 5), (0, 2), (1, 4), (3, 5), (0, 1), (2, 3), (4, 5), (1, 2), (3, 4), (2, 3))
        )
        assert evaluate_network(net6).sorted_fraction == 1.0
        for _ in range(1000):
            values = [rng.randrange(10**6) for _ in range(6)]
            assert apply_network(net6, values) == sorted(values, reverse=True)


class TestFitnessOrder:
    def test_valid_beats_invalid_regardless_of_size(self):
        assert SortingFitness(1.0, 60) > SortingFitness(0.99, 5)

    def test_ties_prefer_fewer_comparators(self):
        assert SortingFitness(1.0, 19) > SortingFitness(1.0, 20)
        assert SortingFitness(0.5, 3) > SortingFitness(0.5, 9)

    def test_equality(self):
        assert SortingFitness(0.5, 7) == SortingFitness(0.5, 7)


class TestOperators:
    def test_mutations_respect_invariants(self):
        rng = Random(7)
        dom = SortingDomain(4)
        net = FIG_NET
        for _ in range(10_000):
            net = dom.mutate(net, rng)
            assert all(0 <= lo < hi < 4 for lo, hi in net.comparators)
            assert len(net.comparators) <= dom.max_comparators

    def test_delete_on_single_comparator_gives_empty(self):
        rng = Random(1)
        dom = SortingDomain(4)
        net = SortingNetwork(4, ((0, 1),))
        seen_empty = False
        for _ in range(50):
            child = dom.mutate(net, rng)
            if not child.comparators:
                seen_empty = True
        assert seen_empty

    def test_mutating_empty_network_forces_insert(self):
        rng = Random(2)
        dom = SortingDomain(4)
        child = dom.mutate(SortingNetwork(4, ()), rng)
        assert len(child.comparators) == 1

    def test_crossover_of_empty_parents_is_empty(self):
        rng = Random(3)
        dom = SortingDomain(4)
        child = dom.crossover(SortingNetwork(4, ()), SortingNetwork(4, ()), rng)
        assert child.comparators == ()

    def test_crossover_respects_max_length(self):
        rng = Random(4)
        dom = SortingDomain(8, max_comparators=64)
        big = SortingNetwork(8, tuple((0, 1) for _ in range(64)))
        for _ in range(200):
            child = dom.crossover(big, big, rng)
            assert len(child.comparators) <= 64

    def test_random_genome_determinism(self):
        dom = SortingDomain(8)
        assert dom.random_genome(Random(9)) == dom.random_genome(Random(9))


class TestSerialization:
    def test_format_matches_interchange_example(self):
        assert format_network(FIG_NET) == FIG_NET_TEXT

    def test_round_trip(self):
        rng = Random(13)
        dom = SortingDomain(8)
        for _ in range(20):
            net = dom.random_genome(rng)
            assert parse_network(format_network(net), 8) == net

    def test_comparator_bounds_validated(self):
        with pytest.raises(ValueError):
            SortingNetwork(4, ((2, 1),))
        with pytest.raises(ValueError):
            SortingNetwork(4, ((0, 4),))


class TestDomainContract:
    def test_solution_threshold(self):
        dom = SortingDomain(8)
        assert dom.is_solution(SortingFitness(1.0, 19))
        assert dom.is_solution(SortingFitness(1.0, 17))
        assert not dom.is_solution(SortingFitness(1.0, 20))
        assert not dom.is_solution(SortingFitness(255 / 256, 19))

    def test_genome_size_counts_comparators(self):
        dom = SortingDomain(4)
        assert dom.genome_size(FIG_NET) == 5

    def test_worst_fitness_loses_to_everything(self):
        dom = SortingDomain(8)
        assert dom.worst_fitness() <= evaluate_network(SortingNetwork(8, ()))
