import pytest
from random import Random

from asyncevo.domains.multiplexer import (
    MAX_CONDITIONS,
    MAX_RULES,
    Condition,
    MultiplexerDomain,
    MuxConfig,
    Rule,
    RuleSet,
    bit_index,
    evaluate_rule_set,
    format_rule,
    format_rule_set,
    mux_truth,
    parse_rule,
    parse_rule_set,
    rule_match_column,
    rule_matches,
)

CFG = MuxConfig(3)
PAPER_RULE_TEXT = "<A0=0 & A1=1 & !A2=0> -> D6"


def perfect_rule_set(cfg: MuxConfig) -> RuleSet:
    rules = []
    for addr in range(cfg.data_bits):
        conds = tuple(
            Condition(bit=bit_index(cfg, f"A{i}"), value=(addr >> i) & 1) for i in range(cfg.u)
        )
        rules.append(Rule(conds, addr))
    return RuleSet(tuple(rules))


def input_with(cfg: MuxConfig, address: int, data: dict[int, int]) -> list[int]:
    bits = [0] * cfg.total_bits
    for i in range(cfg.u):
        bits[cfg.data_bits + i] = (address >> i) & 1
    for idx, val in data.items():
        bits[idx] = val
    return bits


def naive_correct_count(cfg: MuxConfig, rs: RuleSet) -> int:
    """Independent oracle: walk every truth-table row, first matching rule wins."""
    good = 0
    for row in range(cfg.rows):
        predicted = 0
        for rule in rs.rules:
            if all((((row >> c.bit) & 1) == c.value) != c.negated for c in rule.conditions):
                predicted = (row >> rule.action) & 1
                break
        if predicted == mux_truth(cfg, row):
            good += 1
    return good


class TestMuxTruth:
    def test_address_110_selects_data_bit_six(self):
        bits = input_with(CFG, 0b110, {6: 1})
        assert mux_truth(CFG, bits) == 1

    def test_address_110_with_zero_data_bit(self):
        bits = input_with(CFG, 0b110, {6: 0})
        assert mux_truth(CFG, bits) == 0

    def test_smallest_multiplexer_address_zero_returns_d0(self):
        cfg = MuxConfig(1)
        for row in range(cfg.rows):
            if (row >> cfg.data_bits) & 1 == 0:
                assert mux_truth(cfg, row) == row & 1

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            mux_truth(CFG, [0, 1, 0])


class TestRuleMatches:
    def test_paper_rule_fires_on_address_110(self):
        rule = parse_rule(CFG, PAPER_RULE_TEXT)
        assert rule_matches(rule, input_with(CFG, 0b110, {}), CFG)

    def test_paper_rule_rejects_address_010(self):
        rule = parse_rule(CFG, PAPER_RULE_TEXT)
        assert not rule_matches(rule, input_with(CFG, 0b010, {}), CFG)

    def test_empty_conditions_match_every_row(self):
        rule = Rule((), 0)
        assert all(rule_matches(rule, row) for row in range(CFG.rows))

    def test_negated_condition_semantics(self):
        # !A2=0 holds iff A2 != 0
        rule = Rule((Condition(bit_index(CFG, "A2"), 0, negated=True),), 0)
        assert rule_matches(rule, input_with(CFG, 0b100, {}), CFG)
        assert not rule_matches(rule, input_with(CFG, 0b000, {}), CFG)


class TestEvaluateRuleSet:
    def test_perfect_eight_rule_set_scores_full_table(self):
        rs = perfect_rule_set(CFG)
        assert evaluate_rule_set(CFG, rs) == 2048
        assert naive_correct_count(CFG, rs) == 2048

    def test_empty_rule_set_scores_half_the_table(self):
        assert evaluate_rule_set(CFG, RuleSet(())) == 1024

    def test_single_unconditional_rule_outputs_d0(self):
        rs = RuleSet((Rule((), 0),))
        assert evaluate_rule_set(CFG, rs) == naive_correct_count(CFG, rs)

    def test_first_match_wins_order_sensitivity(self):
        narrow = parse_rule(CFG, "<A0=0 & A1=1 & !A2=0> -> D6")
        broad = Rule((), 0)
        first_narrow = evaluate_rule_set(CFG, RuleSet((narrow, broad)))
        first_broad = evaluate_rule_set(CFG, RuleSet((broad, narrow)))
        assert first_narrow != first_broad  # the broad rule shadows the narrow one

    def test_bitsliced_matches_naive_oracle_on_random_rule_sets(self):
        rng = Random(5)
        dom = MultiplexerDomain(3)
        genome = dom.random_genome(rng)
        for i in range(60):
            genome = dom.mutate(genome, rng)
            if i % 10 == 0:
                assert evaluate_rule_set(CFG, genome) == naive_correct_count(CFG, genome)

    def test_evaluation_is_pure(self):
        rng = Random(9)
        dom = MultiplexerDomain(3)
        genome = dom.random_genome(rng)
        assert dom.evaluate(genome) == dom.evaluate(genome)

    def test_or_completeness_two_rules_same_action(self):
        a = parse_rule(CFG, "<A0=0> -> D3")
        b = parse_rule(CFG, "<A1=1> -> D3")
        full = (1 << CFG.rows) - 1
        col_a = rule_match_column(CFG, a)
        col_b = rule_match_column(CFG, b)
        either = rule_match_column(CFG, Rule((), 3))  # matches everything
        # rows matched by the pair = union of their match sets
        assert (col_a | col_b) == (col_a | col_b) & either
        # prediction of [a, b] equals prediction of one rule matching the union
        rs_pair = RuleSet((a, b))
        data_col = rule_match_column(CFG, Rule((), 0))  # all-ones helper
        for row in range(0, CFG.rows, 37):
            fires_pair = rule_matches(a, row) or rule_matches(b, row)
            assert fires_pair == bool((col_a | col_b) >> row & 1)


class TestConfig:
    def test_default_eleven_multiplexer_dimensions(self):
        assert CFG.data_bits == 8
        assert CFG.total_bits == 11
        assert CFG.rows == 2048

    def test_search_space_is_conceptual_only(self):
        # 2^2048 candidate functions, but evaluation touches exactly 2048 rows
        assert (1 << CFG.rows).bit_length() == 2049

    def test_u_must_be_positive(self):
        with pytest.raises(ValueError):
            MuxConfig(0)


class TestOperators:
    def test_limits_hold_under_mutation_sweep(self):
        rng = Random(17)
        dom = MultiplexerDomain(3)
        genome = dom.random_genome(rng)
        for _ in range(10_000):
            genome = dom.mutate(genome, rng)
            assert len(genome.rules) <= MAX_RULES
            for rule in genome.rules:
                assert len(rule.conditions) <= MAX_CONDITIONS
                assert 0 <= rule.action < CFG.data_bits
                for cond in rule.conditions:
                    assert 0 <= cond.bit < CFG.total_bits
                    assert cond.value in (0, 1)

    def test_delete_on_single_rule_set_can_empty_it(self):
        rng = Random(2)
        dom = MultiplexerDomain(3)
        single = RuleSet((Rule((), 0),))
        assert any(not dom.mutate(single, rng).rules for _ in range(60))

    def test_mutating_empty_rule_set_adds_a_rule(self):
        rng = Random(3)
        dom = MultiplexerDomain(3)
        child = dom.mutate(RuleSet(()), rng)
        assert len(child.rules) == 1

    def test_crossover_clips_to_rule_limit(self):
        rng = Random(4)
        dom = MultiplexerDomain(3)
        full = RuleSet(tuple(Rule((), 0) for _ in range(MAX_RULES)))
        for _ in range(100):
            child = dom.crossover(full, full, rng)
            assert len(child.rules) <= MAX_RULES

    def test_crossover_of_empty_parents(self):
        rng = Random(5)
        dom = MultiplexerDomain(3)
        assert dom.crossover(RuleSet(()), RuleSet(()), rng).rules == ()


class TestSerialization:
    def test_paper_rule_round_trip(self):
        rule = parse_rule(CFG, PAPER_RULE_TEXT)
        assert format_rule(CFG, rule) == PAPER_RULE_TEXT

    def test_rule_set_round_trip(self):
        rng = Random(21)
        dom = MultiplexerDomain(3)
        genome = dom.random_genome(rng)
        for _ in range(30):
            genome = dom.mutate(genome, rng)
        text = format_rule_set(CFG, genome)
        assert parse_rule_set(CFG, text) == genome

    def test_rule_limits_validated(self):
        with pytest.raises(ValueError):
            RuleSet(tuple(Rule((), 0) for _ in range(MAX_RULES + 1)))
        with pytest.raises(ValueError):
            Rule(tuple(Condition(0, 0) for _ in range(MAX_CONDITIONS + 1)), 0)

    def test_malformed_rule_rejected(self):
        with pytest.raises(ValueError):
            parse_rule(CFG, "<A0=2> -> D1")
        with pytest.raises(ValueError):
            parse_rule(CFG, "A0=1 -> D1")


class TestDomainContract:
    def test_solution_is_full_table(self):
        dom = MultiplexerDomain(3)
        assert dom.is_solution(2048)
        assert not dom.is_solution(2047)

    def test_genome_size_counts_rules(self):
        dom = MultiplexerDomain(3)
        assert dom.genome_size(perfect_rule_set(CFG)) == 8

    def test_worst_fitness(self):
        assert MultiplexerDomain(3).worst_fitness() == 0
