"""Rule-list genome for boolean multiplexer discovery.

A candidate is an ordered list of condition->action rules over the multiplexer
input bits (u address bits A_i, 2^u data bits D_j). Prediction is first match
wins, default 0 on no match. Evaluation enumerates the whole 2^(u+2^u)-row
truth table, bitsliced into single big integers (row r of every per-bit column
is packed at bit position r), so a rule costs one bitwise op per condition.
"""
from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from random import Random


@dataclass(frozen=True)
class MuxConfig:
    u: int = 3

    def __post_init__(self) -> None:
        if self.u < 1:
            raise ValueError("u must be >= 1")

    @property
    def data_bits(self) -> int:
        return 1 << self.u

    @property
    def total_bits(self) -> int:
        return self.u + (1 << self.u)

    @property
    def rows(self) -> int:
        return 1 << self.total_bits


# Input-bit indexing: 0..data_bits-1 are D_0..D_{2^u-1}; data_bits..total_bits-1
# are A_0..A_{u-1}. A row of the truth table is the integer whose bit b is
# input bit b, so row ints double as input vectors.


def bit_name(cfg: MuxConfig, bit: int) -> str:
    if bit < cfg.data_bits:
        return f"D{bit}"
    return f"A{bit - cfg.data_bits}"


def bit_index(cfg: MuxConfig, name: str) -> int:
    kind, num = name[0], int(name[1:])
    if kind == "D":
        if not 0 <= num < cfg.data_bits:
            raise ValueError(f"no data bit {name}")
        return num
    if kind == "A":
        if not 0 <= num < cfg.u:
            raise ValueError(f"no address bit {name}")
        return cfg.data_bits + num
    raise ValueError(f"bad bit reference {name!r}")


MAX_RULES = 256
MAX_CONDITIONS = 64


@dataclass(frozen=True)
class Condition:
    bit: int
    value: int
    negated: bool = False


@dataclass(frozen=True)
class Rule:
    conditions: tuple[Condition, ...]
    action: int  # data-bit index whose value the rule outputs

    def __post_init__(self) -> None:
        if len(self.conditions) > MAX_CONDITIONS:
            raise ValueError(f"rule exceeds {MAX_CONDITIONS} conditions")


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]

    def __post_init__(self) -> None:
        if len(self.rules) > MAX_RULES:
            raise ValueError(f"rule set exceeds {MAX_RULES} rules")


def format_rule(cfg: MuxConfig, rule: Rule) -> str:
    conds = " & ".join(
        f"{'!' if c.negated else ''}{bit_name(cfg, c.bit)}={c.value}" for c in rule.conditions
    )
    return f"<{conds}> -> D{rule.action}"


def format_rule_set(cfg: MuxConfig, rs: RuleSet) -> str:
    return "; ".join(format_rule(cfg, r) for r in rs.rules)


_COND_RE = re.compile(r"^\s*(!?)([AD]\d+)\s*=\s*([01])\s*$")
_RULE_RE = re.compile(r"^\s*<(.*?)>\s*->\s*D(\d+)\s*$")


def parse_rule(cfg: MuxConfig, text: str) -> Rule:
    m = _RULE_RE.match(text)
    if not m:
        raise ValueError(f"malformed rule: {text!r}")
    body, action = m.group(1), int(m.group(2))
    conditions = []
    if body.strip():
        for part in body.split("&"):
            cm = _COND_RE.match(part)
            if not cm:
                raise ValueError(f"malformed condition {part!r} in {text!r}")
            conditions.append(
                Condition(bit=bit_index(cfg, cm.group(2)), value=int(cm.group(3)), negated=cm.group(1) == "!")
            )
    if not 0 <= action < cfg.data_bits:
        raise ValueError(f"action D{action} out of range")
    return Rule(tuple(conditions), action)


def parse_rule_set(cfg: MuxConfig, text: str) -> RuleSet:
    text = text.strip()
    if not text:
        return RuleSet(())
    return RuleSet(tuple(parse_rule(cfg, part) for part in text.split(";")))


def mux_truth(cfg: MuxConfig, input_bits) -> int:
    """Value of the data bit singled out by the address bits."""
    if isinstance(input_bits, int):
        row = input_bits
    else:
        if len(input_bits) != cfg.total_bits:
            raise ValueError(f"expected {cfg.total_bits} input bits, got {len(input_bits)}")
        row = sum(int(b) << i for i, b in enumerate(input_bits))
    addr = (row >> cfg.data_bits) & (cfg.data_bits - 1)
    return (row >> addr) & 1


def _condition_holds(cond: Condition, row: int) -> bool:
    bit = (row >> cond.bit) & 1
    return (bit == cond.value) != cond.negated


def rule_matches(rule: Rule, input_bits, cfg: MuxConfig | None = None) -> bool:
    """True iff every condition holds; an empty condition list matches everything."""
    if isinstance(input_bits, int):
        row = input_bits
    else:
        if cfg is not None and len(input_bits) != cfg.total_bits:
            raise ValueError(f"expected {cfg.total_bits} input bits, got {len(input_bits)}")
        row = sum(int(b) << i for i, b in enumerate(input_bits))
    return all(_condition_holds(c, row) for c in rule.conditions)


@functools.lru_cache(maxsize=4)
def _tables(u: int) -> tuple[tuple[int, ...], int, int]:
    """Per-bit column masks, the truth-table column, and the all-rows mask."""
    cfg = MuxConfig(u)
    bits = [0] * cfg.total_bits
    truth = 0
    for row in range(cfg.rows):
        for b in range(cfg.total_bits):
            if (row >> b) & 1:
                bits[b] |= 1 << row
        if mux_truth(cfg, row):
            truth |= 1 << row
    return tuple(bits), truth, (1 << cfg.rows) - 1


def rule_match_column(cfg: MuxConfig, rule: Rule) -> int:
    """Bit r set iff the rule matches row r."""
    bits, _, full = _tables(cfg.u)
    col = full
    for c in rule.conditions:
        want_one = (c.value == 1) != c.negated
        col &= bits[c.bit] if want_one else full & ~bits[c.bit]
        if not col:
            break
    return col


def evaluate_rule_set(cfg: MuxConfig, rs: RuleSet) -> int:
    """Number of truth-table rows predicted correctly (first match wins, default 0)."""
    bits, truth, full = _tables(cfg.u)
    remaining = full
    predicted_ones = 0
    for rule in rs.rules:
        fired = rule_match_column(cfg, rule) & remaining
        if fired:
            predicted_ones |= fired & bits[rule.action]
            remaining &= ~fired
            if not remaining:
                break
    correct = ~(predicted_ones ^ truth) & full
    return correct.bit_count()


class MultiplexerDomain:
    """Domain adapter for rule-based multiplexer discovery."""

    def __init__(self, u: int = 3):
        self.name = "mux"
        self.cfg = MuxConfig(u)

    def _random_condition(self, rng: Random) -> Condition:
        return Condition(
            bit=rng.randrange(self.cfg.total_bits),
            value=rng.randrange(2),
            negated=bool(rng.randrange(2)),
        )

    def _random_rule(self, rng: Random) -> Rule:
        return Rule((self._random_condition(rng),), rng.randrange(self.cfg.data_bits))

    def random_genome(self, rng: Random) -> RuleSet:
        # evolution starts from minimal single-condition candidates and grows them
        return RuleSet((self._random_rule(rng),))

    def mutate(self, genome: RuleSet, rng: Random) -> RuleSet:
        rules = [list(r.conditions) for r in genome.rules]
        actions = [r.action for r in genome.rules]
        ops = []
        if len(rules) < MAX_RULES:
            ops.append("add_rule")
        if rules:
            ops.extend(["delete_rule", "change_action"])
            if any(len(c) < MAX_CONDITIONS for c in rules):
                ops.append("add_condition")
            if any(c for c in rules):
                ops.extend(["delete_condition", "flip_condition"])
        op = rng.choice(ops)
        if op == "add_rule":
            r = self._random_rule(rng)
            pos = rng.randrange(len(rules) + 1)
            rules.insert(pos, list(r.conditions))
            actions.insert(pos, r.action)
        elif op == "delete_rule":
            pos = rng.randrange(len(rules))
            del rules[pos]
            del actions[pos]
        elif op == "change_action":
            pos = rng.randrange(len(rules))
            actions[pos] = rng.randrange(self.cfg.data_bits)
        elif op == "add_condition":
            pos = rng.choice([i for i, c in enumerate(rules) if len(c) < MAX_CONDITIONS])
            rules[pos].insert(rng.randrange(len(rules[pos]) + 1), self._random_condition(rng))
        elif op == "delete_condition":
            pos = rng.choice([i for i, c in enumerate(rules) if c])
            del rules[pos][rng.randrange(len(rules[pos]))]
        else:  # flip_condition
            pos = rng.choice([i for i, c in enumerate(rules) if c])
            ci = rng.randrange(len(rules[pos]))
            c = rules[pos][ci]
            if rng.randrange(2):
                rules[pos][ci] = Condition(c.bit, 1 - c.value, c.negated)
            else:
                rules[pos][ci] = Condition(c.bit, c.value, not c.negated)
        return RuleSet(tuple(Rule(tuple(c), a) for c, a in zip(rules, actions)))

    def crossover(self, a: RuleSet, b: RuleSet, rng: Random) -> RuleSet:
        # splice a random contiguous span of b's rules into a random cut span of a
        i1 = rng.randint(0, len(a.rules))
        i2 = rng.randint(i1, len(a.rules))
        j1 = rng.randint(0, len(b.rules))
        j2 = rng.randint(j1, len(b.rules))
        rules = (a.rules[:i1] + b.rules[j1:j2] + a.rules[i2:])[:MAX_RULES]
        return RuleSet(rules)

    def evaluate(self, genome: RuleSet) -> int:
        return evaluate_rule_set(self.cfg, genome)

    def is_solution(self, fitness: int) -> bool:
        return fitness == self.cfg.rows

    def genome_size(self, genome: RuleSet) -> int:
        return len(genome.rules)

    def worst_fitness(self) -> int:
        return 0

    def genome_key(self, genome: RuleSet) -> str:
        return format_rule_set(self.cfg, genome)

    def fitness_str(self, fitness: int) -> str:
        return str(fitness)
