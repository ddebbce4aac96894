"""Rule-set genome and its evaluation semantics.

A RuleSet is an ordered list of rules plus a default action. Each rule is a
conjunction of conditions; each condition compares a scaled, powered and
lagged feature term against another term or a constant.
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Union

from src.errors import InsufficientHistory

FIRST_MATCH = "first_match"
HARD_MAX = "hard_max"
ALL_MATCHED = "all_matched"
MODES = (FIRST_MATCH, HARD_MAX, ALL_MATCHED)

OPERATORS = ("<", "<=", ">", ">=")
POWERS = (1, 2, 3)


@dataclass(frozen=True)
class Term:
    coefficient: float
    feature: str
    power: int = 1
    lag: int = 0


@dataclass(frozen=True)
class Constant:
    value: float
    # declared (min, max) of the leading term's feature, echoed on render
    declared_range: tuple = (0.0, 1.0)


@dataclass(frozen=True)
class Condition:
    leading: Term
    operator: str
    trailing: Union[Term, Constant]

    @property
    def features(self):
        if isinstance(self.trailing, Term):
            return (self.leading.feature, self.trailing.feature)
        return (self.leading.feature,)


@dataclass(frozen=True)
class Action:
    name: str
    certainty: float = 1.0


@dataclass(frozen=True)
class Rule:
    conditions: tuple
    action: Action
    times_applied: int = field(default=0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "conditions", tuple(self.conditions))


@dataclass(frozen=True)
class RuleSet:
    rules: tuple
    default_action: Action

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))

    def __len__(self):
        return len(self.rules)

    @property
    def num_conditions(self):
        return sum(len(r.conditions) for r in self.rules)

    @property
    def size(self):
        return len(self.rules), self.num_conditions

    @property
    def times_applied(self):
        return tuple(r.times_applied for r in self.rules)

    def with_counts(self, counts):
        """Copy of the rule set carrying a times_applied snapshot."""
        rules = tuple(
            replace(rule, times_applied=counts.rules[i])
            for i, rule in enumerate(self.rules)
        )
        return RuleSet(rules, self.default_action)

    def with_rules(self, rules):
        return RuleSet(tuple(rules), self.default_action)

    def actions_used(self):
        names = [r.action.name for r in self.rules]
        names.append(self.default_action.name)
        return set(names)


@dataclass
class InputFrame:
    """Feature history, most recent vector last; lag t reads history[-1 - t]."""
    schema: object
    history: list


@dataclass
class ActionOutcome:
    action: Action
    # all_matched: every matched action in firing order, default last
    actions: tuple = ()
    matched: tuple = field(default=(), compare=False)

    def prescribed(self):
        """Distinct actions in firing order."""
        return tuple(dict.fromkeys(self.actions))


class ApplicationCounts:
    """Evaluation-scoped times_applied counters; the last slot is the default."""

    def __init__(self, num_rules):
        self.rules = [0] * num_rules
        self.default = 0
        self.evaluations = 0

    def total(self):
        return sum(self.rules) + self.default

    def merge(self, other):
        if len(other.rules) != len(self.rules):
            raise ValueError("cannot merge counters of different rule sets")
        for i, n in enumerate(other.rules):
            self.rules[i] += n
        self.default += other.default
        self.evaluations += other.evaluations
        return self

    def as_tuple(self):
        return tuple(self.rules) + (self.default,)


def _value(frame, feature, lag):
    history = frame.history
    if lag >= len(history):
        raise InsufficientHistory(
            f"{feature}: lag {lag} needs {lag + 1} frames, have {len(history)}"
        )
    return history[-1 - lag][frame.schema.index(feature)]


def term_value(coefficient, x, power):
    # power binds to the raw value before the coefficient multiplies
    return coefficient * (x ** power)


def eval_term(term: Term, frame: InputFrame) -> float:
    x = _value(frame, term.feature, term.lag)
    return term_value(term.coefficient, x, term.power)


def compare(lhs, operator, rhs):
    if operator == "<":
        return lhs < rhs
    if operator == "<=":
        return lhs <= rhs
    if operator == ">":
        return lhs > rhs
    if operator == ">=":
        return lhs >= rhs
    raise ValueError(f"unknown operator: {operator}")


def eval_condition(cond: Condition, frame: InputFrame) -> bool:
    lhs = eval_term(cond.leading, frame)
    if isinstance(cond.trailing, Term):
        rhs = eval_term(cond.trailing, frame)
    else:
        rhs = cond.trailing.value
    return compare(lhs, cond.operator, rhs)


def rule_matches(rule: Rule, frame: InputFrame) -> bool:
    for cond in rule.conditions:
        if not eval_condition(cond, frame):
            return False
    return True


def eval_ruleset(rs: RuleSet, frame: InputFrame, mode: str = FIRST_MATCH,
                 counts: Optional[ApplicationCounts] = None) -> ActionOutcome:
    if counts is None:
        counts = ApplicationCounts(len(rs.rules))
    counts.evaluations += 1

    if mode == FIRST_MATCH:
        for i, rule in enumerate(rs.rules):
            if rule_matches(rule, frame):
                counts.rules[i] += 1
                return ActionOutcome(rule.action, (rule.action,), (i,))
        counts.default += 1
        return ActionOutcome(rs.default_action, (rs.default_action,), ())

    matched = [i for i, rule in enumerate(rs.rules) if rule_matches(rule, frame)]
    for i in matched:
        counts.rules[i] += 1

    if mode == HARD_MAX:
        best, best_index = None, None
        for i in matched:
            action = rs.rules[i].action
            # strict > keeps the earliest rule on ties; default is last
            if best is None or action.certainty > best.certainty:
                best, best_index = action, i
        if best is None or rs.default_action.certainty > best.certainty:
            best, best_index = rs.default_action, None
        if best_index is None:
            counts.default += 1
        return ActionOutcome(best, (best,), tuple(matched))

    if mode == ALL_MATCHED:
        actions = [rs.rules[i].action for i in matched]
        actions.append(rs.default_action)
        return ActionOutcome(actions[0], tuple(actions), tuple(matched))

    raise ValueError(f"unknown evaluation mode: {mode}")
