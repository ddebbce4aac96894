"""Text form of rule sets: a hand-written parser and the canonical printer.

Canonical text, one rule per line:

    1. 0.11*velocity.of.cart^3 < 0.87*angle.of.pole -> LEFT
    2. 0.17*next.pipe.top.y <= 84.48 [0.0..192.0] & 0.95*player.y(1) > 0.5*x -> 0.21*FLAP
    DEFAULT -> RIGHT

The parser also reads the looser notation found in hand-written rule sets:
parenthesised conditions, AND, unicode operators and arrows, omitted
coefficients, bracket lags (Mean[4]) and unit suffixes on constants.
"""

import re

from src.errors import (CoefficientOutOfRange, RuleSyntaxError, UnknownAction,
                        UnknownFeature)
from src.rules import POWERS, Action, Condition, Constant, Rule, RuleSet, Term
from src.schema import NAME_PATTERN

_NUMBER = re.compile(r"[-+]?(?:\d+(?:\.\d+)?|\.\d+)(?:[eE][-+]?\d+)?")
_INT = re.compile(r"\d+")
_UNIT = re.compile(r"[A-Za-z%]+")
_ACTION = re.compile(r"[A-Za-z0-9_][A-Za-z0-9._/\-]*")
_NUMBERING = re.compile(r"\s*\d+\.(?=\s|\()")
_DEFAULT = re.compile(r"\s*default(?:\s+action)?\s*(?=->|→)", re.IGNORECASE)

_OPERATORS = (("<=", "<="), (">=", ">="), ("≤", "<="), ("≥", ">="),
              ("=<", "<="), ("=>", ">="), ("<", "<"), (">", ">"))
_ARROWS = ("->", "→")
_AND = ("&&", "&", "∧")


class _LineParser:
    def __init__(self, text, lineno, schema, actions):
        self.text = text
        self.lineno = lineno
        self.schema = schema
        self.actions = actions
        self.pos = 0

    def error(self, message, pos=None):
        col = (self.pos if pos is None else pos) + 1
        return RuleSyntaxError(message, self.lineno, col)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, literal):
        self.skip_ws()
        return self.text.startswith(literal, self.pos)

    def accept(self, literal):
        if self.peek(literal):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal):
        if not self.accept(literal):
            raise self.error(f"expected {literal!r}")

    def at_end(self):
        self.skip_ws()
        return self.pos >= len(self.text)

    def match(self, pattern):
        self.skip_ws()
        m = pattern.match(self.text, self.pos)
        if m:
            self.pos = m.end()
        return m

    def accept_keyword(self, word):
        self.skip_ws()
        end = self.pos + len(word)
        if (self.text[self.pos:end].upper() == word
                and (end >= len(self.text) or not self.text[end].isalnum())):
            self.pos = end
            return True
        return False

    def number(self):
        m = self.match(_NUMBER)
        if not m:
            raise self.error("expected a number")
        return float(m.group())

    # grammar

    def rule(self):
        conditions = [self.condition()]
        while True:
            if any(self.accept(tok) for tok in _AND) or self.accept_keyword("AND"):
                conditions.append(self.condition())
            else:
                break
        self.arrow()
        action = self.action()
        if not self.at_end():
            raise self.error("unexpected trailing text")
        return Rule(tuple(conditions), action)

    def default(self):
        self.arrow()
        action = self.action()
        if not self.at_end():
            raise self.error("unexpected trailing text")
        return action

    def arrow(self):
        for tok in _ARROWS:
            if self.accept(tok):
                return
        raise self.error("expected '->'")

    def condition(self):
        if self.accept("("):
            cond = self.condition_body()
            self.expect(")")
            return cond
        return self.condition_body()

    def condition_body(self):
        leading = self.term()
        operator = self.operator()
        self.skip_ws()
        start = self.pos
        if self.text[start:start + 1].isalpha():
            return Condition(leading, operator, self.term())
        m = _NUMBER.match(self.text, start)
        if not m:
            raise self.error("expected a term or a constant")
        rest = self.text[m.end():].lstrip()
        if rest.startswith("*"):
            return Condition(leading, operator, self.term())
        self.pos = m.end()
        value = float(m.group())
        # unit suffix written against the number, e.g. 72.75mmHg
        unit = _UNIT.match(self.text, self.pos)
        if unit:
            self.pos = unit.end()
        self.range_annotation()
        spec = self.schema.spec(leading.feature)
        return Condition(leading, operator, Constant(value, (spec.min, spec.max)))

    def range_annotation(self):
        # "[0..192.0]" after a constant echoes the declared range; informational
        if not self.peek("["):
            return
        self.expect("[")
        self.number()
        self.expect("..")
        self.number()
        self.expect("]")

    def operator(self):
        self.skip_ws()
        for tok, op in _OPERATORS:
            if self.text.startswith(tok, self.pos):
                self.pos += len(tok)
                return op
        raise self.error("expected one of <, <=, >, >=")

    def coefficient(self, what):
        start = self.pos
        value = self.number()
        # genomes live on the 0.01 grid the printer writes
        snapped = round(value, 2)
        if not 0.0 < value <= 1.0 or snapped == 0.0:
            raise CoefficientOutOfRange(
                f"line {self.lineno}, column {start + 1}: "
                f"{what} {value} outside [0.01, 1.00]")
        value = snapped
        self.expect("*")
        return value

    def term(self):
        self.skip_ws()
        coefficient = 1.0
        if _NUMBER.match(self.text, self.pos):
            coefficient = self.coefficient("coefficient")
        name = self.feature_name()
        power = 1
        if self.accept("^"):
            start = self.pos
            m = self.match(_INT)
            if not m or int(m.group()) not in POWERS:
                raise self.error("power must be 1, 2 or 3", start)
            power = int(m.group())
        lag = self.lag()
        return Term(coefficient, name, power, lag)

    def feature_name(self):
        self.skip_ws()
        start = self.pos
        m = NAME_PATTERN.match(self.text, start)
        if not m:
            raise self.error("expected a feature name")
        word = m.group()
        # names may contain ')' and '[', so the longest known prefix wins
        # when the remainder is punctuation, e.g. "angle)" or "Mean[4"
        for end in range(len(word), 0, -1):
            prefix = word[:end]
            if prefix in self.schema and (end == len(word) or word[end] in ")["):
                self.pos = start + end
                return prefix
        raise UnknownFeature(
            f"line {self.lineno}, column {start + 1}: unknown feature "
            f"{word.rstrip(')[')!r}")

    def lag(self):
        start = self.pos
        for open_, close in (("(", ")"), ("[", "]")):
            if self.text.startswith(open_, self.pos):
                m = _INT.match(self.text, self.pos + 1)
                if not m or not self.text.startswith(close, m.end()):
                    return 0
                lag = int(m.group())
                if lag > self.schema.max_lag:
                    raise self.error(
                        f"lag {lag} exceeds max_lag {self.schema.max_lag}", start)
                self.pos = m.end() + 1
                return lag
        return 0

    def action(self):
        self.skip_ws()
        certainty = 1.0
        m = _NUMBER.match(self.text, self.pos)
        if m and self.text[m.end():].lstrip().startswith("*"):
            certainty = self.coefficient("certainty")
        m = self.match(_ACTION)
        if not m:
            raise self.error("expected an action")
        name = m.group()
        if self.actions and name not in self.actions:
            raise UnknownAction(
                f"line {self.lineno}, column {m.start() + 1}: unknown action {name!r}")
        return Action(name, certainty)


def _continues(line):
    tail = line.rstrip()
    return tail.endswith(_AND) or tail.upper().endswith(" AND")


def _logical_lines(text):
    # a rule may wrap after a conjunction; the pieces join into one line
    pending, start = None, 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if pending is not None:
            line = pending + " " + line.strip()
        else:
            start = lineno
        if _continues(line):
            pending = line
            continue
        pending = None
        yield start, line
    if pending is not None:
        raise RuleSyntaxError("rule ends with a dangling conjunction", start,
                              len(pending))


def parse(text, schema, actions=None):
    """Parse rule text into a RuleSet; actions default to schema.actions."""
    actions = tuple(actions if actions is not None else schema.actions)
    rules = []
    default = None
    for lineno, line in _logical_lines(text):
        if default is not None:
            raise RuleSyntaxError("rules after the default rule", lineno, 1)
        numbering = _NUMBERING.match(line)
        offset = numbering.end() if numbering else 0
        p = _LineParser(line, lineno, schema, actions)
        p.pos = offset
        m = _DEFAULT.match(line, offset)
        if m:
            p.pos = m.end()
            default = p.default()
        else:
            rules.append(p.rule())
    if default is None:
        raise RuleSyntaxError("missing DEFAULT rule", len(text.splitlines()) + 1, 1)
    return RuleSet(tuple(rules), default)


def _num(value):
    return repr(float(value))


def render_term(term):
    text = f"{term.coefficient:.2f}*{term.feature}"
    if term.power != 1:
        text += f"^{term.power}"
    if term.lag:
        text += f"({term.lag})"
    return text


def render_condition(cond):
    lhs = render_term(cond.leading)
    if isinstance(cond.trailing, Term):
        rhs = render_term(cond.trailing)
    else:
        lo, hi = cond.trailing.declared_range
        rhs = f"{_num(cond.trailing.value)} [{_num(lo)}..{_num(hi)}]"
    return f"{lhs} {cond.operator} {rhs}"


def render_action(action):
    if action.certainty != 1.0:
        return f"{action.certainty:.2f}*{action.name}"
    return action.name


def render(rs, header=None):
    lines = []
    if header:
        lines.extend(f"# {line}" for line in header.splitlines())
    for i, rule in enumerate(rs.rules, start=1):
        body = " & ".join(render_condition(c) for c in rule.conditions)
        lines.append(f"{i}. {body} -> {render_action(rule.action)}")
    lines.append(f"DEFAULT -> {render_action(rs.default_action)}")
    return "\n".join(lines) + "\n"


def load_rules(path, schema, actions=None):
    with open(path, "r") as f:
        return parse(f.read(), schema, actions)


def save_rules(rs, path, header=None):
    with open(path, "w") as f:
        f.write(render(rs, header))
