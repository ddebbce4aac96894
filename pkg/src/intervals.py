"""Interval arithmetic over declared feature ranges.

Used to recognise conditions that hold everywhere (tautologies) or nowhere
(falsehoods) on the product of feature ranges. A lagged value has the same
range as the current one, so lags are ignored here.
"""

from dataclasses import dataclass

from src.rules import Condition, Term, term_value

TAUTOLOGY = "tautology"
FALSEHOOD = "falsehood"


@dataclass(frozen=True)
class Interval:
    low: float
    high: float

    def __sub__(self, other):
        return Interval(self.low - other.high, self.high - other.low)

    def contains(self, x):
        return self.low <= x <= self.high


def power_interval(iv, power):
    lo, hi = iv.low ** power, iv.high ** power
    if power % 2 == 0 and iv.low < 0 < iv.high:
        return Interval(0.0, max(lo, hi))
    return Interval(min(lo, hi), max(lo, hi))


def term_interval(term: Term, schema) -> Interval:
    spec = schema.spec(term.feature)
    # computed through term_value so endpoint arithmetic matches evaluation
    xs = power_interval(Interval(spec.min, spec.max), term.power)
    a = term_value(term.coefficient, xs.low, 1)
    b = term_value(term.coefficient, xs.high, 1)
    return Interval(min(a, b), max(a, b))


def _same_variable(a: Term, b: Term):
    return a.feature == b.feature and a.power == b.power and a.lag == b.lag


def difference_interval(cond: Condition, schema) -> Interval:
    """Range of leading - trailing over the declared ranges."""
    lead = term_interval(cond.leading, schema)
    if isinstance(cond.trailing, Term):
        if _same_variable(cond.leading, cond.trailing):
            # one variable on both sides: (c1 - c2) * x^p exactly
            c = cond.leading.coefficient - cond.trailing.coefficient
            xs = power_interval(Interval(schema.spec(cond.leading.feature).min,
                                         schema.spec(cond.leading.feature).max),
                                cond.leading.power)
            ends = (c * xs.low, c * xs.high)
            return Interval(min(ends), max(ends))
        return lead - term_interval(cond.trailing, schema)
    v = cond.trailing.value
    return Interval(lead.low - v, lead.high - v)


def _bounds(cond, schema):
    # (low, high) of leading and trailing sides, for direct comparisons
    lead = term_interval(cond.leading, schema)
    if isinstance(cond.trailing, Term):
        trail = term_interval(cond.trailing, schema)
    else:
        trail = Interval(cond.trailing.value, cond.trailing.value)
    return lead, trail


def classify(cond: Condition, schema):
    """TAUTOLOGY, FALSEHOOD, or None when the condition depends on the input."""
    if isinstance(cond.trailing, Term) and cond.leading == cond.trailing:
        return TAUTOLOGY if cond.operator in ("<=", ">=") else FALSEHOOD

    if isinstance(cond.trailing, Term) and _same_variable(cond.leading, cond.trailing):
        d = difference_interval(cond, schema)
        return _classify_difference(d, cond.operator)

    # compare endpoints directly (not via subtraction) so the verdict agrees
    # with evaluation at the extreme points
    lead, trail = _bounds(cond, schema)
    op = cond.operator
    if op == "<":
        if lead.high < trail.low:
            return TAUTOLOGY
        if lead.low >= trail.high:
            return FALSEHOOD
    elif op == "<=":
        if lead.high <= trail.low:
            return TAUTOLOGY
        if lead.low > trail.high:
            return FALSEHOOD
    elif op == ">":
        if lead.low > trail.high:
            return TAUTOLOGY
        if lead.high <= trail.low:
            return FALSEHOOD
    elif op == ">=":
        if lead.low >= trail.high:
            return TAUTOLOGY
        if lead.high < trail.low:
            return FALSEHOOD
    return None


def _classify_difference(d, op):
    if op == "<":
        return TAUTOLOGY if d.high < 0 else FALSEHOOD if d.low >= 0 else None
    if op == "<=":
        return TAUTOLOGY if d.high <= 0 else FALSEHOOD if d.low > 0 else None
    if op == ">":
        return TAUTOLOGY if d.low > 0 else FALSEHOOD if d.high <= 0 else None
    return TAUTOLOGY if d.low >= 0 else FALSEHOOD if d.high < 0 else None
