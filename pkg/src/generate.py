"""Random rule-set construction for population initialization and mutation."""

from src.errors import InvalidParams
from src.intervals import classify, term_interval
from src.rules import OPERATORS, POWERS, Action, Condition, Constant, Rule, RuleSet, Term
from src.schema import BINARY

MAX_TRIES = 50


def random_coefficient(rng):
    return round(rng.randint(1, 100) / 100.0, 2)


def random_certainty(rng, params):
    if not params.use_certainty:
        return 1.0
    return random_coefficient(rng)


def random_action(actions, rng, params, exclude=None):
    choices = [a for a in actions if a != exclude] or list(actions)
    return Action(rng.choice(choices), random_certainty(rng, params))


def random_term(schema, rng, max_lag=0, feature=None):
    if feature is None:
        feature = rng.choice(schema.names)
    spec = schema.spec(feature)
    # powers are pointless on 0/1 features
    power = 1 if spec.kind == BINARY else rng.choice(POWERS)
    lag = rng.randint(0, max_lag) if max_lag > 0 else 0
    return Term(random_coefficient(rng), feature, power, lag)


def random_constant(term, schema, rng):
    spec = schema.spec(term.feature)
    iv = term_interval(term, schema)
    value = round(rng.uniform(iv.low, iv.high), 2)
    return Constant(value, (spec.min, spec.max))


def random_trailing(leading, schema, rng, max_lag=0, as_constant=None):
    if as_constant is None:
        as_constant = rng.random() < 0.5 or len(schema) == 1
    if as_constant:
        return random_constant(leading, schema, rng)
    return random_term(schema, rng, max_lag)


def random_condition(schema, rng, max_lag=0):
    """A condition that is neither a tautology nor a falsehood."""
    for _ in range(MAX_TRIES):
        leading = random_term(schema, rng, max_lag)
        cond = Condition(leading, rng.choice(OPERATORS),
                         random_trailing(leading, schema, rng, max_lag))
        if classify(cond, schema) is None:
            return cond
    raise InvalidParams("could not generate a satisfiable condition; "
                        "check the feature ranges in the schema")


def random_rule(schema, actions, params, rng, num_conditions=None):
    if num_conditions is None:
        num_conditions = rng.randint(1, min(params.initial_conditions,
                                            params.max_conditions))
    conditions = tuple(random_condition(schema, rng, params.max_lag)
                       for _ in range(num_conditions))
    return Rule(conditions, random_action(actions, rng, params))


def random_ruleset(schema, actions, params, rng):
    if params.max_rules < 0 or params.max_conditions < 1 or params.max_lag < 0:
        raise InvalidParams("max_rules >= 0, max_conditions >= 1, max_lag >= 0 required")
    if params.max_lag > schema.max_lag:
        raise InvalidParams(f"max_lag {params.max_lag} exceeds schema max_lag "
                            f"{schema.max_lag}")
    if not actions:
        raise InvalidParams("at least one action is required")
    num_rules = rng.randint(0, min(params.initial_rules, params.max_rules))
    rules = tuple(random_rule(schema, actions, params, rng) for _ in range(num_rules))
    return RuleSet(rules, random_action(actions, rng, params))
