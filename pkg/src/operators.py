"""Genetic operators on rule sets: selection, crossover, mutation, pruning."""

from dataclasses import replace

from src.errors import EmptyParent, EmptyPopulation
from src.generate import (random_action, random_coefficient, random_condition,
                          random_constant, random_term)
from src.intervals import FALSEHOOD, TAUTOLOGY, classify
from src.rules import OPERATORS, POWERS, Condition, Constant, Rule, RuleSet, Term
from src.schema import BINARY

CONDITION_KINDS = ("coefficient", "feature", "power", "lag", "operator",
                   "trailing", "swap")
RULE_KINDS = ("add_condition", "remove_condition", "replace_condition",
              "change_action")
RULESET_KINDS = ("remove_rule", "change_default", "reorder_rules")
MUTATION_KINDS = CONDITION_KINDS + RULE_KINDS + RULESET_KINDS

SPLICE = "splice"
PRODUCT = "product"
CLONE = "clone"


def tournament_select(population, k, rng, objective=0):
    if not population:
        raise EmptyPopulation("cannot select from an empty population")
    if k < 1:
        raise ValueError("tournament size must be >= 1")
    best = None
    for _ in range(k):
        contender = rng.choice(population)
        if best is None or contender.fitness[objective] > best.fitness[objective]:
            best = contender
    return best


def crossover_splice(a, b, rng, max_rules=None):
    if not a.rules:
        rules = b.rules
    else:
        i = rng.randrange(len(a.rules))
        j = rng.randint(0, len(b.rules))
        rules = a.rules[:i] + b.rules[j:]
    if max_rules is not None:
        rules = rules[:max_rules]
    return RuleSet(rules, a.default_action)


def crossover_product(a, b, rng, cap, max_conditions=None):
    if not a.rules or not b.rules:
        raise EmptyParent("product crossover needs rules in both parents")
    pairs = [(i, j) for i in range(len(a.rules)) for j in range(len(b.rules))]
    if len(pairs) > cap:
        pairs = sorted(rng.sample(pairs, cap))
    rules = []
    for i, j in pairs:
        conditions = a.rules[i].conditions + b.rules[j].conditions
        if max_conditions is not None:
            conditions = conditions[:max_conditions]
        rules.append(Rule(conditions, b.rules[j].action))
    return RuleSet(tuple(rules), b.default_action)


def prune(rs, schema):
    """Drop tautological conditions and rules containing a falsehood."""
    rules = []
    changed = False
    for rule in rs.rules:
        kept = []
        first_tautology = None
        dead = False
        for cond in rule.conditions:
            verdict = classify(cond, schema)
            if verdict == FALSEHOOD:
                dead = True
                break
            if verdict == TAUTOLOGY:
                if first_tautology is None:
                    first_tautology = cond
                continue
            kept.append(cond)
        if dead:
            changed = True
            continue
        if not kept:
            # an always-true rule keeps one witness condition
            kept = [first_tautology]
        if len(kept) == len(rule.conditions):
            rules.append(rule)
        else:
            changed = True
            rules.append(replace(rule, conditions=tuple(kept)))
    if not changed:
        return rs
    return RuleSet(tuple(rules), rs.default_action)


def active_rules(rs):
    """Rules that fired at least once in the parent's last evaluation."""
    return RuleSet(tuple(r for r in rs.rules if r.times_applied > 0),
                   rs.default_action)


def reset_counts(rs):
    if not any(r.times_applied for r in rs.rules):
        return rs
    return RuleSet(tuple(replace(r, times_applied=0) for r in rs.rules),
                   rs.default_action)


# mutation

def _terms_of(cond):
    terms = [("leading", cond.leading)]
    if isinstance(cond.trailing, Term):
        terms.append(("trailing", cond.trailing))
    return terms


def _condition_targets(rs, kind, schema, params):
    targets = []
    for ri, rule in enumerate(rs.rules):
        for ci, cond in enumerate(rule.conditions):
            if kind == "power":
                if not any(schema.spec(t.feature).kind != BINARY
                           for _, t in _terms_of(cond)):
                    continue
            elif kind == "lag" and params.max_lag < 1:
                continue
            elif kind == "feature" and len(schema) < 2:
                continue
            targets.append((ri, ci))
    return targets


def applicable_kinds(rs, schema, actions, params):
    kinds = []
    if rs.rules:
        for kind in CONDITION_KINDS:
            if _condition_targets(rs, kind, schema, params):
                kinds.append(kind)
        if any(len(r.conditions) < params.max_conditions for r in rs.rules):
            kinds.append("add_condition")
        kinds.extend(["remove_condition", "replace_condition"])
        if len(actions) > 1 or params.use_certainty:
            kinds.append("change_action")
        kinds.append("remove_rule")
    if len(actions) > 1 or params.use_certainty:
        kinds.append("change_default")
    if len(rs.rules) >= 2:
        kinds.append("reorder_rules")
    return kinds


def _with_constant_for(leading, trailing, schema, rng):
    if isinstance(trailing, Constant):
        return random_constant(leading, schema, rng)
    return trailing


def _mutate_condition(cond, kind, schema, params, rng):
    if kind == "operator":
        return replace(cond, operator=rng.choice([o for o in OPERATORS
                                                  if o != cond.operator]))
    if kind == "swap":
        if isinstance(cond.trailing, Constant):
            return replace(cond, trailing=random_term(schema, rng, params.max_lag))
        return replace(cond, trailing=random_constant(cond.leading, schema, rng))
    if kind == "trailing":
        if isinstance(cond.trailing, Constant):
            return replace(cond, trailing=random_constant(cond.leading, schema, rng))
        return replace(cond, trailing=random_term(schema, rng, params.max_lag))

    terms = _terms_of(cond)
    if kind == "power":
        terms = [(s, t) for s, t in terms if schema.spec(t.feature).kind != BINARY]
    side, term = rng.choice(terms)
    if kind == "coefficient":
        new = replace(term, coefficient=random_coefficient(rng))
    elif kind == "feature":
        feature = rng.choice([n for n in schema.names if n != term.feature])
        power = 1 if schema.spec(feature).kind == BINARY else term.power
        new = replace(term, feature=feature, power=power)
    elif kind == "power":
        new = replace(term, power=rng.choice([p for p in POWERS if p != term.power]))
    elif kind == "lag":
        choices = [g for g in range(params.max_lag + 1) if g != term.lag]
        new = replace(term, lag=rng.choice(choices))
    else:
        raise ValueError(f"unknown condition mutation: {kind}")

    if side == "trailing":
        return replace(cond, trailing=new)
    # the constant follows the leading term's new range
    trailing = cond.trailing
    if kind in ("feature", "power", "coefficient"):
        trailing = _with_constant_for(new, trailing, schema, rng)
    return Condition(new, cond.operator, trailing)


def mutate_with_kind(rs, schema, actions, params, rng):
    """Apply one random mutation; returns (rule set, kind or None)."""
    kinds = applicable_kinds(rs, schema, actions, params)
    if not kinds:
        return rs, None
    kind = rng.choice(kinds)
    rules = list(rs.rules)
    default = rs.default_action

    if kind in CONDITION_KINDS:
        ri, ci = rng.choice(_condition_targets(rs, kind, schema, params))
        conditions = list(rules[ri].conditions)
        conditions[ci] = _mutate_condition(conditions[ci], kind, schema, params, rng)
        rules[ri] = replace(rules[ri], conditions=tuple(conditions))
    elif kind == "add_condition":
        ri = rng.choice([i for i, r in enumerate(rules)
                         if len(r.conditions) < params.max_conditions])
        cond = random_condition(schema, rng, params.max_lag)
        rules[ri] = replace(rules[ri], conditions=rules[ri].conditions + (cond,))
    elif kind == "remove_condition":
        ri = rng.randrange(len(rules))
        conditions = list(rules[ri].conditions)
        if len(conditions) == 1:
            # a rule needs at least one condition
            del rules[ri]
        else:
            del conditions[rng.randrange(len(conditions))]
            rules[ri] = replace(rules[ri], conditions=tuple(conditions))
    elif kind == "replace_condition":
        ri = rng.randrange(len(rules))
        conditions = list(rules[ri].conditions)
        conditions[rng.randrange(len(conditions))] = random_condition(
            schema, rng, params.max_lag)
        rules[ri] = replace(rules[ri], conditions=tuple(conditions))
    elif kind == "change_action":
        ri = rng.randrange(len(rules))
        action = random_action(actions, rng, params, exclude=rules[ri].action.name)
        rules[ri] = replace(rules[ri], action=action)
    elif kind == "remove_rule":
        del rules[rng.randrange(len(rules))]
    elif kind == "change_default":
        default = random_action(actions, rng, params, exclude=default.name)
    elif kind == "reorder_rules":
        src = rng.randrange(len(rules))
        rule = rules.pop(src)
        dst = rng.choice([i for i in range(len(rules) + 1) if i != src])
        rules.insert(dst, rule)
    return RuleSet(tuple(rules), default), kind


def mutate(rs, schema, actions, params, rng):
    return mutate_with_kind(rs, schema, actions, params, rng)[0]


def reproduce(a, b, params, schema, actions, rng, metrics=None,
              filter_inactive=True):
    """One offspring from two tournament-selected parents.

    filter_inactive=False treats every rule as active, for parents whose
    evaluator reported no times_applied counts.
    """
    style = CLONE
    child = a
    if rng.random() < params.crossover_probability:
        style = rng.choice((SPLICE, PRODUCT))
        # rules that never fired do not donate genetic material
        a_active, b_active = a, b
        if filter_inactive:
            a_active, b_active = active_rules(a), active_rules(b)
        if style == PRODUCT and a_active.rules and b_active.rules:
            child = crossover_product(a_active, b_active, rng, params.max_rules,
                                      params.max_conditions)
        else:
            style = SPLICE
            child = crossover_splice(a_active, b_active, rng, params.max_rules)
    kind = None
    if rng.random() < params.mutation_rate:
        child, kind = mutate_with_kind(child, schema, actions, params, rng)
    child = reset_counts(prune(child, schema))
    if metrics is not None:
        metrics.record_offspring(style, kind)
    return child
