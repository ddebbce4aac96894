"""Semantics-preserving rule-set cleanup and plain-text rendering.

Every structural edit is checked against the original rule set on a fixed
sample of random frames; an edit that changes any output in any requested
evaluation mode is rolled back.
"""

import difflib
import json
import logging
import random

from src.grammar import render
from src.intervals import TAUTOLOGY, classify, term_interval
from src.operators import prune
from src.rules import (FIRST_MATCH, HARD_MAX, MODES, ApplicationCounts,
                       Constant, InputFrame, Term, compare, eval_condition,
                       eval_ruleset, term_value)
from src.schema import BINARY

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10_000
_EPS = 1e-9


# implication between conditions

def _same_var(a, b):
    return a.feature == b.feature and a.power == b.power and a.lag == b.lag


def _direction(op):
    return "upper" if op in ("<", "<=") else "lower"


def _bound_implies(op_a, t_a, op_b, t_b, exact):
    """Does (u op_a t_a) imply (u op_b t_b) for the same quantity u?"""
    if _direction(op_a) != _direction(op_b):
        return False
    if exact and t_a == t_b:
        # equal thresholds: a strict bound implies both, a closed one only itself
        return op_a in ("<", ">") or op_a == op_b
    if _direction(op_a) == "upper":
        return t_a < t_b - (0.0 if exact else _EPS * max(1.0, abs(t_b)))
    return t_a > t_b + (0.0 if exact else _EPS * max(1.0, abs(t_b)))


def implies(a, b, schema):
    """Sound (not complete) check that condition a implies condition b."""
    if a == b or classify(b, schema) == TAUTOLOGY:
        return True
    la, lb = a.leading, b.leading
    if not _same_var(la, lb):
        return False
    ta, tb = a.trailing, b.trailing
    if isinstance(ta, Constant) and isinstance(tb, Constant):
        if la.coefficient == lb.coefficient:
            return _bound_implies(a.operator, ta.value, b.operator, tb.value, True)
        return _bound_implies(a.operator, ta.value / la.coefficient,
                              b.operator, tb.value / lb.coefficient, False)
    if isinstance(ta, Term) and isinstance(tb, Term) and _same_var(ta, tb):
        if la.coefficient == lb.coefficient and ta.coefficient == tb.coefficient:
            return a.operator == b.operator or (
                _direction(a.operator) == _direction(b.operator)
                and a.operator in ("<", ">"))
        # lead op k * trail, with k = c_trail / c_lead; sign of trail decides
        iv = term_interval(Term(1.0, ta.feature, ta.power, ta.lag), schema)
        ka = ta.coefficient / la.coefficient
        kb = tb.coefficient / lb.coefficient
        if iv.low >= 0:
            return _bound_implies(a.operator, ka, b.operator, kb, False)
        if iv.high <= 0:
            return _bound_implies(a.operator, -ka, b.operator, -kb, False)
    return False


def rule_implies(earlier, later, schema):
    """True when every frame matching `later` also matches `earlier`."""
    return all(any(implies(c, d, schema) for c in later.conditions)
               for d in earlier.conditions)


# sampling verification

def sample_frames(schema, budget, rng):
    depth = schema.max_lag + 1
    frames = []
    for _ in range(budget):
        history = []
        for _ in range(depth):
            history.append(tuple(
                float(rng.randint(0, 1)) if f.kind == BINARY else rng.uniform(f.min, f.max)
                for f in schema.features))
        frames.append(InputFrame(schema, history))
    return frames


class _Verifier:
    def __init__(self, rs, schema, frames, modes):
        self.frames = frames
        self.modes = tuple(modes)
        self._matches = {}
        self.reference = self.outputs(rs)

    def _match_vector(self, rule):
        key = rule.conditions
        if key not in self._matches:
            self._matches[key] = [all(eval_condition(c, f) for c in rule.conditions)
                                  for f in self.frames]
        return self._matches[key]

    def outputs(self, rs):
        vectors = [self._match_vector(r) for r in rs.rules]
        out = []
        for i in range(len(self.frames)):
            matched = [j for j, v in enumerate(vectors) if v[i]]
            row = []
            for mode in self.modes:
                if mode == FIRST_MATCH:
                    row.append(rs.rules[matched[0]].action if matched
                               else rs.default_action)
                elif mode == HARD_MAX:
                    best = None
                    for j in matched:
                        a = rs.rules[j].action
                        if best is None or a.certainty > best.certainty:
                            best = a
                    if best is None or rs.default_action.certainty > best.certainty:
                        best = rs.default_action
                    row.append(best)
                else:
                    # a repeated action prescribes nothing new, as in prescribed()
                    actions = [rs.rules[j].action for j in matched]
                    actions.append(rs.default_action)
                    row.append(tuple(dict.fromkeys(actions)))
            out.append(tuple(row))
        return out

    def equivalent(self, rs):
        return self.outputs(rs) == self.reference


# transformation steps; each yields candidate rule sets, one edit at a time

def _drop_subsumed_conditions(rs, schema):
    for ri, rule in enumerate(rs.rules):
        conds = rule.conditions
        for bi, b in enumerate(conds):
            for ai, a in enumerate(conds):
                if ai == bi:
                    continue
                # between equivalent conditions the later one goes
                if implies(a, b, schema) and not (ai > bi and implies(b, a, schema)):
                    kept = conds[:bi] + conds[bi + 1:]
                    rules = list(rs.rules)
                    rules[ri] = type(rule)(kept, rule.action, rule.times_applied)
                    yield rs.with_rules(rules)
                    break


def _drop_duplicate_rules(rs):
    for j, later in enumerate(rs.rules):
        for earlier in rs.rules[:j]:
            if (set(earlier.conditions) == set(later.conditions)
                    and earlier.action == later.action):
                yield rs.with_rules(rs.rules[:j] + rs.rules[j + 1:])
                break


def _drop_unreachable_rules(rs, schema, modes):
    first_only = tuple(modes) == (FIRST_MATCH,)
    for j, later in enumerate(rs.rules):
        for earlier in rs.rules[:j]:
            # in the other modes a shadowed rule still contributes its action
            if not first_only and earlier.action != later.action:
                continue
            if rule_implies(earlier, later, schema):
                yield rs.with_rules(rs.rules[:j] + rs.rules[j + 1:])
                break


def _first_accepted(candidates, verifier):
    for candidate in candidates:
        if verifier.equivalent(candidate):
            return candidate
        logger.debug("rolled back an edit that changed sampled behaviour")
    return None


def remove_inactive(rs, corpus, mode=FIRST_MATCH):
    """Drop rules that never fire over the corpus frames."""
    counts = ApplicationCounts(len(rs.rules))
    reference = [eval_ruleset(rs, f, mode, counts) for f in corpus]
    kept = [r for r, n in zip(rs.rules, counts.rules) if n > 0]
    if len(kept) == len(rs.rules):
        return rs
    candidate = rs.with_rules(kept)
    if [eval_ruleset(candidate, f, mode) for f in corpus] != reference:
        return rs
    return candidate


def simplify(rs, schema, sample_budget=DEFAULT_BUDGET, rng=None, modes=MODES,
             corpus=None):
    """Fixpoint of pruning, subsumption, duplicate and unreachable-rule removal."""
    if rng is None:
        rng = random.Random(0)
    verifier = _Verifier(rs, schema, sample_frames(schema, sample_budget, rng), modes)
    current = rs

    pruned = prune(current, schema)
    if pruned != current and verifier.equivalent(pruned):
        current = pruned

    while True:
        step = (_first_accepted(_drop_subsumed_conditions(current, schema), verifier)
                or _first_accepted(_drop_duplicate_rules(current), verifier)
                or _first_accepted(_drop_unreachable_rules(current, schema, modes),
                                   verifier))
        if step is None:
            break
        current = step
        pruned = prune(current, schema)
        if pruned != current and verifier.equivalent(pruned):
            current = pruned

    if corpus is not None:
        current = remove_inactive(current, corpus, modes[0])
    logger.debug("simplified %d rules / %d conditions to %d / %d", len(rs),
                 rs.num_conditions, len(current), current.num_conditions)
    return current


def feature_usage(rs):
    """Feature name -> 1-based numbers of the rules that mention it."""
    usage = {}
    for i, rule in enumerate(rs.rules, start=1):
        for cond in rule.conditions:
            for name in cond.features:
                rules = usage.setdefault(name, [])
                if rules[-1:] != [i]:
                    rules.append(i)
    return dict(sorted(usage.items()))


def diff_summary(before, after):
    lines = difflib.unified_diff(render(before).splitlines(), render(after).splitlines(),
                                 "before", "after", lineterm="")
    return "\n".join(lines)


# plain text

_OPS = {"<": "<", "<=": "≤", ">": ">", ">=": "≥"}
_SUPER = {2: "²", 3: "³"}


def load_vocabulary(path):
    with open(path, "r") as f:
        return json.load(f)


def _phrase(vocabulary, name, negated=False):
    entry = vocabulary.get(name, {})
    if negated:
        return entry.get("negated_phrase", f"not {entry.get('phrase', name)}")
    return entry.get("phrase", name)


def _plain_term(term, vocabulary):
    text = f"({_phrase(vocabulary, term.feature)})"
    if term.lag:
        text = f"({_phrase(vocabulary, term.feature)}, {term.lag} steps earlier)"
    text += _SUPER.get(term.power, "")
    if term.coefficient != 1.0:
        text = f"{term.coefficient:.2f}·{text}"
    return text


def _binary_truth(cond, schema):
    """Satisfying assignments when every term in cond reads a binary feature."""
    terms = [cond.leading]
    if isinstance(cond.trailing, Term):
        terms.append(cond.trailing)
    if any(schema.spec(t.feature).kind != BINARY for t in terms):
        return None
    names = []
    for t in terms:
        if t.feature not in names:
            names.append(t.feature)
    table = []
    for bits in range(2 ** len(names)):
        values = {n: float((bits >> k) & 1) for k, n in enumerate(names)}
        lhs = term_value(cond.leading.coefficient, values[cond.leading.feature],
                         cond.leading.power)
        if isinstance(cond.trailing, Term):
            rhs = term_value(cond.trailing.coefficient, values[cond.trailing.feature],
                             cond.trailing.power)
        else:
            rhs = cond.trailing.value
        if compare(lhs, cond.operator, rhs):
            table.append(tuple(int(values[n]) for n in names))
    return names, table


def _literal(vocabulary, name, value):
    return _phrase(vocabulary, name, negated=not value)


def _fold_binary(names, sat, vocabulary):
    total = 2 ** len(names)
    if len(sat) == total:
        return ""
    if not sat:
        return "never"
    if len(names) == 1:
        return _literal(vocabulary, names[0], sat[0][0])
    a, b = names
    for k, n in enumerate(names):
        # depends on one variable only
        for v in (0, 1):
            if sorted(sat) == sorted(s for s in
                                     [(0, 0), (0, 1), (1, 0), (1, 1)] if s[k] == v):
                return _literal(vocabulary, n, v)
    if len(sat) == 1:
        (x, y), = sat
        return f"{_literal(vocabulary, a, x)} and {_literal(vocabulary, b, y)}"
    if len(sat) == 3:
        (x, y), = [s for s in [(0, 0), (0, 1), (1, 0), (1, 1)] if s not in sat]
        return f"{_literal(vocabulary, a, 1 - x)} or {_literal(vocabulary, b, 1 - y)}"
    if sorted(sat) == [(0, 0), (1, 1)]:
        return f"{_literal(vocabulary, a, 1)} exactly when {_literal(vocabulary, b, 1)}"
    return f"either {_literal(vocabulary, a, 1)} or {_literal(vocabulary, b, 1)}, not both"


def _plain_condition(cond, schema, vocabulary):
    if schema is not None:
        truth = _binary_truth(cond, schema)
        if truth is not None:
            return _fold_binary(*truth, vocabulary)
    lhs = _plain_term(cond.leading, vocabulary)
    if isinstance(cond.trailing, Term):
        rhs = _plain_term(cond.trailing, vocabulary)
    else:
        rhs = repr(float(cond.trailing.value))
    return f"{lhs} {_OPS[cond.operator]} {rhs}"


def _plain_action(action, vocabulary):
    text = _phrase(vocabulary, action.name)
    if action.certainty != 1.0:
        text += f" (certainty {action.certainty:.2f})"
    return text


def _plain_body(rule, schema, vocabulary):
    parts = [_plain_condition(c, schema, vocabulary) for c in rule.conditions]
    parts = [p for p in parts if p]
    return " and ".join(parts) if parts else "always"


def render_plain(rs, vocabulary=None, schema=None):
    """One sentence per rule, ending with the default."""
    vocabulary = vocabulary or {}
    default = _plain_action(rs.default_action, vocabulary)
    if not rs.rules:
        return f"If none of the above, {default}\n"
    if len(rs.rules) == 1:
        rule = rs.rules[0]
        return (f"If {_plain_body(rule, schema, vocabulary)} then "
                f"{_plain_action(rule.action, vocabulary)}; otherwise {default}\n")
    lines = []
    for i, rule in enumerate(rs.rules, start=1):
        lines.append(f"{i}. If {_plain_body(rule, schema, vocabulary)} then "
                     f"{_plain_action(rule.action, vocabulary)}")
    lines.append(f"If none of the above, {default}")
    return "\n".join(lines) + "\n"
