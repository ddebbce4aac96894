import sys, os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

import random

from src.cartpole import cartpole_schema
from src.config import EvoParams
from src.flappy import flappy_schema
from src.generate import random_ruleset
from src.grammar import parse, render
from src.rules import (FIRST_MATCH, HARD_MAX, MODES, Action, Condition, Constant,
                       InputFrame, Rule, RuleSet, Term, eval_ruleset)
from src.schema import FeatureSchema, FeatureSpec, load_schema
from src.simplify import (diff_summary, feature_usage, implies, load_vocabulary,
                          remove_inactive, render_plain, rule_implies, sample_frames,
                          simplify)
from tests.sample_rules import (CARTPOLE_DIRECT_RULES, FLAPPY_RULES,
                                HEART_FAILURE_RULES, MAP_RULES)

DATA = os.path.join(os.path.dirname(__file__), "..", "data")


def make_schema():
    return FeatureSchema((FeatureSpec("x", 0.0, 10.0), FeatureSpec("y", -5.0, 5.0)),
                         ("A", "B", "C"))


def make_unit_heart_schema():
    raw = load_schema(os.path.join(DATA, "heart_failure_schema.json"))
    specs = [s if s.kind == "binary" else FeatureSpec(s.name, 0.0, 1.0)
             for s in raw.features]
    return FeatureSchema(tuple(specs), raw.actions, 0)


def cond(feature, op, value, coefficient=1.0):
    return Condition(Term(coefficient, feature), op, Constant(value))


def same_outputs(a, b, schema, modes=MODES, n=500, seed=123):
    for frame in sample_frames(schema, n, random.Random(seed)):
        for mode in modes:
            if eval_ruleset(a, frame, mode).prescribed() != \
                    eval_ruleset(b, frame, mode).prescribed():
                return False
    return True


# implication

def test_implies_on_constants():
    schema = make_schema()
    assert implies(cond("x", "<=", 5.0), cond("x", "<=", 7.0), schema)
    assert not implies(cond("x", "<=", 7.0), cond("x", "<=", 5.0), schema)
    assert implies(cond("x", "<", 5.0), cond("x", "<=", 5.0), schema)
    assert not implies(cond("x", "<=", 5.0), cond("x", "<", 5.0), schema)
    assert not implies(cond("x", ">", 5.0), cond("x", "<", 7.0), schema)
    # scaled thresholds: 0.5x <= 2 is x <= 4, which gives 0.25x <= 1.5 (x <= 6)
    assert implies(cond("x", "<=", 2.0, 0.5), cond("x", "<=", 1.5, 0.25), schema)
    # anything implies a tautology: x <= 10 over [0, 10]
    assert implies(cond("y", ">", 1.0), cond("x", "<=", 10.0), schema)


def test_implies_between_terms():
    schema = flappy_schema()
    tighter = Condition(Term(0.95, "player.y"), "<=", Term(0.65, "next.pipe.bottom.y"))
    looser = Condition(Term(0.41, "player.y"), "<=", Term(0.78, "next.pipe.bottom.y"))
    assert implies(tighter, looser, schema)
    assert not implies(looser, tighter, schema)


def test_rule_implies():
    schema = make_schema()
    broad = Rule((cond("x", "<", 5.0),), Action("A"))
    narrow = Rule((cond("x", "<", 3.0), cond("y", ">", 0.0)), Action("B"))
    assert rule_implies(broad, narrow, schema)
    assert not rule_implies(narrow, broad, schema)


# simplify

def test_published_cartpole_rule_is_unchanged():
    schema = cartpole_schema()
    rs = parse(CARTPOLE_DIRECT_RULES, schema)
    assert simplify(rs, schema, sample_budget=500) == rs


def test_subsumed_condition_dropped():
    schema = make_schema()
    rs = RuleSet((Rule((cond("x", "<=", 5.0), cond("x", "<=", 7.0)), Action("A")),),
                 Action("B"))
    out = simplify(rs, schema, sample_budget=500)
    assert out.rules[0].conditions == (cond("x", "<=", 5.0),)


def test_duplicate_and_shadowed_rules_dropped():
    schema = make_schema()
    r = Rule((cond("x", "<", 2.0),), Action("A"))
    narrower = Rule((cond("x", "<", 1.0), cond("y", ">", 0.0)), Action("A"))
    other = Rule((cond("y", ">", 3.0),), Action("B"))
    rs = RuleSet((r, other, r, narrower), Action("C"))
    out = simplify(rs, schema, sample_budget=500)
    assert out.rules == (r, other)
    assert same_outputs(out, rs, schema)


def test_shadowed_rule_with_other_action_kept_for_all_modes():
    schema = make_schema()
    r = Rule((cond("x", "<", 2.0),), Action("A"))
    shadowed = Rule((cond("x", "<", 1.0),), Action("B"))
    rs = RuleSet((r, shadowed), Action("C"))
    assert len(simplify(rs, schema, sample_budget=500)) == 2
    assert len(simplify(rs, schema, sample_budget=500, modes=(FIRST_MATCH,))) == 1


def test_simplify_is_idempotent_and_equivalent():
    schema = make_schema()
    params = EvoParams(use_certainty=True, initial_rules=6, initial_conditions=4)
    rng = random.Random(4)
    for _ in range(15):
        rs = random_ruleset(schema, schema.actions, params, rng)
        # plant redundancy
        if rs.rules:
            rs = rs.with_rules(rs.rules + rs.rules[:1])
        once = simplify(rs, schema, sample_budget=400)
        assert simplify(once, schema, sample_budget=400) == once
        assert once.num_conditions <= rs.num_conditions
        assert same_outputs(once, rs, schema)


def test_flappy_rules_lose_redundant_conditions():
    schema = flappy_schema()
    rs = parse(FLAPPY_RULES, schema)
    out = simplify(rs, schema, sample_budget=1000)
    assert len(out) == len(rs)
    assert out.num_conditions < rs.num_conditions
    assert len(out.rules[0].conditions) < 9
    # the always-true pipe-top bound is gone
    assert "84.48" not in render(out)
    assert same_outputs(out, rs, schema)


def test_heart_failure_rules_shrink():
    schema = make_unit_heart_schema()
    rs = parse(HEART_FAILURE_RULES, schema)
    out = simplify(rs, schema, sample_budget=1000, modes=(HARD_MAX,))
    assert len(out) < len(rs)
    assert same_outputs(out, rs, schema, modes=(HARD_MAX,))


def test_remove_inactive_uses_corpus():
    schema = make_schema()
    live = Rule((cond("x", "<", 5.0),), Action("A"))
    idle = Rule((cond("y", ">", 4.5),), Action("B"))
    rs = RuleSet((live, idle), Action("C"))
    corpus = [InputFrame(schema, [(x, 0.0)]) for x in (1.0, 6.0, 9.0)]
    assert remove_inactive(rs, corpus).rules == (live,)
    busy = corpus + [InputFrame(schema, [(7.0, 4.9)])]
    assert remove_inactive(rs, busy) is rs
    out = simplify(rs, schema, sample_budget=200, corpus=corpus)
    assert out.rules == (live,)


def test_diff_summary():
    schema = make_schema()
    rs = RuleSet((Rule((cond("x", "<=", 5.0), cond("x", "<=", 7.0)), Action("A")),),
                 Action("B"))
    out = simplify(rs, schema, sample_budget=200)
    diff = diff_summary(rs, out)
    assert diff.startswith("--- before\n+++ after")
    assert "-" + render(rs).splitlines()[0] in diff
    assert diff_summary(out, out) == ""


def test_feature_usage():
    rs = parse(MAP_RULES, load_schema(os.path.join(DATA, "map_schema.json")))
    usage = feature_usage(rs)
    assert list(usage) == sorted(usage)
    assert usage["Std"] == [10, 12]
    assert usage["Mean"][:3] == [1, 2, 3]


# plain text

def test_render_plain_cartpole():
    schema = cartpole_schema()
    rs = parse(CARTPOLE_DIRECT_RULES, schema)
    vocabulary = load_vocabulary(os.path.join(DATA, "cartpole_vocabulary.json"))
    assert render_plain(rs, vocabulary, schema) == (
        "If 0.11·(cart velocity)³ < 0.87·(pole angle) then push LEFT; "
        "otherwise push RIGHT\n")
    assert render_plain(RuleSet((), Action("RIGHT")), vocabulary) == \
        "If none of the above, push RIGHT\n"


def test_render_plain_numbers_rules_and_lags():
    rs = parse(MAP_RULES, load_schema(os.path.join(DATA, "map_schema.json")))
    lines = render_plain(rs).splitlines()
    assert len(lines) == 17
    assert lines[0].startswith("1. If (Mean, 4 steps earlier) < 72.75 and ")
    assert lines[2] == "3. If (Mean) < 72.75 then Low"
    assert lines[-1] == "If none of the above, Normal"


def test_render_plain_keeps_constant_digits():
    schema = FeatureSchema((FeatureSpec("load", 0.0, 500000.0),), ("A", "B"), 0)
    rs = RuleSet((Rule((cond("load", ">", 192000.5),), Action("A")),), Action("B"))
    assert render_plain(rs, {}, schema).startswith("If (load) > 192000.5 then A;")


def test_render_plain_folds_binary_conditions():
    schema = make_unit_heart_schema()
    vocabulary = load_vocabulary(os.path.join(DATA, "heart_failure_vocabulary.json"))

    def plain(text):
        rs = parse(text + "\nDefault -> 0.13*serum.creatinine\n", schema)
        return render_plain(rs, vocabulary, schema)

    assert plain("(0.46*smoking ≤ 0.50*diabetes) -> 0.51*ejection.fraction") == (
        "If does not smoke or is diabetic then raise the ejection fraction "
        "(certainty 0.51); otherwise lower the serum creatinine (certainty 0.13)\n")
    assert plain("(0.88*anaemia > 0.76 [0.0..1.0]) -> ejection.fraction").startswith(
        "If has anaemia then raise the ejection fraction;")
    assert plain("(0.03*high.blood.pressure ≥ 0.21*sex) -> ejection.fraction") \
        .startswith("If is female then")
    assert plain("(0.49*anaemia ≤ 0.92 [0.0..1.0]) -> ejection.fraction") \
        .startswith("If always then")
    assert plain("(0.50*anaemia > 0.90 [0.0..1.0]) -> ejection.fraction") \
        .startswith("If never then")


if __name__ == "__main__":
    test_implies_on_constants()
    test_implies_between_terms()
    test_rule_implies()
    test_published_cartpole_rule_is_unchanged()
    test_subsumed_condition_dropped()
    test_duplicate_and_shadowed_rules_dropped()
    test_shadowed_rule_with_other_action_kept_for_all_modes()
    test_simplify_is_idempotent_and_equivalent()
    test_flappy_rules_lose_redundant_conditions()
    test_heart_failure_rules_shrink()
    test_remove_inactive_uses_corpus()
    test_diff_summary()
    test_feature_usage()
    test_render_plain_cartpole()
    test_render_plain_numbers_rules_and_lags()
    test_render_plain_keeps_constant_digits()
    test_render_plain_folds_binary_conditions()
    print("all simplify tests passed")
