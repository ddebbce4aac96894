import sys, os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

import pickle

import pytest

from src.cartpole import CartPole
from src.config import EnvConfig, EpisodeSpec
from src.episodes import (EpisodeEvaluator, check_actions, make_env, run_episodes,
                          trace_episode, training_spec, validation_spec)
from src.errors import ActionSetMismatch, InvalidParams
from src.flappy import Flappy
from src.grammar import parse
from src.rules import Action, ApplicationCounts, RuleSet
from tests.sample_rules import CARTPOLE_DIRECT_RULES


def test_make_env():
    config = EnvConfig(max_frames=50)
    env = make_env("cartpole", config)
    assert isinstance(env, CartPole) and env.max_frames == 50
    assert isinstance(make_env("flappy", config, max_frames=10), Flappy)
    with pytest.raises(ValueError):
        make_env("timeseries", config)


def test_action_set_checked():
    env = CartPole()
    with pytest.raises(ActionSetMismatch):
        check_actions(env, RuleSet((), Action("FLAP")))


def test_run_episodes_counts_every_decision():
    env = CartPole()
    rs = parse(CARTPOLE_DIRECT_RULES, env.schema)
    counts = ApplicationCounts(len(rs))
    spec = EpisodeSpec(episodes=3, max_frames=30, seed=0)
    mean = run_episodes(env, rs, spec, counts)
    assert 0 < mean <= 30
    # one decision per frame, reward 1 for every frame but a failing one
    assert counts.total() >= round(mean * 3)
    assert counts.total() <= 90


def test_episode_spec_validation():
    with pytest.raises(InvalidParams):
        EpisodeSpec(episodes=0)


def test_trace_records_frames():
    env = CartPole(max_frames=5)
    rs = RuleSet((), Action("LEFT"))
    records = trace_episode(env, rs, seed=1)
    assert [r["frame"] for r in records] == list(range(1, len(records) + 1))
    assert all(r["action"] == "LEFT" for r in records)
    assert set(records[0]["state"]) == set(env.schema.names)
    assert records[-1]["done"]


def test_specs_from_env_config():
    config = EnvConfig(episodes=3, max_frames=80, validation_episodes=7,
                       validation_seed=99, action_mode="hard_max")
    t = training_spec(config, seed=5)
    v = validation_spec(config)
    assert (t.episodes, t.max_frames, t.seed, t.action_mode) == (3, 80, 5, "hard_max")
    assert (v.episodes, v.seed) == (7, 99)


def test_evaluator_is_deterministic_and_picklable():
    config = EnvConfig(episodes=2, max_frames=40)
    evaluator = EpisodeEvaluator("cartpole", config, training_spec(config, seed=0))
    rs = parse(CARTPOLE_DIRECT_RULES, CartPole().schema)
    first = evaluator(rs)
    again = pickle.loads(pickle.dumps(evaluator))(rs)
    assert first.fitness == again.fitness
    assert len(first.applied) == 2
    assert sum(first.applied) >= first.fitness[0] * 2


if __name__ == "__main__":
    test_make_env()
    test_action_set_checked()
    test_run_episodes_counts_every_decision()
    test_episode_spec_validation()
    test_trace_records_frames()
    test_specs_from_env_config()
    test_evaluator_is_deterministic_and_picklable()
    print("all episodes tests passed")
