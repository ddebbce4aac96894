"""Episode runner: turns a rule set into an episodic fitness."""

import logging

from src.cartpole import CartPole
from src.config import EpisodeSpec
from src.errors import ActionSetMismatch
from src.evolution import Evaluation
from src.flappy import Flappy
from src.rules import ApplicationCounts, InputFrame, eval_ruleset

logger = logging.getLogger(__name__)

SOLVED_REWARD = 195.0   # cart-pole validation threshold


def make_env(domain, env_config, max_frames=None):
    max_frames = env_config.max_frames if max_frames is None else max_frames
    if domain == "cartpole":
        return CartPole(env_config.cartpole, max_frames)
    if domain == "flappy":
        return Flappy(env_config.flappy, max_frames)
    raise ValueError(f"no simulator for domain {domain!r}")


def check_actions(env, rs):
    unknown = rs.actions_used() - set(env.actions)
    if unknown:
        raise ActionSetMismatch(
            f"rule set uses {sorted(unknown)}, environment accepts {list(env.actions)}")


def decide(env, rs, obs, mode, counts=None):
    # stateless domains: history of one frame
    frame = InputFrame(env.schema, [obs])
    return eval_ruleset(rs, frame, mode, counts).action.name


def run_episode(env, rs, seed, mode, counts=None):
    obs = env.reset(seed)
    total = 0.0
    while not env.done:
        obs, reward, _ = env.step(decide(env, rs, obs, mode, counts))
        total += reward
    return total


def run_episodes(env, rs, spec, counts=None):
    """Mean reward over spec.episodes seeded episodes."""
    check_actions(env, rs)
    env.max_frames = spec.max_frames
    rewards = [run_episode(env, rs, spec.seed + e, spec.action_mode, counts)
               for e in range(spec.episodes)]
    return sum(rewards) / len(rewards)


def trace_episode(env, rs, seed, mode="first_match"):
    """Per-frame records of one episode, for debugging dumps."""
    check_actions(env, rs)
    names = env.schema.names
    obs = env.reset(seed)
    records = []
    while not env.done:
        action = decide(env, rs, obs, mode)
        state = dict(zip(names, obs))
        obs, reward, done = env.step(action)
        records.append({"frame": env.frames, "state": state, "action": action,
                        "reward": reward, "done": done})
    return records


def training_spec(env_config, seed):
    return EpisodeSpec(episodes=env_config.episodes, max_frames=env_config.max_frames,
                       seed=seed, action_mode=env_config.action_mode)


def validation_spec(env_config):
    return EpisodeSpec(episodes=env_config.validation_episodes,
                       max_frames=env_config.max_frames,
                       seed=env_config.validation_seed,
                       action_mode=env_config.action_mode)


class EpisodeEvaluator:
    """Mean training reward; builds its own simulator so it pickles cleanly."""

    def __init__(self, domain, env_config, spec):
        self.domain = domain
        self.env_config = env_config
        self.spec = spec

    def __call__(self, rs):
        env = make_env(self.domain, self.env_config, self.spec.max_frames)
        counts = ApplicationCounts(len(rs.rules))
        return Evaluation((run_episodes(env, rs, self.spec, counts),), counts)
