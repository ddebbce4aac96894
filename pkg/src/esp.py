"""Surrogate-assisted prescription: collect, fit, evolve, validate."""

import copy
import csv
import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional

from src.dataset import Table, matthews_corrcoef, split
from src.episodes import decide, make_env, run_episodes, validation_spec
from src.errors import EmptyInput, NotFitted
from src.evolution import Evaluation, evolve
from src.generate import random_ruleset
from src.predictor import DecisionSample, InterventionPredictor, KnnPredictor
from src.rules import HARD_MAX, ApplicationCounts, InputFrame, eval_ruleset

logger = logging.getLogger(__name__)

MAXIMIZE = "maximize"
MINIMIZE = "minimize"


# collection

PRESCRIPTOR = "prescriptor"
HOLD = "hold"
ROLLOUTS = (PRESCRIPTOR, HOLD)


def _survival(env, rs, action, horizon, mode, rollout=PRESCRIPTOR):
    # frames survived over the next `horizon` frames, starting with `action`;
    # afterwards the prescriptor decides, or the action is held
    sim = copy.deepcopy(env)
    sim.max_frames = sim.frames + horizon
    obs, survived, done = sim.step(action)
    while not done:
        nxt = action if rollout == HOLD else decide(sim, rs, obs, mode)
        obs, reward, done = sim.step(nxt)
        survived += reward
    return survived


def collect_env(env, n_prescriptors, samples, horizon, params, rng, mode="first_match",
                rollout=PRESCRIPTOR, paired=False, stride=1):
    """Decisions of random rule-set prescriptors and their short-term outcome.

    With paired set, every action is tried at each visited context, the
    prescriptor's own choice first. Consecutive contexts lie 1..stride frames
    apart along the prescriptor's episode.
    """
    if n_prescriptors < 1:
        raise ValueError("n_prescriptors must be >= 1")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if rollout not in ROLLOUTS:
        raise ValueError(f"unknown rollout {rollout!r}")
    quota = math.ceil(samples / n_prescriptors)
    out = []
    for _ in range(n_prescriptors):
        rs = random_ruleset(env.schema, env.actions, params, rng)
        got = 0
        env.done = True
        while got < quota and len(out) < samples:
            if env.done:
                obs = env.reset(rng.randrange(2 ** 31))
            action = decide(env, rs, obs, mode)
            tried = [action]
            if paired:
                tried += [a for a in env.actions if a != action]
            for a in tried[:min(quota - got, samples - len(out))]:
                outcome = _survival(env, rs, a, horizon, mode, rollout)
                out.append(DecisionSample(tuple(obs), a, (float(outcome),)))
                got += 1
            obs, _, _ = env.step(action)
            skip = rng.randint(1, stride) - 1 if stride > 1 else 0
            for _ in range(skip):
                if env.done:
                    break
                obs, _, _ = env.step(decide(env, rs, obs, mode))
    logger.info("collected %d samples from %d prescriptors", len(out), n_prescriptors)
    return out


def collect_table(table):
    """One context-only sample per labelled row; the label is the outcome."""
    if table.labels is None:
        raise EmptyInput("table has no outcome column")
    return [DecisionSample(tuple(row), None, (float(y),))
            for row, y in zip(table.rows, table.labels)]


def collect(source, n_prescriptors=1, rng=None, params=None, samples=100, horizon=20,
            mode="first_match", **options):
    # options: rollout, paired, stride (environments only)
    if isinstance(source, Table):
        return collect_table(source)
    return collect_env(source, n_prescriptors, samples, horizon, params, rng, mode,
                       **options)


def save_samples_csv(samples, path, feature_names, outcome_names=("outcome",)):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(list(feature_names) + ["action"] + list(outcome_names))
        for s in samples:
            writer.writerow([repr(float(x)) for x in s.context]
                            + [s.action if s.action is not None else ""]
                            + [repr(float(y)) for y in s.outcome])


# evolution against the surrogate

class SurrogateEvaluator:
    """Mean predicted outcome of a prescriptor over a fixed context set."""

    def __init__(self, predictor, contexts, schema, mode=HARD_MAX, direction=MAXIMIZE):
        self.predictor = predictor
        self.contexts = [tuple(c) for c in contexts]
        self.schema = schema
        self.mode = mode
        self.sign = 1.0 if direction == MAXIMIZE else -1.0
        self._cache = {}

    def _predict(self, i, action):
        key = (i, action)
        if key not in self._cache:
            self._cache[key] = self.predictor.predict(self.contexts[i], action)[0]
        return self._cache[key]

    def mean_outcome(self, rs, counts=None):
        total = 0.0
        for i, ctx in enumerate(self.contexts):
            frame = InputFrame(self.schema, [ctx])
            action = eval_ruleset(rs, frame, self.mode, counts).action.name
            total += self._predict(i, action)
        return total / len(self.contexts)

    def __call__(self, rs):
        counts = ApplicationCounts(len(rs.rules))
        return Evaluation((self.sign * self.mean_outcome(rs, counts),), counts)


def esp_evolve(predictor, contexts, params, schema, actions, mode=HARD_MAX,
               direction=MAXIMIZE, on_generation=None, metrics=None):
    if not getattr(predictor, "fitted", True):
        raise NotFitted("fit the predictor before evolving against it")
    if not contexts:
        raise EmptyInput("no contexts to evaluate prescriptors on")
    evaluator = SurrogateEvaluator(predictor, contexts, schema, mode, direction)
    return evolve(evaluator, params, schema, actions, on_generation, metrics=metrics)


def random_prescriptor_baseline(predictor, contexts, actions):
    """Expected outcome of choosing a uniformly random action per context."""
    total = 0.0
    for ctx in contexts:
        total += sum(predictor.predict(ctx, a)[0] for a in actions) / len(actions)
    return total / len(contexts)


def predictor_mcc(table, k, holdout, seed, threshold=0.5, weights=None):
    """Out-of-sample MCC of a context-only KNN on a binary outcome."""
    train, test, _ = split(table, (1.0 - holdout, holdout, 0.0), seed)
    model = KnnPredictor(k, weights=weights).fit(collect_table(train))
    predicted = ["1" if model.predict(row)[0] >= threshold else "0" for row in test.rows]
    truth = [str(int(float(y))) for y in test.labels]
    return matthews_corrcoef(truth, predicted)


# validation

@dataclass
class EspReport:
    samples: int
    surrogate_fitness: float
    predicted_outcome: float
    real_score: Optional[float] = None
    gap: Optional[float] = None
    baseline_outcome: Optional[float] = None
    predictor_mcc: Optional[float] = None
    solved: Optional[bool] = None

    def to_dict(self):
        return asdict(self)


def validate_env(champion, domain, env_config):
    """Mean reward of the champion on the real validation episodes."""
    env = make_env(domain, env_config)
    return run_episodes(env, champion, validation_spec(env_config))


def validate_holdout(champion, holdout, schema, base_k, interventions, mode=HARD_MAX,
                     weights=None):
    """Predicted outcome under a predictor refit on held-out rows only."""
    model = InterventionPredictor(KnnPredictor(base_k, weights=weights), schema,
                                  interventions)
    model.fit(collect_table(holdout))
    return SurrogateEvaluator(model, holdout.rows, schema, mode).mean_outcome(champion)


def validate(champion, target, **kwargs):
    """Re-score a champion without the surrogate.

    target is a held-out Table (keyword args for validate_holdout) or a
    (domain, env_config) pair.
    """
    if isinstance(target, Table):
        return validate_holdout(champion, target, **kwargs)
    domain, env_config = target
    return validate_env(champion, domain, env_config)
