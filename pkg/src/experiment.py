"""Wires config, data, simulators, engine and ESP into one persisted run."""

import json
import logging
import os
import random
import time

from src.cartpole import cartpole_schema
from src.config import ExperimentConfig
from src.dataset import (TableEvaluator, load_csv, normalize, series_table, split,
                         synthetic_heart_failure, synthetic_map_series)
from src.episodes import (SOLVED_REWARD, EpisodeEvaluator, make_env, run_episodes,
                          trace_episode, training_spec, validation_spec)
from src.errors import ConfigError
from src.esp import (EspReport, SurrogateEvaluator, collect_env,
                     collect_table, esp_evolve, predictor_mcc,
                     random_prescriptor_baseline, save_samples_csv, validate_env,
                     validate_holdout)
from src.evolution import evolve
from src.flappy import flappy_schema
from src.grammar import save_rules
from src.metrics import Metrics
from src.predictor import (InterventionPredictor, KnnPredictor, load_predictor,
                           save_predictor)
from src.rules import HARD_MAX, ApplicationCounts
from src.schema import load_schema

logger = logging.getLogger(__name__)

ENV_DOMAINS = ("cartpole", "flappy")


# inputs

def domain_schema(config: ExperimentConfig):
    if config.schema:
        return load_schema(config.schema)
    if config.domain == "cartpole":
        return cartpole_schema(config.env.cartpole)
    if config.domain == "flappy":
        return flappy_schema(config.env.flappy)
    if config.domain == "timeseries":
        return None     # derived from the windowed data
    raise ConfigError(f"domain {config.domain} needs a schema file", key="schema")


def build_table(config: ExperimentConfig, schema=None):
    data = config.data
    if config.domain == "timeseries":
        series = synthetic_map_series(data.series)
        table = series_table(series, data.window, schema)
    elif config.domain == "table":
        if not data.csv:
            raise ConfigError("table domain needs data.csv", key="data.csv")
        table = load_csv(data.csv, schema, data.label or None, require_labels=True)
    elif data.csv:
        table = load_csv(data.csv, schema, config.esp.outcome, require_labels=True)
    else:
        table = synthetic_heart_failure(data.synthetic_rows, config.seed, schema)
    if data.normalize:
        table = normalize(table)
    return table


def domain_actions(config, schema, table=None, esp=False):
    if config.domain in ENV_DOMAINS:
        return make_env(config.domain, config.env).actions
    if esp:
        return tuple(config.esp.interventions) or schema.actions
    if config.domain != "heart_failure" and schema is not None and schema.actions:
        return schema.actions
    return table.classes


# run directory

def run_dir(config, out=None, stamp=None):
    stamp = stamp or time.strftime("%Y%m%d-%H%M%S")
    path = os.path.join(out or config.output_dir, f"{config.digest}-{stamp}")
    os.makedirs(path, exist_ok=True)
    return path


class GenerationLog:
    """on_generation callback streaming one JSON line per generation."""

    def __init__(self, path):
        self.path = path
        open(path, "w").close()

    def __call__(self, stats, population, archive):
        with open(self.path, "a") as f:
            f.write(json.dumps(stats.to_record(), sort_keys=True) + "\n")


def _header(candidate):
    fitness = ", ".join(f"{v:.6f}" for v in candidate.fitness)
    header = (f"id {candidate.id} born {candidate.generation_born} "
              f"fitness [{fitness}]")
    if candidate.applied is not None:
        header += f"\napplied {list(candidate.applied)}"
    return header


def write_candidates(directory, candidates):
    os.makedirs(directory, exist_ok=True)
    for i, candidate in enumerate(candidates):
        save_rules(candidate.genome, os.path.join(directory, f"{i:03d}.rules"),
                   _header(candidate))


def write_json(path, doc):
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def persist(path, config, result, report):
    write_json(os.path.join(path, "config.json"), config.to_dict())
    champion = result.champion
    if champion is not None:
        save_rules(champion.genome, os.path.join(path, "champion.rules"),
                   _header(champion))
    write_candidates(os.path.join(path, "archive"),
                     sorted(result.archive, key=lambda c: c.id))
    write_candidates(os.path.join(path, "population"), result.population)
    doc = dict(report)
    doc["metrics"] = result.metrics.summary()
    doc["archive"] = [list(f) for f in sorted(result.archive.fitnesses())]
    write_json(os.path.join(path, "report.json"), doc)


# direct evolution

def _table_fitness(rs, table, config):
    return TableEvaluator(table, config.scoring, config.env.action_mode)(rs).fitness[0]


def run_evolve(config, path, seeds=(), metrics=None):
    """Direct evolution against a simulator or a labelled table."""
    metrics = metrics or Metrics()
    log = GenerationLog(os.path.join(path, "generations.jsonl"))
    schema = domain_schema(config)
    report = {"domain": config.domain, "seed": config.seed}

    if config.domain in ENV_DOMAINS:
        actions = domain_actions(config, schema)
        evaluator = EpisodeEvaluator(config.domain, config.env,
                                     training_spec(config.env, config.seed))
        result = evolve(evaluator, config.evolution, schema, actions, log, seeds,
                        metrics)
        reward = validate_env(result.champion.genome, config.domain, config.env)
        report["validation_reward"] = reward
        if config.domain == "cartpole":
            report["solved"] = reward >= SOLVED_REWARD
    else:
        table = build_table(config, schema)
        schema = table.schema
        actions = domain_actions(config, schema, table)
        train, valid, test = split(table, config.data.split, config.seed)
        evaluator = TableEvaluator(train, config.scoring, config.env.action_mode)
        result = evolve(evaluator, config.evolution, schema, actions, log, seeds,
                        metrics)
        champion = result.champion.genome
        for name, part in (("validation_score", valid), ("test_score", test)):
            if len(part) and part.labels:
                report[name] = _table_fitness(champion, part, config)

    report["champion_fitness"] = list(result.champion.fitness)
    report["generations"] = result.generations_run
    persist(path, config, result, report)
    return result, report


# surrogate-assisted evolution

def _base(predictor):
    return predictor.base if isinstance(predictor, InterventionPredictor) else predictor


def _contexts(predictor):
    # paired samples repeat a context once per action
    return list(dict.fromkeys(s.context for s in _base(predictor).samples))


def _weights(esp, schema):
    if not esp.feature_weights:
        return None
    for name in esp.feature_weights:
        schema.index(name)          # raises UnknownFeature
    return [float(esp.feature_weights.get(name, 1.0)) for name in schema.names]


def _env_esp(config, path, predictor, metrics, log):
    esp = config.esp
    env = make_env(config.domain, config.env)
    schema = env.schema
    if predictor is None:
        rng = random.Random(config.seed)
        samples = collect_env(env, esp.prescriptors, esp.samples, esp.horizon,
                              config.evolution, rng, config.env.action_mode,
                              esp.rollout, esp.paired, esp.stride)
        save_samples_csv(samples, os.path.join(path, "samples.csv"), schema.names,
                         ("survived",))
        ranges = [(f.min, f.max) for f in schema.features]
        predictor = KnnPredictor(esp.k, env.actions, ranges).fit(samples)
    contexts = _contexts(predictor)
    result = esp_evolve(predictor, contexts, config.evolution, schema, env.actions,
                        config.env.action_mode, esp.direction, log, metrics)
    champion = result.champion.genome
    surrogate = SurrogateEvaluator(predictor, contexts, schema,
                                   config.env.action_mode, esp.direction)
    predicted = surrogate.mean_outcome(champion)
    real = validate_env(champion, config.domain, config.env)
    report = EspReport(
        samples=len(predictor.samples),
        surrogate_fitness=result.champion.fitness[0],
        predicted_outcome=predicted,
        real_score=real,
        # both sides as survival fractions of their own horizon
        gap=predicted / esp.horizon - real / config.env.max_frames,
        baseline_outcome=random_prescriptor_baseline(predictor, contexts, env.actions),
        solved=(real >= SOLVED_REWARD) if config.domain == "cartpole" else None,
    )
    return predictor, result, report


def _table_esp(config, path, predictor, metrics, log):
    esp = config.esp
    schema = domain_schema(config)
    table = build_table(config, schema)
    schema = table.schema
    actions = domain_actions(config, schema, table, esp=True)
    train, holdout, _ = split(table, (1.0 - esp.holdout, esp.holdout, 0.0), config.seed)
    weights = _weights(esp, schema)
    if predictor is None:
        predictor = InterventionPredictor(KnnPredictor(esp.k, weights=weights), schema,
                                          esp.interventions)
        predictor.fit(collect_table(train))
    contexts = _contexts(predictor)
    result = esp_evolve(predictor, contexts, config.evolution, schema, actions,
                        HARD_MAX, esp.direction, log, metrics)
    champion = result.champion.genome
    predicted = SurrogateEvaluator(predictor, contexts, schema,
                                   HARD_MAX).mean_outcome(champion)
    holdout_outcome = validate_holdout(champion, holdout, schema, esp.k,
                                       esp.interventions, weights=weights)
    report = EspReport(
        samples=len(_base(predictor).samples),
        surrogate_fitness=result.champion.fitness[0],
        predicted_outcome=predicted,
        real_score=holdout_outcome,
        gap=predicted - holdout_outcome,
        baseline_outcome=random_prescriptor_baseline(predictor, contexts, actions),
        predictor_mcc=predictor_mcc(table, esp.k, esp.holdout, config.seed,
                                    weights=weights),
    )
    return predictor, result, report


def run_esp(config, path, predictor_path=None, metrics=None):
    """Collect, fit, evolve against the surrogate, then validate for real."""
    metrics = metrics or Metrics()
    log = GenerationLog(os.path.join(path, "generations.jsonl"))
    predictor = None
    if predictor_path:
        predictor = load_predictor(predictor_path, domain_schema(config)
                                   if config.domain not in ENV_DOMAINS else None)
        logger.info("reusing predictor from %s", predictor_path)
    if config.domain in ENV_DOMAINS:
        predictor, result, esp_report = _env_esp(config, path, predictor, metrics, log)
    else:
        predictor, result, esp_report = _table_esp(config, path, predictor, metrics, log)
    save_predictor(predictor, os.path.join(path, "predictor.json"))
    logger.info("surrogate %.4f predicted %.4f real %.4f", esp_report.surrogate_fitness,
                esp_report.predicted_outcome, esp_report.real_score)
    report = {"domain": config.domain, "seed": config.seed,
              "generations": result.generations_run, "esp": esp_report.to_dict(),
              "direction": config.esp.direction}
    persist(path, config, result, report)
    return result, report


# single rule sets

def evaluate_rules(config, rs):
    """Fitness and times_applied of one rule set on the configured domain."""
    counts = ApplicationCounts(len(rs.rules))
    if config.domain in ENV_DOMAINS:
        env = make_env(config.domain, config.env)
        fitness = run_episodes(env, rs, validation_spec(config.env), counts)
    else:
        table = build_table(config, domain_schema(config))
        evaluator = TableEvaluator(table, config.scoring, config.env.action_mode)
        fitness = evaluator(rs).fitness[0]
        evaluator.predict(rs, counts)
    return fitness, counts


def simulate(config, rs, seed):
    env = make_env(config.domain, config.env)
    return trace_episode(env, rs, seed, config.env.action_mode)
