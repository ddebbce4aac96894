"""Generational loop: initialization, evaluation, elitism, reproduction."""

import functools
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from src.errors import EvaluatorFailure, EvoterError
from src.generate import random_ruleset
from src.metrics import Metrics
from src.operators import reproduce, tournament_select
from src.pareto import ParetoArchive, update_archive
from src.rules import ApplicationCounts, RuleSet

logger = logging.getLogger(__name__)


@dataclass
class Evaluation:
    fitness: tuple
    # times_applied gathered while scoring; None when the evaluator has none
    counts: Optional[ApplicationCounts] = None

    @property
    def applied(self):
        return self.counts.as_tuple() if self.counts is not None else None


@dataclass
class Candidate:
    id: int
    genome: RuleSet
    fitness: tuple = ()
    applied: Optional[tuple] = None
    parent_ids: tuple = ()
    generation_born: int = 0

    @property
    def has_snapshot(self):
        return self.applied is not None


@dataclass
class GenerationStats:
    gen: int
    best: tuple
    mean: tuple
    worst: tuple
    size_best: int
    mean_rules: float
    mean_conditions: float
    archive_size: int
    champion_id: int

    def to_record(self):
        return {
            "gen": self.gen,
            "best": list(self.best),
            "mean": list(self.mean),
            "worst": list(self.worst),
            "size_best": self.size_best,
            "mean_rules": self.mean_rules,
            "mean_conditions": self.mean_conditions,
            "archive_size": self.archive_size,
            "champion_id": self.champion_id,
        }


@dataclass
class RunResult:
    stats: list = field(default_factory=list)
    population: list = field(default_factory=list)
    archive: ParetoArchive = field(default_factory=ParetoArchive)
    metrics: Metrics = field(default_factory=Metrics)

    @property
    def champion(self):
        if not self.population:
            return None
        return rank(self.population)[0]

    @property
    def generations_run(self):
        return len(self.stats)


def as_evaluation(result):
    if isinstance(result, Evaluation):
        return Evaluation(tuple(float(f) for f in result.fitness), result.counts)
    if isinstance(result, (int, float)):
        return Evaluation((float(result),))
    return Evaluation(tuple(float(f) for f in result))


def _score(evaluator, genome):
    # module-level so it pickles for the process pool
    return as_evaluation(evaluator(genome))


def rank(population, objective=0):
    # best first; earlier ids win ties
    return sorted(population, key=lambda c: (-c.fitness[objective], c.id))


def generation_stats(gen, population, archive, objective=0):
    n = len(population)
    dims = len(population[0].fitness)
    best = tuple(max(c.fitness[d] for c in population) for d in range(dims))
    worst = tuple(min(c.fitness[d] for c in population) for d in range(dims))
    mean = tuple(sum(c.fitness[d] for c in population) / n for d in range(dims))
    champion = rank(population, objective)[0]
    return GenerationStats(
        gen=gen,
        best=best,
        mean=mean,
        worst=worst,
        size_best=len(champion.genome),
        mean_rules=sum(len(c.genome) for c in population) / n,
        mean_conditions=sum(c.genome.num_conditions for c in population) / n,
        archive_size=len(archive),
        champion_id=champion.id,
    )


class _Engine:
    def __init__(self, evaluator, params, schema, actions, executor=None,
                 metrics=None):
        self.evaluator = evaluator
        self.params = params
        self.schema = schema
        self.actions = tuple(actions)
        self.executor = executor
        self.rng = random.Random(params.seed)
        self.next_id = 0
        self.result = RunResult(metrics=metrics or Metrics())

    def new_candidate(self, genome, parent_ids=(), gen=0):
        candidate = Candidate(self.next_id, genome, parent_ids=parent_ids,
                              generation_born=gen)
        self.next_id += 1
        return candidate

    def evaluate(self, candidates, gen):
        score = functools.partial(_score, self.evaluator)
        genomes = [c.genome for c in candidates]
        try:
            if self.executor is not None:
                evaluations = list(self.executor.map(score, genomes))
            else:
                evaluations = [score(g) for g in genomes]
        except EvoterError as exc:
            if isinstance(exc, EvaluatorFailure):
                exc.partial = self.result
                raise
            raise EvaluatorFailure(f"generation {gen}: {exc}", self.result) from exc
        except Exception as exc:
            raise EvaluatorFailure(f"generation {gen}: evaluator raised "
                                   f"{type(exc).__name__}: {exc}", self.result) from exc

        archive = self.result.archive
        metrics = self.result.metrics
        for candidate, ev in zip(candidates, evaluations):
            candidate.fitness = ev.fitness
            if ev.counts is not None:
                candidate.applied = ev.applied
                candidate.genome = candidate.genome.with_counts(ev.counts)
            metrics.record_evaluation(candidate.applied)
            update_archive(archive, candidate, metrics)
        return candidates

    def initial_population(self, seeds=()):
        genomes = list(seeds)[: self.params.population_size]
        while len(genomes) < self.params.population_size:
            genomes.append(random_ruleset(self.schema, self.actions, self.params,
                                          self.rng))
        return [self.new_candidate(g) for g in genomes]

    def next_generation(self, population, gen):
        p = self.params
        elites = rank(population, p.selection_objective)[: p.elitism_count]
        offspring = []
        for _ in range(p.population_size - len(elites)):
            a = tournament_select(population, p.tournament_size, self.rng,
                                  p.selection_objective)
            b = tournament_select(population, p.tournament_size, self.rng,
                                  p.selection_objective)
            child = reproduce(a.genome, b.genome, p, self.schema, self.actions,
                              self.rng, self.result.metrics,
                              filter_inactive=a.has_snapshot and b.has_snapshot)
            offspring.append(self.new_candidate(child, (a.id, b.id), gen))
        return elites + self.evaluate(offspring, gen)

    def record(self, gen, population, on_generation):
        self.result.population = population
        stats = generation_stats(gen, population, self.result.archive,
                                 self.params.selection_objective)
        self.result.stats.append(stats)
        self.result.metrics.end_generation(stats.best[0], stats.mean_rules)
        logger.info("gen %d best %s mean %s size %d archive %d", gen,
                    _fmt(stats.best), _fmt(stats.mean), stats.size_best,
                    stats.archive_size)
        if on_generation is not None:
            on_generation(stats, population, self.result.archive)


def _fmt(values):
    return "[" + ", ".join(f"{v:.4f}" for v in values) + "]"


def evolve(evaluator, params, schema, actions, on_generation=None, seeds=(),
           metrics=None):
    """Run params.generations generations after the random generation 0.

    evaluator maps a RuleSet to an Evaluation, a fitness tuple or a number;
    it must be deterministic and, when params.workers > 1, picklable.
    """
    params.validate()
    executor = None
    if params.workers > 1:
        executor = ProcessPoolExecutor(max_workers=params.workers)
    try:
        engine = _Engine(evaluator, params, schema, actions, executor, metrics)
        population = engine.evaluate(engine.initial_population(seeds), 0)
        engine.record(0, population, on_generation)
        for gen in range(1, params.generations + 1):
            population = engine.next_generation(population, gen)
            engine.record(gen, population, on_generation)
        return engine.result
    finally:
        if executor is not None:
            executor.shutdown()
