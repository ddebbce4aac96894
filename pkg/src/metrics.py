from dataclasses import dataclass, field


@dataclass
class Metrics:
    # evaluation counters
    evaluations: int = 0
    rule_firings: int = 0
    default_firings: int = 0

    # reproduction counters
    offspring: int = 0
    clones: int = 0
    splices: int = 0
    products: int = 0
    mutations: int = 0

    # archive counters
    archive_inserts: int = 0
    archive_evictions: int = 0

    # histogram: offspring by mutation kind
    mutations_by_kind: dict = field(default_factory=dict)

    # per-generation best objective-0 fitness, for plotting
    _best_by_generation: list = field(default_factory=list, repr=False)
    _size_by_generation: list = field(default_factory=list, repr=False)

    @property
    def crossovers(self):
        return self.splices + self.products

    @property
    def crossover_rate(self):
        return self.crossovers / self.offspring if self.offspring > 0 else 0.0

    @property
    def mutation_rate(self):
        return self.mutations / self.offspring if self.offspring > 0 else 0.0

    @property
    def default_rate(self):
        total = self.rule_firings + self.default_firings
        return self.default_firings / total if total > 0 else 0.0

    def record_offspring(self, style, kind):
        self.offspring += 1
        if style == "splice":
            self.splices += 1
        elif style == "product":
            self.products += 1
        else:
            self.clones += 1
        if kind is not None:
            self.mutations += 1
            self.mutations_by_kind[kind] = self.mutations_by_kind.get(kind, 0) + 1

    def record_evaluation(self, applied):
        # applied: per-rule counts with the default slot last
        self.evaluations += 1
        if applied:
            self.rule_firings += sum(applied[:-1])
            self.default_firings += applied[-1]

    def record_archive(self, inserted, evicted):
        if inserted:
            self.archive_inserts += 1
        self.archive_evictions += evicted

    def end_generation(self, best, mean_rules):
        self._best_by_generation.append(best)
        self._size_by_generation.append(mean_rules)

    def fitness_curve(self):
        return list(enumerate(self._best_by_generation))

    def size_curve(self):
        return list(enumerate(self._size_by_generation))

    def summary(self):
        return {
            "evaluations": self.evaluations,
            "offspring": self.offspring,
            "clones": self.clones,
            "splices": self.splices,
            "products": self.products,
            "crossover_rate": f"{self.crossover_rate:.4f}",
            "mutation_rate": f"{self.mutation_rate:.4f}",
            "default_rate": f"{self.default_rate:.4f}",
            "archive_inserts": self.archive_inserts,
            "archive_evictions": self.archive_evictions,
            "mutations_by_kind": dict(sorted(self.mutations_by_kind.items())),
        }
