"""Non-dominated archive over objective vectors (maximization)."""

from src.errors import DimensionMismatch


def dominates(a, b):
    """True if a is >= b in every objective and > in at least one."""
    if len(a) != len(b):
        raise DimensionMismatch(f"objective vectors differ in length: {len(a)} vs {len(b)}")
    better = False
    for x, y in zip(a, b):
        if x < y:
            return False
        if x > y:
            better = True
    return better


def non_dominated(points):
    """Brute-force filter; the reference the archive must agree with."""
    out = []
    for i, p in enumerate(points):
        if not any(dominates(q, p) for j, q in enumerate(points) if j != i):
            out.append(p)
    return out


class ParetoArchive:
    def __init__(self, dimensions=None):
        self.dimensions = dimensions
        self.members = []

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def fitnesses(self):
        return [tuple(m.fitness) for m in self.members]

    def offer(self, candidate):
        """Insert unless dominated; returns (inserted, evicted count)."""
        fitness = tuple(candidate.fitness)
        if self.dimensions is None:
            self.dimensions = len(fitness)
        elif len(fitness) != self.dimensions:
            raise DimensionMismatch(
                f"candidate has {len(fitness)} objectives, archive has {self.dimensions}")

        for member in self.members:
            if dominates(member.fitness, fitness):
                return False, 0
            # equal vectors: keep the incumbent
            if tuple(member.fitness) == fitness:
                return False, 0
        kept = [m for m in self.members if not dominates(fitness, m.fitness)]
        evicted = len(self.members) - len(kept)
        kept.append(candidate)
        self.members = kept
        return True, evicted

    def best(self, objective=0):
        if not self.members:
            return None
        return max(self.members, key=lambda m: m.fitness[objective])


def update_archive(archive, candidate, metrics=None):
    inserted, evicted = archive.offer(candidate)
    if metrics is not None:
        metrics.record_archive(inserted, evicted)
    return archive
