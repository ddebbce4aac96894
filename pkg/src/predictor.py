"""Outcome predictors for surrogate-assisted prescription."""

import json
from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np

from src.errors import NotFitted, TooFewSamples


@dataclass(frozen=True)
class DecisionSample:
    context: tuple
    action: Optional[str]   # None for context-only tables
    outcome: tuple


class Predictor(Protocol):
    actions: tuple

    def fit(self, samples): ...

    def predict(self, context, action=None) -> tuple: ...


class KnnPredictor:
    """k-nearest-neighbour regression; a prediction is the plain neighbour mean.

    Distance is Euclidean over range-normalized context plus a one-hot action
    block; ties keep insertion order. Optional per-column weights stretch the
    normalized context axes.
    """

    def __init__(self, k=5, actions=(), ranges=None, weights=None):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self.actions = tuple(actions)
        self.ranges = ranges        # [(lo, hi)] per context column, else from data
        self.weights = None if weights is None else tuple(float(w) for w in weights)
        if self.weights and min(self.weights) < 0:
            raise ValueError("weights must be >= 0")
        self.samples = []
        self._x = None
        self._y = None

    @property
    def fitted(self):
        return self._x is not None

    def _encode(self, context, action):
        lo, width = self._scale
        x = (np.asarray(context, dtype=float) - lo) / width
        if self.weights is not None:
            x = x * np.asarray(self.weights)
        if not self.actions:
            return x
        onehot = np.zeros(len(self.actions))
        if action is not None:
            onehot[self.actions.index(action)] = 1.0
        return np.concatenate([x, onehot])

    def fit(self, samples):
        samples = list(samples)
        if len(samples) < self.k:
            raise TooFewSamples(f"need at least k={self.k} samples, got {len(samples)}")
        contexts = np.array([s.context for s in samples], dtype=float)
        if self.weights is not None and len(self.weights) != contexts.shape[1]:
            raise ValueError(f"{len(self.weights)} weights for {contexts.shape[1]} columns")
        if self.ranges is None:
            lo, hi = contexts.min(axis=0), contexts.max(axis=0)
        else:
            lo = np.array([r[0] for r in self.ranges], dtype=float)
            hi = np.array([r[1] for r in self.ranges], dtype=float)
        width = hi - lo
        width[width == 0] = 1.0
        self._scale = (lo, width)
        self.samples = samples
        self._x = np.array([self._encode(s.context, s.action) for s in samples])
        self._y = np.array([s.outcome for s in samples], dtype=float)
        return self

    def predict(self, context, action=None):
        if not self.fitted:
            raise NotFitted("predictor has not been fitted")
        q = self._encode(context, action)
        dist = np.sqrt(np.sum((self._x - q) ** 2, axis=1))
        nearest = np.argsort(dist, kind="stable")[: self.k]
        return tuple(float(v) for v in self._y[nearest].mean(axis=0))

    def to_dict(self):
        if not self.fitted:
            raise NotFitted("predictor has not been fitted")
        lo, width = self._scale
        return {
            "kind": "knn",
            "k": self.k,
            "actions": list(self.actions),
            "ranges": [[float(a), float(a + w)] for a, w in zip(lo, width)],
            "weights": None if self.weights is None else list(self.weights),
            "samples": [
                {"context": list(s.context), "action": s.action,
                 "outcome": list(s.outcome)}
                for s in self.samples
            ],
        }


def knn_from_dict(doc):
    samples = [DecisionSample(tuple(s["context"]), s["action"], tuple(s["outcome"]))
               for s in doc["samples"]]
    return KnnPredictor(doc["k"], doc["actions"], doc["ranges"],
                        doc.get("weights")).fit(samples)


class InterventionPredictor:
    """Maps each action to a treated feature level over a context-only model."""

    def __init__(self, base, schema, interventions):
        self.base = base
        self.schema = schema
        self.interventions = dict(interventions)
        self.actions = tuple(self.interventions)
        self._columns = {a: schema.index(spec["feature"])
                         for a, spec in self.interventions.items()}

    @property
    def fitted(self):
        return self.base.fitted

    def fit(self, samples):
        self.base.fit(samples)
        return self

    def treated(self, context, action):
        ctx = list(context)
        ctx[self._columns[action]] = float(self.interventions[action]["level"])
        return ctx

    def predict(self, context, action=None):
        if action is None:
            return self.base.predict(context)
        return self.base.predict(self.treated(context, action))

    def to_dict(self):
        return {"kind": "intervention", "interventions": self.interventions,
                "base": self.base.to_dict()}


def predictor_from_dict(doc, schema=None):
    if doc.get("kind") == "intervention":
        if schema is None:
            raise ValueError("an intervention predictor needs the feature schema")
        return InterventionPredictor(knn_from_dict(doc["base"]), schema,
                                     doc["interventions"])
    return knn_from_dict(doc)


def save_predictor(predictor, path):
    with open(path, "w") as f:
        json.dump(predictor.to_dict(), f, sort_keys=True)


def load_predictor(path, schema=None):
    with open(path, "r") as f:
        return predictor_from_dict(json.load(f), schema)
