import json
import re
from dataclasses import dataclass, field

from src.errors import ConfigError, UnknownAction, UnknownFeature

NAME_PATTERN = re.compile(r"[A-Za-z][A-Za-z0-9._/\[\)-]*")

CONTINUOUS = "continuous"
BINARY = "binary"


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    min: float
    max: float
    kind: str = CONTINUOUS

    def __post_init__(self):
        if not NAME_PATTERN.fullmatch(self.name or ""):
            raise ConfigError(f"invalid feature name: {self.name!r}", key="features.name")
        if self.kind == BINARY:
            if (self.min, self.max) != (0, 1):
                raise ConfigError(f"binary feature {self.name} must span [0, 1]",
                                  key="features.min")
        elif self.kind == CONTINUOUS:
            if not self.min < self.max:
                raise ConfigError(f"feature {self.name}: min must be < max",
                                  key="features.min")
        else:
            raise ConfigError(f"feature {self.name}: unknown kind {self.kind!r}",
                              key="features.kind")

    @property
    def width(self):
        return self.max - self.min


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple
    actions: tuple = ()
    max_lag: int = 0
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "actions", tuple(self.actions))
        index = {}
        for i, spec in enumerate(self.features):
            if spec.name in index:
                raise ConfigError(f"duplicate feature name: {spec.name}",
                                  key="features.name")
            index[spec.name] = i
        object.__setattr__(self, "_index", index)
        if len(set(self.actions)) != len(self.actions):
            raise ConfigError("duplicate action name", key="actions")
        if self.max_lag < 0:
            raise ConfigError("max_lag must be >= 0", key="max_lag")

    def __len__(self):
        return len(self.features)

    def __contains__(self, name):
        return name in self._index

    @property
    def names(self):
        return [f.name for f in self.features]

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise UnknownFeature(f"unknown feature: {name}") from None

    def spec(self, name):
        return self.features[self.index(name)]

    def check_action(self, name):
        if self.actions and name not in self.actions:
            raise UnknownAction(f"unknown action: {name}")

    def with_actions(self, actions):
        return FeatureSchema(self.features, tuple(actions), self.max_lag)

    def with_max_lag(self, max_lag):
        return FeatureSchema(self.features, self.actions, max_lag)

    def to_dict(self):
        return {
            "features": [
                {"name": f.name, "min": f.min, "max": f.max, "kind": f.kind}
                for f in self.features
            ],
            "actions": list(self.actions),
            "max_lag": self.max_lag,
        }


def schema_from_dict(doc):
    unknown = set(doc) - {"features", "actions", "max_lag"}
    if unknown:
        raise ConfigError(f"unknown schema key: {sorted(unknown)[0]}",
                          key=sorted(unknown)[0])
    if "features" not in doc:
        raise ConfigError("schema is missing 'features'", key="features")
    features = []
    for entry in doc["features"]:
        extra = set(entry) - {"name", "min", "max", "kind"}
        if extra:
            raise ConfigError(f"unknown feature key: {sorted(extra)[0]}",
                              key=f"features.{sorted(extra)[0]}")
        kind = entry.get("kind", CONTINUOUS)
        lo, hi = (0, 1) if kind == BINARY else (entry["min"], entry["max"])
        features.append(FeatureSpec(entry["name"], float(entry.get("min", lo)),
                                    float(entry.get("max", hi)), kind))
    return FeatureSchema(tuple(features), tuple(doc.get("actions", ())),
                         int(doc.get("max_lag", 0)))


def load_schema(path):
    with open(path, "r") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return schema_from_dict(doc)


def save_schema(schema, path):
    with open(path, "w") as f:
        json.dump(schema.to_dict(), f, indent=2)
