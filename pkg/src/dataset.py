"""Tables, CSV loading, windowed time-series features, labels and scoring."""

import csv
import io
import logging
import random
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.errors import (BadFractions, EmptyInput, HeaderMismatch, LengthMismatch,
                        MissingLabel, ParseError, SeriesTooShort)
from src.evolution import Evaluation
from src.rules import FIRST_MATCH, ApplicationCounts, InputFrame, eval_ruleset
from src.schema import BINARY, FeatureSchema, FeatureSpec, load_schema

logger = logging.getLogger(__name__)

LOW, NORMAL, HIGH = "Low", "Normal", "High"
LOW_MAX = 55.0      # mmHg, inclusive
NORMAL_MAX = 85.0   # mmHg, inclusive


@dataclass
class Table:
    schema: FeatureSchema
    rows: list
    labels: Optional[list] = None
    # per-row earlier rows (oldest first) for lagged features
    lookback: Optional[list] = None
    report: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        width = len(self.schema)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise LengthMismatch(f"row {i} has {len(row)} values, schema has {width}")
        if self.labels is not None and len(self.labels) != len(self.rows):
            raise LengthMismatch("labels and rows differ in length")

    def __len__(self):
        return len(self.rows)

    @property
    def classes(self):
        return tuple(sorted(set(self.labels))) if self.labels is not None else ()

    def frame(self, i):
        history = [self.rows[i]]
        if self.lookback is not None:
            history = list(self.lookback[i]) + history
        return InputFrame(self.schema, history)

    def frames(self):
        for i in range(len(self.rows)):
            yield self.frame(i)

    def column(self, name):
        j = self.schema.index(name)
        return [row[j] for row in self.rows]

    def subset(self, indices):
        return Table(
            self.schema,
            [self.rows[i] for i in indices],
            [self.labels[i] for i in indices] if self.labels is not None else None,
            [self.lookback[i] for i in indices] if self.lookback is not None else None,
        )


# csv

def _open_text(path):
    if path.endswith(".zst"):
        import zstandard
        raw = open(path, "rb")
        reader = zstandard.ZstdDecompressor().stream_reader(raw)
        return io.TextIOWrapper(reader, encoding="utf-8", newline="")
    return open(path, "r", newline="")


def _column_name(header, schema):
    # public CSVs use snake_case where schemas use dotted names
    if header in schema:
        return header
    return header.replace("_", ".")


def load_csv(path, schema, label=None, require_labels=False):
    """Read a CSV whose header names the schema features plus an optional label."""
    if isinstance(schema, str):
        schema = load_schema(schema)
    with _open_text(path) as f:
        reader = csv.reader(f)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise HeaderMismatch(f"{path}: missing header") from None
        label_col = None
        columns = {}
        for j, h in enumerate(header):
            if label is not None and h in (label, label.replace(".", "_")):
                label_col = j
                continue
            name = _column_name(h, schema)
            if name not in schema:
                raise HeaderMismatch(f"{path}: column {h!r} is not in the schema")
            columns[name] = j
        missing = [n for n in schema.names if n not in columns]
        if missing:
            raise HeaderMismatch(f"{path}: missing columns {missing}")
        if label_col is None and require_labels:
            raise MissingLabel(f"{path}: no label column {label!r}")

        order = [columns[n] for n in schema.names]
        specs = schema.features
        rows, labels, report = [], [] if label_col is not None else None, []
        for r, record in enumerate(reader, start=1):
            if not record:
                continue
            if len(record) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(record)}",
                                 r, len(record))
            row = []
            for spec, j in zip(specs, order):
                try:
                    x = float(record[j])
                except ValueError:
                    raise ParseError(f"not a number: {record[j]!r}", r, j + 1) from None
                if spec.kind == BINARY and x not in (0.0, 1.0):
                    raise ParseError(f"{spec.name} must be 0 or 1, got {x}", r, j + 1)
                if not spec.min <= x <= spec.max:
                    report.append((r, spec.name, x))
                row.append(x)
            rows.append(tuple(row))
            if label_col is not None:
                labels.append(record[label_col].strip())

    if report:
        logger.warning("%s: %d values outside declared ranges (first: row %d %s=%s)",
                       path, len(report), *report[0])
    return Table(schema, rows, labels, report=report)


def save_csv(table, path, label="label"):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        header = list(table.schema.names)
        if table.labels is not None:
            header.append(label)
        writer.writerow(header)
        for i, row in enumerate(table.rows):
            values = [repr(float(x)) for x in row]
            if table.labels is not None:
                values.append(table.labels[i])
            writer.writerow(values)


def normalize(table):
    """Min-max scale every feature into [0, 1] using the declared ranges."""
    specs = []
    for spec in table.schema.features:
        if spec.kind == BINARY:
            specs.append(spec)
        else:
            specs.append(FeatureSpec(spec.name, 0.0, 1.0))
    schema = FeatureSchema(tuple(specs), table.schema.actions, table.schema.max_lag)
    lo = np.array([s.min for s in table.schema.features])
    width = np.array([s.width for s in table.schema.features])

    def scale(row):
        return tuple(float(v) for v in (np.asarray(row) - lo) / width)

    rows = [scale(r) for r in table.rows]
    lookback = None
    if table.lookback is not None:
        lookback = [tuple(scale(r) for r in back) for back in table.lookback]
    return Table(schema, rows, table.labels, lookback)


# time series

def moments(window):
    """Mean, sample Std, Skew and non-excess Kurtosis of one window."""
    x = np.asarray(window, dtype=float)
    mean = float(x.mean())
    std = float(x.std(ddof=1)) if len(x) > 1 else 0.0
    d = x - mean
    m2 = float(np.mean(d ** 2))
    if m2 <= 1e-12:
        # flat window: no shape to measure
        return {"Mean": mean, "Std": 0.0, "Skew": 0.0, "Kurtosis": 0.0}
    return {
        "Mean": mean,
        "Std": std,
        "Skew": float(np.mean(d ** 3)) / m2 ** 1.5,
        "Kurtosis": float(np.mean(d ** 4)) / m2 ** 2,
    }


def _check_length(series, spec):
    need = (spec.max_lag + 1) * spec.window_len + spec.horizon + spec.horizon_len
    if len(series) < need:
        raise SeriesTooShort(f"series has {len(series)} frames, need {need}")


def _valid_buckets(n, spec):
    # bucket b ends at frame t = (b + 1) * window_len - 1; its label window
    # x[t + horizon : t + horizon + horizon_len] must fit in the series
    w = spec.window_len
    out = []
    for b in range(spec.max_lag, n // w):
        t = (b + 1) * w - 1
        if t + spec.horizon + spec.horizon_len <= n:
            out.append(b)
    return out


def _derived_schema(stats, rows, max_lag):
    specs = []
    for j, stat in enumerate(stats):
        values = [r[j] for r in rows]
        lo, hi = min(values), max(values)
        if hi <= lo:
            hi = lo + 1.0
        specs.append(FeatureSpec(stat, float(np.floor(lo)), float(np.ceil(hi))))
    return FeatureSchema(tuple(specs), (LOW, NORMAL, HIGH), max_lag)


def window_features(series, spec, schema=None, labels=None):
    """Aggregate rows per bucket; row t reads Stat[l] from l buckets back."""
    _check_length(series, spec)
    x = np.asarray(series, dtype=float)
    w = spec.window_len
    buckets = [moments(x[b * w:(b + 1) * w]) for b in range(len(x) // w)]
    agg = [tuple(m[s] for s in spec.stats) for m in buckets]
    valid = _valid_buckets(len(x), spec)
    if schema is None:
        schema = _derived_schema(spec.stats, agg, spec.max_lag)
    rows = [agg[b] for b in valid]
    lookback = [tuple(agg[b - spec.max_lag:b]) for b in valid]
    return Table(schema, rows, labels, lookback)


def label_for(mbar):
    if mbar <= LOW_MAX:
        return LOW
    if mbar <= NORMAL_MAX:
        return NORMAL
    return HIGH


def label_map(series, spec):
    _check_length(series, spec)
    x = np.asarray(series, dtype=float)
    labels = []
    for b in _valid_buckets(len(x), spec):
        t = (b + 1) * spec.window_len - 1
        window = x[t + spec.horizon:t + spec.horizon + spec.horizon_len]
        labels.append(label_for(float(window.mean())))
    return labels


def series_table(series, spec, schema=None):
    return window_features(series, spec, schema, label_map(series, spec))


def synthetic_map_series(config):
    """Blood-pressure-like series: mean-reverting drift, noise, hypotension dips."""
    rng = np.random.default_rng(config.seed)
    n = config.length
    level = config.base_mmHg
    out = np.empty(n)
    dip = np.zeros(n)
    t = 0
    while t < n:
        if rng.random() < config.episode_rate:
            length = int(rng.integers(60, 240))
            depth = config.episode_depth * rng.uniform(0.6, 1.2)
            # smooth onset and recovery
            shape = np.sin(np.linspace(0.0, np.pi, length)) ** 0.5
            end = min(n, t + length)
            dip[t:end] = np.maximum(dip[t:end], depth * shape[: end - t])
            t = end
        t += 1
    for i in range(n):
        level += 0.02 * (config.base_mmHg - level) + rng.normal(0.0, config.drift_sd)
        out[i] = level - dip[i] + rng.normal(0.0, config.noise_sd)
    return np.clip(out, 20.0, 200.0)


# heart failure stand-in

HEART_FAILURE_COLUMNS = (
    "age", "anaemia", "creatinine_phosphokinase", "diabetes",
    "ejection_fraction", "high_blood_pressure", "platelets",
    "serum_creatinine", "serum_sodium", "sex", "smoking", "time",
)


def synthetic_heart_failure(n, seed, schema):
    """Table with the public heart-failure layout and plausible risk structure."""
    rng = np.random.default_rng(seed)
    age = np.clip(rng.normal(61, 12, n), 40, 95).round()
    anaemia = rng.binomial(1, 0.43, n)
    cpk = np.clip(rng.lognormal(5.6, 1.0, n), 23, 7861).round()
    diabetes = rng.binomial(1, 0.42, n)
    ef = np.clip(rng.normal(38, 12, n), 14, 80).round()
    hbp = rng.binomial(1, 0.35, n)
    platelets = np.clip(rng.normal(263000, 97000, n), 25100, 850000).round()
    creatinine = np.clip(rng.lognormal(0.2, 0.45, n), 0.5, 9.4).round(2)
    sodium = np.clip(rng.normal(136.6, 4.4, n), 113, 148).round()
    sex = rng.binomial(1, 0.65, n)
    smoking = rng.binomial(1, 0.32, n)
    time = np.clip(rng.normal(130, 77, n), 4, 285).round()

    risk = (-1.2 + 0.045 * (age - 60) - 0.07 * (ef - 38) + 0.9 * (creatinine - 1.2)
            - 0.05 * (sodium - 137) - 0.012 * (time - 130) + 0.3 * anaemia)
    death = rng.binomial(1, 1.0 / (1.0 + np.exp(-risk)))

    columns = (age, anaemia, cpk, diabetes, ef, hbp, platelets, creatinine,
               sodium, sex, smoking, time)
    order = [schema.index(_column_name(c, schema)) for c in HEART_FAILURE_COLUMNS]
    rows = []
    for i in range(n):
        row = [0.0] * len(schema)
        for j, col in zip(order, columns):
            row[j] = float(col[i])
        rows.append(tuple(row))
    return Table(schema, rows, [str(int(d)) for d in death])


# scoring

def _cost(weights, truth, pred):
    if truth == pred:
        return float(weights.get(truth, {}).get(pred, 0.0))
    return float(weights.get(truth, {}).get(pred, 1.0))


def score(predictions, labels, spec):
    if len(predictions) != len(labels):
        raise LengthMismatch(f"{len(predictions)} predictions for {len(labels)} labels")
    if not labels:
        raise EmptyInput("nothing to score")
    if spec.kind == "accuracy":
        return sum(p == y for p, y in zip(predictions, labels)) / len(labels)
    weights = spec.class_weights
    seen = set(labels) | set(predictions) | set(weights)
    max_cost = max(_cost(weights, t, p) for t in seen for p in seen)
    if max_cost <= 0:
        return 1.0
    total = sum(_cost(weights, y, p) for p, y in zip(predictions, labels))
    return 1.0 - total / (max_cost * len(labels))


def matthews_corrcoef(y_true, y_pred):
    """Multiclass MCC from the confusion matrix; 0 when undefined."""
    classes = sorted(set(y_true) | set(y_pred))
    index = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)))
    for t, p in zip(y_true, y_pred):
        cm[index[t], index[p]] += 1
    t_sum = cm.sum(axis=1)
    p_sum = cm.sum(axis=0)
    n = cm.sum()
    c = np.trace(cm)
    cov_ytyp = c * n - np.dot(t_sum, p_sum)
    cov_ypyp = n * n - np.dot(p_sum, p_sum)
    cov_ytyt = n * n - np.dot(t_sum, t_sum)
    denom = np.sqrt(cov_ytyt * cov_ypyp)
    if denom == 0:
        return 0.0
    return float(cov_ytyp / denom)


def _boundaries(n, fractions):
    # cumulative half-up rounding: each cut is round(cumulative fraction * n)
    cuts, total = [], 0.0
    for f in fractions:
        total += f
        cuts.append(min(n, int(np.floor(total * n + 0.5))))
    cuts[-1] = n
    return cuts


def split(table, fractions, seed):
    """Deterministic (train, validation, test); stratified when labelled."""
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or any(f < 0 for f in fractions) \
            or abs(sum(fractions) - 1.0) > 1e-9:
        raise BadFractions(f"fractions must be three nonnegative values summing "
                           f"to 1, got {fractions}")
    if len(table) == 0:
        raise EmptyInput("cannot split an empty table")
    rng = random.Random(seed)
    if table.labels is None:
        order = list(range(len(table)))
        rng.shuffle(order)
    else:
        # interleave classes by relative position so every cut is stratified
        keyed = []
        for c in table.classes:
            members = [i for i, y in enumerate(table.labels) if y == c]
            rng.shuffle(members)
            for rank, i in enumerate(members):
                keyed.append(((rank + 0.5) / len(members), rng.random(), i))
        keyed.sort()
        order = [i for _, _, i in keyed]
    cuts = _boundaries(len(order), fractions)
    parts, start = [], 0
    for cut in cuts:
        parts.append(table.subset(order[start:cut]))
        start = cut
    return tuple(parts)


class TableEvaluator:
    """Prediction fitness of a rule set over a labelled table."""

    def __init__(self, table, spec, mode=FIRST_MATCH):
        if table.labels is None:
            raise MissingLabel("prediction fitness needs labels")
        self.table = table
        self.spec = spec
        self.mode = mode

    def predict(self, rs, counts=None):
        return [eval_ruleset(rs, frame, self.mode, counts).action.name
                for frame in self.table.frames()]

    def __call__(self, rs):
        counts = ApplicationCounts(len(rs.rules))
        predictions = self.predict(rs, counts)
        return Evaluation((score(predictions, self.table.labels, self.spec),), counts)