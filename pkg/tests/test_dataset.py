import sys, os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

import tempfile

import pytest
import zstandard

from src.config import ScoreSpec, WindowSpec
from src.dataset import (HIGH, LOW, NORMAL, Table, TableEvaluator, label_for,
                         label_map, load_csv, matthews_corrcoef, moments, normalize,
                         save_csv, score, split, synthetic_heart_failure,
                         window_features)
from src.errors import (BadFractions, EmptyInput, HeaderMismatch, LengthMismatch,
                        MissingLabel, ParseError, SeriesTooShort)
from src.rules import Action, Condition, Constant, Rule, RuleSet, Term
from src.schema import BINARY, FeatureSchema, FeatureSpec, load_schema

DATA = os.path.join(os.path.dirname(__file__), "..", "data")


def make_schema():
    return FeatureSchema((FeatureSpec("x", 0.0, 10.0), FeatureSpec("flag", 0, 1, BINARY)),
                         ("A", "B"))


def write(tmp, name, text):
    path = os.path.join(tmp, name)
    with open(path, "w") as f:
        f.write(text)
    return path


def make_table(n=20):
    rows = [(float(i % 10), float(i % 2)) for i in range(n)]
    labels = ["A" if r[0] > 5 else "B" for r in rows]
    return Table(make_schema(), rows, labels)


# csv

def test_load_csv_with_label_and_range_report():
    with tempfile.TemporaryDirectory() as tmp:
        path = write(tmp, "t.csv", "x,flag,label\n1.5,0,A\n12.0,1,B\n\n3,1,A\n")
        table = load_csv(path, make_schema(), label="label")
    assert table.rows == [(1.5, 0.0), (12.0, 1.0), (3.0, 1.0)]
    assert table.labels == ["A", "B", "A"]
    assert table.classes == ("A", "B")
    # out of range values are kept and reported
    assert table.report == [(2, "x", 12.0)]


def test_load_csv_errors():
    schema = make_schema()
    with tempfile.TemporaryDirectory() as tmp:
        with pytest.raises(HeaderMismatch):
            load_csv(write(tmp, "a.csv", "x,z\n1,0\n"), schema)
        with pytest.raises(HeaderMismatch):
            load_csv(write(tmp, "b.csv", "x\n1\n"), schema)
        with pytest.raises(ParseError) as exc:
            load_csv(write(tmp, "c.csv", "x,flag\n1,0\nabc,1\n"), schema)
        assert exc.value.row == 2
        with pytest.raises(ParseError):
            load_csv(write(tmp, "d.csv", "x,flag\n1,0.5\n"), schema)
        with pytest.raises(ParseError):
            load_csv(write(tmp, "e.csv", "x,flag\n1\n"), schema)
        with pytest.raises(MissingLabel):
            load_csv(write(tmp, "f.csv", "x,flag\n1,0\n"), schema, label="y",
                     require_labels=True)


def test_load_csv_zst_and_snake_case_header():
    schema = load_schema(os.path.join(DATA, "heart_failure_schema.json"))
    header = ",".join(n.replace(".", "_") for n in schema.names) + ",DEATH_EVENT"
    row = ",".join(str(s.min) for s in schema.features) + ",1"
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "hf.csv.zst")
        with open(path, "wb") as f:
            f.write(zstandard.ZstdCompressor().compress(f"{header}\n{row}\n".encode()))
        table = load_csv(path, schema, label="DEATH_EVENT")
    assert len(table) == 1
    assert table.labels == ["1"]


def test_save_csv_round_trip():
    table = make_table(6)
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "t.csv")
        save_csv(table, path)
        again = load_csv(path, table.schema, label="label")
    assert again.rows == table.rows
    assert again.labels == table.labels


def test_table_length_checks():
    with pytest.raises(LengthMismatch):
        Table(make_schema(), [(1.0,)])
    with pytest.raises(LengthMismatch):
        Table(make_schema(), [(1.0, 0.0)], ["A", "B"])


def test_normalize_uses_declared_ranges():
    table = Table(make_schema(), [(5.0, 1.0), (0.0, 0.0)], ["A", "B"])
    out = normalize(table)
    assert out.rows == [(0.5, 1.0), (0.0, 0.0)]
    assert out.schema.spec("x").max == 1.0
    assert out.schema.spec("flag").kind == BINARY
    assert out.labels == table.labels


# time series

def test_moments():
    m = moments([1.0, 2.0, 3.0, 4.0])
    assert m["Mean"] == 2.5
    assert abs(m["Std"] - (5.0 / 3.0) ** 0.5) < 1e-12
    assert abs(m["Skew"]) < 1e-12
    assert abs(m["Kurtosis"] - 1.64) < 1e-12
    assert moments([7.0, 7.0, 7.0]) == {"Mean": 7.0, "Std": 0.0, "Skew": 0.0,
                                        "Kurtosis": 0.0}


def test_window_features_and_labels():
    spec = WindowSpec(window_len=2, stats=("Mean",), max_lag=1, horizon=1, horizon_len=2)
    series = [float(i) for i in range(10)]
    table = window_features(series, spec)
    # buckets 1..3 are usable: one bucket of lookback, label window inside the series
    assert table.rows == [(2.5,), (4.5,), (6.5,)]
    assert table.lookback == [((0.5,),), ((2.5,),), ((4.5,),)]
    assert table.schema.max_lag == 1
    frame = table.frame(1)
    assert frame.history == [(2.5,), (4.5,)]
    # label window after bucket 1 is frames 4..5
    assert label_map(series, spec) == [LOW, LOW, LOW]


def test_series_too_short():
    spec = WindowSpec(window_len=5, max_lag=2, horizon=3, horizon_len=2)
    with pytest.raises(SeriesTooShort):
        window_features([1.0] * 19, spec)


def test_label_thresholds_are_inclusive():
    assert label_for(55.0) == LOW
    assert label_for(55.01) == NORMAL
    assert label_for(85.0) == NORMAL
    assert label_for(85.5) == HIGH


# scoring

def test_weighted_error_example():
    spec = ScoreSpec("weighted_error", {"Low": {"Normal": 2.0, "High": 2.0}})
    labels = [LOW, NORMAL, HIGH, NORMAL]
    preds = [NORMAL, NORMAL, HIGH, NORMAL]
    assert score(preds, labels, spec) == 0.75


def test_equal_costs_match_accuracy():
    labels = ["A", "B", "B", "A", "C"]
    preds = ["A", "B", "A", "C", "C"]
    acc = score(preds, labels, ScoreSpec())
    assert acc == 0.6
    assert abs(score(preds, labels, ScoreSpec("weighted_error")) - acc) < 1e-12


def test_score_errors():
    with pytest.raises(LengthMismatch):
        score(["A"], ["A", "B"], ScoreSpec())
    with pytest.raises(EmptyInput):
        score([], [], ScoreSpec())


def test_matthews_corrcoef():
    assert matthews_corrcoef(["1", "0", "1", "0"], ["1", "0", "1", "0"]) == 1.0
    assert matthews_corrcoef(["1", "0", "1", "0"], ["0", "1", "0", "1"]) == -1.0
    assert matthews_corrcoef(["1", "0", "1"], ["1", "1", "1"]) == 0.0


# split

def test_split_sizes_and_partition():
    schema = FeatureSchema((FeatureSpec("i", 0.0, 1000.0),), ("A", "B"))
    rows = [(float(i),) for i in range(299)]
    labels = ["A" if i < 200 else "B" for i in range(299)]
    table = Table(schema, rows, labels)
    parts = split(table, (0.5, 0.25, 0.25), seed=4)
    assert [len(p) for p in parts] == [150, 74, 75]
    seen = [r for p in parts for r in p.rows]
    assert sorted(seen) == rows
    for p in parts:
        expected = len(p) * 200 / 299
        assert abs(p.labels.count("A") - expected) <= 1
    again = split(table, (0.5, 0.25, 0.25), seed=4)
    assert [p.rows for p in again] == [p.rows for p in parts]


def test_split_errors():
    table = make_table()
    with pytest.raises(BadFractions):
        split(table, (0.5, 0.5, 0.5), 0)
    with pytest.raises(BadFractions):
        split(table, (0.5, 0.5), 0)
    with pytest.raises(EmptyInput):
        split(Table(make_schema(), []), (0.6, 0.2, 0.2), 0)


def test_unlabelled_split_is_deterministic():
    table = Table(make_schema(), [(float(i % 10), 0.0) for i in range(10)])
    a = split(table, (0.6, 0.2, 0.2), 1)
    b = split(table, (0.6, 0.2, 0.2), 1)
    assert [len(p) for p in a] == [6, 2, 2]
    assert [p.rows for p in a] == [p.rows for p in b]


# evaluator

def test_table_evaluator():
    table = make_table()
    rs = RuleSet((Rule((Condition(Term(1.0, "x"), ">", Constant(5.0)),), Action("A")),),
                 Action("B"))
    ev = TableEvaluator(table, ScoreSpec())
    result = ev(rs)
    assert result.fitness == (1.0,)
    assert result.applied == (8, 12)
    assert ev(RuleSet((), Action("B"))).fitness == (0.6,)
    with pytest.raises(MissingLabel):
        TableEvaluator(Table(make_schema(), [(1.0, 0.0)]), ScoreSpec())


def test_synthetic_heart_failure_layout():
    schema = load_schema(os.path.join(DATA, "heart_failure_schema.json"))
    table = synthetic_heart_failure(299, 0, schema)
    assert len(table) == 299
    assert set(table.labels) <= {"0", "1"}
    assert set(table.column("anaemia")) <= {0.0, 1.0}
    again = synthetic_heart_failure(299, 0, schema)
    assert again.rows == table.rows


if __name__ == "__main__":
    test_load_csv_with_label_and_range_report()
    test_load_csv_errors()
    test_load_csv_zst_and_snake_case_header()
    test_save_csv_round_trip()
    test_table_length_checks()
    test_normalize_uses_declared_ranges()
    test_moments()
    test_window_features_and_labels()
    test_series_too_short()
    test_label_thresholds_are_inclusive()
    test_weighted_error_example()
    test_equal_costs_match_accuracy()
    test_score_errors()
    test_matthews_corrcoef()
    test_split_sizes_and_partition()
    test_split_errors()
    test_unlabelled_split_is_deterministic()
    test_table_evaluator()
    test_synthetic_heart_failure_layout()
    print("all dataset tests passed")
