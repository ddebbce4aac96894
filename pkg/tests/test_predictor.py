import sys, os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

import random
import tempfile

import pytest

from src.errors import NotFitted, TooFewSamples
from src.predictor import (DecisionSample, InterventionPredictor, KnnPredictor,
                           load_predictor, save_predictor)
from src.schema import FeatureSchema, FeatureSpec


def make_samples(n=30, seed=0):
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        ctx = (rng.uniform(-1, 1), rng.uniform(-1, 1))
        action = rng.choice(["LEFT", "RIGHT"])
        out.append(DecisionSample(ctx, action, (float(ctx[0] > 0) + (action == "LEFT"),)))
    return out


def test_k1_recalls_training_samples():
    samples = make_samples()
    model = KnnPredictor(1, ("LEFT", "RIGHT")).fit(samples)
    for s in samples:
        assert model.predict(s.context, s.action) == s.outcome


def test_unweighted_mean_of_neighbours():
    samples = [DecisionSample((1.0,), None, (0.0,)), DecisionSample((2.0,), None, (1.0,)),
               DecisionSample((5.0,), None, (9.0,))]
    model = KnnPredictor(2, ranges=[(0.0, 1.0)]).fit(samples)
    assert model.predict((0.0,)) == (0.5,)


def test_action_block_separates_neighbours():
    samples = [DecisionSample((0.0,), "A", (1.0,)), DecisionSample((0.0,), "B", (0.0,))]
    model = KnnPredictor(1, ("A", "B"), ranges=[(0.0, 1.0)]).fit(samples)
    assert model.predict((0.1,), "A") == (1.0,)
    assert model.predict((0.1,), "B") == (0.0,)


def test_errors():
    with pytest.raises(ValueError):
        KnnPredictor(0)
    with pytest.raises(NotFitted):
        KnnPredictor(3).predict((0.0,))
    with pytest.raises(NotFitted):
        KnnPredictor(3).to_dict()
    with pytest.raises(TooFewSamples):
        KnnPredictor(5).fit(make_samples(4))


def test_save_and_load_predicts_identically():
    samples = make_samples(40, seed=3)
    model = KnnPredictor(5, ("LEFT", "RIGHT"), [(-1.0, 1.0), (-1.0, 1.0)]).fit(samples)
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "predictor.json")
        save_predictor(model, path)
        again = load_predictor(path)
    rng = random.Random(9)
    for _ in range(20):
        ctx = (rng.uniform(-1, 1), rng.uniform(-1, 1))
        for a in ("LEFT", "RIGHT"):
            assert again.predict(ctx, a) == model.predict(ctx, a)


def test_intervention_predictor_sets_feature_level():
    schema = FeatureSchema((FeatureSpec("age", 0.0, 1.0), FeatureSpec("ef", 0.0, 1.0)),
                           ("raise_ef",))
    # risk falls with ejection fraction
    samples = [DecisionSample((a / 10, e / 10), None, (1.0 - e / 10,))
               for a in range(5) for e in range(11)]
    model = InterventionPredictor(KnnPredictor(1, ranges=[(0.0, 1.0)] * 2), schema,
                                  {"raise_ef": {"feature": "ef", "level": 0.9}})
    model.fit(samples)
    assert model.actions == ("raise_ef",)
    assert model.treated((0.2, 0.1), "raise_ef") == [0.2, 0.9]
    assert model.predict((0.2, 0.1)) == (0.9,)
    assert abs(model.predict((0.2, 0.1), "raise_ef")[0] - 0.1) < 1e-12
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "predictor.json")
        save_predictor(model, path)
        with pytest.raises(ValueError):
            load_predictor(path)
        again = load_predictor(path, schema)
    assert again.predict((0.2, 0.1), "raise_ef") == model.predict((0.2, 0.1), "raise_ef")


def test_weights_stretch_context_axes():
    samples = [DecisionSample((0.0, 0.3), None, (0.0,)),
               DecisionSample((0.2, 0.0), None, (1.0,))]
    ranges = [(0.0, 1.0), (0.0, 1.0)]
    assert KnnPredictor(1, ranges=ranges).fit(samples).predict((0.0, 0.0)) == (1.0,)
    model = KnnPredictor(1, ranges=ranges, weights=(3.0, 1.0)).fit(samples)
    assert model.predict((0.0, 0.0)) == (0.0,)
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "predictor.json")
        save_predictor(model, path)
        again = load_predictor(path)
    assert again.weights == (3.0, 1.0)
    assert again.predict((0.0, 0.0)) == (0.0,)
    with pytest.raises(ValueError):
        KnnPredictor(1, weights=(-1.0, 1.0))
    with pytest.raises(ValueError):
        KnnPredictor(1, weights=(1.0,)).fit(samples)


if __name__ == "__main__":
    test_k1_recalls_training_samples()
    test_unweighted_mean_of_neighbours()
    test_action_block_separates_neighbours()
    test_errors()
    test_save_and_load_predicts_identically()
    test_intervention_predictor_sets_feature_level()
    test_weights_stretch_context_axes()
    print("all predictor tests passed")
