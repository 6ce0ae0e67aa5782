import json
import math

import numpy as np
import pytest

from graphqnn.estimator import GraphConnectivityClassifier
from graphqnn.graphs import Graph, LabeledGraph, sample_balanced_batch
from graphqnn.optim import SGD, Adam
from graphqnn.training import (
    TrainingConfig,
    evaluate_accuracy,
    loss,
    metrics_csv,
    metrics_json,
    predict,
    run_experiment,
    train_epoch,
)

TINY = dict(layers=2, epochs=3, batch_per_epoch=10, validation_size=20, runs=2)


class Constant(GraphConnectivityClassifier):
    def decision_function(self, X):
        return np.ones(len(X))


class Coin(GraphConnectivityClassifier):
    def decision_function(self, X):
        return np.random.default_rng(17).choice([-1.0, 1.0], size=len(X))


class TestAdam:
    def test_first_step_moves_by_learning_rate(self):
        # bias correction makes the first update lr * sign(grad)
        params = np.array([1.0, -2.0, 0.5])
        Adam(lr=0.1).step(params, np.array([3.0, -0.2, 0.0]))
        np.testing.assert_allclose(params, [0.9, -1.9, 0.5])

    def test_matches_reference_recursion(self):
        rng = np.random.default_rng(0)
        grads = rng.normal(size=(5, 3))
        params = np.zeros(3)
        opt = Adam(lr=0.01)
        m = v = np.zeros(3)
        ref = np.zeros(3)
        for t, g in enumerate(grads, start=1):
            opt.step(params, g)
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g**2
            ref = ref - 0.01 * (m / (1 - 0.9**t)) / (np.sqrt(v / (1 - 0.999**t)) + 1e-8)
        np.testing.assert_allclose(params, ref, rtol=1e-12)

    def test_sgd(self):
        params = np.array([1.0])
        SGD(lr=0.5).step(params, np.array([2.0]))
        assert params[0] == 0.0

    def test_rejects_bad_settings(self):
        with pytest.raises(ValueError):
            Adam(lr=0)
        with pytest.raises(ValueError):
            Adam(beta1=1.0)


class TestFunctions:
    def test_loss(self):
        assert loss(-0.4, -1) == pytest.approx(0.36)

    def test_predict_is_bounded(self, rng):
        model = GraphConnectivityClassifier(layers=2, random_state=0).set_model(rng.normal(size=6))
        assert -1.0 <= predict(model, Graph.complete(8)) <= 1.0

    def test_constant_model_scores_half(self, rng):
        validation = sample_balanced_batch(8, 40, rng)
        assert evaluate_accuracy(Constant(), validation) == 0.5

    def test_coin_model_on_full_validation_size(self, rng):
        validation = sample_balanced_batch(8, 2900, rng)
        assert abs(evaluate_accuracy(Coin(), validation) - 0.5) <= 3 * math.sqrt(0.25 / 2900)

    def test_perfect_model(self, rng):
        validation = sample_balanced_batch(8, 20, rng)

        class Oracle(GraphConnectivityClassifier):
            def decision_function(self, X):
                return np.array([y for _, y in validation], dtype=float)

        assert evaluate_accuracy(Oracle(), validation) == 1.0

    def test_empty_inputs(self):
        with pytest.raises(ValueError):
            evaluate_accuracy(Constant(), [])
        with pytest.raises(ValueError):
            train_epoch(GraphConnectivityClassifier(), [])

    def test_toy_batch_loss_drops(self):
        batch = sample_balanced_batch(8, 10, np.random.default_rng(21))
        model = GraphConnectivityClassifier(random_state=np.random.default_rng(22))
        losses = [train_epoch(model, batch) for _ in range(100)]
        assert losses[-1] <= 0.9 * losses[0]


class TestConfig:
    @pytest.mark.parametrize(
        "bad", [dict(batch_per_epoch=9), dict(validation_size=3), dict(runs=0), dict(epochs=0), dict(ansatz="x")]
    )
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValueError):
            TrainingConfig(**bad)

    def test_defaults(self):
        c = TrainingConfig()
        assert (c.epochs, c.batch_per_epoch, c.validation_size, c.runs) == (50, 100, 2900, 10)
        assert (c.optimizer, c.learning_rate, c.beta1, c.beta2, c.epsilon) == ("adam", 0.01, 0.9, 0.999, 1e-8)


@pytest.fixture(scope="module")
def metrics():
    return run_experiment(TrainingConfig(**TINY, master_seed=3))


class TestExperiment:
    def test_shapes_and_bounds(self, metrics):
        acc = metrics.accuracy
        assert acc.shape == (2, 3)
        assert np.all((acc >= 0) & (acc <= 1))
        assert np.all(metrics.mean >= acc.min(axis=0)) and np.all(metrics.mean <= acc.max(axis=0))
        np.testing.assert_allclose(metrics.three_sigma, 3 * acc.std(axis=0))

    def test_deterministic(self, metrics):
        again = run_experiment(TrainingConfig(**TINY, master_seed=3))
        np.testing.assert_array_equal(again.accuracy, metrics.accuracy)
        for a, b in zip(again.runs, metrics.runs):
            np.testing.assert_array_equal(a.params, b.params)

    def test_worker_count_does_not_change_results(self, metrics):
        parallel = run_experiment(TrainingConfig(**TINY, master_seed=3), workers=2)
        np.testing.assert_array_equal(parallel.accuracy, metrics.accuracy)

    def test_single_run_has_zero_sigma(self):
        m = run_experiment(TrainingConfig(**{**TINY, "runs": 1}))
        assert np.all(m.three_sigma == 0)

    def test_shared_validation(self):
        cfg = TrainingConfig(**TINY, shared_validation=True)
        assert run_experiment(cfg).accuracy.shape == (2, 3)

    def test_models_reproduce_final_accuracy(self, metrics):
        model = metrics.models()[0]
        np.testing.assert_array_equal(model.params_, metrics.runs[0].params)

    def test_single_csv(self, metrics):
        lines = metrics_csv([metrics]).splitlines()
        assert lines[0] == "epochs,mean,three_sigma"
        assert len(lines) == 4
        assert lines[1].split(",")[0] == "1"

    def test_combined_csv(self):
        ms = [run_experiment(TrainingConfig(**{**TINY, "runs": 1, "ansatz": k})) for k in ("standard", "perm", "cyclic")]
        lines = metrics_csv(ms).splitlines()
        assert lines[0] == "epochs,Sn,sn-error,Cn2,cn2-error,entanglement,en-error"
        assert all(len(line.split(",")) == 7 for line in lines)
        with pytest.raises(ValueError):
            metrics_csv(ms[:2])

    def test_json_dump(self, metrics):
        payload = json.loads(metrics_json([metrics]))
        exp = payload["experiments"][0]
        assert exp["config"]["master_seed"] == 3
        assert len(exp["runs"]) == 2 and len(exp["runs"][0]["accuracy"]) == 3


def test_labeled_graph_batch_is_accepted():
    batch = [LabeledGraph(Graph.empty(8), -1), LabeledGraph(Graph.complete(8), 1)]
    model = GraphConnectivityClassifier(layers=1, random_state=0)
    assert train_epoch(model, batch) >= 0
