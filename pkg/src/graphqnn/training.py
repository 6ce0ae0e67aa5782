"""Training protocol: fresh balanced batches per epoch, multi-run statistics."""
from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .ansatz import AnsatzKind
from .estimator import GraphConnectivityClassifier, check_graphs, squared_loss
from .graphs import Graph, LabeledGraph, sample_balanced_batch

# column names of the combined CSV, per ansatz: (mean, three-sigma)
CSV_COLUMNS = {
    AnsatzKind.PERMUTATION_INVARIANT: ("Sn", "sn-error"),
    AnsatzKind.CYCLIC_INVARIANT: ("Cn2", "cn2-error"),
    AnsatzKind.STANDARD: ("entanglement", "en-error"),
}


@dataclass(frozen=True)
class TrainingConfig:
    ansatz: str = "perm"
    layers: int | None = None
    n_nodes: int = 8
    epochs: int = 50
    batch_per_epoch: int = 100
    validation_size: int = 2900
    runs: int = 10
    optimizer: str = "adam"
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 1
    init_scale: float = float(np.pi)
    edge_probability: float | None = None  # None: p ~ Uniform(0, 1) per draw
    shared_validation: bool = False
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ansatz", AnsatzKind(self.ansatz).value)
        if self.batch_per_epoch < 2 or self.batch_per_epoch % 2:
            raise ValueError("batch_per_epoch must be a positive even integer")
        if self.validation_size < 2 or self.validation_size % 2:
            raise ValueError("validation_size must be a positive even integer")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.layers is not None and self.layers < 1:
            raise ValueError("layers must be >= 1")

    def estimator(self, random_state=None) -> GraphConnectivityClassifier:
        return GraphConnectivityClassifier(
            ansatz=self.ansatz, layers=self.layers, n_nodes=self.n_nodes,
            optimizer=self.optimizer, learning_rate=self.learning_rate,
            beta1=self.beta1, beta2=self.beta2, epsilon=self.epsilon,
            batch_size=self.batch_size, init_scale=self.init_scale,
            random_state=random_state,
        )


@dataclass
class RunResult:
    seed: list[int]
    accuracy: list[float]
    train_loss: list[float]
    params: np.ndarray = field(repr=False)


@dataclass
class RunMetrics:
    config: TrainingConfig
    runs: list[RunResult]

    @property
    def accuracy(self) -> np.ndarray:
        """``(runs, epochs)`` validation accuracy after each epoch."""
        return np.array([r.accuracy for r in self.runs])

    @property
    def mean(self) -> np.ndarray:
        return self.accuracy.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        # population std, so a single run reports 0
        return self.accuracy.std(axis=0)

    @property
    def three_sigma(self) -> np.ndarray:
        return 3.0 * self.std

    def models(self) -> list[GraphConnectivityClassifier]:
        return [self.config.estimator().set_model(r.params) for r in self.runs]

    def to_csv(self) -> str:
        return metrics_csv([self])

    def to_json(self) -> dict:
        return {
            "version": __version__,
            "config": asdict(self.config),
            "mean": self.mean.tolist(),
            "three_sigma": self.three_sigma.tolist(),
            "runs": [
                {"seed": r.seed, "accuracy": r.accuracy, "train_loss": r.train_loss,
                 "params": r.params.tolist()}
                for r in self.runs
            ],
        }


def loss(prediction: float, label: int) -> float:
    """Squared error against a ±1 label."""
    return squared_loss(prediction, label)


def predict(model: GraphConnectivityClassifier, g: Graph) -> float:
    """Raw readout of ``model`` on a single graph."""
    return float(model.decision_function([g])[0])


def _split(batch):
    if not batch:
        raise ValueError("empty batch")
    graphs = check_graphs([item.graph for item in batch])
    return graphs, [item.label for item in batch]


def train_epoch(model: GraphConnectivityClassifier, batch: list[LabeledGraph]) -> float:
    """One optimizer pass over ``batch`` in order; returns the mean training loss."""
    graphs, labels = _split(batch)
    model.partial_fit(graphs, labels)
    return model.loss_curve_[-1]


def evaluate_accuracy(model: GraphConnectivityClassifier, validation: list[LabeledGraph]) -> float:
    """Fraction of graphs whose readout sign equals the label; zero is never correct."""
    graphs, labels = _split(validation)
    return model.score(graphs, labels)


def run_seeds(master_seed: int, run: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(run,))


def _validation(config: TrainingConfig, seq: np.random.SeedSequence) -> list[LabeledGraph]:
    return sample_balanced_batch(
        config.n_nodes, config.validation_size, np.random.default_rng(seq),
        config.edge_probability,
    )


def train_run(config: TrainingConfig, run: int) -> RunResult:
    """Train one seeded run and record validation accuracy after every epoch."""
    root = run_seeds(config.master_seed, run)
    init_seq, data_seq, val_seq = root.spawn(3)
    if config.shared_validation:
        val_seq = np.random.SeedSequence(config.master_seed, spawn_key=(2**31,))
    validation = _validation(config, val_seq)
    data_rng = np.random.default_rng(data_seq)
    model = config.estimator(random_state=np.random.default_rng(init_seq))
    accuracy, losses = [], []
    for _ in range(config.epochs):
        batch = sample_balanced_batch(
            config.n_nodes, config.batch_per_epoch, data_rng, config.edge_probability
        )
        losses.append(train_epoch(model, batch))
        accuracy.append(evaluate_accuracy(model, validation))
    return RunResult([config.master_seed, run], accuracy, losses, model.params_.copy())


def _train_run_args(args):
    return train_run(*args)


def run_experiment(config: TrainingConfig, workers: int | None = 1) -> RunMetrics:
    """All runs of one configuration; ``workers > 1`` trains runs in parallel.

    Results depend only on the config, never on the worker count.
    """
    jobs = [(config, r) for r in range(config.runs)]
    workers = os.cpu_count() if workers is None else workers
    if workers <= 1 or config.runs == 1:
        results = [train_run(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, config.runs)) as pool:
            results = list(pool.map(_train_run_args, jobs))
    return RunMetrics(config, results)


def metrics_csv(metrics: list[RunMetrics]) -> str:
    """Per-epoch mean and three-sigma columns.

    With all three ansatz kinds the header is the combined
    ``epochs,Sn,sn-error,Cn2,cn2-error,entanglement,en-error``; a single
    experiment gives ``epochs,mean,three_sigma``.
    """
    by_kind = {AnsatzKind(m.config.ansatz): m for m in metrics}
    if len(metrics) == 1:
        header = ["epochs", "mean", "three_sigma"]
        columns = [(metrics[0].mean, metrics[0].three_sigma)]
    elif len(by_kind) == len(metrics) == 3:
        header, columns = ["epochs"], []
        for kind in AnsatzKind:
            header += CSV_COLUMNS[kind]
            columns.append((by_kind[kind].mean, by_kind[kind].three_sigma))
    else:
        raise ValueError("expected one experiment or one per ansatz kind")
    n_epochs = {len(m.mean) for m in metrics}
    if len(n_epochs) != 1:
        raise ValueError("experiments disagree on the number of epochs")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for e in range(n_epochs.pop()):
        row = [e + 1]
        for mean, err in columns:
            row += [repr(float(mean[e])), repr(float(err[e]))]
        writer.writerow(row)
    return buf.getvalue()


def metrics_json(metrics: list[RunMetrics]) -> str:
    """Per-run trajectories, final parameters and resolved configs."""
    payload = {"version": __version__, "experiments": [m.to_json() for m in metrics]}
    return json.dumps(payload, indent=1) + "\n"
