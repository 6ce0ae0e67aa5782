"""scikit-learn compatible graph-connectivity classifier.

``X`` is a sequence of graphs: :class:`~graphqnn.graphs.Graph` objects,
``(graph, label)`` pairs, or square adjacency matrices (a 3-D array works
too). ``y`` holds +1 for connected and -1 for disconnected graphs.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .ansatz import AnsatzKind, build_ansatz
from .graphs import Graph, GraphError, LabeledGraph
from .optim import make_optimizer
from .simulator import (
    StateVector,
    batch_expectation,
    circuit_unitary,
    run_circuit,
    value_and_gradient,
)


def check_graphs(X, n_nodes: int | None = None) -> list[Graph]:
    """Coerce ``X`` to a non-empty list of graphs on ``n_nodes`` nodes."""
    if isinstance(X, Graph):
        raise GraphError("expected a sequence of graphs, got a single Graph")
    if isinstance(X, np.ndarray) and X.ndim == 3:
        X = list(X)
    graphs = []
    for item in X:
        if isinstance(item, LabeledGraph):
            item = item.graph
        if not isinstance(item, Graph):
            item = Graph.from_adjacency(item)
        graphs.append(item)
    if not graphs:
        raise GraphError("need at least one graph")
    sizes = {g.n_nodes for g in graphs}
    if len(sizes) != 1:
        raise GraphError(f"all graphs must have the same node count, got {sorted(sizes)}")
    if n_nodes is not None and sizes != {n_nodes}:
        raise GraphError(f"expected graphs on {n_nodes} nodes, got {sizes.pop()}")
    return graphs


def check_labels(y, n_samples: int) -> np.ndarray:
    """Labels as an int array of +1/-1; booleans map True to +1."""
    y = np.asarray(y)
    if y.dtype == bool:
        y = np.where(y, 1, -1)
    y = y.reshape(-1)
    if y.shape[0] != n_samples:
        raise ValueError(f"got {y.shape[0]} labels for {n_samples} graphs")
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("labels must be +1 (connected) or -1 (disconnected)")
    return y.astype(np.int64)


@lru_cache(maxsize=None)
def _embedding_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(2**n)
    bits = ((idx[:, None] >> np.arange(n)) & 1).astype(np.int64)
    hadamard = np.where((bits @ bits.T) % 2 == 0, 1.0, -1.0) / 2 ** (n / 2)
    return bits, hadamard


def embedding_states(graphs) -> np.ndarray:
    """Embedded states as columns of a real ``(2**n, len(graphs))`` array.

    Equivalent to running :func:`~graphqnn.ansatz.embed_graph` on ``|0...0>``:
    the CZ layer puts the sign ``(-1)**e(b)`` on ``|+...+>``, where ``e(b)`` is
    the number of edges inside the node set ``b``, and the last H layer is a
    Walsh-Hadamard transform.
    """
    graphs = check_graphs(graphs)
    n = graphs[0].n_nodes
    bits, hadamard = _embedding_tables(n)
    upper = np.stack([np.triu(g.adjacency(), 1) for g in graphs]).astype(np.int64)
    inside = np.einsum("bi,gij,bj->bg", bits, upper, bits)
    signs = np.where(inside % 2 == 0, 1.0, -1.0) / 2 ** (n / 2)
    return hadamard @ signs


def squared_loss(prediction: float, label: int) -> float:
    if label not in (-1, 1):
        raise ValueError(f"label must be +1 or -1, got {label}")
    return (prediction - label) ** 2


class GraphConnectivityClassifier(ClassifierMixin, BaseEstimator):
    """Variational circuit that labels graphs as connected (+1) or not (-1).

    The decision value is ``<Z⊗n>`` after the graph embedding followed by the
    chosen ansatz. Training minimises the squared error against the ±1
    labels, taking one optimizer step per ``batch_size`` graphs in order.

    Parameters
    ----------
    ansatz : {"perm", "cyclic", "standard"}
    layers : int or None
        Layer repetitions; ``None`` picks 40 / 30 / 3 respectively.
    n_nodes : int
    optimizer : {"adam", "sgd"}
    learning_rate, beta1, beta2, epsilon : float
        Optimizer settings; the betas and epsilon only matter for Adam.
    batch_size : int
        Graphs per optimizer step; gradients inside a step are averaged.
    epochs : int
        Passes over the data made by :meth:`fit`.
    init_scale : float
        Initial parameters are drawn uniformly from ``[-init_scale, init_scale]``.
    random_state : int, numpy Generator or None

    Attributes
    ----------
    circuit_ : CircuitIR
    params_ : ndarray of shape (n_slots,)
    loss_curve_ : list of float
        Mean training loss per call to :meth:`partial_fit`.
    """

    def __init__(self, ansatz="perm", layers=None, n_nodes=8, optimizer="adam",
                 learning_rate=0.01, beta1=0.9, beta2=0.999, epsilon=1e-8,
                 batch_size=1, epochs=1, init_scale=np.pi, random_state=None):
        self.ansatz = ansatz
        self.layers = layers
        self.n_nodes = n_nodes
        self.optimizer = optimizer
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.batch_size = batch_size
        self.epochs = epochs
        self.init_scale = init_scale
        self.random_state = random_state

    # ------------------------------------------------------------------ setup

    def _initialize(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        self.circuit_ = build_ansatz(AnsatzKind(self.ansatz), self.n_nodes, self.layers)
        rng = np.random.default_rng(self.random_state)
        self.params_ = rng.uniform(-self.init_scale, self.init_scale, self.circuit_.slot_count)
        self.optimizer_ = make_optimizer(
            self.optimizer, self.learning_rate, self.beta1, self.beta2, self.epsilon
        )
        self.classes_ = np.array([-1, 1])
        self.loss_curve_ = []

    def set_model(self, params) -> "GraphConnectivityClassifier":
        """Install trained parameters, e.g. loaded from disk; resets the optimizer."""
        self._initialize()
        params = np.asarray(params, dtype=np.float64).reshape(-1)
        if params.shape[0] != self.circuit_.slot_count:
            raise ValueError(
                f"{self.ansatz} ansatz has {self.circuit_.slot_count} slots, "
                f"got {params.shape[0]} parameters"
            )
        self.params_ = params.copy()
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")

    # --------------------------------------------------------------- training

    def fit(self, X, y):
        graphs = check_graphs(X, self.n_nodes)
        y = check_labels(y, len(graphs))
        self._initialize()
        for _ in range(self.epochs):
            self._epoch(graphs, y)
        return self

    def partial_fit(self, X, y):
        """One pass over ``(X, y)`` in the given order."""
        graphs = check_graphs(X, self.n_nodes)
        y = check_labels(y, len(graphs))
        if not hasattr(self, "params_"):
            self._initialize()
        self._epoch(graphs, y)
        return self

    def _epoch(self, graphs, y) -> float:
        states = embedding_states(graphs)
        total = 0.0
        for start in range(0, len(graphs), self.batch_size):
            stop = min(start + self.batch_size, len(graphs))
            grad = np.zeros_like(self.params_)
            for k in range(start, stop):
                value, dvalue = value_and_gradient(
                    self.circuit_, self.params_, StateVector(self.n_nodes, states[:, k])
                )
                total += squared_loss(value, y[k])
                grad += 2.0 * (value - y[k]) * dvalue
            self.optimizer_.step(self.params_, grad / (stop - start))
        mean = total / len(graphs)
        self.loss_curve_.append(mean)
        return mean

    # -------------------------------------------------------------- inference

    def decision_function(self, X) -> np.ndarray:
        """Raw ``<Z⊗n>`` readout in ``[-1, 1]`` for each graph."""
        self._check_fitted()
        graphs = check_graphs(X, self.n_nodes)
        states = embedding_states(graphs)
        if len(graphs) >= 2**self.n_nodes // 4:
            unitary = circuit_unitary(self.circuit_, self.params_)
            return batch_expectation(unitary, states)
        return np.array([
            run_circuit(self.circuit_, self.params_, StateVector(self.n_nodes, states[:, k]))
            for k in range(len(graphs))
        ])

    def predict(self, X) -> np.ndarray:
        """+1 where the readout is positive, otherwise -1."""
        return np.where(self.decision_function(X) > 0, 1, -1)

    def score(self, X, y, sample_weight=None) -> float:
        """Accuracy where a readout of exactly zero counts as wrong for both classes."""
        values = self.decision_function(X)
        y = check_labels(y, len(values))
        hits = np.sign(values) == y
        return float(np.average(hits, weights=sample_weight))
