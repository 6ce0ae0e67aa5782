"""Undirected simple graphs, connectivity and Erdős–Rényi sampling."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

MAX_NODES = 14


class GraphError(ValueError):
    pass


def connectivity_threshold(n: int) -> float:
    """Edge probability ``ln(n)/n`` around which G(n, p) becomes connected."""
    if n < 2:
        raise GraphError("threshold is defined for n >= 2")
    return math.log(n) / n


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph stored as one adjacency bitmask per node.

    Build with :meth:`from_edges`; rows are symmetric and have no self-loops,
    so two graphs with the same edge set compare equal.
    """

    n_nodes: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.n_nodes <= MAX_NODES:
            raise GraphError(f"n_nodes must be in [1, {MAX_NODES}], got {self.n_nodes}")
        if len(self.rows) != self.n_nodes:
            raise GraphError("need one adjacency row per node")
        full = (1 << self.n_nodes) - 1
        for i, row in enumerate(self.rows):
            if row & ~full or row >> i & 1:
                raise GraphError(f"invalid adjacency row for node {i}")
            for j in range(self.n_nodes):
                if (row >> j & 1) != (self.rows[j] >> i & 1):
                    raise GraphError("adjacency must be symmetric")

    @classmethod
    def from_edges(cls, n_nodes: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if not 1 <= n_nodes <= MAX_NODES:
            raise GraphError(f"n_nodes must be in [1, {MAX_NODES}], got {n_nodes}")
        rows = [0] * n_nodes
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise GraphError(f"self-loop on node {i}")
            if not (0 <= i < n_nodes and 0 <= j < n_nodes):
                raise GraphError(f"edge ({i}, {j}) out of range for {n_nodes} nodes")
            rows[i] |= 1 << j
            rows[j] |= 1 << i
        return cls(n_nodes, tuple(rows))

    @classmethod
    def empty(cls, n_nodes: int) -> "Graph":
        return cls(n_nodes, (0,) * n_nodes)

    @classmethod
    def complete(cls, n_nodes: int) -> "Graph":
        full = (1 << n_nodes) - 1
        return cls(n_nodes, tuple(full & ~(1 << i) for i in range(n_nodes)))

    @classmethod
    def from_adjacency(cls, adjacency) -> "Graph":
        a = np.asarray(adjacency)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphError(f"adjacency must be square, got shape {a.shape}")
        if not np.array_equal(a, a.T):
            raise GraphError("adjacency must be symmetric")
        if np.any(np.diag(a)):
            raise GraphError("adjacency has self-loops")
        i, j = np.nonzero(np.triu(a, 1))
        return cls.from_edges(a.shape[0], zip(i.tolist(), j.tolist()))

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Canonical edge list, ``i < j``, in lexicographic order."""
        return tuple(
            (i, j)
            for i in range(self.n_nodes)
            for j in range(i + 1, self.n_nodes)
            if self.rows[i] >> j & 1
        )

    @property
    def n_edges(self) -> int:
        return sum(bin(r).count("1") for r in self.rows) // 2

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.rows[i] >> j & 1)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_nodes, self.n_nodes), dtype=np.int8)
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1
        return a

    def relabel(self, perm) -> "Graph":
        """Graph with node ``i`` renamed to ``perm[i]``."""
        perm = [int(p) for p in perm]
        if sorted(perm) != list(range(self.n_nodes)):
            raise GraphError(f"not a permutation of {self.n_nodes} nodes: {perm}")
        return Graph.from_edges(self.n_nodes, ((perm[i], perm[j]) for i, j in self.edges))

    def to_text(self) -> str:
        lines = [str(self.n_nodes)] + [f"{i} {j}" for i, j in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        """Parse the edge-list format: node count, then one ``i j`` pair per line."""
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines:
            raise GraphError("empty graph file")
        try:
            n = int(lines[0])
            edges = [tuple(int(x) for x in ln.split()) for ln in lines[1:]]
        except ValueError as exc:
            raise GraphError(f"malformed edge list: {exc}") from None
        if any(len(e) != 2 for e in edges):
            raise GraphError("each edge line must hold exactly two node indices")
        return cls.from_edges(n, edges)

    def write(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def read(cls, path) -> "Graph":
        return cls.from_text(Path(path).read_text())


class LabeledGraph(NamedTuple):
    graph: Graph
    label: int  # +1 connected, -1 disconnected


def is_connected(g: Graph) -> bool:
    """True iff every node is reachable from node 0 (breadth-first search)."""
    if g.n_nodes < 1:
        raise GraphError("graph has no nodes")
    seen = 1
    queue = deque([0])
    while queue:
        frontier = g.rows[queue.popleft()] & ~seen
        seen |= frontier
        while frontier:
            low = frontier & -frontier
            queue.append(low.bit_length() - 1)
            frontier ^= low
    return seen == (1 << g.n_nodes) - 1


def label_of(g: Graph) -> int:
    return 1 if is_connected(g) else -1


def _check_probability(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"edge probability must be in [0, 1], got {p}")


def sample_er(n: int, p: float, rng: np.random.Generator) -> Graph:
    """Draw from G(n, p): each pair included independently with probability ``p``."""
    _check_probability(p)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.shape[0]) < p
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def sample_balanced_batch(
    n: int, count: int, rng: np.random.Generator, p: float | None = None
) -> list[LabeledGraph]:
    """``count // 2`` connected and ``count // 2`` disconnected random graphs.

    Each draw picks ``p ~ Uniform(0, 1)`` (or uses the fixed ``p``), samples
    G(n, p) and keeps the graph only while its class quota is open. The accepted
    graphs are shuffled with ``rng`` so that neither class is bunched at the end.
    """
    if count < 0 or count % 2:
        raise GraphError(f"count must be a non-negative even integer, got {count}")
    if n < 2:
        raise GraphError("balanced batches need n >= 2")
    if p is not None:
        _check_probability(p)
        if p in (0.0, 1.0):
            raise GraphError("a fixed p of 0 or 1 yields only one class")
    quota = {1: count // 2, -1: count // 2}
    out: list[LabeledGraph] = []
    while len(out) < count:
        q = rng.random() if p is None else p
        g = sample_er(n, q, rng)
        y = label_of(g)
        if quota[y]:
            quota[y] -= 1
            out.append(LabeledGraph(g, y))
    order = rng.permutation(count)
    return [out[i] for i in order]


def connectedness_probability(n: int, p: float) -> float:
    """Exact probability that G(n, p) is connected.

    ``P(1) = 1`` and ``P(m) = 1 - sum_{k<m} C(m-1, k-1) P(k) (1-p)^(k(m-k))``:
    condition on the size ``k`` of the component holding a fixed node.
    """
    if n < 1:
        raise GraphError("n must be >= 1")
    if n > MAX_NODES:
        raise GraphError(f"n must be <= {MAX_NODES}")
    _check_probability(p)
    q = 1.0 - p
    probs = [0.0, 1.0]
    for m in range(2, n + 1):
        s = sum(math.comb(m - 1, k - 1) * probs[k] * q ** (k * (m - k)) for k in range(1, m))
        probs.append(1.0 - s)
    return min(1.0, max(0.0, probs[n]))


class EdgeCase(NamedTuple):
    name: str
    graph: Graph
    label: int


def edge_case_catalog(n: int = 8) -> list[EdgeCase]:
    """The seven structured test graphs on eight nodes, with ground truth.

    Node ``k`` in the drawings is index ``k - 1`` here.
    """
    if n != 8:
        raise GraphError(f"the edge-case catalog is defined for n = 8 only, got {n}")
    k7 = [(i, j) for i in range(7) for j in range(i + 1, 7)]
    path7 = [(i, i + 1) for i in range(6)]
    cases = [
        ("K7 + isolated node", k7),
        ("K7 + pendant node", k7 + [(6, 7)]),
        ("two disjoint K4", [(i, j) for blk in (0, 4) for i in range(blk, blk + 4)
                              for j in range(i + 1, blk + 4)]),
        ("path P8", [(i, i + 1) for i in range(7)]),
        ("P7 + chord, isolated node", path7 + [(3, 5)]),
        ("star S7", [(i, 7) for i in range(7)]),
        ("depth-2 tree", [(7, 0), (0, 1), (0, 2), (7, 6), (6, 5), (6, 4), (7, 3)]),
    ]
    out = []
    for name, edges in cases:
        g = Graph.from_edges(8, edges)
        out.append(EdgeCase(name, g, label_of(g)))
    return out
