"""Acceptance gate. Each test appends one pass/fail line to the terminal summary."""

import itertools
import time

import numpy as np
import pytest
from conftest import random_circuit, random_state

from graphqnn.ansatz import AnsatzKind, build_ansatz, compose, embed_graph
from graphqnn.cli import main
from graphqnn.edge_eval import Verdict, edge_case_report
from graphqnn.estimator import GraphConnectivityClassifier
from graphqnn.graphs import Graph, connectedness_probability, edge_case_catalog, is_connected, sample_er
from graphqnn.simulator import final_state, gradient, run_circuit
from graphqnn.training import TrainingConfig, run_experiment


def record(log, number, ok, detail, elapsed):
    log.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail} ({elapsed:.1f}s)")


# 1. symmetry


def test_1_symmetry_invariance(acceptance_log):
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = {"perm": 0.0, "cyclic": 0.0}
    for kind in worst:
        clf = GraphConnectivityClassifier(ansatz=kind)
        n_slots = build_ansatz(kind, 8).slot_count
        for _ in range(100):
            clf.set_model(rng.uniform(-np.pi, np.pi, n_slots))
            g = sample_er(8, rng.uniform(), rng)
            if kind == "perm":
                sigma = rng.permutation(8)
            else:
                shift = int(rng.integers(1, 8))
                sigma = [(i + shift) % 8 for i in range(8)]
            a, b = clf.decision_function([g, g.relabel(sigma)])
            worst[kind] = max(worst[kind], abs(a - b))

    standard = GraphConnectivityClassifier(ansatz="standard")
    standard.set_model(np.random.default_rng(7).uniform(-np.pi, np.pi, 144))
    g = Graph.from_edges(8, [(0, 1), (1, 2), (2, 3), (5, 6)])
    a, b = standard.decision_function([g, g.relabel([0, 4, 2, 3, 1, 5, 6, 7])])
    witness = abs(a - b)

    elapsed = time.perf_counter() - start
    ok = worst["perm"] <= 1e-9 and worst["cyclic"] <= 1e-9 and witness > 1e-3 and elapsed < 10
    record(acceptance_log, 1,
           ok, f"perm max {worst['perm']:.1e}, cyclic max {worst['cyclic']:.1e}, standard witness {witness:.3f}", elapsed)
    assert ok


# 2. gradients


def central_difference(circuit, theta, h=1e-4):
    out = np.empty_like(theta)
    for k in range(len(theta)):
        up, down = theta.copy(), theta.copy()
        up[k] += h
        down[k] -= h
        out[k] = (run_circuit(circuit, up) - run_circuit(circuit, down)) / (2 * h)
    return out


def test_2_gradient_correctness(acceptance_log):
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    kinds = list(AnsatzKind)
    worst = 0.0
    for trial in range(50):
        kind = kinds[trial % 3]
        n = int(rng.integers(3, 5))
        ansatz = build_ansatz(kind, n, int(rng.integers(1, 4)))
        circuit = compose(embed_graph(sample_er(n, 0.5, rng)), ansatz)
        theta = rng.uniform(-np.pi, np.pi, circuit.slot_count)
        worst = max(worst, np.max(np.abs(gradient(circuit, theta) - central_difference(circuit, theta))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 30
    record(acceptance_log, 2, ok, f"50 circuits, max |adjoint - FD| = {worst:.1e}", elapsed)
    assert ok


# 3. connectivity oracle


def reachable_everywhere(adj):
    # transitive closure by Floyd-Warshall
    reach = adj.astype(bool) | np.eye(len(adj), dtype=bool)
    for k in range(len(adj)):
        reach |= np.outer(reach[:, k], reach[k, :])
    return bool(reach.all())


def test_3_connectivity_oracle(acceptance_log):
    start = time.perf_counter()
    pairs = list(itertools.combinations(range(5), 2))
    mismatches = 0
    for mask in range(1 << len(pairs)):
        g = Graph.from_edges(5, [e for k, e in enumerate(pairs) if mask >> k & 1])
        mismatches += is_connected(g) != reachable_everywhere(g.adjacency())
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 5
    record(acceptance_log, 3, ok, f"1024 graphs, {mismatches} mismatches", elapsed)
    assert ok


# 4. connectedness curve


def monte_carlo_connected(n, p, draws, rng):
    """Fraction of connected G(n, p) draws, using vectorized bitmask flooding."""
    pairs = list(itertools.combinations(range(n), 2))
    present = rng.random((draws, len(pairs))) < p
    rows = np.zeros((draws, n), dtype=np.int64)
    for k, (i, j) in enumerate(pairs):
        rows[:, i] |= present[:, k].astype(np.int64) << j
        rows[:, j] |= present[:, k].astype(np.int64) << i
    reach = np.ones(draws, dtype=np.int64)
    for _ in range(n - 1):
        grown = reach.copy()
        for i in range(n):
            grown |= np.where(reach >> i & 1, rows[:, i], 0)
        reach = grown
    return np.mean(reach == (1 << n) - 1)


def test_4_connectedness_curve(acceptance_log):
    start = time.perf_counter()
    rng = np.random.default_rng(404)
    grid = np.linspace(0.0, 1.0, 101)
    curve = np.array([connectedness_probability(8, p) for p in grid])
    draws = 100_000
    outside = []
    for p, exact in zip(grid, curve):
        sigma = np.sqrt(exact * (1 - exact) / draws)
        estimate = monte_carlo_connected(8, p, draws, rng)
        if abs(estimate - exact) > 3 * sigma:
            outside.append(round(float(p), 2))
    monotone = bool(np.all(np.diff(curve) >= 0))
    endpoints = curve[0] == 0.0 and curve[-1] == 1.0
    three = connectedness_probability(3, 0.5) == 0.5
    elapsed = time.perf_counter() - start
    ok = monotone and endpoints and three and not outside and elapsed < 120
    record(acceptance_log, 4, ok,
           f"monotone={monotone}, endpoints={endpoints}, n=3 exact={three}, MC outside 3 sigma at {outside}", elapsed)
    assert ok


# 5. training curves, CI scale


@pytest.fixture(scope="module")
def trained():
    start = time.perf_counter()
    out = {
        kind: run_experiment(TrainingConfig(ansatz=kind, runs=3, validation_size=300, master_seed=0))
        for kind in ("perm", "cyclic", "standard")
    }
    return out, time.perf_counter() - start


@pytest.mark.slow
def test_5_training_accuracy(trained, acceptance_log):
    metrics, elapsed = trained
    final = {kind: float(m.mean[-1]) for kind, m in metrics.items()}
    clauses = {
        "perm >= 0.85": final["perm"] >= 0.85,
        "standard in [0.40, 0.60]": 0.40 <= final["standard"] <= 0.60,
        "standard < cyclic < perm": final["standard"] < final["cyclic"] < final["perm"],
        "cyclic >= 0.55": final["cyclic"] >= 0.55,
        "under 15 min": elapsed < 15 * 60,
    }
    ok = all(clauses.values())
    failed = [name for name, passed in clauses.items() if not passed]
    scores = ", ".join(f"{k} {v:.3f}" for k, v in final.items())
    record(acceptance_log, 5, ok, f"{scores}; failed clauses: {failed or 'none'}", elapsed)
    assert ok, f"final mean accuracies {final}; failed clauses {failed}"


# 6. edge cases


@pytest.mark.slow
def test_6_edge_case_report(trained, acceptance_log):
    start = time.perf_counter()
    metrics, _ = trained
    perm_models = metrics["perm"].models()
    report = edge_case_report({
        "perm": perm_models[0],
        "cyclic": metrics["cyclic"].models()[0],
        "standard": metrics["standard"].models()[0],
    })
    expected_truth = [-1, 1, -1, 1, -1, 1, 1]
    truth_ok = [c.label for c in edge_case_catalog()] == expected_truth and all(
        (r.truth is Verdict.CONNECTED) == is_connected(c.graph)
        for c in edge_case_catalog() for r in report if r.graph == c.name
    )
    dense = edge_case_catalog()[0].graph
    refuted = sum(
        edge_case_report({"perm": m}, extra=()).rows[0].verdict is not Verdict.CONNECTED for m in perm_models
    )
    raws = [float(m.decision_function([dense])[0]) for m in perm_models]
    elapsed = time.perf_counter() - start
    ok = len(report) == 21 and truth_ok and refuted >= 2
    record(acceptance_log, 6, ok,
           f"{len(report)} verdicts, truth ok={truth_ok}, graph 1 not connected in {refuted}/3 perm runs "
           f"(raw {', '.join(f'{r:+.3f}' for r in raws)})", elapsed)
    assert ok


# 7. determinism


def test_7_determinism(tmp_path, acceptance_log):
    start = time.perf_counter()
    args = ["train", "--ansatz", "all", "--runs", "2", "--epochs", "2", "--layers", "2",
            "--batch-per-epoch", "10", "--validation-size", "20", "--seed", "11", "--workers", "1"]
    codes = [main([*args, "--out", str(tmp_path / d)]) for d in ("a", "b")]
    name = "graph-connectedness-8.csv"
    same = (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    elapsed = time.perf_counter() - start
    ok = codes == [0, 0] and same
    record(acceptance_log, 7, ok, f"byte-identical CSV on rerun: {same}", elapsed)
    assert ok


# 8. simulator hygiene


def test_8_simulator_hygiene(acceptance_log):
    start = time.perf_counter()
    rng = np.random.default_rng(808)
    drift = 0.0
    lo, hi = 1.0, -1.0
    for n in (3, 5, 8):
        circuit = random_circuit(n, 2000, rng, slot_count=8)
        for _ in range(5):
            theta = rng.uniform(-np.pi, np.pi, 8)
            state = random_state(n, rng)
            out = final_state(circuit, theta, state)
            drift = max(drift, abs(out.norm() - 1.0))
            value = run_circuit(circuit, theta, state)
            lo, hi = min(lo, value), max(hi, value)
    elapsed = time.perf_counter() - start
    ok = drift <= 1e-12 and lo >= -1 - 1e-12 and hi <= 1 + 1e-12
    record(acceptance_log, 8, ok, f"norm drift {drift:.1e}, expectation range [{lo:+.3f}, {hi:+.3f}]", elapsed)
    assert ok
