"""Audit trained classifiers on structured graphs that defeat edge counting."""
from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

from .graphs import EdgeCase, Graph, edge_case_catalog, label_of

DEFAULT_CUTOFF = 0.01


class Verdict(str, enum.Enum):
    CONNECTED = "connected"
    DISCONNECTED = "disconnected"
    UNDECIDED = "undecided"


def classify_with_confidence(m: float, cutoff: float = DEFAULT_CUTOFF) -> Verdict:
    """Label a readout, treating ``|m| < cutoff`` as no decision."""
    if not -1.0 - 1e-12 <= m <= 1.0 + 1e-12:
        raise ValueError(f"readout must lie in [-1, 1], got {m}")
    if cutoff < 0:
        raise ValueError(f"cutoff must be non-negative, got {cutoff}")
    if abs(m) < cutoff or m == 0:
        return Verdict.UNDECIDED
    return Verdict.CONNECTED if m > 0 else Verdict.DISCONNECTED


def _truth(label: int) -> Verdict:
    return Verdict.CONNECTED if label > 0 else Verdict.DISCONNECTED


@dataclass(frozen=True)
class EdgeCaseVerdict:
    graph: str
    circuit: str
    raw: float
    verdict: Verdict
    truth: Verdict

    @property
    def correct(self) -> bool | None:
        """None when undecided."""
        if self.verdict is Verdict.UNDECIDED:
            return None
        return self.verdict is self.truth

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        d["truth"] = self.truth.value
        d["correct"] = self.correct
        return d


@dataclass(frozen=True)
class EdgeCaseReport:
    rows: tuple[EdgeCaseVerdict, ...]
    cutoff: float

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def summary(self) -> dict[str, dict[str, int]]:
        """Per circuit: counts of correct, wrong and undecided verdicts."""
        out: dict[str, dict[str, int]] = {}
        for row in self.rows:
            c = out.setdefault(row.circuit, {"correct": 0, "wrong": 0, "undecided": 0})
            key = {True: "correct", False: "wrong", None: "undecided"}[row.correct]
            c[key] += 1
        return out

    def to_json(self) -> str:
        return json.dumps([r.to_dict() for r in self.rows], indent=1) + "\n"

    def to_text(self) -> str:
        head = ("graph", "circuit", "raw", "verdict", "truth", "correct")
        cells = [head]
        for r in self.rows:
            mark = {True: "yes", False: "no", None: "-"}[r.correct]
            cells.append((r.graph, r.circuit, f"{r.raw:+.3e}", r.verdict.value, r.truth.value, mark))
        widths = [max(len(row[i]) for row in cells) for i in range(len(head))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
        lines.insert(1, "  ".join("-" * w for w in widths))
        lines.append(f"cutoff = {self.cutoff}")
        return "\n".join(lines) + "\n"


def edge_case_report(
    models: Mapping[str, object],
    cutoff: float = DEFAULT_CUTOFF,
    extra: Sequence[tuple[str, Graph]] = (),
) -> EdgeCaseReport:
    """Evaluate every model on the catalog, then on ``extra`` named graphs.

    ``models`` maps a circuit name to a fitted classifier; rows are ordered by
    graph first, then by model in mapping order.
    """
    if not models:
        raise ValueError("need at least one model")
    cases = list(edge_case_catalog(8))
    cases += [EdgeCase(name, g, label_of(g)) for name, g in extra]
    graphs = [c.graph for c in cases]
    raws = {}
    for name, model in models.items():
        if getattr(model, "n_nodes", 8) != 8:
            raise ValueError(f"model {name!r} expects {model.n_nodes} nodes, catalog has 8")
        raws[name] = model.decision_function(graphs)
    rows = []
    for k, case in enumerate(cases):
        for name in models:
            raw = float(raws[name][k])
            rows.append(EdgeCaseVerdict(
                case.name, name, raw, classify_with_confidence(raw, cutoff), _truth(case.label)
            ))
    return EdgeCaseReport(tuple(rows), cutoff)
