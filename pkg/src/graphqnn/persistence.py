"""Plain-text model files and flat TOML experiment configs."""
from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .ansatz import AnsatzKind
from .edge_eval import DEFAULT_CUTOFF
from .estimator import GraphConnectivityClassifier
from .training import TrainingConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MODEL_MAGIC = "graphqnn-model"
MODEL_FORMAT = 1


class FormatError(ValueError):
    pass


def save_model(path, model: GraphConnectivityClassifier, seed=()) -> None:
    """One parameter per line after a ``#``-prefixed header."""
    layers = model.layers if model.layers is not None else AnsatzKind(model.ansatz).default_layers
    header = [
        f"# {MODEL_MAGIC} {MODEL_FORMAT}",
        f"# version {__version__}",
        f"# ansatz {AnsatzKind(model.ansatz).value}",
        f"# layers {layers}",
        f"# n_nodes {model.n_nodes}",
        f"# seed {' '.join(map(str, seed)) or '-'}",
    ]
    body = [repr(float(x)) for x in model.params_]
    Path(path).write_text("\n".join(header + body) + "\n")


def load_model(path) -> GraphConnectivityClassifier:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].split()[1:] != [MODEL_MAGIC, str(MODEL_FORMAT)]:
        raise FormatError(f"{path}: not a {MODEL_MAGIC} v{MODEL_FORMAT} file")
    meta = {}
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" ")
            meta[key] = value
        elif line.strip():
            try:
                values.append(float(line))
            except ValueError:
                raise FormatError(f"{path}:{lineno}: not a number: {line!r}") from None
    try:
        model = GraphConnectivityClassifier(
            ansatz=meta["ansatz"], layers=int(meta["layers"]), n_nodes=int(meta["n_nodes"])
        )
        return model.set_model(values)
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything ``train`` and ``edge-cases`` need; loadable from flat TOML."""

    training: TrainingConfig = field(default_factory=TrainingConfig)
    ansatzes: tuple[str, ...] = ("perm", "cyclic", "standard")
    out: str = "results"
    cutoff: float = DEFAULT_CUTOFF
    workers: int | None = None

    def __post_init__(self):
        kinds = tuple(AnsatzKind(a).value for a in self.ansatzes)
        if not kinds:
            raise ValueError("select at least one ansatz")
        object.__setattr__(self, "ansatzes", kinds)
        if self.cutoff < 0:
            raise ValueError("cutoff must be non-negative")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be >= 1")

    def for_ansatz(self, kind: str) -> TrainingConfig:
        return dataclasses.replace(self.training, ansatz=kind)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self.training)
        d.pop("ansatz")
        d.update(ansatzes=list(self.ansatzes), out=self.out, cutoff=self.cutoff,
                 workers=self.workers)
        return d

    @classmethod
    def from_dict(cls, values: dict) -> "ExperimentConfig":
        values = dict(values)
        training_keys = {f.name for f in dataclasses.fields(TrainingConfig)} - {"ansatz"}
        own_keys = {"ansatzes", "ansatz", "out", "cutoff", "workers"}
        unknown = set(values) - training_keys - own_keys
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "ansatz" in values:
            values["ansatzes"] = parse_ansatz_choice(values.pop("ansatz"))
        training = TrainingConfig(**{k: values.pop(k) for k in list(values) if k in training_keys})
        if "ansatzes" in values:
            values["ansatzes"] = tuple(values["ansatzes"])
        return cls(training=training, **values)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        nested = [k for k, v in data.items() if isinstance(v, dict)]
        if nested:
            raise ValueError(f"config must be flat; found tables {nested}")
        return cls.from_dict(data)


def parse_ansatz_choice(choice) -> tuple[str, ...]:
    if isinstance(choice, (list, tuple)):
        return tuple(AnsatzKind(c).value for c in choice)
    if choice == "all":
        return tuple(k.value for k in AnsatzKind)
    return (AnsatzKind(choice).value,)
