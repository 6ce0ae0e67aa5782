"""Command-line entry point: ``graphqnn {curve,train,edge-cases}``."""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .edge_eval import edge_case_report
from .graphs import Graph, connectedness_probability
from .persistence import ExperimentConfig, load_model, parse_ansatz_choice, save_model
from .training import metrics_csv, metrics_json, run_experiment


class CLIError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(message)


def _provenance(path: Path, command: str, **fields) -> None:
    record = {"command": command, "version": __version__, **fields}
    Path(f"{path}.provenance.json").write_text(json.dumps(record, indent=1) + "\n")


def _resolve_config(args) -> ExperimentConfig:
    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    training = {}
    if args.seed is not None:
        training["master_seed"] = args.seed
    for name in ("epochs", "runs", "validation_size", "batch_per_epoch", "layers"):
        value = getattr(args, name, None)
        if value is not None:
            training[name] = value
    top = {}
    if args.ansatz is not None:
        top["ansatzes"] = parse_ansatz_choice(args.ansatz)
    if args.workers is not None:
        top["workers"] = args.workers
    if args.out is not None:
        top["out"] = args.out
    if getattr(args, "cutoff", None) is not None:
        top["cutoff"] = args.cutoff
    return dataclasses.replace(
        config, training=dataclasses.replace(config.training, **training), **top
    )


def cmd_curve(args) -> int:
    if args.points < 2:
        raise CLIError("--points must be >= 2")
    grid = np.linspace(0.0, 1.0, args.points)
    out = Path(args.out or "connected-probability.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = ["p,connected"]
    rows += [f"{p!r},{connectedness_probability(args.n, float(p))!r}" for p in grid.tolist()]
    out.write_text("\n".join(rows) + "\n")
    _provenance(out, "curve", n=args.n, points=args.points, seed=args.seed)
    print(out)
    return 0


def _train(config: ExperimentConfig):
    return [
        run_experiment(config.for_ansatz(kind), workers=config.workers)
        for kind in config.ansatzes
    ]


def cmd_train(args) -> int:
    config = _resolve_config(args)
    out = Path(config.out)
    (out / "models").mkdir(parents=True, exist_ok=True)
    metrics = _train(config)
    if len(metrics) == 3:
        n = config.training.n_nodes
        (out / f"graph-connectedness-{n}.csv").write_text(metrics_csv(metrics))
    else:
        for m in metrics:
            (out / f"{m.config.ansatz}.csv").write_text(metrics_csv([m]))
    (out / "metrics.json").write_text(metrics_json(metrics))
    for m in metrics:
        for r, (run, model) in enumerate(zip(m.runs, m.models())):
            save_model(out / "models" / f"{m.config.ansatz}-run{r}.txt", model, run.seed)
    _provenance(out / "train", "train", config=config.to_dict())
    for m in metrics:
        print(f"{m.config.ansatz}: final accuracy {m.mean[-1]:.4f} ± {m.three_sigma[-1]:.4f} (3σ)")
    return 0


def _collect_model_files(paths) -> list[Path]:
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            found = sorted(p.glob("*.txt"))
            if not found:
                raise CLIError(f"no model files in {p}")
            files += found
        elif p.is_file():
            files.append(p)
        else:
            raise CLIError(f"model file not found: {p}")
    return files


def cmd_edge_cases(args) -> int:
    config = _resolve_config(args)
    if args.fresh_train:
        single = dataclasses.replace(config, training=dataclasses.replace(config.training, runs=1))
        models = {m.config.ansatz: m.models()[0] for m in _train(single)}
    elif args.models:
        models = {f.stem: load_model(f) for f in _collect_model_files(args.models)}
    else:
        raise CLIError("pass --models or --fresh-train")
    extra = [(Path(p).stem, Graph.read(p)) for p in args.graph or ()]
    report = edge_case_report(models, cutoff=config.cutoff, extra=extra)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "edge-cases.json"
    json_path.write_text(report.to_json())
    (out / "edge-cases.txt").write_text(report.to_text())
    _provenance(json_path, "edge-cases", config=config.to_dict(), models=sorted(models),
                graphs=list(args.graph or ()))
    sys.stdout.write(report.to_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graphqnn", description=__doc__)
    parser.add_argument("--version", action="version", version=f"graphqnn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out", help="output file (curve) or directory")

    def experiment(p):
        p.add_argument("--config", help="flat TOML config file")
        p.add_argument("--ansatz", choices=["perm", "cyclic", "standard", "all"])
        p.add_argument("--epochs", type=int)
        p.add_argument("--runs", type=int)
        p.add_argument("--layers", type=int)
        p.add_argument("--validation-size", type=int)
        p.add_argument("--batch-per-epoch", type=int)
        p.add_argument("--workers", type=int, help="parallel runs (default: CPU count)")

    p = sub.add_parser("curve", help="exact connectedness probability of G(n, p)")
    common(p)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--points", type=int, default=101)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("train", help="train and record per-epoch validation accuracy")
    common(p)
    experiment(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("edge-cases", help="evaluate models on the edge-case catalog")
    common(p)
    experiment(p)
    p.add_argument("--models", nargs="+", help="model files or directories")
    p.add_argument("--fresh-train", action="store_true", help="train one run per ansatz first")
    p.add_argument("--cutoff", type=float, help="confidence cutoff (default 0.01)")
    p.add_argument("--graph", action="append", help="extra edge-list graph file")
    p.set_defaults(func=cmd_edge_cases)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:  # reported as one machine-readable line
        line = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(line), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
