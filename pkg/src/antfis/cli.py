"""Command-line surface: data generation, training, evaluation, sweeping,
prediction, and plot-data emission.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
All randomness flows from explicit --seed flags; identical flags produce
byte-identical output files.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .aco import AcoConfig
from .dataset import (FeatureStage, eval_metrics, load_dataset,
                      write_dataset_csv)
from .errors import AntfisError, DataError, NumericError
from .fcm import FcmConfig
from .synthfield import PlumeParams, ReactorGeometry, generate_dataset
from .trainer import (TrainConfig, evaluate, load_model, predict_points,
                      save_model, sweep, train, training_partitions,
                      write_sweep_csv)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_GEOM_KEYS = ("height", "diameter", "sparger_height")
_PLUME_KEYS = ("alpha_max", "sigma0", "spread", "u_max", "rho_liquid", "g",
               "p_atm", "noise_sd")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="antfis",
                     description="Fuzzy-rule surrogate for bubble-column gas "
                                 "holdup, tuned by a continuous ant colony.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", help="generate a synthetic node table")
    gen.add_argument("--n", type=int, default=1500,
                     help="number of nodes (default 1500, canonical "
                          "experiment size)")
    gen.add_argument("--seed", type=int, default=7, help="RNG seed (default 7)")
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.add_argument("--params", default=None,
                     help="key=value file overriding generator defaults")
    for key in _GEOM_KEYS + _PLUME_KEYS:
        gen.add_argument(f"--{key.replace('_', '-')}", type=float, default=None,
                         dest=key, help=f"override {key}")

    def add_train_flags(p):
        p.add_argument("--p", type=float, default=0.70,
                       help="training share of the data (default 0.70, "
                            "canonical experiment value)")
        p.add_argument("--iters", type=int, default=100,
                       help="optimizer iterations (default 100, canonical "
                            "experiment value)")
        p.add_argument("--rules", type=int, default=10,
                       help="fuzzy rule count (default 10)")
        p.add_argument("--archive-size", type=int, default=25,
                       help="solution archive size (default 25)")
        p.add_argument("--q", type=float, default=0.1,
                       help="rank-weight locality (default 0.1)")
        p.add_argument("--xi", type=float, default=0.85,
                       help="kernel width factor (default 0.85)")
        p.add_argument("--seed", type=int, default=7,
                       help="master seed (default 7)")
        p.add_argument("--threads", type=int, default=1,
                       help="fitness evaluation workers; does not affect "
                            "results (default 1)")

    tr = sub.add_parser("train", help="train a model on a node table")
    tr.add_argument("--data", required=True, help="input CSV path")
    tr.add_argument("--stage", type=int, default=5, choices=range(1, 6),
                    help="number of staged inputs, 1-5 (default 5)")
    tr.add_argument("--ants", type=int, default=20,
                    help="candidates sampled per iteration (default 20, "
                         "canonical experiment value)")
    tr.add_argument("--out", required=True, help="output model file")
    add_train_flags(tr)

    ev = sub.add_parser("eval", help="evaluate a saved model on a node table")
    ev.add_argument("--model", required=True, help="model file path")
    ev.add_argument("--data", required=True, help="input CSV path")

    sw = sub.add_parser("sweep", help="train a grid of (stage, ant count) cells")
    sw.add_argument("--data", required=True, help="input CSV path")
    sw.add_argument("--stages", default="1-5",
                    help="stage list or range, e.g. 1-5 or 1,3,5 (default 1-5)")
    sw.add_argument("--ants", default="20,30,40",
                    help="comma-separated ant counts (default 20,30,40, "
                         "canonical experiment grid)")
    sw.add_argument("--out", required=True, help="output CSV path")
    add_train_flags(sw)

    pr = sub.add_parser("predict", help="predict holdup at new feature points")
    pr.add_argument("--model", required=True, help="model file path")
    pr.add_argument("--points", required=True,
                    help="CSV of feature columns matching the model's stage")
    pr.add_argument("--out", required=True, help="output CSV path")

    rp = sub.add_parser("report", help="emit scatter and convergence data files")
    rp.add_argument("--model", required=True, help="model file path")
    rp.add_argument("--data", required=True,
                    help="the CSV the model was trained from")
    rp.add_argument("--out-prefix", required=True,
                    help="prefix for <prefix>_scatter_train.csv, "
                         "<prefix>_scatter_test.csv, <prefix>_convergence.csv")
    return parser


def _read_params_file(path: str) -> dict[str, float]:
    values = {}
    p = Path(path)
    if not p.exists():
        raise DataError(f"params file not found: {path}")
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in _GEOM_KEYS + _PLUME_KEYS:
            raise DataError(f"{path}, line {lineno}: expected <name>=<value> "
                            f"with a known parameter, got {raw!r}")
        try:
            values[key] = float(value.strip())
        except ValueError:
            raise DataError(f"{path}, line {lineno}: bad number {value!r}") \
                from None
    return values


def _cmd_gen_data(args) -> int:
    overrides = _read_params_file(args.params) if args.params else {}
    for key in _GEOM_KEYS + _PLUME_KEYS:
        flag = getattr(args, key)
        if flag is not None:
            overrides[key] = flag
    geom = ReactorGeometry(**{k: overrides[k] for k in _GEOM_KEYS
                              if k in overrides})
    plume = PlumeParams(**{k: overrides[k] for k in _PLUME_KEYS
                           if k in overrides})
    data = generate_dataset(geom, plume, args.n, args.seed)
    write_dataset_csv(data, args.out)
    print(f"wrote {len(data)} rows to {args.out}")
    return 0


def _train_config(args, stage: FeatureStage, ants: int) -> TrainConfig:
    return TrainConfig(
        stage=stage, p=args.p, n_rules=args.rules,
        fcm=FcmConfig(c=args.rules),
        aco=AcoConfig(n_ants=ants, archive_size=args.archive_size,
                      q=args.q, xi=args.xi, max_iter=args.iters),
        seed=args.seed)


def _cmd_train(args) -> int:
    stage = FeatureStage.from_arity(args.stage)
    data = load_dataset(args.data, stage)
    model = train(data, _train_config(args, stage, args.ants),
                  n_workers=args.threads)
    save_model(model, args.out)
    print(f"train_R={model.train_report.pearson_r:.6f} "
          f"test_R={model.test_report.pearson_r:.6f}")
    return 0


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    data = load_dataset(args.data, model.config.stage)
    rep = evaluate(model, data)
    print(f"R={rep.pearson_r:.6f} RMSE={rep.rmse:.6g} MAE={rep.mae:.6g} "
          f"n={rep.n}")
    return 0


def _parse_stages(text: str) -> list[FeatureStage]:
    try:
        if "-" in text:
            lo, hi = text.split("-")
            ks = range(int(lo), int(hi) + 1)
        else:
            ks = [int(v) for v in text.split(",")]
        return [FeatureStage.from_arity(k) for k in ks]
    except ValueError as exc:
        raise UsageError(f"bad --stages value {text!r}: {exc}") from None


def _cmd_sweep(args) -> int:
    stages = _parse_stages(args.stages)
    try:
        ants = [int(v) for v in args.ants.split(",")]
    except ValueError:
        raise UsageError(f"bad --ants value {args.ants!r}") from None
    data = load_dataset(args.data, FeatureStage.XYZPV5)
    base = _train_config(args, FeatureStage.XYZPV5, ants[0])
    report = sweep(data, stages, ants, base, n_workers=args.threads)
    write_sweep_csv(report, args.out)
    print(f"wrote {len(report.cells)} sweep cells to {args.out}")
    return 0


def _read_points(path: str, stage: FeatureStage) -> np.ndarray:
    p = Path(path)
    if not p.exists():
        raise DataError(f"points file not found: {path}")
    with p.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(h.strip() for h in next(reader))
        except StopIteration:
            raise DataError(f"{path}: empty points file") from None
        if header != stage.feature_names:
            raise DataError(f"{path}: header must be exactly "
                            f"{','.join(stage.feature_names)} for this model")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise DataError(f"{path}, line {lineno}: {exc}") from None
            if len(rows[-1]) != stage.n_features:
                raise DataError(f"{path}, line {lineno}: expected "
                                f"{stage.n_features} columns")
    if not rows:
        raise DataError(f"{path}: no points")
    return np.array(rows, dtype=float)


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    stage = model.config.stage
    points = _read_points(args.points, stage)
    preds = predict_points(model, points)
    with Path(args.out).open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(stage.feature_names + ("prediction",)) + "\n")
        for row, pred in zip(points, preds):
            fh.write(",".join(repr(float(v)) for v in row)
                     + f",{repr(float(pred))}\n")
    print(f"wrote {len(preds)} predictions to {args.out}")
    return 0


def _write_scatter(path: Path, targets, preds) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("target,prediction\n")
        for t, p in zip(targets, preds):
            fh.write(f"{repr(float(t))},{repr(float(p))}\n")


def _cmd_report(args) -> int:
    model = load_model(args.model)
    data = load_dataset(args.data, model.config.stage)
    train_ds, test_ds = training_partitions(model, data)
    prefix = Path(args.out_prefix)
    for name, part in (("train", train_ds), ("test", test_ds)):
        preds = predict_points(model, part.features())
        _write_scatter(prefix.parent / f"{prefix.name}_scatter_{name}.csv",
                       part.targets(), preds)
    conv_path = prefix.parent / f"{prefix.name}_convergence.csv"
    with conv_path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("iteration,best_rmse\n")
        for i, v in enumerate(model.convergence, start=1):
            fh.write(f"{i},{repr(float(v))}\n")
    print(f"wrote scatter and convergence files with prefix {args.out_prefix}")
    return 0


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
    "predict": _cmd_predict,
    "report": _cmd_report,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse --help/--version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AntfisError as exc:
        code = 2 if isinstance(exc.__cause__, (DataError, OSError)) else 3
        print(f"error: {exc}", file=sys.stderr)
        return code


def main(argv=None) -> None:
    sys.exit(run(argv))
