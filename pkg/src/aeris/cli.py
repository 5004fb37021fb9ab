"""``aeris`` command line: analytic OP, simulation, corpus generation, training, prediction.

Every command writes plot-ready CSV (optionally mirrored as JSON) and a
run manifest recording the argument vector, resolved parameters, seeds,
artifact paths, version and wall-clock time. ``aeris rerun MANIFEST``
replays a run.

Exit codes: 0 success, 2 usage, 3 numerical failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import SystemConfig, outage_curve
from .dataset import FEATURE_NAMES, Dataset, FeatureRanges, generate_dataset, read_rows, split_dataset, write_rows
from .errors import (
    AerisError,
    CapacityError,
    DatasetFormatError,
    DomainError,
    ModelLoadError,
    NumericalError,
    ParameterError,
    ShapeError,
)
from .geometry import CENTER, CylindricalPosition, link_spreads
from .matching import HopPairParams
from .mlp import (
    SCHEDULES,
    MlpArchitecture,
    TrainingConfig,
    init_network,
    load_network,
    predict,
    save_network,
    train_until_gate,
)
from .simulator import TrialBudget, compare_schemes, op_curve

__all__ = ["main", "build_parser", "parse_grid", "read_table", "EXIT_OK", "EXIT_USAGE", "EXIT_NUMERICAL", "EXIT_IO"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


class UsageError(Exception):
    pass


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` (inclusive stop) or a comma list of values."""
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if not step > 0 or stop < start:
                raise UsageError(f"grid {text!r} needs step > 0 and stop >= start")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return start + step * np.arange(count)
        return np.array([float(p) for p in text.split(",") if p.strip()])
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}; expected start:stop:step or a comma list") from None


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_channel_flags(p, *, multi_n=False):
    if multi_n:
        p.add_argument("--n", type=int, nargs="+", default=[20], help="number of RIS elements (one or more)")
    else:
        p.add_argument("--n", type=int, default=20, help="number of RIS elements")
    p.add_argument("--kappa", type=float, default=1.0, help="reflection efficiency in (0, 1]")
    p.add_argument("--gamma-db", type=float, default=None, help="single average SNR in dB (overrides --grid)")
    p.add_argument("--grid", default="-10:20:1", help="SNR grid in dB, start:stop:step or comma list")
    p.add_argument("--rth", type=float, default=5.0, help="target spectral efficiency (b/s/Hz)")
    for name, default in (("m", 2.0), ("alpha", 2.5), ("beta", 1.0)):
        p.add_argument(f"--{name}", type=float, default=None, help=f"set both hops' {name}")
        p.add_argument(f"--{name}-s", type=float, default=None)
        p.add_argument(f"--{name}-d", type=float, default=None)
        p.set_defaults(**{f"_{name}_default": default})
    p.add_argument("--eta", type=float, default=2.7, help="path-loss exponent")
    p.add_argument("--omega-r", type=float, default=CENTER.azimuth, help="RIS azimuth (rad)")
    p.add_argument("--r-r", type=float, default=CENTER.radial, help="RIS radial position")
    p.add_argument("--h-r", type=float, default=CENTER.height, help="RIS height")
    p.add_argument("--k-quad", type=int, default=30, help="Gauss-Laguerre order")


def _add_output_flags(p, *, required=False):
    p.add_argument("--out", required=required, default=None, help="output path (CSV); stdout when omitted")
    p.add_argument("--json", action="store_true", help="also write a JSON mirror next to --out")
    p.add_argument("--manifest", default=None, help="manifest path (default: <out>.manifest.json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aeris", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"aeris {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analytic OP over an SNR grid")
    _add_channel_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("simulate", help="Monte-Carlo OP over an SNR grid")
    _add_channel_flags(p)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--compare-schemes", action="store_true", help="add the four relay baselines")
    _add_output_flags(p)

    p = sub.add_parser("dataset", help="generate a labelled training corpus")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--trials", type=int, default=100_000, help="Monte-Carlo trials per row")
    p.add_argument("--seed", type=int, default=0)
    _add_output_flags(p, required=True)

    p = sub.add_parser("train", help="train the OP regressor on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--epochs", type=int, default=600)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3, help="peak learning rate")
    p.add_argument("--weight-decay", type=float, default=0.3, help="decoupled weight decay")
    p.add_argument("--schedule", choices=SCHEDULES, default="cosine", help="learning-rate schedule")
    p.add_argument("--rmse-threshold", type=float, default=2e-2, help="validation RMSE early stop")
    p.add_argument("--gate", type=float, default=2e-2, help="test RMSE target for retries")
    p.add_argument("--max-retries", type=int, default=3)
    p.add_argument("--hidden-layers", type=int, default=5)
    p.add_argument("--hidden-width", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--history", default=None, help="per-epoch MSE CSV (default: <out>.history.csv)")
    _add_output_flags(p, required=True)

    p = sub.add_parser("predict", help="predicted OP from a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--features", default=None, help="one comma-separated 13-feature vector")
    _add_channel_flags(p, multi_n=True)
    _add_output_flags(p)

    p = sub.add_parser("rerun", help="replay a run from its manifest")
    p.add_argument("manifest_path")
    p.add_argument("--out", default=None, help="write the primary artifact here instead")
    return parser


def _hop_value(args, name):
    default = getattr(args, f"_{name}_default")
    both = getattr(args, name)
    s = getattr(args, f"{name}_s")
    d = getattr(args, f"{name}_d")
    base = default if both is None else both
    return (base if s is None else s), (base if d is None else d)


def _position(args):
    if not (0.0 <= args.r_r <= 0.5 and 0.0 <= args.h_r <= 1.0):
        raise UsageError("RIS position must lie in the cylinder: 0 <= r-r <= 0.5, 0 <= h-r <= 1")
    return CylindricalPosition(args.omega_r, args.r_r, args.h_r)


def _feature_base(args):
    m_s, m_d = _hop_value(args, "m")
    a_s, a_d = _hop_value(args, "alpha")
    b_s, b_d = _hop_value(args, "beta")
    pos = _position(args)
    return dict(m_s=m_s, m_d=m_d, alpha_s=a_s, alpha_d=a_d, beta_s=b_s, beta_d=b_d,
                omega_r=pos.azimuth, r_r=pos.radial, h_r=pos.height, eta=args.eta, r_th=args.rth)


def _config(args, n):
    f = _feature_base(args)
    om_s, om_d = link_spreads(CylindricalPosition(f["omega_r"], f["r_r"], f["h_r"]), f["eta"])
    hop = HopPairParams.from_values(f["m_s"], f["m_d"], om_s, om_d, f["alpha_s"], f["alpha_d"], f["beta_s"], f["beta_d"])
    return SystemConfig(n_elements=n, avg_snr_db=0.0, target_se=args.rth, hop_params=hop,
                        kappa=args.kappa, quadrature_order=args.k_quad)


def _grid(args):
    if args.gamma_db is not None:
        return np.array([args.gamma_db])
    return parse_grid(args.grid)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _format(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _emit_table(args, header, columns, artifacts):
    rows = list(zip(*columns))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_format(v) for v in r])
    if args.out is None:
        sys.stdout.write(buf.getvalue())
    else:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
        artifacts["table"] = str(args.out)
        if args.json:
            jpath = str(args.out) + ".json"
            payload = {h: [float(v) for v in col] for h, col in zip(header, columns)}
            Path(jpath).write_text(json.dumps(payload, indent=1), encoding="utf-8")
            artifacts["json"] = jpath


def read_table(path):
    """Parse a CSV written by this tool into ``(header, float matrix)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader if row]
    return header, np.array(data).reshape(-1, len(header))


def _write_manifest(args, argv, command, params, seeds, artifacts, started):
    manifest = {
        "command": command,
        "argv": list(argv),
        "parameters": params,
        "seeds": seeds,
        "artifacts": artifacts,
        "version": __version__,
        "duration_s": time.perf_counter() - started,
    }
    text = json.dumps(manifest, indent=1, sort_keys=True)
    path = args.manifest
    if path is None and getattr(args, "out", None) is not None:
        path = str(args.out) + ".manifest.json"
    if path is None:
        sys.stderr.write(text + "\n")
    else:
        Path(path).write_text(text, encoding="utf-8")
    return manifest


def _channel_params(args):
    p = {k: getattr(args, k) for k in ("n", "kappa", "rth", "eta", "k_quad")}
    p.update(_feature_base(args))
    p["grid_db"] = [float(g) for g in _grid(args)]
    return p


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_analyze(args):
    config = _config(args, args.n)
    grid = _grid(args)
    op = outage_curve(config, grid)
    artifacts = {}
    _emit_table(args, ["gamma_db", "op_analytic"], [grid, op], artifacts)
    return _channel_params(args), {}, artifacts


def cmd_simulate(args):
    config = _config(args, args.n)
    grid = _grid(args)
    budget = TrialBudget(args.trials, args.seed)
    artifacts = {}
    if args.compare_schemes:
        res = compare_schemes(config, grid, budget)
        keys = ["ris", "hd_df", "hd_vg_af", "fd_af", "fd_df"]
        header = ["gamma_db"] + [f"op_{k}" for k in keys] + [f"stderr_{k}" for k in keys]
        cols = [grid] + [res[k][0] for k in keys] + [res[k][1] for k in keys]
    else:
        op, err = op_curve(config, grid, budget)
        header, cols = ["gamma_db", "op_sim", "stderr"], [grid, op, err]
    _emit_table(args, header, cols, artifacts)
    params = _channel_params(args)
    params.update(trials=args.trials, compare_schemes=args.compare_schemes)
    return params, {"seed": args.seed}, artifacts


def cmd_dataset(args):
    ranges = FeatureRanges()
    rows = generate_dataset(args.count, ranges, TrialBudget(args.trials, 0), args.seed)
    write_rows(args.out, rows)
    artifacts = {"corpus": str(args.out)}
    labels = rows.labels
    params = {
        "count": args.count,
        "trials": args.trials,
        "ranges": {k: list(getattr(ranges, k)) for k in ("gamma_db", "n", "m", "alpha", "beta", "eta", "r_th")},
        "label_fraction_zero": float(np.mean(labels == 0.0)),
        "label_fraction_one": float(np.mean(labels == 1.0)),
    }
    return params, {"master_seed": args.seed}, artifacts


def cmd_train(args):
    if not Path(args.corpus).is_file():
        raise UsageError(f"corpus not found: {args.corpus}")
    rows = read_rows(args.corpus)
    split = split_dataset(rows, args.split_seed)
    arch = MlpArchitecture(len(FEATURE_NAMES), args.hidden_layers, args.hidden_width, 1)
    cfg = TrainingConfig(learning_rate=args.lr, max_epochs=args.epochs, batch_size=args.batch_size,
                         rmse_threshold=args.rmse_threshold, seed=args.seed,
                         weight_decay=args.weight_decay, schedule=args.schedule)
    net, history, test_rmse, attempts = train_until_gate(
        init_network(arch, args.seed), split, cfg, gate=args.gate, max_retries=args.max_retries
    )
    save_network(args.out, net)
    hist_path = args.history or str(args.out) + ".history.csv"
    with open(hist_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "train_mse", "val_mse"])
        for i, (tr, va) in enumerate(zip(history.train_mse, history.val_mse)):
            w.writerow([i + 1, repr(tr), repr(va)])
    passed = test_rmse < args.gate
    print(f"test_rmse={test_rmse:.6g} gate={args.gate:g} {'PASS' if passed else 'FAIL'} "
          f"epochs={history.epochs} attempts={attempts}")
    params = {
        "corpus": str(args.corpus),
        "rows": len(rows),
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "lr": args.lr,
        "weight_decay": args.weight_decay,
        "schedule": args.schedule,
        "rmse_threshold": args.rmse_threshold,
        "gate": args.gate,
        "max_retries": args.max_retries,
        "hidden_layers": args.hidden_layers,
        "hidden_width": args.hidden_width,
        "test_rmse": test_rmse,
        "best_val_mse": history.best_val_mse,
        "attempts": attempts,
    }
    return params, {"seed": args.seed, "split_seed": args.split_seed}, {"model": str(args.out), "history": hist_path}


def cmd_predict(args):
    if not Path(args.model).is_file():
        raise UsageError(f"model not found: {args.model}")
    net = load_network(args.model)
    if args.features is not None:
        try:
            feats = np.array([[float(v) for v in args.features.split(",")]])
        except ValueError:
            raise UsageError("--features must be a comma-separated list of numbers") from None
    else:
        base = _feature_base(args)
        rows = []
        for n in args.n:
            for g in _grid(args):
                vals = dict(base, gamma_db=float(g), n=float(n))
                rows.append([vals[k] for k in FEATURE_NAMES])
        feats = np.array(rows)
    op = predict(net, feats)
    header = list(FEATURE_NAMES) + ["op_pred"]
    artifacts = {"model": str(args.model)}
    _emit_table(args, header, [feats[:, j] for j in range(feats.shape[1])] + [op], artifacts)
    params = {"features": args.features} if args.features is not None else _channel_params(args)
    return params, {}, artifacts


def cmd_rerun(args):
    try:
        manifest = json.loads(Path(args.manifest_path).read_text(encoding="utf-8"))
        argv = list(manifest["argv"])
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"not a run manifest: {args.manifest_path} ({exc})") from None
    if args.out is not None:
        if "--out" in argv:
            argv[argv.index("--out") + 1] = args.out
        else:
            argv += ["--out", args.out]
        if "--manifest" in argv:
            i = argv.index("--manifest")
            del argv[i:i + 2]
    return argv


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "dataset": cmd_dataset,
    "train": cmd_train,
    "predict": cmd_predict,
}


def _attach_grid_values(argv):
    # argparse reads a value such as "-10:20:1" as an option, so glue it to its flag
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--grid" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"--grid={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def _run(argv):
    parser = build_parser()
    args = parser.parse_args(_attach_grid_values(argv))
    if args.command == "rerun":
        return _run(cmd_rerun(args))
    started = time.perf_counter()
    params, seeds, artifacts = COMMANDS[args.command](args)
    _write_manifest(args, argv, args.command, params, seeds, artifacts, started)
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return _run(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, ParameterError, DomainError, CapacityError) as exc:
        print(f"aeris: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"aeris: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, DatasetFormatError, ModelLoadError, ShapeError) as exc:
        print(f"aeris: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AerisError as exc:
        print(f"aeris: error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
