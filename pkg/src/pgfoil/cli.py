"""Command-line driver for the full pipeline.

Subcommands: gen-airfoil, panel, dataset, train, evaluate, report.
Every command is a pure function of its inputs and flags; rerunning one
reproduces byte-identical output files.  Floats in CSV output carry 10
significant digits.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
Errors print a single diagnostic line prefixed "pgfoil: error:".

An optional JSON config file (--config run.json) supplies defaults for
any long flag of the invoked subcommand, keyed by flag name with
underscores (e.g. {"epochs": 200}); explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import data as data_mod
from . import ensemble as ens_mod
from . import geometry, net, panel
from .errors import (
    DivergenceError,
    GeometryError,
    NormalizationError,
    ParseError,
    PgfoilError,
    SchemaError,
    ShapeError,
    SingularMatrixError,
    UnsupportedDesignationError,
)

_INPUT_ERRORS = (
    ParseError,
    GeometryError,
    UnsupportedDesignationError,
    SchemaError,
    NormalizationError,
    ShapeError,
    ValueError,
    OSError,
)
_NUMERIC_ERRORS = (SingularMatrixError, DivergenceError)

SMALL_ALPHA_DEG = 10.0  # boundary between the low- and high-incidence regimes


def _fmt(value) -> str:
    return f"{float(value):.10g}"


def _write_csv(path, header, rows):
    out = sys.stdout if path in (None, "-") else open(path, "w", newline="")
    try:
        writer = csv.writer(out)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    finally:
        if out is not sys.stdout:
            out.close()


def _parse_float_list(text):
    values = [float(v) for v in str(text).split(",") if v.strip()]
    if not values:
        raise ValueError(f"empty number list {text!r}")
    return values


def _parse_int_list(text):
    values = [int(v) for v in str(text).split(",") if v.strip()]
    if not values:
        raise ValueError(f"empty integer list {text!r}")
    return values


def _parse_alpha_spec(text):
    """Either 'lo:hi:step' (inclusive) or a comma list of angles."""
    text = str(text)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"alpha range must be lo:hi:step, got {text!r}")
        lo, hi, step = (float(p) for p in parts)
        if step <= 0 or hi < lo:
            raise ValueError(f"bad alpha range {text!r}")
        count = int(round((hi - lo) / step))
        values = [lo + k * step for k in range(count + 1)]
        return [v for v in values if v <= hi + 1e-9]
    return _parse_float_list(text)


def _file_fingerprint(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _load_config(path):
    with open(path) as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        raise SchemaError(f"{path}: config must be a JSON object")
    return config


def _resolve(args, name, default=None):
    """Flag value if given, else config-file value, else default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    config = getattr(args, "_config_values", None) or {}
    if name in config:
        return config[name]
    return default


def _check_config_keys(args, parser_flags):
    config = getattr(args, "_config_values", None) or {}
    unknown = sorted(set(config) - set(parser_flags))
    if unknown:
        raise SchemaError(
            f"config file has keys not accepted by this subcommand: {', '.join(unknown)}"
        )


def cmd_gen_airfoil(args):
    points = int(_resolve(args, "points", geometry.DEFAULT_POINTS))
    airfoil = geometry.naca(args.designation, points)
    text = geometry.write_dat(airfoil)
    out = _resolve(args, "output")
    if out in (None, "-"):
        sys.stdout.write(text)
        summary_stream = sys.stderr
    else:
        with open(out, "w") as fh:
            fh.write(text)
        summary_stream = sys.stdout
    t_max, t_x, c_max, c_x = geometry.thickness_camber(airfoil)
    print(
        f"{airfoil.name}: {airfoil.n_points} points, "
        f"max thickness {t_max:.4f} at x={t_x:.3f}, "
        f"max camber {c_max:.4f} at x={c_x:.3f}",
        file=summary_stream,
    )
    return 0


def _airfoil_from_args(args, points):
    if getattr(args, "dat", False):
        with open(args.airfoil) as fh:
            return geometry.read_dat(fh.read())
    return geometry.naca(args.airfoil, points)


def cmd_panel(args):
    points = int(_resolve(args, "points", geometry.DEFAULT_POINTS))
    airfoil = _airfoil_from_args(args, points)
    out = _resolve(args, "output")
    sweep = _resolve(args, "sweep")
    alpha = _resolve(args, "alpha")
    if sweep is not None:
        alphas = _parse_alpha_spec(sweep)
        rows = []
        for a in alphas:
            solution = panel.solve_flow(airfoil, a)
            rows.append([_fmt(a), _fmt(solution.cl), _fmt(solution.cdp)])
        _write_csv(out, ["alpha_deg", "cl", "cdp"], rows)
    elif alpha is not None:
        solution = panel.solve_flow(airfoil, float(alpha))
        geom = panel.build_panels(airfoil)
        rows = [
            [_fmt(x), _fmt(cp)]
            for x, cp in zip(geom.control_points[:, 0], solution.cp)
        ]
        _write_csv(out, ["x", "cp"], rows)
    else:
        raise ValueError("panel needs --alpha or --sweep")
    return 0


def _roster_designations(roster, extra):
    train: tuple = ()
    if roster == "desk":
        train = data_mod.DESK_TRAIN_ROSTER
    elif roster == "paper":
        train = data_mod.paper_train_roster()
    elif roster != "none":
        raise ValueError(f"unknown roster {roster!r}")
    designations = list(train)
    if extra:
        designations += [d.strip() for d in str(extra).split(",") if d.strip()]
    designations += list(data_mod.TEST_ROSTER)
    seen, unique = set(), []
    for d in designations:
        if d not in seen:
            seen.add(d)
            unique.append(d)
    return unique


def cmd_dataset(args):
    points = int(_resolve(args, "points", geometry.DEFAULT_POINTS))
    roster = _resolve(args, "roster", "desk")
    designations = _roster_designations(roster, _resolve(args, "airfoils"))
    airfoils = [geometry.naca(d, points) for d in designations]
    re_values = _parse_float_list(_resolve(args, "re", "1e6,2e6,3e6,4e6"))
    alpha_values = _parse_alpha_spec(_resolve(args, "alpha", "-20:20:1"))
    polar_dir = _resolve(args, "polar_dir")
    if polar_dir:
        truth = data_mod.PolarTruth(data_mod.read_polar_directory(polar_dir))
    else:
        truth = data_mod.SyntheticTruth(
            noise_std=float(_resolve(args, "noise_std", 0.0)),
            seed=int(_resolve(args, "noise_seed", 0)),
        )
    dataset = data_mod.build_dataset(airfoils, re_values, alpha_values, truth)
    data_mod.save_dataset(dataset, args.output)
    counts = {
        split: int(np.sum(dataset.split == split))
        for split in sorted(set(dataset.split.tolist()))
    }
    print(
        f"wrote {args.output}: {len(dataset)} samples "
        + ", ".join(f"{k}={v}" for k, v in counts.items())
    )
    return 0


def _train_config_from_args(args):
    patience = _resolve(args, "patience")
    return net.TrainConfig(
        learning_rate=float(_resolve(args, "lr", 1e-3)),
        epochs=int(_resolve(args, "epochs", 500)),
        batch_size=int(_resolve(args, "batch_size", 64)),
        seed=int(_resolve(args, "shuffle_seed", 0)),
        early_stopping_patience=int(patience) if patience is not None else None,
        validation_fraction=float(_resolve(args, "val_fraction", 0.0)),
    )


def cmd_train(args):
    mode = args.mode
    dataset = data_mod.load_dataset(args.dataset)
    train_data = dataset.matrices(mode, split="train")
    if train_data[0].shape[0] == 0:
        raise SchemaError(f"{args.dataset}: dataset has no training samples")
    hidden = tuple(_parse_int_list(_resolve(args, "hidden", "20,20,20,20")))
    injected_width = 4 if mode == "pgml" else 2
    spec = net.NetworkSpec(
        input_width=train_data[0].shape[1],
        hidden_widths=hidden,
        output_width=1,
        injection=net.InjectionSpec(
            layer_index=int(_resolve(args, "injection_layer", 3)),
            injected_width=injected_width,
        ),
        activation=_resolve(args, "activation", "tanh"),
    )
    config = _train_config_from_args(args)
    seeds = _parse_int_list(_resolve(args, "seeds", "1,2,3,4,5,6,7,8,9,10"))
    trained = ens_mod.train_ensemble(spec, train_data, config, seeds)
    extra = {
        "mode": mode,
        "dataset_fingerprint": _file_fingerprint(args.dataset),
        "normalization": dataset.normalization.as_dict(),
    }
    ens_mod.save_ensemble(trained, args.output, extra)
    for i, history in enumerate(trained.histories):
        rows = []
        for epoch, train_loss in enumerate(history.train):
            row = [str(epoch), _fmt(train_loss)]
            if history.validation:
                row.append(_fmt(history.validation[epoch]))
            rows.append(row)
        header = ["epoch", "train_loss"] + (["val_loss"] if history.validation else [])
        _write_csv(os.path.join(args.output, f"loss_{i:02d}.csv"), header, rows)
    print(f"wrote {args.output}: {len(seeds)} {mode} members")
    return 0


def _regime_metrics(rows):
    """Summary metrics per incidence regime from evaluation rows."""
    metrics = {}
    for label, select in (
        ("small", lambda a: abs(a) <= SMALL_ALPHA_DEG),
        ("large", lambda a: abs(a) > SMALL_ALPHA_DEG),
    ):
        picked = [r for r in rows if select(r["alpha_deg"])]
        if picked:
            err = np.array([r["cl_mean"] - r["cl_true"] for r in picked])
            std = np.array([r["cl_std"] for r in picked])
            metrics[label] = {
                "n": len(picked),
                "rmse": float(np.sqrt(np.mean(err**2))),
                "mean_std": float(np.mean(std)),
            }
        else:
            metrics[label] = {"n": 0, "rmse": math.nan, "mean_std": math.nan}
    return metrics


def cmd_evaluate(args):
    trained, manifest = ens_mod.load_ensemble(args.ensemble)
    dataset = data_mod.load_dataset(args.dataset)
    norm = data_mod.Normalization.from_dict(manifest["normalization"])
    dataset.normalization = norm
    mode = manifest["mode"]

    idx = dataset.indices("test")
    airfoil_filter = _resolve(args, "airfoil")
    if airfoil_filter:
        wanted = airfoil_filter.upper()
        if not wanted.startswith("NACA"):
            wanted = "NACA" + wanted
        idx = np.array([i for i in idx if dataset.names[i] == wanted], dtype=int)
    re_filter = _resolve(args, "re")
    if re_filter is not None:
        re_value = float(re_filter)
        idx = np.array(
            [i for i in idx if math.isclose(dataset.reynolds[i], re_value, rel_tol=1e-9)],
            dtype=int,
        )
    if idx.size == 0:
        raise SchemaError("no test samples match the evaluate filter")

    features = norm.normalize_geometry(dataset.geometry[idx])
    injected = dataset.injected_features(mode, idx)
    mean, std = ens_mod.predict_with_uncertainty(trained, features, injected)

    rows = []
    records = []
    for k, i in enumerate(idx):
        record = {
            "airfoil": dataset.names[i],
            "re": float(dataset.reynolds[i]),
            "alpha_deg": float(dataset.alpha_deg[i]),
            "cl_true": float(dataset.target[i]),
            "cl_mean": float(mean[k]),
            "cl_std": float(std[k]),
        }
        records.append(record)
        rows.append(
            [
                record["airfoil"],
                _fmt(record["re"]),
                _fmt(record["alpha_deg"]),
                _fmt(record["cl_true"]),
                _fmt(record["cl_mean"]),
                _fmt(record["cl_std"]),
            ]
        )
    out = _resolve(args, "output")
    _write_csv(out, ["airfoil", "re", "alpha_deg", "cl_true", "cl_mean", "cl_std"], rows)

    metrics = _regime_metrics(records)
    stream = sys.stderr if out in (None, "-") else sys.stdout
    print(f"pgfoil evaluate [{mode}]: {len(records)} rows", file=stream)
    for label, text in (("small", "|alpha| <= 10"), ("large", "|alpha| >  10")):
        m = metrics[label]
        print(
            f"  {text}: n={m['n']} rmse={m['rmse']:.6g} mean_std={m['mean_std']:.6g}",
            file=stream,
        )
    return 0


def _read_eval_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for row in reader:
            try:
                rows.append(
                    {
                        "airfoil": row["airfoil"],
                        "re": float(row["re"]),
                        "alpha_deg": float(row["alpha_deg"]),
                        "cl_true": float(row["cl_true"]),
                        "cl_mean": float(row["cl_mean"]),
                        "cl_std": float(row["cl_std"]),
                    }
                )
            except (KeyError, TypeError, ValueError):
                raise SchemaError(f"{path}: not an evaluation CSV") from None
    if not rows:
        raise SchemaError(f"{path}: evaluation CSV has no rows")
    return rows


def _ratio(numer, denom):
    if denom == 0.0:
        return math.nan
    return numer / denom


def cmd_report(args):
    ml_rows = _read_eval_csv(args.ml)
    pgml_rows = _read_eval_csv(args.pgml)
    key = lambda r: (r["airfoil"], r["re"], r["alpha_deg"])
    if sorted(map(key, ml_rows)) != sorted(map(key, pgml_rows)):
        raise SchemaError("ml and pgml evaluation CSVs cover different sweeps")

    groups = sorted({(r["airfoil"], r["re"]) for r in ml_rows})
    out_rows = []
    scopes = [("overall", None)] + [(f"{a}@{_fmt(r)}", (a, r)) for a, r in groups]
    flags = {}
    for label, group in scopes:
        if group is None:
            ml_scope, pgml_scope = ml_rows, pgml_rows
        else:
            ml_scope = [r for r in ml_rows if (r["airfoil"], r["re"]) == group]
            pgml_scope = [r for r in pgml_rows if (r["airfoil"], r["re"]) == group]
        ml_metrics = _regime_metrics(ml_scope)
        pgml_metrics = _regime_metrics(pgml_scope)
        for regime in ("small", "large"):
            m, p = ml_metrics[regime], pgml_metrics[regime]
            out_rows.append(
                [
                    label,
                    regime,
                    str(m["n"]),
                    _fmt(m["rmse"]),
                    _fmt(p["rmse"]),
                    _fmt(_ratio(p["rmse"], m["rmse"])),
                    _fmt(m["mean_std"]),
                    _fmt(p["mean_std"]),
                    _fmt(_ratio(p["mean_std"], m["mean_std"])),
                ]
            )
        if group is None:
            flags["std"] = pgml_metrics["small"]["mean_std"] < ml_metrics["small"]["mean_std"]
            flags["rmse"] = pgml_metrics["small"]["rmse"] <= ml_metrics["small"]["rmse"]

    header = [
        "scope",
        "regime",
        "n",
        "ml_rmse",
        "pgml_rmse",
        "rmse_ratio",
        "ml_mean_std",
        "pgml_mean_std",
        "std_ratio",
    ]
    out = _resolve(args, "output")
    _write_csv(out, header, out_rows)
    stream = sys.stderr if out in (None, "-") else sys.stdout
    widths = [max(len(h), max(len(r[i]) for r in out_rows)) for i, h in enumerate(header)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)), file=stream)
    for row in out_rows:
        print("  ".join(v.ljust(w) for v, w in zip(row, widths)), file=stream)
    print(
        "PGML/ML mean-std ratio < 1 on |alpha|<=10: "
        + ("PASS" if flags["std"] else "FAIL"),
        file=stream,
    )
    print(
        "PGML RMSE <= ML RMSE on |alpha|<=10: "
        + ("PASS" if flags["rmse"] else "FAIL"),
        file=stream,
    )
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pgfoil",
        description="Airfoil lift surrogates with panel-method feature injection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-airfoil", help="generate a NACA contour file")
    p.add_argument("designation", help="4- or 5-digit NACA code")
    p.add_argument("--points", type=int, default=None)
    p.add_argument("-o", "--output", default=None, help="output .dat path (default stdout)")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_gen_airfoil, _flags=("points", "output"))

    p = sub.add_parser("panel", help="run the panel method")
    p.add_argument("airfoil", help="NACA designation, or a .dat path with --dat")
    p.add_argument("--dat", action="store_true", help="treat AIRFOIL as a coordinate file")
    p.add_argument("--alpha", type=float, default=None, help="single incidence: emit x,cp")
    p.add_argument("--sweep", default=None, help="lo:hi:step sweep: emit alpha_deg,cl,cdp")
    p.add_argument("--points", type=int, default=None)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_panel, _flags=("alpha", "sweep", "points", "output"))

    p = sub.add_parser("dataset", help="build a training/test dataset CSV")
    p.add_argument("--roster", default=None, choices=["desk", "paper", "none"])
    p.add_argument("--airfoils", default=None, help="comma list of extra designations")
    p.add_argument("--re", default=None, help="comma list of Reynolds numbers")
    p.add_argument("--alpha", default=None, help="lo:hi:step or comma list of degrees")
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--polar-dir", dest="polar_dir", default=None)
    p.add_argument("--noise-std", dest="noise_std", type=float, default=None)
    p.add_argument("--noise-seed", dest="noise_seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(
        func=cmd_dataset,
        _flags=(
            "roster",
            "airfoils",
            "re",
            "alpha",
            "points",
            "polar_dir",
            "noise_std",
            "noise_seed",
        ),
    )

    p = sub.add_parser("train", help="train a seed ensemble")
    p.add_argument("--dataset", required=True)
    p.add_argument("--mode", required=True, choices=["ml", "pgml"])
    p.add_argument("--seeds", default=None, help="comma list (default 1..10)")
    p.add_argument("--hidden", default=None, help="comma list of hidden widths")
    p.add_argument("--injection-layer", dest="injection_layer", type=int, default=None)
    p.add_argument("--activation", default=None, choices=list(net.ACTIVATIONS))
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--shuffle-seed", dest="shuffle_seed", type=int, default=None)
    p.add_argument("--val-fraction", dest="val_fraction", type=float, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("-o", "--output", required=True, help="ensemble output directory")
    p.add_argument("--config", default=None)
    p.set_defaults(
        func=cmd_train,
        _flags=(
            "seeds",
            "hidden",
            "injection_layer",
            "activation",
            "lr",
            "epochs",
            "batch_size",
            "shuffle_seed",
            "val_fraction",
            "patience",
        ),
    )

    p = sub.add_parser("evaluate", help="ensemble predictions over test samples")
    p.add_argument("--ensemble", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--airfoil", default=None, help="restrict to one airfoil")
    p.add_argument("--re", default=None, help="restrict to one Reynolds number")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_evaluate, _flags=("airfoil", "re", "output"))

    p = sub.add_parser("report", help="side-by-side ML vs PGML comparison")
    p.add_argument("--ml", required=True, help="ml evaluation CSV")
    p.add_argument("--pgml", required=True, help="pgml evaluation CSV")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_report, _flags=("output",))

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            args._config_values = _load_config(args.config)
            _check_config_keys(args, args._flags)
        else:
            args._config_values = {}
        return args.func(args)
    except _NUMERIC_ERRORS as exc:
        print(f"pgfoil: error: {exc}", file=sys.stderr)
        return 3
    except PgfoilError as exc:
        print(f"pgfoil: error: {exc}", file=sys.stderr)
        return 2
    except _INPUT_ERRORS as exc:
        print(f"pgfoil: error: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
