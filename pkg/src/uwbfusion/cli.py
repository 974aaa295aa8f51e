"""Command-line front end.

Subcommands::

    uwbfusion gain        --q Q --r R
    uwbfusion simulate    [--run N]
    uwbfusion fuse        --anchors A --imu I --uwb U [--truth T] [--mode M ...]
    uwbfusion eval        --estimates E --truth T
    uwbfusion montecarlo  [--runs N] [--workers W] [--mode M ...]

Global flags ``--config FILE`` (JSON), ``--seed N`` and ``--out DIR`` may be
given before or after the subcommand; flags override values from the file.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional

from .channel import ChannelParams
from .core import Anchor, KinematicState
from .dataio import (
    dumps_json,
    emit,
    fmt,
    ingest,
    read_estimates,
    read_truth,
    write_anchors,
    write_imu,
    write_json,
    write_truth,
    write_uwb,
    _write_lines,
)
from .errors import ConfigurationError, DataError, EmptyInputError, NumericalError, OutOfRangeError, UwbFusionError
from .fusion import MODES, FilterConfig, FilterGain, compute_steady_state_gain, run_fusion
from .imu import ImuNoiseModel, initial_state_from_truth
from .scenario import (
    ScenarioSpec,
    default_spec,
    derive_seed,
    evaluate,
    generate_path,
    run_monte_carlo,
    simulate_run,
)

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICAL = 0, 2, 3, 4

SUMMARY_HEADER = ("mode", "mean_rmse_m", "std_rmse_m", "mean_max_error_m", "n_runs")

_CONFIG_KEYS = {"scenario", "dataset", "filter", "modes", "out", "epoch_tolerance", "seed", "n_runs", "workers"}


# -- configuration -----------------------------------------------------------

def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigurationError(f"{path}: top level must be an object")
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    if "scenario" in cfg and "dataset" in cfg:
        raise ConfigurationError("config may name a scenario or a dataset, not both")
    return cfg


def _anchor(obj) -> Anchor:
    if isinstance(obj, dict):
        return Anchor(int(obj["id"]), float(obj["x"]), float(obj["y"]), bool(obj.get("los", True)))
    aid, x, y, *rest = obj
    return Anchor(int(aid), float(x), float(y), bool(rest[0]) if rest else True)


def spec_from_dict(d: Optional[dict], seed: Optional[int] = None) -> ScenarioSpec:
    """ScenarioSpec from a JSON object; omitted fields keep the default replication values."""
    base = default_spec()
    d = dict(d or {})
    names = {f.name for f in dataclasses.fields(ScenarioSpec)}
    unknown = set(d) - names
    if unknown:
        raise ConfigurationError(f"unknown scenario keys: {sorted(unknown)}")
    try:
        if "anchors" in d:
            d["anchors"] = tuple(_anchor(a) for a in d["anchors"])
        if "noise" in d:
            d["noise"] = ImuNoiseModel(**d["noise"])
        if "channel" in d:
            d["channel"] = ChannelParams(**d["channel"])
        if seed is not None:
            d["seed"] = seed
        return dataclasses.replace(base, **d)
    except (TypeError, KeyError, ValueError) as exc:
        if isinstance(exc, UwbFusionError):
            raise
        raise ConfigurationError(f"bad scenario: {exc}") from None


def filter_from(args, cfg: dict):
    """FilterConfig or FilterGain from flags, falling back to the config file, else None."""
    f = dict(cfg.get("filter") or {})
    for key in ("q", "r", "p0", "k"):
        v = getattr(args, key, None)
        if v is not None:
            f[key] = v
    if not f:
        return None
    try:
        if "k" in f:
            return FilterGain.scalar(float(f["k"]))
        if "kx" in f or "ky" in f:
            return FilterGain(float(f["kx"]), float(f["ky"]))
        return FilterConfig(float(f["q"]), float(f["r"]), float(f.get("p0", 0.0)))
    except KeyError as exc:
        raise ConfigurationError(f"filter needs q and r (or k / kx, ky); missing {exc}") from None


def _resolve(args, cfg, name, default=None):
    v = getattr(args, name, None)
    return v if v is not None else cfg.get(name, default)


def _modes(args, cfg, default):
    modes = args.mode or cfg.get("modes") or list(default)
    for m in modes:
        if m not in MODES:
            raise ConfigurationError(f"unknown mode {m!r}; expected one of {MODES}")
    return list(dict.fromkeys(modes))


def _out_dir(args, cfg) -> Path:
    return Path(_resolve(args, cfg, "out", "."))


# -- subcommands ---------------------------------------------------------------

def cmd_gain(args, cfg) -> int:
    f = filter_from(args, cfg)
    if not isinstance(f, FilterConfig):
        raise ConfigurationError("gain needs --q and --r")
    g = compute_steady_state_gain(f)
    print(dumps_json({"q": f.q, "r": f.r, "kx": g.kx, "ky": g.ky}))
    return EXIT_OK


def cmd_simulate(args, cfg) -> int:
    spec = spec_from_dict(cfg.get("scenario"), _resolve(args, cfg, "seed"))
    truth = generate_path(spec)
    imu, ranges = simulate_run(spec, truth, derive_seed(spec.seed, args.run, 0), derive_seed(spec.seed, args.run, 1))
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    write_anchors(out / "anchors.csv", spec.anchors)
    write_imu(out / "imu.csv", imu)
    write_uwb(out / "uwb.csv", ranges)
    write_truth(out / "truth.csv", truth)
    print(f"wrote {len(imu)} IMU samples, {len(ranges)} ranges and {len(truth)} truth poses to {out}")
    return EXIT_OK


def _initial(text) -> KinematicState:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigurationError(f"--initial expects x,y[,theta[,vx,vy]], got {text!r}") from None
    if not 2 <= len(vals) <= 5 or len(vals) == 4:
        raise ConfigurationError(f"--initial expects x,y[,theta[,vx,vy]], got {text!r}")
    x, y, *rest = vals
    theta = rest[0] if rest else 0.0
    vx, vy = (rest[1], rest[2]) if len(rest) == 3 else (0.0, 0.0)
    return KinematicState(x=x, y=y, vx=vx, vy=vy, theta=theta)


def cmd_fuse(args, cfg) -> int:
    ds = dict(cfg.get("dataset") or {})
    paths = {k: getattr(args, k) or ds.get(k) for k in ("anchors", "imu", "uwb", "truth")}
    missing = [k for k in ("anchors", "imu", "uwb") if not paths[k]]
    if missing:
        raise ConfigurationError(f"fuse needs dataset files: missing {missing}")
    anchors, imu, uwb, truth = ingest(paths["anchors"], paths["imu"], paths["uwb"], paths["truth"])
    modes = _modes(args, cfg, ["steady_state"])
    f = filter_from(args, cfg)
    if any(m in ("steady_state", "classical") for m in modes) and f is None:
        raise ConfigurationError("filter modes need --q/--r or --k")
    if "classical" in modes and not isinstance(f, FilterConfig):
        raise ConfigurationError("classical mode needs --q and --r")
    if args.initial:
        init = _initial(args.initial)
    elif truth is not None:
        init = initial_state_from_truth(truth)
    else:
        raise ConfigurationError("no truth file: give the starting pose with --initial")
    tol = float(_resolve(args, cfg, "epoch_tolerance", 0.1))
    tracks, reports = {}, {}
    for mode in modes:
        stats = {}
        tracks[mode] = run_fusion(init, imu, uwb, anchors, f, mode, epoch_tolerance=tol, stats=stats)
        if truth is not None:
            reports[mode] = evaluate(tracks[mode], truth)
    out = _out_dir(args, cfg)
    emit(tracks, reports or None, out)
    for mode in modes:
        line = f"{mode}: {len(tracks[mode])} poses"
        if mode in reports:
            line += f", rmse {fmt(reports[mode].rmse)} m, max {fmt(reports[mode].max_error)} m"
        print(line)
    return EXIT_OK


def cmd_eval(args, cfg) -> int:
    ds = dict(cfg.get("dataset") or {})
    truth_path = args.truth or ds.get("truth")
    if not args.estimates or not truth_path:
        raise ConfigurationError("eval needs --estimates and --truth")
    tracks = read_estimates(args.estimates)
    if not tracks:
        raise EmptyInputError(f"{args.estimates}: no estimates")
    truth = read_truth(truth_path)
    reports = {m: evaluate(tr, truth) for m, tr in tracks.items()}
    emit(tracks, reports, _out_dir(args, cfg))
    for m, rep in reports.items():
        print(f"{m}: rmse {fmt(rep.rmse)} m, max {fmt(rep.max_error)} m, n {rep.n_samples}")
    return EXIT_OK


def cmd_montecarlo(args, cfg) -> int:
    spec = spec_from_dict(cfg.get("scenario"), _resolve(args, cfg, "seed"))
    modes = _modes(args, cfg, MODES)
    n_runs = int(_resolve(args, cfg, "n_runs", 20))
    workers = int(_resolve(args, cfg, "workers", 1))
    f = filter_from(args, cfg)
    summary = run_monte_carlo(
        spec, modes, n_runs,
        filter_config=f if isinstance(f, FilterConfig) else None,
        gain=f if isinstance(f, FilterGain) else None,
        workers=workers,
        epoch_tolerance=float(_resolve(args, cfg, "epoch_tolerance", 0.1)),
    )
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    _write_lines(out / "summary.csv", SUMMARY_HEADER, (
        [r.mode, fmt(r.mean_rmse), fmt(r.std_rmse), fmt(r.mean_max_error), str(r.n_runs)]
        for r in summary.rows
    ))
    body = {"seed": spec.seed, "n_runs": n_runs}
    if summary.filter_config is not None:
        body["filter"] = dataclasses.asdict(summary.filter_config)
    if summary.gain is not None:
        body["gain"] = {"kx": float(summary.gain.kx), "ky": float(summary.gain.ky)}
    body["modes"] = {
        r.mode: {
            "mean_rmse_m": r.mean_rmse,
            "std_rmse_m": r.std_rmse,
            "mean_max_error_m": r.mean_max_error,
            "per_run_rmse_m": [float(v) for v in summary.per_run_rmse[r.mode]],
        }
        for r in summary.rows
    }
    write_json(out / "summary.json", body)
    for r in summary.rows:
        print(f"{r.mode:>12}  rmse {r.mean_rmse:.3f} +/- {r.std_rmse:.3f} m  max {r.mean_max_error:.3f} m")
    return EXIT_OK


# -- entry point -----------------------------------------------------------------

def _global_flags(parser, default):
    parser.add_argument("--config", default=default, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=default, help="master seed")
    parser.add_argument("--out", default=default, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="uwbfusion", description=__doc__.split("\n")[0])
    _global_flags(top, None)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, argparse.SUPPRESS)
    sub = top.add_subparsers(dest="command", required=True)

    def filter_flags(p):
        p.add_argument("--q", type=float, help="per-step process noise variance (m^2)")
        p.add_argument("--r", type=float, help="UWB fix variance (m^2)")
        p.add_argument("--p0", type=float, help="initial covariance for the classical filter (m^2)")
        p.add_argument("--k", type=float, help="explicit constant gain, both axes")

    p = sub.add_parser("gain", parents=[common], help="steady-state gain for given q, r")
    filter_flags(p)
    p.set_defaults(func=cmd_gain)

    p = sub.add_parser("simulate", parents=[common], help="write a synthetic dataset")
    p.add_argument("--run", type=int, default=0, help="run index within the seed's stream")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fuse", parents=[common], help="run fusion on a dataset")
    for name in ("anchors", "imu", "uwb", "truth"):
        p.add_argument(f"--{name}", help=f"{name}.csv path")
    p.add_argument("--mode", action="append", choices=MODES, help="repeatable; default steady_state")
    p.add_argument("--initial", help="starting pose x,y[,theta[,vx,vy]] when no truth is given")
    p.add_argument("--epoch-tolerance", dest="epoch_tolerance", type=float)
    filter_flags(p)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("eval", parents=[common], help="score estimates.csv against truth")
    p.add_argument("--estimates")
    p.add_argument("--truth")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("montecarlo", parents=[common], help="batch of seeded runs")
    p.add_argument("--runs", dest="n_runs", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--mode", action="append", choices=MODES)
    p.add_argument("--epoch-tolerance", dest="epoch_tolerance", type=float)
    filter_flags(p)
    p.set_defaults(func=cmd_montecarlo)
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DataError, EmptyInputError, OutOfRangeError, UwbFusionError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
