"""CSV ingestion/emission and grouping of ranges into epochs.

File schemas (header row mandatory, comma separated, '.' decimal point)::

    anchors.csv    anchor_id,x_m,y_m,los
    imu.csv        t_s,ax_body_mps2,ay_body_mps2,omega_z_radps
    uwb.csv        t_s,anchor_id,range_m
    truth.csv      t_s,x_m,y_m,theta_rad
    estimates.csv  t_s,x_m,y_m,mode
    errors.csv     t_s,error_m,mode
"""

from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path
from typing import Optional, Sequence

from .core import Anchor, ImuSample, RangeMeasurement, Trajectory
from .errors import OrderingError, ParseError, UnknownAnchorError

ANCHORS_HEADER = ("anchor_id", "x_m", "y_m", "los")
IMU_HEADER = ("t_s", "ax_body_mps2", "ay_body_mps2", "omega_z_radps")
UWB_HEADER = ("t_s", "anchor_id", "range_m")
TRUTH_HEADER = ("t_s", "x_m", "y_m", "theta_rad")
ESTIMATES_HEADER = ("t_s", "x_m", "y_m", "mode")
ERRORS_HEADER = ("t_s", "error_m", "mode")

DECIMALS = 6


def bucket_epochs(ranges: Sequence[RangeMeasurement], tolerance: float = 0.1):
    """Group time-ordered ranges into epochs for single-shot localization.

    A range joins the open epoch when it lies within ``tolerance`` of the
    epoch's first range, otherwise it opens a new epoch. Only the earliest
    range per anchor is kept inside an epoch. Returns a list of
    ``(epoch_time, [ranges])``.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    epochs = []
    seen = set()
    prev_t = -math.inf
    for m in ranges:
        if m.t < prev_t:
            raise OrderingError(f"ranges not time-ordered at t={m.t}")
        prev_t = m.t
        if epochs and m.t - epochs[-1][0] <= tolerance:
            if m.anchor_id not in seen:
                epochs[-1][1].append(m)
                seen.add(m.anchor_id)
            continue
        epochs.append((m.t, [m]))
        seen = {m.anchor_id}
    return epochs


# -- reading ---------------------------------------------------------------

def _rows(path, header):
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise ParseError("missing header row", path, 1) from None
        if tuple(h.strip() for h in got) != header:
            raise ParseError(f"expected header {','.join(header)}, got {','.join(got)}", path, 1)
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", path, reader.line_num)
            yield reader.line_num, [c.strip() for c in row]


def _num(text, path, line, kind=float):
    try:
        v = kind(text)
    except ValueError:
        raise ParseError(f"cannot parse {text!r} as {kind.__name__}", path, line) from None
    if kind is float and not math.isfinite(v):
        raise ParseError(f"non-finite value {text!r}", path, line)
    return v


def read_anchors(path) -> list[Anchor]:
    anchors, ids = [], set()
    for line, (aid, x, y, los) in _rows(path, ANCHORS_HEADER):
        aid = _num(aid, path, line, int)
        if aid in ids:
            raise ParseError(f"duplicate anchor id {aid}", path, line)
        if los not in ("0", "1"):
            raise ParseError(f"los must be 0 or 1, got {los!r}", path, line)
        ids.add(aid)
        anchors.append(Anchor(aid, _num(x, path, line), _num(y, path, line), los == "1"))
    return anchors


def _check_time(t, prev, path, line, strict=True):
    if t < 0:
        raise ParseError(f"negative time {t}", path, line)
    if (strict and t <= prev) or t < prev:
        raise OrderingError(f"{path}:{line}: time {t} does not increase (previous {prev})")


def read_imu(path) -> list[ImuSample]:
    out, prev = [], -math.inf
    for line, row in _rows(path, IMU_HEADER):
        t, ax, ay, w = (_num(v, path, line) for v in row)
        _check_time(t, prev, path, line)
        prev = t
        out.append(ImuSample(t, ax, ay, w))
    return out


def read_uwb(path, anchors: Optional[Sequence[Anchor]] = None) -> list[RangeMeasurement]:
    """Ranges may share a timestamp (several anchors per epoch) but must not go back."""
    known = None if anchors is None else {a.id for a in anchors}
    out, prev = [], -math.inf
    for line, (t, aid, r) in _rows(path, UWB_HEADER):
        t = _num(t, path, line)
        aid = _num(aid, path, line, int)
        r = _num(r, path, line)
        _check_time(t, prev, path, line, strict=False)
        prev = t
        if r < 0:
            raise ParseError(f"negative range {r}", path, line)
        if known is not None and aid not in known:
            raise UnknownAnchorError(f"{path}:{line}: unknown anchor id {aid}")
        out.append(RangeMeasurement(t, aid, r))
    return out


def read_truth(path) -> Trajectory:
    cols = [[], [], [], []]
    prev = -math.inf
    for line, row in _rows(path, TRUTH_HEADER):
        vals = [_num(v, path, line) for v in row]
        _check_time(vals[0], prev, path, line)
        prev = vals[0]
        for c, v in zip(cols, vals):
            c.append(v)
    return Trajectory(*cols)


def read_estimates(path) -> dict[str, Trajectory]:
    """Estimated tracks keyed by mode, in file order."""
    per_mode: dict[str, list] = {}
    for line, (t, x, y, mode) in _rows(path, ESTIMATES_HEADER):
        per_mode.setdefault(mode, []).append(
            (_num(t, path, line), _num(x, path, line), _num(y, path, line))
        )
    out = {}
    for mode, rows in per_mode.items():
        t, x, y = zip(*rows)
        out[mode] = Trajectory(t, x, y)
    return out


def ingest(anchors_csv, imu_csv, uwb_csv, truth_csv=None):
    """Load a dataset. An empty or missing ``truth_csv`` disables evaluation."""
    anchors = read_anchors(anchors_csv)
    imu = read_imu(imu_csv)
    uwb = read_uwb(uwb_csv, anchors)
    truth = read_truth(truth_csv) if truth_csv else None
    return anchors, imu, uwb, truth


# -- writing ---------------------------------------------------------------

def fmt(v) -> str:
    return f"{float(v):.{DECIMALS}f}"


def _write(path, text):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _write_lines(path, header, rows):
    _write(path, ",".join(header) + "\n" + "".join(",".join(r) + "\n" for r in rows))


def write_anchors(path, anchors: Sequence[Anchor]):
    _write_lines(path, ANCHORS_HEADER,
                 ([str(a.id), fmt(a.x), fmt(a.y), "1" if a.los else "0"] for a in anchors))


def write_imu(path, samples: Sequence[ImuSample]):
    # IMU readings need more precision than positions to survive a round trip
    _write_lines(path, IMU_HEADER,
                 ([fmt(s.t), repr(s.ax_body), repr(s.ay_body), repr(s.omega_z)] for s in samples))


def write_uwb(path, ranges: Sequence[RangeMeasurement]):
    _write_lines(path, UWB_HEADER, ([fmt(m.t), str(m.anchor_id), fmt(m.distance)] for m in ranges))


def write_truth(path, traj: Trajectory):
    _write_lines(path, TRUTH_HEADER,
                 ([fmt(p.t), fmt(p.x), fmt(p.y), fmt(p.theta)] for p in traj))


def write_estimates(path, tracks: dict):
    rows = []
    for mode, traj in tracks.items():
        rows.extend([fmt(p.t), fmt(p.x), fmt(p.y), mode] for p in traj)
    _write_lines(path, ESTIMATES_HEADER, rows)


def write_errors(path, reports: dict):
    rows = []
    for mode, rep in reports.items():
        rows.extend([fmt(t), fmt(e), mode] for t, e in rep.error_series)
    _write_lines(path, ERRORS_HEADER, rows)


def dumps_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written at fixed 6-decimal precision."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json_str(str(k))}: {dumps_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        return fmt(obj)
    if isinstance(obj, str):
        return _json_str(obj)
    try:
        return fmt(float(obj))
    except (TypeError, ValueError):
        raise TypeError(f"cannot serialize {type(obj).__name__}") from None


def _json_str(s):
    return json.dumps(s)


def write_json(path, obj):
    _write(path, dumps_json(obj) + "\n")


def report_dict(reports: dict) -> dict:
    """report.json body: the first mode's metrics at top level plus a per-mode breakdown."""
    modes = list(reports)
    first = reports[modes[0]]
    return {
        "mode": modes[0],
        "rmse_m": first.rmse,
        "max_error_m": first.max_error,
        "n_samples": first.n_samples,
        "modes": {
            m: {"rmse_m": r.rmse, "max_error_m": r.max_error, "n_samples": r.n_samples}
            for m, r in reports.items()
        },
    }


def emit(tracks, reports, out_dir, mode: str = "steady_state") -> list[Path]:
    """Write estimates.csv and, when reports are given, errors.csv and report.json.

    ``tracks`` and ``reports`` map mode names to a Trajectory / EvalReport.
    A bare Trajectory (and EvalReport) is filed under ``mode``. Files are
    rewritten in full, so identical inputs give identical bytes.
    """
    if isinstance(tracks, Trajectory):
        tracks = {mode: tracks}
        if reports is not None and not isinstance(reports, dict):
            reports = {mode: reports}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")
    paths = [out / "estimates.csv"]
    write_estimates(paths[0], tracks)
    if reports:
        paths.append(out / "errors.csv")
        write_errors(paths[-1], reports)
        paths.append(out / "report.json")
        write_json(paths[-1], report_dict(reports))
    return paths
