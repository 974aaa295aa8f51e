"""Constant-gain (steady-state) Kalman fusion of dead reckoning and UWB fixes.

The filter state is just the planar position. Dead reckoning supplies the
dynamics as a displacement per IMU tick, so both the state-transition and
the observation matrices are the 2x2 identity and each axis reduces to a
scalar filter. The steady-state gain is the fixed point of the scalar
Riccati recursion and is stored as one number per axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

from .core import Anchor, ImuSample, KinematicState, RangeMeasurement, TimedPose, Trajectory
from .dataio import bucket_epochs
from .errors import ConfigurationError, NumericalError, UnknownAnchorError
from .imu import check_monotonic, dead_reckon_step
from .localization import min_max

MODES = ("steady_state", "classical", "imu_only", "uwb_only")

RICCATI_TOL = 1e-9
RICCATI_MAX_ITER = 10_000


@dataclass(frozen=True)
class FilterConfig:
    """Per-axis noise variances.

    q : process noise added by one prediction step (m^2)
    r : variance of one UWB position fix (m^2)
    p0 : initial covariance, used by the classical filter only (m^2)
    """

    q: float
    r: float
    p0: float = 0.0

    def __post_init__(self):
        if not (self.q >= 0 and self.r > 0 and self.p0 >= 0):
            raise ConfigurationError(f"invalid filter config q={self.q} r={self.r} p0={self.p0}")


@dataclass(frozen=True)
class FilterGain:
    kx: float
    ky: float

    def __post_init__(self):
        for k in (self.kx, self.ky):
            if not 0.0 <= k <= 1.0:
                raise ConfigurationError(f"gain {k} outside [0, 1]")

    @classmethod
    def scalar(cls, k: float) -> "FilterGain":
        return cls(k, k)


@dataclass(frozen=True)
class FilterState:
    x: float
    y: float
    p: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.p)):
            raise ValueError("non-finite filter state")


def riccati_fixed_point(q: float, r: float) -> tuple[float, float]:
    """Iterate the scalar Riccati recursion from P=0.

    Returns ``(K, P)`` with ``P`` the posterior variance at convergence.
    """
    if not r > 0:
        raise ConfigurationError("r must be positive")
    if q < 0:
        raise ConfigurationError("q must be non-negative")
    p = 0.0
    for _ in range(RICCATI_MAX_ITER):
        prior = p + q
        k = prior / (prior + r)
        p_next = (1.0 - k) * prior
        if abs(p_next - p) < RICCATI_TOL:
            prior = p_next + q
            return prior / (prior + r), p_next
        p = p_next
    raise NumericalError(
        f"Riccati recursion did not converge in {RICCATI_MAX_ITER} iterations (q={q}, r={r})"
    )


def compute_steady_state_gain(cfg: FilterConfig) -> FilterGain:
    k, _ = riccati_fixed_point(cfg.q, cfg.r)
    return FilterGain(k, k)


def sskf_predict(state: FilterState, displacement) -> FilterState:
    dx, dy = displacement
    return replace(state, x=state.x + dx, y=state.y + dy)


def sskf_update(state: FilterState, fix, gain: FilterGain) -> FilterState:
    fx, fy = fix
    return replace(
        state,
        x=state.x + gain.kx * (fx - state.x),
        y=state.y + gain.ky * (fy - state.y),
    )


def _kf_predict(state: FilterState, displacement, cfg: FilterConfig) -> FilterState:
    dx, dy = displacement
    return FilterState(state.x + dx, state.y + dy, state.p + cfg.q)


def _kf_update(state: FilterState, fix, cfg: FilterConfig) -> FilterState:
    k = state.p / (state.p + cfg.r)
    moved = sskf_update(state, fix, FilterGain(k, k))
    return replace(moved, p=(1.0 - k) * state.p)


def classical_kf_step(state: FilterState, displacement, fix, cfg: FilterConfig) -> FilterState:
    """One predict (and, if ``fix`` is not None, update) of the time-varying filter."""
    state = _kf_predict(state, displacement, cfg)
    if fix is not None:
        state = _kf_update(state, fix, cfg)
    return state


def _fix_for(epoch_ranges, anchors_by_id):
    pairs = []
    for m in epoch_ranges:
        try:
            pairs.append((anchors_by_id[m.anchor_id], m.distance))
        except KeyError:
            raise UnknownAnchorError(f"range at t={m.t} cites unknown anchor {m.anchor_id}") from None
    return min_max(pairs) if pairs else None


def run_fusion(initial: KinematicState, imu: Sequence[ImuSample],
               uwb: Sequence[RangeMeasurement], anchors: Sequence[Anchor],
               gain_or_cfg: Union[FilterGain, FilterConfig, None], mode: str = "steady_state",
               epoch_tolerance: float = 0.1, stats: Optional[dict] = None) -> Trajectory:
    """Run one localization pipeline and return the estimated track.

    Modes
    -----
    steady_state
        Predict with dead-reckoned displacements at every IMU tick, correct
        with the Min-Max fix of each UWB epoch using a constant gain.
    classical
        Same schedule with the time-varying Kalman gain (needs a
        :class:`FilterConfig`).
    imu_only
        Dead reckoning alone.
    uwb_only
        Min-Max fixes, one pose per UWB epoch.

    A UWB epoch is applied at the first IMU tick whose timestamp is at or
    after the epoch time, after that tick's prediction. Only position is
    corrected; the dead-reckoned velocity and heading run on untouched.
    ``stats``, if given, receives ``updates`` and ``skipped_epochs`` counts.
    """
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode {mode!r}; expected one of {MODES}")
    if stats is None:
        stats = {}
    stats.setdefault("updates", 0)
    stats.setdefault("skipped_epochs", 0)
    anchors_by_id = {a.id: a for a in anchors}
    epochs = bucket_epochs(uwb, epoch_tolerance) if mode != "imu_only" else []

    if mode == "uwb_only":
        poses = []
        for t, ranges in epochs:
            fix = _fix_for(ranges, anchors_by_id)
            if fix is None:
                stats["skipped_epochs"] += 1
                continue
            poses.append(TimedPose(t, fix[0], fix[1], 0.0))
        return Trajectory.from_poses(poses)

    if mode == "steady_state":
        if isinstance(gain_or_cfg, FilterConfig):
            gain = compute_steady_state_gain(gain_or_cfg)
        elif isinstance(gain_or_cfg, FilterGain):
            gain = gain_or_cfg
        else:
            raise ConfigurationError("steady_state mode needs a FilterGain or FilterConfig")
    elif mode == "classical":
        if not isinstance(gain_or_cfg, FilterConfig):
            raise ConfigurationError("classical mode needs a FilterConfig")
        cfg = gain_or_cfg

    imu = list(imu)
    if not imu:
        return Trajectory.from_poses([initial.pose(0.0)])
    check_monotonic(imu, "IMU samples")

    dr = initial
    state = FilterState(initial.x, initial.y, cfg.p0 if mode == "classical" else 0.0)
    poses = []
    ei = 0
    for k, sample in enumerate(imu):
        if k > 0:
            prev = imu[k - 1]
            nxt = dead_reckon_step(dr, prev, sample.t - prev.t)
            disp = (nxt.x - dr.x, nxt.y - dr.y)
            dr = nxt
            if mode == "classical":
                state = _kf_predict(state, disp, cfg)
            else:
                state = sskf_predict(state, disp)
        while ei < len(epochs) and epochs[ei][0] <= sample.t:
            if mode != "imu_only":
                fix = _fix_for(epochs[ei][1], anchors_by_id)
                if fix is None:
                    stats["skipped_epochs"] += 1
                elif mode == "classical":
                    state = _kf_update(state, fix, cfg)
                    stats["updates"] += 1
                else:
                    state = sskf_update(state, fix, gain)
                    stats["updates"] += 1
            ei += 1
        poses.append(TimedPose(sample.t, state.x, state.y, dr.theta))
    return Trajectory.from_poses(poses)
