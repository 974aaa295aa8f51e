"""Inertial unit simulation and planar dead reckoning.

The dead-reckoning integrator is explicit Euler with a zero-order hold on
the measurements: sample ``k`` is assumed to hold over ``[t_k, t_{k+1})``,
accelerations are rotated with the heading at the start of the interval,
and the heading is then advanced by ``omega_k * dt``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import ImuSample, KinematicState, Trajectory
from .errors import ConfigurationError, EmptyInputError, OrderingError


@dataclass(frozen=True)
class ImuNoiseModel:
    """Accelerometer and gyro error model.

    Exactly one of ``accel_snr_db`` and ``accel_noise_std`` is used. The
    SNR is joint over both body axes: the per-axis noise variance equals the
    mean square of the true body accelerations (averaged over samples and
    axes) divided by ``10**(snr/10)``.

    ``accel_bias_std`` draws one constant offset per axis per run (zero-mean
    across runs). This is the "average noise" whose position error grows as
    ``N * t**2 / 2``; white noise alone only grows as ``t**1.5``.
    """

    accel_snr_db: Optional[float] = None
    accel_noise_std: Optional[float] = 0.0
    accel_bias_std: float = 0.0
    gyro_bias: float = 0.0
    gyro_noise_std: float = 0.0

    def __post_init__(self):
        if (self.accel_snr_db is None) == (self.accel_noise_std is None):
            raise ConfigurationError(
                "exactly one of accel_snr_db / accel_noise_std must be set"
            )
        if self.accel_noise_std is not None and self.accel_noise_std < 0:
            raise ConfigurationError("accel_noise_std must be >= 0")
        if self.accel_bias_std < 0 or self.gyro_noise_std < 0:
            raise ConfigurationError("noise standard deviations must be >= 0")
        for v in (self.accel_snr_db, self.gyro_bias):
            if v is not None and not math.isfinite(v):
                raise ConfigurationError("noise parameters must be finite")

    @classmethod
    def from_snr(cls, snr_db: float, **kw) -> "ImuNoiseModel":
        return cls(accel_snr_db=snr_db, accel_noise_std=None, **kw)


def rotation(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s], [s, c]])


def rotate_body_to_global(u_body, phi: float) -> np.ndarray:
    """Project a planar body-frame vector into the global frame.

    ``phi`` is the heading of the body x-axis measured counter-clockwise
    from the global x-axis.
    """
    c, s = math.cos(phi), math.sin(phi)
    ux, uy = float(u_body[0]), float(u_body[1])
    return np.array([c * ux - s * uy, s * ux + c * uy])


def dead_reckon_step(state: KinematicState, sample: ImuSample, dt: float) -> KinematicState:
    """Advance ``state`` by ``dt`` seconds holding ``sample`` constant."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    c, s = math.cos(state.theta), math.sin(state.theta)
    ax = c * sample.ax_body - s * sample.ay_body
    ay = s * sample.ax_body + c * sample.ay_body
    return KinematicState(
        x=state.x + state.vx * dt + 0.5 * ax * dt * dt,
        y=state.y + state.vy * dt + 0.5 * ay * dt * dt,
        vx=state.vx + ax * dt,
        vy=state.vy + ay * dt,
        ax=ax,
        ay=ay,
        theta=state.theta + sample.omega_z * dt,
        omega=sample.omega_z,
    )


def check_monotonic(samples: Sequence, what: str = "samples"):
    for a, b in zip(samples, samples[1:]):
        if not b.t > a.t:
            raise OrderingError(f"{what} not strictly increasing at t={b.t}")


def dead_reckon(initial: KinematicState, samples: Iterable[ImuSample]) -> Trajectory:
    """Integrate an IMU stream from a known initial state.

    The initial state is taken to hold at the first sample time; the
    output has one pose per sample (the last sample's reading is never
    integrated because nothing follows it).
    """
    samples = list(samples)
    if not samples:
        return Trajectory.from_poses([initial.pose(0.0)])
    check_monotonic(samples)
    poses = [initial.pose(samples[0].t)]
    state = initial
    for prev, cur in zip(samples, samples[1:]):
        state = dead_reckon_step(state, prev, cur.t - prev.t)
        poses.append(state.pose(cur.t))
    return Trajectory.from_poses(poses)


def drift_bound(noise_std: float, t: float) -> float:
    """Position error after ``t`` seconds from a constant acceleration error."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if noise_std < 0:
        raise ValueError("noise_std must be >= 0")
    return noise_std * t * t / 2.0


def kinematic_rollout(initial: KinematicState, t0: float, dt: float,
                      accel_body, omega):
    """Forward discrete kinematic model: the exact inverse of :func:`dead_reckon`.

    ``accel_body`` is an ``(n, 2)`` array of body-frame accelerations and
    ``omega`` an ``(n,)`` array of yaw rates, one per tick. Returns the IMU
    samples and the true trajectory (``n`` poses, one per sample).
    """
    accel_body = np.asarray(accel_body, dtype=float).reshape(-1, 2)
    omega = np.asarray(omega, dtype=float).ravel()
    if len(accel_body) != len(omega):
        raise ValueError("accel_body and omega lengths differ")
    samples = [
        ImuSample(t0 + k * dt, float(a[0]), float(a[1]), float(w))
        for k, (a, w) in enumerate(zip(accel_body, omega))
    ]
    poses = [initial.pose(t0)] if samples else []
    state = initial
    for k in range(len(samples) - 1):
        state = dead_reckon_step(state, samples[k], samples[k + 1].t - samples[k].t)
        poses.append(state.pose(samples[k + 1].t))
    return samples, Trajectory.from_poses(poses)


def body_kinematics(truth: Trajectory, rate_hz: float):
    """True body-frame accelerations and yaw rate of a densely sampled path.

    Central differences in the interior, one-sided at the endpoints
    (``numpy.gradient`` semantics). Returns ``(ax_body, ay_body, omega)``.
    """
    h = 1.0 / rate_hz
    vx = np.gradient(truth.x, h)
    vy = np.gradient(truth.y, h)
    ax = np.gradient(vx, h)
    ay = np.gradient(vy, h)
    omega = np.gradient(np.unwrap(truth.theta), h)
    c, s = np.cos(truth.theta), np.sin(truth.theta)
    return c * ax + s * ay, -s * ax + c * ay, omega


def decimation_factor(source_rate_hz: float, output_rate_hz: float) -> int:
    if not (source_rate_hz > 0 and output_rate_hz > 0):
        raise ConfigurationError("rates must be positive")
    if output_rate_hz > source_rate_hz:
        raise ConfigurationError("output rate exceeds source rate")
    ratio = source_rate_hz / output_rate_hz
    step = int(round(ratio))
    if abs(ratio - step) > 1e-9 * ratio:
        raise ConfigurationError(
            f"source rate {source_rate_hz} Hz is not an integer multiple of {output_rate_hz} Hz"
        )
    return step


def simulate_imu(truth: Trajectory, model: ImuNoiseModel, source_rate_hz: float,
                 output_rate_hz: float, rng_seed=None) -> list[ImuSample]:
    """Synthesize a noisy, sub-sampled IMU stream along ``truth``.

    ``truth`` must be uniformly sampled at ``source_rate_hz``. Noise is
    added at the source rate and the stream is then decimated by keeping
    every ``source/output``-th sample (no anti-alias filtering).
    """
    step = decimation_factor(source_rate_hz, output_rate_hz)
    if len(truth) < 3:
        raise EmptyInputError("truth needs at least 3 samples to difference twice")
    rng = np.random.default_rng(rng_seed)
    n = len(truth)
    abx, aby, omega = body_kinematics(truth, source_rate_hz)

    if model.accel_snr_db is not None:
        signal_power = float(np.mean(abx**2 + aby**2)) / 2.0
        if signal_power == 0.0:
            raise ConfigurationError("SNR specified for a run with zero true acceleration")
        sigma_a = math.sqrt(signal_power / 10 ** (model.accel_snr_db / 10.0))
    else:
        sigma_a = model.accel_noise_std

    # draw order is fixed so a given seed always maps to the same noise
    bias = rng.normal(0.0, 1.0, size=2) * model.accel_bias_std
    noise_a = rng.normal(0.0, 1.0, size=(n, 2)) * sigma_a
    noise_g = rng.normal(0.0, 1.0, size=n) * model.gyro_noise_std

    mx = abx + bias[0] + noise_a[:, 0]
    my = aby + bias[1] + noise_a[:, 1]
    mw = omega + model.gyro_bias + noise_g

    idx = np.arange(0, n, step)
    return [
        ImuSample(float(truth.t[i]), float(mx[i]), float(my[i]), float(mw[i])) for i in idx
    ]


def initial_state_from_truth(truth: Trajectory) -> KinematicState:
    """Known starting state: first pose, with velocity from the first two samples."""
    if len(truth) == 0:
        raise EmptyInputError("empty truth")
    if len(truth) == 1:
        return KinematicState(x=truth.x[0], y=truth.y[0], theta=truth.theta[0])
    dt = truth.t[1] - truth.t[0]
    return KinematicState(
        x=float(truth.x[0]),
        y=float(truth.y[0]),
        vx=float((truth.x[1] - truth.x[0]) / dt),
        vy=float((truth.y[1] - truth.y[0]) / dt),
        theta=float(truth.theta[0]),
    )
