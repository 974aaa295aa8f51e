"""Domain types, heading normalization and trajectory utilities.

All times are seconds (float64) relative to the start of a scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import EmptyInputError, OrderingError, OutOfRangeError

TWO_PI = 2.0 * math.pi


def wrap_angle(a):
    """Wrap an angle (scalar or array) to the half-open interval (-pi, pi].

    Values already inside the interval are returned bit-for-bit unchanged.
    """
    if np.ndim(a) == 0:
        a = float(a)
        if -math.pi < a <= math.pi:
            return a
        r = math.remainder(a, TWO_PI)
        return math.pi if r <= -math.pi else r
    a = np.asarray(a, dtype=float)
    out = a.copy()
    bad = (a <= -math.pi) | (a > math.pi)
    if np.any(bad):
        r = np.remainder(a[bad] + math.pi, TWO_PI) - math.pi
        r[r <= -math.pi] = math.pi
        out[bad] = r
    return out


def angle_diff(a, b):
    """Signed shortest rotation taking heading ``b`` to heading ``a``."""
    return wrap_angle(np.subtract(a, b))


def _check_finite(name, *values):
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name}: non-finite value {v!r}")


@dataclass(frozen=True)
class TimedPose:
    t: float
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        _check_finite("TimedPose", self.t, self.x, self.y, self.theta)
        if self.t < 0:
            raise ValueError(f"TimedPose: negative time {self.t}")
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class KinematicState:
    """Planar motion state of the cart in the global frame."""

    x: float = 0.0
    y: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    ax: float = 0.0
    ay: float = 0.0
    theta: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        _check_finite(
            "KinematicState",
            self.x, self.y, self.vx, self.vy, self.ax, self.ay, self.theta, self.omega,
        )
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    def pose(self, t: float) -> TimedPose:
        return TimedPose(t, self.x, self.y, self.theta)


@dataclass(frozen=True)
class ImuSample:
    """One inertial reading: body-frame accelerations and yaw rate."""

    t: float
    ax_body: float
    ay_body: float
    omega_z: float

    def __post_init__(self):
        _check_finite("ImuSample", self.t, self.ax_body, self.ay_body, self.omega_z)


@dataclass(frozen=True)
class Anchor:
    id: int
    x: float
    y: float
    los: bool = True

    def __post_init__(self):
        _check_finite("Anchor", self.x, self.y)


@dataclass(frozen=True)
class RangeMeasurement:
    t: float
    anchor_id: int
    distance: float

    def __post_init__(self):
        _check_finite("RangeMeasurement", self.t, self.distance)
        if self.distance < 0:
            raise ValueError(f"RangeMeasurement: negative distance {self.distance}")


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class Trajectory:
    """Time-ordered sequence of planar poses, stored column-wise.

    Indexing returns :class:`TimedPose` values; the ``t``, ``x``, ``y`` and
    ``theta`` attributes expose read-only numpy arrays.
    """

    __slots__ = ("t", "x", "y", "theta")

    def __init__(self, t, x, y, theta=None):
        t = np.asarray(t, dtype=float).ravel()
        x = np.asarray(x, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        theta = np.zeros_like(t) if theta is None else np.asarray(theta, dtype=float).ravel()
        if not (len(t) == len(x) == len(y) == len(theta)):
            raise ValueError("Trajectory: column lengths differ")
        for col in (t, x, y, theta):
            if not np.all(np.isfinite(col)):
                raise ValueError("Trajectory: non-finite values")
        if len(t) and t[0] < 0:
            raise ValueError("Trajectory: negative time")
        if np.any(np.diff(t) <= 0):
            raise OrderingError("Trajectory: timestamps must be strictly increasing")
        object.__setattr__(self, "t", _readonly(t))
        object.__setattr__(self, "x", _readonly(x))
        object.__setattr__(self, "y", _readonly(y))
        object.__setattr__(self, "theta", _readonly(wrap_angle(theta)))

    def __setattr__(self, name, value):
        raise AttributeError("Trajectory is immutable")

    def __reduce__(self):
        return (Trajectory, (self.t, self.x, self.y, self.theta))

    @classmethod
    def from_poses(cls, poses: Iterable[TimedPose]) -> "Trajectory":
        poses = list(poses)
        return cls(
            [p.t for p in poses], [p.x for p in poses], [p.y for p in poses],
            [p.theta for p in poses],
        )

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i) -> TimedPose:
        if isinstance(i, slice):
            return Trajectory(self.t[i], self.x[i], self.y[i], self.theta[i])
        return TimedPose(float(self.t[i]), float(self.x[i]), float(self.y[i]), float(self.theta[i]))

    def __iter__(self) -> Iterator[TimedPose]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, c), getattr(other, c)) for c in self.__slots__
        )

    def __repr__(self):
        if len(self) == 0:
            return "Trajectory(<empty>)"
        return f"Trajectory(n={len(self)}, t=[{self.t[0]:g}, {self.t[-1]:g}])"

    @property
    def xy(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def translated(self, dx: float, dy: float) -> "Trajectory":
        return Trajectory(self.t, self.x + dx, self.y + dy, self.theta)

    def rotated(self, phi: float) -> "Trajectory":
        c, s = math.cos(phi), math.sin(phi)
        return Trajectory(
            self.t, c * self.x - s * self.y, s * self.x + c * self.y, self.theta + phi
        )


def interpolate_many(traj: Trajectory, times: Sequence[float]):
    """Vectorized :func:`interpolate`. Returns arrays ``(x, y, theta)``."""
    if len(traj) == 0:
        raise EmptyInputError("cannot interpolate an empty trajectory")
    times = np.asarray(times, dtype=float)
    if times.size and (times.min() < traj.t[0] or times.max() > traj.t[-1]):
        raise OutOfRangeError(
            f"time outside trajectory span [{traj.t[0]}, {traj.t[-1]}]"
        )
    if len(traj) == 1:
        n = times.shape
        return np.full(n, traj.x[0]), np.full(n, traj.y[0]), np.full(n, traj.theta[0])
    i = np.searchsorted(traj.t, times, side="right") - 1
    i = np.clip(i, 0, len(traj) - 2)
    t0, t1 = traj.t[i], traj.t[i + 1]
    w = (times - t0) / (t1 - t0)
    x = traj.x[i] + w * (traj.x[i + 1] - traj.x[i])
    y = traj.y[i] + w * (traj.y[i + 1] - traj.y[i])
    dth = angle_diff(traj.theta[i + 1], traj.theta[i])
    theta = wrap_angle(traj.theta[i] + w * dth)
    # exact hits on the final sample
    last = times == traj.t[-1]
    x = np.where(last, traj.x[-1], x)
    y = np.where(last, traj.y[-1], y)
    theta = np.where(last, traj.theta[-1], theta)
    return x, y, theta


def interpolate(traj: Trajectory, t: float) -> TimedPose:
    """Pose at time ``t``: linear in position, shorter-arc in heading."""
    x, y, theta = interpolate_many(traj, np.array([t]))
    return TimedPose(float(t), float(x[0]), float(y[0]), float(theta[0]))


def path_length(traj: Trajectory) -> float:
    if len(traj) == 0:
        raise EmptyInputError("path_length of an empty trajectory")
    return float(np.sum(np.hypot(np.diff(traj.x), np.diff(traj.y))))
