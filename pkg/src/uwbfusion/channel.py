"""UWB multipath channel realizations and TOA ranging.

A single-cluster Saleh-Valenzuela style generator: taps arrive as a
Poisson process after the first path, with Rayleigh magnitudes whose mean
power decays exponentially with excess delay. Under LOS the first tap is
the direct path: a specular component of power ``los_direct_power_boost``
times the mean first-tap power plus the usual diffuse Rayleigh part, i.e.
Rician with that K-factor. Under NLOS the first arrival is late by an
exponentially distributed excess delay and is itself Rayleigh faded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Anchor, RangeMeasurement, Trajectory, interpolate_many
from .errors import ConfigurationError

SPEED_OF_LIGHT = 299_792_458.0
NS = 1e-9

# stream tag so channel draws never collide with other seeded consumers
_CHANNEL_STREAM = 0x55574221


@dataclass(frozen=True)
class MultipathTap:
    magnitude: float
    phase: float
    delay: float

    def __post_init__(self):
        if self.magnitude < 0 or self.delay < 0:
            raise ValueError("tap magnitude and delay must be non-negative")


@dataclass(frozen=True)
class ChannelRealization:
    taps: tuple
    los: bool

    def __post_init__(self):
        taps = tuple(self.taps)
        if not taps:
            raise ValueError("a channel needs at least one tap")
        if any(b.delay < a.delay for a, b in zip(taps, taps[1:])):
            taps = tuple(sorted(taps, key=lambda tap: tap.delay))
        object.__setattr__(self, "taps", taps)

    @property
    def magnitudes(self) -> np.ndarray:
        return np.array([tap.magnitude for tap in self.taps])

    @property
    def delays(self) -> np.ndarray:
        return np.array([tap.delay for tap in self.taps])


@dataclass(frozen=True)
class ChannelParams:
    tap_arrival_rate: float = 1.0 / NS
    power_decay_const: float = 20 * NS
    num_taps_max: int = 50
    nlos_excess_delay_mean: float = 10 * NS
    los_direct_power_boost: float = 10.0
    delay_resolution: float = 2 * NS

    def __post_init__(self):
        positive = (
            self.tap_arrival_rate, self.power_decay_const,
            self.nlos_excess_delay_mean, self.los_direct_power_boost,
        )
        if not all(v > 0 for v in positive) or self.num_taps_max < 1:
            raise ConfigurationError("channel rates and constants must be positive")
        if self.delay_resolution < 0:
            raise ConfigurationError("delay_resolution must be >= 0")


def _draw_taps(true_distance, los, params, rng):
    first = true_distance / SPEED_OF_LIGHT
    if not los:
        first += rng.exponential(params.nlos_excess_delay_mean)
    gaps = rng.exponential(1.0 / params.tap_arrival_rate, size=params.num_taps_max - 1)
    excess = np.concatenate([[0.0], np.cumsum(gaps)])
    mean_power = np.exp(-excess / params.power_decay_const)
    # Rayleigh magnitude with E[|a|^2] = mean_power
    re, im = rng.standard_normal((2, params.num_taps_max))
    mags = np.sqrt(mean_power / 2.0) * np.hypot(re, im)
    if los:
        # Rician direct path: specular part with K-factor = boost over the diffuse first tap
        mags[0] = abs(math.sqrt(params.los_direct_power_boost * mean_power[0])
                      + math.sqrt(mean_power[0] / 2.0) * complex(re[0], im[0]))
    phases = rng.uniform(0.0, 2.0 * math.pi, size=params.num_taps_max)
    return first + excess, mags, phases


def realize_channel(true_distance: float, los: bool, params: ChannelParams,
                    rng_seed=None) -> ChannelRealization:
    """Draw one channel impulse response for a link of the given length."""
    if not true_distance > 0:
        raise ValueError(f"true_distance must be positive, got {true_distance}")
    rng = np.random.default_rng(rng_seed)
    delays, mags, phases = _draw_taps(true_distance, los, params, rng)
    taps = tuple(
        MultipathTap(float(m), float(p), float(d)) for m, p, d in zip(mags, phases, delays)
    )
    return ChannelRealization(taps, bool(los))


def extract_toa(ch: ChannelRealization) -> float:
    """Delay of the strongest tap; ties go to the earliest one."""
    best = ch.taps[0]
    for tap in ch.taps[1:]:
        if tap.magnitude > best.magnitude:
            best = tap
    return best.delay


def range_from_toa(t: float, delay_resolution: float = 0.0) -> float:
    if t < 0:
        raise ValueError(f"negative time of arrival {t}")
    if delay_resolution > 0:
        t = round(t / delay_resolution) * delay_resolution
    return SPEED_OF_LIGHT * t


def link_seed(seed: int, tick: int, anchor_id: int) -> np.random.SeedSequence:
    """Sub-seed of one (tick, anchor) link.

    Mixing rule: ``SeedSequence([stream, seed, tick, anchor_id mod 2**32])``,
    so realizations do not depend on iteration order.
    """
    return np.random.SeedSequence(
        [_CHANNEL_STREAM, int(seed) % 2**63, int(tick), int(anchor_id) % 2**32]
    )


def tick_times(t_start: float, t_end: float, rate_hz: float) -> np.ndarray:
    n = int(math.floor((t_end - t_start) * rate_hz + 1e-9)) + 1
    return t_start + np.arange(n) / rate_hz


def simulate_ranges(truth: Trajectory, anchors: Sequence[Anchor], rate_hz: float,
                    params: ChannelParams, rng_seed: int = 0) -> list[RangeMeasurement]:
    """TOA range measurements from every anchor at ``rate_hz`` along ``truth``.

    Ticks start at the first truth sample and include it.
    """
    if not anchors:
        raise ConfigurationError("no anchors")
    if not rate_hz > 0:
        raise ConfigurationError("rate_hz must be positive")
    times = tick_times(truth.t[0], truth.t[-1], rate_hz)
    x, y, _ = interpolate_many(truth, times)
    out = []
    for k, t in enumerate(times):
        for a in anchors:
            d = math.hypot(x[k] - a.x, y[k] - a.y)
            if d == 0.0:
                # coincident with the anchor: nothing to propagate
                out.append(RangeMeasurement(float(t), a.id, 0.0))
                continue
            rng = np.random.default_rng(link_seed(rng_seed, k, a.id))
            delays, mags, _ = _draw_taps(d, a.los, params, rng)
            toa = float(delays[int(np.argmax(mags))])
            out.append(RangeMeasurement(float(t), a.id, range_from_toa(toa, params.delay_resolution)))
    return out
