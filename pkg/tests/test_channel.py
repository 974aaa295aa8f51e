import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uwbfusion.channel import (
    NS,
    SPEED_OF_LIGHT,
    ChannelParams,
    ChannelRealization,
    MultipathTap,
    extract_toa,
    link_seed,
    range_from_toa,
    realize_channel,
    simulate_ranges,
)
from uwbfusion.core import Anchor, Trajectory
from uwbfusion.errors import ConfigurationError


def taps(*pairs):
    return ChannelRealization(tuple(MultipathTap(m, 0.0, d * NS) for m, d in pairs), los=True)


class TestRealizeChannel:
    def test_los_first_tap_at_direct_delay_and_strongest(self):
        params = ChannelParams(los_direct_power_boost=100)
        strongest = 0
        n = 1000
        for seed in range(n):
            ch = realize_channel(3.0, True, params, seed)
            assert ch.taps[0].delay == pytest.approx(3.0 / SPEED_OF_LIGHT)
            assert ch.taps[0].delay == pytest.approx(10.007 * NS, abs=1e-3 * NS)
            strongest += extract_toa(ch) == ch.taps[0].delay
        assert strongest / n >= 0.99

    def test_nlos_first_tap_late(self):
        for seed in range(200):
            ch = realize_channel(5.0, False, ChannelParams(), seed)
            assert ch.taps[0].delay > 5.0 / SPEED_OF_LIGHT

    def test_single_tap(self):
        ch = realize_channel(4.0, True, ChannelParams(num_taps_max=1), 0)
        assert len(ch.taps) == 1
        assert ch.taps[0].delay == 4.0 / SPEED_OF_LIGHT

    def test_invariants(self):
        ch = realize_channel(7.0, False, ChannelParams(), 11)
        d = ch.delays
        assert len(ch.taps) == 50
        assert np.all(np.diff(d) >= 0)
        assert np.all(ch.magnitudes >= 0)
        assert all(0 <= t.phase < 2 * math.pi for t in ch.taps)

    def test_mean_power_decays_with_excess_delay(self):
        params = ChannelParams()
        mags, exc = [], []
        for seed in range(400):
            ch = realize_channel(10.0, False, params, seed)
            mags.extend(ch.magnitudes[1:] ** 2)
            exc.extend(ch.delays[1:] - ch.delays[0])
        mags, exc = np.array(mags), np.array(exc)
        # regress log mean power per 5 ns bin against excess delay: slope -1/20ns
        bins = np.arange(0, 40, 5) * NS
        centers, logp = [], []
        for lo in bins:
            sel = (exc >= lo) & (exc < lo + 5 * NS)
            centers.append(np.mean(exc[sel]))
            logp.append(np.log(np.mean(mags[sel])))
        slope = np.polyfit(centers, logp, 1)[0]
        assert slope == pytest.approx(-1 / params.power_decay_const, rel=0.15)

    def test_nonpositive_distance(self):
        with pytest.raises(ValueError):
            realize_channel(0.0, True, ChannelParams(), 0)

    def test_params_validation(self):
        with pytest.raises(ConfigurationError):
            ChannelParams(tap_arrival_rate=0)
        with pytest.raises(ConfigurationError):
            ChannelParams(delay_resolution=-1)


class TestExtractToa:
    def test_max_magnitude(self):
        assert extract_toa(taps((0.2, 5), (0.9, 10), (0.5, 15))) == pytest.approx(10 * NS)

    def test_single(self):
        assert extract_toa(taps((1.0, 7))) == pytest.approx(7 * NS)

    def test_tie_goes_to_earliest(self):
        assert extract_toa(taps((0.9, 5), (0.9, 10))) == pytest.approx(5 * NS)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ChannelRealization((), los=True)

    @settings(max_examples=50)
    @given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 100)), min_size=1, max_size=20), st.randoms())
    def test_permutation_invariant(self, pairs, rnd):
        ref = extract_toa(taps(*pairs))
        shuffled = list(pairs)
        rnd.shuffle(shuffled)
        assert extract_toa(taps(*shuffled)) == ref


class TestRangeFromToa:
    def test_zero(self):
        assert range_from_toa(0.0, 0.0) == 0.0

    def test_inverse(self):
        # 3 m / c = 10.00692 ns
        assert range_from_toa(10.007 * NS, 0.0) == pytest.approx(3.0, abs=1e-4)

    def test_on_grid(self):
        assert range_from_toa(10 * NS, 2 * NS) == pytest.approx(2.99792, abs=1e-5)

    def test_quantizes(self):
        assert range_from_toa(10.9 * NS, 2 * NS) == pytest.approx(SPEED_OF_LIGHT * 10 * NS)
        assert range_from_toa(11.1 * NS, 2 * NS) == pytest.approx(SPEED_OF_LIGHT * 12 * NS)

    def test_negative(self):
        with pytest.raises(ValueError):
            range_from_toa(-1e-9)


def straight(seconds, speed=0.3, rate=10.0, y=0.0):
    t = np.arange(int(seconds * rate) + 1) / rate
    return Trajectory(t, speed * t, np.full_like(t, y), np.zeros_like(t))


ANCHORS = [Anchor(i, x, y, i % 2 == 0) for i, (x, y) in enumerate(
    [(-3, 2), (5, -4), (9, 3), (1, 6), (12, -1), (-2, -5), (6, 8), (14, 4), (3, -2), (8, -6)])]


class TestSimulateRanges:
    def test_count(self):
        out = simulate_ranges(straight(10), ANCHORS, 2.0, ChannelParams(), 0)
        assert len(out) == 210
        assert out[0].t == 0.0 and out[-1].t == pytest.approx(10.0)

    def test_noiseless_channel(self):
        los = [Anchor(a.id, a.x, a.y, True) for a in ANCHORS]
        params = ChannelParams(num_taps_max=1, delay_resolution=2 * NS)
        tr = straight(10)
        for m in simulate_ranges(tr, los, 2.0, params, 4):
            a = los[m.anchor_id]
            true = math.hypot(0.3 * m.t - a.x, a.y)
            assert abs(m.distance - true) <= SPEED_OF_LIGHT * NS + 1e-9

    def test_nlos_bias_positive(self):
        nlos = [Anchor(a.id, a.x, a.y, False) for a in ANCHORS]
        out = simulate_ranges(straight(10), nlos, 2.0, ChannelParams(), 2)
        err = [m.distance - math.hypot(0.3 * m.t - nlos[m.anchor_id].x, nlos[m.anchor_id].y) for m in out]
        assert np.mean(err) > 0

    def test_matches_realize_then_extract(self):
        tr = straight(2)
        params = ChannelParams()
        out = simulate_ranges(tr, ANCHORS[:3], 2.0, params, 99)
        for k, t in enumerate([0.0, 0.5, 1.0, 1.5, 2.0]):
            for j, a in enumerate(ANCHORS[:3]):
                d = math.hypot(0.3 * t - a.x, a.y)
                ch = realize_channel(d, a.los, params, link_seed(99, k, a.id))
                assert out[3 * k + j].distance == range_from_toa(extract_toa(ch), params.delay_resolution)

    def test_deterministic_and_seed_sensitive(self):
        a = simulate_ranges(straight(5), ANCHORS, 2.0, ChannelParams(), 5)
        b = simulate_ranges(straight(5), ANCHORS, 2.0, ChannelParams(), 5)
        c = simulate_ranges(straight(5), ANCHORS, 2.0, ChannelParams(), 6)
        assert a == b
        assert [m.distance for m in a] != [m.distance for m in c]

    def test_order_independent(self):
        fwd = simulate_ranges(straight(5), ANCHORS, 2.0, ChannelParams(), 5)
        rev = simulate_ranges(straight(5), ANCHORS[::-1], 2.0, ChannelParams(), 5)
        key = lambda m: (m.t, m.anchor_id)
        assert sorted(fwd, key=key) == sorted(rev, key=key)

    def test_translation_invariant(self):
        dx, dy = 17.0, -4.0
        moved = [Anchor(a.id, a.x + dx, a.y + dy, a.los) for a in ANCHORS]
        a = simulate_ranges(straight(5), ANCHORS, 2.0, ChannelParams(delay_resolution=0), 8)
        b = simulate_ranges(straight(5).translated(dx, dy), moved, 2.0, ChannelParams(delay_resolution=0), 8)
        np.testing.assert_allclose([m.distance for m in a], [m.distance for m in b], atol=1e-9)

    def test_no_anchors(self):
        with pytest.raises(ConfigurationError):
            simulate_ranges(straight(1), [], 2.0, ChannelParams(), 0)
