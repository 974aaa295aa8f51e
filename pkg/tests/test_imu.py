import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uwbfusion.core import ImuSample, KinematicState, Trajectory, path_length
from uwbfusion.errors import ConfigurationError, EmptyInputError, OrderingError
from uwbfusion.imu import (
    ImuNoiseModel,
    dead_reckon,
    dead_reckon_step,
    drift_bound,
    kinematic_rollout,
    rotate_body_to_global,
    simulate_imu,
)


class TestRotation:
    @pytest.mark.parametrize(
        "phi, expected",
        [(0.0, (1, 0)), (math.pi / 2, (0, 1)), (math.pi / 4, (0.70711, 0.70711))],
    )
    def test_examples(self, phi, expected):
        np.testing.assert_allclose(rotate_body_to_global((1, 0), phi), expected, atol=1e-5)

    @given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-10, 10), st.floats(-10, 10))
    def test_norm_and_composition(self, ux, uy, a, b):
        u = np.array([ux, uy])
        ra = rotate_body_to_global(u, a)
        assert np.linalg.norm(ra) == pytest.approx(np.linalg.norm(u), abs=1e-12 * max(1, np.linalg.norm(u)))
        np.testing.assert_allclose(
            rotate_body_to_global(rotate_body_to_global(u, b), a),
            rotate_body_to_global(u, a + b),
            atol=1e-9 * max(1.0, np.linalg.norm(u)),
        )


class TestDeadReckonStep:
    def test_at_rest(self):
        s = KinematicState(x=1, y=2, theta=0.3)
        out = dead_reckon_step(s, ImuSample(0, 0, 0, 0), 0.7)
        assert out == s

    def test_five_steps_match_closed_form(self):
        # hand sum: x = sum(0.2*v_k + 0.02) with v_k = 0, .2, .4, .6, .8 -> 0.5
        s = KinematicState()
        for _ in range(5):
            s = dead_reckon_step(s, ImuSample(0, 1.0, 0.0, 0.0), 0.2)
        assert s.x == pytest.approx(0.5, abs=1e-12)
        assert s.vx == pytest.approx(1.0, abs=1e-12)

    def test_rotation_to_global(self):
        s = dead_reckon_step(KinematicState(theta=math.pi / 2), ImuSample(0, 1, 0, 0), 1.0)
        assert (s.x, s.y) == pytest.approx((0.0, 0.5), abs=1e-12)

    def test_heading_uses_sample_rate(self):
        s = dead_reckon_step(KinematicState(theta=0.1), ImuSample(0, 0, 0, 0.5), 0.2)
        assert s.theta == pytest.approx(0.2)
        assert s.omega == 0.5

    @pytest.mark.parametrize("dt", [0.0, -0.1])
    def test_bad_dt(self, dt):
        with pytest.raises(ValueError):
            dead_reckon_step(KinematicState(), ImuSample(0, 0, 0, 0), dt)


class TestDeadReckon:
    def test_empty_stream(self):
        tr = dead_reckon(KinematicState(x=3, y=4), [])
        assert len(tr) == 1 and (tr[0].x, tr[0].y) == (3, 4)

    def test_constant_velocity(self):
        samples = [ImuSample(0.2 * k, 0, 0, 0) for k in range(51)]
        tr = dead_reckon(KinematicState(vx=0.29), samples)
        assert len(tr) == 51
        assert tr.t[-1] == pytest.approx(10.0)
        assert path_length(tr) == pytest.approx(2.9, abs=1e-12)
        assert np.allclose(tr.y, 0)

    def test_non_monotonic(self):
        with pytest.raises(OrderingError):
            dead_reckon(KinematicState(), [ImuSample(0, 0, 0, 0), ImuSample(0, 0, 0, 0)])

    @settings(max_examples=30)
    @given(st.integers(0, 2**32 - 1))
    def test_inverts_rollout(self, seed):
        rng = np.random.default_rng(seed)
        n = 60
        init = KinematicState(x=1.0, y=-2.0, vx=0.2, vy=0.1, theta=rng.uniform(-3, 3))
        samples, truth = kinematic_rollout(init, 0.0, 0.2, rng.normal(0, 0.3, (n, 2)), rng.normal(0, 0.4, n))
        est = dead_reckon(init, samples)
        assert np.max(np.hypot(est.x - truth.x, est.y - truth.y)) <= 1e-9


class TestDriftBound:
    @pytest.mark.parametrize("n, t, e", [(0.01, 10, 0.5), (0.0, 33, 0.0), (0.02, 60, 36.0)])
    def test_examples(self, n, t, e):
        assert drift_bound(n, t) == pytest.approx(e)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            drift_bound(0.01, -1)

    def test_matches_dead_reckoning_of_constant_error(self):
        # a constant accelerometer error N integrates to exactly N t^2 / 2 at tick times
        samples = [ImuSample(0.2 * k, 0.01, 0.0, 0.0) for k in range(51)]
        tr = dead_reckon(KinematicState(), samples)
        assert tr.x[-1] == pytest.approx(drift_bound(0.01, 10.0), rel=1e-12)


def static_truth(seconds, rate=50.0):
    n = int(seconds * rate) + 1
    t = np.arange(n) / rate
    return Trajectory(t, np.zeros(n), np.zeros(n), np.zeros(n))


def circle_truth(seconds, rate=100.0, radius=2.0, speed=0.5):
    t = np.arange(int(seconds * rate) + 1) / rate
    ang = speed * t / radius
    return Trajectory(t, radius * np.sin(ang), radius * (1 - np.cos(ang)), ang)


class TestSimulateImu:
    def test_noise_model_validation(self):
        with pytest.raises(ConfigurationError):
            ImuNoiseModel(accel_snr_db=60.0, accel_noise_std=0.1)
        with pytest.raises(ConfigurationError):
            ImuNoiseModel(accel_noise_std=-1.0)

    def test_static_noiseless(self):
        out = simulate_imu(static_truth(5), ImuNoiseModel(), 50, 5, rng_seed=1)
        assert len(out) == 26
        assert all((s.ax_body, s.ay_body, s.omega_z) == (0, 0, 0) for s in out)

    def test_gyro_bias_drift(self):
        out = simulate_imu(static_truth(10), ImuNoiseModel(gyro_bias=0.01), 50, 5, rng_seed=1)
        tr = dead_reckon(KinematicState(), out)
        assert tr.theta[-1] == pytest.approx(0.1, abs=1e-12)

    def test_rates_must_be_integer_ratio(self):
        with pytest.raises(ConfigurationError):
            simulate_imu(static_truth(1), ImuNoiseModel(), 50, 3)
        with pytest.raises(ConfigurationError):
            simulate_imu(static_truth(1), ImuNoiseModel(), 5, 50)

    def test_short_truth(self):
        with pytest.raises(EmptyInputError):
            simulate_imu(static_truth(0.02), ImuNoiseModel(), 50, 50)

    def test_snr_with_zero_signal_is_config_error(self):
        with pytest.raises(ConfigurationError):
            simulate_imu(static_truth(1), ImuNoiseModel.from_snr(60), 50, 5)

    def test_recovers_circular_motion(self):
        out = simulate_imu(circle_truth(10), ImuNoiseModel(), 100, 100)
        # interior samples: centripetal v^2/R = 0.125 laterally, yaw rate v/R = 0.25
        mid = out[10:-10]
        assert np.allclose([s.ax_body for s in mid], 0.0, atol=1e-4)
        assert np.allclose([s.ay_body for s in mid], 0.125, atol=1e-4)
        assert np.allclose([s.omega_z for s in mid], 0.25, atol=1e-9)

    def test_snr_definition(self):
        truth = circle_truth(200)
        clean = simulate_imu(truth, ImuNoiseModel(), 100, 100)
        noisy = simulate_imu(truth, ImuNoiseModel.from_snr(60.0), 100, 100, rng_seed=7)
        a = np.array([[s.ax_body, s.ay_body] for s in clean])
        b = np.array([[s.ax_body, s.ay_body] for s in noisy])
        ratio = np.mean((b - a) ** 2) / np.mean(a**2)
        assert ratio == pytest.approx(1e-6, rel=0.1)

    def test_seeded(self):
        m = ImuNoiseModel(accel_noise_std=0.1, gyro_noise_std=0.01)
        assert simulate_imu(static_truth(2), m, 50, 5, 3) == simulate_imu(static_truth(2), m, 50, 5, 3)
        assert simulate_imu(static_truth(2), m, 50, 5, 3) != simulate_imu(static_truth(2), m, 50, 5, 4)


def _drift_slope(model, seeds=120, rate=5.0):
    truth = static_truth(50, rate=rate)
    errs = []
    for s in range(seeds):
        tr = dead_reckon(KinematicState(), simulate_imu(truth, model, rate, rate, rng_seed=s))
        errs.append(np.hypot(tr.x, tr.y))
    rms = np.sqrt(np.mean(np.square(errs), axis=0))
    sel = tr.t >= 5.0
    return np.polyfit(np.log(tr.t[sel]), np.log(rms[sel]), 1)[0]


def test_white_accel_noise_grows_as_t_to_1p5():
    # double-integrated white noise is a random walk in velocity: position std ~ t**1.5
    slope = _drift_slope(ImuNoiseModel(accel_noise_std=0.01))
    assert slope == pytest.approx(1.5, abs=0.1)


def test_constant_accel_error_grows_as_t_squared():
    slope = _drift_slope(ImuNoiseModel(accel_noise_std=0.0, accel_bias_std=0.01))
    assert slope == pytest.approx(2.0, abs=1e-6)
