# # Dead reckoning drift
#
# A cart standing still should stay put. Feed the dead-reckoning integrator
# an accelerometer that is slightly wrong and watch the position walk away.

import numpy as np

from uwbfusion import ImuNoiseModel, KinematicState, Trajectory, dead_reckon, drift_bound, simulate_imu

rate, seconds = 5.0, 50.0
t = np.arange(int(rate * seconds) + 1) / rate
static = Trajectory(t, np.zeros_like(t), np.zeros_like(t), np.zeros_like(t))

# ## A constant accelerometer error
#
# An error N that is the same at every sample integrates twice into N t^2 / 2.

n_err = 0.01
samples = simulate_imu(static, ImuNoiseModel(accel_bias_std=n_err), rate, rate, rng_seed=0)
track = dead_reckon(KinematicState(), samples)
err = np.hypot(track.x, track.y)
print(f"error after {seconds:.0f} s: {err[-1]:.2f} m")
print(f"the per-run error here is one draw of N(0, {n_err}) per axis, so compare shape, not value")

# ## Growth exponent
#
# Average the squared error over many seeds and fit a line in log-log space.
# A constant error gives slope 2; fresh white noise every sample gives 1.5,
# because white acceleration noise makes velocity a random walk.

def slope(model, seeds=100):
    sq = np.zeros_like(t)
    for s in range(seeds):
        tr = dead_reckon(KinematicState(), simulate_imu(static, model, rate, rate, rng_seed=s))
        sq += tr.x**2 + tr.y**2
    sel = t >= 5
    return np.polyfit(np.log(t[sel]), np.log(np.sqrt(sq[sel] / seeds)), 1)[0]

print("constant error slope:", round(slope(ImuNoiseModel(accel_bias_std=0.01)), 3))
print("white noise slope:   ", round(slope(ImuNoiseModel(accel_noise_std=0.01)), 3))

# ## Gyro bias
#
# A bias of 0.01 rad/s turns the heading by exactly 0.1 rad in 10 s.

short = Trajectory(t[:51], np.zeros(51), np.zeros(51), np.zeros(51))
heading = dead_reckon(KinematicState(), simulate_imu(short, ImuNoiseModel(gyro_bias=0.01), rate, rate)).theta
print(f"heading after 10 s: {heading[-1]:.4f} rad")
print("closed-form bound for N = 0.01 at 10 s:", drift_bound(0.01, 10.0), "m")
