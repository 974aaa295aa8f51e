"""Hybrid UWB/inertial indoor localization with a constant-gain Kalman filter."""

from .channel import (
    SPEED_OF_LIGHT,
    ChannelParams,
    ChannelRealization,
    MultipathTap,
    extract_toa,
    range_from_toa,
    realize_channel,
    simulate_ranges,
)
from .core import (
    Anchor,
    ImuSample,
    KinematicState,
    RangeMeasurement,
    TimedPose,
    Trajectory,
    interpolate,
    path_length,
    wrap_angle,
)
from .dataio import (
    bucket_epochs,
    emit,
    ingest,
)
from .fusion import (
    FilterConfig,
    FilterGain,
    FilterState,
    classical_kf_step,
    compute_steady_state_gain,
    run_fusion,
    sskf_predict,
    sskf_update,
)
from .imu import (
    ImuNoiseModel,
    dead_reckon,
    dead_reckon_step,
    drift_bound,
    kinematic_rollout,
    rotate_body_to_global,
    simulate_imu,
)
from .localization import (
    BoundingBox,
    min_max,
    multilateration_ls,
)
from .scenario import (
    EvalReport,
    ScenarioSpec,
    calibrate_filter,
    default_spec,
    evaluate,
    generate_path,
    run_monte_carlo,
)

__version__ = "0.1.0"

__all__ = [
    "SPEED_OF_LIGHT",
    "ChannelParams",
    "ChannelRealization",
    "MultipathTap",
    "extract_toa",
    "range_from_toa",
    "realize_channel",
    "simulate_ranges",
    "Anchor",
    "ImuSample",
    "KinematicState",
    "RangeMeasurement",
    "TimedPose",
    "Trajectory",
    "interpolate",
    "path_length",
    "wrap_angle",
    "bucket_epochs",
    "emit",
    "ingest",
    "FilterConfig",
    "FilterGain",
    "FilterState",
    "classical_kf_step",
    "compute_steady_state_gain",
    "run_fusion",
    "sskf_predict",
    "sskf_update",
    "ImuNoiseModel",
    "dead_reckon",
    "dead_reckon_step",
    "drift_bound",
    "kinematic_rollout",
    "rotate_body_to_global",
    "simulate_imu",
    "BoundingBox",
    "min_max",
    "multilateration_ls",
    "EvalReport",
    "ScenarioSpec",
    "calibrate_filter",
    "default_spec",
    "evaluate",
    "generate_path",
    "run_monte_carlo",
]
