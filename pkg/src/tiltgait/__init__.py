"""Fixed-gait tiltrotor dynamics, attitude-altitude feedback linearization
and gait invertibility analysis."""

from tiltgait.vehicle import (
    VehicleParams,
    Gait,
    hat,
    rotation_matrix,
    euler_from_matrix,
    thrust_map,
    torque_map,
    signed_square,
    translational_accel,
    angular_accel,
    hover_speed,
)
from tiltgait.linearization import (
    DecouplingMatrix,
    SingularDecoupling,
    build_decoupling,
    invert_allocate,
    output_second_derivative,
)
from tiltgait.controller import ControlGains, Reference, attitude_command, altitude_command
from tiltgait.simulator import (
    VehicleState,
    SimConfig,
    Thresholds,
    Telemetry,
    GaitClassification,
    Verdict,
    Reason,
    derivative,
    step,
    run,
    classify,
)

__version__ = "0.1.0"
