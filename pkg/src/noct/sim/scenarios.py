"""Simulation scenario configuration and presets."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .trajectory import TRAJECTORY_KINDS, UnknownKindError


@dataclass(frozen=True)
class SimScenario:
    name: str
    kind: str                       # trajectory kind
    duration: float = 60.0          # seconds
    imu_rate: int = 400             # Hz
    cam_rate: int = 10              # Hz
    traj_params: dict = field(default_factory=dict)

    n_landmarks: int = 400
    landmark_forward: tuple[float, float] = (2.0, 14.0)
    landmark_lateral: tuple[float, float] = (-7.0, 7.0)
    landmark_vertical: tuple[float, float] = (-5.0, 3.0)

    gyro_noise_density: float = 1.7e-4      # rad/s/sqrt(Hz)
    accel_noise_density: float = 2.0e-3     # m/s^2/sqrt(Hz)
    pixel_noise: float = 1.5 / 460.0        # normalized image units
    gyro_bias_sigma: float = 0.01           # true constant bias draw
    accel_bias_sigma: float = 0.05

    time_offset_sigma: float = 0.05         # true offset ~ N(0, sigma)
    time_offset: float | None = None        # fixed value overrides the draw

    estimate_extrinsics: bool = True
    estimate_time_offset: bool = True

    cam_fov_tan: float = 1.3                # |gamma| visibility bound
    cam_depth_min: float = 0.4
    cam_depth_max: float = 45.0
    min_visible: int = 4

    max_state_landmarks: int = 22
    min_parallax_deg: float = 1.5

    def __post_init__(self):
        if self.kind not in TRAJECTORY_KINDS:
            raise UnknownKindError(f"unknown trajectory kind '{self.kind}'")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.imu_rate % self.cam_rate != 0:
            raise ValueError("imu_rate must be an integer multiple of cam_rate")


SCENARIOS: dict[str, SimScenario] = {
    "slope_line": SimScenario(name="slope_line", kind="SlopeLine"),
    "slope_lemniscate": SimScenario(name="slope_lemniscate", kind="SlopeLemniscate"),
    "slope_circle": SimScenario(name="slope_circle", kind="SlopeCircle"),
    "case_a": SimScenario(name="case_a", kind="CircleConstVel",
                          duration=45.0, estimate_extrinsics=False),
    "case_b": SimScenario(name="case_b", kind="CylinderConstAccel",
                          duration=45.0, estimate_extrinsics=False),
    "case_c": SimScenario(name="case_c", kind="CircleVaryingRate",
                          duration=45.0, estimate_extrinsics=False),
    "case_d": SimScenario(name="case_d", kind="CylinderVaryingAccel",
                          duration=45.0, estimate_extrinsics=False),
    "general_3d": SimScenario(name="general_3d", kind="General3D"),
}

SCENARIO_NAMES = tuple(SCENARIOS)


def get_scenario(name: str, **overrides) -> SimScenario:
    try:
        base = SCENARIOS[name]
    except KeyError:
        raise UnknownKindError(
            f"unknown scenario '{name}'; expected one of {SCENARIO_NAMES}") from None
    return replace(base, **overrides) if overrides else base
