"""Ground-truth integration and sensor synthesis.

The underlying true motion is the solution of the kinematics driven by
the analytic body rate and specific force held constant over each IMU
sampling interval (zero-order hold, sampled at the interval midpoint).
That makes the truth exactly representable by the same closed-form
propagator the filter uses, so a noise-free filter started at the truth
tracks it to machine precision, and the constant-input degenerate cases
are constant exactly, not just approximately.

Camera frames are formed from the true state at the formation time and
stamped with the formation time minus the true time offset, i.e. the
observation stream obeys y(t) = h(x(t + t_d)).
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .rotations import gamma1, gamma2, quat_from_rotvec, quat_multiply, rot_from_quat
from .scenarios import SimScenario
from .trajectory import GRAVITY, Trajectory, generate_trajectory

G_W = np.array([0.0, 0.0, -GRAVITY])

# camera <- body: optical axis along body x pitched 25 degrees down
_PITCH = np.deg2rad(25.0)
R_BC_TRUE = np.array([
    [0.0, -np.sin(_PITCH), np.cos(_PITCH)],
    [-1.0, 0.0, 0.0],
    [0.0, -np.cos(_PITCH), -np.sin(_PITCH)],
])
P_BC_TRUE = np.array([0.08, -0.03, 0.05])


class NoVisibleLandmarksError(Exception):
    def __init__(self, frame_index: int):
        super().__init__(f"no visible landmarks in frame {frame_index}")
        self.frame_index = frame_index


@dataclass
class ImuSample:
    t: float            # start of the hold interval
    gyro: np.ndarray    # measured rate (bias + noise included)
    accel: np.ndarray   # measured specific force


@dataclass
class CameraFrame:
    index: int
    stamp: float                      # camera-clock timestamp
    formation_time: float             # IMU-clock time the image was taken
    observations: dict[int, np.ndarray]   # landmark id -> normalized (2,)


@dataclass
class TrueState:
    t: float
    q: np.ndarray
    p: np.ndarray
    v: np.ndarray


def propagate_zoh(q, p, v, omega, force, dt):
    """Exact state propagation under constant body rate/specific force."""
    phi = omega * dt
    R = rot_from_quat(q)
    g1 = gamma1(phi)
    g2 = gamma2(phi)
    q_new = quat_multiply(q, quat_from_rotvec(phi))
    v_new = v + G_W * dt + R @ (g1 @ force) * dt
    p_new = p + v * dt + 0.5 * G_W * dt * dt + R @ (g2 @ force) * (0.5 * dt * dt)
    return q_new, p_new, v_new


class TruthProvider:
    """True states on the IMU grid plus exact in-interval interpolation."""

    def __init__(self, trajectory: Trajectory, duration: float, imu_rate: int):
        self.dt = 1.0 / imu_rate
        n = int(round(duration * imu_rate))
        self.times = np.arange(n + 1) * self.dt
        s0 = trajectory.sample(0.0)
        from .rotations import quat_from_rot

        self.omega = np.empty((n, 3))
        self.force = np.empty((n, 3))
        qs = np.empty((n + 1, 4))
        ps = np.empty((n + 1, 3))
        vs = np.empty((n + 1, 3))
        qs[0] = quat_from_rot(s0.R)
        ps[0] = s0.p
        vs[0] = s0.v
        for k in range(n):
            mid = trajectory.sample((k + 0.5) * self.dt)
            self.omega[k] = mid.omega
            self.force[k] = mid.specific_force_body()
            qs[k + 1], ps[k + 1], vs[k + 1] = propagate_zoh(
                qs[k], ps[k], vs[k], self.omega[k], self.force[k], self.dt)
        self.q = qs
        self.p = ps
        self.v = vs

    def state_at(self, t: float) -> TrueState:
        k = min(max(int(np.floor(t / self.dt + 1e-9)), 0), len(self.omega) - 1)
        tau = t - self.times[k]
        q, p, v = self.q[k], self.p[k], self.v[k]
        if tau > 1e-12:
            q, p, v = propagate_zoh(q, p, v, self.omega[k], self.force[k], tau)
        return TrueState(t=t, q=q, p=p, v=v)


@dataclass
class MeasurementStream:
    scenario: SimScenario
    truth: TruthProvider
    imu: list[ImuSample]
    frames: list[CameraFrame]
    landmarks: np.ndarray          # (M, 3) world positions
    gyro_bias: np.ndarray
    accel_bias: np.ndarray
    time_offset: float
    R_BC: np.ndarray
    p_BC: np.ndarray


def _generate_landmarks(scenario: SimScenario, trajectory: Trajectory,
                        rng: np.random.Generator) -> np.ndarray:
    """Scatter landmarks in a body-frame tube along the trajectory so the
    (forward, pitched-down) camera always has features in view."""
    n = scenario.n_landmarks
    ts = rng.uniform(0.0, scenario.duration, size=n)
    fwd = rng.uniform(*scenario.landmark_forward, size=n)
    lat = rng.uniform(*scenario.landmark_lateral, size=n)
    vert = rng.uniform(*scenario.landmark_vertical, size=n)
    pts = np.empty((n, 3))
    for i in range(n):
        s = trajectory.sample(float(ts[i]))
        pts[i] = s.p + s.R @ np.array([fwd[i], lat[i], vert[i]])
    return pts


def project_landmark(p_W: np.ndarray, q_WB: np.ndarray, p_WB: np.ndarray,
                     R_BC: np.ndarray, p_BC: np.ndarray) -> np.ndarray | None:
    """Normalized image coordinates, or None if behind the camera."""
    R_WB = rot_from_quat(q_WB)
    p_B = R_WB.T @ (p_W - p_WB)
    p_C = R_BC.T @ (p_B - p_BC)
    if p_C[2] <= 1e-6:
        return None
    return p_C[:2] / p_C[2], p_C[2]


def synthesize_measurements(scenario: SimScenario,
                            seed: int) -> MeasurementStream:
    """Build the full IMU + camera stream for one run."""
    rng = np.random.default_rng(seed)
    trajectory = generate_trajectory(scenario.kind, **scenario.traj_params)
    truth = TruthProvider(trajectory, scenario.duration, scenario.imu_rate)

    gyro_bias = rng.normal(0.0, scenario.gyro_bias_sigma, 3)
    accel_bias = rng.normal(0.0, scenario.accel_bias_sigma, 3)
    if scenario.time_offset is not None:
        time_offset = scenario.time_offset
    else:
        time_offset = float(rng.normal(0.0, scenario.time_offset_sigma))
    landmarks = _generate_landmarks(scenario, trajectory, rng)

    n = len(truth.omega)
    gyro_sigma = scenario.gyro_noise_density * np.sqrt(scenario.imu_rate)
    accel_sigma = scenario.accel_noise_density * np.sqrt(scenario.imu_rate)
    gyro_noise = rng.normal(0.0, 1.0, (n, 3)) * gyro_sigma
    accel_noise = rng.normal(0.0, 1.0, (n, 3)) * accel_sigma
    imu = [ImuSample(t=truth.times[k],
                     gyro=truth.omega[k] + gyro_bias + gyro_noise[k],
                     accel=truth.force[k] + accel_bias + accel_noise[k])
           for k in range(n)]

    frames: list[CameraFrame] = []
    cam_period = 1.0 / scenario.cam_rate
    margin = 0.25
    t_form = margin
    index = 0
    while t_form <= scenario.duration - margin:
        state = truth.state_at(t_form)
        obs: dict[int, np.ndarray] = {}
        for lid in range(len(landmarks)):
            proj = project_landmark(landmarks[lid], state.q, state.p,
                                    R_BC_TRUE, P_BC_TRUE)
            if proj is None:
                continue
            gam, depth = proj
            if depth < scenario.cam_depth_min or depth > scenario.cam_depth_max:
                continue
            if max(abs(gam[0]), abs(gam[1])) > scenario.cam_fov_tan:
                continue
            obs[lid] = gam + rng.normal(0.0, scenario.pixel_noise, 2)
        if len(obs) < scenario.min_visible:
            raise NoVisibleLandmarksError(index)
        frames.append(CameraFrame(index=index, stamp=t_form - time_offset,
                                  formation_time=t_form, observations=obs))
        index += 1
        t_form += cam_period

    return MeasurementStream(
        scenario=scenario, truth=truth, imu=imu, frames=frames,
        landmarks=landmarks, gyro_bias=gyro_bias, accel_bias=accel_bias,
        time_offset=time_offset, R_BC=R_BC_TRUE.copy(), p_BC=P_BC_TRUE.copy(),
    )
