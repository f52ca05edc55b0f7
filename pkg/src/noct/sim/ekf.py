"""Error-state EKF with landmarks in the state (SLAM-style), online
camera-IMU extrinsic calibration and online time-offset calibration.

Estimated variables: body pose and velocity in the world frame, constant
IMU biases, optionally the camera-IMU extrinsics, the camera-IMU time
offset, and a capped set of world landmarks initialized by two-view
triangulation.  The mean is propagated with the exact zero-order-hold
closed form (matching the simulator's truth model), the error-state
covariance with the standard first-order transition.

The time offset enters each camera update through a first-order
correction: the filter propagates to stamp + estimated offset and the
residual Jacobian w.r.t. the offset is the predicted feature velocity in
normalized image coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measurements import MeasurementStream, propagate_zoh
from .rotations import (
    gamma1,
    gamma2,
    quat_conj,
    quat_from_rot,
    quat_from_rotvec,
    quat_multiply,
    quat_normalize,
    rot_from_quat,
    rotvec_from_quat,
    skew,
)

CHI2_GATE_2DOF = 13.816   # 0.999 quantile


class SingularUpdateError(Exception):
    pass


class FilterDivergedError(Exception):
    def __init__(self, t: float, nees: float):
        super().__init__(f"filter diverged at t={t:.2f}s (NEES {nees:.1f})")
        self.t = t
        self.nees = nees


@dataclass
class FilterConfig:
    estimate_extrinsics: bool = True
    sigma_theta: float = 0.015
    sigma_yaw: float = 0.02
    sigma_p: float = 0.03
    sigma_v: float = 0.08
    sigma_bg: float = 0.02
    sigma_ba: float = 0.12
    sigma_ext_theta: float = 0.02
    sigma_ext_p: float = 0.08
    sigma_td: float = 0.06
    gyro_noise_density: float = 1.7e-4
    accel_noise_density: float = 2.0e-3
    pixel_noise: float = 1.5 / 460.0
    max_landmarks: int = 22
    min_parallax_deg: float = 2.5
    min_candidate_age: float = 0.3
    max_inits_per_frame: int = 8
    depth_sigma_frac: float = 0.1
    landmark_stale_s: float = 20.0
    gate_soft_factor: float = 9.0
    nees_hard_cap: float = 2000.0
    divergence_patience: int = 5


@dataclass
class EpochRecord:
    t: float
    errors: dict[str, np.ndarray]
    sigmas3: dict[str, np.ndarray]
    n_landmarks: int
    innovation_max: float
    nees_pose: float


class ErrorStateEkf:
    """One filter instance bound to one measurement stream."""

    TH = slice(0, 3)
    P_ = slice(3, 6)
    V_ = slice(6, 9)
    BG = slice(9, 12)
    BA = slice(12, 15)

    def __init__(self, stream: MeasurementStream, config: FilterConfig,
                 rng: np.random.Generator, perfect_init: bool = False):
        self.stream = stream
        self.cfg = config
        truth = stream.truth

        self.with_ext = config.estimate_extrinsics
        self.ETH = slice(15, 18) if self.with_ext else None
        self.EP = slice(18, 21) if self.with_ext else None
        self.TD = 21 if self.with_ext else 15
        self.lm_base = self.TD + 1

        s0 = truth.state_at(stream.frames[0].formation_time if stream.frames
                            else 0.0)
        cfg = config
        prior = [cfg.sigma_theta, cfg.sigma_theta, cfg.sigma_yaw,
                 cfg.sigma_p, cfg.sigma_p, cfg.sigma_p,
                 cfg.sigma_v, cfg.sigma_v, cfg.sigma_v,
                 cfg.sigma_bg, cfg.sigma_bg, cfg.sigma_bg,
                 cfg.sigma_ba, cfg.sigma_ba, cfg.sigma_ba]
        if self.with_ext:
            prior += [cfg.sigma_ext_theta] * 3 + [cfg.sigma_ext_p] * 3
        prior += [cfg.sigma_td]
        self.P = np.diag(np.square(prior))

        # nominal state; bias estimates start at zero (truth drawn around it)
        if perfect_init:
            self.q = truth.q[0].copy()
            self.p = truth.p[0].copy()
            self.v = truth.v[0].copy()
            self.bg = stream.gyro_bias.copy()
            self.ba = stream.accel_bias.copy()
            self.q_bc = quat_from_rot(stream.R_BC)
            self.p_bc = stream.p_BC.copy()
            self.td = stream.time_offset
        else:
            scale = 0.8
            dth = rng.normal(0.0, scale * np.array(
                [cfg.sigma_theta, cfg.sigma_theta, cfg.sigma_yaw]))
            self.q = quat_normalize(quat_multiply(truth.q[0], quat_from_rotvec(dth)))
            self.p = truth.p[0] + rng.normal(0.0, scale * cfg.sigma_p, 3)
            self.v = truth.v[0] + rng.normal(0.0, scale * cfg.sigma_v, 3)
            self.bg = np.zeros(3)
            self.ba = np.zeros(3)
            if self.with_ext:
                dth_e = rng.normal(0.0, scale * cfg.sigma_ext_theta, 3)
                self.q_bc = quat_normalize(quat_multiply(
                    quat_from_rot(stream.R_BC), quat_from_rotvec(dth_e)))
                self.p_bc = stream.p_BC + rng.normal(0.0, scale * cfg.sigma_ext_p, 3)
            else:
                self.q_bc = quat_from_rot(stream.R_BC)
                self.p_bc = stream.p_BC.copy()
            self.td = 0.0

        self.t = 0.0
        self._imu_idx = 0
        self.lm_ids: list[int] = []
        self.lm_y: dict[int, np.ndarray] = {}
        self.lm_anchor: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self.lm_seen: dict[int, float] = {}
        self._candidates: dict[int, tuple] = {}
        self.diverge_count = 0
        self.records: list[EpochRecord] = []

    # -- propagation -------------------------------------------------------

    def _dim(self) -> int:
        return self.lm_base + 3 * len(self.lm_ids)

    def propagate_to(self, t_target: float) -> None:
        imu = self.stream.imu
        dt_nom = self.stream.truth.dt
        phi_acc = np.eye(15)
        q_acc = np.zeros((15, 15))
        sg2 = self.cfg.gyro_noise_density ** 2
        sa2 = self.cfg.accel_noise_density ** 2
        while self.t < t_target - 1e-12:
            k = min(self._imu_idx, len(imu) - 1)
            seg_end = imu[k].t + dt_nom
            dt = min(seg_end, t_target) - self.t
            if dt <= 1e-12:
                self._imu_idx += 1
                continue
            w = imu[k].gyro - self.bg
            f = imu[k].accel - self.ba
            R = rot_from_quat(self.q)
            phi = w * dt
            g1 = gamma1(phi) @ f * dt
            g2 = gamma2(phi) @ f * (0.5 * dt * dt)

            self.q, self.p, self.v = propagate_zoh(self.q, self.p, self.v, w, f, dt)

            F = np.eye(15)
            R_step = rot_from_quat(quat_from_rotvec(phi))
            F[self.TH, self.TH] = R_step.T
            F[self.TH, self.BG] = -np.eye(3) * dt
            F[self.V_, self.TH] = -R @ skew(g1)
            F[self.V_, self.BA] = -R * dt
            F[self.P_, self.TH] = -R @ skew(g2)
            F[self.P_, self.V_] = np.eye(3) * dt
            F[self.P_, self.BA] = -R * (0.5 * dt * dt)

            Q = np.zeros((15, 15))
            Q[self.TH, self.TH] = np.eye(3) * sg2 * dt
            Q[self.V_, self.V_] = np.eye(3) * sa2 * dt

            phi_acc = F @ phi_acc
            q_acc = F @ q_acc @ F.T + Q
            self.t += dt
            if self.t >= seg_end - 1e-12:
                self._imu_idx = k + 1

        n = self._dim()
        if n > 15:
            self.P[:15, :15] = phi_acc @ self.P[:15, :15] @ phi_acc.T + q_acc
            self.P[:15, 15:] = phi_acc @ self.P[:15, 15:]
            self.P[15:, :15] = self.P[:15, 15:].T
        else:
            self.P = phi_acc @ self.P @ phi_acc.T + q_acc
        self._symmetrize()

    def _symmetrize(self) -> None:
        self.P = 0.5 * (self.P + self.P.T)

    # -- camera update -----------------------------------------------------

    def _camera_pose(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        R_WB = rot_from_quat(self.q)
        R_BC = rot_from_quat(self.q_bc)
        R_WC = R_WB @ R_BC
        p_WC = self.p + R_WB @ self.p_bc
        return R_WC, p_WC, R_WB

    def _feature_velocity(self, p_B: np.ndarray, R_CB: np.ndarray, R_BW: np.ndarray,
                          Pi: np.ndarray) -> np.ndarray:
        imu = self.stream.imu
        k = min(self._imu_idx, len(imu) - 1)
        w = imu[k].gyro - self.bg
        v_B = R_BW @ self.v
        dp_B = -np.cross(w, p_B) - v_B
        dp_C = R_CB @ dp_B
        return Pi @ dp_C

    def landmark_world(self, lid: int) -> np.ndarray:
        o, R_a = self.lm_anchor[lid]
        alpha, beta, rho = self.lm_y[lid]
        rho_eff = max(rho, 1e-4)
        return o + R_a @ np.array([alpha, beta, 1.0]) / rho_eff

    def update_camera(self, frame) -> float:
        obs = frame.observations
        in_state = [lid for lid in self.lm_ids if lid in obs]
        max_innov = 0.0
        if in_state:
            n = self._dim()
            rows_h = []
            rows_r = []
            rows_var = []
            rows_s2 = []
            R_BC = rot_from_quat(self.q_bc)
            R_CB = R_BC.T
            R_BW = rot_from_quat(self.q).T
            for lid in in_state:
                if self.lm_y[lid][2] < 1e-3:
                    continue
                p_L = self.landmark_world(lid)
                p_B = R_BW @ (p_L - self.p)
                p_C = R_CB @ (p_B - self.p_bc)
                if p_C[2] < 0.05:
                    continue
                z_pred = p_C[:2] / p_C[2]
                r = obs[lid] - z_pred
                Z = p_C[2]
                Pi = np.array([[1.0 / Z, 0.0, -p_C[0] / (Z * Z)],
                               [0.0, 1.0 / Z, -p_C[1] / (Z * Z)]])
                H = np.zeros((2, n))
                H[:, self.TH] = Pi @ R_CB @ skew(p_B)
                H[:, self.P_] = -Pi @ R_CB @ R_BW
                if self.with_ext:
                    H[:, self.ETH] = Pi @ skew(p_C)
                    H[:, self.EP] = -Pi @ R_CB
                h_td = self._feature_velocity(p_B, R_CB, R_BW, Pi)
                H[:, self.TD] = h_td
                j = self.lm_base + 3 * self.lm_ids.index(lid)
                o_a, R_a = self.lm_anchor[lid]
                alpha, beta, rho = self.lm_y[lid]
                rho_eff = max(rho, 1e-4)
                m_vec = np.array([alpha, beta, 1.0])
                J_y = np.column_stack([
                    np.array([1.0, 0.0, 0.0]) / rho_eff,
                    np.array([0.0, 1.0, 0.0]) / rho_eff,
                    -m_vec / (rho_eff * rho_eff),
                ])
                H[:, j:j + 3] = Pi @ R_CB @ R_BW @ R_a @ J_y
                # second-order budget for the offset linearization: the
                # first-order time correction leaves a residual ~ 0.5 *
                # gamma_ddot * dtd^2; dtd is shared by every feature, so
                # this enters the innovation covariance as a rank-one
                # (fully correlated) term, not as independent noise
                speed = float(np.linalg.norm(self.v))
                omega_n = float(np.linalg.norm(
                    self.stream.imu[min(self._imu_idx, len(self.stream.imu) - 1)].gyro
                    - self.bg))
                accel_scale = omega_n + speed / max(Z, 0.5)
                s2_rows = 2.0 * h_td * accel_scale * max(self.P[self.TD, self.TD], 0.0)
                base_var = max(self.cfg.pixel_noise ** 2, 1e-20)
                # robust per-feature gate: soft-downweight moderate outliers
                # (inflating R), reject only gross ones, so a shared
                # systematic error cannot lock out every update
                S = H @ self.P @ H.T + np.eye(2) * base_var + np.outer(s2_rows, s2_rows)
                try:
                    md = float(r @ np.linalg.solve(S, r))
                except np.linalg.LinAlgError:
                    raise SingularUpdateError("singular innovation covariance")
                if md > CHI2_GATE_2DOF * self.cfg.gate_soft_factor:
                    continue
                infl = max(1.0, md / CHI2_GATE_2DOF)
                rows_h.append(H)
                rows_r.append(r)
                rows_var.append(base_var * infl)
                rows_s2.append(s2_rows)
                self.lm_seen[lid] = self.t
                max_innov = max(max_innov, float(np.max(np.abs(r))))
            if rows_h:
                H = np.vstack(rows_h)
                r = np.concatenate(rows_r)
                s2 = np.concatenate(rows_s2)
                Rm = np.diag(np.repeat(rows_var, 2)) + np.outer(s2, s2)
                S = H @ self.P @ H.T + Rm
                try:
                    K = np.linalg.solve(S, H @ self.P).T
                except np.linalg.LinAlgError:
                    raise SingularUpdateError("singular innovation covariance")
                dx = K @ r
                i_kh = np.eye(self._dim()) - K @ H
                self.P = i_kh @ self.P @ i_kh.T + K @ Rm @ K.T
                self._symmetrize()
                self._inject(dx)
        return max_innov

    def _inject(self, dx: np.ndarray) -> None:
        self.q = quat_normalize(quat_multiply(self.q, quat_from_rotvec(dx[self.TH])))
        self.p = self.p + dx[self.P_]
        self.v = self.v + dx[self.V_]
        self.bg = self.bg + dx[self.BG]
        self.ba = self.ba + dx[self.BA]
        if self.with_ext:
            self.q_bc = quat_normalize(quat_multiply(
                self.q_bc, quat_from_rotvec(dx[self.ETH])))
            self.p_bc = self.p_bc + dx[self.EP]
        dtd = float(dx[self.TD])
        self.td += dtd
        # keep candidate first-view anchors consistent with the new offset
        # estimate (they live outside the covariance, so shift them by
        # their stored time derivatives)
        if dtd != 0.0:
            for lid, (d1, p1, t1, v1, ddir1) in list(self._candidates.items()):
                self._candidates[lid] = (d1 + dtd * ddir1, p1 + dtd * v1,
                                         t1, v1, ddir1)
        for i, lid in enumerate(self.lm_ids):
            j = self.lm_base + 3 * i
            self.lm_y[lid] = self.lm_y[lid] + dx[j:j + 3]

    # -- landmark management -------------------------------------------------

    def _anchor_rates(self, ray_c: np.ndarray, R_WB: np.ndarray):
        """Time derivatives of the camera center and of the world ray,
        used to model how a time-offset error shifts view anchors."""
        imu = self.stream.imu
        k = min(self._imu_idx, len(imu) - 1)
        w = imu[k].gyro - self.bg
        R_BC = rot_from_quat(self.q_bc)
        v_wc = self.v + R_WB @ np.cross(w, self.p_bc)
        ddir = R_WB @ np.cross(w, R_BC @ ray_c)
        return v_wc, ddir

    @staticmethod
    def _triangulate(p1, d1, p2, d2) -> float | None:
        nvec = np.cross(d1, d2)
        denom = float(nvec @ nvec)
        if denom < 1e-12:
            return None
        return float(np.cross(p2 - p1, d1) @ nvec / denom)

    def manage_landmarks(self, frame) -> None:
        obs = frame.observations
        # retire stale landmarks and ones whose inverse depth left the
        # usable range (the linearization is meaningless there)
        stale = [lid for lid in self.lm_ids
                 if (self.t - self.lm_seen.get(lid, self.t) > self.cfg.landmark_stale_s
                     or not 1e-3 < self.lm_y[lid][2] < 5.0)]
        for lid in stale:
            self._remove_landmark(lid)

        R_WC, p_WC, R_WB = self._camera_pose()
        inits = 0
        for lid, gam in obs.items():
            if lid in self.lm_y:
                continue
            ray_c = np.array([gam[0], gam[1], 1.0])
            d_W = R_WC @ ray_c
            if lid not in self._candidates:
                v1, ddir1 = self._anchor_rates(ray_c, R_WB)
                self._candidates[lid] = (d_W, p_WC.copy(), self.t, v1, ddir1)
                continue
            d1, p1, t1, v1, ddir1 = self._candidates[lid]
            if (len(self.lm_ids) >= self.cfg.max_landmarks
                    or inits >= self.cfg.max_inits_per_frame
                    or self.t - t1 < self.cfg.min_candidate_age):
                continue
            cosang = float(d1 @ d_W / (np.linalg.norm(d1) * np.linalg.norm(d_W)))
            if cosang > np.cos(np.deg2rad(self.cfg.min_parallax_deg)):
                # not enough parallax yet; keep the older sighting
                continue
            lam2 = self._triangulate(p1, d1, p_WC, d_W)
            if lam2 is None:
                continue
            if lam2 < 0.2 or lam2 > 80.0:
                del self._candidates[lid]
                continue
            v2, ddir2 = self._anchor_rates(ray_c, R_WB)
            g_td = self._init_td_column(p1, d1, v1, ddir1, p_WC, d_W,
                                        v2, ddir2, lam2, p_WC + lam2 * d_W)
            self._add_landmark(lid, gam, lam2, ray_c, R_WB, R_WC, p_WC,
                               p_WC - p1, g_td)
            del self._candidates[lid]
            inits += 1

    def _init_td_column(self, p1, d1, v1, ddir1, p2, d2, v2, ddir2,
                        lam2: float, p_L: np.ndarray) -> np.ndarray:
        """Offset sensitivity of the triangulated point: directional
        derivative under a common time shift of both view anchors."""
        eps = 1e-3
        lam_shift = self._triangulate(p1 + eps * v1, d1 + eps * ddir1,
                                      p2 + eps * v2, d2 + eps * ddir2)
        if lam_shift is None:
            return v2.copy()
        p_L_shift = (p2 + eps * v2) + lam_shift * (d2 + eps * ddir2)
        return (p_L_shift - p_L) / eps

    def _add_landmark(self, lid: int, gam: np.ndarray, depth: float,
                      ray_c: np.ndarray, R_WB: np.ndarray, R_WC: np.ndarray,
                      p_WC: np.ndarray, baseline: np.ndarray,
                      g_td: np.ndarray) -> None:
        """Anchored inverse-depth initialization.

        The landmark state is y = (alpha, beta, rho) relative to the
        current camera pose stored as a fixed anchor frame; alpha/beta are
        pinned by the current bearing, while the triangulated depth enters
        only through the nearly linear inverse-depth coordinate, so a poor
        baseline cannot destabilize the filter.
        """
        n = self._dim()
        R_BC = rot_from_quat(self.q_bc)
        u_B = self.p_bc + R_BC @ (depth * ray_c)
        # world-position sensitivity of the triangulated point
        G_tri = np.zeros((3, n))
        G_tri[:, self.TH] = -R_WB @ skew(u_B)
        G_tri[:, self.P_] = np.eye(3)
        if self.with_ext:
            G_tri[:, self.EP] = R_WB
            G_tri[:, self.ETH] = -R_WB @ R_BC @ skew(depth * ray_c)
        # both anchor poses were taken at stamp + estimated offset, so the
        # triangulated point inherits the offset error through the common
        # time shift of the two views
        G_tri[:, self.TD] = g_td

        # map into anchor coordinates: y = (q1/q3, q2/q3, 1/q3) for
        # q = R_a^T (p_L - o_a), with q = depth * ray_c at init
        lam = depth
        A = np.array([
            [1.0 / lam, 0.0, -gam[0] / lam],
            [0.0, 1.0 / lam, -gam[1] / lam],
            [0.0, 0.0, -1.0 / (lam * lam)],
        ])
        G = A @ R_WC.T @ G_tri

        # independent init noise: bearing rows see the pixel noise, the
        # inverse-depth row the first-view pixel error over the baseline
        pix = max(self.cfg.pixel_noise, 1e-6)
        d_W = R_WC @ ray_c
        dir_w = d_W / np.linalg.norm(d_W)
        b_perp = baseline - (baseline @ dir_w) * dir_w
        b_perp_norm = max(float(np.linalg.norm(b_perp)), 1e-3)
        rho0 = 1.0 / lam
        sigma_rho = max(pix / b_perp_norm, self.cfg.depth_sigma_frac * rho0)
        R_init = np.diag([pix * pix, pix * pix, sigma_rho * sigma_rho])

        P = self.P
        PG = P @ G.T
        top = np.hstack([P, PG])
        bottom = np.hstack([PG.T, G @ PG + R_init])
        self.P = np.vstack([top, bottom])
        self.lm_ids.append(lid)
        self.lm_anchor[lid] = (p_WC.copy(), R_WC.copy())
        self.lm_y[lid] = np.array([gam[0], gam[1], rho0])
        self.lm_seen[lid] = self.t

    def _remove_landmark(self, lid: int) -> None:
        i = self.lm_ids.index(lid)
        j = self.lm_base + 3 * i
        keep = [k for k in range(self._dim()) if not (j <= k < j + 3)]
        self.P = self.P[np.ix_(keep, keep)]
        self.lm_ids.pop(i)
        del self.lm_y[lid]
        del self.lm_anchor[lid]
        self.lm_seen.pop(lid, None)

    # -- epoch bookkeeping ---------------------------------------------------

    def record_epoch(self, frame, innovation_max: float) -> EpochRecord:
        truth = self.stream.truth.state_at(self.t)
        R_hat = rot_from_quat(self.q)
        R_true = rot_from_quat(truth.q)
        dth_g = rotvec_from_quat(quat_from_rot(R_hat @ R_true.T))
        cov_th_g = R_hat @ self.P[self.TH, self.TH] @ R_hat.T

        errors = {
            "p_WB": self.p - truth.p,
            "q_WB": dth_g,
            "v_W": self.v - truth.v,
            "b_g": self.bg - self.stream.gyro_bias,
            "b_a": self.ba - self.stream.accel_bias,
        }
        sig = {
            "p_WB": np.sqrt(np.clip(np.diag(self.P[self.P_, self.P_]), 0, None)),
            "q_WB": np.sqrt(np.clip(np.diag(cov_th_g), 0, None)),
            "v_W": np.sqrt(np.clip(np.diag(self.P[self.V_, self.V_]), 0, None)),
            "b_g": np.sqrt(np.clip(np.diag(self.P[self.BG, self.BG]), 0, None)),
            "b_a": np.sqrt(np.clip(np.diag(self.P[self.BA, self.BA]), 0, None)),
        }
        if self.with_ext:
            R_bc_true = self.stream.R_BC
            dq = quat_multiply(quat_conj(quat_from_rot(R_bc_true)), self.q_bc)
            errors["q_BC"] = rotvec_from_quat(dq)
            errors["p_BC"] = self.p_bc - self.stream.p_BC
            sig["q_BC"] = np.sqrt(np.clip(np.diag(self.P[self.ETH, self.ETH]), 0, None))
            sig["p_BC"] = np.sqrt(np.clip(np.diag(self.P[self.EP, self.EP]), 0, None))
        errors["t_d"] = np.array([self.td - self.stream.time_offset])
        sig["t_d"] = np.array([np.sqrt(max(self.P[self.TD, self.TD], 0.0))])

        pose_err = np.concatenate([errors["p_WB"], errors["q_WB"]])
        idx = np.r_[3:6, 0:3]
        P_pose = self.P[np.ix_(idx, idx)]
        # attitude block in global coords for consistency with the error
        P_pose[3:, 3:] = cov_th_g
        try:
            nees = float(pose_err @ np.linalg.solve(P_pose, pose_err))
        except np.linalg.LinAlgError:
            nees = float("inf")
        rec = EpochRecord(
            t=self.t,
            errors={k: v.copy() for k, v in errors.items()},
            sigmas3={k: 3.0 * v for k, v in sig.items()},
            n_landmarks=len(self.lm_ids),
            innovation_max=innovation_max,
            nees_pose=nees,
        )
        self.records.append(rec)
        if not np.isfinite(nees) or nees > self.cfg.nees_hard_cap:
            self.diverge_count += 1
            if self.diverge_count >= self.cfg.divergence_patience:
                err = FilterDivergedError(self.t, nees)
                err.records = list(self.records)
                raise err
        else:
            self.diverge_count = 0
        return rec

    # -- main loop -----------------------------------------------------------

    def run(self) -> list[EpochRecord]:
        for frame in self.stream.frames:
            target = frame.stamp + self.td
            target = min(max(target, self.t),
                         self.stream.truth.times[-1])
            self.propagate_to(target)
            innov = self.update_camera(frame)
            self.manage_landmarks(frame)
            self.record_epoch(frame, innov)
        return self.records


def run_ekf(stream: MeasurementStream, config: FilterConfig | None = None,
            seed: int = 0, perfect_init: bool = False) -> list[EpochRecord]:
    """Convenience wrapper: configure from the scenario and run."""
    scn = stream.scenario
    cfg = config or FilterConfig(
        estimate_extrinsics=scn.estimate_extrinsics,
        gyro_noise_density=scn.gyro_noise_density,
        accel_noise_density=scn.accel_noise_density,
        pixel_noise=scn.pixel_noise,
        max_landmarks=scn.max_state_landmarks,
        min_parallax_deg=scn.min_parallax_deg,
    )
    rng = np.random.default_rng(seed + 987_654_323)
    ekf = ErrorStateEkf(stream, cfg, rng, perfect_init=perfect_init)
    ekf.run()
    return ekf.records
