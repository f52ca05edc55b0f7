"""Closed-form trajectory generators.

Every trajectory provides analytic world position / velocity /
acceleration, the world<-body rotation and the body angular rate as
functions of time.  The slope family lives in a plane inclined by 30
degrees with the body z-axis along the plane normal and the body yawing
within the plane; the circle/cylinder family is flat with the body
z-axis vertical.  A fully exciting 3D trajectory is included for
checking that everything converges under general motion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GRAVITY = 9.81
SLOPE_ANGLE = np.deg2rad(30.0)

TRAJECTORY_KINDS = (
    "SlopeLine",
    "SlopeLemniscate",
    "SlopeCircle",
    "CircleConstVel",
    "CylinderConstAccel",
    "CircleVaryingRate",
    "CylinderVaryingAccel",
    "General3D",
)


class UnknownKindError(ValueError):
    pass


@dataclass
class TrajectorySample:
    t: float
    p: np.ndarray        # world position
    v: np.ndarray        # world velocity
    a: np.ndarray        # world kinematic acceleration
    R: np.ndarray        # world <- body rotation
    omega: np.ndarray    # body angular rate

    def gravity_world(self) -> np.ndarray:
        return np.array([0.0, 0.0, -GRAVITY])

    def specific_force_body(self) -> np.ndarray:
        return self.R.T @ (self.a - self.gravity_world())


def _rot_x(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0, 0], [0, c, -s], [0, s, c]])


def _rot_y(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0, s], [0, 1.0, 0], [-s, 0, c]])


def _rot_z(a) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])


class Trajectory:
    """Analytic trajectory; subclasses implement _plane_state / sample."""

    kind: str = "base"

    def sample(self, t: float) -> TrajectorySample:
        raise NotImplementedError


class _PlanarTrajectory(Trajectory):
    """Motion in a (possibly tilted) plane with yaw about the plane normal.

    Subclasses provide the in-plane curve (x, y, z and two derivatives)
    and the heading angle/rate; the body x-axis points along the heading
    and the body z-axis along the plane normal.
    """

    def __init__(self, tilt: float = 0.0, origin: np.ndarray | None = None):
        self.R_plane = _rot_x(tilt)
        self.origin = np.zeros(3) if origin is None else origin

    def _curve(self, t: float):
        """Return (xyz, d_xyz, dd_xyz, heading, heading_rate) in plane coords."""
        raise NotImplementedError

    def sample(self, t: float) -> TrajectorySample:
        xyz, dxyz, ddxyz, th, thd = self._curve(t)
        Rp = self.R_plane
        R = Rp @ _rot_z(th)
        return TrajectorySample(
            t=t,
            p=Rp @ np.asarray(xyz) + self.origin,
            v=Rp @ np.asarray(dxyz),
            a=Rp @ np.asarray(ddxyz),
            R=R,
            omega=np.array([0.0, 0.0, thd]),
        )


class SlopeLine(_PlanarTrajectory):
    """Straight segment on the slope, sinusoidal accelerations, no rotation."""

    kind = "SlopeLine"

    def __init__(self, amplitude: float = 2.5, freq: float = 0.9):
        super().__init__(tilt=SLOPE_ANGLE)
        self.A = amplitude
        self.w = freq

    def _curve(self, t: float):
        A, w = self.A, self.w
        s, c = np.sin(w * t), np.cos(w * t)
        return ((A * s, 0.0, 0.0), (A * w * c, 0.0, 0.0),
                (-A * w * w * s, 0.0, 0.0), 0.0, 0.0)


class SlopeLemniscate(_PlanarTrajectory):
    """Figure-eight on the slope; the yaw rate varies and changes sign."""

    kind = "SlopeLemniscate"

    def __init__(self, amplitude: float = 3.0, freq: float = 0.55):
        super().__init__(tilt=SLOPE_ANGLE)
        self.A = amplitude
        self.w = freq

    def _curve(self, t: float):
        A, w = self.A, self.w
        s1, c1 = np.sin(w * t), np.cos(w * t)
        s2, c2 = np.sin(2 * w * t), np.cos(2 * w * t)
        x, dx, ddx = A * s1, A * w * c1, -A * w * w * s1
        y = 0.5 * A * s2
        dy = A * w * c2
        ddy = -2 * A * w * w * s2
        th = np.arctan2(dy, dx)
        sp2 = dx * dx + dy * dy
        thd = (dx * ddy - dy * ddx) / sp2
        return ((x, y, 0.0), (dx, dy, 0.0), (ddx, ddy, 0.0), th, thd)


class SlopeCircle(_PlanarTrajectory):
    """Circle on the slope at a constant angular rate: constant body
    velocity, body rate and body kinematic acceleration."""

    kind = "SlopeCircle"

    def __init__(self, radius: float = 2.0, rate: float = 0.7):
        super().__init__(tilt=SLOPE_ANGLE)
        self.r = radius
        self.w = rate

    def _curve(self, t: float):
        r, w = self.r, self.w
        al = w * t
        s, c = np.sin(al), np.cos(al)
        return ((r * c, r * s, 0.0), (-r * w * s, r * w * c, 0.0),
                (-r * w * w * c, -r * w * w * s, 0.0),
                al + 0.5 * np.pi, w)


class _FlatCircle(_PlanarTrajectory):
    """Flat circular/cylindrical motion; angle profile and height profile
    supplied by subclasses as (value, rate, accel) triples."""

    def __init__(self, radius: float):
        super().__init__(tilt=0.0)
        self.r = radius

    def _angle(self, t: float):
        raise NotImplementedError

    def _height(self, t: float):
        return 0.0, 0.0, 0.0

    def _curve(self, t: float):
        r = self.r
        al, ald, aldd = self._angle(t)
        z, dz, ddz = self._height(t)
        s, c = np.sin(al), np.cos(al)
        x, y = r * c, r * s
        dx, dy = -r * ald * s, r * ald * c
        ddx = -r * (aldd * s + ald * ald * c)
        ddy = r * (aldd * c - ald * ald * s)
        return ((x, y, z), (dx, dy, dz), (ddx, ddy, ddz),
                al + 0.5 * np.pi, ald)


class CircleConstVel(_FlatCircle):
    """Case a: constant body angular rate and constant body velocity."""

    kind = "CircleConstVel"

    def __init__(self, radius: float = 3.0, rate: float = 0.6):
        super().__init__(radius)
        self.w = rate

    def _angle(self, t: float):
        return self.w * t, self.w, 0.0


class CylinderConstAccel(_FlatCircle):
    """Case b: constant body rate, constant body acceleration, but the
    body velocity grows along the axis."""

    kind = "CylinderConstAccel"

    def __init__(self, radius: float = 3.0, rate: float = 0.6, climb_accel: float = 0.05):
        super().__init__(radius)
        self.w = rate
        self.az = climb_accel

    def _angle(self, t: float):
        return self.w * t, self.w, 0.0

    def _height(self, t: float):
        return 0.5 * self.az * t * t, self.az * t, self.az


class CircleVaryingRate(_FlatCircle):
    """Case c: circular motion with a varying angular rate."""

    kind = "CircleVaryingRate"

    def __init__(self, radius: float = 3.0, rate: float = 0.6,
                 wobble: float = 0.8, wobble_freq: float = 0.7):
        super().__init__(radius)
        self.w = rate
        self.Aw = wobble
        self.nw = wobble_freq

    def _angle(self, t: float):
        n = self.nw
        return (self.w * t + self.Aw * np.sin(n * t),
                self.w + self.Aw * n * np.cos(n * t),
                -self.Aw * n * n * np.sin(n * t))


class CylinderVaryingAccel(_FlatCircle):
    """Case d: constant body rate, varying vertical acceleration."""

    kind = "CylinderVaryingAccel"

    def __init__(self, radius: float = 3.0, rate: float = 0.6,
                 bob: float = 1.2, bob_freq: float = 1.1):
        super().__init__(radius)
        self.w = rate
        self.Az = bob
        self.nz = bob_freq

    def _angle(self, t: float):
        return self.w * t, self.w, 0.0

    def _height(self, t: float):
        n = self.nz
        return (self.Az * np.sin(n * t), self.Az * n * np.cos(n * t),
                -self.Az * n * n * np.sin(n * t))


class General3D(Trajectory):
    """Fully exciting motion: 3D lemniscate position with oscillating
    roll/pitch/yaw, so rotation and acceleration vary about all axes."""

    kind = "General3D"

    def __init__(self, amplitude: float = 2.5, freq: float = 0.5):
        self.A = amplitude
        self.w = freq

    def _angles(self, t: float):
        w = self.w
        yaw = 0.8 * np.sin(0.9 * w * t) + 0.25 * w * t
        pitch = 0.35 * np.sin(1.1 * w * t + 0.4)
        roll = 0.4 * np.sin(1.3 * w * t + 1.1)
        dyaw = 0.8 * 0.9 * w * np.cos(0.9 * w * t) + 0.25 * w
        dpitch = 0.35 * 1.1 * w * np.cos(1.1 * w * t + 0.4)
        droll = 0.4 * 1.3 * w * np.cos(1.3 * w * t + 1.1)
        return yaw, pitch, roll, dyaw, dpitch, droll

    def sample(self, t: float) -> TrajectorySample:
        A, w = self.A, self.w
        s1, c1 = np.sin(w * t), np.cos(w * t)
        s2, c2 = np.sin(2 * w * t + 0.7), np.cos(2 * w * t + 0.7)
        p = np.array([A * s1, 0.5 * A * np.sin(2 * w * t), 0.4 * A * s2])
        v = np.array([A * w * c1, A * w * np.cos(2 * w * t), 0.8 * A * w * c2])
        a = np.array([-A * w * w * s1, -2 * A * w * w * np.sin(2 * w * t),
                      -1.6 * A * w * w * s2])
        yaw, pitch, roll, dyaw, dpitch, droll = self._angles(t)
        R = _rot_z(yaw) @ _rot_y(pitch) @ _rot_x(roll)
        # ZYX Euler rates to body rates
        sp, cp = np.sin(pitch), np.cos(pitch)
        sr, cr = np.sin(roll), np.cos(roll)
        omega = np.array([
            droll - dyaw * sp,
            dpitch * cr + dyaw * cp * sr,
            -dpitch * sr + dyaw * cp * cr,
        ])
        return TrajectorySample(t=t, p=p, v=v, a=a, R=R, omega=omega)


_KIND_MAP = {
    "SlopeLine": SlopeLine,
    "SlopeLemniscate": SlopeLemniscate,
    "SlopeCircle": SlopeCircle,
    "CircleConstVel": CircleConstVel,
    "CylinderConstAccel": CylinderConstAccel,
    "CircleVaryingRate": CircleVaryingRate,
    "CylinderVaryingAccel": CylinderVaryingAccel,
    "General3D": General3D,
}


def generate_trajectory(kind: str, **params) -> Trajectory:
    try:
        cls = _KIND_MAP[kind]
    except KeyError:
        raise UnknownKindError(
            f"unknown trajectory kind '{kind}'; expected one of {TRAJECTORY_KINDS}"
        ) from None
    return cls(**params)
