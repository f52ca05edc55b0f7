"""Built-in visual-inertial odometry model and degenerate-motion presets.

State (21): body-frame velocity v (3), body-frame gravity g (3),
gyro/accel biases bg, ba (3+3), IMU position in the camera frame p (3),
trimmed camera-IMU quaternion q (3), landmark normalized coordinates
gam (2) and inverse depth rho (1).  Inputs (6): gyro and accelerometer
readings wm, am.  Outputs: the two normalized reprojection coordinates
and the squared gravity norm.

The rotation camera<-body is the exact rational function of the trimmed
quaternion (quadratic numerator over 1 + |q|^2), so the whole model stays
inside the rational-expression language.  Three constraint presets cover
constant local acceleration (unknown-constant, affine in am), rotation
restricted to the body z-axis, and pure translation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

from .expr import Expr, ZERO, ONE, add, const, mul, neg, var
from .system import AffineControlSystem, Constraint, ConstraintKind

VIO_STATE = (
    "v_x", "v_y", "v_z",
    "g_x", "g_y", "g_z",
    "bg_x", "bg_y", "bg_z",
    "ba_x", "ba_y", "ba_z",
    "p_x", "p_y", "p_z",
    "q_x", "q_y", "q_z",
    "gam_1", "gam_2",
    "rho",
)
VIO_INPUTS = ("wm_x", "wm_y", "wm_z", "am_x", "am_y", "am_z")
VIO_CONSTANTS = ("g",)

AXES = ("x", "y", "z")

PRESET_CONST_LOCAL_ACCEL = "const_local_accel"
PRESET_SINGLE_AXIS_Z = "single_axis_z"
PRESET_PURE_TRANSLATION = "pure_translation"
PRESET_NAMES = (PRESET_CONST_LOCAL_ACCEL, PRESET_SINGLE_AXIS_Z, PRESET_PURE_TRANSLATION)


class UnknownKindError(ValueError):
    pass


def _cross(a: tuple[Expr, Expr, Expr], b: tuple[Expr, Expr, Expr]) -> tuple[Expr, Expr, Expr]:
    return (
        add(mul(a[1], b[2]), neg(mul(a[2], b[1]))),
        add(mul(a[2], b[0]), neg(mul(a[0], b[2]))),
        add(mul(a[0], b[1]), neg(mul(a[1], b[0]))),
    )


def _matvec(m, v):
    return tuple(add(*[mul(m[i][j], v[j]) for j in range(3)]) for i in range(3))


def rotation_numerator() -> tuple[tuple[Expr, ...], ...]:
    """Quadratic-form numerator of the camera<-body rotation; divide by
    rotation_denominator() to get the actual matrix."""
    qx, qy, qz = var("q_x"), var("q_y"), var("q_z")
    two = const(2)
    return (
        (ONE + qx**2 - qy**2 - qz**2, two * (qx * qy - qz), two * (qx * qz + qy)),
        (two * (qx * qy + qz), ONE - qx**2 + qy**2 - qz**2, two * (qy * qz - qx)),
        (two * (qx * qz - qy), two * (qy * qz + qx), ONE - qx**2 - qy**2 + qz**2),
    )


def rotation_denominator() -> Expr:
    qx, qy, qz = var("q_x"), var("q_y"), var("q_z")
    return ONE + qx**2 + qy**2 + qz**2


@lru_cache(maxsize=1)
def vio_system() -> AffineControlSystem:
    """The unconstrained 21-state VIO model in standard affine form."""
    v = (var("v_x"), var("v_y"), var("v_z"))
    g = (var("g_x"), var("g_y"), var("g_z"))
    bg = (var("bg_x"), var("bg_y"), var("bg_z"))
    ba = (var("ba_x"), var("ba_y"), var("ba_z"))
    p = (var("p_x"), var("p_y"), var("p_z"))
    gam1, gam2, rho = var("gam_1"), var("gam_2"), var("rho")

    M = rotation_numerator()
    D = rotation_denominator()
    # landmark ray scaled by inverse depth: rho*p - gam_bar
    s = (rho * p[0] - gam1, rho * p[1] - gam2, rho * p[2] - ONE)

    def landmark_rows(inner: tuple[Expr, Expr, Expr]) -> tuple[Expr, Expr, Expr]:
        # C_{gam,rho} applied to inner/D, one shared denominator per row
        r1 = add(inner[0], neg(mul(gam1, inner[2]))) / D
        r2 = add(inner[1], neg(mul(gam2, inner[2]))) / D
        r3 = neg(mul(rho, inner[2])) / D
        return (r1, r2, r3)

    zeros3 = (ZERO, ZERO, ZERO)

    # drift: measured rates contribute -bg / -ba through w_t = wm - bg,
    # a_t = am - ba
    w0_num = tuple(neg(e) for e in _matvec(M, bg))  # D * (R @ (-bg))
    inner0 = tuple(
        add(c, neg(mul(rho, mv)))
        for c, mv in zip(_cross(w0_num, s), _matvec(M, v))
    )
    lm0 = landmark_rows(inner0)
    drift = (
        _cross(v, tuple(neg(b) for b in bg))[0] + neg(ba[0]) + g[0],
        _cross(v, tuple(neg(b) for b in bg))[1] + neg(ba[1]) + g[1],
        _cross(v, tuple(neg(b) for b in bg))[2] + neg(ba[2]) + g[2],
        *_cross(g, tuple(neg(b) for b in bg)),
        *zeros3,  # bg
        *zeros3,  # ba
        *zeros3,  # p
        *zeros3,  # q
        lm0[0], lm0[1], lm0[2],
    )

    fields = []
    for j in range(3):  # gyro input axes
        e_j = tuple(ONE if k == j else ZERO for k in range(3))
        col = tuple(M[i][j] for i in range(3))  # D * (R @ e_j)
        lmj = landmark_rows(_cross(col, s))
        fields.append((
            *_cross(v, e_j),
            *_cross(g, e_j),
            *zeros3, *zeros3, *zeros3, *zeros3,
            lmj[0], lmj[1], lmj[2],
        ))
    for j in range(3):  # accelerometer input axes
        e_j = tuple(ONE if k == j else ZERO for k in range(3))
        fields.append((
            *e_j,
            *zeros3, *zeros3, *zeros3, *zeros3, *zeros3,
            ZERO, ZERO, ZERO,
        ))

    outputs = (
        ("gamma_1", gam1),
        ("gamma_2", gam2),
        ("grav_norm2", g[0]**2 + g[1]**2 + g[2]**2),
    )
    return AffineControlSystem(
        state=VIO_STATE,
        inputs=VIO_INPUTS,
        drift=drift,
        input_fields=tuple(fields),
        outputs=outputs,
        constants=VIO_CONSTANTS,
    )


def vio_constraints(kind: str) -> tuple[Constraint, ...]:
    """Constraint preset by name; ready for apply_constraints."""
    if kind == PRESET_CONST_LOCAL_ACCEL:
        # unknown constant body acceleration: d_i = am_i - ba_i + g_i
        return tuple(
            Constraint(
                kind=ConstraintKind.CONST_AFFINE,
                c0=add(neg(var(f"ba_{ax}")), var(f"g_{ax}")),
                input_terms=((f"am_{ax}", ONE),),
                solve_for=f"am_{ax}",
                d_name=f"d_{ax}",
            )
            for ax in AXES
        )
    if kind == PRESET_SINGLE_AXIS_Z:
        # zero body rates about x and y: 0 = wm_i - bg_i, i in {x, y}
        return tuple(
            Constraint(
                kind=ConstraintKind.ZERO_AFFINE,
                c0=neg(var(f"bg_{ax}")),
                input_terms=((f"wm_{ax}", ONE),),
                solve_for=f"wm_{ax}",
            )
            for ax in ("x", "y")
        )
    if kind == PRESET_PURE_TRANSLATION:
        return tuple(
            Constraint(
                kind=ConstraintKind.ZERO_AFFINE,
                c0=neg(var(f"bg_{ax}")),
                input_terms=((f"wm_{ax}", ONE),),
                solve_for=f"wm_{ax}",
            )
            for ax in AXES
        )
    raise UnknownKindError(f"unknown constraint preset '{kind}'; "
                           f"expected one of {PRESET_NAMES}")


def vio_with_constraints(kind: str | None) -> AffineControlSystem:
    sys = vio_system()
    if kind is None:
        return sys
    return replace(sys, constraints=vio_constraints(kind))


# -- expected analysis results ------------------------------------------------

@dataclass(frozen=True)
class ExpectedResultFixture:
    scenario: str
    state_dim: int
    final_rank: int
    kernel_dim: int
    indeterminable: frozenset[str]
    null_vectors: tuple[tuple[Expr, ...], ...]


def _zeros(k: int) -> tuple[Expr, ...]:
    return (ZERO,) * k


def _single_axis_null_vector() -> tuple[Expr, ...]:
    qx, qy, qz = var("q_x"), var("q_y"), var("q_z")
    two = const(2)
    p_block = (
        two * (qy + qx * qz),
        neg(two * (qx - qy * qz)),
        neg(qx**2 + qy**2 - qz**2 - ONE),
    )
    return _zeros(12) + p_block + _zeros(6)


def _pure_translation_null_vectors() -> tuple[tuple[Expr, ...], ...]:
    gx, gy, gz = var("g_x"), var("g_y"), var("g_z")
    vecs = []
    for j in range(3):  # p translations
        e = [ZERO] * 21
        e[12 + j] = ONE
        vecs.append(tuple(e))
    # equal infinitesimal rotations of g and ba about axes orthogonal to g
    for g_block in ((neg(gy), gx, ZERO), (neg(gz), ZERO, gx)):
        e = [ZERO] * 21
        e[3:6] = g_block
        e[9:12] = g_block
        vecs.append(tuple(e))
    return tuple(vecs)


def _const_accel_null_vector() -> tuple[Expr, ...]:
    # scale direction on the converted 24-state system: velocity, extrinsic
    # lever arm and true body acceleration d scale together, the
    # accelerometer bias compensates -d, inverse depth scales by -rho
    v = tuple(var(f"v_{ax}") for ax in AXES)
    d = tuple(var(f"d_{ax}") for ax in AXES)
    p = tuple(var(f"p_{ax}") for ax in AXES)
    return (
        v
        + _zeros(3)                      # g
        + _zeros(3)                      # bg
        + tuple(neg(e) for e in d)       # ba
        + p
        + _zeros(3)                      # q
        + _zeros(2)                      # gam
        + (neg(var("rho")),)
        + d
    )


@lru_cache(maxsize=1)
def expected_results() -> dict[str, ExpectedResultFixture]:
    ind_const_accel = frozenset(
        [f"v_{ax}" for ax in AXES] + [f"ba_{ax}" for ax in AXES]
        + [f"p_{ax}" for ax in AXES] + ["rho"] + [f"d_{ax}" for ax in AXES])
    ind_single_axis = frozenset(f"p_{ax}" for ax in AXES)
    ind_pure_translation = frozenset(
        [f"g_{ax}" for ax in AXES] + [f"ba_{ax}" for ax in AXES]
        + [f"p_{ax}" for ax in AXES])
    return {
        "unconstrained": ExpectedResultFixture(
            scenario="unconstrained", state_dim=21, final_rank=21, kernel_dim=0,
            indeterminable=frozenset(), null_vectors=()),
        PRESET_CONST_LOCAL_ACCEL: ExpectedResultFixture(
            scenario=PRESET_CONST_LOCAL_ACCEL, state_dim=24, final_rank=23,
            kernel_dim=1, indeterminable=ind_const_accel,
            null_vectors=(_const_accel_null_vector(),)),
        PRESET_SINGLE_AXIS_Z: ExpectedResultFixture(
            scenario=PRESET_SINGLE_AXIS_Z, state_dim=21, final_rank=20,
            kernel_dim=1, indeterminable=ind_single_axis,
            null_vectors=(_single_axis_null_vector(),)),
        PRESET_PURE_TRANSLATION: ExpectedResultFixture(
            scenario=PRESET_PURE_TRANSLATION, state_dim=21, final_rank=16,
            kernel_dim=5, indeterminable=ind_pure_translation,
            null_vectors=_pure_translation_null_vectors()),
    }
