"""Lie-derivative codistribution construction and rank analysis.

Starting from the gradients of the outputs, the codistribution is grown
by taking directional derivatives of the current spanning rows along the
drift and every input field, re-evaluating rank at a fixed set of random
integer sample points, and pruning to a row basis after every round.
Construction stops when a full extension round leaves the rank
stationary (or the state dimension is reached, which bounds the rank
from above), or when the order cap is hit, in which case the report is
flagged as truncated.

Generic rank is the maximum over the sample points of the exact rank at
each point; per-variable classification uses the column-removal test
(a variable is observable iff deleting its column drops the evaluated
rank by exactly one at every sample point) and must be unanimous across
points.  Symbolic null vectors are verified against the spanning rows,
never synthesized; numeric kernels are reported per point.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from random import Random
from typing import Sequence

from .expr import (
    DivisionByZeroError,
    Expr,
    Rat,
    evaluate,
    sample_point,
)
from .linalg import RationalMatrix, RowReducer
from .system import AffineControlSystem

DEFAULT_MAX_ORDER = 6
DEFAULT_POINTS = 5


class PoleAtAllSamplesError(Exception):
    """Resampling could not find pole-free evaluation points."""


class Classification(str, Enum):
    OBSERVABLE = "observable"
    INDETERMINABLE = "indeterminable"


class TimeOffsetVerdict(str, Enum):
    UNOBSERVABLE_SUFFICIENT = "unobservable_sufficient"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ConstancyProfile:
    """Which inputs/outputs are constant over the analysis interval."""

    inputs_constant: tuple[bool, ...]
    outputs_constant: tuple[bool, ...]


def check_time_offset_condition(profile: ConstancyProfile) -> TimeOffsetVerdict:
    """Sufficient condition for an unobservable input/output time offset.

    The offset is guaranteed weakly unobservable when all control inputs
    are constant or all observations are constant; the condition is only
    sufficient, so anything else is Unknown.
    """
    all_inputs = len(profile.inputs_constant) == 0 or all(profile.inputs_constant)
    all_outputs = len(profile.outputs_constant) == 0 or all(profile.outputs_constant)
    if all_inputs or all_outputs:
        return TimeOffsetVerdict.UNOBSERVABLE_SUFFICIENT
    return TimeOffsetVerdict.UNKNOWN


def lie_derivative(sys: AffineControlSystem, h: Expr, word: Sequence[int]) -> Expr:
    """Iterated Lie derivative of h along the fields named by ``word``.

    Index 0 is the drift, 1..m the input fields; the empty word returns h
    itself, and appending j maps e to grad(e) . f_j.
    """
    e = h
    for j in word:
        f = sys.field(j)  # raises IndexError for a bad index
        e = _directional(sys.state, e, f)
    return e


def _directional(state: Sequence[str], e: Expr, f: Sequence[Expr]) -> Expr:
    from .expr import add, mul, ZERO

    terms = []
    for name, fk in zip(state, f):
        if fk == ZERO:
            continue
        de = e.diff(name)
        if de == ZERO:
            continue
        terms.append(mul(de, fk))
    return add(*terms)


@dataclass
class CodistRow:
    word: tuple[int, ...]
    output_index: int
    scalar: Expr
    gradient: tuple[Expr, ...]
    extended: bool = False

    @property
    def order(self) -> int:
        return len(self.word)

    def label(self) -> str:
        k = len(self.word)
        h = f"h{self.output_index + 1}"
        if k == 0:
            return f"L0{h}"
        fields = ",".join(f"f{j}" for j in self.word)
        return f"L{k}{{{fields}}}{h}"


@dataclass
class Codistribution:
    """Spanning rows of the observability codistribution plus the shared
    sample points they were evaluated at."""

    system: AffineControlSystem
    rows: list[CodistRow]
    basis: list[int]
    order: int
    rank_history: list[tuple[int, int]]
    final_rank: int
    truncated: bool
    sample_points: list[dict[str, int]]
    point_seeds: list[int]
    pole_resamples: int
    basis_matrices: list[RationalMatrix]

    @property
    def state_dim(self) -> int:
        return self.system.n_states

    def basis_rows(self) -> list[CodistRow]:
        return [self.rows[i] for i in self.basis]


class _PointEvaluator:
    """Evaluates expressions at one sample point with a persistent memo,
    so shared subtrees across rows and rounds are computed once."""

    def __init__(self, point: dict[str, int], seed: int):
        self.point = point
        self.seed = seed
        self.memo: dict = {}

    def eval_vector(self, vec: Sequence[Expr]) -> list[Rat]:
        return [evaluate(e, self.point, self.memo) for e in vec]


def _draw_point(names: Sequence[str], base_seed: int, attempt: int) -> tuple[dict[str, int], int]:
    seed = hash((base_seed, attempt)) & 0x7FFFFFFF
    rng = Random(seed)
    return sample_point(names, rng), seed


def build_codistribution(sys: AffineControlSystem,
                         max_order: int = DEFAULT_MAX_ORDER,
                         points: int = DEFAULT_POINTS,
                         seed: int = 0) -> Codistribution:
    """Grow the codistribution of a standard-form system to saturation.

    Requires a constraint-free system.  At each order every not-yet
    extended basis row is extended by every field; new rows enter the
    basis when they are independent of it at the sample points (stacked
    across points, earliest rows winning).  Stops when a full round
    leaves the generic rank unchanged, when the rank reaches the state
    dimension, or at ``max_order`` (flagged as truncated).
    """
    if sys.constraints:
        raise ValueError("system must be standard form (apply_constraints first)")
    names = sys.symbol_names()
    state = sys.state
    n = len(state)

    evaluators: list[_PointEvaluator] = []
    attempt = 0
    for k in range(points):
        point, pseed = _draw_point(names, seed + k, attempt)
        evaluators.append(_PointEvaluator(point, pseed))

    rows: list[CodistRow] = []
    basis: list[int] = []
    pole_resamples = 0

    # one rank tracker per sample point; a row joins the basis iff it
    # extends the span at at least one point (a row spanned everywhere is
    # function-field dependent up to Schwartz-Zippel failure probability)
    point_reducers = [RowReducer(n) for _ in range(points)]

    def reset_point(k: int) -> None:
        nonlocal pole_resamples
        for retry in range(1, 101):
            point, pseed = _draw_point(names, seed + k, retry + pole_resamples)
            cand = _PointEvaluator(point, pseed)
            try:
                for row in rows:
                    cand.eval_vector(row.gradient)
            except DivisionByZeroError:
                pole_resamples += 1
                continue
            evaluators[k] = cand
            rebuild_reducers()
            return
        raise PoleAtAllSamplesError(
            f"could not find a pole-free sample point after 100 retries (point {k})")

    def rebuild_reducers() -> None:
        nonlocal point_reducers, basis
        point_reducers = [RowReducer(n) for _ in range(points)]
        basis = []
        for idx, row in enumerate(rows):
            add_to_reducers(idx, row)

    def add_to_reducers(idx: int, row: CodistRow) -> bool:
        nonlocal pole_resamples
        while True:
            try:
                evals = [ev.eval_vector(row.gradient) for ev in evaluators]
            except DivisionByZeroError:
                pole_resamples += 1
                bad = _find_pole_point(row)
                reset_point(bad)
                continue
            break
        extends = [red.add(ev) for red, ev in zip(point_reducers, evals)]
        if any(extends):
            basis.append(idx)
            return True
        return False

    def _find_pole_point(row: CodistRow) -> int:
        for k, ev in enumerate(evaluators):
            try:
                ev.eval_vector(row.gradient)
            except DivisionByZeroError:
                return k
        return 0

    for out_idx, (_, h) in enumerate(sys.outputs):
        grad = tuple(h.diff(x) for x in state)
        row = CodistRow(word=(), output_index=out_idx, scalar=h, gradient=grad)
        rows.append(row)
        add_to_reducers(len(rows) - 1, row)

    def generic_rank() -> int:
        return max(red.rank for red in point_reducers) if point_reducers else 0

    rank = generic_rank()
    rank_history = [(0, rank)]
    truncated = False
    order = 0
    n_fields = 1 + len(sys.input_fields)

    while rank < n:
        if order >= max_order:
            truncated = True
            break
        order += 1
        to_extend = [rows[i] for i in basis if not rows[i].extended]
        for row in to_extend:
            row.extended = True
            for j in range(n_fields):
                f = sys.field(j)
                scalar = _directional_from_gradient(row.gradient, f)
                grad = tuple(scalar.diff(x) for x in state)
                new_row = CodistRow(word=row.word + (j,),
                                    output_index=row.output_index,
                                    scalar=scalar, gradient=grad)
                rows.append(new_row)
                add_to_reducers(len(rows) - 1, new_row)
        new_rank = generic_rank()
        rank_history.append((order, new_rank))
        if new_rank == rank:
            break
        rank = new_rank

    basis_matrices = []
    for ev in evaluators:
        basis_matrices.append(RationalMatrix(
            [ev.eval_vector(rows[i].gradient) for i in basis], cols=n))

    return Codistribution(
        system=sys,
        rows=rows,
        basis=list(basis),
        order=order,
        rank_history=rank_history,
        final_rank=rank,
        truncated=truncated,
        sample_points=[ev.point for ev in evaluators],
        point_seeds=[ev.seed for ev in evaluators],
        pole_resamples=pole_resamples,
        basis_matrices=basis_matrices,
    )


def _directional_from_gradient(gradient: Sequence[Expr], f: Sequence[Expr]) -> Expr:
    from .expr import add, mul, ZERO

    terms = []
    for ge, fk in zip(gradient, f):
        if fk == ZERO or ge == ZERO:
            continue
        terms.append(mul(ge, fk))
    return add(*terms)


@dataclass
class ObservabilityReport:
    state: tuple[str, ...]
    state_dim: int
    rank_history: list[tuple[int, int]]
    final_rank: int
    kernel_dim: int
    truncated: bool
    classification: dict[str, Classification]
    warnings: list[str]
    basis_labels: list[str]
    null_basis_numeric: list[list[list[Fraction]]]  # per point, kernel columns
    verified_null_vectors: list[list[Expr]]
    sample_points: list[dict[str, int]]
    sample_seeds: list[int]
    pole_resamples: int
    config: dict

    def to_json_dict(self) -> dict:
        def rat(x: Rat) -> str:
            f = Fraction(x)
            return f"{f.numerator}" if f.denominator == 1 else f"{f.numerator}/{f.denominator}"

        from .expr import to_string

        return {
            "state": list(self.state),
            "state_dim": self.state_dim,
            "rank_history": [[k, r] for k, r in self.rank_history],
            "final_rank": self.final_rank,
            "kernel_dim": self.kernel_dim,
            "truncated": self.truncated,
            "classification": {name: cls.value for name, cls in self.classification.items()},
            "warnings": list(self.warnings),
            "basis_rows": list(self.basis_labels),
            "null_basis_numeric": [
                [[rat(x) for x in col] for col in per_point]
                for per_point in self.null_basis_numeric
            ],
            "verified_null_vectors": [
                [to_string(e) for e in vec] for vec in self.verified_null_vectors
            ],
            "sample_points": [
                {name: rat(v) for name, v in pt.items()} for pt in self.sample_points
            ],
            "sample_seeds": list(self.sample_seeds),
            "pole_resamples": self.pole_resamples,
            "config": dict(self.config),
        }


def classify_variables(cod: Codistribution,
                       candidate_null_vectors: Sequence[Sequence[Expr]] = ()) -> ObservabilityReport:
    """Column-removal classification plus numeric kernels per point.

    A variable is observable iff removing its column drops the rank by
    one at every sample point; disagreement across points downgrades to
    indeterminable with a warning.  ``candidate_null_vectors`` that
    verify against the spanning rows are recorded in the report.
    """
    sys = cod.system
    n = cod.state_dim
    warnings: list[str] = []
    classification: dict[str, Classification] = {}

    per_point_ranks = [m.rank() for m in cod.basis_matrices]
    for j, name in enumerate(sys.state):
        drops = [m.rank_without_column(j) == r - 1
                 for m, r in zip(cod.basis_matrices, per_point_ranks)]
        if all(drops):
            classification[name] = Classification.OBSERVABLE
        else:
            classification[name] = Classification.INDETERMINABLE
            if any(drops):
                warnings.append(
                    f"variable '{name}' classified observable at some sample points "
                    "only; reported indeterminable")

    null_bases: list[list[list[Fraction]]] = []
    for m in cod.basis_matrices:
        kern = m.null_space()
        cols = [[Fraction(kern.data[i][c]) for i in range(kern.rows)]
                for c in range(kern.cols)]
        null_bases.append(cols)

    verified = [list(vec) for vec in candidate_null_vectors
                if verify_null_vector(cod, vec)]

    return ObservabilityReport(
        state=sys.state,
        state_dim=n,
        rank_history=list(cod.rank_history),
        final_rank=cod.final_rank,
        kernel_dim=n - cod.final_rank,
        truncated=cod.truncated,
        classification=classification,
        warnings=warnings,
        basis_labels=[row.label() for row in cod.basis_rows()],
        null_basis_numeric=null_bases,
        verified_null_vectors=verified,
        sample_points=list(cod.sample_points),
        sample_seeds=list(cod.point_seeds),
        pole_resamples=cod.pole_resamples,
        config={"max_order": max((k for k, _ in cod.rank_history), default=0),
                "points": len(cod.sample_points)},
    )


def verify_null_vector(cod: Codistribution, n_vec: Sequence[Expr]) -> bool:
    """True iff every spanning row annihilates ``n_vec`` at the shared
    sample points (zero dot product, exact)."""
    if len(n_vec) != cod.state_dim:
        raise ValueError(f"null vector has {len(n_vec)} entries, "
                         f"expected {cod.state_dim}")
    from .expr import ZERO, add, mul

    for row in cod.basis_rows():
        dot = add(*[mul(g, v) for g, v in zip(row.gradient, n_vec)
                    if not (g == ZERO or v == ZERO)])
        for pt in cod.sample_points:
            if evaluate(dot, pt) != 0:
                return False
    return True


def analyze(sys: AffineControlSystem,
            max_order: int = DEFAULT_MAX_ORDER,
            points: int = DEFAULT_POINTS,
            seed: int = 0,
            candidate_null_vectors: Sequence[Sequence[Expr]] = ()) -> ObservabilityReport:
    """Constraint conversion + codistribution + classification in one call."""
    from .system import apply_constraints

    standard = apply_constraints(sys, seed=seed)
    cod = build_codistribution(standard, max_order=max_order, points=points, seed=seed)
    report = classify_variables(cod, candidate_null_vectors)
    report.config.update({"max_order": max_order, "points": points, "seed": seed})
    return report
