"""Control-affine system models with linear constraints, and the
conversion procedures that reduce a constrained model to standard form.

A standard-form system is

    x' = f0(x) + sum_i fi(x) * u_i,    y = h(x)

with no constraints.  Four constraint shapes are supported:

    zero_state    0 = c0(x)
    const_state   d = c0(x)                      (d an unknown constant)
    zero_affine   0 = c0(x) + sum_i ci(x) * u_i
    const_affine  d = c0(x) + sum_i ci(x) * u_i

Conversion eliminates a state variable (zero_state), augments the state
with the unknown constant d and then eliminates (const_state), or solves
the constraint for one input, substitutes, promotes the remaining
constrained inputs to states driven by new derivative inputs, and
exposes the solved input and the promoted inputs as extra observations
(zero_affine / const_affine).  Multi-dimensional constraints are lists
processed sequentially in declaration order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .expr import (
    DEFAULT_TRIALS,
    DivisionByZeroError,
    Expr,
    ONE,
    ZERO,
    add,
    is_zero_expr,
    mul,
    neg,
    substitute,
    var,
)


class ConversionError(Exception):
    """Base class for constraint-conversion failures."""


class NotAffineInVariableError(ConversionError):
    pass


class NotAffineInInputError(ConversionError):
    pass


class CoefficientGenericallyZeroError(ConversionError):
    pass


class NoSolvableVariableError(ConversionError):
    pass


class SolveForIsDError(ConversionError):
    pass


class AffinityBrokenError(ConversionError):
    pass


class ConstraintKind(str, Enum):
    ZERO_STATE = "zero_state"
    CONST_STATE = "const_state"
    ZERO_AFFINE = "zero_affine"
    CONST_AFFINE = "const_affine"

    @property
    def has_inputs(self) -> bool:
        return self in (ConstraintKind.ZERO_AFFINE, ConstraintKind.CONST_AFFINE)

    @property
    def has_constant(self) -> bool:
        return self in (ConstraintKind.CONST_STATE, ConstraintKind.CONST_AFFINE)


@dataclass(frozen=True)
class Constraint:
    """One scalar constraint dimension.

    ``c0`` is an expression over the state (and declared constants);
    ``input_terms`` pairs input names with state-dependent coefficients
    and must be empty exactly for the two state-only kinds.  ``solve_for``
    optionally names the state variable / input to eliminate; ``d_name``
    optionally names the unknown constant introduced by the const kinds.
    """

    kind: ConstraintKind
    c0: Expr
    input_terms: tuple[tuple[str, Expr], ...] = ()
    solve_for: str | None = None
    d_name: str | None = None


@dataclass(frozen=True)
class AffineControlSystem:
    state: tuple[str, ...]
    inputs: tuple[str, ...]
    drift: tuple[Expr, ...]
    input_fields: tuple[tuple[Expr, ...], ...]
    outputs: tuple[tuple[str, Expr], ...]
    constants: tuple[str, ...] = ()
    constraints: tuple[Constraint, ...] = ()

    @property
    def n_states(self) -> int:
        return len(self.state)

    @property
    def n_inputs(self) -> int:
        return len(self.inputs)

    def field(self, index: int) -> tuple[Expr, ...]:
        """Vector field by index: 0 is the drift, 1..m the input fields."""
        if index == 0:
            return self.drift
        if 1 <= index <= len(self.input_fields):
            return self.input_fields[index - 1]
        raise IndexError(f"field index {index} out of range 0..{len(self.input_fields)}")

    def output_exprs(self) -> tuple[Expr, ...]:
        return tuple(e for _, e in self.outputs)

    def symbol_names(self) -> tuple[str, ...]:
        """All names a point must assign: state plus declared constants."""
        return self.state + self.constants


def validate(sys: AffineControlSystem) -> list[str]:
    """Check the structural invariants; returns human-readable violations."""
    diags: list[str] = []
    n = sys.n_states
    names = list(sys.state) + list(sys.inputs) + list(sys.constants)
    seen: set[str] = set()
    for name in names:
        if name in seen:
            diags.append(f"duplicate symbol name '{name}'")
        seen.add(name)
    allowed = set(sys.state) | set(sys.constants)
    input_set = set(sys.inputs)

    if len(sys.drift) != n:
        diags.append(f"f_0 has {len(sys.drift)} entries, expected {n}")
    for i, f in enumerate(sys.input_fields, start=1):
        if len(f) != n:
            diags.append(f"f_{i} has {len(f)} entries, expected {n}")
    if len(sys.input_fields) != len(sys.inputs):
        diags.append(f"{len(sys.input_fields)} input fields for {len(sys.inputs)} inputs")

    def check_exprs(entries, where: str):
        for k, e in enumerate(entries):
            fv = e.free_variables()
            for u in sorted(fv & input_set):
                diags.append(f"input '{u}' appears in {where} entry {k}")
            for s in sorted(fv - allowed - input_set):
                diags.append(f"unknown symbol '{s}' in {where} entry {k}")

    check_exprs(sys.drift, "drift")
    for i, f in enumerate(sys.input_fields, start=1):
        check_exprs(f, f"f_{i}")
    for hname, e in sys.outputs:
        fv = e.free_variables()
        for u in sorted(fv & input_set):
            diags.append(f"input '{u}' appears in output '{hname}'")
        for s in sorted(fv - allowed - input_set):
            diags.append(f"unknown symbol '{s}' in output '{hname}'")

    for ci, con in enumerate(sys.constraints):
        if con.kind.has_inputs and not con.input_terms:
            diags.append(f"constraint {ci} is {con.kind.value} but has no input terms")
        if not con.kind.has_inputs and con.input_terms:
            diags.append(f"constraint {ci} is {con.kind.value} but has input terms")
        fv = con.c0.free_variables()
        for s in sorted(fv - allowed):
            diags.append(f"unknown symbol '{s}' in constraint {ci}")
        for uname, coeff in con.input_terms:
            if uname not in input_set:
                diags.append(f"constraint {ci} references unknown input '{uname}'")
            bad = coeff.free_variables() - allowed
            for s in sorted(bad):
                diags.append(f"unknown symbol '{s}' in constraint {ci} coefficient of '{uname}'")
    return diags


def _subst_vector(entries: tuple[Expr, ...], bindings) -> tuple[Expr, ...]:
    return tuple(substitute(e, bindings) for e in entries)


def _subst_constraint(con: Constraint, bindings) -> Constraint:
    return replace(
        con,
        c0=substitute(con.c0, bindings),
        input_terms=tuple((u, substitute(c, bindings)) for u, c in con.input_terms),
    )


def _affine_split(c: Expr, name: str, trials: int, seed: int) -> tuple[Expr, Expr]:
    """Split c = alpha*name + beta with alpha, beta structurally free of name.

    Affinity is checked via the second derivative; the parts are then
    rebuilt by substitution (beta = c at name=0, alpha = c at name=1 minus
    beta) so that no structural remnant of ``name`` survives, since light
    simplification would not cancel one.
    """
    alpha = c.diff(name)
    if name in alpha.free_variables() and not is_zero_expr(alpha.diff(name), trials, seed):
        raise NotAffineInVariableError(f"constraint is not affine in '{name}'")
    try:
        beta = substitute(c, {name: ZERO})
        if name in alpha.free_variables():
            alpha = add(substitute(c, {name: ONE}), neg(beta))
    except DivisionByZeroError:
        raise NotAffineInVariableError(
            f"constraint has a structural pole in '{name}'; cannot solve for it"
        ) from None
    return alpha, beta


def _fresh_d_name(sys: AffineControlSystem, requested: str | None) -> str:
    taken = set(sys.state) | set(sys.inputs) | set(sys.constants)
    if requested is not None:
        if requested in taken:
            raise ConversionError(f"constant name '{requested}' already in use")
        return requested
    base = "d"
    if base not in taken:
        return base
    k = 2
    while f"{base}{k}" in taken:
        k += 1
    return f"{base}{k}"


def convert_zero_state(sys: AffineControlSystem, con: Constraint,
                       trials: int = DEFAULT_TRIALS, seed: int = 0) -> AffineControlSystem:
    """Eliminate a state variable using a 0 = c0(x) constraint.

    The constraint must be affine in the solved variable with a
    generically nonzero coefficient; the solved expression replaces the
    variable in the drift, every input field, every output, and any
    remaining constraints.
    """
    if con.kind is not ConstraintKind.ZERO_STATE:
        raise ConversionError(f"expected zero_state constraint, got {con.kind.value}")
    if con.solve_for is not None:
        if con.solve_for not in sys.state:
            raise NoSolvableVariableError(f"'{con.solve_for}' is not a state variable")
        candidates = [con.solve_for]
        explicit = True
    else:
        candidates = [s for s in sys.state if s in con.c0.free_variables()]
        explicit = False

    x_p = None
    solved = None
    for cand in candidates:
        try:
            alpha, beta = _affine_split(con.c0, cand, trials, seed)
        except NotAffineInVariableError:
            if explicit:
                raise
            continue
        if is_zero_expr(alpha, trials, seed):
            if explicit:
                raise CoefficientGenericallyZeroError(
                    f"coefficient of '{cand}' in the constraint is generically zero")
            continue
        x_p = cand
        solved = neg(beta) / alpha  # 0 = alpha*x_p + beta  =>  x_p = -beta/alpha
        break
    if x_p is None:
        raise NoSolvableVariableError("no state variable with a generically nonzero "
                                      "affine coefficient in the constraint")

    bindings = {x_p: solved}
    idx = sys.state.index(x_p)
    new_state = sys.state[:idx] + sys.state[idx + 1:]

    def drop_and_subst(vec: tuple[Expr, ...]) -> tuple[Expr, ...]:
        return _subst_vector(vec[:idx] + vec[idx + 1:], bindings)

    remaining = tuple(_subst_constraint(c, bindings)
                      for c in sys.constraints if c is not con)
    return AffineControlSystem(
        state=new_state,
        inputs=sys.inputs,
        drift=drop_and_subst(sys.drift),
        input_fields=tuple(drop_and_subst(f) for f in sys.input_fields),
        outputs=tuple((name, substitute(e, bindings)) for name, e in sys.outputs),
        constants=sys.constants,
        constraints=remaining,
    )


def _augment_with_d(sys: AffineControlSystem, con: Constraint) -> tuple[AffineControlSystem, str]:
    d = _fresh_d_name(sys, con.d_name)
    return AffineControlSystem(
        state=sys.state + (d,),
        inputs=sys.inputs,
        drift=sys.drift + (ZERO,),
        input_fields=tuple(f + (ZERO,) for f in sys.input_fields),
        outputs=sys.outputs,
        constants=sys.constants,
        constraints=sys.constraints,
    ), d


def convert_const_state(sys: AffineControlSystem, con: Constraint,
                        trials: int = DEFAULT_TRIALS, seed: int = 0) -> AffineControlSystem:
    """Handle d = c0(x): add d as an unknown constant state, then eliminate.

    The intermediate output c0(x) - d is discharged immediately by the
    zero-state substitution (it stays in the output list, where it reduces
    to an identically zero row); solving for d itself is rejected since
    that would undo the constraint.
    """
    if con.kind is not ConstraintKind.CONST_STATE:
        raise ConversionError(f"expected const_state constraint, got {con.kind.value}")
    aug, d = _augment_with_d(sys, con)
    if con.solve_for == d:
        raise SolveForIsDError(f"cannot solve the constraint for its own constant '{d}'")
    residual = add(con.c0, neg(var(d)))
    out_name = f"const_{d}"
    aug = replace(aug, outputs=aug.outputs + ((out_name, residual),))
    zero_con = Constraint(kind=ConstraintKind.ZERO_STATE, c0=residual,
                          solve_for=con.solve_for)
    converted = convert_zero_state(
        replace(aug, constraints=(zero_con,) + tuple(c for c in sys.constraints if c is not con)),
        zero_con, trials=trials, seed=seed)
    return converted


def convert_zero_affine(sys: AffineControlSystem, con: Constraint,
                        trials: int = DEFAULT_TRIALS, seed: int = 0,
                        extra_constant: Expr | None = None) -> AffineControlSystem:
    """Handle 0 = c0(x) + sum ci(x)*u_i by eliminating one constrained input.

    The solved input u_o is substituted into the process equation, the
    remaining constrained inputs u_r are promoted to state variables with
    fresh derivative inputs, and u_o (as the solved expression) plus every
    u_r become additional observations.  ``extra_constant`` is the d term
    contributed by the const_affine path (the constraint then reads
    0 = c0 - d + sum ci*u_i).
    """
    if con.kind is not ConstraintKind.ZERO_AFFINE and extra_constant is None:
        raise ConversionError(f"expected zero_affine constraint, got {con.kind.value}")
    if not con.input_terms:
        raise NotAffineInInputError("affine constraint lists no input terms")
    term_map = dict(con.input_terms)
    if len(term_map) != len(con.input_terms):
        raise ConversionError("duplicate input in constraint terms")
    for uname in term_map:
        if uname not in sys.inputs:
            raise NotAffineInInputError(f"'{uname}' is not an input of the system")

    if con.solve_for is not None:
        if con.solve_for not in term_map:
            raise NotAffineInInputError(
                f"'{con.solve_for}' does not appear in the constraint's input terms")
        candidates = [con.solve_for]
        explicit = True
    else:
        candidates = [u for u in sys.inputs if u in term_map]
        explicit = False

    u_o = None
    for cand in candidates:
        if is_zero_expr(term_map[cand], trials, seed):
            if explicit:
                raise CoefficientGenericallyZeroError(
                    f"coefficient of '{cand}' in the constraint is generically zero")
            continue
        u_o = cand
        break
    if u_o is None:
        raise NoSolvableVariableError("no constrained input has a generically "
                                      "nonzero coefficient")

    c_o = term_map[u_o]
    u_r = tuple(u for u, _ in con.input_terms if u != u_o)
    # u_o = q0(x) + sum_r q_r(x) * u_r
    numer0 = neg(con.c0) if extra_constant is None else add(extra_constant, neg(con.c0))
    q0 = numer0 / c_o
    q_r = {u: neg(term_map[u]) / c_o for u in u_r}
    solved_expr = add(q0, *[mul(q_r[u], var(u)) for u in u_r])

    o_idx = sys.inputs.index(u_o)
    f_o = sys.input_fields[o_idx]
    kept = [(i, u) for i, u in enumerate(sys.inputs) if u != u_o and u not in u_r]

    n_old = sys.n_states
    n_new = n_old + len(u_r)

    def extend(vec: tuple[Expr, ...]) -> list[Expr]:
        return list(vec) + [ZERO] * len(u_r)

    new_drift = extend(sys.drift)
    for k in range(n_old):
        if not f_o[k] == ZERO:
            new_drift[k] = add(new_drift[k], mul(f_o[k], q0))
    for u in u_r:
        r_idx = sys.inputs.index(u)
        f_r = sys.input_fields[r_idx]
        uvar = var(u)
        for k in range(n_old):
            coef = add(f_r[k], mul(f_o[k], q_r[u]))
            if coef == ZERO:
                continue
            new_drift[k] = add(new_drift[k], mul(coef, uvar))

    new_fields = [tuple(extend(sys.input_fields[i])) for i, _ in kept]
    new_inputs = [u for _, u in kept]
    for j, u in enumerate(u_r):
        dot_name = f"{u}_dot"
        if dot_name in set(sys.state) | set(sys.inputs) | set(sys.constants):
            raise ConversionError(f"derivative input name '{dot_name}' already in use")
        e_vec: list[Expr] = [ZERO] * n_new
        e_vec[n_old + j] = ONE
        new_fields.append(tuple(e_vec))
        new_inputs.append(dot_name)

    new_outputs = list(sys.outputs)
    for u in u_r:
        new_outputs.append((u, var(u)))
    new_outputs.append((u_o, solved_expr))

    remaining = []
    for c in sys.constraints:
        if c is con:
            continue
        extra_c0 = []
        kept_terms = []
        for uname, coeff in c.input_terms:
            if uname == u_o:
                extra_c0.append(mul(coeff, solved_expr))
            elif uname in u_r:
                extra_c0.append(mul(coeff, var(uname)))
            else:
                kept_terms.append((uname, coeff))
        remaining.append(replace(c, c0=add(c.c0, *extra_c0), input_terms=tuple(kept_terms)))

    result = AffineControlSystem(
        state=sys.state + u_r,
        inputs=tuple(new_inputs),
        drift=tuple(new_drift),
        input_fields=tuple(new_fields),
        outputs=tuple(new_outputs),
        constants=sys.constants,
        constraints=tuple(remaining),
    )
    _check_affinity(result)
    return result


def _check_affinity(sys: AffineControlSystem) -> None:
    input_set = set(sys.inputs)
    for vec, label in [(sys.drift, "drift")] + [
            (f, f"f_{i}") for i, f in enumerate(sys.input_fields, start=1)]:
        for e in vec:
            if e.free_variables() & input_set:
                raise AffinityBrokenError(
                    f"substitution introduced inputs into {label}; "
                    "the model is not supported")


def convert_const_affine(sys: AffineControlSystem, con: Constraint,
                         trials: int = DEFAULT_TRIALS, seed: int = 0) -> AffineControlSystem:
    """Handle d = c0(x) + sum ci(x)*u_i: add d as a constant state, then
    reduce to the zero_affine procedure with c0 replaced by c0 - d."""
    if con.kind is not ConstraintKind.CONST_AFFINE:
        raise ConversionError(f"expected const_affine constraint, got {con.kind.value}")
    aug, d = _augment_with_d(sys, con)
    rewritten = Constraint(kind=ConstraintKind.ZERO_AFFINE, c0=con.c0,
                           input_terms=con.input_terms, solve_for=con.solve_for)
    aug = replace(aug, constraints=(rewritten,) + tuple(c for c in sys.constraints if c is not con))
    return convert_zero_affine(aug, rewritten, trials=trials, seed=seed,
                               extra_constant=var(d))


def _normalize_kind(con: Constraint) -> Constraint:
    """Re-kind an affine constraint whose input terms were all resolved
    away by earlier conversions."""
    if con.kind.has_inputs and not con.input_terms:
        new_kind = (ConstraintKind.CONST_STATE if con.kind.has_constant
                    else ConstraintKind.ZERO_STATE)
        return replace(con, kind=new_kind)
    return con


_CONVERTERS = {
    ConstraintKind.ZERO_STATE: convert_zero_state,
    ConstraintKind.CONST_STATE: convert_const_state,
    ConstraintKind.ZERO_AFFINE: convert_zero_affine,
    ConstraintKind.CONST_AFFINE: convert_const_affine,
}


def apply_constraints(sys: AffineControlSystem,
                      trials: int = DEFAULT_TRIALS, seed: int = 0) -> AffineControlSystem:
    """Fold all constraints in declaration order into standard form."""
    current = sys
    while current.constraints:
        con = _normalize_kind(current.constraints[0])
        current = replace(current, constraints=(con,) + current.constraints[1:])
        current = _CONVERTERS[con.kind](current, con, trials=trials, seed=seed)
    return current
