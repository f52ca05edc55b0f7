"""Exact symbolic expressions restricted to multivariate rational functions.

The expression language has exact rational constants, named variables,
sums, products, negation, quotients and integer powers.  There is no
canonical simplification: equality of two expressions is decided
probabilistically by evaluating both at random integer points
(Schwartz-Zippel identity testing), which is all the rank machinery
downstream ever needs.  Construction applies only light local cleanup
(constant folding, 0/1 absorption, flattening of nested sums/products).

Expressions are immutable and share subtrees freely; per-node caches
(hash, free variables, partial derivatives) make repeated differentiation
and evaluation of large derived expressions cheap.
"""

from __future__ import annotations

from fractions import Fraction
from random import Random
from typing import Iterable, Mapping, Sequence, Union

Rat = Union[int, Fraction]
Point = Mapping[str, Rat]

SAMPLE_LO = -(10**6)
SAMPLE_HI = 10**6
DEFAULT_TRIALS = 5
MAX_POLE_RETRIES = 100


class ExprError(Exception):
    """Base class for expression-level errors."""


class ParseError(ExprError):
    """Raised on malformed expression text.

    Carries the byte offset of the offending token and the set of token
    kinds that would have been accepted there.
    """

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset
        self.expected = expected


class IntegerExponentError(ParseError):
    """Raised when an exponent does not reduce to an integer constant."""


class DivisionByZeroError(ExprError):
    """A denominator vanished at the evaluation point (pole hit)."""


class MissingVariableError(ExprError):
    """The evaluation point does not assign some free variable."""

    def __init__(self, name: str):
        super().__init__(f"no value assigned for variable '{name}'")
        self.name = name


class ResampleExhaustedError(ExprError):
    """Too many consecutive evaluation points hit a pole."""


def _as_fraction(value: Rat) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class Expr:
    """Immutable node of a rational-function expression tree."""

    __slots__ = ("_hash", "_fvars", "_dcache")

    def __init__(self) -> None:
        self._fvars: frozenset[str] | None = None
        self._dcache: dict[str, "Expr"] | None = None

    # -- arithmetic sugar ------------------------------------------------
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return add(self, neg(_coerce(other)))

    def __rsub__(self, other):
        return add(_coerce(other), neg(self))

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __pow__(self, exponent):
        return intpow(self, exponent)

    def __neg__(self):
        return neg(self)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return to_string(self)

    __str__ = __repr__

    # -- structure -------------------------------------------------------
    def children(self) -> tuple["Expr", ...]:
        return ()

    def free_variables(self) -> frozenset[str]:
        fv = self._fvars
        if fv is None:
            parts = [c.free_variables() for c in self.children()]
            fv = frozenset().union(*parts) if parts else frozenset()
            self._fvars = fv
        return fv

    # -- core operations (dispatched per node type) ----------------------
    def _diff(self, v: str) -> "Expr":
        raise NotImplementedError

    def diff(self, v: str) -> "Expr":
        """Partial derivative with respect to variable name ``v`` (cached)."""
        if v not in self.free_variables():
            return ZERO
        cache = self._dcache
        if cache is None:
            cache = {}
            self._dcache = cache
        hit = cache.get(v)
        if hit is None:
            hit = self._diff(v)
            cache[v] = hit
        return hit

    def _eval(self, point: Point, memo: dict) -> Rat:
        raise NotImplementedError

    def _subst(self, bindings: Mapping[str, "Expr"], memo: dict) -> "Expr":
        raise NotImplementedError


class Constant(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Rat):
        super().__init__()
        v = _as_fraction(value)
        # kept as int when integral so evaluation stays in fast int arithmetic
        self.value: Rat = int(v) if v.denominator == 1 else v
        self._hash = hash(("c", self.value))
        self._fvars = frozenset()

    def __eq__(self, other):
        return self is other or (isinstance(other, Constant) and self.value == other.value)

    def _diff(self, v: str) -> Expr:
        return ZERO

    def _eval(self, point: Point, memo: dict) -> Rat:
        return self.value

    def _subst(self, bindings, memo):
        return self


class Variable(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        super().__init__()
        self.name = name
        self._hash = hash(("v", name))
        self._fvars = frozenset((name,))

    def __eq__(self, other):
        return self is other or (isinstance(other, Variable) and self.name == other.name)

    def _diff(self, v: str) -> Expr:
        return ONE if v == self.name else ZERO

    def _eval(self, point: Point, memo: dict) -> Rat:
        try:
            return point[self.name]
        except KeyError:
            raise MissingVariableError(self.name) from None

    def _subst(self, bindings, memo):
        return bindings.get(self.name, self)


def _children_eq(a: Expr, b: Expr) -> bool:
    if a is b:
        return True
    if type(a) is not type(b) or a._hash != b._hash:
        return False
    ca, cb = a.children(), b.children()
    if isinstance(a, Constant):
        return a.value == b.value  # type: ignore[attr-defined]
    if isinstance(a, Variable):
        return a.name == b.name  # type: ignore[attr-defined]
    if isinstance(a, IntPow) and a.exponent != b.exponent:  # type: ignore[attr-defined]
        return False
    if len(ca) != len(cb):
        return False
    return all(_children_eq(x, y) for x, y in zip(ca, cb))


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple[Expr, ...]):
        super().__init__()
        self.terms = terms
        self._hash = hash(("+",) + tuple(t._hash for t in terms))

    def __eq__(self, other):
        return _children_eq(self, other) if isinstance(other, Expr) else NotImplemented

    def children(self):
        return self.terms

    def _diff(self, v: str) -> Expr:
        return add(*[t.diff(v) for t in self.terms])

    def _eval(self, point: Point, memo: dict) -> Rat:
        key = id(self)
        hit = memo.get(key)
        if hit is not None:
            return hit[1]
        total: Rat = 0
        for t in self.terms:
            total = total + t._eval(point, memo)
        memo[key] = (self, total)
        return total

    def _subst(self, bindings, memo):
        key = id(self)
        hit = memo.get(key)
        if hit is not None:
            return hit[1]
        out = add(*[t._subst(bindings, memo) for t in self.terms])
        memo[key] = (self, out)
        return out


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: tuple[Expr, ...]):
        super().__init__()
        self.factors = factors
        self._hash = hash(("*",) + tuple(f._hash for f in factors))

    def __eq__(self, other):
        return _children_eq(self, other) if isinstance(other, Expr) else NotImplemented

    def children(self):
        return self.factors

    def _diff(self, v: str) -> Expr:
        fs = self.factors
        terms = []
        for i, f in enumerate(fs):
            dfi = f.diff(v)
            if isinstance(dfi, Constant) and dfi.value == 0:
                continue
            terms.append(mul(*fs[:i], dfi, *fs[i + 1:]))
        return add(*terms)

    def _eval(self, point: Point, memo: dict) -> Rat:
        key = id(self)
        hit = memo.get(key)
        if hit is not None:
            return hit[1]
        total: Rat = 1
        for f in self.factors:
            total = total * f._eval(point, memo)
        memo[key] = (self, total)
        return total

    def _subst(self, bindings, memo):
        key = id(self)
        hit = memo.get(key)
        if hit is not None:
            return hit[1]
        out = mul(*[f._subst(bindings, memo) for f in self.factors])
        memo[key] = (self, out)
        return out


class Neg(Expr):
    __slots__ = ("child",)

    def __init__(self, child: Expr):
        super().__init__()
        self.child = child
        self._hash = hash(("neg", child._hash))

    def __eq__(self, other):
        return _children_eq(self, other) if isinstance(other, Expr) else NotImplemented

    def children(self):
        return (self.child,)

    def _diff(self, v: str) -> Expr:
        return neg(self.child.diff(v))

    def _eval(self, point: Point, memo: dict) -> Rat:
        return -self.child._eval(point, memo)

    def _subst(self, bindings, memo):
        return neg(self.child._subst(bindings, memo))


class Div(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num: Expr, den: Expr):
        super().__init__()
        self.num = num
        self.den = den
        self._hash = hash(("/", num._hash, den._hash))

    def __eq__(self, other):
        return _children_eq(self, other) if isinstance(other, Expr) else NotImplemented

    def children(self):
        return (self.num, self.den)

    def _diff(self, v: str) -> Expr:
        # (n/d)' = (n'·d − n·d') / d²
        n, d = self.num, self.den
        return div(add(mul(n.diff(v), d), neg(mul(n, d.diff(v)))), intpow(d, 2))

    def _eval(self, point: Point, memo: dict) -> Rat:
        key = id(self)
        hit = memo.get(key)
        if hit is not None:
            return hit[1]
        n = self.num._eval(point, memo)
        d = self.den._eval(point, memo)
        if d == 0:
            raise DivisionByZeroError(f"denominator {to_string(self.den)} vanished")
        if isinstance(n, int) and isinstance(d, int):
            out: Rat = Fraction(n, d)
            if out.denominator == 1:
                out = int(out)
        else:
            out = n / d
        memo[key] = (self, out)
        return out

    def _subst(self, bindings, memo):
        key = id(self)
        hit = memo.get(key)
        if hit is not None:
            return hit[1]
        out = div(self.num._subst(bindings, memo), self.den._subst(bindings, memo))
        memo[key] = (self, out)
        return out


class IntPow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: int):
        super().__init__()
        self.base = base
        self.exponent = exponent
        self._hash = hash(("^", base._hash, exponent))

    def __eq__(self, other):
        return _children_eq(self, other) if isinstance(other, Expr) else NotImplemented

    def children(self):
        return (self.base,)

    def _diff(self, v: str) -> Expr:
        n = self.exponent
        return mul(Constant(n), intpow(self.base, n - 1), self.base.diff(v))

    def _eval(self, point: Point, memo: dict) -> Rat:
        key = id(self)
        hit = memo.get(key)
        if hit is not None:
            return hit[1]
        out = self.base._eval(point, memo) ** self.exponent
        memo[key] = (self, out)
        return out

    def _subst(self, bindings, memo):
        return intpow(self.base._subst(bindings, memo), self.exponent)


# -- smart constructors (light local simplification only) -----------------

ZERO = Constant(0)
ONE = Constant(1)


def _coerce(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return Constant(value)
    raise TypeError(f"cannot use {type(value).__name__} as an expression")


def const(value: Rat) -> Constant:
    return Constant(value)


def var(name: str) -> Variable:
    return Variable(name)


def add(*terms: Expr) -> Expr:
    flat: list[Expr] = []
    acc = Fraction(0)
    for t in terms:
        if isinstance(t, Add):
            children = t.terms
        else:
            children = (t,)
        for c in children:
            if isinstance(c, Constant):
                acc += c.value
            else:
                flat.append(c)
    if acc != 0:
        flat.append(Constant(acc))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*factors: Expr) -> Expr:
    flat: list[Expr] = []
    acc = Fraction(1)
    for f in factors:
        if isinstance(f, Mul):
            children = f.factors
        else:
            children = (f,)
        for c in children:
            if isinstance(c, Constant):
                acc *= c.value
                if acc == 0:
                    return ZERO
            else:
                flat.append(c)
    if not flat:
        return Constant(acc)
    if acc != 1:
        flat.insert(0, Constant(acc))
    if len(flat) == 1:
        return flat[0]
    return Mul(tuple(flat))


def neg(e: Expr) -> Expr:
    if isinstance(e, Constant):
        return Constant(-_as_fraction(e.value))
    if isinstance(e, Neg):
        return e.child
    return Neg(e)


def div(num: Expr, den: Expr) -> Expr:
    if isinstance(den, Constant):
        if den.value == 0:
            raise DivisionByZeroError("literal zero denominator")
        return mul(Constant(Fraction(1) / _as_fraction(den.value)), num)
    if isinstance(num, Constant) and num.value == 0:
        return ZERO
    return Div(num, den)


def intpow(base: Expr, exponent: int) -> Expr:
    if not isinstance(exponent, int):
        raise TypeError("exponent must be an integer")
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Constant):
        if exponent < 0 and base.value == 0:
            raise DivisionByZeroError("zero base with negative exponent")
        return Constant(_as_fraction(base.value) ** exponent)
    if exponent < 0:
        return Div(ONE, intpow(base, -exponent))
    return IntPow(base, exponent)


# -- public operations -----------------------------------------------------

def differentiate(e: Expr, v: str) -> Expr:
    """Return de/dv by structural rules; zero when e does not involve v."""
    return e.diff(v)


def gradient(e: Expr, names: Sequence[str]) -> tuple[Expr, ...]:
    return tuple(e.diff(n) for n in names)


def evaluate(e: Expr, point: Point, memo: dict | None = None) -> Rat:
    """Exact value of ``e`` at ``point``.

    Raises DivisionByZeroError on a pole and MissingVariableError when a
    free variable has no assignment.  ``memo`` may be shared between calls
    evaluating different expressions at the same point; shared subtrees
    are then only computed once.
    """
    return e._eval(point, {} if memo is None else memo)


def substitute(e: Expr, bindings: Mapping[str, Expr]) -> Expr:
    """Simultaneous substitution; right-hand sides are not re-substituted."""
    return e._subst(bindings, {})


def sample_point(names: Iterable[str], rng: Random,
                 lo: int = SAMPLE_LO, hi: int = SAMPLE_HI) -> dict[str, int]:
    return {n: rng.randint(lo, hi) for n in names}


def equals_random(a: Expr, b: Expr, trials: int = DEFAULT_TRIALS,
                  seed: int = 0, lo: int = SAMPLE_LO, hi: int = SAMPLE_HI) -> bool:
    """Probabilistic equality: a == b at ``trials`` random integer points.

    False positives are bounded by Schwartz-Zippel; there are no false
    negatives.  Points hitting a pole of either side are resampled, up to
    MAX_POLE_RETRIES consecutive misses (then ResampleExhaustedError).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    names = sorted(a.free_variables() | b.free_variables())
    rng = Random(seed)
    done = 0
    consecutive_poles = 0
    while done < trials:
        point = sample_point(names, rng, lo, hi)
        try:
            memo: dict = {}
            if a._eval(point, memo) != b._eval(point, memo):
                return False
        except DivisionByZeroError:
            consecutive_poles += 1
            if consecutive_poles >= MAX_POLE_RETRIES:
                raise ResampleExhaustedError(
                    f"{MAX_POLE_RETRIES} consecutive sample points hit a pole")
            continue
        consecutive_poles = 0
        done += 1
    return True


def is_zero_expr(e: Expr, trials: int = DEFAULT_TRIALS, seed: int = 0) -> bool:
    return equals_random(e, ZERO, trials=trials, seed=seed)


# -- parsing ----------------------------------------------------------------

_OPS = set("+-*/^()")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    # token kinds: "int", "name", or the operator character itself
    tokens: list[tuple[str, str, int]] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        if ch in _OPS:
            tokens.append((ch, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i,
                         expected=("int", "name") + tuple(sorted(_OPS)))
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}",
                             tok[2], expected=(kind,))
        return self.next()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected trailing token {tok[1]!r}", tok[2],
                             expected=("+", "-", "*", "/", "end"))
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.next()[0]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else add(e, neg(rhs))
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.next()[0]
            rhs = self.factor()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def factor(self) -> Expr:
        tok = self.peek()
        if tok[0] == "-":
            self.next()
            return neg(self.factor())
        e = self.atom()
        if self.peek()[0] == "^":
            self.next()
            e = intpow(e, self.exponent())
        return e

    def exponent(self) -> int:
        tok = self.peek()
        offset = tok[2]
        sign = 1
        if tok[0] == "-":
            self.next()
            sign = -1
            tok = self.peek()
        if tok[0] == "int":
            self.next()
            return sign * int(tok[1])
        if tok[0] == "(":
            # allow a parenthesized expression that folds to an integer
            self.next()
            inner = self.expr()
            self.expect(")")
            if isinstance(inner, Constant):
                v = _as_fraction(inner.value)
                if v.denominator == 1:
                    return sign * int(v)
            raise IntegerExponentError("exponent must be an integer", offset)
        raise IntegerExponentError("exponent must be an integer", offset)

    def atom(self) -> Expr:
        tok = self.next()
        kind, value, offset = tok
        if kind == "int":
            return Constant(int(value))
        if kind == "name":
            return Variable(value)
        if kind == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"expected a value, found {value or 'end of input'!r}",
                         offset, expected=("int", "name", "(", "-"))


def parse(text: str) -> Expr:
    """Parse expression text (precedence: ^ > unary - > */ > +-)."""
    return _Parser(text).parse()


# -- printing ---------------------------------------------------------------

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5


def _prec(e: Expr) -> int:
    if isinstance(e, Add):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, IntPow):
        return _PREC_POW
    if isinstance(e, Constant):
        return _PREC_ATOM if _as_fraction(e.value) >= 0 else _PREC_NEG
    return _PREC_ATOM


def _render(e: Expr, min_prec: int) -> str:
    s: str
    if isinstance(e, Constant):
        v = _as_fraction(e.value)
        s = f"{v.numerator}" if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    elif isinstance(e, Variable):
        s = e.name
    elif isinstance(e, Add):
        parts = [_render(e.terms[0], _PREC_ADD)]
        for t in e.terms[1:]:
            if isinstance(t, Neg):
                parts.append(" - " + _render(t.child, _PREC_MUL))
            elif isinstance(t, Constant) and _as_fraction(t.value) < 0:
                parts.append(" - " + _render(Constant(-_as_fraction(t.value)), _PREC_MUL))
            else:
                parts.append(" + " + _render(t, _PREC_ADD))
        s = "".join(parts)
    elif isinstance(e, Mul):
        s = "*".join(_render(f, _PREC_MUL + (1 if i else 0))
                     for i, f in enumerate(e.factors))
    elif isinstance(e, Div):
        s = _render(e.num, _PREC_MUL) + "/" + _render(e.den, _PREC_MUL + 1)
    elif isinstance(e, Neg):
        s = "-" + _render(e.child, _PREC_NEG)
    elif isinstance(e, IntPow):
        s = _render(e.base, _PREC_POW + 1) + "^" + str(e.exponent)
    else:  # pragma: no cover
        raise TypeError(f"unknown node {type(e)}")
    if _prec(e) < min_prec:
        return "(" + s + ")"
    return s


def to_string(e: Expr) -> str:
    """Render to text that parses back to an equivalent expression."""
    return _render(e, _PREC_ADD)
