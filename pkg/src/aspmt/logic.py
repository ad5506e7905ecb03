"""Sorts, terms and formulas over a many-sorted signature with real arithmetic.

Everything here is immutable.  Numbers are :class:`fractions.Fraction` so that
evaluation is exact; enum symbols (including ``true``/``false``) are plain
strings.  Negation is not a primitive: ``neg(F)`` builds ``F -> false``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

from .errors import DeclarationError, EvaluationError, SortError

Value = Union[Fraction, str]
ConstKey = tuple  # (name, arg values, step or None)

# --------------------------------------------------------------------------
# sorts


@dataclass(frozen=True)
class Sort:
    kind: str  # 'bool' | 'enum' | 'int' | 'real' | 'nonneg'
    symbols: tuple[str, ...] = ()
    lo: int = 0
    hi: int = 0
    name: str = field(default="", compare=False)

    @property
    def is_finite(self) -> bool:
        return self.kind in ("bool", "enum", "int")

    @property
    def is_numeric(self) -> bool:
        return self.kind in ("int", "real", "nonneg")

    def domain(self) -> tuple[Value, ...]:
        if self.kind in ("bool", "enum"):
            return self.symbols
        if self.kind == "int":
            return tuple(Fraction(k) for k in range(self.lo, self.hi + 1))
        raise SortError(f"sort {self} has no finite domain")

    def contains(self, value: Value) -> bool:
        if self.kind in ("bool", "enum"):
            return value in self.symbols
        if not isinstance(value, Fraction):
            return False
        if self.kind == "int":
            return value.denominator == 1 and self.lo <= value <= self.hi
        return self.kind == "real" or value >= 0

    def __str__(self) -> str:
        if self.name:
            return self.name
        if self.kind == "int":
            return f"{self.lo}..{self.hi}"
        if self.kind == "enum":
            return "{" + ",".join(self.symbols) + "}"
        return self.kind


BOOLEAN = Sort("bool", ("false", "true"), name="boolean")
REAL = Sort("real", name="real")
NONNEG_REAL = Sort("nonneg", name="realNonNeg")


def enum_sort(symbols: Iterable[str], name: str = "") -> Sort:
    symbols = tuple(symbols)
    if not symbols:
        raise SortError("enum sort must have at least one symbol")
    if len(set(symbols)) != len(symbols):
        raise SortError(f"duplicate symbols in enum sort {name or symbols}")
    return Sort("enum", symbols, name=name)


def int_range(lo: int, hi: int, name: str = "") -> Sort:
    if lo > hi:
        raise SortError(f"empty integer range {lo}..{hi}")
    return Sort("int", lo=lo, hi=hi, name=name)


# constant kinds
SIMPLE = "simpleFluent"
SD = "sdFluent"
ACTION = "action"
RIGID = "rigid"
KINDS = (SIMPLE, SD, ACTION, RIGID)


@dataclass(frozen=True)
class ConstantDecl:
    name: str
    arg_sorts: tuple[Sort, ...]
    value_sort: Sort
    kind: str
    additive: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DeclarationError(f"unknown constant kind {self.kind!r}")
        for s in self.arg_sorts:
            if not s.is_finite:
                raise SortError(f"argument sort of {self.name} must be finite, got {s}")

    @property
    def is_fluent(self) -> bool:
        return self.kind in (SIMPLE, SD)

    def instances(self) -> Iterator[tuple[Value, ...]]:
        return itertools.product(*(s.domain() for s in self.arg_sorts))


# --------------------------------------------------------------------------
# terms


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Term):
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Sym(Term):
    name: str


@dataclass(frozen=True)
class Var(Term):
    name: str
    sort: Sort


@dataclass(frozen=True)
class Const(Term):
    """Application ``name(args)`` of a declared constant, optionally time-stamped."""

    name: str
    args: tuple[Term, ...] = ()
    sort: Sort = REAL
    step: Optional[int] = None

    @property
    def key(self) -> ConstKey:
        return (self.name, tuple(_literal(a) for a in self.args), self.step)

    def at(self, step: Optional[int]) -> "Const":
        return Const(self.name, self.args, self.sort, step)


ARITH_OPS = ("+", "-", "*", "/")


@dataclass(frozen=True)
class BinOp(Term):
    op: str
    left: Term
    right: Term

    def __post_init__(self):
        if self.op not in ARITH_OPS:
            raise SortError(f"unknown arithmetic operator {self.op!r}")
        for t in (self.left, self.right):
            if isinstance(t, Sym) or (isinstance(t, (Var, Const)) and not t.sort.is_numeric):
                raise SortError(f"arithmetic on non-numeric term {show_term(t)}")
        if self.op == "/" and isinstance(self.right, Num) and self.right.value == 0:
            raise SortError("division by literal zero")


def _literal(t: Term) -> Value:
    if isinstance(t, Sym):
        return t.name
    if isinstance(t, Num):
        return t.value
    raise EvaluationError(f"constant argument {show_term(t)} is not ground")


def key_str(key: ConstKey) -> str:
    name, args, step = key
    s = name
    if args:
        s += "(" + ",".join(_show_value(a) for a in args) + ")"
    return s if step is None else f"{step}:{s}"


def value_term(value: Value) -> Term:
    return Num(value) if isinstance(value, Fraction) else Sym(value)


# --------------------------------------------------------------------------
# formulas


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Equal(Formula):
    left: Term
    right: Term


COMPARE_OPS = ("<", ">", "<=", ">=")


@dataclass(frozen=True)
class Compare(Formula):
    op: str
    left: Term
    right: Term

    def __post_init__(self):
        if self.op not in COMPARE_OPS:
            raise SortError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class _Falsum(Formula):
    pass


BOT = _Falsum()


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: Var
    body: Formula


def neg(f: Formula) -> Formula:
    return Implies(f, BOT)


TOP = neg(BOT)


def is_neg(f: Formula) -> bool:
    return isinstance(f, Implies) and f.right == BOT


def iff(a: Formula, b: Formula) -> Formula:
    return And(Implies(a, b), Implies(b, a))


def _fold(items: list, op) -> Formula:
    # balanced, so evaluation depth stays logarithmic in the number of items
    if len(items) == 1:
        return items[0]
    mid = len(items) // 2
    return op(_fold(items[:mid], op), _fold(items[mid:], op))


def conj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    return _fold(fs, And) if fs else TOP


def disj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    return _fold(fs, Or) if fs else BOT


def conjuncts(f: Formula) -> list[Formula]:
    out: list[Formula] = []
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, And):
            stack.append(g.right)
            stack.append(g.left)
        else:
            out.append(g)
    return out


def disjuncts(f: Formula) -> list[Formula]:
    out: list[Formula] = []
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Or):
            stack.append(g.right)
            stack.append(g.left)
        else:
            out.append(g)
    return out


def forall(vs: Iterable[Var], body: Formula) -> Formula:
    for v in reversed(list(vs)):
        body = Forall(v, body)
    return body


def exists(vs: Iterable[Var], body: Formula) -> Formula:
    for v in reversed(list(vs)):
        body = Exists(v, body)
    return body


def bool_atom(c: Term, value: bool = True) -> Formula:
    return Equal(c, Sym("true" if value else "false"))


# --------------------------------------------------------------------------
# traversal


def term_children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, BinOp):
        return (t.left, t.right)
    if isinstance(t, Const):
        return t.args
    return ()


def iter_terms(t: Term) -> Iterator[Term]:
    yield t
    for c in term_children(t):
        yield from iter_terms(c)


def atom_terms(f: Formula) -> Iterator[Term]:
    """Top-level terms of every atom in ``f``."""
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, (Equal, Compare)):
            yield g.left
            yield g.right
        elif isinstance(g, (And, Or, Implies)):
            stack.append(g.right)
            stack.append(g.left)
        elif isinstance(g, (Forall, Exists)):
            stack.append(g.body)


def term_vars(t: Term) -> set[Var]:
    return {s for s in iter_terms(t) if isinstance(s, Var)}


def term_constants(t: Term) -> list[Const]:
    return [s for s in iter_terms(t) if isinstance(s, Const)]


def free_vars(f: Formula) -> set[Var]:
    if isinstance(f, (Equal, Compare)):
        return term_vars(f.left) | term_vars(f.right)
    if isinstance(f, (And, Or, Implies)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Forall, Exists)):
        return free_vars(f.body) - {f.var}
    return set()


def constants(f: Formula) -> list[Const]:
    """Every constant occurrence in ``f`` (outermost and argument positions), in order."""
    out = []
    for t in atom_terms(f):
        out.extend(term_constants(t))
    return out


def map_terms(f: Formula, fn: Callable[[Term], Term]) -> Formula:
    """Rebuild ``f`` applying ``fn`` to the top-level term of every atom."""
    if isinstance(f, Equal):
        return Equal(fn(f.left), fn(f.right))
    if isinstance(f, Compare):
        return Compare(f.op, fn(f.left), fn(f.right))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(map_terms(f.left, fn), map_terms(f.right, fn))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, map_terms(f.body, fn))
    return f


def subst_term(t: Term, mapping: Mapping[Term, Term]) -> Term:
    """Replace sub-terms (variables or constants) according to ``mapping``."""
    if t in mapping:
        return mapping[t]
    if isinstance(t, BinOp):
        return BinOp(t.op, subst_term(t.left, mapping), subst_term(t.right, mapping))
    if isinstance(t, Const) and t.args:
        return Const(t.name, tuple(subst_term(a, mapping) for a in t.args), t.sort, t.step)
    return t


def subst(f: Formula, mapping: Mapping[Term, Term]) -> Formula:
    """Substitute free occurrences.  Bound variables shadow the mapping; no
    capture avoidance is attempted, so replacement terms must not mention
    variables bound inside ``f``."""
    if not mapping:
        return f
    if isinstance(f, Equal):
        return Equal(subst_term(f.left, mapping), subst_term(f.right, mapping))
    if isinstance(f, Compare):
        return Compare(f.op, subst_term(f.left, mapping), subst_term(f.right, mapping))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(subst(f.left, mapping), subst(f.right, mapping))
    if isinstance(f, (Forall, Exists)):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        return type(f)(f.var, subst(f.body, inner))
    return f


def stamp_term(t: Term, step: int, which: Callable[[Const], bool]) -> Term:
    if isinstance(t, Const):
        args = tuple(stamp_term(a, step, which) for a in t.args)
        return Const(t.name, args, t.sort, step if which(t) else t.step)
    if isinstance(t, BinOp):
        return BinOp(t.op, stamp_term(t.left, step, which), stamp_term(t.right, step, which))
    return t


def stamp(f: Formula, step: int, which: Callable[[Const], bool] = lambda c: True) -> Formula:
    """``i:F`` -- put ``step`` in front of every constant selected by ``which``."""
    return map_terms(f, lambda t: stamp_term(t, step, which))


def has_quantifier(f: Formula) -> bool:
    if isinstance(f, (Forall, Exists)):
        return True
    if isinstance(f, (And, Or, Implies)):
        return has_quantifier(f.left) or has_quantifier(f.right)
    return False


# --------------------------------------------------------------------------
# evaluation


def eval_term(t: Term, interp: Mapping[ConstKey, Value], env: Mapping[Var, Value] = {}) -> Value:
    if isinstance(t, Num):
        return t.value
    if isinstance(t, Sym):
        return t.name
    if isinstance(t, Var):
        try:
            return env[t]
        except KeyError:
            raise EvaluationError(f"unbound variable {t.name}") from None
    if isinstance(t, Const):
        key = (t.name, tuple(eval_term(a, interp, env) for a in t.args), t.step)
        try:
            return interp[key]
        except KeyError:
            raise DeclarationError(f"constant {key_str(key)} has no value") from None
    if isinstance(t, BinOp):
        a = eval_term(t.left, interp, env)
        b = eval_term(t.right, interp, env)
        if not (isinstance(a, Fraction) and isinstance(b, Fraction)):
            raise SortError(f"non-numeric operand in {show_term(t)}")
        if t.op == "+":
            return a + b
        if t.op == "-":
            return a - b
        if t.op == "*":
            return a * b
        if b == 0:
            raise EvaluationError(f"division by zero in {show_term(t)}")
        return a / b
    raise TypeError(f"not a term: {t!r}")


def _compare(op: str, a: Value, b: Value, tol: Optional[Fraction]) -> bool:
    if not (isinstance(a, Fraction) and isinstance(b, Fraction)):
        raise SortError(f"comparison {op} between non-numeric values {a!r}, {b!r}")
    slack = tol or 0
    if op == "<":
        return a < b + slack
    if op == ">":
        return a > b - slack
    if op == "<=":
        return a <= b + slack
    return a >= b - slack


def evaluate(
    f: Formula,
    interp: Mapping[ConstKey, Value],
    env: Mapping[Var, Value] | None = None,
    tol: Optional[Fraction] = None,
    real_domain: Optional[Iterable[Fraction]] = None,
) -> bool:
    """Classical truth value of ``f`` under ``interp``.

    Quantifiers over finite sorts range over the sort's domain.  Quantifiers
    over real sorts need an explicit finite ``real_domain`` (filtered by the
    variable's sort); without one an :class:`EvaluationError` is raised.  With
    ``tol`` set, numeric equalities and comparisons are decided up to ``tol``.
    """
    env = dict(env or {})
    domain = None if real_domain is None else tuple(real_domain)
    return _eval(f, interp, env, tol, domain)


def _eval(f, interp, env, tol, domain) -> bool:
    if isinstance(f, Equal):
        a = eval_term(f.left, interp, env)
        b = eval_term(f.right, interp, env)
        if tol is not None and isinstance(a, Fraction) and isinstance(b, Fraction):
            return abs(a - b) <= tol
        return a == b
    if isinstance(f, Compare):
        return _compare(f.op, eval_term(f.left, interp, env), eval_term(f.right, interp, env), tol)
    if f == BOT:
        return False
    if isinstance(f, And):
        return _eval(f.left, interp, env, tol, domain) and _eval(f.right, interp, env, tol, domain)
    if isinstance(f, Or):
        return _eval(f.left, interp, env, tol, domain) or _eval(f.right, interp, env, tol, domain)
    if isinstance(f, Implies):
        return (not _eval(f.left, interp, env, tol, domain)) or _eval(f.right, interp, env, tol, domain)
    if isinstance(f, (Forall, Exists)):
        v = f.var
        if v.sort.is_finite:
            values = v.sort.domain()
        elif domain is None:
            raise EvaluationError(f"cannot evaluate quantifier over infinite sort {v.sort} ({v.name})")
        else:
            values = [x for x in domain if v.sort.contains(x)]
        want = isinstance(f, Exists)
        saved = env.get(v, _MISSING)
        try:
            for x in values:
                env[v] = x
                if _eval(f.body, interp, env, tol, domain) == want:
                    return want
            return not want
        finally:
            if saved is _MISSING:
                env.pop(v, None)
            else:
                env[v] = saved
    raise TypeError(f"not a formula: {f!r}")


_MISSING = object()


class Interpretation(Mapping):
    """A total assignment of values to ground (possibly time-stamped) constants."""

    def __init__(self, values: Mapping[ConstKey, Value] = ()):
        self._values = dict(values)

    def __getitem__(self, key):
        return self._values[key]

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def __hash__(self):
        return hash(frozenset(self._values.items()))

    def __eq__(self, other):
        if isinstance(other, Mapping):
            return dict(self._values) == dict(other)
        return NotImplemented

    def __repr__(self):
        body = ", ".join(f"{key_str(k)}={_show_value(v)}" for k, v in sorted(self._values.items(), key=_key_order))
        return "{" + body + "}"

    def restrict(self, keys: Iterable[ConstKey]) -> "Interpretation":
        keys = set(keys)
        return Interpretation({k: v for k, v in self._values.items() if k in keys})

    def check_sorts(self, sorts: Mapping[ConstKey, Sort]) -> None:
        for key, sort in sorts.items():
            if key not in self._values:
                raise DeclarationError(f"interpretation has no value for {key_str(key)}")
            if not sort.contains(self._values[key]):
                raise SortError(f"value {_show_value(self._values[key])} of {key_str(key)} is not in sort {sort}")


def _key_order(item):
    (name, args, step), _ = item
    return (-1 if step is None else step, name, tuple(str(a) for a in args))


# --------------------------------------------------------------------------
# grounding and simplification


def ground(f: Formula) -> Formula:
    """Expand quantifiers over finite sorts into conjunctions/disjunctions.

    Quantifiers over real sorts are left in place (see :func:`has_quantifier`).
    """
    if isinstance(f, (And, Or, Implies)):
        left, right = ground(f.left), ground(f.right)
        if left is f.left and right is f.right:
            return f
        return type(f)(left, right)
    if isinstance(f, (Forall, Exists)):
        body = ground(f.body)
        if not f.var.sort.is_finite:
            return type(f)(f.var, body)
        parts = [subst(body, {f.var: value_term(x)}) for x in f.var.sort.domain()]
        return conj(parts) if isinstance(f, Forall) else disj(parts)
    return f


def fold_term(t: Term) -> Term:
    """Evaluate arithmetic over numerals."""
    if isinstance(t, BinOp):
        left, right = fold_term(t.left), fold_term(t.right)
        if isinstance(left, Num) and isinstance(right, Num):
            if t.op != "/" or right.value != 0:
                return Num(eval_term(BinOp(t.op, left, right), {}))
        return BinOp(t.op, left, right)
    if isinstance(t, Const) and t.args:
        return Const(t.name, tuple(fold_term(a) for a in t.args), t.sort, t.step)
    return t


def _is_literal(t: Term) -> bool:
    return isinstance(t, (Num, Sym))


def simplify(f: Formula) -> Formula:
    """Classically equivalent rewrite: truth-constant propagation and folding of
    ground arithmetic.  Negations are kept as ``F -> false``."""
    if isinstance(f, Equal):
        left, right = fold_term(f.left), fold_term(f.right)
        if left == right:
            return TOP
        if _is_literal(left) and _is_literal(right):
            return BOT
        return Equal(left, right)
    if isinstance(f, Compare):
        left, right = fold_term(f.left), fold_term(f.right)
        if isinstance(left, Num) and isinstance(right, Num):
            return TOP if _compare(f.op, left.value, right.value, None) else BOT
        return Compare(f.op, left, right)
    if isinstance(f, And):
        a, b = simplify(f.left), simplify(f.right)
        if a == BOT or b == BOT:
            return BOT
        if a == TOP:
            return b
        if b == TOP or a == b:
            return a
        return And(a, b)
    if isinstance(f, Or):
        a, b = simplify(f.left), simplify(f.right)
        if a == TOP or b == TOP:
            return TOP
        if a == BOT:
            return b
        if b == BOT or a == b:
            return a
        return Or(a, b)
    if isinstance(f, Implies):
        a, b = simplify(f.left), simplify(f.right)
        if a == BOT or b == TOP or a == b:
            return TOP
        if a == TOP:
            return b
        if b == BOT and is_neg(a) and a.left == BOT:
            return BOT
        return Implies(a, b)
    if isinstance(f, (Forall, Exists)):
        body = simplify(f.body)
        if f.var not in free_vars(body):
            return body
        return type(f)(f.var, body)
    return f


# --------------------------------------------------------------------------
# debug printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _show_value(v: Value) -> str:
    if isinstance(v, Fraction):
        return _show_number(v)
    return v


def _show_number(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d == 1:
        # terminating decimal: exact
        digits = 0
        y = abs(x)
        while (y * 10**digits).denominator != 1:
            digits += 1
        s = f"{abs(x.numerator) * 10**digits // x.denominator:0{digits + 1}d}"
        s = s[:-digits] + "." + s[-digits:]
        return "-" + s if x < 0 else s
    return f"({x.numerator}/{x.denominator})"


show_number = _show_number


def show_term(t: Term, prec: int = 0) -> str:
    if isinstance(t, Num):
        s = _show_number(t.value)
        return f"({s})" if s.startswith("-") and prec > 0 else s
    if isinstance(t, Sym):
        return t.name
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        s = t.name
        if t.args:
            s += "(" + ",".join(show_term(a) for a in t.args) + ")"
        return s if t.step is None else f"{t.step}:{s}"
    if isinstance(t, BinOp):
        if t.op == "-" and t.left == Num(0):
            return f"-({show_term(t.right)})"
        p = _PREC[t.op]
        s = f"{show_term(t.left, p)} {t.op} {show_term(t.right, p + 1)}"
        return f"({s})" if p < prec else s
    raise TypeError(f"not a term: {t!r}")


def _is_bool_const(t: Term) -> bool:
    return isinstance(t, Const) and t.sort.kind == "bool"


def show(f: Formula, prec: int = 0) -> str:
    """Render ``f`` in the concrete formula syntax (``&``, ``|``, ``->``, ``-``)."""
    if f == BOT:
        return "false"
    if f == TOP:
        return "true"
    if isinstance(f, Equal):
        if _is_bool_const(f.left) and f.right == Sym("true"):
            return show_term(f.left)
        if _is_bool_const(f.left) and f.right == Sym("false"):
            return "~" + show_term(f.left)
        return f"{show_term(f.left)} = {show_term(f.right)}"
    if isinstance(f, Compare):
        return f"{show_term(f.left)} {f.op} {show_term(f.right)}"
    if is_neg(f):
        inner = show(f.left, 4)
        if isinstance(f.left, (Equal, Compare)) and " " in inner:
            inner = f"({inner})"  # "-a = b" would read as a comparison with -a
        return "-" + inner
    if isinstance(f, Implies):
        s = f"{show(f.left, 2)} -> {show(f.right, 1)}"
        return f"({s})" if prec > 1 else s
    if isinstance(f, Or):
        s = f"{show(f.left, 2)} | {show(f.right, 3)}"
        return f"({s})" if prec > 2 else s
    if isinstance(f, And):
        s = f"{show(f.left, 3)} & {show(f.right, 4)}"
        return f"({s})" if prec > 3 else s
    if isinstance(f, (Forall, Exists)):
        q = "forall" if isinstance(f, Forall) else "exists"
        s = f"{q} {f.var.name}: {show(f.body, 1)}"
        return f"({s})" if prec > 0 else s
    raise TypeError(f"not a formula: {f!r}")
