"""Reference semantics: stable models of finite ground theories by enumeration.

An interpretation I is stable relative to the intensional constants c when
I satisfies F and there is no v^ < c (predicates of v^ a subset of those of I,
v^ different from I on c) such that I satisfies F*(v^).  Both searches are
backtracking enumerations that check each top-level conjunct as soon as all
of its constants are assigned.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Optional

from .errors import EnumerationBoundExceeded, EvaluationError, SortError
from .logic import (
    BOT,
    And,
    BinOp,
    Compare,
    Const,
    ConstKey,
    Equal,
    Exists,
    Forall,
    Formula,
    Implies,
    Interpretation,
    Num,
    Or,
    Sym,
    Term,
    Value,
    Var,
    conjuncts,
    constants,
    disjuncts,
    evaluate,
    ground,
    has_quantifier,
    map_terms,
    neg,
)
from .translator import TimedProgram, program_for_states, sort_keys, translate

DEFAULT_BOUND = 10**6
HAT = "^"


@dataclass(frozen=True)
class FiniteTheory:
    formula: Formula
    intensional: frozenset  # of ConstKey
    domains: Mapping[ConstKey, tuple]  # every constant of the formula
    predicates: frozenset = frozenset()  # Boolean constants read as predicates

    def __post_init__(self):
        object.__setattr__(self, "intensional", frozenset(self.intensional))
        object.__setattr__(self, "predicates", frozenset(self.predicates))
        for c in constants(self.formula):
            if c.key not in self.domains:
                raise SortError(f"constant {c.key} has no finite domain")
        for k in self.predicates:
            if set(self.domains[k]) != {"true", "false"}:
                raise SortError(f"predicate {k} must be Boolean")


# --------------------------------------------------------------------------
# F*


def hat_key(key: ConstKey) -> ConstKey:
    name, args, step = key
    return (name + HAT, args, step)


def _hat_term(t: Term, intensional: frozenset) -> Term:
    if isinstance(t, Const):
        args = tuple(_hat_term(a, intensional) for a in t.args)
        c = Const(t.name, args, t.sort, t.step)
        return Const(t.name + HAT, args, t.sort, t.step) if c.key in intensional else c
    if isinstance(t, BinOp):
        return BinOp(t.op, _hat_term(t.left, intensional), _hat_term(t.right, intensional))
    return t


def _normalize_predicates(f: Formula, predicates: frozenset) -> Formula:
    """p = false becomes -(p = true) for predicate constants."""
    if isinstance(f, Equal) and isinstance(f.left, Const) and f.left.key in predicates and f.right == Sym("false"):
        return neg(Equal(f.left, Sym("true")))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_normalize_predicates(f.left, predicates), _normalize_predicates(f.right, predicates))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, _normalize_predicates(f.body, predicates))
    return f


def star(f: Formula, intensional: Iterable[ConstKey], predicates: Iterable[ConstKey] = ()) -> Formula:
    """F* with each intensional constant c replaced by its copy c^ in the primed part."""
    intensional = frozenset(intensional)
    return _star(_normalize_predicates(f, frozenset(predicates)), intensional)


def _star(f: Formula, intensional: frozenset) -> Formula:
    if f == BOT:
        return BOT
    if isinstance(f, (Equal, Compare)):
        primed = map_terms(f, lambda t: _hat_term(t, intensional))
        return f if primed == f else And(primed, f)
    if isinstance(f, (And, Or)):
        return type(f)(_star(f.left, intensional), _star(f.right, intensional))
    if isinstance(f, Implies):
        return And(Implies(_star(f.left, intensional), _star(f.right, intensional)), f)
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, _star(f.body, intensional))
    raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------------------
# compilation to Python predicates over a value vector


# Integral values run as Python ints: Fraction equality dominates search time.


def _fast(x):
    return int(x) if isinstance(x, Fraction) and x.denominator == 1 else x


def _exact(x):
    return Fraction(x) if isinstance(x, int) else x


def _div(x, y):
    if y == 0:
        raise EvaluationError("division by zero")
    return Fraction(x) / y


class _Source:
    """Ground formulas rendered as Python expressions over ``v`` (the value vector)."""

    def __init__(self, index: Mapping[ConstKey, int]):
        self.index = index
        self.literals: list = []

    def literal(self, x) -> str:
        self.literals.append(x)
        return f"L[{len(self.literals) - 1}]"

    def term(self, t: Term) -> str:
        if isinstance(t, Num):
            return self.literal(_fast(t.value))
        if isinstance(t, Sym):
            return repr(t.name)
        if isinstance(t, Const):
            if t.args and not all(isinstance(a, (Num, Sym)) for a in t.args):
                raise EvaluationError("oracle needs ground constant arguments")
            return f"v[{self.index[t.key]}]"
        if isinstance(t, BinOp):
            a, b = self.term(t.left), self.term(t.right)
            return f"_div({a}, {b})" if t.op == "/" else f"({a} {t.op} {b})"
        if isinstance(t, Var):
            raise EvaluationError(f"free variable {t.name} in oracle formula")
        raise TypeError(f"not a term: {t!r}")

    def formula(self, f: Formula) -> str:
        if f == BOT:
            return "False"
        if isinstance(f, Equal):
            return f"({self.term(f.left)} == {self.term(f.right)})"
        if isinstance(f, Compare):
            return f"({self.term(f.left)} {f.op} {self.term(f.right)})"
        if isinstance(f, And):
            return "(" + " and ".join(self.formula(g) for g in conjuncts(f)) + ")"
        if isinstance(f, Or):
            return "(" + " or ".join(self.formula(g) for g in disjuncts(f)) + ")"
        if isinstance(f, Implies):
            if f.right == BOT:
                return f"(not {self.formula(f.left)})"
            return f"(not {self.formula(f.left)} or {self.formula(f.right)})"
        raise EvaluationError("oracle formulas must be ground and quantifier-free after grounding")


def _plan_checks(parts: list[Formula], index: Mapping[ConstKey, int], position: Mapping[ConstKey, int], n: int):
    """One compiled predicate per search position, covering the conjuncts decidable there."""
    groups: list[list[Formula]] = [[] for _ in range(n + 1)]
    for p in parts:
        keys = {c.key for c in constants(p)}
        groups[max((position[k] + 1 for k in keys if k in position), default=0)].append(p)
    src = _Source(index)
    texts = [[src.formula(f) for f in g] for g in groups]
    env = {"L": tuple(src.literals), "_div": _div}
    return [eval(f"lambda v: {' and '.join(t) or 'True'}", env) for t in texts]


def _search(n: int, domains: list[tuple], checks: list[Callable], vals: list, offset: int) -> Iterator[list]:
    """Depth-first assignment of vals[offset : offset+n]; yields the (shared) vector."""
    if not checks[0](vals):
        return

    def rec(k: int) -> Iterator[list]:
        if k == n:
            yield vals
            return
        for x in domains[k]:
            vals[offset + k] = x
            if checks[k + 1](vals):
                yield from rec(k + 1)
        vals[offset + k] = None

    yield from rec(0)


def _prepare(f: Formula) -> Formula:
    g = ground(f)
    if has_quantifier(g):
        raise EvaluationError("oracle formulas may only quantify over finite sorts")
    return g


def _check_bound(domains: Iterable[tuple], bound: Optional[int]) -> None:
    size = math.prod(len(d) for d in domains)
    if bound is not None and size > bound:
        raise EnumerationBoundExceeded(f"{size} candidate interpretations exceed the bound {bound}")


def _models(g: Formula, keys: list, domains: Mapping[ConstKey, tuple]) -> Iterator[list]:
    """Classical models of ground ``g`` as value vectors in the order of ``keys``."""
    index = {k: i for i, k in enumerate(keys)}
    checks = _plan_checks(conjuncts(g), index, index, len(keys))
    vals = [None] * len(keys)
    return _search(len(keys), [tuple(map(_fast, domains[k])) for k in keys], checks, vals, 0)


def _to_interpretation(keys: list, vals: list) -> Interpretation:
    return Interpretation({k: _exact(x) for k, x in zip(keys, vals)})


def classical_models(
    f: Formula, domains: Mapping[ConstKey, tuple], bound: Optional[int] = DEFAULT_BOUND
) -> list[Interpretation]:
    keys = sort_keys(domains)
    _check_bound((domains[k] for k in keys), bound)
    return [_to_interpretation(keys, v) for v in _models(_prepare(f), keys, domains)]


class _Checker:
    """Compiled F* for a theory; decides stability of single interpretations."""

    def __init__(self, t: FiniteTheory, g: Formula):
        self.keys = sort_keys(t.domains)
        self.intensional = [k for k in self.keys if k in t.intensional]
        n = len(self.keys)
        index = {k: i for i, k in enumerate(self.keys)}
        self.where = [index[k] for k in self.intensional]
        index.update({hat_key(k): n + j for j, k in enumerate(self.intensional)})
        position = {hat_key(k): j for j, k in enumerate(self.intensional)}
        f_star = star(g, t.intensional, t.predicates)
        self.checks = _plan_checks(conjuncts(f_star), index, position, len(self.intensional))
        self.domains = [tuple(map(_fast, t.domains[k])) for k in self.intensional]
        self.predicates = [j for j, k in enumerate(self.intensional) if k in t.predicates]
        self.n = n

    def search(self, base: list) -> Optional[list]:
        """Hat values of a witness for the value vector ``base``, or None."""
        current = [base[i] for i in self.where]
        domains = list(self.domains)
        for j in self.predicates:
            # predicate part of v^ must lie below that of I
            domains[j] = ("false", "true") if current[j] == "true" else ("false",)
        vals = list(base) + [None] * len(self.intensional)
        for v in _search(len(self.intensional), domains, self.checks, vals, self.n):
            if v[self.n:] != current:
                return v[self.n:]
        return None

    def witness(self, interp: Mapping[ConstKey, Value]) -> Optional[dict]:
        """A v^ < c with I |= F*(v^), or None when I is stable (assuming I |= F)."""
        hit = self.search([_fast(interp[k]) for k in self.keys])
        return None if hit is None else {k: _exact(x) for k, x in zip(self.intensional, hit)}


def stable_models(t: FiniteTheory, bound: Optional[int] = DEFAULT_BOUND) -> list[Interpretation]:
    """All stable models of ``t.formula`` relative to ``t.intensional``, in lexicographic order."""
    g = _prepare(t.formula)
    checker = _Checker(t, g)
    _check_bound((t.domains[k] for k in checker.keys), bound)
    return [
        _to_interpretation(checker.keys, v)
        for v in _models(g, checker.keys, t.domains)
        if checker.search(v) is None
    ]


def is_stable(t: FiniteTheory, interp: Mapping[ConstKey, Value]) -> bool:
    g = _prepare(t.formula)
    if not evaluate(g, interp):
        return False
    return _Checker(t, g).witness(interp) is None


def stability_witness(t: FiniteTheory, interp: Mapping[ConstKey, Value]) -> Optional[dict]:
    g = _prepare(t.formula)
    return _Checker(t, g).witness(interp)


# --------------------------------------------------------------------------
# action descriptions with finite sorts


def program_theory(p: TimedProgram) -> FiniteTheory:
    """D_m as a finite theory; Boolean constants stay function constants."""
    for k, s in p.signature.items():
        if not s.is_finite:
            raise SortError(f"constant {k[0]} has the non-finite sort {s}")
    return FiniteTheory(p.formula(), p.intensional, {k: s.domain() for k, s in p.signature.items()})


def states(d, bound: Optional[int] = DEFAULT_BOUND) -> list[dict]:
    """Stable models of D_0 relative to 0:sd (``d`` prepared)."""
    return [dict(s) for s in stable_models(program_theory(program_for_states(d)), bound)]


def transitions(d, bound: Optional[int] = DEFAULT_BOUND) -> list[dict]:
    """Stable models of D_1; each one is a triple (0:s, 0:e, 1:s')."""
    return [dict(t) for t in stable_models(program_theory(translate(d, 1)), bound)]


def _state_at(interp: Mapping[ConstKey, Value], fluents: frozenset, step: int) -> tuple:
    return tuple(sorted(((n, a), v) for (n, a, i), v in interp.items() if i == step and (n, a) in fluents))


def paths(d, m: int, bound: Optional[int] = DEFAULT_BOUND) -> list[Interpretation]:
    """Length-m paths of the transition system, chained from single transitions."""
    if m == 0:
        return sorted((Interpretation(s) for s in states(d, bound)), key=_model_order)
    trans = transitions(d, bound)
    fluents = frozenset((n, a) for t in trans for (n, a, i) in t if i == 1)
    by_start: dict[tuple, list[dict]] = {}
    for t in trans:
        by_start.setdefault(_state_at(t, fluents, 0), []).append(t)
    partial = trans
    for i in range(1, m):
        grown = []
        for path in partial:
            for t in by_start.get(_state_at(path, fluents, i), []):
                ext = dict(path)
                ext.update({(n, a, j + i): v for (n, a, j), v in t.items()})
                grown.append(ext)
        partial = grown
    return sorted((Interpretation(p) for p in partial), key=_model_order)


def _model_order(i: Interpretation):
    return [repr(kv) for kv in sorted(i.items(), key=repr)]


# --------------------------------------------------------------------------
# independent checker for predicate-only theories (reduct semantics)


def reduct(f: Formula, x: Mapping[ConstKey, Value]) -> Formula:
    """Replace every maximal subformula false under ``x`` by false."""
    if not evaluate(f, x):
        return BOT
    if isinstance(f, (Equal, Compare)):
        return f
    if isinstance(f, (And, Or, Implies)):
        return type(f)(reduct(f.left, x), reduct(f.right, x))
    return f


def reduct_stable_models(
    f: Formula,
    intensional: Iterable[ConstKey],
    atoms: Iterable[ConstKey],
) -> list[Interpretation]:
    """Stable models of a propositional theory by minimality of the reduct.

    ``atoms`` are Boolean constants; those in ``intensional`` are minimized,
    the others are held fixed.
    """
    atoms = sort_keys(atoms)
    intensional = [k for k in atoms if k in set(intensional)]
    g = _normalize_predicates(_prepare(f), frozenset(atoms))
    out = []
    for bits in _bool_vectors(len(atoms)):
        x = dict(zip(atoms, bits))
        if not evaluate(g, x):
            continue
        r = reduct(g, x)
        true_int = [k for k in intensional if x[k] == "true"]
        stable = True
        for sub in _bool_vectors(len(true_int)):
            y = dict(x)
            y.update(zip(true_int, sub))
            if y != x and evaluate(r, y):
                stable = False
                break
        if stable:
            out.append(Interpretation(x))
    return out


def _bool_vectors(n: int) -> Iterator[tuple]:
    return itertools.product(("false", "true"), repeat=n)


__all__ = [
    "FiniteTheory",
    "DEFAULT_BOUND",
    "star",
    "hat_key",
    "classical_models",
    "stable_models",
    "is_stable",
    "stability_witness",
    "reduct",
    "program_theory",
    "states",
    "transitions",
    "paths",
    "reduct_stable_models",
]
