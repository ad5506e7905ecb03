"""Clark normal form, completion, and definitional-variable elimination."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .errors import CompletionError
from .logic import (
    BOT,
    TOP,
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
    Num,
    Or,
    Term,
    Var,
    conj,
    conjuncts,
    disj,
    disjuncts,
    exists,
    forall,
    free_vars,
    ground,
    iff,
    is_neg,
    key_str,
    neg,
    simplify,
    subst,
    term_vars,
)
from .translator import Rule, TimedProgram, sort_keys


@dataclass(frozen=True)
class Case:
    variables: tuple[Var, ...]
    body: Formula
    value: Term


@dataclass(frozen=True)
class DefinitionGroup:
    const: Const
    cases: tuple[Case, ...] = ()


@dataclass(frozen=True)
class Constraint:
    formula: Formula
    label: str = field(default="", compare=False)


def drop_double_negations(f: Formula) -> Formula:
    if is_neg(f) and is_neg(f.left) and f.left.left != BOT:
        return drop_double_negations(f.left.left)
    if isinstance(f, (And, Or, Implies)):
        return type(f)(drop_double_negations(f.left), drop_double_negations(f.right))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, drop_double_negations(f.body))
    return f


def _rule_label(r: Rule) -> str:
    if r.law is not None and r.law.line:
        return f"line {r.law.line}"
    return str(r)


def clark_normal_form(
    rules: Iterable[Rule],
    intensional: Iterable[ConstKey],
    consts: Mapping[ConstKey, Const],
) -> tuple[list[DefinitionGroup], list[Constraint]]:
    """Group rules by intensional head constant; everything else becomes a constraint."""
    intensional = set(intensional)
    cases: dict[ConstKey, list[Case]] = {k: [] for k in intensional}
    constraints: list[Constraint] = []
    for r in rules:
        body = drop_double_negations(r.body)
        head = r.head
        if head == BOT:
            constraints.append(Constraint(forall(r.variables, neg(body)), _rule_label(r)))
            continue
        if not (isinstance(head, Equal) and isinstance(head.left, Const)):
            raise CompletionError(f"rule head is not atomic: {r}")
        key = head.left.key
        if key in intensional:
            cases[key].append(Case(r.variables, body, head.right))
        else:
            constraints.append(Constraint(forall(r.variables, Implies(body, head)), _rule_label(r)))
    groups = []
    for key in sort_keys(intensional):
        c = consts[key]
        if c.sort.is_finite and len(c.sort.domain()) < 2:
            raise CompletionError(f"intensional constant {key_str(key)} has a one-element sort")
        groups.append(DefinitionGroup(c, tuple(cases[key])))
    return groups, constraints


def _fresh_y(group: DefinitionGroup) -> Var:
    taken = {v.name for case in group.cases for v in case.variables}
    for case in group.cases:
        taken |= {v.name for v in free_vars(case.body) | term_vars(case.value)}
    name = "y"
    k = 0
    while name in taken:
        k += 1
        name = f"y{k}"
    return Var(name, group.const.sort)


def group_formula(group: DefinitionGroup) -> Formula:
    """forall y (c = y <-> OR_k exists vars_k (y = e_k & B_k))."""
    y = _fresh_y(group)
    options = [exists(case.variables, conj([Equal(y, case.value), case.body])) for case in group.cases]
    return Forall(y, iff(Equal(group.const, y), disj(options)))


def complete(groups: Iterable[DefinitionGroup], constraints: Iterable[Constraint]) -> Formula:
    return conj([group_formula(g) for g in groups] + [c.formula for c in constraints])


# --------------------------------------------------------------------------
# definitional variable elimination


def _rename_apart(f: Formula, used: set[str], mapping: dict[Var, Term]) -> Formula:
    if isinstance(f, (Forall, Exists)):
        v = f.var
        name = v.name
        k = 0
        while name in used:
            k += 1
            name = f"{v.name}_{k}"
        used.add(name)
        nv = Var(name, v.sort)
        inner = dict(mapping)
        inner[v] = nv
        return type(f)(nv, _rename_apart(f.body, used, inner))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_rename_apart(f.left, used, mapping), _rename_apart(f.right, used, mapping))
    return subst(f, mapping)


def rename_apart(f: Formula) -> Formula:
    """Give every quantifier a distinct variable name, distinct from free variables."""
    return _rename_apart(f, {v.name for v in free_vars(f)}, {})


def provably_nonneg(t: Term) -> bool:
    if isinstance(t, Num):
        return t.value >= 0
    if isinstance(t, (Var, Const)):
        s = t.sort
        return s.kind == "nonneg" or (s.kind == "int" and s.lo >= 0)
    if isinstance(t, BinOp) and t.op in ("+", "*", "/"):
        return provably_nonneg(t.left) and provably_nonneg(t.right)
    return False


def _definitional(part: Formula, vs: list[Var]) -> Optional[tuple[Var, Term]]:
    if not isinstance(part, Equal):
        return None
    for v, e in ((part.left, part.right), (part.right, part.left)):
        if isinstance(v, Var) and v in vs and v.sort.kind in ("real", "nonneg") and v not in term_vars(e):
            return v, e
    return None


def _solve_definitions(vs: list[Var], parts: list[Formula], rest: list[Formula]) -> tuple[list[Var], list[Formula], list[Formula]]:
    """Substitute away variables of ``vs`` bound by equations among ``parts``.

    ``rest`` are formulas outside the conjunction (e.g. an implication's
    consequent) that receive the same substitutions.
    """
    vs, parts, rest = list(vs), list(parts), list(rest)
    changed = True
    while changed:
        changed = False
        for idx, part in enumerate(parts):
            hit = _definitional(part, vs)
            if hit is None:
                continue
            v, e = hit
            m = {v: e}
            new = [subst(p, m) for p in parts[:idx]]
            if v.sort.kind == "nonneg" and not provably_nonneg(e):
                new.append(Compare(">=", e, Num(0)))
            new += [subst(p, m) for p in parts[idx + 1:]]
            parts = new
            rest = [subst(r, m) for r in rest]
            vs.remove(v)
            changed = True
            break
    return vs, parts, rest


def _flatten(f: Formula) -> list[Formula]:
    return [] if f == TOP else conjuncts(f)


def _pull_exists(parts: list[Formula]) -> tuple[list[Var], list[Formula]]:
    """Lift existential quantifiers out of a conjunction (names are already apart)."""
    vs: list[Var] = []
    out: list[Formula] = []
    stack = list(reversed(parts))
    while stack:
        p = stack.pop()
        if isinstance(p, Exists):
            vs.append(p.var)
            stack.append(p.body)
        elif isinstance(p, And):
            stack += [p.right, p.left]
        else:
            out.append(p)
    return vs, out


def _used(vs: list[Var], fs: list[Formula]) -> list[Var]:
    fv = set()
    for f in fs:
        fv |= free_vars(f)
    return [v for v in vs if v in fv]


def _elim_forall(vs: list[Var], body: Formula) -> Formula:
    body = _elim(body)
    if isinstance(body, And) and not is_neg(body):
        return conj([_elim_forall(vs, p) for p in conjuncts(body)])
    if isinstance(body, Forall):
        inner_vs, inner = _strip(body, Forall)
        return _elim_forall(vs + inner_vs, inner)
    if isinstance(body, Implies):
        antecedent, head = body.left, body.right
        if isinstance(antecedent, Or):
            return conj([_elim_forall(vs, Implies(d, head)) for d in disjuncts(antecedent)])
        ex_vs, parts = _pull_exists(_flatten(antecedent))
        if ex_vs and any(isinstance(p, Or) for p in parts):
            # restore the disjunction split on the flattened antecedent
            idx = next(i for i, p in enumerate(parts) if isinstance(p, Or))
            return conj(
                _elim_forall(vs + ex_vs, Implies(conj(parts[:idx] + [d] + parts[idx + 1:]), head))
                for d in disjuncts(parts[idx])
            )
        all_vs = vs + ex_vs
        left_vs, parts, (head,) = _solve_definitions(all_vs, parts, [head])
        head = _elim(head)
        result = Implies(conj(parts), head) if parts else head
        remaining = _used(left_vs, [result])
        if len(remaining) == len(all_vs) and not ex_vs:
            return forall(remaining, simplify(result))
        return _elim_forall(remaining, simplify(result))
    return forall(_used(vs, [body]), body)


def _elim_exists(vs: list[Var], body: Formula) -> Formula:
    body = _elim(body)
    if isinstance(body, Or):
        return disj([_elim_exists(vs, d) for d in disjuncts(body)])
    ex_vs, parts = _pull_exists(_flatten(body))
    ors = [i for i, p in enumerate(parts) if isinstance(p, Or)]
    if ors:
        idx = ors[0]
        return disj(
            _elim_exists(vs + ex_vs, conj(parts[:idx] + [d] + parts[idx + 1:])) for d in disjuncts(parts[idx])
        )
    left_vs, parts, _ = _solve_definitions(vs + ex_vs, parts, [])
    result = simplify(conj(parts))
    return exists(_used(left_vs, [result]), result)


def _strip(f: Formula, kind) -> tuple[list[Var], Formula]:
    vs = []
    while isinstance(f, kind):
        vs.append(f.var)
        f = f.body
    return vs, f


def _elim(f: Formula) -> Formula:
    if isinstance(f, Forall):
        vs, body = _strip(f, Forall)
        return _elim_forall(vs, body)
    if isinstance(f, Exists):
        vs, body = _strip(f, Exists)
        return _elim_exists(vs, body)
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_elim(f.left), _elim(f.right))
    return f


def eliminate_definitional_variables(f: Formula) -> Formula:
    """Equivalence-preserving removal of real variables fixed by equations.

    Finite quantifiers should be expanded first (see :func:`logic.ground`).
    Variables without a defining equation stay quantified.
    """
    return simplify(_elim(rename_apart(f)))


def finish(f: Formula) -> Formula:
    """ground -> eliminate -> simplify, then drop double negations."""
    return drop_double_negations(simplify(eliminate_definitional_variables(ground(f))))


@dataclass(frozen=True)
class CompletionPart:
    label: str
    formula: Formula


def completion_parts(
    rules: Iterable[Rule],
    intensional: Iterable[ConstKey],
    consts: Mapping[ConstKey, Const],
    eliminate: bool = True,
) -> list[CompletionPart]:
    groups, constraints = clark_normal_form(rules, intensional, consts)
    post = finish if eliminate else (lambda f: simplify(ground(f)))
    out = [CompletionPart(f"definition of {key_str(g.const.key)}", post(group_formula(g))) for g in groups]
    out += [CompletionPart(f"constraint ({c.label})", post(c.formula)) for c in constraints]
    return out


def completion(
    rules: Iterable[Rule],
    intensional: Iterable[ConstKey],
    consts: Mapping[ConstKey, Const],
    eliminate: bool = True,
) -> Formula:
    return conj([p.formula for p in completion_parts(rules, intensional, consts, eliminate)])


def program_completion_parts(p: TimedProgram, eliminate: bool = True) -> list[CompletionPart]:
    return completion_parts(p.rules, p.intensional, p.constants, eliminate)


def program_completion(p: TimedProgram, eliminate: bool = True) -> Formula:
    """Completed, simplified formula for D_m (tightness is the caller's concern)."""
    return conj([part.formula for part in program_completion_parts(p, eliminate)])


__all__ = [
    "Case",
    "DefinitionGroup",
    "Constraint",
    "CompletionPart",
    "clark_normal_form",
    "group_formula",
    "complete",
    "rename_apart",
    "provably_nonneg",
    "eliminate_definitional_variables",
    "drop_double_negations",
    "finish",
    "completion_parts",
    "completion",
    "program_completion_parts",
    "program_completion",
]
