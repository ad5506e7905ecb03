"""Front-end passes: abbreviation expansion, increment-law expansion,
grounding of schematic variables, and the definiteness check."""

from __future__ import annotations

import itertools

from ..errors import DeclarationError, DefinitenessError, SortError
from ..logic import (
    ACTION,
    BOT,
    REAL,
    RIGID,
    SD,
    SIMPLE,
    TOP,
    BinOp,
    Const,
    ConstantDecl,
    Equal,
    Formula,
    Num,
    Sort,
    Term,
    Var,
    bool_atom,
    conj,
    conjuncts,
    constants,
    forall,
    free_vars,
    ground,
    int_range,
    map_terms,
    neg,
    show_term,
    subst,
    subst_term,
    term_constants,
    term_vars,
    value_term,
)
from .laws import (
    ACTION_DYNAMIC,
    FLUENT_DYNAMIC,
    STATIC,
    ActionDescription,
    Always,
    CausalLaw,
    Causes,
    Constraint,
    Default,
    Exogenous,
    Inertial,
    Query,
    StepConstraint,
    const_kinds,
    mentions_action,
)

# --------------------------------------------------------------------------
# desugaring


def _fresh_var(c: Const, name: str = "_v") -> Var:
    return Var(name, c.sort)


def _kind_of(c: Const, d: ActionDescription) -> str:
    try:
        return d.constants[c.name].kind
    except KeyError:
        raise DeclarationError(f"undeclared constant {c.name}") from None


def _head_kind(head: Formula, if_part: Formula, d: ActionDescription) -> str:
    if head == BOT:
        return ACTION_DYNAMIC if mentions_action(if_part, d) else STATIC
    return ACTION_DYNAMIC if mentions_action(head, d) else STATIC


def desugar(d: ActionDescription) -> ActionDescription:
    """Rewrite every abbreviation into static / action dynamic / fluent dynamic laws."""
    out: list[CausalLaw] = []
    for law in d.laws:
        out.extend(_desugar_law(law, d))
    return d.replace(laws=tuple(out))


def _desugar_law(law, d: ActionDescription) -> list[CausalLaw]:
    line = getattr(law, "line", 0)
    if isinstance(law, CausalLaw):
        return [law]
    if isinstance(law, Exogenous):
        laws = []
        for c in law.consts:
            kind = _kind_of(c, d)
            if kind == RIGID:
                raise DefinitenessError(f"line {line}: exogenous applied to rigid constant {c.name}")
            v = _fresh_var(c)
            atom = Equal(c, v)
            laws.append(CausalLaw(ACTION_DYNAMIC if kind == ACTION else STATIC, atom, atom, None, line))
        return laws
    if isinstance(law, Inertial):
        laws = []
        for c in law.consts:
            if _kind_of(c, d) != SIMPLE:
                raise DefinitenessError(f"line {line}: inertial applies to simple fluents only, not {c.name}")
            atom = Equal(c, _fresh_var(c))
            laws.append(CausalLaw(FLUENT_DYNAMIC, atom, atom, atom, line))
        return laws
    if isinstance(law, Constraint):
        if law.after is not None:
            if mentions_action(law.formula, d):
                raise DefinitenessError(f"line {line}: constraint ... after needs a fluent formula")
            return [CausalLaw(FLUENT_DYNAMIC, BOT, neg(law.formula), law.after, line)]
        kind = ACTION_DYNAMIC if mentions_action(law.formula, d) else STATIC
        return [CausalLaw(kind, BOT, neg(law.formula), None, line)]
    if isinstance(law, Always):
        return [CausalLaw(ACTION_DYNAMIC, BOT, neg(law.formula), None, line)]
    if isinstance(law, Default):
        if_part = law.atom if law.if_part == TOP else conj([law.atom, law.if_part])
        if law.after is not None:
            return [CausalLaw(FLUENT_DYNAMIC, law.atom, if_part, law.after, line)]
        return [CausalLaw(_head_kind(law.atom, if_part, d), law.atom, if_part, None, line)]
    if isinstance(law, Causes):
        after = law.action if law.if_part == TOP else conj([law.action, law.if_part])
        laws = []
        for part in conjuncts(law.effect):
            if part != BOT and mentions_action(part, d):
                laws.append(CausalLaw(ACTION_DYNAMIC, part, after, None, line))
            else:
                laws.append(CausalLaw(FLUENT_DYNAMIC, part, TOP, after, line))
        return laws
    raise TypeError(f"not a law: {law!r}")


# --------------------------------------------------------------------------
# increment laws


def contribution_sort(target: Sort) -> Sort:
    if target.kind in ("real", "nonneg"):
        return REAL  # increments may be negative even when the fluent is not
    if target.kind == "int":
        span = target.hi - target.lo
        return int_range(-span, span)
    raise SortError(f"additive fluent needs a numeric sort, got {target}")


def contribution_name(trigger: Const, target: Const) -> str:
    return f"contr({show_term(trigger)},{show_term(target)})"


def _schematic_instances(terms: list[Term]):
    """All ground substitutions for the finite-sort variables in ``terms``."""
    vs = sorted({v for t in terms for v in term_vars(t)}, key=lambda v: v.name)
    for v in vs:
        if not v.sort.is_finite:
            raise SortError(f"variable {v.name} in a constant argument must have a finite sort")
    for values in itertools.product(*(v.sort.domain() for v in vs)):
        yield {v: value_term(x) for v, x in zip(vs, values)}


def check_increment_laws(d: ActionDescription) -> None:
    process = {law.trigger.name for law in d.increment_laws if _kind_of(law.trigger, d) != ACTION}
    heads = set()
    for law in d.causal_laws:
        if law.kind in (STATIC, FLUENT_DYNAMIC):
            heads.update(c.name for c in constants(law.head))
    for law in d.increment_laws:
        where = f"line {law.line}: " if law.line else ""
        tdecl = d.constants[law.trigger.name]
        if tdecl.value_sort.kind != "bool" or tdecl.kind not in (ACTION, SIMPLE):
            raise DefinitenessError(f"{where}increment trigger must be a Boolean action or simple fluent")
        cdecl = d.constants[law.target.name]
        if not cdecl.value_sort.is_numeric:
            raise SortError(f"{where}increment target {cdecl.name} is not numeric")
        if cdecl.kind != SIMPLE or not cdecl.additive:
            raise DefinitenessError(f"{where}increment target {cdecl.name} is not an additive fluent")
        if cdecl.name in heads:
            raise DefinitenessError(f"{where}additive fluent {cdecl.name} occurs in the head of a static or fluent dynamic law")
        for c in constants(law.condition):
            cd = d.constants[c.name]
            if cd.kind == ACTION and cd.value_sort.kind == "bool":
                raise DefinitenessError(f"{where}increment condition mentions Boolean action {c.name}")
            if tdecl.kind != ACTION and c.name in process:
                raise DefinitenessError(f"{where}increment condition mentions process fluent {c.name}")


def expand_increments(d: ActionDescription) -> ActionDescription:
    """Replace increment laws by contribution constants and ordinary laws.

    For every ground (trigger p, target c) pair a fresh action constant
    ``contr(p,c)`` is introduced with laws

        caused contr(p,c) = amount if p & bindings & condition     (one per increment law)
        caused contr(p,c) = 0 if -p
        caused c = v + w1 + ... + wk after c = v & contr(p1,c) = w1 & ...   (one per target)
    """
    if not d.increment_laws:
        return d
    check_increment_laws(d)
    new_consts = dict(d.constants)
    laws = list(d.laws)
    per_target: dict[Const, list[Const]] = {}
    seen_pairs: dict[tuple[Const, Const], Const] = {}
    for law in d.increment_laws:
        for inst in _schematic_instances([law.trigger, law.target]):
            p = subst_term(law.trigger, inst)
            c = subst_term(law.target, inst)
            pair = (p, c)
            if pair not in seen_pairs:
                name = contribution_name(p, c)
                decl = ConstantDecl(name, (), contribution_sort(c.sort), ACTION)
                new_consts[name] = decl
                contr = Const(name, (), decl.value_sort)
                seen_pairs[pair] = contr
                per_target.setdefault(c, []).append(contr)
                laws.append(CausalLaw(ACTION_DYNAMIC, Equal(contr, Num(0)), neg(bool_atom(p)), None, law.line))
            contr = seen_pairs[pair]
            bindings = [Equal(subst_term(k, inst), v) for k, v in law.bindings]
            cond = subst(law.condition, inst)
            body = conj([bool_atom(p)] + bindings + ([] if cond == TOP else [cond]))
            laws.append(CausalLaw(ACTION_DYNAMIC, Equal(contr, subst_term(law.amount, inst)), body, None, law.line))
    for c, contrs in per_target.items():
        v = Var("_v", c.sort)
        ws = [Var(f"_w{k + 1}", x.sort) for k, x in enumerate(contrs)]
        total: Term = v
        for w in ws:
            total = BinOp("+", total, w)
        after = conj([Equal(c, v)] + [Equal(x, w) for x, w in zip(contrs, ws)])
        laws.append(CausalLaw(FLUENT_DYNAMIC, Equal(c, total), TOP, after))
    return d.replace(constants=new_consts, laws=tuple(laws), increment_laws=())


# --------------------------------------------------------------------------
# grounding


def _rigid_subst(t: Term, d: ActionDescription) -> Term:
    if isinstance(t, Const):
        args = tuple(_rigid_subst(a, d) for a in t.args)
        c = Const(t.name, args, t.sort, t.step)
        if d.constants[t.name].kind == RIGID:
            try:
                return value_term(d.values[c.key])
            except KeyError:
                raise DeclarationError(f"rigid constant {show_term(c)} has no value") from None
        return c
    if isinstance(t, BinOp):
        return BinOp(t.op, _rigid_subst(t.left, d), _rigid_subst(t.right, d))
    return t


def substitute_rigids(f: Formula, d: ActionDescription) -> Formula:
    return map_terms(f, lambda t: _rigid_subst(t, d))


def _law_formulas(law: CausalLaw) -> list[Formula]:
    return [law.head, law.if_part] + ([law.after] if law.after is not None else [])


def ground_laws(d: ActionDescription) -> ActionDescription:
    """Instantiate finite-sort variables and replace rigid constants by their values.

    Real-sorted variables stay schematic (implicitly universally quantified per law).
    """
    out = []
    for law in d.laws:
        if not isinstance(law, CausalLaw):
            raise DefinitenessError("ground_laws expects a desugared description")
        fv = set()
        for f in _law_formulas(law):
            fv |= free_vars(f)
        finite = sorted((v for v in fv if v.sort.is_finite), key=lambda v: v.name)
        for values in itertools.product(*(v.sort.domain() for v in finite)):
            m = {v: value_term(x) for v, x in zip(finite, values)}
            head, if_part = (substitute_rigids(subst(f, m), d) for f in (law.head, law.if_part))
            after = None if law.after is None else substitute_rigids(subst(law.after, m), d)
            out.append(CausalLaw(law.kind, head, if_part, after, law.line))
    query = d.query
    if query is not None:
        cs = []
        for c in query.constraints:
            f = c.formula
            bad = [v.name for v in free_vars(f) if not v.sort.is_finite]
            if bad:
                raise SortError(f"query formula has real-valued variables {', '.join(sorted(bad))}")
            f = ground(forall(sorted(free_vars(f), key=lambda v: v.name), f))
            cs.append(StepConstraint(c.label, substitute_rigids(f, d), c.line))
        query = Query(query.min_horizon, query.max_horizon, tuple(cs), query.mode)
    return d.replace(laws=tuple(out), query=query)


# --------------------------------------------------------------------------
# validation


def _is_plain_head(head: Formula, d: ActionDescription) -> bool:
    if head == BOT:
        return True
    if not (isinstance(head, Equal) and isinstance(head.left, Const)):
        return False
    if _kind_of(head.left, d) not in (SIMPLE, SD, ACTION):
        return False
    for a in head.left.args:
        if term_constants(a):
            return False
    return not any(_kind_of(c, d) != RIGID for c in term_constants(head.right))


def check_definite(d: ActionDescription) -> None:
    """Raise :class:`DefinitenessError` unless every law is definite and well-kinded."""
    for law in d.laws:
        if not isinstance(law, CausalLaw):
            continue
        where = f"line {law.line}: " if law.line else ""
        if not _is_plain_head(law.head, d):
            raise DefinitenessError(f"{where}head is not an atomic (fluent/action)-plain formula")
        head_kinds = const_kinds(law.head, d)
        if law.kind == STATIC:
            if ACTION in head_kinds or ACTION in const_kinds(law.if_part, d):
                raise DefinitenessError(f"{where}static law mentions an action constant")
        elif law.kind == ACTION_DYNAMIC:
            if law.head != BOT and (SIMPLE in head_kinds or SD in head_kinds):
                raise DefinitenessError(f"{where}action dynamic law has a fluent in its head")
            if law.head != BOT and ACTION not in head_kinds:
                raise DefinitenessError(f"{where}action dynamic law head must contain an action constant")
        elif law.kind == FLUENT_DYNAMIC:
            if ACTION in head_kinds or ACTION in const_kinds(law.if_part, d):
                raise DefinitenessError(f"{where}fluent dynamic law head/if part mentions an action constant")
            if SD in head_kinds:
                raise DefinitenessError(f"{where}fluent dynamic law head contains a statically determined fluent")
            if law.after is None:
                raise DefinitenessError(f"{where}fluent dynamic law without after part")
        else:
            raise DefinitenessError(f"{where}unknown law kind {law.kind!r}")


def check_additive_heads(d: ActionDescription) -> None:
    for law in d.laws:
        if isinstance(law, CausalLaw) and law.kind in (STATIC, FLUENT_DYNAMIC):
            for c in constants(law.head):
                if d.constants[c.name].additive:
                    raise DefinitenessError(
                        f"line {law.line}: additive fluent {c.name} in the head of a static or fluent dynamic law"
                    )


def prepare(d: ActionDescription) -> ActionDescription:
    """Full front end: desugar, check, expand increments, ground."""
    d = desugar(d)
    check_definite(d)
    check_additive_heads(d)
    d = ground_laws(expand_increments(d))
    check_definite(d)
    return d


def is_ground(d: ActionDescription) -> bool:
    for law in d.laws:
        if not isinstance(law, CausalLaw):
            return False
        for f in _law_formulas(law):
            if any(v.sort.is_finite for v in free_vars(f)):
                return False
            if any(c.name in d.constants and d.constants[c.name].kind == RIGID for c in constants(f)):
                return False
    return not d.increment_laws


def ground_constants(d: ActionDescription, kinds=(SIMPLE, SD, ACTION)) -> list[Const]:
    """Every ground instance of the declared constants of the given kinds."""
    out = []
    for decl in d.constants.values():
        if decl.kind not in kinds:
            continue
        for args in decl.instances():
            out.append(Const(decl.name, tuple(value_term(a) for a in args), decl.value_sort))
    return out


__all__ = [
    "desugar",
    "expand_increments",
    "ground_laws",
    "check_definite",
    "check_increment_laws",
    "check_additive_heads",
    "prepare",
    "is_ground",
    "ground_constants",
    "contribution_name",
    "contribution_sort",
    "substitute_rigids",
]
