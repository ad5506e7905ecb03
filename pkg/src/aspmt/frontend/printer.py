"""Pretty-printer producing source text that parses back to the same AST."""

from __future__ import annotations

from ..logic import TOP, ConstantDecl, Sort, key_str, show, show_term, value_term
from .laws import (
    ActionDescription,
    Always,
    CausalLaw,
    Causes,
    Constraint,
    Default,
    Exogenous,
    IncrementLaw,
    Inertial,
    Query,
)

_KIND_NAMES = {"simpleFluent": "simpleFluent", "sdFluent": "sdFluent", "action": "action", "rigid": "rigid"}


def _sort_ref(sort: Sort) -> str:
    if sort.name:
        return sort.name
    if sort.kind == "int":
        return f"{sort.lo}..{sort.hi}"
    raise ValueError(f"anonymous sort {sort} cannot be printed")


def _decl(d: ConstantDecl) -> str:
    head = d.name
    if d.arg_sorts:
        head += "(" + ",".join(_sort_ref(s) for s in d.arg_sorts) + ")"
    kind = "additiveFluent" if d.additive else _KIND_NAMES[d.kind]
    return f"{head} :: {kind}({_sort_ref(d.value_sort)})"


def _if_after(if_part, after) -> str:
    s = ""
    if if_part != TOP:
        s += f" if {show(if_part)}"
    if after is not None:
        s += f" after {show(after)}"
    return s


def show_law(law) -> str:
    if isinstance(law, CausalLaw):
        return f"caused {show(law.head)}{_if_after(law.if_part, law.after)}."
    if isinstance(law, Exogenous):
        return "exogenous " + ", ".join(show_term(c) for c in law.consts) + "."
    if isinstance(law, Inertial):
        return "inertial " + ", ".join(show_term(c) for c in law.consts) + "."
    if isinstance(law, Constraint):
        after = f" after {show(law.after)}" if law.after is not None else ""
        return f"constraint {show(law.formula)}{after}."
    if isinstance(law, Always):
        return f"always {show(law.formula)}."
    if isinstance(law, Default):
        return f"default {show(law.atom)}{_if_after(law.if_part, law.after)}."
    if isinstance(law, Causes):
        cond = f" if {show(law.if_part)}" if law.if_part != TOP else ""
        return f"{show(law.action, 4)} causes {show(law.effect)}{cond}."
    if isinstance(law, IncrementLaw):
        parts = [f"{show_term(c)} = {show_term(v)}" for c, v in law.bindings]
        if law.condition != TOP:
            parts.append(show(law.condition, 4))
        cond = f" if {' & '.join(parts)}" if parts else ""
        return f"{show_term(law.trigger)} increments {show_term(law.target)} by {show_term(law.amount)}{cond}."
    raise TypeError(f"not a law: {law!r}")


def show_query(q: Query) -> str:
    items = [f"maxstep :: {q.min_horizon}" + (f"..{q.max_horizon}" if q.mode == "incremental" else "")]
    items += [f"{c.label}: {show(c.formula)}" for c in q.constraints]
    return ":- query\n    " + ";\n    ".join(items) + "."


def show_description(d: ActionDescription) -> str:
    out = []
    if d.sorts:
        items = []
        for name, sort in d.sorts.items():
            if sort.kind == "int":
                items.append(f"{name} = {sort.lo}..{sort.hi}")
            else:
                items.append(f"{name} = {{{', '.join(sort.symbols)}}}")
        out.append(":- sorts\n    " + ";\n    ".join(items) + ".")
    if d.constants:
        out.append(":- constants\n    " + ";\n    ".join(_decl(c) for c in d.constants.values()) + ".")
    if d.variables:
        out.append(
            ":- variables\n    "
            + ";\n    ".join(f"{v.name} :: {_sort_ref(v.sort)}" for v in d.variables.values())
            + "."
        )
    if d.values:
        items = [f"{key_str(k)} = {show_term(value_term(v))}" for k, v in d.values.items()]
        out.append(":- values\n    " + ";\n    ".join(items) + ".")
    out.extend(show_law(law) for law in d.laws)
    out.extend(show_law(law) for law in d.increment_laws)
    if d.query is not None:
        out.append(show_query(d.query))
    return "\n".join(out) + "\n"

