"""Time-stamped ASPMT program D_m for a ground action description."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import DefinitenessError
from .frontend.laws import ACTION_DYNAMIC, FLUENT_DYNAMIC, STATIC, ActionDescription, CausalLaw
from .frontend.transform import ground_constants, is_ground
from .logic import (
    ACTION,
    SD,
    SIMPLE,
    TOP,
    Const,
    ConstKey,
    Formula,
    Implies,
    Sort,
    Var,
    conj,
    forall,
    free_vars,
    key_str,
    neg,
    show,
    stamp,
)


@dataclass(frozen=True)
class Rule:
    """``head <- body``; real-sorted ``variables`` are universally quantified."""

    head: Formula
    body: Formula
    variables: tuple[Var, ...] = ()
    law: Optional[CausalLaw] = field(default=None, compare=False)

    def formula(self) -> Formula:
        return forall(self.variables, Implies(self.body, self.head))

    def __str__(self) -> str:
        s = f"{show(self.head)} <- {show(self.body)}" if self.body != TOP else show(self.head)
        return s + "."


@dataclass(frozen=True)
class TimedProgram:
    horizon: int
    rules: tuple[Rule, ...]
    intensional: frozenset  # of ConstKey
    signature: dict  # ConstKey -> Sort, every timed constant
    constants: dict = field(default_factory=dict, compare=False)  # ConstKey -> Const

    def formula(self) -> Formula:
        return conj([r.formula() for r in self.rules])

    def const(self, key: ConstKey) -> Const:
        return self.constants[key]

    def dump(self) -> str:
        lines = [f"% horizon {self.horizon}"]
        lines.append("% intensional: " + " ".join(key_str(k) for k in sort_keys(self.intensional)))
        lines.extend(str(r) for r in self.rules)
        return "\n".join(lines) + "\n"


def sort_keys(keys) -> list:
    return sorted(keys, key=lambda k: (k[2] if k[2] is not None else -1, k[0], tuple(str(a) for a in k[1])))


def _rule(head: Formula, body: Formula, law: CausalLaw) -> Rule:
    vs = free_vars(head) | free_vars(body)
    return Rule(head, body, tuple(sorted(vs, key=lambda v: v.name)), law)


def _guarded(g: Formula, step: int) -> Formula:
    return TOP if g == TOP else neg(neg(stamp(g, step)))


def timed_signature(d: ActionDescription, m: int) -> dict[ConstKey, Const]:
    """All timed constants: i:fl for 0 <= i <= m and i:act for 0 <= i < m."""
    out = {}
    for c in ground_constants(d, (SIMPLE, SD)):
        for i in range(m + 1):
            out[c.at(i).key] = c.at(i)
    for c in ground_constants(d, (ACTION,)):
        for i in range(m):
            out[c.at(i).key] = c.at(i)
    return out


def intensional_keys(d: ActionDescription, m: int) -> frozenset:
    """0:sd, 0:act, 1:fl, 1:act, ..., (m-1):act, m:fl."""
    fl = ground_constants(d, (SIMPLE, SD))
    sd = ground_constants(d, (SD,))
    act = ground_constants(d, (ACTION,))
    keys = {c.at(0).key for c in sd}
    for i in range(m):
        keys |= {c.at(i).key for c in act}
    for i in range(1, m + 1):
        keys |= {c.at(i).key for c in fl}
    return frozenset(keys)


def translate(d: ActionDescription, m: int) -> TimedProgram:
    """Build D_m.  ``d`` must already be prepared (desugared, expanded, ground)."""
    if m < 0:
        raise ValueError(f"horizon must be non-negative, got {m}")
    if not is_ground(d):
        raise DefinitenessError("translate needs a prepared (ground) action description")
    rules: list[Rule] = []
    for law in d.by_kind(STATIC):
        for i in range(m + 1):
            rules.append(_rule(stamp(law.head, i), _guarded(law.if_part, i), law))
    for law in d.by_kind(ACTION_DYNAMIC):
        for i in range(m):
            rules.append(_rule(stamp(law.head, i), _guarded(law.if_part, i), law))
    for law in d.by_kind(FLUENT_DYNAMIC):
        for i in range(m):
            body = conj([g for g in (_guarded(law.if_part, i + 1), stamp(law.after, i)) if g != TOP])
            rules.append(_rule(stamp(law.head, i + 1), body, law))
    consts = timed_signature(d, m)
    return TimedProgram(
        m,
        tuple(rules),
        intensional_keys(d, m),
        {k: c.sort for k, c in consts.items()},
        consts,
    )


def program_for_states(d: ActionDescription) -> TimedProgram:
    """D_0 with intensional constants 0:sd; its stable models are the states."""
    p = translate(d, 0)
    sd = frozenset(c.at(0).key for c in ground_constants(d, (SD,)))
    return TimedProgram(0, p.rules, sd, p.signature, p.constants)


def signature_sorts(p: TimedProgram) -> dict[ConstKey, Sort]:
    return dict(p.signature)


__all__ = [
    "Rule",
    "TimedProgram",
    "translate",
    "program_for_states",
    "timed_signature",
    "intensional_keys",
    "sort_keys",
]
