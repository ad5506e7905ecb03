"""Abstract syntax of action descriptions: causal laws, abbreviations, increment laws, queries."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

from ..logic import (
    ACTION,
    BOT,
    RIGID,
    SD,
    SIMPLE,
    TOP,
    Const,
    ConstantDecl,
    ConstKey,
    Formula,
    Sort,
    Term,
    Value,
    Var,
    constants,
)

STATIC = "static"
ACTION_DYNAMIC = "actionDynamic"
FLUENT_DYNAMIC = "fluentDynamic"


@dataclass(frozen=True)
class CausalLaw:
    """``caused head if if_part [after after]``."""

    kind: str
    head: Formula
    if_part: Formula = TOP
    after: Optional[Formula] = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class IncrementLaw:
    """``trigger increments target by amount if bindings & condition``."""

    trigger: Const
    target: Const
    amount: Term
    bindings: tuple[tuple[Const, Var], ...] = ()
    condition: Formula = TOP
    line: int = field(default=0, compare=False)


# abbreviations, as written in the source; removed by desugar()


@dataclass(frozen=True)
class Exogenous:
    consts: tuple[Const, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Inertial:
    consts: tuple[Const, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Constraint:
    formula: Formula
    after: Optional[Formula] = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Always:
    formula: Formula
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Default:
    atom: Formula
    if_part: Formula = TOP
    after: Optional[Formula] = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Causes:
    action: Formula
    effect: Formula
    if_part: Formula = TOP
    line: int = field(default=0, compare=False)


Abbreviation = Union[Exogenous, Inertial, Constraint, Always, Default, Causes]
Law = Union[CausalLaw, Abbreviation]


@dataclass(frozen=True)
class StepConstraint:
    label: Union[int, str]  # an integer step, "maxstep" or "every"
    formula: Formula
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Query:
    min_horizon: int = 0
    max_horizon: int = 0
    constraints: tuple[StepConstraint, ...] = ()
    mode: str = "incremental"  # or "fixed"

    @property
    def init(self) -> list[Formula]:
        return [c.formula for c in self.constraints if c.label == 0]

    @property
    def goal(self) -> list[Formula]:
        return [c.formula for c in self.constraints if c.label == "maxstep"]


@dataclass(frozen=True)
class ActionDescription:
    sorts: dict[str, Sort] = field(default_factory=dict)
    constants: dict[str, ConstantDecl] = field(default_factory=dict)
    variables: dict[str, Var] = field(default_factory=dict)
    values: dict[ConstKey, Value] = field(default_factory=dict)
    laws: tuple[Law, ...] = ()
    increment_laws: tuple[IncrementLaw, ...] = ()
    query: Optional[Query] = None

    def replace(self, **changes) -> "ActionDescription":
        return replace(self, **changes)

    def decl(self, c: Const) -> ConstantDecl:
        return self.constants[c.name]

    @property
    def causal_laws(self) -> list[CausalLaw]:
        return [law for law in self.laws if isinstance(law, CausalLaw)]

    def by_kind(self, kind: str) -> list[CausalLaw]:
        return [law for law in self.laws if isinstance(law, CausalLaw) and law.kind == kind]

    def fluents(self) -> list[ConstantDecl]:
        return [d for d in self.constants.values() if d.is_fluent]

    def actions(self) -> list[ConstantDecl]:
        return [d for d in self.constants.values() if d.kind == ACTION]


def const_kinds(f: Formula, description: ActionDescription) -> set[str]:
    """Kinds (simpleFluent/sdFluent/action/rigid) of the constants occurring in ``f``."""
    out = set()
    for c in constants(f):
        d = description.constants.get(c.name)
        if d is not None:
            out.add(d.kind)
    return out


def is_fluent_formula(f: Formula, description: ActionDescription) -> bool:
    return ACTION not in const_kinds(f, description)


def mentions_action(f: Formula, description: ActionDescription) -> bool:
    return ACTION in const_kinds(f, description)


__all__ = [
    "STATIC",
    "ACTION_DYNAMIC",
    "FLUENT_DYNAMIC",
    "CausalLaw",
    "IncrementLaw",
    "Exogenous",
    "Inertial",
    "Constraint",
    "Always",
    "Default",
    "Causes",
    "Law",
    "StepConstraint",
    "Query",
    "ActionDescription",
    "const_kinds",
    "is_fluent_formula",
    "mentions_action",
    "BOT",
    "TOP",
    "SIMPLE",
    "SD",
    "ACTION",
    "RIGID",
]
