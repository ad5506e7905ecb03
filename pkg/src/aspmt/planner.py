"""Query answering over increasing horizons, plan decoding and re-verification."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

import mpmath

from .completion import CompletionPart, program_completion_parts
from .errors import CompletionError, EvaluationError
from .frontend.laws import ActionDescription, Query, mentions_action
from .frontend.transform import ground_constants, is_ground, prepare
from .logic import (
    ACTION,
    SD,
    SIMPLE,
    Formula,
    Value,
    conj,
    conjuncts,
    evaluate,
    has_quantifier,
    key_str,
    show_number,
    simplify,
    stamp,
)
from .smt import SAT, TOLERANCE, UNKNOWN, SmtInstance, SolverResult, emit, solve
from .tightness import is_tight
from .translator import TimedProgram, program_for_states, sort_keys, translate

FOUND, NO_PLAN, INCONCLUSIVE = "plan", "noplan", "inconclusive"


# --------------------------------------------------------------------------
# compilation of one horizon


def query_formulas(query: Optional[Query], m: int, d: ActionDescription) -> list[tuple[str, Formula]]:
    """Time-stamped query constraints for horizon ``m``."""
    if query is None:
        return []
    out = []
    for c in query.constraints:
        if c.label == "maxstep":
            steps = [m]
        elif c.label == "every":
            steps = list(range(m + 1))
        else:
            steps = [c.label] if c.label <= m else []
        for i in steps:
            f = c.formula
            if i == m and mentions_action(f, d):
                # no actions at the last step: keep only the action-free conjuncts
                f = conj([g for g in conjuncts(f) if not mentions_action(g, d)])
            out.append((f"query {c.label} at step {i}", simplify(stamp(f, i))))
    return out


@dataclass
class Compiled:
    horizon: int
    program: TimedProgram
    parts: list[CompletionPart]
    query: list[tuple[str, Formula]]
    instance: SmtInstance

    def assertions(self) -> list[tuple[str, Formula]]:
        return [(p.label, p.formula) for p in self.parts] + self.query


def compile_horizon(
    d: ActionDescription,
    m: int,
    query: Optional[Query] = None,
    allow_quantifiers: bool = False,
) -> Compiled:
    """D_m -> tightness check -> completion -> SMT instance (with query constraints)."""
    program = translate(d, m)
    tight = is_tight(program)
    if not tight:
        raise CompletionError(f"D_{m} is not tight: {tight.describe()}")
    parts = program_completion_parts(program)
    q = query_formulas(query, m, d)
    inst = emit([(p.label, p.formula) for p in parts] + q, program.signature, allow_quantifiers)
    return Compiled(m, program, parts, q, inst)


# --------------------------------------------------------------------------
# traces


@dataclass
class PlanTrace:
    states: list[dict]  # untimed key -> value, for s_0 .. s_m
    events: list[dict]  # untimed key -> value, for e_0 .. e_{m-1}
    approximate: frozenset = frozenset()  # timed keys with rounded values

    @property
    def horizon(self) -> int:
        return len(self.events)

    def interpretation(self, offset: int = 0) -> dict:
        out = {}
        for i, s in enumerate(self.states):
            out.update({(n, a, i + offset): v for (n, a, _), v in s.items()})
        for i, e in enumerate(self.events):
            out.update({(n, a, i + offset): v for (n, a, _), v in e.items()})
        return out

    def value(self, name: str, step: int, args: tuple = ()) -> Value:
        key = (name, args, None)
        if key in self.states[step]:
            return self.states[step][key]
        return self.events[step][key]

    def text(self) -> str:
        lines = []
        for i, s in enumerate(self.states):
            line = f"{i}: {_show_map(s, self.approximate, i)}"
            if i < len(self.events):
                line += f"  |  {_show_map(self.events[i], self.approximate, i)}"
            lines.append(line)
        return "\n".join(lines)

    def to_json(self) -> dict:
        def conv(m, i):
            return {key_str(k): _json_value(v, (k[0], k[1], i) in self.approximate) for k, v in sorted(m.items(), key=_order)}

        return {
            "horizon": self.horizon,
            "states": [conv(s, i) for i, s in enumerate(self.states)],
            "events": [conv(e, i) for i, e in enumerate(self.events)],
            "approximate": [key_str(k) for k in sort_keys(self.approximate)],
        }


def _order(item):
    (name, args, _), _ = item
    return (name, tuple(str(a) for a in args))


def _show_value(v: Value, approx: bool) -> str:
    if isinstance(v, Fraction):
        if approx:
            return "~" + mpmath.nstr(mpmath.mpf(v.numerator) / v.denominator, 15)
        return show_number(v)
    return v


def _json_value(v: Value, approx: bool):
    if isinstance(v, Fraction):
        if approx:
            return mpmath.nstr(mpmath.mpf(v.numerator) / v.denominator, 20)
        return show_number(v)
    return v


def _show_map(m: Mapping, approx: frozenset, step: int) -> str:
    items = [f"{key_str(k)}={_show_value(v, (k[0], k[1], step) in approx)}" for k, v in sorted(m.items(), key=_order)]
    return "{" + ", ".join(items) + "}"


def decode(d: ActionDescription, result: SolverResult, m: int) -> PlanTrace:
    fl = ground_constants(d, (SIMPLE, SD))
    act = ground_constants(d, (ACTION,))
    model = result.model
    states = [{c.key: model[c.at(i).key] for c in fl} for i in range(m + 1)]
    events = [{c.key: model[c.at(i).key] for c in act} for i in range(m)]
    return PlanTrace(states, events, result.approximate)


# --------------------------------------------------------------------------
# verification


@dataclass
class Verification:
    ok: bool
    step: Optional[int] = None
    part: Optional[str] = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _check_parts(d: ActionDescription, m: int) -> tuple:
    p = program_for_states(d) if m == 0 else translate(d, 1)
    return tuple(program_completion_parts(p))


def _eval_parts(parts, interp, tol, step) -> Verification:
    for part in parts:
        if has_quantifier(part.formula):
            return Verification(False, step, part.label, "formula still has real quantifiers; cannot check")
        try:
            ok = evaluate(part.formula, interp, tol=tol)
        except EvaluationError as exc:
            return Verification(False, step, part.label, str(exc))
        if not ok:
            return Verification(False, step, part.label, f"{part.label} is violated")
    return Verification(True)


def verify_trace(d: ActionDescription, trace: PlanTrace, tolerance: Optional[Fraction] = None) -> Verification:
    """Check every state (D_0) and every triple (s_i, e_i, s_i+1) against the completed D_1.

    ``d`` must be prepared.  Approximate traces are checked with ``tolerance``
    (default 1e-9); exact traces are checked exactly.
    """
    tol = None
    if trace.approximate:
        tol = tolerance if tolerance is not None else TOLERANCE
    states = _check_parts(d, 0)
    for i, s in enumerate(trace.states):
        v = _eval_parts(states, {(n, a, 0): x for (n, a, _), x in s.items()}, tol, i)
        if not v:
            v.message = f"state {i} is not a state: {v.message}"
            return v
    transitions = _check_parts(d, 1)
    for i, e in enumerate(trace.events):
        interp = {(n, a, 0): x for (n, a, _), x in trace.states[i].items()}
        interp.update({(n, a, 0): x for (n, a, _), x in e.items()})
        interp.update({(n, a, 1): x for (n, a, _), x in trace.states[i + 1].items()})
        v = _eval_parts(transitions, interp, tol, i)
        if not v:
            v.message = f"transition {i} -> {i + 1}: {v.message}"
            return v
    return Verification(True)


def check_query(d: ActionDescription, query: Query, trace: PlanTrace, tolerance: Optional[Fraction] = None) -> Verification:
    tol = (tolerance if tolerance is not None else TOLERANCE) if trace.approximate else None
    interp = trace.interpretation()
    for label, f in query_formulas(query, trace.horizon, d):
        if not evaluate(f, interp, tol=tol):
            return Verification(False, None, label, f"{label} is violated")
    return Verification(True)


# --------------------------------------------------------------------------
# planning


@dataclass
class Attempt:
    horizon: int
    status: str
    seconds: float


@dataclass
class PlanResult:
    status: str  # FOUND | NO_PLAN | INCONCLUSIVE
    trace: Optional[PlanTrace] = None
    horizon: Optional[int] = None
    log: list[Attempt] = field(default_factory=list)
    compiled: Optional[Compiled] = None
    result: Optional[SolverResult] = None

    @property
    def found(self) -> bool:
        return self.status == FOUND


def horizons(query: Optional[Query], maxstep: Optional[tuple[int, int]] = None) -> range:
    if maxstep is not None:
        lo, hi = maxstep
    elif query is not None:
        lo, hi = query.min_horizon, query.max_horizon
    else:
        lo, hi = 0, 0
    return range(lo, hi + 1)


def plan(
    d: ActionDescription,
    query: Optional[Query] = None,
    maxstep: Optional[tuple[int, int]] = None,
    solver: Optional[str] = None,
    strict: bool = False,
    timeout: Optional[float] = None,
    allow_quantifiers: bool = False,
) -> PlanResult:
    """Try horizons in ascending order and return the first plan.

    ``maxstep=(m, m)`` solves a single horizon.  An UNKNOWN verdict stops the
    search with INCONCLUSIVE rather than being read as "no plan".
    """
    if not is_ground(d):
        d = prepare(d)
    if query is None:
        query = d.query
    log: list[Attempt] = []
    compiled = None
    for m in horizons(query, maxstep):
        compiled = compile_horizon(d, m, query, allow_quantifiers)
        result = solve(compiled.instance, solver, timeout, strict)
        log.append(Attempt(m, result.status, result.seconds))
        if result.status == SAT:
            trace = decode(d, result, m)
            return PlanResult(FOUND, trace, m, log, compiled, result)
        if result.status == UNKNOWN:
            return PlanResult(INCONCLUSIVE, None, m, log, compiled, result)
    return PlanResult(NO_PLAN, None, log[-1].horizon if log else None, log, compiled)


def plan_json(res: PlanResult) -> str:
    out = {
        "status": res.status,
        "horizon": res.horizon,
        "log": [{"horizon": a.horizon, "status": a.status, "seconds": round(a.seconds, 4)} for a in res.log],
    }
    if res.trace is not None:
        out["plan"] = res.trace.to_json()
    return json.dumps(out, indent=2)


__all__ = [
    "FOUND",
    "NO_PLAN",
    "INCONCLUSIVE",
    "Compiled",
    "PlanTrace",
    "PlanResult",
    "Verification",
    "Attempt",
    "compile_horizon",
    "query_formulas",
    "decode",
    "verify_trace",
    "check_query",
    "plan",
    "plan_json",
    "horizons",
]
