"""Random small theories and action descriptions for the property suites."""

from __future__ import annotations

import random
from dataclasses import dataclass

from aspmt.logic import (
    BOOLEAN,
    BOT,
    Const,
    Equal,
    Formula,
    Implies,
    conj,
    disj,
    enum_sort,
    int_range,
    neg,
    value_term,
)
from aspmt.translator import Rule

SORTS = [BOOLEAN, enum_sort(("a", "b"), "ab"), enum_sort(("a", "b", "c"), "abc"), int_range(0, 1), int_range(0, 2)]


@dataclass
class Theory:
    consts: dict  # key -> Const
    intensional: frozenset
    rules: list  # of Rule

    @property
    def domains(self) -> dict:
        return {k: c.sort.domain() for k, c in self.consts.items()}

    def formula(self) -> Formula:
        return conj([r.formula() for r in self.rules])


def _atom(rng: random.Random, c: Const) -> Formula:
    return Equal(c, value_term(rng.choice(c.sort.domain())))


def _literal(rng: random.Random, c: Const, positive_ok: bool) -> Formula:
    kinds = ["neg", "negneg"] + (["pos", "pos"] if positive_ok else [])
    kind = rng.choice(kinds)
    a = _atom(rng, c)
    if kind == "neg":
        return neg(a)
    if kind == "negneg":
        return neg(neg(a))
    return a


def random_constants(rng: random.Random, n: int) -> list[Const]:
    return [Const(f"c{i}", (), rng.choice(SORTS)) for i in range(n)]


def random_body(rng: random.Random, consts: list[Const], allowed_positive: set, intensional: set) -> Formula:
    """Conjunction (occasionally with one disjunction) of literals; positive
    intensional occurrences are limited to ``allowed_positive``."""
    parts = []
    for _ in range(rng.randint(0, 3)):
        c = rng.choice(consts)
        ok = c.key not in intensional or c.key in allowed_positive
        parts.append(_literal(rng, c, ok))
    if parts and rng.random() < 0.2:
        c = rng.choice(consts)
        ok = c.key not in intensional or c.key in allowed_positive
        parts[-1] = disj([parts[-1], _literal(rng, c, ok)])
    return conj(parts)


def random_tight_theory(rng: random.Random, max_consts: int = 4) -> Theory:
    """Rules ``c = v <- body`` whose positive intensional body constants come
    strictly earlier in a random order of the intensional constants."""
    consts = random_constants(rng, rng.randint(1, max_consts))
    intensional = {c.key for c in consts if rng.random() < 0.7} or {consts[0].key}
    order = [c for c in consts if c.key in intensional]
    rng.shuffle(order)
    rank = {c.key: i for i, c in enumerate(order)}
    rules = []
    for _ in range(rng.randint(1, 5)):
        if rng.random() < 0.2:
            body = random_body(rng, consts, set(intensional), intensional)
            if body != conj([]):
                rules.append(Rule(BOT, body))
            continue
        head_c = rng.choice(order)
        earlier = {k for k, r in rank.items() if r < rank[head_c.key]}
        head = _atom(rng, head_c)
        extensional = [c for c in consts if c.key not in intensional and c.sort == head_c.sort]
        if extensional and rng.random() < 0.15:
            head = Equal(head_c, rng.choice(extensional))
        rules.append(Rule(head, random_body(rng, consts, earlier, intensional)))
    return Theory({c.key: c for c in consts}, frozenset(intensional), rules)


def random_theory(rng: random.Random, max_consts: int = 4) -> Theory:
    """Like :func:`random_tight_theory` without the ordering restriction."""
    consts = random_constants(rng, rng.randint(1, max_consts))
    intensional = {c.key for c in consts if rng.random() < 0.7} or {consts[0].key}
    rules = []
    for _ in range(rng.randint(1, 5)):
        head_c = rng.choice([c for c in consts if c.key in intensional])
        body = random_body(rng, consts, set(intensional), intensional)
        rules.append(Rule(_atom(rng, head_c), body))
    return Theory({c.key: c for c in consts}, frozenset(intensional), rules)


def random_negative_formula(rng: random.Random, t: Theory) -> Formula:
    """A formula without strictly positive occurrences of intensional constants."""
    consts = list(t.consts.values())
    ext = [c for c in consts if c.key not in t.intensional]
    parts = []
    for _ in range(rng.randint(1, 2)):
        shape = rng.random()
        antecedent = conj([_atom(rng, rng.choice(consts)) for _ in range(rng.randint(1, 2))])
        if shape < 0.4:
            parts.append(neg(antecedent))
        elif shape < 0.7 and ext:
            parts.append(Implies(antecedent, _atom(rng, rng.choice(ext))))
        elif ext:
            parts.append(disj([_atom(rng, rng.choice(ext)), neg(_atom(rng, rng.choice(consts)))]))
        else:
            parts.append(neg(neg(antecedent)))
    return conj(parts)


# --------------------------------------------------------------------------
# action descriptions


def _value_text(v) -> str:
    return str(v) if not isinstance(v, str) else v


def _fluent_atom(rng: random.Random, name: str, sort_name: str, domains: dict) -> str:
    v = rng.choice(domains[sort_name])
    if sort_name == "boolean":
        return name if v == "true" else f"~{name}"
    return f"{name} = {_value_text(v)}"


def random_action_description(rng: random.Random) -> str:
    """Source text of a small description with finite sorts only."""
    domains = {"boolean": ("true", "false"), "s2": ("0", "1"), "s3": ("0", "1", "2"), "col": ("r", "g", "b")}
    n_fl = rng.randint(1, 3)
    n_act = rng.randint(1, 2)
    fluents = []
    size = 1
    for i in range(n_fl):
        # the state space stays at most 12 so that D_3 remains enumerable
        options = [s for s in domains if size * len(domains[s]) <= 12]
        if not options:
            break
        sort = rng.choice(options)
        size *= len(domains[sort])
        kind = "sdFluent" if i > 0 and rng.random() < 0.25 else "simpleFluent"
        fluents.append((f"F{i}", sort, kind))
    actions = [f"A{i}" for i in range(n_act)]
    simple = [f for f in fluents if f[2] == "simpleFluent"]
    lines = [":- sorts", "    s2 = 0..1;", "    s3 = 0..2;", "    col = {r, g, b}.", ":- constants"]
    decls = [f"    {n} :: {k}({s})" for n, s, k in fluents] + [f"    {a} :: action(boolean)" for a in actions]
    lines.append(";\n".join(decls) + ".")

    def fatom(f=None):
        f = f or rng.choice(fluents)
        return _fluent_atom(rng, f[0], f[1], domains)

    def cond():
        return " & ".join(fatom() for _ in range(rng.randint(1, 2)))

    # a non-inertial simple fluent is free at every step, which multiplies the
    # classical models the oracle has to refute; keep those rare and small
    inertial = [f[0] for f in simple if len(domains[f[1]]) == 3 or rng.random() < 0.85]
    if inertial:
        lines.append(f"inertial {', '.join(inertial)}.")
    lines.append(f"exogenous {', '.join(actions)}.")
    for _ in range(rng.randint(1, 3)):
        a = rng.choice(actions)
        f = rng.choice(simple)
        line = f"{a} causes {fatom(f)}"
        if rng.random() < 0.5:
            line += f" if {cond()}"
        lines.append(line + ".")
    for n, s, k in fluents:
        if k == "sdFluent":
            dom = domains[s]
            lines.append(f"default {_fluent_atom(rng, n, s, {s: (dom[0],)})}.")
            lines.append(f"caused {fatom((n, s, k))} if {cond()}.")
    shapes = rng.sample(["static", "constraint", "after", "nonex", "none"], 2)
    for shape in shapes:
        if shape == "static" and simple:
            lines.append(f"caused {fatom(rng.choice(simple))} if {cond()}.")
        elif shape == "constraint":
            lines.append(f"constraint ~({cond()}).")
        elif shape == "after" and simple:
            lines.append(f"caused {fatom(rng.choice(simple))} after {rng.choice(actions)} & {cond()}.")
        elif shape == "nonex" and n_act == 2:
            lines.append(f"constraint ~({actions[0]} & {actions[1]}) .")
    return "\n".join(lines) + "\n"
