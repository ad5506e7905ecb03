"""t-dependency graph and tightness."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import networkx as nx

from .logic import And, Compare, ConstKey, Equal, Exists, Forall, Formula, Implies, Or, constants, key_str
from .translator import TimedProgram, sort_keys


def strictly_positive_constants(f: Formula) -> set[ConstKey]:
    """Constants with an occurrence outside every implication antecedent."""
    out: set[ConstKey] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, (Equal, Compare)):
            out.update(c.key for c in constants(g))
        elif isinstance(g, (And, Or)):
            stack += [g.left, g.right]
        elif isinstance(g, Implies):
            stack.append(g.right)
        elif isinstance(g, (Forall, Exists)):
            stack.append(g.body)
    return out


def strictly_positive_implications(f: Formula) -> Iterable[Implies]:
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, (And, Or)):
            stack += [g.right, g.left]
        elif isinstance(g, Implies):
            yield g
            stack.append(g.right)
        elif isinstance(g, (Forall, Exists)):
            stack.append(g.body)


def dependency_graph(f: Formula, intensional: Iterable[ConstKey]) -> nx.DiGraph:
    """Edge c -> d when, for some strictly positive G -> H, c is strictly positive
    in H and d is strictly positive in G (both intensional)."""
    intensional = set(intensional)
    g = nx.DiGraph()
    g.add_nodes_from(sort_keys(intensional))
    for imp in strictly_positive_implications(f):
        heads = strictly_positive_constants(imp.right) & intensional
        if not heads:
            continue
        bodies = strictly_positive_constants(imp.left) & intensional
        for c in heads:
            for d in bodies:
                g.add_edge(c, d)
    return g


def build_graph(p: TimedProgram) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(sort_keys(p.intensional))
    for r in p.rules:
        g.add_edges_from(dependency_graph(r.formula(), p.intensional).edges)
    return g


@dataclass(frozen=True)
class Tightness:
    tight: bool
    order: Optional[tuple] = None  # topological order (dependencies last) when tight
    cycle: Optional[tuple] = None  # vertex sequence of a cycle otherwise

    def __bool__(self) -> bool:
        return self.tight

    def describe(self) -> str:
        if self.tight:
            return "TIGHT"
        return "NOT TIGHT: cycle " + " -> ".join(key_str(k) for k in self.cycle + self.cycle[:1])


def check_graph(g: nx.DiGraph) -> Tightness:
    try:
        cycle = nx.find_cycle(g)
    except nx.NetworkXNoCycle:
        return Tightness(True, order=tuple(nx.lexicographical_topological_sort(g, key=str)))
    return Tightness(False, cycle=tuple(u for u, _ in cycle))


def is_tight(p: TimedProgram) -> Tightness:
    return check_graph(build_graph(p))


def is_tight_formula(f: Formula, intensional: Iterable[ConstKey]) -> Tightness:
    return check_graph(dependency_graph(f, intensional))


__all__ = [
    "strictly_positive_constants",
    "strictly_positive_implications",
    "dependency_graph",
    "build_graph",
    "Tightness",
    "is_tight",
    "is_tight_formula",
]
