import pytest

from aspmt import corpus_path
from aspmt.frontend import parse_file, prepare
from aspmt.logic import BOOLEAN, NONNEG_REAL, Const, Equal, Implies, Sym, Var, conj, neg
from aspmt.tightness import (
    build_graph,
    dependency_graph,
    is_tight,
    is_tight_formula,
    strictly_positive_constants,
)
from aspmt.translator import Rule, translate

p, q = (Const(n, (), BOOLEAN) for n in "pq")
P, Q = Equal(p, Sym("true")), Equal(q, Sym("true"))


def keys(*cs):
    return {c.key for c in cs}


def test_strictly_positive_examples(car):
    inertia = next(r for r in translate(car, 1).rules if str(r).startswith("1:Speed = _v"))
    assert strictly_positive_constants(inertia.body) == {("Speed", (), 0)}
    assert strictly_positive_constants(P) == keys(p)
    assert strictly_positive_constants(Implies(P, Q)) == keys(q)
    assert strictly_positive_constants(neg(P)) == set()


def test_car_graph_has_only_action_edges(car):
    g = build_graph(translate(car, 1))
    assert sorted((a[0], b[0]) for a, b in g.edges()) == [
        ("Distance", "Dur"), ("Speed", "Accelerate"), ("Speed", "Decelerate"), ("Speed", "Dur"),
    ]
    assert is_tight(translate(car, 1))


def test_self_loop():
    f = Rule(P, P).formula()
    g = dependency_graph(f, keys(p))
    assert list(g.edges()) == [(p.key, p.key)]
    t = is_tight_formula(f, keys(p))
    assert not t and t.cycle == (p.key,)
    assert t.describe() == "NOT TIGHT: cycle p -> p"


def test_double_negation_breaks_loop():
    assert is_tight_formula(Rule(P, neg(neg(P))).formula(), keys(p))


def test_two_cycle_witness():
    f = conj([Rule(P, Q).formula(), Rule(Q, P).formula()])
    t = is_tight_formula(f, keys(p, q))
    assert not t and set(t.cycle) == keys(p, q)
    assert is_tight_formula(f, keys(p))


def test_intro_formula_is_tight():
    # Speed_1 = x <- Speed_1 = x & Speed_0 = x written without double negation is not tight,
    # with the double negation it is
    s0, s1 = Const("Speed", (), step=0), Const("Speed", (), step=1)
    x = Var("x", NONNEG_REAL)
    tight = Rule(Equal(s1, x), conj([neg(neg(Equal(s1, x))), Equal(s0, x)]), (x,)).formula()
    loose = Rule(Equal(s1, x), conj([Equal(s1, x), Equal(s0, x)]), (x,)).formula()
    assert is_tight_formula(tight, {s1.key})
    assert not is_tight_formula(loose, {s1.key})


@pytest.mark.parametrize("name", ["car", "spacecraft", "watertank"])
def test_corpus_is_tight(name):
    d = prepare(parse_file(corpus_path(name)))
    for m in range(4):
        assert is_tight(translate(d, m)), (name, m)


def test_graph_ignores_conjunct_order(spacecraft):
    p2 = translate(spacecraft, 2)
    g1 = build_graph(p2)
    g2 = dependency_graph(conj([r.formula() for r in reversed(p2.rules)]), p2.intensional)
    assert set(g1.edges()) == set(g2.edges()) and set(g1.nodes()) == set(g2.nodes())
