from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aspmt.errors import EvaluationError, SortError
from aspmt.logic import (
    BOOLEAN,
    BOT,
    NONNEG_REAL,
    REAL,
    TOP,
    And,
    BinOp,
    Compare,
    Const,
    Equal,
    Exists,
    Forall,
    Implies,
    Interpretation,
    Num,
    Or,
    Sym,
    Var,
    conj,
    constants,
    disj,
    enum_sort,
    evaluate,
    free_vars,
    ground,
    has_quantifier,
    int_range,
    key_str,
    neg,
    show,
    show_number,
    simplify,
    stamp,
)

AXIS = enum_sort(("X", "Y", "Z"), "axis")
JET = enum_sort(("J1", "J2"), "jet")

speed0 = Const("Speed", (), NONNEG_REAL, 0)
speed1 = Const("Speed", (), NONNEG_REAL, 1)
duration = Const("Duration", (), NONNEG_REAL)


def test_equal_speeds_example():
    i = {speed0.key: Q(1), speed1.key: Q(1)}
    assert evaluate(Equal(speed1, speed0), i)


def test_falsum_is_false():
    assert not evaluate(BOT, {})
    assert evaluate(TOP, {})


def test_acceleration_effect_example():
    i = {speed0.key: Q(1), duration.key: Q(3, 2), speed1.key: Q(11, 2)}
    f = Equal(speed1, BinOp("+", speed0, BinOp("*", Num(3), duration)))
    assert evaluate(f, i)
    assert not evaluate(f, {**i, speed1.key: Q(6)})


def test_ground_forall_over_axis():
    ax = Var("ax", AXIS)
    p = Const("P", (ax,), BOOLEAN)
    g = ground(Forall(ax, Equal(p, Sym("true"))))
    assert g == conj([Equal(Const("P", (Sym(a),), BOOLEAN), Sym("true")) for a in "XYZ"])


def test_ground_exists_over_jets():
    j = Var("j", JET)
    fire = Const("Fire", (j,), BOOLEAN)
    g = ground(Exists(j, Equal(fire, Sym("true"))))
    assert g == disj([Equal(Const("Fire", (Sym(n),), BOOLEAN), Sym("true")) for n in ("J1", "J2")])


def test_ground_is_identity_on_ground_formulas():
    f = Implies(Equal(speed0, Num(1)), Compare("<=", speed1, Num(4)))
    assert ground(f) is f


def test_ground_keeps_real_quantifiers():
    x = Var("x", REAL)
    f = Forall(x, Equal(speed0, x))
    assert ground(f) == f and has_quantifier(ground(f))


def test_real_quantifier_needs_domain():
    x = Var("x", NONNEG_REAL)
    f = Exists(x, Equal(speed0, x))
    with pytest.raises(EvaluationError):
        evaluate(f, {speed0.key: Q(2)})
    assert evaluate(f, {speed0.key: Q(2)}, real_domain=[Q(-2), Q(2)])
    assert not evaluate(f, {speed0.key: Q(-2)}, real_domain=[Q(-2), Q(2)])


def test_tolerance_applies_to_numbers_only():
    i = {speed0.key: Q(1), speed1.key: Q(1) + Q(1, 10**12)}
    assert not evaluate(Equal(speed0, speed1), i)
    assert evaluate(Equal(speed0, speed1), i, tol=Q(1, 10**9))
    assert evaluate(Compare("<", speed1, speed0), i, tol=Q(1, 10**9))


def test_sort_errors():
    with pytest.raises(SortError):
        BinOp("+", Sym("a"), Num(1))
    with pytest.raises(SortError):
        BinOp("/", Num(1), Num(0))
    with pytest.raises(SortError):
        int_range(3, 1)
    with pytest.raises(SortError):
        enum_sort(("a", "a"))


def test_stamp_and_key_str():
    f = stamp(Equal(Const("On", (Sym("Tap1"),), BOOLEAN), Sym("true")), 2)
    (c,) = constants(f)
    assert c.step == 2 and key_str(c.key) == "2:On(Tap1)"


def test_show():
    f = Implies(And(Equal(speed0, Num(1)), neg(Equal(speed1, Num(Q(11, 2))))), BOT)
    assert show(f) == "-(0:Speed = 1 & -(1:Speed = 5.5))"
    assert show(Implies(Equal(speed0, Num(1)), Compare("<=", speed1, Num(4)))) == "0:Speed = 1 -> 1:Speed <= 4"
    assert show_number(Q(1, 3)) == "(1/3)"
    assert show_number(Q(-5, 2)) == "-2.5"


def test_interpretation_mapping():
    i = Interpretation({speed0.key: Q(1)})
    assert i == {speed0.key: Q(1)} and hash(i) == hash(Interpretation({speed0.key: Q(1)}))
    with pytest.raises(SortError):
        Interpretation({speed0.key: Q(-1)}).check_sorts({speed0.key: NONNEG_REAL})


# --------------------------------------------------------------------------
# properties over random ground formulas

B = [Const(n, (), BOOLEAN) for n in "pqr"]
N = Const("n", (), int_range(0, 2))
KEYS = [c.key for c in B] + [N.key]


def _atoms():
    bools = st.sampled_from(B).flatmap(lambda c: st.sampled_from([Equal(c, Sym("true")), Equal(c, Sym("false"))]))
    nums = st.integers(0, 2).map(lambda k: Equal(N, Num(k)))
    cmps = st.tuples(st.sampled_from(["<", "<=", ">", ">="]), st.integers(-1, 3)).map(
        lambda t: Compare(t[0], BinOp("+", N, Num(1)), Num(t[1]))
    )
    lits = st.sampled_from([TOP, BOT, Equal(Num(1), Num(1)), Equal(Sym("a"), Sym("b"))])
    return st.one_of(bools, nums, cmps, lits)


formulas = st.recursive(
    _atoms(),
    lambda sub: st.one_of(
        st.tuples(sub, sub).map(lambda t: And(*t)),
        st.tuples(sub, sub).map(lambda t: Or(*t)),
        st.tuples(sub, sub).map(lambda t: Implies(*t)),
    ),
    max_leaves=12,
)

interps = st.tuples(*[st.sampled_from(["false", "true"])] * 3, st.integers(0, 2)).map(
    lambda t: dict(zip(KEYS, list(t[:3]) + [Q(t[3])]))
)


@settings(max_examples=300, deadline=None)
@given(formulas, interps)
def test_simplify_preserves_truth(f, i):
    assert evaluate(simplify(f), i) == evaluate(f, i)


@settings(max_examples=200, deadline=None)
@given(formulas)
def test_simplify_is_idempotent(f):
    assert simplify(simplify(f)) == simplify(f)


@settings(max_examples=200, deadline=None)
@given(formulas, interps)
def test_grounded_quantifier_matches_evaluation(f, i):
    v = Var("v", int_range(0, 2))
    body = Or(f, Equal(N, v))
    for q in (Forall, Exists):
        g = q(v, body)
        assert evaluate(ground(g), i) == evaluate(g, i)
        assert not free_vars(ground(g))
