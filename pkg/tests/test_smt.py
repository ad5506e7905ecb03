import random
from fractions import Fraction as Q

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aspmt.errors import EmissionError, SolverError
from aspmt.logic import (
    BOOLEAN,
    NONNEG_REAL,
    REAL,
    TOP,
    BinOp,
    Compare,
    Const,
    Equal,
    Exists,
    Num,
    Sym,
    Var,
    conj,
    constants,
    enum_sort,
    evaluate,
    int_range,
)
from aspmt.planner import compile_horizon
from aspmt.oracle import classical_models
from aspmt.smt import SAT, UNSAT, emit, parse_output, parse_sexprs, smt_name, solve
from conftest import needs_solver
from generators import random_tight_theory

x = Const("x", (), REAL)
y = Const("y", (), NONNEG_REAL)
b = Const("b", (), BOOLEAN)
COLOR = enum_sort(("r", "g", "b"), "col")
col = Const("Col", (), COLOR, 2)


def sorts(*cs):
    return {c.key: c.sort for c in cs}


def test_names_are_quoted():
    assert smt_name(("Speed", (), 1)) == "|1:Speed|"
    assert smt_name(("contr(On(Tap1),Level)", (), 0)) == "|0:contr(On(Tap1),Level)|"
    assert smt_name(("Mass", (), None)) == "|Mass|"


def test_declarations_and_guards():
    inst = emit([("a", Compare("<", x, y))], sorts(x, y, col))
    assert inst.declarations == (("|x|", "Real"), ("|y|", "Real"), ("|2:Col|", "Int"))
    text = inst.text()
    assert "(assert (and (>= |2:Col| 0) (<= |2:Col| 2)))" in text
    assert "(assert (>= |y| 0.0))" in text
    assert text.endswith("(check-sat)\n(get-model)\n(exit)\n")


def test_enum_atoms_use_indices():
    inst = emit([("", Equal(col, Sym("b")))], sorts(col))
    assert inst.assertions[-1][1] == "(= |2:Col| 2)"


def test_numerals():
    inst = emit([("", Equal(x, BinOp("-", Num(Q(-5, 2)), Num(3))))], sorts(x))
    assert inst.assertions[-1][1] == "(= |x| (- (/ 11.0 2.0)))"


@pytest.mark.parametrize(
    "f, logic",
    [
        (Compare("<=", x, Num(4)), "QF_LRA"),
        (Equal(x, BinOp("*", y, y)), "QF_NRA"),
        (Equal(b, Sym("true")), "QF_UF"),
    ],
)
def test_logic_tag(f, logic):
    assert emit([("", f)], sorts(*constants(f))).logic == logic


def test_mixed_logic():
    n = Const("n", (), int_range(0, 3))
    assert emit([("", Compare("<", n, x))], sorts(n, x)).logic == "QF_LIRA"


def test_corpus_logics(car, watertank, spacecraft):
    assert compile_horizon(car, 3, car.query).instance.logic == "QF_NRA"
    assert compile_horizon(watertank, 2, watertank.query).instance.logic == "QF_LRA"
    assert compile_horizon(spacecraft, 2, spacecraft.query).instance.logic == "QF_NRA"


def test_spacecraft_declares_signature(spacecraft):
    c = compile_horizon(spacecraft, 2, spacecraft.query)
    assert len(c.instance.declarations) == len(c.program.signature) == 51


def test_compilation_is_deterministic(car, watertank):
    for d in (car, watertank):
        assert compile_horizon(d, 3, d.query).instance.text() == compile_horizon(d, 3, d.query).instance.text()


def test_quantifiers_need_flag():
    v = Var("v", REAL)
    f = Exists(v, Compare("<", v, x))
    with pytest.raises(EmissionError):
        emit([("", f)], sorts(x))
    inst = emit([("", f)], sorts(x), allow_quantifiers=True)
    assert inst.logic == "LRA" and "(exists ((|?v| Real))" in inst.text()


def test_undeclared_constant():
    with pytest.raises(EmissionError):
        emit([("", Compare("<", x, y))], sorts(x))


def test_true_assertions_dropped():
    assert emit([("", TOP)], {}).assertions == ()


# --------------------------------------------------------------------------
# model parsing on canned outputs

CANNED = """sat
(
  (define-fun |x| () Real
    (root-obj (+ (^ x 2) (- 6)) 2))
  (define-fun |y| () Real
    (/ 11.0 2.0))
  (define-fun |b| () Bool
    true)
  (define-fun |2:Col| () Int
    1)
)
"""


def test_parse_sexprs():
    assert parse_sexprs("(a (b |c d|) ; comment\n e)") == [["a", ["b", "|c d|"], "e"]]


def test_root_obj_is_approximate():
    inst = emit([], sorts(x, y, b, col))
    r = parse_output(CANNED, inst)
    assert r.status == SAT and r.approximate == {x.key}
    assert r.model[y.key] == Q(11, 2) and r.model[b.key] == "true" and r.model[col.key] == "g"
    assert abs(mpmath.mpf(r.model[x.key].numerator) / r.model[x.key].denominator - mpmath.sqrt(6)) < 1e-40


def test_strict_mode_rejects_irrationals():
    with pytest.raises(SolverError):
        parse_output(CANNED, emit([], sorts(x, y, b, col)), strict=True)


def test_negative_and_missing_values():
    inst = emit([], sorts(x, y))
    r = parse_output("sat\n(model (define-fun |x| () Real (- (/ 1.0 3.0))))", inst)
    assert r.model[x.key] == Q(-1, 3) and r.model[y.key] == 0 and r.is_exact


def test_unsat_and_garbage():
    inst = emit([], sorts(x))
    assert parse_output("unsat\n(error \"model is not available\")", inst).status == UNSAT
    with pytest.raises(SolverError):
        parse_output("(error \"line 1\")", inst)
    with pytest.raises(SolverError):
        parse_output("sat\n", inst)


# --------------------------------------------------------------------------
# with a solver


@needs_solver
def test_contradiction_unsat():
    assert solve(emit([("", Equal(x, Num(1))), ("", Equal(x, Num(2)))], sorts(x))).status == UNSAT


@needs_solver
def test_empty_instance_sat():
    r = solve(emit([], {}))
    assert r.status == SAT and dict(r.model) == {}


@needs_solver
def test_irrational_model():
    r = solve(emit([("", Equal(BinOp("*", x, x), Num(2))), ("", Compare(">", x, Num(0)))], sorts(x)))
    assert r.status == SAT and r.approximate == {x.key}
    assert abs(float(r.model[x.key]) - 2**0.5) < 1e-12


@needs_solver
def test_missing_solver_binary():
    with pytest.raises(SolverError):
        solve(emit([], {}), solver="/nonexistent/solver")


@needs_solver
@pytest.mark.parametrize("m, status", [(1, UNSAT), (2, UNSAT), (3, SAT)])
def test_car_horizons(car, m, status):
    assert solve(compile_horizon(car, m, car.query).instance).status == status


@needs_solver
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_round_trip_finite(seed):
    # the solver agrees with enumeration on satisfiability, and its models satisfy the formula
    t = random_tight_theory(random.Random(seed))
    f = t.formula()
    r = solve(emit([("", f)], {k: c.sort for k, c in t.consts.items()}))
    assert (r.status == SAT) == bool(classical_models(f, t.domains))
    if r.status == SAT:
        assert evaluate(f, r.model)


@needs_solver
@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-6, 6), st.sampled_from(["<", "<=", "="])), min_size=1, max_size=3))
def test_round_trip_linear(rows):
    fs = [Compare(op, BinOp("+", BinOp("*", Num(a), x), BinOp("*", Num(c), y)), Num(k)) if op != "=" else
          Equal(BinOp("+", BinOp("*", Num(a), x), BinOp("*", Num(c), y)), Num(k)) for a, c, k, op in rows]
    r = solve(emit([("", conj(fs))], sorts(x, y)))
    if r.status == SAT:
        assert r.is_exact and evaluate(conj(fs), r.model)
