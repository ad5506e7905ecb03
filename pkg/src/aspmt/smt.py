"""SMT-LIB2 emission, solver subprocess, and model parsing."""

from __future__ import annotations

import os
import re
import shlex
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import mpmath

from .errors import EmissionError, SolverError
from .logic import (
    BOT,
    TOP,
    And,
    BinOp,
    Compare,
    Const,
    ConstKey,
    Equal,
    Exists,
    Forall,
    Formula,
    Implies,
    Interpretation,
    Num,
    Or,
    Sort,
    Sym,
    Term,
    Value,
    Var,
    fold_term,
    has_quantifier,
    is_neg,
    key_str,
)
from .translator import sort_keys

ENV_SOLVER = "ASPMT_SOLVER"
TOLERANCE = Fraction(1, 10**9)

# --------------------------------------------------------------------------
# emission


def smt_name(key: ConstKey) -> str:
    return "|" + key_str(key) + "|"


def _smt_sort(sort: Sort) -> str:
    if sort.kind == "bool":
        return "Bool"
    if sort.kind in ("enum", "int"):
        return "Int"
    return "Real"


def _num(x: Fraction, real: bool) -> str:
    if x < 0:
        return f"(- {_num(-x, real)})"
    if x.denominator == 1:
        return f"{x.numerator}.0" if real else str(x.numerator)
    if not real:
        raise EmissionError(f"non-integral numeral {x} in integer context")
    return f"(/ {x.numerator}.0 {x.denominator}.0)"


@dataclass(frozen=True)
class SmtInstance:
    logic: str
    declarations: tuple[tuple[str, str], ...]  # (name, sort)
    assertions: tuple[tuple[str, str], ...]  # (label, s-expression)
    names: dict = field(default_factory=dict, compare=False)  # smt name -> ConstKey
    sorts: dict = field(default_factory=dict, compare=False)  # ConstKey -> Sort

    def text(self) -> str:
        out = ["(set-option :produce-models true)", f"(set-logic {self.logic})"]
        out += [f"(declare-fun {n} () {s})" for n, s in self.declarations]
        for label, a in self.assertions:
            if label:
                out.append("; " + label.replace("\n", " "))
            out.append(f"(assert {a})")
        out += ["(check-sat)", "(get-model)", "(exit)"]
        return "\n".join(out) + "\n"


class _Emitter:
    def __init__(self, sorts: Mapping[ConstKey, Sort]):
        self.sorts = sorts
        self.nonlinear = False
        self.uses_int = False
        self.uses_real = False
        self.quantified = False

    # -- terms ---------------------------------------------------------

    def _leaf_sort(self, t: Term) -> Sort:
        if isinstance(t, Const):
            try:
                return self.sorts[t.key]
            except KeyError:
                raise EmissionError(f"undeclared constant {key_str(t.key)}") from None
        return t.sort

    def is_int(self, t: Term) -> bool:
        if isinstance(t, Num):
            return t.value.denominator == 1
        if isinstance(t, (Const, Var)):
            return self._leaf_sort(t).kind == "int"
        if isinstance(t, BinOp):
            return t.op != "/" and self.is_int(t.left) and self.is_int(t.right)
        return False

    def term(self, t: Term, real: bool) -> str:
        if isinstance(t, Num):
            self._mark(real)
            return _num(t.value, real)
        if isinstance(t, (Const, Var)):
            s = self._leaf_sort(t)
            name = smt_name(t.key) if isinstance(t, Const) else _var_name(t)
            if s.kind in ("int", "enum"):
                self.uses_int = True
                return f"(to_real {name})" if real else name
            if s.kind in ("real", "nonneg"):
                self.uses_real = True
            return name
        if isinstance(t, BinOp):
            if t.op == "*" and not isinstance(t.left, Num) and not isinstance(t.right, Num):
                self.nonlinear = True
            if t.op == "/" and not isinstance(t.right, Num):
                self.nonlinear = True
            return f"({t.op} {self.term(t.left, real)} {self.term(t.right, real)})"
        raise EmissionError(f"cannot emit term {t!r}")

    def _mark(self, real: bool) -> None:
        if real:
            self.uses_real = True
        else:
            self.uses_int = True

    # -- formulas ------------------------------------------------------

    def _value_code(self, t: Term, sort: Sort) -> str:
        if isinstance(t, Sym):
            if sort.kind == "bool":
                return t.name
            return str(sort.symbols.index(t.name))
        return self.term(t, False)

    def atom_equal(self, f: Equal) -> str:
        left, right = fold_term(f.left), fold_term(f.right)
        sym_side = left if isinstance(left, Sym) else right if isinstance(right, Sym) else None
        other = right if sym_side is left else left
        if sym_side is not None or _finite_leaf(left, self) or _finite_leaf(right, self):
            if isinstance(left, Sym) and isinstance(right, Sym):
                return "true" if left == right else "false"
            sort = self._leaf_sort(other if sym_side is not None else left)
            if sort.kind == "bool":
                if sym_side is not None:
                    name = self._value_code(other, sort)
                    return name if sym_side.name == "true" else f"(not {name})"
                return f"(= {self._value_code(left, sort)} {self._value_code(right, sort)})"
            if sort.kind == "enum":
                self.uses_int = True
                return f"(= {self._value_code(left, sort)} {self._value_code(right, sort)})"
        real = not (self.is_int(left) and self.is_int(right))
        return f"(= {self.term(left, real)} {self.term(right, real)})"

    def formula(self, f: Formula) -> str:
        if f == BOT:
            return "false"
        if f == TOP:
            return "true"
        if isinstance(f, Equal):
            return self.atom_equal(f)
        if isinstance(f, Compare):
            left, right = fold_term(f.left), fold_term(f.right)
            real = not (self.is_int(left) and self.is_int(right))
            return f"({f.op} {self.term(left, real)} {self.term(right, real)})"
        if is_neg(f):
            return f"(not {self.formula(f.left)})"
        if isinstance(f, And):
            return "(and " + " ".join(self.formula(g) for g in _flat(f, And)) + ")"
        if isinstance(f, Or):
            return "(or " + " ".join(self.formula(g) for g in _flat(f, Or)) + ")"
        if isinstance(f, Implies):
            return f"(=> {self.formula(f.left)} {self.formula(f.right)})"
        if isinstance(f, (Forall, Exists)):
            self.quantified = True
            q = "forall" if isinstance(f, Forall) else "exists"
            v = f.var
            body = self.formula(f.body)
            guard = _var_guard(v)
            if guard:
                body = f"(=> {guard} {body})" if q == "forall" else f"(and {guard} {body})"
            self._mark(v.sort.kind in ("real", "nonneg"))
            return f"({q} (({_var_name(v)} {_smt_sort(v.sort)})) {body})"
        raise EmissionError(f"cannot emit formula {f!r}")


def _finite_leaf(t: Term, em: _Emitter) -> bool:
    return isinstance(t, (Const, Var)) and em._leaf_sort(t).kind in ("bool", "enum")


def _flat(f: Formula, kind) -> list[Formula]:
    out, stack = [], [f]
    while stack:
        g = stack.pop()
        if isinstance(g, kind) and not is_neg(g):
            stack += [g.right, g.left]
        else:
            out.append(g)
    return out


def _var_name(v: Var) -> str:
    return "|?" + v.name + "|"


def _range_guard(name: str, sort: Sort) -> Optional[str]:
    if sort.kind == "nonneg":
        return f"(>= {name} 0.0)"
    if sort.kind == "int":
        return f"(and (>= {name} {_num(Fraction(sort.lo), False)}) (<= {name} {_num(Fraction(sort.hi), False)}))"
    if sort.kind == "enum":
        return f"(and (>= {name} 0) (<= {name} {len(sort.symbols) - 1}))"
    return None


def _var_guard(v: Var) -> Optional[str]:
    return _range_guard(_var_name(v), v.sort)


def emit(
    assertions: Sequence[tuple[str, Formula]],
    sorts: Mapping[ConstKey, Sort],
    allow_quantifiers: bool = False,
) -> SmtInstance:
    """Build an instance declaring every constant in ``sorts`` and asserting each formula.

    Output is a pure function of the inputs (declarations in a fixed order).
    """
    em = _Emitter(sorts)
    decls, asserts, names = [], [], {}
    for key in sort_keys(sorts):
        sort = sorts[key]
        name = smt_name(key)
        names[name] = key
        decls.append((name, _smt_sort(sort)))
        guard = _range_guard(name, sort)
        if sort.kind == "nonneg":
            em.uses_real = True
        elif sort.kind in ("int", "enum"):
            em.uses_int = True
        elif sort.kind == "real":
            em.uses_real = True
        if guard:
            asserts.append(("", guard))
    for label, f in assertions:
        if f == TOP:
            continue
        if has_quantifier(f) and not allow_quantifiers:
            raise EmissionError(f"quantified assertion ({label}) needs allow_quantifiers")
        asserts.append((label, em.formula(f)))
    return SmtInstance(_logic(em), tuple(decls), tuple(asserts), names, dict(sorts))


def _logic(em: _Emitter) -> str:
    prefix = "" if em.quantified else "QF_"
    if not em.uses_int and not em.uses_real:
        return prefix + "UF"
    arith = "N" if em.nonlinear else "L"
    if em.uses_int and em.uses_real:
        dom = "IRA"
    elif em.uses_int:
        dom = "IA"
    else:
        dom = "RA"
    return prefix + arith + dom


# --------------------------------------------------------------------------
# s-expressions and model values

_SEXP_RE = re.compile(r'\s*(?:(\()|(\))|(\|[^|]*\|)|("(?:[^"]|"")*")|([^\s()|";]+)|(;[^\n]*))')


def parse_sexprs(text: str) -> list:
    """Tokenize and parse S-expressions; quoted symbols keep their bars."""
    stack: list[list] = [[]]
    pos = 0
    while pos < len(text):
        m = _SEXP_RE.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise SolverError(f"cannot tokenize solver output at offset {pos}", text)
        pos = m.end()
        lpar, rpar, quoted, string, atom, comment = m.groups()
        if lpar:
            stack.append([])
        elif rpar:
            if len(stack) == 1:
                raise SolverError("unbalanced parenthesis in solver output", text)
            done = stack.pop()
            stack[-1].append(done)
        elif quoted or string or atom:
            stack[-1].append(quoted or string or atom)
    if len(stack) != 1:
        raise SolverError("unbalanced parenthesis in solver output", text)
    return stack[0]


@dataclass
class _Val:
    value: Fraction
    approximate: bool = False


_DEC_RE = re.compile(r"^(\d+)(?:\.(\d*))?(\?)?$")


def _atom_number(a: str) -> Optional[_Val]:
    m = _DEC_RE.match(a)
    if not m:
        return None
    whole, frac, approx = m.groups()
    frac = frac or ""
    return _Val(Fraction(int(whole + frac), 10 ** len(frac)), bool(approx))


def _mpf_fraction(x) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(int(man)) * (Fraction(2) ** int(exp))


def _poly_coeffs(expr, var: str) -> dict[int, Fraction]:
    """Coefficients of a univariate polynomial written with + - * ^."""
    if isinstance(expr, str):
        if expr == var:
            return {1: Fraction(1)}
        v = _eval_value(expr)
        return {0: v.value}
    head, *args = expr
    polys = [_poly_coeffs(a, var) for a in args]
    if head == "+":
        out: dict[int, Fraction] = {}
        for p in polys:
            for k, c in p.items():
                out[k] = out.get(k, 0) + c
        return out
    if head == "-":
        if len(polys) == 1:
            return {k: -c for k, c in polys[0].items()}
        out = dict(polys[0])
        for p in polys[1:]:
            for k, c in p.items():
                out[k] = out.get(k, 0) - c
        return out
    if head == "*":
        out = {0: Fraction(1)}
        for p in polys:
            out = _mul(out, p)
        return out
    if head == "^":
        base, power = polys[0], _eval_value(args[1]).value
        out = {0: Fraction(1)}
        for _ in range(int(power)):
            out = _mul(out, base)
        return out
    raise SolverError(f"unsupported polynomial operator {head!r}", str(expr))


def _mul(p, q):
    new: dict[int, Fraction] = {}
    for k1, c1 in p.items():
        for k2, c2 in q.items():
            new[k1 + k2] = new.get(k1 + k2, 0) + c1 * c2
    return new


def _root_obj(poly, index) -> _Val:
    var = _poly_var(poly)
    coeffs = _poly_coeffs(poly, var)
    degree = max(k for k, c in coeffs.items() if c != 0)
    k = int(_eval_value(index).value)
    with mpmath.workdps(60):
        cs = [mpmath.mpf(coeffs.get(d, 0).numerator) / coeffs.get(d, 0).denominator for d in range(degree, -1, -1)]
        roots = mpmath.polyroots(cs, maxsteps=200, extraprec=200)
        reals = sorted(mpmath.re(r) for r in roots if abs(mpmath.im(r)) < mpmath.mpf(10) ** -40)
        if not 1 <= k <= len(reals):
            raise SolverError(f"root-obj index {k} out of range", str(poly))
        return _Val(_mpf_fraction(reals[k - 1]), approximate=True)


def _poly_var(expr) -> str:
    if isinstance(expr, str):
        return expr if _atom_number(expr) is None else ""
    for a in expr[1:]:
        v = _poly_var(a)
        if v:
            return v
    return ""


def _eval_value(expr) -> _Val:
    if isinstance(expr, str):
        v = _atom_number(expr)
        if v is None:
            raise SolverError(f"unexpected model value {expr!r}", expr)
        return v
    head, *args = expr
    if head == "root-obj":
        return _root_obj(args[0], args[1])
    if head == "to_real" and len(args) == 1:
        return _eval_value(args[0])
    vals = [_eval_value(a) for a in args]
    approx = any(v.approximate for v in vals)
    xs = [v.value for v in vals]
    if head == "-":
        r = -xs[0] if len(xs) == 1 else xs[0] - sum(xs[1:])
    elif head == "+":
        r = sum(xs, Fraction(0))
    elif head == "*":
        r = Fraction(1)
        for x in xs:
            r *= x
    elif head == "/":
        r = xs[0]
        for x in xs[1:]:
            if x == 0:
                raise SolverError("division by zero in model value", str(expr))
            r /= x
    else:
        raise SolverError(f"unsupported model value {head!r}", str(expr))
    return _Val(r, approx)


def _decode(expr, sort: Sort) -> tuple[Value, bool]:
    if sort.kind == "bool":
        if expr not in ("true", "false"):
            raise SolverError(f"expected a Boolean, got {expr!r}", str(expr))
        return expr, False
    v = _eval_value(expr)
    if sort.kind == "enum":
        if v.value.denominator != 1 or not 0 <= v.value < len(sort.symbols):
            raise SolverError(f"enum index {v.value} out of range for {sort}", str(expr))
        return sort.symbols[int(v.value)], False
    return v.value, v.approximate


def default_value(sort: Sort) -> Value:
    if sort.kind == "bool":
        return "false"
    if sort.kind == "enum":
        return sort.symbols[0]
    if sort.kind == "int":
        return Fraction(sort.lo)
    return Fraction(0)


# --------------------------------------------------------------------------
# solving

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"


@dataclass
class SolverResult:
    status: str
    model: Optional[Interpretation] = None
    approximate: frozenset = frozenset()  # keys whose values are rounded algebraic numbers
    raw: str = ""
    seconds: float = 0.0

    @property
    def is_exact(self) -> bool:
        return not self.approximate


def find_solver(cmd: Optional[str] = None) -> str:
    """Solver command from the argument, $ASPMT_SOLVER, or a z3 on PATH."""
    if cmd:
        return cmd
    env = os.environ.get(ENV_SOLVER)
    if env:
        return env
    if shutil.which("z3"):
        return "z3 -smt2"
    raise SolverError(f"no SMT solver configured: pass --solver or set {ENV_SOLVER}", "")


def parse_output(text: str, inst: SmtInstance, strict: bool = False) -> SolverResult:
    items = parse_sexprs(text)
    status = next((x for x in items if isinstance(x, str) and x in (SAT, UNSAT, UNKNOWN)), None)
    if status is None:
        raise SolverError("solver printed no sat/unsat/unknown verdict", text)
    if status != SAT:
        return SolverResult(status, raw=text)
    defs = _find_defines(items)
    if defs is None:
        raise SolverError("sat without a model", text)
    values: dict[ConstKey, Value] = {}
    approx = set()
    for name, value_expr in defs:
        # solvers may print a quoted symbol without its bars
        key = inst.names.get("|" + name.strip("|") + "|")
        if key is None:
            continue  # auxiliary symbol introduced by the solver
        v, is_approx = _decode(value_expr, inst.sorts[key])
        values[key] = v
        if is_approx:
            approx.add(key)
    for key, sort in inst.sorts.items():
        values.setdefault(key, default_value(sort))
    if strict and approx:
        raise SolverError(
            "model has irrational values (strict mode): " + ", ".join(key_str(k) for k in sort_keys(approx)), text
        )
    return SolverResult(SAT, Interpretation(values), frozenset(approx), text)


def _find_defines(items) -> Optional[list[tuple[str, object]]]:
    for x in items:
        if isinstance(x, list):
            body = x[1:] if x and x[0] == "model" else x
            defs = [d for d in body if isinstance(d, list) and d and d[0] == "define-fun"]
            if defs or not body:
                return [(d[1], d[4]) for d in defs if len(d) == 5 and d[2] == []]
    return None


def solve(
    inst: SmtInstance,
    solver: Optional[str] = None,
    timeout: Optional[float] = None,
    strict: bool = False,
) -> SolverResult:
    """Run the solver on ``inst``; UNKNOWN is returned, never conflated with UNSAT."""
    cmd = shlex.split(find_solver(solver))
    with tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False) as fh:
        fh.write(inst.text())
        path = fh.name
    start = time.monotonic()
    try:
        proc = subprocess.run(cmd + [path], capture_output=True, text=True, timeout=timeout)
    except FileNotFoundError:
        raise SolverError(f"solver executable not found: {cmd[0]}", "") from None
    except subprocess.TimeoutExpired as exc:
        out = exc.stdout if isinstance(exc.stdout, str) else (exc.stdout or b"").decode(errors="replace")
        raise SolverError(f"solver timed out after {timeout} s", out) from None
    finally:
        os.unlink(path)
    text = proc.stdout
    try:
        result = parse_output(text, inst, strict)
    except SolverError as exc:
        raise SolverError(f"{exc} (exit code {proc.returncode}; stderr: {proc.stderr.strip()[:500]})", text) from None
    result.seconds = time.monotonic() - start
    return result


__all__ = [
    "SmtInstance",
    "SolverResult",
    "SAT",
    "UNSAT",
    "UNKNOWN",
    "TOLERANCE",
    "ENV_SOLVER",
    "emit",
    "solve",
    "parse_output",
    "parse_sexprs",
    "find_solver",
    "smt_name",
    "default_value",
]
