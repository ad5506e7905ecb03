"""Recursive-descent parser for the action description language.

A file is a sequence of '.'-terminated statements: declaration sections
introduced by ``:-`` (sorts, constants, variables, values, query) and causal
laws or their abbreviations.  ``%`` starts a comment.  Constants, sorts and
variables must be declared before they are used.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ..errors import AspmtError, ParseError, SortError
from ..logic import (
    ACTION,
    BOOLEAN,
    BOT,
    NONNEG_REAL,
    And,
    Or,
    REAL,
    RIGID,
    SD,
    SIMPLE,
    TOP,
    BinOp,
    Compare,
    Const,
    ConstantDecl,
    Equal,
    Formula,
    Implies,
    Num,
    Sort,
    Sym,
    Term,
    Var,
    bool_atom,
    conjuncts,
    conj,
    enum_sort,
    iff,
    int_range,
    neg,
)
from .laws import (
    ACTION_DYNAMIC,
    FLUENT_DYNAMIC,
    STATIC,
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
    StepConstraint,
    mentions_action,
)

KEYWORDS = {
    "caused", "if", "after", "constraint", "always", "inertial", "exogenous",
    "default", "causes", "increments", "by", "true", "false",
}

BUILTIN_SORTS = {"boolean": BOOLEAN, "real": REAL, "realNonNeg": NONNEG_REAL}

CONSTANT_KINDS = {
    "simpleFluent": (SIMPLE, False),
    "sdFluent": (SD, False),
    "additiveFluent": (SIMPLE, True),
    "action": (ACTION, False),
    "rigid": (RIGID, False),
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>%[^\n]*)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>:-|\.\.|<->|->|<=|>=|!=|::|[=<>+\-*/(){},;.&|~:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'num' | 'ident' | 'op' | 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.sorts: dict[str, Sort] = {}
        self.constants: dict[str, ConstantDecl] = {}
        self.variables: dict[str, Var] = {}
        self.values: dict = {}
        self.symbols: dict[str, Sort] = {}
        self.laws: list = []
        self.increments: list[IncrementLaw] = []
        self.query: Optional[Query] = None

    # -- token helpers --------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, msg: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def at(self, *texts: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text in texts

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        tok = self.tok
        self.pos += 1
        return tok

    def ident(self) -> Token:
        tok = self.tok
        if tok.kind != "ident":
            raise self.error(f"expected identifier, found {tok.text or 'end of input'!r}")
        self.pos += 1
        return tok

    def number(self) -> Fraction:
        sign = -1 if self.accept("-") else 1
        tok = self.tok
        if tok.kind != "num":
            raise self.error(f"expected number, found {tok.text!r}")
        self.pos += 1
        return sign * Fraction(tok.text)

    def integer(self) -> int:
        tok = self.tok
        value = self.number()
        if value.denominator != 1:
            raise self.error("expected integer", tok)
        return int(value)

    # -- top level ------------------------------------------------------

    def parse(self) -> ActionDescription:
        while self.tok.kind != "eof":
            if self.accept(":-"):
                self.section()
            else:
                self.statement()
            self.expect(".")
        return ActionDescription(
            sorts=dict(self.sorts),
            constants=dict(self.constants),
            variables=dict(self.variables),
            values=dict(self.values),
            laws=tuple(self.laws),
            increment_laws=tuple(self.increments),
            query=self.query,
        )

    def section(self) -> None:
        tok = self.ident()
        handler = {
            "sorts": self.sort_decl,
            "constants": self.constant_decl,
            "variables": self.variable_decl,
            "values": self.value_decl,
            "query": self.query_item,
        }.get(tok.text)
        if handler is None:
            raise self.error(f"unknown section {tok.text!r}", tok)
        if tok.text == "query":
            self._query_items: list = []
            self._horizon: Optional[tuple[int, int, str]] = None
        handler()
        while self.accept(";"):
            handler()
        if tok.text == "query":
            lo, hi, mode = self._horizon or (0, 0, "fixed")
            self.query = Query(lo, hi, tuple(self._query_items), mode)

    def sort_decl(self) -> None:
        tok = self.ident()
        name = tok.text
        if name in self.sorts or name in BUILTIN_SORTS:
            raise self.error(f"sort {name!r} declared twice", tok)
        self.expect("=")
        try:
            if self.accept("{"):
                syms = [self.ident().text]
                while self.accept(","):
                    syms.append(self.ident().text)
                self.expect("}")
                for s in syms:
                    if s in KEYWORDS:
                        raise self.error(f"keyword {s!r} used as a symbol", tok)
                sort = enum_sort(syms, name)
                for s in syms:
                    self.symbols[s] = sort
            else:
                lo = self.integer()
                self.expect("..")
                sort = int_range(lo, self.integer(), name)
        except SortError as exc:
            raise self.error(str(exc), tok) from None
        self.sorts[name] = sort

    def sort_ref(self) -> Sort:
        if self.tok.kind == "num" or self.at("-"):
            lo = self.integer()
            self.expect("..")
            try:
                return int_range(lo, self.integer())
            except SortError as exc:
                raise self.error(str(exc)) from None
        tok = self.ident()
        if tok.text in BUILTIN_SORTS:
            return BUILTIN_SORTS[tok.text]
        if tok.text in self.sorts:
            return self.sorts[tok.text]
        raise self.error(f"unknown sort {tok.text!r}", tok)

    def constant_decl(self) -> None:
        heads = [self.constant_head()]
        while self.accept(","):
            heads.append(self.constant_head())
        self.expect("::")
        kind_tok = self.ident()
        if kind_tok.text not in CONSTANT_KINDS:
            raise self.error(f"unknown constant kind {kind_tok.text!r}", kind_tok)
        kind, additive = CONSTANT_KINDS[kind_tok.text]
        self.expect("(")
        value_sort = self.sort_ref()
        self.expect(")")
        if additive and not value_sort.is_numeric:
            raise self.error("additive fluents need a numeric value sort", kind_tok)
        for tok, arg_sorts in heads:
            if tok.text in self.constants:
                raise self.error(f"constant {tok.text!r} declared twice", tok)
            try:
                self.constants[tok.text] = ConstantDecl(tok.text, tuple(arg_sorts), value_sort, kind, additive)
            except AspmtError as exc:
                raise self.error(str(exc), tok) from None

    def constant_head(self) -> tuple[Token, list[Sort]]:
        tok = self.ident()
        if tok.text in KEYWORDS:
            raise self.error(f"keyword {tok.text!r} used as a constant", tok)
        args = []
        if self.accept("("):
            args.append(self.sort_ref())
            while self.accept(","):
                args.append(self.sort_ref())
            self.expect(")")
        return tok, args

    def variable_decl(self) -> None:
        toks = [self.ident()]
        while self.accept(","):
            toks.append(self.ident())
        self.expect("::")
        sort = self.sort_ref()
        for tok in toks:
            if tok.text in KEYWORDS or tok.text in self.constants:
                raise self.error(f"{tok.text!r} cannot be used as a variable name", tok)
            self.variables[tok.text] = Var(tok.text, sort)

    def value_decl(self) -> None:
        tok = self.tok
        c = self.term()
        if not isinstance(c, Const) or self.constants[c.name].kind != RIGID:
            raise self.error("values can only be given to rigid constants", tok)
        self.expect("=")
        if self.tok.kind == "num" or self.at("-"):
            value = self.number()
        else:
            value = self.ident().text
        if not c.sort.contains(value):
            raise self.error(f"value {value} is not in sort {c.sort}", tok)
        try:
            self.values[c.key] = value
        except AspmtError as exc:
            raise self.error(str(exc), tok) from None

    def query_item(self) -> None:
        tok = self.tok
        if self.at("maxstep") and self.tokens[self.pos + 1].text == "::":
            self.pos += 2
            lo = self.integer()
            if self.accept(".."):
                hi = self.integer()
                self._horizon = (lo, hi, "incremental")
            else:
                self._horizon = (lo, lo, "fixed")
            if self._horizon[0] < 0 or self._horizon[0] > self._horizon[1]:
                raise self.error("bad maxstep range", tok)
            return
        if self.tok.kind == "num":
            label = self.integer()
        else:
            label = self.ident().text
            if label not in ("maxstep", "every"):
                raise self.error(f"query label must be a step, 'maxstep' or 'every', not {label!r}", tok)
        self.expect(":")
        self._query_items.append(StepConstraint(label, self.formula(), tok.line))

    # -- laws -----------------------------------------------------------

    def statement(self) -> None:
        tok = self.tok
        line = tok.line
        if self.accept("caused"):
            head = self.formula()
            if_part = self.formula() if self.accept("if") else TOP
            after = self.formula() if self.accept("after") else None
            self.laws.append(self.classify(head, if_part, after, line, tok))
        elif self.accept("constraint"):
            f = self.formula()
            after = self.formula() if self.accept("after") else None
            self.laws.append(Constraint(f, after, line))
        elif self.accept("always"):
            self.laws.append(Always(self.formula(), line))
        elif self.accept("default"):
            atom = self.formula()
            if_part = self.formula() if self.accept("if") else TOP
            after = self.formula() if self.accept("after") else None
            self.laws.append(Default(atom, if_part, after, line))
        elif self.at("inertial", "exogenous"):
            which = self.ident().text
            consts = [self.constant_term()]
            while self.accept(","):
                consts.append(self.constant_term())
            node = Inertial if which == "inertial" else Exogenous
            self.laws.append(node(tuple(consts), line))
        else:
            lhs = self.formula()
            if self.accept("causes"):
                effect = self.formula()
                if_part = self.formula() if self.accept("if") else TOP
                self.laws.append(Causes(lhs, effect, if_part, line))
            elif self.accept("increments"):
                self.increments.append(self.increment_rest(lhs, tok))
            else:
                raise self.error("expected a causal law")

    def classify(self, head, if_part, after, line, tok) -> CausalLaw:
        if after is not None:
            kind = FLUENT_DYNAMIC
        elif head == BOT:
            kind = ACTION_DYNAMIC if mentions_action(if_part, self._desc()) else STATIC
        elif mentions_action(head, self._desc()):
            kind = ACTION_DYNAMIC
        else:
            kind = STATIC
        return CausalLaw(kind, head, if_part, after, line)

    def _desc(self) -> ActionDescription:
        return ActionDescription(constants=self.constants)

    def constant_term(self) -> Const:
        tok = self.tok
        t = self.term()
        if not isinstance(t, Const):
            raise self.error("expected a constant", tok)
        return t

    def increment_rest(self, trigger_formula: Formula, tok: Token) -> IncrementLaw:
        trigger = _bool_const_of(trigger_formula)
        if trigger is None:
            raise self.error("the trigger of an increment law must be a Boolean constant", tok)
        target = self.constant_term()
        self.expect("by")
        amount = self.term()
        condition = self.formula() if self.accept("if") else TOP
        bindings, rest = [], []
        for part in conjuncts(condition) if condition != TOP else []:
            if isinstance(part, Equal) and isinstance(part.left, Const) and isinstance(part.right, Var):
                bindings.append((part.left, part.right))
            else:
                rest.append(part)
        return IncrementLaw(trigger, target, amount, tuple(bindings), conj(rest), tok.line)

    # -- formulas -------------------------------------------------------

    def formula(self) -> Formula:
        left = self.implication()
        if self.accept("<->"):
            return iff(left, self.implication())
        return left

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.accept("->"):
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.accept("|"):
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.accept("&"):
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        atom = self.try_comparison()
        if atom is not None:
            return atom
        if self.accept("-"):
            return neg(self.unary())
        if self.at("~"):
            tok = self.expect("~")
            if self.at("("):
                return neg(self.unary())
            c = self.term()
            if not (isinstance(c, (Const, Var)) and c.sort.kind == "bool"):
                raise self.error("'~' applies to Boolean constants and parenthesized formulas only", tok)
            return bool_atom(c, False)
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        if self.accept("true"):
            return TOP
        if self.accept("false"):
            return BOT
        tok = self.tok
        t = self.term()
        if isinstance(t, (Const, Var)) and t.sort.kind == "bool":
            return bool_atom(t)
        raise self.error("expected a formula", tok)

    def try_comparison(self) -> Optional[Formula]:
        start = self.pos
        try:
            left = self.term()
            if not self.at("=", "!=", "<", ">", "<=", ">="):
                raise _Backtrack
            op_tok = self.tok
            self.pos += 1
            right = self.term()
        except (_Backtrack, ParseError, SortError):
            self.pos = start
            return None
        try:
            if op_tok.text in ("=", "!="):
                _check_equal_sorts(left, right)
                atom = Equal(left, right)
                return neg(atom) if op_tok.text == "!=" else atom
            _check_numeric(left)
            _check_numeric(right)
            return Compare(op_tok.text, left, right)
        except SortError as exc:
            raise self.error(str(exc), op_tok) from None

    # -- terms ----------------------------------------------------------

    def term(self) -> Term:
        t = self.product()
        while self.at("+", "-"):
            op = self.ident_or_op()
            t = self._binop(op, t, self.product())
        return t

    def product(self) -> Term:
        t = self.unary_term()
        while self.at("*", "/"):
            op = self.ident_or_op()
            t = self._binop(op, t, self.unary_term())
        return t

    def ident_or_op(self) -> Token:
        tok = self.tok
        self.pos += 1
        return tok

    def _binop(self, op: Token, left: Term, right: Term) -> Term:
        try:
            return BinOp(op.text, left, right)
        except SortError as exc:
            raise self.error(str(exc), op) from None

    def unary_term(self) -> Term:
        if self.at("-"):
            tok = self.ident_or_op()
            t = self.unary_term()
            if isinstance(t, Num):
                return Num(-t.value)
            return self._binop(tok, Num(0), t)
        return self.primary_term()

    def primary_term(self) -> Term:
        tok = self.tok
        if tok.kind == "num":
            self.pos += 1
            return Num(Fraction(tok.text))
        if self.accept("("):
            t = self.term()
            self.expect(")")
            return t
        if tok.kind != "ident" or tok.text in KEYWORDS - {"true", "false"}:
            raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")
        self.pos += 1
        name = tok.text
        if name in ("true", "false"):
            return Sym(name)
        if name in self.constants:
            decl = self.constants[name]
            args: list[Term] = []
            if self.accept("("):
                args.append(self.term())
                while self.accept(","):
                    args.append(self.term())
                self.expect(")")
            if len(args) != len(decl.arg_sorts):
                raise self.error(f"{name} expects {len(decl.arg_sorts)} argument(s), got {len(args)}", tok)
            for a, s in zip(args, decl.arg_sorts):
                _check_arg(a, s, name, self, tok)
            return Const(name, tuple(args), decl.value_sort)
        if name in self.variables:
            return self.variables[name]
        if name in self.symbols:
            return Sym(name)
        raise self.error(f"unknown identifier {name!r}", tok)


def _bool_const_of(f: Formula) -> Optional[Const]:
    if isinstance(f, Equal) and isinstance(f.left, Const) and f.left.sort.kind == "bool" and f.right == Sym("true"):
        return f.left
    return None


def _sort_class(t: Term):
    if isinstance(t, (Num, BinOp)):
        return "numeric"
    if isinstance(t, Sym):
        return "symbol"
    return "numeric" if t.sort.is_numeric else t.sort


def _check_numeric(t: Term) -> None:
    if _sort_class(t) != "numeric":
        raise SortError("comparison needs numeric terms")


def _check_equal_sorts(left: Term, right: Term) -> None:
    a, b = _sort_class(left), _sort_class(right)
    if a == "numeric" or b == "numeric":
        if a != b:
            raise SortError("equality between numeric and non-numeric terms")
        return
    if a == "symbol" and b == "symbol":
        return
    if a == "symbol" or b == "symbol":
        sort, sym = (b, left) if a == "symbol" else (a, right)
        if sym.name not in sort.symbols:
            raise SortError(f"symbol {sym.name} is not in sort {sort}")
        return
    if a != b:
        raise SortError(f"equality between sorts {a} and {b}")


def _check_arg(a: Term, sort: Sort, name: str, parser: Parser, tok: Token) -> None:
    if isinstance(a, Sym):
        ok = sort.kind in ("bool", "enum") and a.name in sort.symbols
    elif isinstance(a, Num):
        ok = sort.contains(a.value)
    elif isinstance(a, Var):
        ok = a.sort == sort
    else:
        ok = False
    if not ok:
        raise parser.error(f"argument of {name} is not of sort {sort}", tok)


def parse(text: str) -> ActionDescription:
    return Parser(text).parse()


def parse_file(path) -> ActionDescription:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def parse_formula(text: str, description: ActionDescription) -> Formula:
    """Parse a single formula in the scope of an existing description."""
    p = Parser(text)
    p.sorts = dict(description.sorts)
    p.constants = dict(description.constants)
    p.variables = dict(description.variables)
    for sort in description.sorts.values():
        for s in sort.symbols:
            p.symbols[s] = sort
    f = p.formula()
    if p.tok.kind != "eof":
        raise p.error("trailing input after formula")
    return f
