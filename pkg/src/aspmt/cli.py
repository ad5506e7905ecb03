"""Command-line interface: compile, solve, check and oracle subcommands.

Exit codes: 0 success, 1 no plan or not tight, 2 usage or input error,
3 solver failure or inconclusive answer.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .completion import program_completion_parts
from .errors import AspmtError, CompletionError, EnumerationBoundExceeded, SolverError
from .frontend import parse_file, prepare
from .logic import evaluate, key_str, show, show_number
from .oracle import DEFAULT_BOUND, program_theory, stable_models
from .planner import FOUND, INCONCLUSIVE, Compiled, check_query, compile_horizon, plan, plan_json, query_formulas, verify_trace
from .tightness import is_tight
from .translator import sort_keys, translate

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3

_RANGE = re.compile(r"^\s*(\d+)\s*(?:\.\.\s*(\d+))?\s*$")


def parse_maxstep(text: str) -> tuple[int, int]:
    """``N`` means the single horizon N, ``A..B`` the horizons A to B."""
    m = _RANGE.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected N or A..B, got {text!r}")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) is not None else lo
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty horizon range {text!r}")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aspmt", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, solver: bool = False):
        sp.add_argument("input", help="action description file")
        sp.add_argument("--maxstep", type=parse_maxstep, metavar="N|A..B", help="horizon or horizon range")
        sp.add_argument("--dump-rules", action="store_true", help="print the time-stamped program")
        sp.add_argument("--dump-completion", action="store_true", help="print the completed formulas")
        if solver:
            sp.add_argument("--solver", metavar="CMD", help="SMT solver command (default: $ASPMT_SOLVER)")
            sp.add_argument("--dump-smt", metavar="PATH", help="write the SMT-LIB2 instance to PATH")
            sp.add_argument("--allow-quantifiers", action="store_true", help="emit remaining real quantifiers")

    c = sub.add_parser("compile", help="emit the SMT-LIB2 instance for one horizon")
    common(c, solver=True)
    c.add_argument("-o", "--output", metavar="PATH", help="output file (default: stdout)")

    s = sub.add_parser("solve", help="search for a plan over increasing horizons")
    common(s, solver=True)
    s.add_argument("--json", action="store_true", help="machine-readable output")
    s.add_argument("--strict-models", action="store_true", help="reject models with irrational values")
    s.add_argument("--timeout", type=float, metavar="SECONDS", help="per-horizon solver timeout")

    k = sub.add_parser("check", help="report tightness of D_m for each horizon")
    common(k)

    o = sub.add_parser("oracle", help="print the stable models of D_m by enumeration (finite sorts only)")
    common(o)
    o.add_argument("--query", action="store_true", help="keep only models satisfying the query")
    o.add_argument("--bound", type=int, default=DEFAULT_BOUND, help="enumeration bound")
    o.add_argument("--json", action="store_true", help="machine-readable output")
    return p


# --------------------------------------------------------------------------
# helpers


def _err(msg: str) -> None:
    print(f"aspmt: {msg}", file=sys.stderr)


def _load(path: str):
    return prepare(parse_file(path))


def _single_horizon(args, d) -> int:
    if args.maxstep is not None:
        return args.maxstep[1]
    return d.query.max_horizon if d.query is not None else 0


def _check_range(args, d) -> range:
    if args.maxstep is not None:
        return range(args.maxstep[0], args.maxstep[1] + 1)
    if d.query is not None:
        return range(0, d.query.max_horizon + 1)
    return range(0, 2)


def _dump(args, d, m: int, compiled: Optional[Compiled] = None, out=None) -> None:
    out = out or sys.stdout
    program = compiled.program if compiled else translate(d, m)
    if args.dump_rules:
        print(program.dump(), end="", file=out)
    if args.dump_completion:
        parts = compiled.parts if compiled else program_completion_parts(program)
        for part in parts:
            print(f"% {part.label}\n{show(part.formula)}", file=out)


def _show_value(v) -> str:
    return v if isinstance(v, str) else show_number(v)


# --------------------------------------------------------------------------
# subcommands


def cmd_compile(args) -> int:
    d = _load(args.input)
    m = _single_horizon(args, d)
    compiled = compile_horizon(d, m, d.query, args.allow_quantifiers)
    _dump(args, d, m, compiled, out=sys.stderr if args.output is None else sys.stdout)
    text = compiled.instance.text()
    target = args.output or args.dump_smt
    if target:
        Path(target).write_text(text)
        if args.output and args.dump_smt:
            Path(args.dump_smt).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_solve(args) -> int:
    d = _load(args.input)
    res = plan(
        d,
        maxstep=args.maxstep,
        solver=args.solver,
        strict=args.strict_models,
        timeout=args.timeout,
        allow_quantifiers=args.allow_quantifiers,
    )
    if res.compiled is not None:
        if args.dump_smt:
            Path(args.dump_smt).write_text(res.compiled.instance.text())
        _dump(args, d, res.compiled.horizon, res.compiled)
    if res.status == FOUND:
        ok = verify_trace(d, res.trace)
        if ok and d.query is not None:
            ok = check_query(d, d.query, res.trace)
        if not ok:
            _err(f"solver model fails re-verification: {ok.message}")
            return EXIT_SOLVER
    if args.json:
        print(plan_json(res))
    else:
        for a in res.log:
            print(f"% maxstep {a.horizon}: {a.status} ({a.seconds:.3f} s)")
        if res.status == FOUND:
            print(f"% plan found at maxstep {res.horizon}")
            print(res.trace.text())
        elif res.status == INCONCLUSIVE:
            print(f"% solver answered unknown at maxstep {res.horizon}")
        else:
            print("% no plan" + (f" up to maxstep {res.horizon}" if res.horizon is not None else ""))
    if res.status == FOUND:
        return EXIT_OK
    return EXIT_SOLVER if res.status == INCONCLUSIVE else EXIT_NO


def cmd_check(args) -> int:
    d = _load(args.input)
    verdicts = []
    for m in _check_range(args, d):
        t = is_tight(translate(d, m))
        verdicts.append(t)
        print(f"maxstep {m}: {t.describe()}")
        if args.dump_rules or args.dump_completion:
            _dump(args, d, m)
    bad = [t for t in verdicts if not t]
    print(bad[0].describe() if bad else "TIGHT")
    return EXIT_NO if bad else EXIT_OK


def cmd_oracle(args) -> int:
    d = _load(args.input)
    m = _single_horizon(args, d)
    program = translate(d, m)
    _dump(args, d, m)
    models = stable_models(program_theory(program), args.bound)
    if args.query and d.query is not None:
        q = [f for _, f in query_formulas(d.query, m, d)]
        models = [i for i in models if all(evaluate(f, i) for f in q)]
    if args.json:
        rows = [{key_str(k): _show_value(i[k]) for k in sort_keys(i.keys())} for i in models]
        print(json.dumps({"maxstep": m, "models": rows}, indent=2))
    else:
        for i in models:
            print("{" + ", ".join(f"{key_str(k)}={_show_value(i[k])}" for k in sort_keys(i.keys())) + "}")
        print(f"% {len(models)} stable model(s) of D_{m}")
    return EXIT_OK


COMMANDS = {"compile": cmd_compile, "solve": cmd_solve, "check": cmd_check, "oracle": cmd_oracle}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except OSError as exc:
        _err(f"{exc.filename or args.input}: {exc.strerror or exc}")
        return EXIT_USAGE
    except SolverError as exc:
        _err(str(exc))
        return EXIT_SOLVER
    except CompletionError as exc:
        _err(str(exc))
        return EXIT_NO
    except EnumerationBoundExceeded as exc:
        _err(str(exc))
        return EXIT_USAGE
    except AspmtError as exc:
        _err(f"{args.input}: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
