"""Command-line interface.

Exit codes: 0 success, 1 the input was rejected, 2 usage error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import sys

from . import equality as eq
from .core import Anno, FunType, Fwd, Kind, Monad, Process, SessType, Spawn, Term, subst
from .dynamics import Configuration, run as run_config
from .embed import Embedder, FragmentError
from .surface import ParseError, ProcDef, TermDef, TypeDef, parse_file, parse_node, scope_of, show_decl
from .typing import Report, check_decl, check_file, resolve
from .wf import CheckError, Psi


class Rejected(Exception):
    """The input is ill-formed; reported with exit code 1."""


def _load(path):
    try:
        return parse_file(path)
    except OSError as e:
        raise Rejected(f"error {path}: {e.strerror}") from None
    except ParseError as e:
        raise Rejected(f"error {path}:{e.line}:{e.col} parse {e}") from None


def _resolved(src):
    """Checked and elaborated declarations, by name; rejects on any error."""
    out = {}
    for d, r, err in resolve(src):
        if err is None:
            try:
                out[d.name] = check_decl(r)
                continue
            except CheckError as e:
                err = e
        pos = err.pos or d.pos or (0, 0)
        raise Rejected(f"error {src.path}:{pos[0]}:{pos[1]} {err.rule} {err.message}")
    return out


# ---------------------------------------------------------------- subcommands


def cmd_check(args) -> int:
    src = _load(args.file)
    report: Report = check_file(src)
    for d in report.diagnostics:
        print(d)
    if report.ok:
        print(f"ok {src.path}: {len(report.checked)} declarations")
        return 0
    return 1


def cmd_run(args) -> int:
    src = _load(args.file)
    decls = _resolved(src)
    d = decls.get(args.main)
    if d is None:
        raise Rejected(f"error {src.path}: no declaration named {args.main}")
    if isinstance(d, ProcDef):
        if d.shared or d.linear:
            raise Rejected(f"error {src.path}: {args.main} uses channels; only closed processes can run")
        chan, a = d.offered
        body = d.body
    elif isinstance(d, TermDef):
        t = eq.whnf(d.type)
        if not isinstance(t, Monad) or t.shared or t.linear:
            raise Rejected(f"error {src.path}: {args.main} is not a closed process value")
        chan, a = t.offered
        body = Spawn("x", Anno(d.body, d.type), (), (), Fwd("x", chan), t)
    else:
        raise Rejected(f"error {src.path}: {args.main} is a type, not a program")
    cfg = Configuration.initial(body, chan, a)
    result = run_config(cfg, args.seed, args.max_steps)
    for line in result.lines(as_json=args.json):
        print(line)
    if result.status == "stuck-live":
        print(f"internal: stuck with live threads after {len(result.trace)} steps", file=sys.stderr)
        return 3
    if result.status == "budget":
        print(f"-- step budget of {args.max_steps} exceeded")
        return 1
    print(f"-- quiescent after {len(result.trace)} steps")
    return 0


def _definitions(src):
    defs = {}
    for d, r, err in resolve(src):
        if err is not None:
            continue
        if isinstance(r, TypeDef):
            defs[r.name] = r.body
        elif isinstance(r, TermDef):
            defs[r.name] = Anno(r.body, r.type)
    return defs


def _parse_pair(src, lhs, rhs):
    tyvars, termvars = scope_of(src)
    defs = _definitions(src)
    for sort in (Term, FunType, SessType, Kind, Process):
        try:
            a = parse_node(lhs, sort, tyvars, termvars)
            b = parse_node(rhs, sort, tyvars, termvars)
        except ParseError:
            continue
        return sort, subst(a, defs), subst(b, defs)
    raise Rejected(f"error: cannot read {lhs!r} and {rhs!r} as two expressions of the same sort")


def cmd_eq(args) -> int:
    src = _load(args.file)
    fuel = args.fuel
    da, db = src.lookup(args.lhs), src.lookup(args.rhs)
    if isinstance(da, ProcDef) and isinstance(db, ProcDef):
        decls = _resolved(src)
        da, db = decls[args.lhs], decls[args.rhs]
        ren = {db.offered[0]: da.offered[0]}
        verdict = eq.proc_eq(None, da.body, subst(db.body, ren), da.offered, fuel=fuel)
    else:
        sort, a, b = _parse_pair(src, args.lhs, args.rhs)
        if sort is Term:
            verdict = eq.term_eq(Psi(), a, b, fuel=fuel)
        elif sort is Kind:
            verdict = eq.kind_eq(Psi(), a, b, fuel=fuel)
        elif sort is Process:
            verdict = eq.proc_eq(None, a, b, fuel=fuel)
        else:
            verdict = eq.type_eq(Psi(), a, b, fuel=fuel)
    print(verdict)
    return 0


def cmd_embed(args) -> int:
    src = _load(args.file)
    decls = _resolved(src)
    d = decls.get(args.defn)
    if d is None:
        raise Rejected(f"error {src.path}: no declaration named {args.defn}")
    e = Embedder()
    try:
        if isinstance(d, TermDef):
            e.see(d.body, args.chan)
            a = e.ftype(d.type)
            body = e.term(d.body, args.chan)
            out = ProcDef(d.name, (), (), (args.chan, a), body)
        elif isinstance(d, TypeDef):
            body = e.ftype(d.body) if isinstance(d.body, FunType) else e.stype(d.body)
            out = TypeDef(d.name, e.kind(d.kind), body)
        else:
            e.see(d.body)
            out = ProcDef(
                d.name,
                tuple((u, e.stype(b)) for u, b in d.shared),
                tuple((x, e.stype(b)) for x, b in d.linear),
                (d.offered[0], e.stype(d.offered[1])),
                e.proc(d.body),
            )
    except FragmentError as err:
        raise Rejected(f"error {src.path}: {err}") from None
    print(show_decl(out))
    return 0


def cmd_test_meta(args) -> int:
    from .meta import SUITES, run_suite

    names = SUITES if args.suite == "all" else [args.suite]
    failed = False
    for name in names:
        report = run_suite(name, args.iters, args.seed)
        print(report.summary() if args.json else report.table())
        failed |= not report.ok
    return 1 if failed else 0


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    from .meta import SUITES

    p = argparse.ArgumentParser(prog="sdpi", description="Dependent session types with a contextual monad.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="check every declaration in a file")
    c.add_argument("file")
    c.set_defaults(fn=cmd_check)

    r = sub.add_parser("run", help="run a closed process and print its trace")
    r.add_argument("file")
    r.add_argument("--main", required=True, help="process (or closed process value) to run")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--max-steps", type=int, default=100_000)
    r.add_argument("--json", action="store_true", help="print one JSON record per step")
    r.set_defaults(fn=cmd_run)

    q = sub.add_parser("eq", help="decide definitional equality of two expressions or declarations")
    q.add_argument("file")
    q.add_argument("lhs")
    q.add_argument("rhs")
    q.add_argument("--fuel", type=int, default=None, help="rewrite budget (default: SDPI_FUEL or 10000)")
    q.set_defaults(fn=cmd_eq)

    e = sub.add_parser("embed", help="translate a declaration into the process layer")
    e.add_argument("file")
    e.add_argument("--def", dest="defn", required=True)
    e.add_argument("--chan", default="z", help="result channel for translated terms")
    e.set_defaults(fn=cmd_embed)

    t = sub.add_parser("test-meta", help="run a metatheory test suite")
    t.add_argument("--suite", required=True, choices=[*SUITES, "all"])
    t.add_argument("--iters", type=int, default=100)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--json", action="store_true")
    t.set_defaults(fn=cmd_test_meta)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except Rejected as e:
        print(e, file=sys.stderr)
        return 1
    except RecursionError:
        print("internal: nesting too deep", file=sys.stderr)
        return 3
    except (AssertionError, KeyError, TypeError, AttributeError) as e:
        print(f"internal: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
