"""Generators for well-typed syntax and the metatheory test suites.

Generators work by inverting the typing rules: they pick a goal type and build
a term or process that has it.  Every generated subject goes through the
checker before it is used (the self-check gate), so a generator bug shows up
as a skipped case rather than as a bogus failure.

Each suite returns a :class:`SuiteReport` with pass, fail, undecided and
skipped counts.  Failures carry a counterexample shrunk by replacing subtrees
with their own children for as long as the failure persists.
"""

from __future__ import annotations

import dataclasses
import json
import random
import time
from pathlib import Path

from . import equality as eq
from .core import (
    BOOL,
    NAT,
    Anno,
    App,
    AppK,
    AppT,
    AppTm,
    AppTy,
    Bang,
    Base,
    Case,
    Copy,
    Exists,
    FF,
    Forall,
    FunType,
    Fwd,
    IfF,
    IfP,
    IfS,
    IfT,
    In,
    Kind,
    Lam,
    LamK,
    LamT,
    LamTm,
    LamTy,
    Lolli,
    Monad,
    MonadVal,
    NatRecS,
    NatRecT,
    New,
    Nil,
    Node,
    One,
    OutFresh,
    OutTerm,
    Pi,
    PiTerm,
    PiType,
    Plus,
    Process,
    Repl,
    Select,
    SessType,
    Spawn,
    SType,
    Succ,
    SVar,
    TT,
    Tensor,
    Term,
    TVar,
    Type,
    Var,
    With,
    Zero,
    alpha_eq,
    children,
    erase,
    numeral,
    sort_of,
    struct_cong,
    subst,
)
from .dynamics import Configuration, Rng, StuckTerm, step_term
from .embed import Embedder, FragmentError, embed_ctx
from .surface import SourceFile, TermDef, parse_file, parse_node, show
from .typing import check_term, elaborate_proc, elaborate_term, resolve
from .wf import CheckError, Psi

SUITES = (
    "subject-reduction-terms",
    "subject-reduction-procs",
    "progress",
    "embed-typing",
    "embed-compositionality",
    "embed-correspondence",
    "equality-laws",
)

CORPUS = Path(__file__).resolve().parents[2] / "programs"


class GenerationFailed(Exception):
    pass


# ---------------------------------------------------------------- typed generation


class Gen:
    """A typed generator.

    ``fragment`` restricts everything to syntax the embedding accepts: no
    booleans, naturals or eliminators over them.
    """

    def __init__(self, seed, fragment=False):
        self.rng = seed if isinstance(seed, random.Random) else random.Random(seed)
        self.fragment = fragment
        self.counter = 0

    def name(self, stem):
        self.counter += 1
        return f"{stem}{self.counter}"

    def coin(self, p=0.5):
        return self.rng.random() < p

    # -- types

    def unit(self) -> Monad:
        return Monad((), (), ("c", One()))

    def ftype(self, depth) -> FunType:
        opts = ["monad"] if self.fragment else ["bool", "nat", "monad"]
        if depth > 0:
            opts += ["pi", "pi"]
        pick = self.rng.choice(opts)
        if pick == "bool":
            return BOOL
        if pick == "nat":
            return NAT
        if pick == "pi":
            return Pi("_", self.ftype(depth - 1), self.ftype(depth - 1))
        offered = self.stype(max(depth - 1, 0))
        linear = ()
        if depth > 0 and self.coin(0.3):
            linear = (("d", self.stype(0)),)
        return Monad((), linear, ("c", offered))

    def payload_type(self, depth) -> FunType:
        if self.fragment:
            return self.ftype(min(depth, 1)) if self.coin(0.3) else self.unit()
        return self.rng.choice([BOOL, NAT, BOOL])

    def stype(self, depth) -> SessType:
        if depth <= 0:
            if self.coin(0.6):
                return One()
            return Exists("_", self.payload_type(0), One())
        opts = ["one", "exists", "forall", "tensor", "lolli", "with", "plus", "bang"]
        if not self.fragment:
            opts += ["dep", "dep"]
        pick = self.rng.choice(opts)
        d = depth - 1
        if pick == "one":
            return One()
        if pick == "exists":
            return Exists("_", self.payload_type(d), self.stype(d))
        if pick == "forall":
            return Forall("_", self.payload_type(d), self.stype(d))
        if pick == "tensor":
            return Tensor(self.stype(d), self.stype(d))
        if pick == "lolli":
            return Lolli(self.stype(d), self.stype(d))
        if pick in ("with", "plus"):
            labels = self.rng.sample(["a", "b", "l", "r"], self.rng.randint(1, 2))
            cls = With if pick == "with" else Plus
            return cls(tuple((lab, self.stype(d)) for lab in sorted(labels)))
        if pick == "bang":
            return Bang(self.stype(d))
        x = self.name("b")
        cls = Forall if self.coin() else Exists
        return cls(x, BOOL, IfS(Var(x), self.stype(d), self.stype(d)))

    # -- terms

    def term(self, psi: Psi, target: FunType, depth: int) -> Term:
        t = eq.whnf(target)
        opts = []
        vars_ = [n for n, c in psi.entries if isinstance(c, FunType) and eq.type_eq(psi, c, target)]
        if vars_:
            opts += ["var"] * 2
        if depth > 0:
            opts += ["beta"]
            if not self.fragment:
                opts += ["if"]
        if isinstance(t, Base) and t.name == "Bool":
            opts += ["bool"] * 2
        elif isinstance(t, Base) and t.name == "Nat":
            opts += ["num", "num"] + (["succ", "natrec"] if depth > 0 else [])
        elif isinstance(t, Pi):
            opts += ["lam"] * 2
        elif isinstance(t, Monad):
            opts += ["monad"] * 2
        if not opts:
            raise GenerationFailed(f"no term of type {target}")
        pick = self.rng.choice(opts)
        d = depth - 1
        if pick == "var":
            return Var(self.rng.choice(vars_))
        if pick == "bool":
            return TT() if self.coin() else FF()
        if pick == "num":
            return numeral(self.rng.randint(0, 2))
        if pick == "succ":
            return Succ(self.term(psi, NAT, d))
        if pick == "natrec":
            n, r = self.name("n"), self.name("r")
            inner = psi.extend(n, NAT).extend(r, NAT)
            return NatRecT(NAT, self.term(psi, NAT, d), self.term(psi, NAT, d), n, r, self.term(inner, NAT, d))
        if pick == "if":
            return IfT(self.term(psi, BOOL, d), self.term(psi, target, d), self.term(psi, target, d))
        if pick == "beta":
            a = self.payload_type(0) if self.fragment else self.rng.choice([BOOL, NAT])
            x = self.name("x")
            body = self.term(psi.extend(x, a), target, d)
            fn = Anno(Lam(x, a, body), Pi(x, a, target))
            return App(fn, self.term(psi, a, d))
        if pick == "lam":
            x = self.name("x")
            cod = subst(t.cod, {t.x: Var(x)})
            return Lam(x, t.dom, self.term(psi.extend(x, t.dom), cod, max(d, 0)))
        # monadic value
        c = self.name("c")
        linear = tuple(self.name("d") for _ in t.linear)
        delta = {n: a for n, (_, a) in zip(linear, t.linear)}
        body = self.proc_using(psi, {}, delta, c, t.offered[1], max(d, 0))
        return MonadVal(c, body, (), linear)

    # -- processes

    def proc_using(self, psi, gamma, delta: dict, c, a, depth) -> Process:
        """Offer ``c:a`` after consuming every channel in ``delta``."""
        if not delta:
            return self.provider(psi, c, a, depth)
        (x, b), *rest = delta.items()
        return self.client(psi, x, b, lambda p2: self.proc_using(p2, gamma, dict(rest), c, a, depth), depth)

    def provider(self, psi: Psi, c: str, a: SessType, depth: int) -> Process:
        w = eq.whnf(a)
        d = depth - 1
        if depth > 0:
            r = self.rng.random()
            if r < 0.15:
                b = self.stype(min(d, 1))
                x = self.name("u")
                left = self.provider(psi, x, b, d)
                right = self.client(psi, x, b, lambda p2: self.provider(p2, c, a, d), d)
                return New(x, left, right, b)
            if r < 0.22:
                x, y = self.name("u"), self.name("c")
                mt = Monad((), (), ("c", a))
                return Spawn(x, MonadVal(y, self.provider(psi, y, a, d)), (), (), Fwd(x, c), mt)
            if r < 0.27:
                x = self.name("u")
                return New(x, self.provider(psi, x, a, d), Fwd(x, c), a)
            if r < 0.32 and not self.fragment:
                y = self.name("c")
                x = self.name("u")
                v = self.name("x")
                mt = Monad((), (), ("c", a))
                lam = Lam(v, BOOL, MonadVal(y, self.provider(psi.extend(v, BOOL), y, a, d)))
                fn = Anno(lam, Pi(v, BOOL, mt))
                return Spawn(x, App(fn, self.term(psi, BOOL, 0)), (), (), Fwd(x, c), mt)
        d = max(d, 0)
        if isinstance(w, IfS) and isinstance(w.cond, Var):
            return IfP(w.cond, self.provider(psi, c, w.then, d), self.provider(psi, c, w.other, d))
        if isinstance(w, One):
            return Nil()
        if isinstance(w, Exists):
            m = self.term(psi, w.dom, min(d, 2))
            return OutTerm(c, m, w, self.provider(psi, c, subst(w.body, {w.x: m}), d))
        if isinstance(w, Forall):
            x = self.name("x")
            body = subst(w.body, {w.x: Var(x)})
            psi2 = psi.extend(x, w.dom)
            if isinstance(body, IfS) and body.cond == Var(x):
                return In(c, x, IfP(Var(x), self.provider(psi2, c, body.then, d), self.provider(psi2, c, body.other, d)))
            return In(c, x, self.provider(psi2, c, body, d))
        if isinstance(w, Tensor):
            y = self.name("y")
            return OutFresh(c, y, self.provider(psi, y, w.left, d), self.provider(psi, c, w.right, d))
        if isinstance(w, Lolli):
            y = self.name("y")
            return In(c, y, self.client(psi, y, w.left, lambda p2: self.provider(p2, c, w.right, d), d))
        if isinstance(w, With):
            return Case(c, tuple((lab, self.provider(psi, c, b, d)) for lab, b in w.branches))
        if isinstance(w, Plus):
            lab, b = self.rng.choice(w.branches)
            return Select(c, lab, self.provider(psi, c, b, d))
        if isinstance(w, Bang):
            y = self.name("y")
            return Repl(c, y, self.provider(psi, y, w.body, d))
        raise GenerationFailed(f"no provider for {a}")

    def program(self, c: str, depth: int, cuts: int) -> Process:
        """A closed process offering ``c:1`` built from ``cuts`` nested
        compositions, each between a provider and a client of a random session."""
        if cuts <= 0:
            return self.provider(Psi(), c, One(), depth)
        b = self.stype(depth)
        x = self.name("u")
        left = self.provider(Psi(), x, b, depth)
        right = self.client(Psi(), x, b, lambda _psi: self.program(c, depth, cuts - 1), depth)
        return New(x, left, right, b)

    def client(self, psi: Psi, x: str, b: SessType, k, depth: int) -> Process:
        """Use up ``x:b`` completely, then continue with ``k(psi)``."""
        w = eq.whnf(b)
        d = max(depth - 1, 0)
        if isinstance(w, IfS) and isinstance(w.cond, Var):
            return IfP(w.cond, self.client(psi, x, w.then, k, d), self.client(psi, x, w.other, k, d))
        if isinstance(w, One):
            return k(psi)
        if isinstance(w, Exists):
            y = self.name("x")
            body = subst(w.body, {w.x: Var(y)})
            psi2 = psi.extend(y, w.dom)
            if isinstance(body, IfS) and body.cond == Var(y):
                return In(x, y, IfP(Var(y), self.client(psi2, x, body.then, k, d), self.client(psi2, x, body.other, k, d)))
            return In(x, y, self.client(psi2, x, body, k, d))
        if isinstance(w, Forall):
            m = self.term(psi, w.dom, min(d, 2))
            return OutTerm(x, m, w, self.client(psi, x, subst(w.body, {w.x: m}), k, d))
        if isinstance(w, Tensor):
            y = self.name("y")
            return In(x, y, self.client(psi, y, w.left, lambda p2: self.client(p2, x, w.right, k, d), d))
        if isinstance(w, Lolli):
            y = self.name("y")
            return OutFresh(x, y, self.provider(psi, y, w.left, d), self.client(psi, x, w.right, k, d))
        if isinstance(w, With):
            lab, b2 = self.rng.choice(w.branches)
            return Select(x, lab, self.client(psi, x, b2, k, d))
        if isinstance(w, Plus):
            return Case(x, tuple((lab, self.client(psi, x, b2, k, d)) for lab, b2 in w.branches))
        if isinstance(w, Bang):
            if self.coin(0.3):
                return k(psi)
            y = self.name("y")
            return Copy(x, y, self.client(psi, y, w.body, k, d))
        raise GenerationFailed(f"no client for {b}")


def gen_typed_term(psi, target: FunType, depth: int, seed, fragment=False) -> Term:
    """A term of at most ``depth`` levels (a leaf has depth 1) that checks at
    ``target``; raises :class:`GenerationFailed`."""
    g = Gen(seed, fragment)
    psi = psi if isinstance(psi, Psi) else Psi(tuple(psi or ()))
    m = g.term(psi, target, max(depth - 1, 0))
    try:
        return elaborate_term(psi, m, target)
    except CheckError as e:
        raise GenerationFailed(f"self-check rejected {show(m)}: {e}") from None


def gen_typed_proc(offered: SessType, depth: int, seed, chan="c", fragment=False) -> Process:
    """A closed process offering ``chan:offered``, elaborated; ``depth``
    counts levels as for :func:`gen_typed_term`."""
    g = Gen(seed, fragment)
    p = g.provider(Psi(), chan, offered, max(depth - 1, 0))
    try:
        return elaborate_proc(Psi(), {}, {}, p, chan, offered)[1]
    except CheckError as e:
        raise GenerationFailed(f"self-check rejected {show(p)}: {e}") from None


# ---------------------------------------------------------------- untyped syntax (round trip)


class SyntaxGen:
    """Arbitrary well-scoped syntax of every sort, for printer/parser tests."""

    TERM_NAMES = ("a", "b", "f", "g")
    CHANS = ("c", "d", "e")

    def __init__(self, seed):
        self.rng = seed if isinstance(seed, random.Random) else random.Random(seed)
        self.k = 0

    def fresh(self, stem):
        self.k += 1
        return f"{stem}{self.k}"

    def pick(self, *xs):
        return self.rng.choice(xs)

    def node(self, sort, depth):
        return {Kind: self.kind, FunType: self.ftype, SessType: self.stype, Term: self.term, Process: self.proc}[sort](
            depth, {}
        )

    def kind(self, d, tv):
        if d <= 0 or self.rng.random() < 0.4:
            return self.pick(Type(), SType())
        if self.rng.random() < 0.5:
            return PiTerm(self.fresh("x"), self.ftype(d - 1, tv), self.kind(d - 1, tv))
        t = self.fresh("t")
        k = self.kind(d - 1, tv)
        return PiType(t, k, self.kind(d - 1, tv))

    def _tv(self, tv, sort):
        names = [n for n, s in tv.items() if s == sort]
        return self.rng.choice(names) if names else None

    def ftype(self, d, tv):
        if d <= 0:
            v = self._tv(tv, "fun")
            return TVar(v) if v and self.rng.random() < 0.3 else self.pick(BOOL, NAT)
        r = self.rng.randrange(8)
        if r == 0:
            return Pi(self.fresh("x"), self.ftype(d - 1, tv), self.ftype(d - 1, tv))
        if r == 1:
            return LamT(self.fresh("x"), self.ftype(d - 1, tv), self.ftype(d - 1, tv))
        if r == 2:
            return AppT(self.ftype(d - 1, tv), self.term(d - 1, tv))
        if r == 3:
            t = self.fresh("t")
            k = self.kind(d - 1, tv)
            return LamK(t, k, self.ftype(d - 1, {**tv, t: _var_sort(k)}))
        if r == 4:
            return AppK(self.ftype(d - 1, tv), self.pick(self.ftype, self.stype)(d - 1, tv))
        if r == 5:
            shared = tuple((self.fresh("u"), self.stype(d - 1, tv)) for _ in range(self.rng.randrange(2)))
            linear = tuple((self.fresh("d"), self.stype(d - 1, tv)) for _ in range(self.rng.randrange(2)))
            return Monad(shared, linear, (self.fresh("c"), self.stype(d - 1, tv)))
        if r == 6:
            return IfF(self.term(d - 1, tv), self.ftype(d - 1, tv), self.ftype(d - 1, tv))
        return self.pick(BOOL, NAT)

    def stype(self, d, tv):
        if d <= 0:
            v = self._tv(tv, "sess")
            return SVar(v) if v and self.rng.random() < 0.4 else One()
        r = self.rng.randrange(14)
        s = lambda: self.stype(d - 1, tv)  # noqa: E731
        if r == 0:
            return Bang(s())
        if r == 1:
            return Lolli(s(), s())
        if r == 2:
            return Tensor(s(), s())
        if r in (3, 4):
            x = self.fresh("x") if self.rng.random() < 0.5 else "_"
            cls = Forall if r == 3 else Exists
            return cls(x, self.ftype(d - 1, tv), s())
        if r in (5, 6):
            labels = sorted(self.rng.sample(["a", "b", "l", "r"], self.rng.randint(1, 3)))
            return (With if r == 5 else Plus)(tuple((lab, s()) for lab in labels))
        if r == 7:
            return LamTm(self.fresh("x"), self.ftype(d - 1, tv), s())
        if r == 8:
            return AppTm(s(), self.term(d - 1, tv))
        if r == 9:
            t = self.fresh("t")
            k = self.kind(d - 1, tv)
            return LamTy(t, k, self.stype(d - 1, {**tv, t: _var_sort(k)}))
        if r == 10:
            return AppTy(s(), self.pick(self.ftype, self.stype)(d - 1, tv))
        if r == 11:
            return IfS(self.term(d - 1, tv), s(), s())
        if r == 12:
            rr = self.fresh("r")
            return NatRecS(self.term(d - 1, tv), s(), self.fresh("n"), rr, self.stype(d - 1, {**tv, rr: "sess"}))
        return One()

    def term(self, d, tv):
        if d <= 0:
            return self.pick(Var(self.pick(*self.TERM_NAMES)), TT(), FF(), Zero())
        r = self.rng.randrange(9)
        t = lambda: self.term(d - 1, tv)  # noqa: E731
        if r == 0:
            return Lam(self.fresh("x"), self.ftype(d - 1, tv), t())
        if r == 1:
            return App(t(), t())
        if r == 2:
            return Succ(t())
        if r == 3:
            return IfT(t(), t(), t())
        if r == 4:
            return NatRecT(self.ftype(d - 1, tv), t(), t(), self.fresh("n"), self.fresh("r"), t())
        if r == 5:
            return Anno(t(), self.ftype(d - 1, tv))
        if r == 6:
            shared = tuple(self.fresh("u") for _ in range(self.rng.randrange(2)))
            linear = tuple(self.fresh("d") for _ in range(self.rng.randrange(2)))
            return MonadVal(self.fresh("c"), self.proc(d - 1, tv), shared, linear)
        return self.pick(TT(), FF(), numeral(self.rng.randrange(3)), Var(self.pick(*self.TERM_NAMES)))

    def proc(self, d, tv):
        ch = lambda: self.pick(*self.CHANS)  # noqa: E731
        if d <= 0:
            return self.pick(Nil(), Fwd(ch(), ch()))
        r = self.rng.randrange(12)
        p = lambda: self.proc(d - 1, tv)  # noqa: E731
        anno = lambda: self.stype(d - 1, tv) if self.rng.random() < 0.5 else None  # noqa: E731
        if r == 0:
            return OutFresh(ch(), self.fresh("y"), p(), p())
        if r == 1:
            return New(self.fresh("x"), p(), p(), anno())
        if r == 2:
            a = None
            if self.rng.random() < 0.5:
                a = self.pick(self.ftype, self.stype)(d - 1, tv)
            return In(ch(), self.fresh("y"), p(), a)
        if r == 3:
            return OutTerm(ch(), self.term(d - 1, tv), anno(), p())
        if r == 4:
            return Repl(ch(), self.fresh("y"), p())
        if r == 5:
            return Copy(ch(), self.fresh("y"), p())
        if r == 6:
            labels = sorted(self.rng.sample(["a", "b", "l", "r"], self.rng.randint(1, 3)))
            return Case(ch(), tuple((lab, p()) for lab in labels))
        if r == 7:
            return Select(ch(), self.pick("a", "b", "l"), p())
        if r == 8:
            shared = tuple(self.pick(*self.CHANS) for _ in range(self.rng.randrange(2)))
            linear = tuple(self.pick(*self.CHANS) for _ in range(self.rng.randrange(2)))
            return Spawn(self.fresh("x"), self.term(d - 1, tv), shared, linear, p())
        if r == 9:
            return IfP(self.term(d - 1, tv), p(), p())
        return self.pick(Nil(), Fwd(ch(), ch()))


def _var_sort(k: Kind) -> str:
    while isinstance(k, (PiTerm, PiType)):
        k = k.body
    return "fun" if isinstance(k, Type) else "sess"


def round_trip(node: Node) -> bool:
    """Printing then parsing gives back an alpha-equivalent node."""
    text = show(node)
    back = parse_node(text, sort_of(node))
    return alpha_eq(node, back)


# ---------------------------------------------------------------- shrinking


def _subtrees(node):
    """Every (path, subtree) pair in preorder."""
    out = [((), node)]
    for i, (child, _) in enumerate(children(node)):
        out.extend(((i,) + p, s) for p, s in _subtrees(child))
    return out


def _replace_at(node, path, new):
    if not path:
        return new
    idx = path[0]
    count = 0
    fields = {}
    for f, role, _ in node._shape:
        v = getattr(node, f)
        if role in ("sub", "anno"):
            if v is None:
                continue
            if count == idx:
                fields[f] = _replace_at(v, path[1:], new)
            count += 1
        elif role in ("branches", "chans"):
            items = list(v)
            for j, (k, c) in enumerate(items):
                if count == idx:
                    items[j] = (k, _replace_at(c, path[1:], new))
                count += 1
            fields[f] = tuple(items)
        elif role == "chan":
            if count == idx:
                fields[f] = (v[0], _replace_at(v[1], path[1:], new))
            count += 1
    return dataclasses.replace(node, **fields)


def shrink(subject: Node, still_fails, max_rounds=200) -> Node:
    """Greedy shrinking: replace a subtree with one of its own same-sort
    descendants (or ``end`` for processes) while ``still_fails`` holds."""
    from .core import size

    for _ in range(max_rounds):
        improved = False
        for path, sub in _subtrees(subject):
            sort = sort_of(sub) if isinstance(sub, (Term, Process)) else None
            if sort is None:
                continue
            cands = [s for p, s in _subtrees(sub)[1:] if isinstance(s, sort)]
            if sort is Process and not isinstance(sub, Nil):
                cands.insert(0, Nil())
            for cand in cands:
                smaller = _replace_at(subject, path, cand)
                if size(smaller) >= size(subject):
                    continue
                try:
                    ok = still_fails(smaller)
                except Exception:
                    ok = False
                if ok:
                    subject = smaller
                    improved = True
                    break
            if improved:
                break
        if not improved:
            return subject
    return subject


# ---------------------------------------------------------------- reports


@dataclasses.dataclass
class SuiteReport:
    name: str
    iters: int = 0
    passed: int = 0
    failed: int = 0
    undecided: int = 0
    skipped: int = 0
    seconds: float = 0.0
    failures: list = dataclasses.field(default_factory=list)
    notes: list = dataclasses.field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def table(self) -> str:
        head = f"{'suite':<26} {'iters':>6} {'pass':>6} {'fail':>6} {'undec':>6} {'skip':>6} {'secs':>7}"
        row = (
            f"{self.name:<26} {self.iters:>6} {self.passed:>6} {self.failed:>6} "
            f"{self.undecided:>6} {self.skipped:>6} {self.seconds:>7.2f}"
        )
        lines = [head, row]
        for f in self.failures[:5]:
            lines.append(f"  counterexample (case {f['case']}): {f['message']}")
            lines.append(f"    {f['subject']}")
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)

    def summary(self) -> str:
        d = dataclasses.asdict(self)
        d["seconds"] = round(d["seconds"], 3)
        return json.dumps(d, sort_keys=True)


def _case_rng(name, seed, i):
    return random.Random(f"{name}:{seed}:{i}")


def _record(report, i, subject, message, still_fails=None):
    if still_fails is not None and subject is not None:
        subject = shrink(subject, still_fails)
    report.failures.append({"case": i, "message": message, "subject": show(subject) if subject is not None else ""})
    report.failed += 1


# ---------------------------------------------------------------- suites


def _sr_terms(report, iters, seed, max_steps=30):
    for i in range(iters):
        g = Gen(_case_rng(report.name, seed, i))
        target = g.ftype(g.rng.randint(0, 2))
        try:
            m = gen_typed_term(Psi(), target, g.rng.randint(1, 5), g.rng)
        except GenerationFailed:
            report.skipped += 1
            continue

        def fails(m0, target=target):
            check_term(Psi(), m0, target)
            cur = m0
            for _ in range(max_steps):
                nxt = step_term(cur)
                if nxt is None:
                    return None
                try:
                    check_term(Psi(), nxt, target)
                except CheckError as e:
                    return f"{show(cur)} steps to {show(nxt)}, which does not check: {e}"
                cur = nxt
            return None

        try:
            msg = fails(m)
        except StuckTerm as e:
            msg = f"closed well-typed term is stuck: {e}"
        if msg is None:
            report.passed += 1
        else:
            _record(report, i, m, msg, lambda s: _safe(fails, s) is not None)


def _safe(fn, *args):
    try:
        return fn(*args)
    except CheckError:
        return None
    except StuckTerm as e:
        return str(e)


def _closed_proc_case(name, seed, i):
    g = Gen(_case_rng(name, seed, i))
    depth = g.rng.randint(1, 3)
    offered = One()
    p = g.program("c", depth, g.rng.randint(1, 3))
    p = elaborate_proc(Psi(), {}, {}, p, "c", offered)[1]
    return g, p


def _proc_run_failure(p, rng_seed, check_types, max_steps=200):
    """Run ``p`` and return a failure message, or ``None``."""
    cfg = Configuration.initial(p, "c", One())
    rng = Rng(rng_seed)
    for _ in range(max_steps):
        nxt = cfg.step(rng)
        if nxt is None:
            if cfg.live_stuck():
                return f"stuck with live threads: {cfg.render()}"
            return None
        cfg = nxt
        if check_types:
            q = cfg.to_process()
            try:
                elaborate_proc(Psi(), {}, {}, q, "c", One())
            except CheckError as e:
                return f"after {cfg.trace[-1].render()}: {show(q)} does not check: {e}"
    return None


def _proc_suite(report, iters, seed, check_types):
    for i in range(iters):
        try:
            g, p = _closed_proc_case(report.name, seed, i)
        except (GenerationFailed, CheckError):
            report.skipped += 1
            continue
        run_seed = g.rng.getrandbits(64)

        def fails(q, run_seed=run_seed):
            elaborate_proc(Psi(), {}, {}, q, "c", One())
            return _proc_run_failure(q, run_seed, check_types)

        try:
            msg = fails(p)
        except StuckTerm as e:
            msg = f"stuck term inside a process: {e}"
        if msg is None:
            report.passed += 1
        else:
            _record(report, i, p, msg, lambda s: _safe(fails, s) is not None)


def _fragment_case(name, seed, i, depth_max=5, free=True):
    """A fragment term ``m : target`` under ``psi`` (possibly with free variables)."""
    g = Gen(_case_rng(name, seed, i), fragment=True)
    entries = []
    if free:
        for _ in range(g.rng.randint(0, 2)):
            entries.append((g.name("v"), g.ftype(1)))
    psi = Psi(tuple(entries))
    target = g.ftype(g.rng.randint(0, 2))
    m = gen_typed_term(psi, target, g.rng.randint(1, depth_max), g.rng, fragment=True)
    return g, psi, target, m


def _embed_check(psi, m, target, z="z"):
    e = Embedder()
    e.see(m, z)
    p = e.term(m, z)
    a = e.ftype(target)
    elaborate_proc(embed_ctx(psi), {}, {}, p, z, a)
    return p


def _embed_typing(report, iters, seed):
    for i in range(iters):
        try:
            _, psi, target, m = _fragment_case(report.name, seed, i)
        except (GenerationFailed, FragmentError):
            report.skipped += 1
            continue

        def fails(m0, psi=psi, target=target):
            check_term(psi, m0, target)
            try:
                _embed_check(psi, m0, target)
            except CheckError as e:
                return str(e)
            return None

        msg = fails(m)
        if msg is None:
            report.passed += 1
        else:
            _record(report, i, m, msg, lambda s: _safe(fails, s) is not None)


def _embed_compositionality(report, iters, seed, depth=4):
    for i in range(iters):
        g = Gen(_case_rng(report.name, seed, i), fragment=True)
        x = g.name("x")
        tx = g.ftype(1)
        psi = Psi(((x, tx),))
        target = g.ftype(g.rng.randint(0, 2))
        try:
            m = gen_typed_term(psi, target, g.rng.randint(1, depth), g.rng, fragment=True)
            n = gen_typed_term(Psi(), tx, g.rng.randint(1, depth), g.rng, fragment=True)
        except GenerationFailed:
            report.skipped += 1
            continue
        e = Embedder()
        e.see(m, n, "z")
        lhs = e.term(subst(m, {x: n}), "z")
        rhs = subst(e.term(m, "z"), {x: e.suspend(n)})
        verdict = eq.proc_eq(None, lhs, rhs)
        if verdict is eq.Verdict.YES:
            report.passed += 1
        elif verdict is eq.Verdict.UNDECIDED:
            report.undecided += 1
            report.notes.append(f"case {i} undecided: {show(m)} with {x} := {show(n)}")
        else:
            report.failures.append(
                {"case": i, "message": f"{x} := {show(n)}", "subject": f"{show(lhs)}  vs  {show(rhs)}"}
            )
            report.failed += 1


def corpus_fragment_terms(paths=None):
    """Closed term definitions from the corpus that lie in the fragment."""
    paths = sorted(CORPUS.glob("*.sdp")) if paths is None else paths
    out = []
    for path in paths:
        src: SourceFile = parse_file(path)
        for d, resolved, err in resolve(src):
            if err is None and isinstance(d, TermDef):
                try:
                    e = Embedder()
                    e.ftype(resolved.type)
                    e.term(resolved.body, "z")
                except FragmentError:
                    continue
                out.append((f"{Path(path).name}:{d.name}", resolved.body, resolved.type))
    return out


def correspondence(m: Term, target: FunType, seed=0, k=8, z="z"):
    """Check that every source step of ``m`` is matched by at most ``k``
    steps of its translation.  Returns (matched steps, failure or None)."""
    e = Embedder()
    e.see(m, z)
    a = e.ftype(target)
    p = elaborate_proc(Psi(), {}, {}, e.term(m, z), z, a)[1]
    cfg = Configuration.initial(p, z, a)
    rng = Rng(seed)
    matched = []
    cur = m
    while True:
        nxt = step_term(cur)
        has_redex = bool(cfg.redexes())
        if nxt is None:
            if has_redex and eq.proc_eq(None, cfg.to_process(), Embedder(e.avoid).term(cur, z)) is not eq.Verdict.YES:
                return matched, f"translation of the value {show(cur)} still reduces"
            return matched, None
        goal = Embedder(e.avoid).term(nxt, z)
        for used in range(k + 1):
            q = cfg.to_process()
            # Without a target step the two sides must already be congruent;
            # after at least one step, definitional equality decides.
            if struct_cong(erase(q), erase(goal)) if used == 0 else eq.proc_eq(None, q, goal) is eq.Verdict.YES:
                matched.append(used)
                break
            step = cfg.step(rng)
            if step is None:
                return matched, f"translation stopped before matching {show(nxt)}"
            cfg = step
        else:
            return matched, f"no match for {show(cur)} -> {show(nxt)} within {k} steps"
        cur = nxt


def _embed_correspondence(report, iters, seed, k=8):
    cases = corpus_fragment_terms()
    report.iters = len(cases)
    for name, m, t in cases:
        matched, err = correspondence(m, t, seed=seed, k=k)
        if err is None:
            report.passed += 1
            report.notes.append(f"{name}: source steps matched after {matched} target steps")
        else:
            report.failures.append({"case": name, "message": err, "subject": show(m)})
            report.failed += 1


# ---------------------------------------------------------------- equality laws


def _sig(text, sort, termvars=()):
    return parse_node(text, sort, termvars=set(termvars))


def equality_laws():
    """The fixed equality suite: (name, verdict expected, thunk returning a verdict)."""
    bb = _sig("pi x:Bool. Bool", FunType)
    psi_f = Psi((("f", bb),))
    unit = _sig("{ |- c:1 }", FunType)
    psi_m = Psi((("m", unit),))
    fa = _sig("forall x:Bool. 1", SessType)
    T = lambda s, tv=(): _sig(s, Term, tv)  # noqa: E731
    S = lambda s: _sig(s, SessType)  # noqa: E731
    P = lambda s, tv=(): _sig(s, Process, tv)  # noqa: E731
    K = lambda s: _sig(s, Kind)  # noqa: E731
    return [
        ("TMEqβ", True, lambda: eq.term_eq(Psi(), T(r"(\x:Bool. x) tt"), T("tt"), BOOL)),
        ("TMEqη", True, lambda: eq.term_eq(psi_f, T(r"\x:Bool. f x", {"f"}), T("f", {"f"}), bb)),
        ("TMEq{}η", True, lambda: eq.term_eq(psi_m, T("{ c <- y <- m; fwd y c }", {"m"}), T("m", {"m"}), unit)),
        ("STEqβ", True, lambda: eq.type_eq(Psi(), S(r"(\x:Bool. ifS x (Nat /\ 1) 1) [tt]"), S(r"Nat /\ 1"))),
        ("PEq∀η", True, lambda: eq.proc_eq(None, P("fwd d c"), P("recv c (x). send d <x>. fwd d c"), ("c", fa))),
        (
            "PEqCC∀",
            True,
            lambda: eq.proc_eq(
                None,
                P("nu d. (send d <tt>. end || recv c (x). recv d (y). fwd e c)"),
                P("recv c (x). nu d. (send d <tt>. end || recv d (y). fwd e c)"),
            ),
        ),
        ("term-false", False, lambda: eq.term_eq(Psi(), T("tt"), T("ff"), BOOL)),
        ("type-false", False, lambda: eq.type_eq(Psi(), S(r"Nat /\ 1"), S(r"Bool /\ 1"))),
        ("kind-false", False, lambda: eq.kind_eq(Psi(), K("type"), K("stype"))),
        ("proc-false", False, lambda: eq.proc_eq(None, P("send c <tt>. end"), P("send c <ff>. end"))),
    ]


def _equality_laws(report, iters, seed):
    laws = equality_laws()
    report.iters = len(laws)
    for name, expected, thunk in laws:
        v = thunk()
        if v is eq.Verdict.UNDECIDED:
            report.undecided += 1
            report.failures.append({"case": name, "message": "undecided", "subject": ""})
            report.failed += 1
        elif (v is eq.Verdict.YES) == expected:
            report.passed += 1
        else:
            report.failures.append({"case": name, "message": f"answered {v}", "subject": ""})
            report.failed += 1


# ---------------------------------------------------------------- entry point


def run_suite(name: str, iters: int = 100, seed: int = 0) -> SuiteReport:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    report = SuiteReport(name, iters=iters)
    start = time.perf_counter()
    if name == "subject-reduction-terms":
        _sr_terms(report, iters, seed)
    elif name == "subject-reduction-procs":
        _proc_suite(report, iters, seed, check_types=True)
    elif name == "progress":
        _proc_suite(report, iters, seed, check_types=False)
    elif name == "embed-typing":
        _embed_typing(report, iters, seed)
    elif name == "embed-compositionality":
        _embed_compositionality(report, iters, seed)
    elif name == "embed-correspondence":
        _embed_correspondence(report, iters, seed)
    else:
        _equality_laws(report, iters, seed)
    report.seconds = time.perf_counter() - start
    return report
