"""Translation of the functional layer into the process layer.

A function of type ``pi x:T. S`` becomes a process that receives a suspended
computation of type ``{ |- c:[[T]] }`` and then behaves as ``[[S]]``.  Terms
are translated relative to the channel on which their result is offered.
Monadic types turn into a chain of linear implications, one per channel the
suspended process expects, and monadic values receive those channels first.

Built-in booleans and naturals have no counterpart in the translation and are
rejected with :class:`FragmentError`.
"""

from __future__ import annotations

from .core import (
    AppK,
    AppT,
    AppTm,
    AppTy,
    Anno,
    App,
    Bang,
    Case,
    Copy,
    Exists,
    Forall,
    FunType,
    Fwd,
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
    New,
    Nil,
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
    SVar,
    Tensor,
    Term,
    TVar,
    Type,
    Var,
    With,
    all_names,
    fresh_name,
    subst,
)
from .wf import Psi, as_psi


class FragmentError(Exception):
    """Raised for constructs outside the embeddable fragment."""

    def __init__(self, node):
        self.node = node
        super().__init__(f"outside embedding fragment: {type(node).__name__} ({node})")


class Embedder:
    """Carries the set of names already in use so generated channels are fresh."""

    def __init__(self, avoid=()):
        self.avoid = set(avoid)

    def fresh(self, stem):
        name = stem if stem not in self.avoid else fresh_name(stem, self.avoid)
        self.avoid.add(name)
        return name

    def see(self, *nodes):
        for n in nodes:
            if isinstance(n, str):
                self.avoid.add(n)
            elif n is not None:
                self.avoid |= all_names(n)

    # -- kinds and types

    def kind(self, k: Kind) -> Kind:
        if isinstance(k, (Type, SType)):
            return SType()
        if isinstance(k, PiTerm):
            return PiTerm(k.x, self.suspended(k.dom), self.kind(k.body))
        if isinstance(k, PiType):
            return PiType(k.t, self.kind(k.dom), self.kind(k.body))
        raise FragmentError(k)

    def suspended(self, t: FunType) -> Monad:
        """``{ |- c:[[t]] }``, the type of a translated variable."""
        return Monad((), (), ("c", self.ftype(t)))

    def ftype(self, t: FunType) -> SessType:
        if isinstance(t, TVar):
            return SVar(t.name)
        if isinstance(t, Pi):
            return Forall(t.x, self.suspended(t.dom), self.ftype(t.cod))
        if isinstance(t, LamT):
            return LamTm(t.x, self.suspended(t.dom), self.ftype(t.body))
        if isinstance(t, AppT):
            return AppTm(self.ftype(t.fn), self.suspend(t.arg))
        if isinstance(t, LamK):
            return LamTy(t.t, self.kind(t.dom), self.ftype(t.body))
        if isinstance(t, AppK):
            return AppTy(self.ftype(t.fn), self.any_type(t.arg))
        if isinstance(t, Monad):
            out = self.stype(t.offered[1])
            for _, a in reversed(t.linear):
                out = Lolli(self.stype(a), out)
            for _, b in reversed(t.shared):
                out = Lolli(Bang(self.stype(b)), out)
            return out
        raise FragmentError(t)

    def any_type(self, t):
        return self.ftype(t) if isinstance(t, FunType) else self.stype(t)

    def stype(self, a: SessType) -> SessType:
        if isinstance(a, (One, SVar)):
            return a
        if isinstance(a, Bang):
            return Bang(self.stype(a.body))
        if isinstance(a, Lolli):
            return Lolli(self.stype(a.left), self.stype(a.right))
        if isinstance(a, Tensor):
            return Tensor(self.stype(a.left), self.stype(a.right))
        if isinstance(a, (With, Plus)):
            return type(a)(tuple((lab, self.stype(b)) for lab, b in a.branches))
        if isinstance(a, (Forall, Exists)):
            return type(a)(a.x, self.suspended(a.dom), self.stype(a.body))
        if isinstance(a, LamTm):
            return LamTm(a.x, self.suspended(a.dom), self.stype(a.body))
        if isinstance(a, AppTm):
            return AppTm(self.stype(a.fn), self.suspend(a.arg))
        if isinstance(a, LamTy):
            return LamTy(a.t, self.kind(a.dom), self.stype(a.body))
        if isinstance(a, AppTy):
            return AppTy(self.stype(a.fn), self.any_type(a.arg))
        raise FragmentError(a)

    # -- terms

    def suspend(self, m: Term) -> MonadVal:
        """``{ y <- [[m]]_y }``"""
        y = self.fresh("y")
        return MonadVal(y, self.term(m, y))

    def term(self, m: Term, z: str) -> Process:
        self.see(m, z)
        if isinstance(m, Anno):
            return self.term(m.term, z)
        if isinstance(m, Var):
            y = self.fresh("y")
            return Spawn(y, Var(m.name), (), (), Fwd(y, z))
        if isinstance(m, Lam):
            return In(z, m.x, self.term(m.body, z), self.suspended(m.dom))
        if isinstance(m, App):
            x = self.fresh("c")
            anno = self.ftype(m.fn.type) if isinstance(m.fn, Anno) else None
            left = self.term(m.fn, x)
            arg = self.suspend(m.arg)
            return New(x, left, OutTerm(x, arg, anno, Fwd(x, z)), anno)
        if isinstance(m, MonadVal):
            chans = list(m.shared) + list(m.linear)
            body = m.body
            if z in chans:
                ren = {n: self.fresh(n) for n in chans}
                body = subst(body, ren)
                chans = [ren[n] for n in chans]
            body = subst(body, {m.offered: z}) if m.offered != z else body
            out = self.proc(body)
            for n in reversed(chans):
                out = In(z, n, out)
            return out
        raise FragmentError(m)

    # -- processes

    def proc(self, p: Process) -> Process:
        self.see(p)
        if isinstance(p, (Nil, Fwd)):
            return p
        if isinstance(p, OutTerm):
            anno = self.stype(p.anno) if p.anno is not None else None
            return OutTerm(p.on, self.suspend(p.payload), anno, self.proc(p.body))
        if isinstance(p, In):
            anno = p.anno
            if isinstance(anno, FunType):
                anno = self.suspended(anno)
            elif isinstance(anno, SessType):
                anno = self.stype(anno)
            return In(p.on, p.bind, self.proc(p.body), anno)
        if isinstance(p, OutFresh):
            return OutFresh(p.on, p.bind, self.proc(p.left), self.proc(p.right))
        if isinstance(p, New):
            anno = self.stype(p.anno) if p.anno is not None else None
            return New(p.bind, self.proc(p.left), self.proc(p.right), anno)
        if isinstance(p, Repl):
            return Repl(p.on, p.bind, self.proc(p.body))
        if isinstance(p, Copy):
            return Copy(p.on, p.bind, self.proc(p.body))
        if isinstance(p, Case):
            return Case(p.on, tuple((lab, self.proc(q)) for lab, q in p.branches))
        if isinstance(p, Select):
            return Select(p.on, p.label, self.proc(p.body))
        if isinstance(p, Spawn):
            return self.spawn(p)
        raise FragmentError(p)

    def spawn(self, p: Spawn) -> Process:
        c = self.fresh("c")
        anno = self.ftype(p.anno) if p.anno is not None else None
        provider = self.term(p.monadic, c)
        rest = self.proc(subst(p.cont, {p.bind: c}) if p.bind != c else p.cont)
        links = []
        for u in p.shared:
            v, w, a = self.fresh("v"), self.fresh("w"), self.fresh("a")
            links.append((v, Repl(v, w, Copy(u, a, Fwd(a, w)))))
        for y in p.linear:
            d = self.fresh("d")
            links.append((d, Fwd(y, d)))
        for v, server in reversed(links):
            rest = OutFresh(c, v, server, rest)
        return New(c, provider, rest, anno)


def embed_kind(k: Kind) -> Kind:
    return Embedder().kind(k)


def embed_ftype(t: FunType) -> SessType:
    e = Embedder()
    e.see(t)
    return e.ftype(t)


def embed_stype(a: SessType) -> SessType:
    e = Embedder()
    e.see(a)
    return e.stype(a)


def embed_term(m: Term, z: str = "z", avoid=()) -> Process:
    e = Embedder(avoid)
    e.see(m, z)
    return e.term(m, z)


def embed_proc(p: Process, avoid=()) -> Process:
    e = Embedder(avoid)
    e.see(p)
    return e.proc(p)


def embed_ctx(psi) -> Psi:
    """Map ``x:T`` to ``x:{ |- c:[[T]] }`` and kinds to their images."""
    e = Embedder()
    out = []
    for name, cls in as_psi(psi).entries:
        out.append((name, e.kind(cls) if isinstance(cls, Kind) else e.suspended(cls)))
    return Psi(tuple(out))


def in_fragment(node) -> bool:
    try:
        e = Embedder()
        if isinstance(node, Term):
            e.term(node, "z")
        elif isinstance(node, Process):
            e.proc(node)
        elif isinstance(node, Kind):
            e.kind(node)
        elif isinstance(node, FunType):
            e.ftype(node)
        else:
            e.stype(node)
    except FragmentError:
        return False
    return True


__all__ = [
    "Embedder",
    "FragmentError",
    "embed_ctx",
    "embed_ftype",
    "embed_kind",
    "embed_proc",
    "embed_stype",
    "embed_term",
    "in_fragment",
]
