"""Well-formedness of contexts, kinds and types, with kind synthesis."""

from __future__ import annotations

import dataclasses

from . import equality as eq
from .core import (
    BOOL,
    NAT,
    AppK,
    AppT,
    AppTm,
    AppTy,
    Bang,
    Base,
    Exists,
    Forall,
    FunType,
    IfF,
    IfS,
    Kind,
    LamK,
    LamT,
    LamTm,
    LamTy,
    Lolli,
    Monad,
    NatRecS,
    Node,
    One,
    Pi,
    PiTerm,
    PiType,
    Plus,
    SessType,
    SType,
    SVar,
    Tensor,
    TVar,
    Type,
    Var,
    With,
    fresh_name,
    free_names,
    subst,
)


class CheckError(Exception):
    """A failed judgment, tagged with the name of the rule that failed."""

    def __init__(self, rule, message, pos=None):
        self.rule = rule
        self.message = message
        self.pos = pos
        super().__init__(f"{rule}: {message}")


@dataclasses.dataclass(frozen=True)
class Psi:
    """The ordered dependent context: term variables with their types and
    type variables with their kinds."""

    entries: tuple = ()

    def extend(self, name, classifier) -> Psi:
        return Psi(self.entries + ((name, classifier),))

    def lookup(self, name):
        for n, c in reversed(self.entries):
            if n == name:
                return c
        return None

    def names(self) -> set:
        return {n for n, _ in self.entries}

    def __contains__(self, name):
        return self.lookup(name) is not None

    def __len__(self):
        return len(self.entries)


def as_psi(psi) -> Psi:
    if psi is None:
        return Psi()
    if isinstance(psi, Psi):
        return psi
    if isinstance(psi, dict):
        return Psi(tuple(psi.items()))
    return Psi(tuple(psi))


@dataclasses.dataclass(frozen=True)
class TriCtx:
    psi: Psi = Psi()
    gamma: dict = dataclasses.field(default_factory=dict)
    delta: dict = dataclasses.field(default_factory=dict)


def _require(verdict, rule, message, pos=None):
    if verdict is eq.Verdict.YES:
        return
    if verdict is eq.Verdict.UNDECIDED:
        raise CheckError("conv-undecided", message, pos)
    raise CheckError(rule, message, pos)


def under(psi: Psi, x: str, cls, body: Node, avoid=()):
    """Extend ``psi`` with a binder, renaming it if it would shadow."""
    if x in psi or x in avoid:
        y = fresh_name(x, psi.names() | set(avoid) | free_names(body))
        return psi.extend(y, cls), y, subst(body, {x: Var(y) if isinstance(cls, FunType) else y})
    return psi.extend(x, cls), x, body


def under_tyvar(psi: Psi, t: str, kind: Kind, body: Node):
    if t in psi:
        y = fresh_name(t, psi.names() | free_names(body))
        sort_var = TVar if kind_base(kind) is Type else SVar
        return psi.extend(y, kind), y, subst(body, {t: sort_var(y)})
    return psi.extend(t, kind), t, body


def kind_base(k: Kind):
    while isinstance(k, (PiTerm, PiType)):
        k = k.body
    return type(k)


# ---------------------------------------------------------------- contexts and kinds


def check_ctx(psi) -> None:
    psi = as_psi(psi)
    prefix = Psi()
    for name, cls in psi.entries:
        try:
            if isinstance(cls, Kind):
                check_kind(prefix, cls)
            elif isinstance(cls, FunType):
                _expect_type(prefix, cls)
            else:
                raise CheckError("ctx", f"{name} is classified by a session type; a functional type is required")
        except CheckError as e:
            raise CheckError(e.rule, f"context entry {name}: {e.message}", e.pos) from None
        prefix = prefix.extend(name, cls)


def check_kind(psi, k: Kind) -> None:
    psi = as_psi(psi)
    if isinstance(k, (Type, SType)):
        return
    if isinstance(k, PiTerm):
        _expect_type(psi, k.dom)
        psi2, _, body = under(psi, k.x, k.dom, k.body)
        check_kind(psi2, body)
        return
    if isinstance(k, PiType):
        check_kind(psi, k.dom)
        psi2, _, body = under_tyvar(psi, k.t, k.dom, k.body)
        check_kind(psi2, body)
        return
    raise CheckError("kind", f"not a kind: {k}", getattr(k, "pos", None))


def _expect_type(psi, t: FunType):
    if not isinstance(t, FunType):
        raise CheckError("type-wf", f"expected a functional type, found {t}", getattr(t, "pos", None))
    k = infer_kind_fun(psi, t)
    if not isinstance(k, Type):
        raise CheckError("type-wf", f"{t} has kind {k}, expected type", t.pos)


def _expect_stype(psi, a: SessType):
    if not isinstance(a, SessType):
        raise CheckError("stype-wf", f"expected a session type, found {a}", getattr(a, "pos", None))
    k = infer_kind_sess(psi, a)
    if not isinstance(k, SType):
        raise CheckError("stype-wf", f"{a} has kind {k}, expected stype", a.pos)


def check_stype(psi, a: SessType) -> None:
    _expect_stype(as_psi(psi), a)


def check_type(psi, t: FunType) -> None:
    _expect_type(as_psi(psi), t)


def infer_kind(psi, t: Node) -> Kind:
    if isinstance(t, FunType):
        return infer_kind_fun(psi, t)
    if isinstance(t, SessType):
        return infer_kind_sess(psi, t)
    raise CheckError("kind", f"not a type: {t}", getattr(t, "pos", None))


def _check_term(psi, m, t):
    from .typing import check_term

    check_term(psi, m, t)


def _apply_term(psi, t, rule):
    fk = infer_kind(psi, t.fn)
    if not isinstance(fk, PiTerm):
        raise CheckError(rule, f"{t.fn} has kind {fk}; it cannot be applied to a term", t.pos)
    _check_term(psi, t.arg, fk.dom)
    return subst(fk.body, {fk.x: t.arg})


def _apply_type(psi, t, rule):
    fk = infer_kind(psi, t.fn)
    if not isinstance(fk, PiType):
        raise CheckError(rule, f"{t.fn} has kind {fk}; it cannot be applied to a type", t.pos)
    ak = infer_kind(psi, t.arg)
    _require(eq.kind_eq(psi, ak, fk.dom), rule, f"argument {t.arg} has kind {ak}, expected {fk.dom}", t.pos)
    return subst(fk.body, {fk.t: t.arg})


def _lookup_tyvar(psi, t, base):
    k = psi.lookup(t.name)
    if k is None:
        raise CheckError("var", f"unbound type variable {t.name}", t.pos)
    if not isinstance(k, Kind):
        raise CheckError("var", f"{t.name} is a term variable, not a type", t.pos)
    if kind_base(k) is not base:
        raise CheckError("var", f"{t.name} has kind {k}", t.pos)
    return k


def infer_kind_fun(psi, t: FunType) -> Kind:
    psi = as_psi(psi)
    if isinstance(t, Base):
        if t.name not in ("Bool", "Nat"):
            raise CheckError("type-wf", f"unknown base type {t.name}", t.pos)
        return Type()
    if isinstance(t, TVar):
        return _lookup_tyvar(psi, t, Type)
    if isinstance(t, Pi):
        _expect_type(psi, t.dom)
        psi2, _, cod = under(psi, t.x, t.dom, t.cod)
        _expect_type(psi2, cod)
        return Type()
    if isinstance(t, LamT):
        _expect_type(psi, t.dom)
        psi2, x, body = under(psi, t.x, t.dom, t.body)
        return PiTerm(x, t.dom, infer_kind_fun(psi2, body))
    if isinstance(t, AppT):
        return _apply_term(psi, t, "type-app")
    if isinstance(t, LamK):
        check_kind(psi, t.dom)
        psi2, name, body = under_tyvar(psi, t.t, t.dom, t.body)
        return PiType(name, t.dom, infer_kind_fun(psi2, body))
    if isinstance(t, AppK):
        return _apply_type(psi, t, "type-app")
    if isinstance(t, Monad):
        names = [n for n, _ in t.shared] + [n for n, _ in t.linear] + [t.offered[0]]
        if len(set(names)) != len(names):
            raise CheckError("monad-wf", "channel names of a monad type must be distinct", t.pos)
        for _, a in (*t.shared, *t.linear, t.offered):
            _expect_stype(psi, a)
        return Type()
    if isinstance(t, IfF):
        _check_term(psi, t.cond, BOOL)
        k1 = infer_kind_fun(psi, t.then)
        k2 = infer_kind_fun(psi, t.other)
        _require(eq.kind_eq(psi, k1, k2), "if-type", f"branches have kinds {k1} and {k2}", t.pos)
        return k1
    raise CheckError("type-wf", f"expected a functional type, found {t}", getattr(t, "pos", None))


def infer_kind_sess(psi, a: SessType) -> Kind:
    psi = as_psi(psi)
    if isinstance(a, One):
        return SType()
    if isinstance(a, SVar):
        return _lookup_tyvar(psi, a, SType)
    if isinstance(a, Bang):
        _expect_stype(psi, a.body)
        return SType()
    if isinstance(a, (Lolli, Tensor)):
        _expect_stype(psi, a.left)
        _expect_stype(psi, a.right)
        return SType()
    if isinstance(a, (Forall, Exists)):
        _expect_type(psi, a.dom)
        psi2, _, body = under(psi, a.x, a.dom, a.body)
        _expect_stype(psi2, body)
        return SType()
    if isinstance(a, (With, Plus)):
        labels = [lab for lab, _ in a.branches]
        if not labels or len(set(labels)) != len(labels):
            raise CheckError("stype-wf", "label sets must be non-empty with distinct labels", a.pos)
        for _, b in a.branches:
            _expect_stype(psi, b)
        return SType()
    if isinstance(a, LamTm):
        _expect_type(psi, a.dom)
        psi2, x, body = under(psi, a.x, a.dom, a.body)
        return PiTerm(x, a.dom, infer_kind_sess(psi2, body))
    if isinstance(a, AppTm):
        return _apply_term(psi, a, "stype-app")
    if isinstance(a, LamTy):
        check_kind(psi, a.dom)
        psi2, name, body = under_tyvar(psi, a.t, a.dom, a.body)
        return PiType(name, a.dom, infer_kind_sess(psi2, body))
    if isinstance(a, AppTy):
        return _apply_type(psi, a, "stype-app")
    if isinstance(a, IfS):
        _check_term(psi, a.cond, BOOL)
        _expect_stype(psi, a.then)
        _expect_stype(psi, a.other)
        return SType()
    if isinstance(a, NatRecS):
        _check_term(psi, a.target, NAT)
        _expect_stype(psi, a.zero)
        psi2, n, succ = under(psi, a.n, NAT, a.succ)
        psi3, _, succ = under_tyvar(psi2, a.r, SType(), succ)
        _expect_stype(psi3, succ)
        return SType()
    raise CheckError("stype-wf", f"expected a session type, found {a}", getattr(a, "pos", None))
