"""Abstract syntax for kinds, functional types, session types, terms and processes.

Every node is a frozen dataclass carrying a ``_shape`` that describes its fields
by role.  The generic traversals below (free names, substitution, freshening,
alpha-equivalence, structural congruence) are driven by that description, so
adding a constructor only means declaring its shape.

Roles:
  bind / binds   binder name(s)
  ref / refs     free occurrence(s) of a channel name
  sub            child node, possibly under some of the node's binders
  anno           optional child that only guides checking
  branches       tuple of (label, child) pairs
  chans / chan   (name, session type) entries of a monad type; the names are
                 positional and carry no binding
  data           plain data compared by equality
"""

from __future__ import annotations

import dataclasses
import itertools
import re
import sys
from typing import ClassVar, Iterator

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


@dataclasses.dataclass(frozen=True)
class Node:
    _shape: ClassVar[tuple] = ()
    pos: tuple | None = dataclasses.field(
        default=None, kw_only=True, compare=False, repr=False
    )

    def __str__(self):
        from .surface import show

        return show(self)


def field(name, role, scope=()):
    return (name, role, tuple(scope))


# ---------------------------------------------------------------- kinds


class Kind(Node):
    pass


@dataclasses.dataclass(frozen=True)
class Type(Kind):
    pass


@dataclasses.dataclass(frozen=True)
class SType(Kind):
    pass


@dataclasses.dataclass(frozen=True)
class PiTerm(Kind):
    x: str
    dom: FunType
    body: Kind
    _shape = (field("x", "bind"), field("dom", "sub"), field("body", "sub", ["x"]))


@dataclasses.dataclass(frozen=True)
class PiType(Kind):
    t: str
    dom: Kind
    body: Kind
    _shape = (field("t", "bind"), field("dom", "sub"), field("body", "sub", ["t"]))


# ---------------------------------------------------------------- functional types


class FunType(Node):
    pass


@dataclasses.dataclass(frozen=True)
class Pi(FunType):
    x: str
    dom: FunType
    cod: FunType
    _shape = (field("x", "bind"), field("dom", "sub"), field("cod", "sub", ["x"]))


@dataclasses.dataclass(frozen=True)
class LamT(FunType):
    x: str
    dom: FunType
    body: FunType
    _shape = (field("x", "bind"), field("dom", "sub"), field("body", "sub", ["x"]))


@dataclasses.dataclass(frozen=True)
class AppT(FunType):
    fn: FunType
    arg: Term
    _shape = (field("fn", "sub"), field("arg", "sub"))


@dataclasses.dataclass(frozen=True)
class LamK(FunType):
    t: str
    dom: Kind
    body: FunType
    _shape = (field("t", "bind"), field("dom", "sub"), field("body", "sub", ["t"]))


@dataclasses.dataclass(frozen=True)
class AppK(FunType):
    # the argument is a functional or a session type, depending on the kind of fn
    fn: FunType
    arg: Node
    _shape = (field("fn", "sub"), field("arg", "sub"))


@dataclasses.dataclass(frozen=True)
class Monad(FunType):
    shared: tuple
    linear: tuple
    offered: tuple
    _shape = (field("shared", "chans"), field("linear", "chans"), field("offered", "chan"))


@dataclasses.dataclass(frozen=True)
class TVar(FunType):
    name: str


@dataclasses.dataclass(frozen=True)
class Base(FunType):
    name: str
    _shape = (field("name", "data"),)


@dataclasses.dataclass(frozen=True)
class IfF(FunType):
    cond: Term
    then: FunType
    other: FunType
    _shape = (field("cond", "sub"), field("then", "sub"), field("other", "sub"))


BOOL = Base("Bool")
NAT = Base("Nat")


# ---------------------------------------------------------------- session types


class SessType(Node):
    pass


@dataclasses.dataclass(frozen=True)
class One(SessType):
    pass


@dataclasses.dataclass(frozen=True)
class Bang(SessType):
    body: SessType
    _shape = (field("body", "sub"),)


@dataclasses.dataclass(frozen=True)
class Lolli(SessType):
    left: SessType
    right: SessType
    _shape = (field("left", "sub"), field("right", "sub"))


@dataclasses.dataclass(frozen=True)
class Tensor(SessType):
    left: SessType
    right: SessType
    _shape = (field("left", "sub"), field("right", "sub"))


@dataclasses.dataclass(frozen=True)
class Forall(SessType):
    x: str
    dom: FunType
    body: SessType
    _shape = (field("x", "bind"), field("dom", "sub"), field("body", "sub", ["x"]))


@dataclasses.dataclass(frozen=True)
class Exists(SessType):
    x: str
    dom: FunType
    body: SessType
    _shape = (field("x", "bind"), field("dom", "sub"), field("body", "sub", ["x"]))


@dataclasses.dataclass(frozen=True)
class With(SessType):
    branches: tuple
    _shape = (field("branches", "branches"),)


@dataclasses.dataclass(frozen=True)
class Plus(SessType):
    branches: tuple
    _shape = (field("branches", "branches"),)


@dataclasses.dataclass(frozen=True)
class LamTm(SessType):
    x: str
    dom: FunType
    body: SessType
    _shape = (field("x", "bind"), field("dom", "sub"), field("body", "sub", ["x"]))


@dataclasses.dataclass(frozen=True)
class AppTm(SessType):
    fn: SessType
    arg: Term
    _shape = (field("fn", "sub"), field("arg", "sub"))


@dataclasses.dataclass(frozen=True)
class LamTy(SessType):
    t: str
    dom: Kind
    body: SessType
    _shape = (field("t", "bind"), field("dom", "sub"), field("body", "sub", ["t"]))


@dataclasses.dataclass(frozen=True)
class AppTy(SessType):
    fn: SessType
    arg: Node
    _shape = (field("fn", "sub"), field("arg", "sub"))


@dataclasses.dataclass(frozen=True)
class SVar(SessType):
    name: str


@dataclasses.dataclass(frozen=True)
class IfS(SessType):
    cond: Term
    then: SessType
    other: SessType
    _shape = (field("cond", "sub"), field("then", "sub"), field("other", "sub"))


@dataclasses.dataclass(frozen=True)
class NatRecS(SessType):
    target: Term
    zero: SessType
    n: str
    r: str
    succ: SessType
    _shape = (
        field("target", "sub"),
        field("zero", "sub"),
        field("n", "bind"),
        field("r", "bind"),
        field("succ", "sub", ["n", "r"]),
    )


# ---------------------------------------------------------------- terms


class Term(Node):
    pass


@dataclasses.dataclass(frozen=True)
class Var(Term):
    name: str


@dataclasses.dataclass(frozen=True)
class Lam(Term):
    x: str
    dom: FunType
    body: Term
    _shape = (field("x", "bind"), field("dom", "sub"), field("body", "sub", ["x"]))


@dataclasses.dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term
    _shape = (field("fn", "sub"), field("arg", "sub"))


@dataclasses.dataclass(frozen=True)
class MonadVal(Term):
    offered: str
    body: Process
    shared: tuple = ()
    linear: tuple = ()
    _shape = (
        field("offered", "bind"),
        field("shared", "binds"),
        field("linear", "binds"),
        field("body", "sub", ["offered", "shared", "linear"]),
    )


@dataclasses.dataclass(frozen=True)
class TT(Term):
    pass


@dataclasses.dataclass(frozen=True)
class FF(Term):
    pass


@dataclasses.dataclass(frozen=True)
class Zero(Term):
    pass


@dataclasses.dataclass(frozen=True)
class Succ(Term):
    pred: Term
    _shape = (field("pred", "sub"),)


@dataclasses.dataclass(frozen=True)
class IfT(Term):
    cond: Term
    then: Term
    other: Term
    _shape = (field("cond", "sub"), field("then", "sub"), field("other", "sub"))


@dataclasses.dataclass(frozen=True)
class NatRecT(Term):
    motive: FunType
    target: Term
    zero: Term
    n: str
    r: str
    succ: Term
    _shape = (
        field("motive", "sub"),
        field("target", "sub"),
        field("zero", "sub"),
        field("n", "bind"),
        field("r", "bind"),
        field("succ", "sub", ["n", "r"]),
    )


@dataclasses.dataclass(frozen=True)
class Anno(Term):
    term: Term
    type: FunType
    _shape = (field("term", "sub"), field("type", "sub"))


# ---------------------------------------------------------------- processes


class Process(Node):
    pass


@dataclasses.dataclass(frozen=True)
class OutFresh(Process):
    """Send a fresh channel ``bind``; ``left`` serves it, ``right`` continues."""

    on: str
    bind: str
    left: Process
    right: Process
    _shape = (
        field("on", "ref"),
        field("bind", "bind"),
        field("left", "sub", ["bind"]),
        field("right", "sub", ["bind"]),
    )


@dataclasses.dataclass(frozen=True)
class New(Process):
    """Composition over a private channel; ``left`` offers ``bind``."""

    bind: str
    left: Process
    right: Process
    anno: SessType | None = None
    _shape = (
        field("bind", "bind"),
        field("anno", "anno"),
        field("left", "sub", ["bind"]),
        field("right", "sub", ["bind"]),
    )


@dataclasses.dataclass(frozen=True)
class In(Process):
    on: str
    bind: str
    body: Process
    anno: Node | None = None
    _shape = (
        field("on", "ref"),
        field("bind", "bind"),
        field("anno", "anno"),
        field("body", "sub", ["bind"]),
    )


@dataclasses.dataclass(frozen=True)
class OutTerm(Process):
    on: str
    payload: Term
    anno: SessType | None
    body: Process
    _shape = (
        field("on", "ref"),
        field("payload", "sub"),
        field("anno", "anno"),
        field("body", "sub"),
    )


@dataclasses.dataclass(frozen=True)
class Repl(Process):
    on: str
    bind: str
    body: Process
    _shape = (field("on", "ref"), field("bind", "bind"), field("body", "sub", ["bind"]))


@dataclasses.dataclass(frozen=True)
class Copy(Process):
    """Request a fresh session ``bind`` from the shared server ``on``."""

    on: str
    bind: str
    body: Process
    _shape = (field("on", "ref"), field("bind", "bind"), field("body", "sub", ["bind"]))


@dataclasses.dataclass(frozen=True)
class Case(Process):
    on: str
    branches: tuple
    _shape = (field("on", "ref"), field("branches", "branches"))


@dataclasses.dataclass(frozen=True)
class Select(Process):
    on: str
    label: str
    body: Process
    _shape = (field("on", "ref"), field("label", "data"), field("body", "sub"))


@dataclasses.dataclass(frozen=True)
class Fwd(Process):
    """``fwd src dst`` offers ``dst`` by forwarding to ``src``."""

    src: str
    dst: str
    _shape = (field("src", "ref"), field("dst", "ref"))


@dataclasses.dataclass(frozen=True)
class Nil(Process):
    pass


@dataclasses.dataclass(frozen=True)
class Spawn(Process):
    bind: str
    monadic: Term
    shared: tuple
    linear: tuple
    cont: Process
    anno: FunType | None = None
    _shape = (
        field("bind", "bind"),
        field("monadic", "sub"),
        field("shared", "refs"),
        field("linear", "refs"),
        field("anno", "anno"),
        field("cont", "sub", ["bind"]),
    )


@dataclasses.dataclass(frozen=True)
class IfP(Process):
    """Branch on a boolean term."""

    cond: Term
    then: Process
    other: Process
    _shape = (field("cond", "sub"), field("then", "sub"), field("other", "sub"))


VARS = (Var, TVar, SVar)
SORTS = (Kind, FunType, SessType, Term, Process)


def sort_of(node: Node) -> type:
    for s in SORTS:
        if isinstance(node, s):
            return s
    raise TypeError(f"not a syntax node: {node!r}")


def branch_map(branches) -> dict:
    return dict(branches)


# ---------------------------------------------------------------- generic traversal


def _scoped_binders(node, scope) -> list[str]:
    out = []
    for f in scope:
        v = getattr(node, f)
        if isinstance(v, tuple):
            out.extend(v)
        else:
            out.append(v)
    return out


def binders(node) -> list[str]:
    out = []
    for f, role, _ in node._shape:
        if role == "bind":
            out.append(getattr(node, f))
        elif role == "binds":
            out.extend(getattr(node, f))
    return out


def children(node) -> Iterator[tuple[Node, list[str]]]:
    """Yield each child together with the binders in scope over it."""
    for f, role, scope in node._shape:
        v = getattr(node, f)
        if role in ("sub", "anno"):
            if v is not None:
                yield v, _scoped_binders(node, scope)
        elif role == "branches":
            bs = _scoped_binders(node, scope)
            for _, child in v:
                yield child, bs
        elif role == "chans":
            for _, child in v:
                yield child, []
        elif role == "chan":
            yield v[1], []


def free_names(node: Node) -> frozenset:
    cached = node.__dict__.get("_fv")
    if cached is not None:
        return cached
    if isinstance(node, VARS):
        out = frozenset([node.name])
    else:
        acc = set()
        for f, role, _ in node._shape:
            if role == "ref":
                acc.add(getattr(node, f))
            elif role == "refs":
                acc.update(getattr(node, f))
        for child, bs in children(node):
            fv = free_names(child)
            acc.update(fv.difference(bs) if bs else fv)
        out = frozenset(acc)
    object.__setattr__(node, "_fv", out)
    return out


def all_names(node: Node) -> set:
    out = set(free_names(node))
    stack = [node]
    while stack:
        n = stack.pop()
        out.update(binders(n))
        stack.extend(c for c, _ in children(n))
    return out


def size(node: Node) -> int:
    return 1 + sum(size(c) for c, _ in children(node))


_SUFFIX = re.compile(r"_\d+$")


def fresh_name(base: str, avoid) -> str:
    stem = _SUFFIX.sub("", base).strip("_") or "v"
    for k in itertools.count(1):
        cand = f"{stem}_{k}"
        if cand not in avoid:
            return cand


def _names_of(value) -> frozenset:
    if isinstance(value, str):
        return frozenset([value])
    return free_names(value)


def _rebuild(node, fields: dict):
    return dataclasses.replace(node, **fields) if fields else node


def subst(node: Node, mapping: dict) -> Node:
    """Capture-avoiding simultaneous substitution.

    Values are nodes (replacing variable nodes) or strings (renaming both
    variable nodes and channel occurrences).
    """
    fv = free_names(node)
    mapping = {k: v for k, v in mapping.items() if k in fv}
    if not mapping:
        return node
    if isinstance(node, VARS):
        r = mapping[node.name]
        if isinstance(r, str):
            return dataclasses.replace(node, name=r)
        return r
    danger = set()
    for v in mapping.values():
        danger |= _names_of(v)
    # rename binders that would capture a name of a replacement
    ren = {}
    for b in binders(node):
        if b in danger and b not in ren:
            ren[b] = fresh_name(b, danger | all_names(node) | set(mapping) | set(ren.values()))
    new = {}
    for f, role, scope in node._shape:
        v = getattr(node, f)
        if role == "bind":
            if v in ren:
                new[f] = ren[v]
        elif role == "binds":
            if any(b in ren for b in v):
                new[f] = tuple(ren.get(b, b) for b in v)
        elif role == "ref":
            if v in mapping:
                new[f] = _as_name(mapping[v], v)
        elif role == "refs":
            if any(b in mapping for b in v):
                new[f] = tuple(_as_name(mapping[b], b) if b in mapping else b for b in v)
        elif role in ("sub", "anno", "branches", "chans", "chan"):
            inner = _inner_mapping(mapping, ren, _scoped_binders(node, scope))
            if role in ("sub", "anno"):
                if v is not None:
                    nv = subst(v, inner)
                    if nv is not v:
                        new[f] = nv
            elif role == "chan":
                nv = subst(v[1], inner)
                if nv is not v[1]:
                    new[f] = (v[0], nv)
            else:
                items = tuple((lab, subst(c, inner)) for lab, c in v)
                if any(a[1] is not b[1] for a, b in zip(items, v)):
                    new[f] = items
    return _rebuild(node, new)


def _as_name(value, old):
    if isinstance(value, str):
        return value
    if isinstance(value, VARS):
        return value.name
    raise TypeError(f"cannot substitute {value!r} for channel {old}")


def _inner_mapping(mapping, ren, bound):
    if not bound:
        return mapping
    inner = {k: v for k, v in mapping.items() if k not in bound}
    for b in bound:
        if b in ren:
            inner[b] = ren[b]
    return inner


def subst_term(target: Node, victim: str, replacement: Node) -> Node:
    return subst(target, {victim: replacement})


def rename(node: Node, mapping: dict) -> Node:
    return subst(node, mapping)


def freshen(node: Node, avoid=None) -> Node:
    """Rename every binder so binders are pairwise distinct and distinct from
    ``avoid`` and from the free names of ``node``."""
    used = set(avoid or ()) | set(free_names(node))
    return _freshen(node, used)


def _freshen(node, used):
    if isinstance(node, VARS) or not node._shape:
        return node
    ren = {}
    for b in binders(node):
        if b in ren:
            continue
        if b in used:
            nb = fresh_name(b, used)
        else:
            nb = b
        used.add(nb)
        ren[b] = nb
    new = {}
    for f, role, scope in node._shape:
        v = getattr(node, f)
        if role == "bind":
            new[f] = ren[v]
        elif role == "binds":
            new[f] = tuple(ren[b] for b in v)
        elif role in ("sub", "anno", "branches", "chans", "chan"):
            bound = _scoped_binders(node, scope)
            m = {b: ren[b] for b in bound if ren[b] != b}
            if role in ("sub", "anno"):
                if v is not None:
                    new[f] = _freshen(subst(v, m) if m else v, used)
            elif role == "chan":
                new[f] = (v[0], _freshen(v[1], used))
            else:
                new[f] = tuple((lab, _freshen(subst(c, m) if m else c, used)) for lab, c in v)
    return dataclasses.replace(node, **new)


# ---------------------------------------------------------------- comparison


class Matcher:
    """Backtracking comparison of two syntax trees up to renaming.

    ``flatten`` compares processes modulo structural congruence: nested
    compositions are read as a restricted-name set over a multiset of
    components, with inert ``end`` components dropped.  ``conv`` is used by the
    equality engine: it adds eta for lambdas and ignores checking annotations.
    """

    def __init__(self, flatten=False, conv=False):
        self.flatten = flatten
        self.conv = conv
        self.undecided = False

    def run(self, a, b) -> bool:
        fa = freshen(a)
        fb = freshen(b, all_names(fa))
        for _ in self.match(fa, fb, ({}, {})):
            return True
        return False

    # env: (left-name -> right-name | None, right-name -> left-name | None);
    # None marks a restricted name still waiting for its partner.
    def names(self, a, b, env):
        L, R = env
        inl, inr = a in L, b in R
        if not inl and not inr:
            return env if a == b else None
        if not (inl and inr):
            return None
        la, rb = L[a], R[b]
        if la is None and rb is None:
            L2, R2 = dict(L), dict(R)
            L2[a], R2[b] = b, a
            return (L2, R2)
        return env if la == b and rb == a else None

    def bind(self, xs, ys, env):
        if len(xs) != len(ys):
            return None
        L, R = dict(env[0]), dict(env[1])
        for x, y in zip(xs, ys):
            L[x], R[y] = y, x
        return (L, R)

    def match(self, a, b, env):
        if self.flatten and isinstance(a, Process) and isinstance(b, Process):
            if isinstance(a, (New, Nil)) or isinstance(b, (New, Nil)):
                yield from self.match_groups(a, b, env)
                return
        if self.conv:
            lams = (Lam, LamT, LamTm)
            if isinstance(a, lams) and type(b) is not type(a):
                yield from self.eta(a, b, env, left=True)
                return
            if isinstance(b, lams) and type(a) is not type(b):
                yield from self.eta(b, a, env, left=False)
                return
        if type(a) is not type(b):
            if self.conv and (_stuck_elim(a) or _stuck_elim(b)):
                self.undecided = True
            return
        if isinstance(a, VARS):
            e = self.names(a.name, b.name, env)
            if e is not None:
                yield e
            return
        if self.conv and _stuck_elim(a):
            found = False
            for e in self._match_fields(a, b, env):
                found = True
                yield e
            # distinct scrutinees leave the answer open; equal scrutinees
            # with different branches are a plain mismatch
            if not found and not self._scrutinees_match(a, b, env):
                self.undecided = True
            return
        yield from self._match_fields(a, b, env)

    def _scrutinees_match(self, a, b, env):
        f = "target" if isinstance(a, (NatRecS, NatRecT)) else "cond"
        for _ in self.match(getattr(a, f), getattr(b, f), env):
            return True
        return False

    def eta(self, lam, other, env, left):
        """Compare ``lam`` with the eta-expansion of ``other``."""
        used = set(env[0]) | set(env[1]) | all_names(other) | all_names(lam)
        y = fresh_name(lam.x, used)
        app = {Lam: App, LamT: AppT, LamTm: AppTm}[type(lam)]
        expanded = app(other, Var(y))
        if left:
            e = self.bind([lam.x], [y], env)
            yield from self.match(lam.body, expanded, e)
        else:
            e = self.bind([y], [lam.x], env)
            yield from self.match(expanded, lam.body, e)

    def _match_fields(self, a, b, env):
        shape = a._shape
        env = self.bind(binders(a), binders(b), env)
        if env is None:
            return
        yield from self._fields(a, b, list(shape), env)

    def _fields(self, a, b, shape, env):
        if not shape:
            yield env
            return
        (f, role, _), rest = shape[0], shape[1:]
        va, vb = getattr(a, f), getattr(b, f)
        if role in ("bind", "binds"):
            yield from self._fields(a, b, rest, env)
        elif role == "data":
            if va == vb:
                yield from self._fields(a, b, rest, env)
        elif role == "ref":
            e = self.names(va, vb, env)
            if e is not None:
                yield from self._fields(a, b, rest, e)
        elif role == "refs":
            if len(va) != len(vb):
                return
            e = env
            for x, y in zip(va, vb):
                e = self.names(x, y, e)
                if e is None:
                    return
            yield from self._fields(a, b, rest, e)
        elif role == "anno":
            if self.conv:
                yield from self._fields(a, b, rest, env)
            elif va is None or vb is None:
                if va is None and vb is None:
                    yield from self._fields(a, b, rest, env)
            else:
                for e in self.match(va, vb, env):
                    yield from self._fields(a, b, rest, e)
        elif role == "sub":
            for e in self.match(va, vb, env):
                yield from self._fields(a, b, rest, e)
        elif role == "chan":
            for e in self.match(va[1], vb[1], env):
                yield from self._fields(a, b, rest, e)
        elif role == "chans":
            if len(va) != len(vb):
                return
            yield from self._seq([x[1] for x in va], [y[1] for y in vb], env, a, b, rest)
        elif role == "branches":
            ma, mb = dict(va), dict(vb)
            if set(ma) != set(mb) or len(ma) != len(va) or len(mb) != len(vb):
                return
            labels = sorted(ma)
            yield from self._seq([ma[k] for k in labels], [mb[k] for k in labels], env, a, b, rest)

    def _seq(self, xs, ys, env, a, b, rest):
        if not xs:
            yield from self._fields(a, b, rest, env)
            return
        for e in self.match(xs[0], ys[0], env):
            yield from self._seq(xs[1:], ys[1:], e, a, b, rest)

    def match_groups(self, a, b, env):
        ra, ca = flatten_process(a)
        rb, cb = flatten_process(b)
        if len(ra) != len(rb) or len(ca) != len(cb):
            return
        L, R = dict(env[0]), dict(env[1])
        for x in ra:
            L[x] = None
        for y in rb:
            R[y] = None
        yield from self._perm(ca, cb, (L, R))

    def _perm(self, ca, cb, env):
        if not ca:
            yield env
            return
        first, rest = ca[0], ca[1:]
        for j, cand in enumerate(cb):
            for e in self.match(first, cand, env):
                yield from self._perm(rest, cb[:j] + cb[j + 1:], e)


def _stuck_elim(node) -> bool:
    return isinstance(node, (IfS, NatRecS, IfT, NatRecT, IfF))


def flatten_process(p: Process) -> tuple[list, list]:
    """Read nested compositions as (restricted names, components)."""
    restricted, comps = [], []
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, New):
            restricted.append(q.bind)
            stack.append(q.right)
            stack.append(q.left)
        elif isinstance(q, Nil):
            continue
        else:
            comps.append(q)
    used = set()
    for c in comps:
        used |= free_names(c)
    return [x for x in restricted if x in used], comps


def alpha_eq(a: Node, b: Node) -> bool:
    if sort_of(a) is not sort_of(b):
        return False
    return Matcher().run(a, b)


def struct_cong(p: Process, q: Process) -> bool:
    return Matcher(flatten=True).run(p, q)


def erase(node: Node) -> Node:
    """Drop optional annotations and type ascriptions everywhere."""
    if isinstance(node, Anno):
        return erase(node.term)
    new = {}
    for f, role, _ in node._shape:
        v = getattr(node, f)
        if role == "anno":
            new[f] = None
        elif role == "sub" and isinstance(v, Node):
            new[f] = erase(v)
        elif role in ("branches", "chans"):
            new[f] = tuple((k, erase(c)) for k, c in v)
        elif role == "chan":
            new[f] = (v[0], erase(v[1]))
    return dataclasses.replace(node, **new) if new else node


def alpha_eq_erased(a: Node, b: Node) -> bool:
    """Alpha-equivalence ignoring annotations."""
    return alpha_eq(erase(a), erase(b))


# ---------------------------------------------------------------- helpers


def numeral(n: int) -> Term:
    t: Term = Zero()
    for _ in range(n):
        t = Succ(t)
    return t


def as_numeral(t: Term) -> int | None:
    n = 0
    while isinstance(t, Succ):
        t, n = t.pred, n + 1
    return n if isinstance(t, Zero) else None


def exists_(dom: FunType, body: SessType, x: str = "_") -> Exists:
    return Exists(x, dom, body)


def forall_(dom: FunType, body: SessType, x: str = "_") -> Forall:
    return Forall(x, dom, body)


def monad(offered: SessType, chan: str = "c", shared=(), linear=()) -> Monad:
    return Monad(tuple(shared), tuple(linear), (chan, offered))

