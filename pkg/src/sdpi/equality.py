"""Definitional equality: normalization, weak-head reduction of types, and a
fuel-bounded process normalizer used to compare processes.

Every comparison answers ``Verdict.YES``, ``Verdict.NO`` or
``Verdict.UNDECIDED``.  The last one is returned when the step budget runs out
or when two stuck eliminators have to be compared and do not match
syntactically.
"""

from __future__ import annotations

import contextlib
import dataclasses
import enum
import os

from .core import (
    Anno,
    App,
    AppK,
    AppT,
    AppTm,
    AppTy,
    Bang,
    Case,
    Copy,
    Exists,
    FF,
    Forall,
    Fwd,
    IfF,
    IfP,
    IfS,
    IfT,
    In,
    Lam,
    LamK,
    LamT,
    LamTm,
    LamTy,
    Lolli,
    Matcher,
    MonadVal,
    NatRecS,
    NatRecT,
    New,
    Nil,
    Node,
    OutFresh,
    OutTerm,
    Plus,
    Process,
    Repl,
    Select,
    Spawn,
    Succ,
    TT,
    Tensor,
    Term,
    Var,
    With,
    Zero,
    all_names,
    fresh_name,
    free_names,
    subst,
)

DEFAULT_FUEL = 10_000


def default_fuel() -> int:
    raw = os.environ.get("SDPI_FUEL")
    if raw:
        try:
            return max(0, int(raw))
        except ValueError:
            pass
    return DEFAULT_FUEL


class Verdict(enum.Enum):
    YES = "yes"
    NO = "no"
    UNDECIDED = "undecided"

    def __str__(self):
        return self.value

    def __bool__(self):
        return self is Verdict.YES


class OutOfFuel(Exception):
    pass


class _Budget:
    def __init__(self, steps):
        self.left = steps
        self.used = 0


_budgets: list[_Budget] = []


@contextlib.contextmanager
def budget(steps=None):
    """Run the enclosed computation under a rewrite-step budget.

    Nested budgets share the outermost one unless ``steps`` is given.
    """
    if steps is None and _budgets:
        yield _budgets[-1]
        return
    b = _Budget(default_fuel() if steps is None else steps)
    _budgets.append(b)
    try:
        yield b
    finally:
        _budgets.pop()


def tick():
    if not _budgets:
        return
    b = _budgets[-1]
    if b.left <= 0:
        raise OutOfFuel()
    b.left -= 1
    b.used += 1


# ---------------------------------------------------------------- generic helpers


def map_children(node: Node, fn) -> Node:
    """Rebuild ``node`` with ``fn`` applied to every child node."""
    new = {}
    for f, role, _ in node._shape:
        v = getattr(node, f)
        if role in ("sub", "anno"):
            if v is not None:
                new[f] = fn(v)
        elif role in ("branches", "chans"):
            new[f] = tuple((k, fn(c)) for k, c in v)
        elif role == "chan":
            new[f] = (v[0], fn(v[1]))
    return dataclasses.replace(node, **new) if new else node


# ---------------------------------------------------------------- terms


def normalize_term(psi, m: Term, fuel=None) -> Term:
    with budget(fuel):
        return _nf(m)


def _nf(m):
    tick()
    if isinstance(m, (Var, TT, FF, Zero)):
        return m
    if isinstance(m, Anno):
        return _nf(m.term)
    if isinstance(m, Lam):
        return Lam(m.x, _nf_type(m.dom), _nf(m.body), pos=m.pos)
    if isinstance(m, App):
        f = _whnf_term(m.fn)
        if isinstance(f, Lam):
            return _nf(subst(f.body, {f.x: m.arg}))
        return App(_nf(f), _nf(m.arg), pos=m.pos)
    if isinstance(m, Succ):
        return Succ(_nf(m.pred), pos=m.pos)
    if isinstance(m, IfT):
        c = _whnf_term(m.cond)
        if isinstance(c, TT):
            return _nf(m.then)
        if isinstance(c, FF):
            return _nf(m.other)
        return IfT(_nf(c), _nf(m.then), _nf(m.other), pos=m.pos)
    if isinstance(m, NatRecT):
        t = _whnf_term(m.target)
        if isinstance(t, Zero):
            return _nf(m.zero)
        if isinstance(t, Succ):
            return _nf(_natrec_step(m, t.pred))
        return dataclasses.replace(
            m, motive=_nf_type(m.motive), target=_nf(t), zero=_nf(m.zero), succ=_nf(m.succ)
        )
    if isinstance(m, MonadVal):
        body = _pnorm(m.body)
        return _monad_eta(dataclasses.replace(m, body=body))
    raise TypeError(f"not a term: {m!r}")


def _natrec_step(m, pred):
    again = dataclasses.replace(m, target=pred)
    return subst(m.succ, {m.n: pred, m.r: again})


def _whnf_term(m):
    while True:
        tick()
        if isinstance(m, Anno):
            m = m.term
        elif isinstance(m, App):
            f = _whnf_term(m.fn)
            if not isinstance(f, Lam):
                return App(f, m.arg, pos=m.pos)
            m = subst(f.body, {f.x: m.arg})
        elif isinstance(m, IfT):
            c = _whnf_term(m.cond)
            if isinstance(c, TT):
                m = m.then
            elif isinstance(c, FF):
                m = m.other
            else:
                return dataclasses.replace(m, cond=c)
        elif isinstance(m, NatRecT):
            t = _whnf_term(m.target)
            if isinstance(t, Zero):
                m = m.zero
            elif isinstance(t, Succ):
                m = _natrec_step(m, t.pred)
            else:
                return dataclasses.replace(m, target=t)
        else:
            return m


def whnf_term(m: Term, fuel=None) -> Term:
    with budget(fuel):
        return _whnf_term(m)


def _monad_eta(v: MonadVal) -> Term:
    """{c <- y <- M <- us; ds; fwd y c <- us; ds}  ==>  M"""
    b = v.body
    if (
        isinstance(b, Spawn)
        and isinstance(b.cont, Fwd)
        and b.cont.src == b.bind
        and b.cont.dst == v.offered
        and tuple(b.shared) == tuple(v.shared)
        and tuple(b.linear) == tuple(v.linear)
        and not (free_names(b.monadic) & {v.offered, *v.shared, *v.linear})
    ):
        return b.monadic
    return v


# ---------------------------------------------------------------- types and kinds


def whnf(t: Node, fuel=None) -> Node:
    """Weak-head normal form of a functional or session type."""
    with budget(fuel):
        return _whnf_type(t)


def _whnf_type(t):
    while True:
        tick()
        if isinstance(t, (AppT, AppTm)):
            f = _whnf_type(t.fn)
            if isinstance(f, (LamT, LamTm)):
                t = subst(f.body, {f.x: t.arg})
                continue
            return dataclasses.replace(t, fn=f)
        if isinstance(t, (AppK, AppTy)):
            f = _whnf_type(t.fn)
            if isinstance(f, (LamK, LamTy)):
                t = subst(f.body, {f.t: t.arg})
                continue
            return dataclasses.replace(t, fn=f)
        if isinstance(t, (IfS, IfF)):
            c = _whnf_term(t.cond)
            if isinstance(c, TT):
                t = t.then
                continue
            if isinstance(c, FF):
                t = t.other
                continue
            return dataclasses.replace(t, cond=c)
        if isinstance(t, NatRecS):
            n = _whnf_term(t.target)
            if isinstance(n, Zero):
                t = t.zero
                continue
            if isinstance(n, Succ):
                again = dataclasses.replace(t, target=n.pred)
                t = subst(t.succ, {t.n: n.pred, t.r: again})
                continue
            return dataclasses.replace(t, target=n)
        return t


def normalize_type(t: Node, fuel=None) -> Node:
    with budget(fuel):
        return _nf_type(t)


def _nf_any(x):
    if isinstance(x, Term):
        return _nf(x)
    if isinstance(x, Process):
        return _pnorm(x)
    return _nf_type(x)


def _nf_type(t):
    t = _whnf_type(t)
    return map_children(t, _nf_any)


def normalize_kind(k, fuel=None):
    with budget(fuel):
        return map_children(k, _nf_any)


def _compare(a, b) -> Verdict:
    if a == b:
        return Verdict.YES
    m = Matcher(flatten=True, conv=True)
    if m.run(a, b):
        return Verdict.YES
    return Verdict.UNDECIDED if m.undecided else Verdict.NO


def _decide(fn, fuel):
    try:
        with budget(fuel):
            return fn()
    except OutOfFuel:
        return Verdict.UNDECIDED


def term_eq(psi, m: Term, n: Term, at=None, fuel=None) -> Verdict:
    return _decide(lambda: _compare(_nf(m), _nf(n)), fuel)


def type_eq(psi, a: Node, b: Node, at_kind=None, fuel=None) -> Verdict:
    if a == b:
        return Verdict.YES
    return _decide(lambda: _compare(_nf_type(a), _nf_type(b)), fuel)


def kind_eq(psi, k1, k2, fuel=None) -> Verdict:
    return _decide(lambda: _compare(map_children(k1, _nf_any), map_children(k2, _nf_any)), fuel)


def proc_eq(ctx, p: Process, q: Process, offered=None, fuel=None) -> Verdict:
    return _decide(lambda: _compare(_pnorm(p), _pnorm(q)), fuel)


# ---------------------------------------------------------------- processes


def normalize_proc(p: Process, fuel=None) -> Process:
    with budget(fuel):
        return _pnorm(p)


def _pnorm(p: Process) -> Process:
    tick()
    if isinstance(p, (Nil, Fwd)):
        return p
    if isinstance(p, New):
        return _cut(p.bind, _pnorm(p.left), _pnorm(p.right), p.anno)
    if isinstance(p, IfP):
        c = _whnf_term(p.cond)
        if isinstance(c, TT):
            return _pnorm(p.then)
        if isinstance(c, FF):
            return _pnorm(p.other)
        return _eta(IfP(_nf(c), _pnorm(p.then), _pnorm(p.other), pos=p.pos))
    if isinstance(p, Spawn):
        m = _nf(p.monadic)
        if isinstance(m, MonadVal) and len(m.shared) == len(p.shared) and len(m.linear) == len(p.linear):
            return _pnorm(_fire_spawn(p, m))
        return dataclasses.replace(p, monadic=m, cont=_pnorm(p.cont))
    return _eta(map_children(p, _nf_any))


def _fire_spawn(p: Spawn, m: MonadVal) -> Process:
    ren = {m.offered: p.bind}
    ren.update(zip(m.shared, p.shared))
    ren.update(zip(m.linear, p.linear))
    body = subst(m.body, ren)
    return New(p.bind, body, p.cont, p.anno.offered[1] if p.anno is not None else None)


def _fresh_for(x, *nodes):
    used = set()
    for n in nodes:
        used |= all_names(n)
    return fresh_name(x, used)


def _cut(x, left, right, anno=None):
    """Normalize the composition of ``left`` (offering x) with ``right``."""
    tick()
    if x not in free_names(right):
        if isinstance(left, (Nil, Repl)) or (isinstance(left, Fwd) and left.dst == x):
            return right
    # forwarding
    if isinstance(left, Fwd) and left.dst == x and left.src != x:
        return subst(right, {x: left.src})
    if isinstance(right, Fwd) and right.src == x and right.dst != x:
        return subst(left, {x: right.dst})
    lh, rh = _head(left), _head(right)
    # interactions on x
    if lh == x and rh == x:
        out = _interact(x, left, right, anno)
        if out is not None:
            return out
    if isinstance(left, Repl) and left.on == x:
        return _push_server(x, left, right, anno)
    if lh is not None and lh != x:
        return _hoist(left, lambda q: _cut(x, q, right, anno), x, right)
    if rh is not None and rh != x:
        return _hoist(right, lambda q: _cut(x, left, q, anno), x, left, side="right")
    for side, p in (("left", left), ("right", right)):
        if _guarded(p, x):
            other = right if side == "left" else left
            if side == "left":
                return _hoist(p, lambda q: _cut(x, q, right, anno), x, other)
            return _hoist(p, lambda q: _cut(x, left, q, anno), x, other)
    if isinstance(left, New):
        y = left.bind
        if y in free_names(right):
            z = _fresh_for(y, left, right)
            left = New(z, subst(left.left, {y: z}), subst(left.right, {y: z}), left.anno)
        return _cut(left.bind, left.left, _cut(x, left.right, right, anno), left.anno)
    if isinstance(right, New):
        return _cut_into_new(x, left, right, anno)
    return New(x, left, right, anno)


def _guarded(p, x):
    """A stuck spawn or boolean case that does not involve ``x``."""
    if isinstance(p, Spawn):
        return x not in p.shared and x not in p.linear and x not in free_names(p.monadic)
    if isinstance(p, IfP):
        return True
    return False


def _head(p):
    """The channel on which ``p`` acts first, if it is a prefix."""
    if isinstance(p, (In, OutTerm, OutFresh, Select, Case, Copy)):
        return p.on
    return None


def _interact(x, left, right, anno):
    # value communication in either direction
    if isinstance(left, OutTerm) and isinstance(right, In):
        return _cut(x, left.body, _pnorm(subst(right.body, {right.bind: left.payload})), _after(anno, left.payload))
    if isinstance(left, In) and isinstance(right, OutTerm):
        return _cut(x, _pnorm(subst(left.body, {left.bind: right.payload})), right.body, _after(anno, right.payload))
    # fresh-channel communication
    if isinstance(left, OutFresh) and isinstance(right, In):
        y = _fresh_for(left.bind, left, right)
        l1 = subst(left.left, {left.bind: y})
        l2 = subst(left.right, {left.bind: y})
        r = subst(right.body, {right.bind: y})
        a, b = _halves(anno, Tensor)
        return _cut(y, l1, _cut(x, l2, r, b), a)
    if isinstance(left, In) and isinstance(right, OutFresh):
        y = _fresh_for(right.bind, left, right)
        l = subst(left.body, {left.bind: y})
        r1 = subst(right.left, {right.bind: y})
        r2 = subst(right.right, {right.bind: y})
        a, b = _halves(anno, Lolli)
        return _cut(y, r1, _cut(x, l, r2, b), a)
    # choice
    if isinstance(left, Case) and isinstance(right, Select):
        arms = dict(left.branches)
        if right.label in arms:
            return _cut(x, arms[right.label], right.body, _branch(anno, right.label))
    if isinstance(left, Select) and isinstance(right, Case):
        arms = dict(right.branches)
        if left.label in arms:
            return _cut(x, left.body, arms[left.label], _branch(anno, left.label))
    return None


def _after(anno, payload):
    if anno is None:
        return None
    a = _whnf_type(anno)
    if isinstance(a, (Exists, Forall)):
        return subst(a.body, {a.x: payload})
    return None


def _halves(anno, cls):
    if anno is None:
        return None, None
    a = _whnf_type(anno)
    if isinstance(a, cls):
        return a.left, a.right
    return None, None


def _branch(anno, label):
    if anno is None:
        return None
    a = _whnf_type(anno)
    if isinstance(a, (With, Plus)):
        return dict(a.branches).get(label)
    return None


def _push_server(x, server: Repl, right, anno):
    """Composition with a replicated server on x: serve requests, then push
    the server towards its clients."""
    if x not in free_names(right):
        return right
    right = _avoid_capture(right, free_names(server) | {x})
    inner = _whnf_type(anno).body if anno is not None and isinstance(_whnf_type(anno), Bang) else None
    if isinstance(right, Copy) and right.on == x:
        y = _fresh_for(right.bind, server, right)
        body = subst(server.body, {server.bind: y})
        rest = subst(right.body, {right.bind: y})
        return _cut(y, _pnorm(body), _push_server(x, server, rest, anno), inner)
    if isinstance(right, (New, OutFresh)):
        parts = {}
        for f in ("left", "right"):
            sub = getattr(right, f)
            parts[f] = _push_server(x, server, sub, anno) if x in free_names(sub) else sub
        rebuilt = dataclasses.replace(right, **parts)
        if isinstance(right, New):
            return _cut(right.bind, parts["left"], parts["right"], right.anno)
        return rebuilt
    if isinstance(right, Spawn) and x not in right.shared:
        return dataclasses.replace(right, cont=_push_server(x, server, right.cont, anno))
    if isinstance(right, (In, OutTerm, Select, Copy, Repl)):
        return dataclasses.replace(right, body=_push_server(x, server, right.body, anno))
    if isinstance(right, Case):
        arms = tuple((lab, _push_server(x, server, q, anno)) for lab, q in right.branches)
        return dataclasses.replace(right, branches=arms)
    if isinstance(right, IfP):
        return dataclasses.replace(
            right,
            then=_push_server(x, server, right.then, anno),
            other=_push_server(x, server, right.other, anno),
        )
    return New(x, server, right, anno)


def _avoid_capture(p, names):
    """Rename the binders introduced by the head of ``p`` away from ``names``."""
    if isinstance(p, (In, Copy, Repl)) and p.bind in names:
        y = fresh_name(p.bind, names | all_names(p))
        return dataclasses.replace(p, bind=y, body=subst(p.body, {p.bind: y}))
    if isinstance(p, OutFresh) and p.bind in names:
        y = fresh_name(p.bind, names | all_names(p))
        return dataclasses.replace(p, bind=y, left=subst(p.left, {p.bind: y}), right=subst(p.right, {p.bind: y}))
    if isinstance(p, (New, Spawn)) and p.bind in names:
        y = fresh_name(p.bind, names | all_names(p))
        if isinstance(p, New):
            return dataclasses.replace(p, bind=y, left=subst(p.left, {p.bind: y}), right=subst(p.right, {p.bind: y}))
        return dataclasses.replace(p, bind=y, cont=subst(p.cont, {p.bind: y}))
    return p


def _hoist(p, rebuild, x, other, side="left"):
    """Move the head prefix of ``p`` out of a composition on ``x``."""
    avoid = all_names(other) | {x}
    if isinstance(p, (In, Copy)):
        if p.bind in avoid:
            y = fresh_name(p.bind, avoid | all_names(p))
            p = dataclasses.replace(p, bind=y, body=subst(p.body, {p.bind: y}))
        return dataclasses.replace(p, body=rebuild(p.body))
    if isinstance(p, Spawn):
        if p.bind in avoid:
            y = fresh_name(p.bind, avoid | all_names(p))
            p = dataclasses.replace(p, bind=y, cont=subst(p.cont, {p.bind: y}))
        return dataclasses.replace(p, cont=rebuild(p.cont))
    if isinstance(p, IfP):
        return dataclasses.replace(p, then=rebuild(p.then), other=rebuild(p.other))
    if isinstance(p, (OutTerm, Select)):
        return dataclasses.replace(p, body=rebuild(p.body))
    if isinstance(p, Case):
        return dataclasses.replace(p, branches=tuple((lab, rebuild(q)) for lab, q in p.branches))
    if isinstance(p, OutFresh):
        if p.bind in avoid:
            y = fresh_name(p.bind, avoid | all_names(p))
            p = OutFresh(p.on, y, subst(p.left, {p.bind: y}), subst(p.right, {p.bind: y}), pos=p.pos)
        if x in free_names(p.left) and x not in free_names(p.right):
            return dataclasses.replace(p, left=rebuild(p.left))
        return dataclasses.replace(p, right=rebuild(p.right))
    raise AssertionError("not a prefix")


def _cut_into_new(x, left, right: New, anno):
    fl, fr = free_names(right.left), free_names(right.right)
    y = right.bind
    if y in free_names(left):
        z = _fresh_for(y, left, right)
        right = New(z, subst(right.left, {y: z}), subst(right.right, {y: z}), right.anno)
        y = z
    if x in fl and x not in fr:
        return _cut(y, _cut(x, left, right.left, anno), right.right, right.anno)
    if x in fr and x not in fl:
        return _cut(y, right.left, _cut(x, left, right.right, anno), right.anno)
    return New(x, left, right, anno)


def _eta(p: Process) -> Process:
    """Contract forwarder expansions to the forwarder itself."""
    if isinstance(p, In):
        x, b = p.bind, p.body
        # a stuck spawn between the prefixes is a cut the input commutes with:
        # recv c (x). (y <- m; Q) = y <- m; recv c (x). Q
        if isinstance(b, Spawn) and b.bind not in (x, p.on):
            outer = {x, p.on}
            if not outer & (set(b.shared) | set(b.linear) | free_names(b.monadic)):
                inner = _eta(dataclasses.replace(p, body=b.cont))
                if isinstance(inner, Fwd):
                    return dataclasses.replace(b, cont=inner)
        # forall: recv c (x). send d <x>. fwd d c
        if isinstance(b, OutTerm) and isinstance(b.payload, Var) and b.payload.name == x:
            f = b.body
            if isinstance(f, Fwd) and x not in free_names(f):
                if f.dst == p.on and f.src == b.on and f.src != f.dst:
                    return f
                # exists: recv d (x). send c <x>. fwd d c
                if f.src == p.on and f.dst == b.on and f.src != f.dst:
                    return f
        # lolli / tensor: recv c (x). out d (y). (fwd x y || fwd d c)
        if isinstance(b, OutFresh) and b.left == Fwd(x, b.bind) and isinstance(b.right, Fwd):
            f = b.right
            if x not in free_names(f) and b.bind not in free_names(f) and f.src != f.dst:
                if (f.dst, f.src) == (p.on, b.on) or (f.src, f.dst) == (p.on, b.on):
                    return f
    if isinstance(p, Case) and p.branches:
        fwds = set()
        for lab, q in p.branches:
            if not (isinstance(q, Select) and q.label == lab and isinstance(q.body, Fwd)):
                return p
            f = q.body
            if {f.src, f.dst} != {p.on, q.on} or p.on == q.on:
                return p
            fwds.add((f.src, f.dst, q.on))
        if len(fwds) == 1:
            src, dst, _ = fwds.pop()
            return Fwd(src, dst)
    if isinstance(p, Repl):
        b = p.body
        if isinstance(b, Copy) and b.body == Fwd(b.bind, p.bind) and b.on != p.on:
            return Fwd(b.on, p.on)
    return p
