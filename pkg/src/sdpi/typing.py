"""Bidirectional type checking for terms and processes.

Linear channels are threaded through process checking: each rule receives the
available linear context and returns the part it did not use (its leftover).
A channel touched by a rule must be used up by the time its scope closes,
except that channels of type ``1`` are discharged silently.  Channels of type
``!A`` move to the shared context as soon as they are bound.

The checker also elaborates: cut, input and spawn annotations that were left
out in the source are filled in on the returned process.
"""

from __future__ import annotations

import dataclasses

from . import equality as eq
from .core import (
    BOOL,
    NAT,
    Anno,
    App,
    AppT,
    Bang,
    Case,
    Copy,
    Exists,
    FF,
    Forall,
    FunType,
    Fwd,
    IfP,
    IfT,
    In,
    Kind,
    Lam,
    Lolli,
    Monad,
    MonadVal,
    NatRecT,
    New,
    Nil,
    One,
    OutFresh,
    OutTerm,
    Pi,
    PiTerm,
    Plus,
    Repl,
    Select,
    SessType,
    Spawn,
    Succ,
    TT,
    Tensor,
    Term,
    Type,
    Var,
    With,
    Zero,
    free_names,
    freshen,
    subst,
)
from .surface import ProcDef, SourceFile, TermDef, TypeDef
from .wf import (
    CheckError,
    Psi,
    as_psi,
    check_kind,
    check_stype,
    check_type,
    infer_kind,
    infer_kind_fun,
    under,
)


@dataclasses.dataclass(frozen=True)
class LinearLedger:
    input: dict
    consumed: frozenset = frozenset()
    output: dict = dataclasses.field(default_factory=dict)

    @classmethod
    def of(cls, delta) -> LinearLedger:
        return cls(dict(delta), frozenset(), dict(delta))


def _pos(node):
    return getattr(node, "pos", None)


def _located(node):
    """Attach the position of ``node`` to errors raised without one."""

    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, et, ev, tb):
            if isinstance(ev, CheckError) and ev.pos is None:
                ev.pos = _pos(node)
            return False

    return _Ctx()


def _conv(verdict, rule, message, pos=None):
    if verdict is eq.Verdict.YES:
        return
    if verdict is eq.Verdict.UNDECIDED:
        raise CheckError("conv-undecided", message, pos)
    raise CheckError(rule, message, pos)


def _type_eq(psi, a, b, rule, what, pos=None):
    _conv(eq.type_eq(psi, a, b), rule, f"{what}: {a} is not equal to {b}", pos)


def _whnf(t):
    try:
        return eq.whnf(t)
    except eq.OutOfFuel:
        raise CheckError("conv-undecided", f"ran out of fuel normalizing {t}") from None


# ---------------------------------------------------------------- terms


def infer_term(psi, m: Term) -> FunType:
    return _infer(as_psi(psi), m)[0]


def check_term(psi, m: Term, expected: FunType) -> None:
    _check(as_psi(psi), m, expected)


def elaborate_term(psi, m: Term, expected: FunType | None = None) -> Term:
    psi = as_psi(psi)
    if expected is None:
        return _infer(psi, m)[1]
    return _check(psi, m, expected)


def _infer(psi: Psi, m: Term):
    with _located(m):
        if isinstance(m, Var):
            t = psi.lookup(m.name)
            if t is None:
                raise CheckError("var", f"unbound variable {m.name}", m.pos)
            if isinstance(t, Kind):
                raise CheckError("var", f"{m.name} is a type, not a term", m.pos)
            return t, m
        if isinstance(m, TT) or isinstance(m, FF):
            return BOOL, m
        if isinstance(m, Zero):
            return NAT, m
        if isinstance(m, Succ):
            return NAT, dataclasses.replace(m, pred=_check(psi, m.pred, NAT))
        if isinstance(m, Lam):
            check_type(psi, m.dom)
            psi2, x, body = under(psi, m.x, m.dom, m.body)
            t, body2 = _infer(psi2, body)
            return Pi(x, m.dom, t), Lam(x, m.dom, body2, pos=m.pos)
        if isinstance(m, App):
            ft, fn2 = _infer(psi, m.fn)
            fw = _whnf(ft)
            if not isinstance(fw, Pi):
                raise CheckError("pi-E", f"{m.fn} has type {ft}, which is not a function type", m.pos)
            arg2 = _check(psi, m.arg, fw.dom)
            return subst(fw.cod, {fw.x: m.arg}), App(fn2, arg2, pos=m.pos)
        if isinstance(m, Anno):
            check_type(psi, m.type)
            return m.type, Anno(_check(psi, m.term, m.type), m.type, pos=m.pos)
        if isinstance(m, IfT):
            c = _check(psi, m.cond, BOOL)
            t, a = _infer(psi, m.then)
            b = _check(psi, m.other, t)
            return t, IfT(c, a, b, pos=m.pos)
        if isinstance(m, NatRecT):
            return _natrec(psi, m, None)
        if isinstance(m, MonadVal):
            raise CheckError("monad-I", "a monadic value needs a known type; add an annotation", m.pos)
    raise CheckError("term", f"not a term: {m!r}", _pos(m))


def _check(psi: Psi, m: Term, expected: FunType) -> Term:
    with _located(m):
        if isinstance(m, Lam):
            t = _whnf(expected)
            if not isinstance(t, Pi):
                raise CheckError("pi-I", f"a function was found where {expected} was expected", m.pos)
            check_type(psi, m.dom)
            _type_eq(psi, m.dom, t.dom, "pi-I", "domain mismatch", m.pos)
            psi2, x, body = under(psi, m.x, m.dom, m.body)
            cod = subst(t.cod, {t.x: Var(x)})
            return Lam(x, m.dom, _check(psi2, body, cod), pos=m.pos)
        if isinstance(m, MonadVal):
            return _check_monad(psi, m, expected)
        if isinstance(m, IfT):
            c = _check(psi, m.cond, BOOL)
            return IfT(c, _check(psi, m.then, expected), _check(psi, m.other, expected), pos=m.pos)
        if isinstance(m, NatRecT):
            t, m2 = _natrec(psi, m, None)
        else:
            t, m2 = _infer(psi, m)
        _type_eq(psi, t, expected, "conv", f"{m} has the wrong type", m.pos)
        return m2


def _natrec(psi, m: NatRecT, _expected):
    target = _check(psi, m.target, NAT)
    k = infer_kind_fun(psi, m.motive)
    if isinstance(k, Type):
        zero_t = succ_t = rec_t = result = m.motive
        dependent = False
    elif isinstance(k, PiTerm) and isinstance(k.body, Type):
        _type_eq(psi, k.dom, NAT, "natrec", "the motive must be indexed by Nat", m.pos)
        dependent = True
    else:
        raise CheckError("natrec", f"the motive {m.motive} has kind {k}", m.pos)
    psi_n, n, succ = under(psi, m.n, NAT, m.succ)
    if dependent:
        zero_t = AppT(m.motive, Zero())
        rec_t = AppT(m.motive, Var(n))
        succ_t = AppT(m.motive, Succ(Var(n)))
        result = AppT(m.motive, m.target)
    zero = _check(psi, m.zero, zero_t)
    psi_r, r, succ = under(psi_n, m.r, rec_t, succ)
    succ2 = _check(psi_r, succ, succ_t)
    return result, NatRecT(m.motive, target, zero, n, r, succ2, pos=m.pos)


def _check_monad(psi, m: MonadVal, expected):
    t = _whnf(expected)
    if not isinstance(t, Monad):
        raise CheckError("monad-I", f"a monadic value was found where {expected} was expected", m.pos)
    if len(t.shared) != len(m.shared) or len(t.linear) != len(m.linear):
        raise CheckError(
            "monad-I",
            f"the value uses {len(m.shared)} shared and {len(m.linear)} linear channels; "
            f"the type has {len(t.shared)} and {len(t.linear)}",
            m.pos,
        )
    gamma = {u: b for u, (_, b) in zip(m.shared, t.shared)}
    delta = {d: a for d, (_, a) in zip(m.linear, t.linear)}
    body = _run_proc(psi, gamma, delta, m.body, m.offered, t.offered[1], require_empty=True)[2]
    return dataclasses.replace(m, body=body)


# ---------------------------------------------------------------- processes


def check_proc(psi, gamma, ledger, p, offered, a) -> LinearLedger:
    """Check ``p`` offering ``offered : a``; return the linear ledger.

    ``ledger`` is a :class:`LinearLedger` or a plain mapping of linear
    channels; ``a`` may be ``None`` to synthesize the offered type.
    """
    delta = ledger.output if isinstance(ledger, LinearLedger) else dict(ledger or {})
    left, _, _ = _run_proc(as_psi(psi), dict(gamma or {}), delta, p, offered, a)
    return LinearLedger(dict(delta), frozenset(set(delta) - set(left)), left)


def elaborate_proc(psi, gamma, delta, p, offered, a=None, require_empty=True):
    """Check ``p`` and return (offered type, elaborated process)."""
    _, t, q = _run_proc(as_psi(psi), dict(gamma or {}), dict(delta or {}), p, offered, a, require_empty)
    return t, q


def _run_proc(psi, gamma, delta, p, offered, a, require_empty=False):
    if a is not None:
        check_stype(psi, a)
    g, d = {}, {}
    for u, b in gamma.items():
        check_stype(psi, b)
        g[u] = b
    for name, b in delta.items():
        check_stype(psi, b)
        w = _whnf(b)
        if isinstance(w, Bang):
            g[name] = w.body
        else:
            d[name] = b
    avoid = psi.names() | set(g) | set(d) | {offered}
    for t in (*g.values(), *d.values(), *([a] if a is not None else [])):
        avoid |= free_names(t)
    p = freshen(p, avoid)
    left, t, q = ProcChecker(psi).proc(g, d, p, offered, a)
    if require_empty:
        _settle(left, list(left), p, "linearity")
        left = {}
    return left, t, q


def _discardable(t) -> bool:
    """Channels of type 1 close silently; channels of type !A may be promoted
    to the shared context and then dropped."""
    return isinstance(_whnf(t), (One, Bang))


def _settle(left: dict, names, node, rule):
    """Names bound or touched by a rule may only survive if discardable."""
    for n in names:
        if n in left:
            if _discardable(left[n]):
                del left[n]
            else:
                raise CheckError(rule, f"linear channel {n} : {left[n]} is not used up", _pos(node))


def _merge(leftovers, original, node):
    """Leftovers of alternative branches must agree up to discardable channels.

    Branch types may have been refined (by a boolean case), so a channel that
    is discardable in every branch is dropped even if its unrefined type is not.
    """
    keys = [set(lo) for lo in leftovers]
    common = set.intersection(*keys)
    for k, lo in zip(keys, leftovers):
        for n in k - common:
            if not _discardable(lo[n]):
                raise CheckError(
                    "branch", f"branches disagree on the use of linear channel {n}", _pos(node)
                )
    return {n: original[n] for n in common if not all(_discardable(lo[n]) for lo in leftovers)}


class ProcChecker:
    def __init__(self, psi: Psi):
        self.psi = psi

    def proc(self, gamma, delta, p, c, a):
        with _located(p):
            return self._proc(gamma, delta, p, c, a)

    def _with_psi(self, psi):
        return ProcChecker(psi)

    def _bind(self, gamma, delta, x, t):
        """Bind a fresh linear channel; !-typed channels become shared."""
        w = _whnf(t)
        if isinstance(w, Bang):
            return {**gamma, x: w.body}, dict(delta), True
        return dict(gamma), {**delta, x: t}, False

    def _unknown(self, p, on, rule):
        raise CheckError(rule, f"channel {on} is not available here", p.pos)

    def _proc(self, gamma, delta, p, c, a):
        psi = self.psi
        w = _whnf(a) if a is not None else None

        if isinstance(p, Nil):
            if w is not None and not isinstance(w, One):
                raise CheckError("1R", f"end offers {c} : 1, but {a} was expected", p.pos)
            return dict(delta), a if a is not None else One(), p

        if isinstance(p, Fwd):
            if p.dst != c:
                raise CheckError("id", f"the forwarder must offer {c}, not {p.dst}", p.pos)
            if p.src in delta:
                t = delta[p.src]
                if a is not None:
                    _type_eq(psi, t, a, "id", f"forwarding {p.src} to {c}", p.pos)
                left = dict(delta)
                del left[p.src]
                return left, a if a is not None else t, p
            if p.src in gamma:
                t = Bang(gamma[p.src])
                if a is not None:
                    _type_eq(psi, t, a, "id", f"forwarding shared {p.src} to {c}", p.pos)
                return dict(delta), a if a is not None else t, p
            self._unknown(p, p.src, "id")

        if isinstance(p, In):
            if p.on == c:
                return self._in_right(gamma, delta, p, c, a, w)
            if p.on in delta:
                return self._in_left(gamma, delta, p, c, a)
            self._unknown(p, p.on, "input")

        if isinstance(p, OutTerm):
            if p.on == c:
                if a is None:
                    if p.anno is None:
                        raise CheckError("exists-R", "cannot infer the session type; annotate the output", p.pos)
                    check_stype(psi, p.anno)
                    a, w = p.anno, _whnf(p.anno)
                if not isinstance(w, Exists):
                    raise CheckError("exists-R", f"{c} : {a} does not output a term", p.pos)
                if p.anno is not None:
                    _type_eq(psi, p.anno, a, "exists-R", "output annotation", p.pos)
                m = _check(psi, p.payload, w.dom)
                left, _, body = self.proc(gamma, delta, p.body, c, subst(w.body, {w.x: p.payload}))
                return left, a, OutTerm(p.on, m, a, body, pos=p.pos)
            if p.on in delta:
                t = delta[p.on]
                tw = _whnf(t)
                if not isinstance(tw, Forall):
                    raise CheckError("forall-L", f"{p.on} : {t} does not input a term", p.pos)
                if p.anno is not None:
                    _type_eq(psi, p.anno, t, "forall-L", "output annotation", p.pos)
                m = _check(psi, p.payload, tw.dom)
                d2 = {**delta, p.on: subst(tw.body, {tw.x: p.payload})}
                left, t2, body = self.proc(gamma, d2, p.body, c, a)
                _settle(left, [p.on], p, "forall-L")
                return left, t2, OutTerm(p.on, m, t, body, pos=p.pos)
            self._unknown(p, p.on, "output")

        if isinstance(p, OutFresh):
            if p.on == c:
                if w is not None and not isinstance(w, Tensor):
                    raise CheckError("tensor-R", f"{c} : {a} does not output a channel", p.pos)
                l1, t1, q1 = self.proc(gamma, delta, p.left, p.bind, w.left if w is not None else None)
                l2, t2, q2 = self.proc(gamma, l1, p.right, c, w.right if w is not None else None)
                return l2, a if a is not None else Tensor(t1, t2), OutFresh(p.on, p.bind, q1, q2, pos=p.pos)
            if p.on in delta:
                t = delta[p.on]
                tw = _whnf(t)
                if not isinstance(tw, Lolli):
                    raise CheckError("lolli-L", f"{p.on} : {t} does not input a channel", p.pos)
                d0 = {k: v for k, v in delta.items() if k != p.on}
                l1, _, q1 = self.proc(gamma, d0, p.left, p.bind, tw.left)
                l2, t2, q2 = self.proc(gamma, {**l1, p.on: tw.right}, p.right, c, a)
                _settle(l2, [p.on], p, "lolli-L")
                return l2, t2, OutFresh(p.on, p.bind, q1, q2, pos=p.pos)
            self._unknown(p, p.on, "output")

        if isinstance(p, Repl):
            if p.on != c:
                raise CheckError("bang-R", f"a server must offer {c}", p.pos)
            if w is not None and not isinstance(w, Bang):
                raise CheckError("bang-R", f"{c} : {a} is not a replicated session", p.pos)
            l, t, body = self.proc(gamma, {}, p.body, p.bind, w.body if w is not None else None)
            _settle(l, list(l), p, "bang-R")
            return dict(delta), a if a is not None else Bang(t), Repl(p.on, p.bind, body, pos=p.pos)

        if isinstance(p, Copy):
            if p.on in delta and isinstance(_whnf(delta[p.on]), Bang):
                # A linear channel whose session has reached !B becomes shared.
                gamma = {**gamma, p.on: _whnf(delta[p.on]).body}
                delta = {k: v for k, v in delta.items() if k != p.on}
            if p.on not in gamma:
                self._unknown(p, p.on, "copy")
            g2, d2, _ = self._bind(gamma, delta, p.bind, gamma[p.on])
            left, t, body = self.proc(g2, d2, p.body, c, a)
            _settle(left, [p.bind], p, "copy")
            return left, t, Copy(p.on, p.bind, body, pos=p.pos)

        if isinstance(p, Case):
            return self._case(gamma, delta, p, c, a, w)

        if isinstance(p, Select):
            if p.on == c:
                if w is None:
                    raise CheckError("plus-R", "cannot infer the session type of a selection; annotate the cut", p.pos)
                if not isinstance(w, Plus):
                    raise CheckError("plus-R", f"{c} : {a} offers no internal choice", p.pos)
                arms = dict(w.branches)
                if p.label not in arms:
                    raise CheckError("plus-R", f"label {p.label} is not among {sorted(arms)}", p.pos)
                left, _, body = self.proc(gamma, delta, p.body, c, arms[p.label])
                return left, a, Select(p.on, p.label, body, pos=p.pos)
            if p.on in delta:
                t = delta[p.on]
                tw = _whnf(t)
                if not isinstance(tw, With):
                    raise CheckError("with-L", f"{p.on} : {t} offers no external choice", p.pos)
                arms = dict(tw.branches)
                if p.label not in arms:
                    raise CheckError("with-L", f"label {p.label} is not among {sorted(arms)}", p.pos)
                left, t2, body = self.proc(gamma, {**delta, p.on: arms[p.label]}, p.body, c, a)
                _settle(left, [p.on], p, "with-L")
                return left, t2, Select(p.on, p.label, body, pos=p.pos)
            self._unknown(p, p.on, "select")

        if isinstance(p, New):
            return self._cut(gamma, delta, p, c, a)

        if isinstance(p, Spawn):
            return self._spawn(gamma, delta, p, c, a)

        if isinstance(p, IfP):
            return self._if(gamma, delta, p, c, a)

        raise CheckError("process", f"not a process: {p!r}", _pos(p))

    # -- rules with more bookkeeping

    def _in_right(self, gamma, delta, p, c, a, w):
        psi = self.psi
        if w is None:
            if p.anno is None:
                raise CheckError("forall-R", "cannot infer the session type of an input; annotate the binder", p.pos)
            if isinstance(p.anno, FunType):
                check_type(psi, p.anno)
                psi2, x, body = under(psi, p.bind, p.anno, p.body)
                left, t, q = self._with_psi(psi2).proc(gamma, delta, body, c, None)
                return left, Forall(x, p.anno, t), In(p.on, x, q, p.anno, pos=p.pos)
            check_stype(psi, p.anno)
            g2, d2, _ = self._bind(gamma, delta, p.bind, p.anno)
            left, t, q = self.proc(g2, d2, p.body, c, None)
            _settle(left, [p.bind], p, "lolli-R")
            return left, Lolli(p.anno, t), In(p.on, p.bind, q, p.anno, pos=p.pos)
        if isinstance(w, Forall):
            if p.anno is not None:
                if not isinstance(p.anno, FunType):
                    raise CheckError("forall-R", f"{c} : {a} inputs a term, not a channel", p.pos)
                _type_eq(psi, p.anno, w.dom, "forall-R", "binder annotation", p.pos)
            psi2, x, body = under(psi, p.bind, w.dom, p.body)
            left, _, q = self._with_psi(psi2).proc(gamma, delta, body, c, subst(w.body, {w.x: Var(x)}))
            return left, a, In(p.on, x, q, w.dom, pos=p.pos)
        if isinstance(w, Lolli):
            if p.anno is not None:
                if not isinstance(p.anno, SessType):
                    raise CheckError("lolli-R", f"{c} : {a} inputs a channel, not a term", p.pos)
                _type_eq(psi, p.anno, w.left, "lolli-R", "binder annotation", p.pos)
            g2, d2, _ = self._bind(gamma, delta, p.bind, w.left)
            left, _, q = self.proc(g2, d2, p.body, c, w.right)
            _settle(left, [p.bind], p, "lolli-R")
            return left, a, In(p.on, p.bind, q, w.left, pos=p.pos)
        raise CheckError("forall-R", f"{c} : {a} does not input", p.pos)

    def _in_left(self, gamma, delta, p, c, a):
        psi = self.psi
        t = delta[p.on]
        tw = _whnf(t)
        if isinstance(tw, Exists):
            if p.anno is not None:
                _type_eq(psi, p.anno, tw.dom, "exists-L", "binder annotation", p.pos)
            psi2, x, body = under(psi, p.bind, tw.dom, p.body)
            d2 = {**delta, p.on: subst(tw.body, {tw.x: Var(x)})}
            left, t2, q = self._with_psi(psi2).proc(gamma, d2, body, c, a)
            _settle(left, [p.on], p, "exists-L")
            return left, t2, In(p.on, x, q, tw.dom, pos=p.pos)
        if isinstance(tw, Tensor):
            if p.anno is not None:
                _type_eq(psi, p.anno, tw.left, "tensor-L", "binder annotation", p.pos)
            g2, d2, _ = self._bind(gamma, {**delta, p.on: tw.right}, p.bind, tw.left)
            left, t2, q = self.proc(g2, d2, p.body, c, a)
            _settle(left, [p.on, p.bind], p, "tensor-L")
            return left, t2, In(p.on, p.bind, q, tw.left, pos=p.pos)
        raise CheckError("exists-L", f"{p.on} : {t} does not output", p.pos)

    def _case(self, gamma, delta, p, c, a, w):
        if p.on == c:
            if w is not None and not isinstance(w, With):
                raise CheckError("with-R", f"{c} : {a} offers no external choice", p.pos)
            if w is not None:
                arms = dict(w.branches)
                if set(arms) != {lab for lab, _ in p.branches}:
                    raise CheckError(
                        "with-R", f"branches {sorted(dict(p.branches))} do not match labels {sorted(arms)}", p.pos
                    )
            results = []
            for lab, q in p.branches:
                results.append(self.proc(gamma, delta, q, c, arms[lab] if w is not None else None))
            left = _merge([r[0] for r in results], delta, p)
            t = a if a is not None else With(tuple((lab, r[1]) for (lab, _), r in zip(p.branches, results)))
            return left, t, Case(p.on, tuple((lab, r[2]) for (lab, _), r in zip(p.branches, results)), pos=p.pos)
        if p.on in delta:
            t = delta[p.on]
            tw = _whnf(t)
            if not isinstance(tw, Plus):
                raise CheckError("plus-L", f"{p.on} : {t} offers no internal choice", p.pos)
            arms = dict(tw.branches)
            if set(arms) != {lab for lab, _ in p.branches}:
                raise CheckError(
                    "plus-L", f"branches {sorted(dict(p.branches))} do not match labels {sorted(arms)}", p.pos
                )
            results = []
            for lab, q in p.branches:
                r = self.proc(gamma, {**delta, p.on: arms[lab]}, q, c, a)
                _settle(r[0], [p.on], p, "plus-L")
                results.append(r)
            left = _merge([r[0] for r in results], delta, p)
            out = a
            if out is None:
                out = results[0][1]
                for r in results[1:]:
                    _type_eq(self.psi, r[1], out, "plus-L", "branches offer different sessions", p.pos)
            return left, out, Case(p.on, tuple((lab, r[2]) for (lab, _), r in zip(p.branches, results)), pos=p.pos)
        self._unknown(p, p.on, "case")

    def _cut(self, gamma, delta, p, c, a):
        psi = self.psi
        t = p.anno
        if t is not None:
            check_stype(psi, t)
            tw = _whnf(t)
        else:
            tw = None
        if isinstance(tw, Bang):
            l1, t1, q1 = self.proc(gamma, {}, p.left, p.bind, t)
            _settle(l1, list(l1), p, "cut!")
            left, t2, q2 = self.proc({**gamma, p.bind: tw.body}, delta, p.right, c, a)
            return left, t2, New(p.bind, q1, q2, t1, pos=p.pos)
        l1, t1, q1 = self.proc(gamma, delta, p.left, p.bind, t)
        w1 = _whnf(t1)
        if isinstance(w1, Bang):
            # a server composed without annotation: it must not use linear channels
            if set(l1) != set(delta):
                raise CheckError("cut!", f"the server on {p.bind} may not use linear channels", p.pos)
            left, t2, q2 = self.proc({**gamma, p.bind: w1.body}, l1, p.right, c, a)
            return left, t2, New(p.bind, q1, q2, t1, pos=p.pos)
        left, t2, q2 = self.proc(gamma, {**l1, p.bind: t1}, p.right, c, a)
        _settle(left, [p.bind], p, "cut")
        return left, t2, New(p.bind, q1, q2, t1, pos=p.pos)

    def _spawn(self, gamma, delta, p, c, a):
        psi = self.psi
        if len(set(p.shared)) != len(p.shared) or len(set(p.linear)) != len(p.linear):
            raise CheckError("spawn", "channels passed to a spawn must be distinct", p.pos)
        for u in p.shared:
            if u not in gamma:
                raise CheckError("spawn", f"{u} is not a shared channel here", p.pos)
        for d in p.linear:
            if d not in delta:
                raise CheckError("spawn", f"{d} is not an available linear channel", p.pos)
        m = p.monadic
        if isinstance(m, MonadVal):
            if len(m.shared) != len(p.shared) or len(m.linear) != len(p.linear):
                raise CheckError("spawn", "spawn arity does not match the monadic value", p.pos)
            g = {v: gamma[u] for v, u in zip(m.shared, p.shared)}
            d = {v: delta[u] for v, u in zip(m.linear, p.linear)}
            hint = _whnf(p.anno) if p.anno is not None else None
            offered = hint.offered[1] if isinstance(hint, Monad) else None
            t, body = elaborate_proc(psi, g, d, m.body, m.offered, offered)
            mt = Monad(
                tuple((v, gamma[u]) for v, u in zip(m.shared, p.shared)),
                tuple((v, delta[u]) for v, u in zip(m.linear, p.linear)),
                (m.offered, t),
            )
            m2 = dataclasses.replace(m, body=body)
        else:
            ft, m2 = _infer(psi, m)
            mt = _whnf(ft)
            if not isinstance(mt, Monad):
                raise CheckError("spawn", f"{m} has type {ft}, which is not a process type", p.pos)
            if len(mt.shared) != len(p.shared) or len(mt.linear) != len(p.linear):
                raise CheckError(
                    "spawn",
                    f"{m} expects {len(mt.shared)} shared and {len(mt.linear)} linear channels, "
                    f"got {len(p.shared)} and {len(p.linear)}",
                    p.pos,
                )
            for u, (_, b) in zip(p.shared, mt.shared):
                _type_eq(psi, gamma[u], b, "spawn", f"shared channel {u}", p.pos)
            for d, (_, b) in zip(p.linear, mt.linear):
                _type_eq(psi, delta[d], b, "spawn", f"linear channel {d}", p.pos)
        rest = {k: v for k, v in delta.items() if k not in p.linear}
        g2, d2, _ = self._bind(gamma, rest, p.bind, mt.offered[1])
        left, t2, q = self.proc(g2, d2, p.cont, c, a)
        _settle(left, [p.bind], p, "spawn")
        return left, t2, Spawn(p.bind, m2, p.shared, p.linear, q, mt, pos=p.pos)

    def _if(self, gamma, delta, p, c, a):
        psi = self.psi
        cond = _check(psi, p.cond, BOOL)
        try:
            scrut = eq.normalize_term(psi, p.cond)
        except eq.OutOfFuel:
            scrut = p.cond
        if isinstance(scrut, (TT, FF)):
            # A known scrutinee refines nothing and makes the other branch
            # unreachable, so only the branch that will run is checked.
            live = p.then if isinstance(scrut, TT) else p.other
            left, out, q = self.proc(gamma, delta, live, c, a)
            if isinstance(scrut, TT):
                return left, out, IfP(cond, q, p.other, pos=p.pos)
            return left, out, IfP(cond, p.then, q, pos=p.pos)
        results = []
        for value, branch in ((TT(), p.then), (FF(), p.other)):
            if isinstance(scrut, Var) and scrut.name in psi:
                sub = {scrut.name: value}
                g = {k: subst(v, sub) for k, v in gamma.items()}
                d = {k: subst(v, sub) for k, v in delta.items()}
                ab = subst(a, sub) if a is not None else None
            else:
                g, d, ab = gamma, delta, a
            results.append(self.proc(g, d, branch, c, ab))
        left = _merge([r[0] for r in results], delta, p)
        out = a
        if out is None:
            out = results[0][1]
            _type_eq(psi, results[1][1], out, "if", "branches offer different sessions", p.pos)
        return left, out, IfP(cond, results[0][2], results[1][2], pos=p.pos)


# ---------------------------------------------------------------- files


@dataclasses.dataclass(frozen=True)
class Diagnostic:
    severity: str
    file: str
    line: int
    col: int
    rule: str
    message: str

    def __str__(self):
        return f"{self.severity} {self.file}:{self.line}:{self.col} {self.rule} {self.message}"


@dataclasses.dataclass
class Report:
    path: str
    diagnostics: list = dataclasses.field(default_factory=list)
    checked: list = dataclasses.field(default_factory=list)
    elaborated: dict = dataclasses.field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)

    def __str__(self):
        return "\n".join(str(d) for d in self.diagnostics)


def resolve(src: SourceFile):
    """Inline earlier definitions into each declaration.

    Yields (decl, resolved decl or None, error or None).
    """
    defs = {}
    names = [d.name for d in src.decls]
    for i, d in enumerate(src.decls):
        later = set(names[i:])
        fields = {}
        if isinstance(d, TypeDef):
            fields = {"kind": d.kind, "body": d.body}
        elif isinstance(d, TermDef):
            fields = {"type": d.type, "body": d.body}
        else:
            fields = {
                "shared": d.shared,
                "linear": d.linear,
                "offered": d.offered,
                "body": d.body,
            }
        free = set()
        for v in fields.values():
            free |= _free_of(v)
        bad = sorted(free & later)
        if bad:
            yield d, None, CheckError(
                "definition", f"{d.name} refers to itself or to a later definition ({', '.join(bad)})", d.pos
            )
            continue
        mapping = {k: v for k, v in defs.items() if k in free}
        resolved = dataclasses.replace(d, **{k: _subst_field(v, mapping) for k, v in fields.items()})
        if isinstance(d, TypeDef):
            defs[d.name] = resolved.body
        elif isinstance(d, TermDef):
            defs[d.name] = Anno(resolved.body, resolved.type)
        yield d, resolved, None


def _free_of(v):
    if isinstance(v, tuple):
        out = set()
        for item in v:
            out |= _free_of(item)
        return out
    if isinstance(v, str):
        return set()
    return set(free_names(v))


def _subst_field(v, mapping):
    if not mapping:
        return v
    if isinstance(v, tuple):
        return tuple(_subst_field(item, mapping) for item in v)
    if isinstance(v, str):
        return v
    return subst(v, mapping)


def check_decl(d):
    """Check one resolved declaration; return its elaborated form."""
    psi = Psi()
    if isinstance(d, TypeDef):
        check_kind(psi, d.kind)
        k = infer_kind(psi, d.body)
        _conv(eq.kind_eq(psi, k, d.kind), "kind", f"{d.name} has kind {k}, declared {d.kind}", d.pos)
        return d
    if isinstance(d, TermDef):
        check_type(psi, d.type)
        return dataclasses.replace(d, body=_check(psi, d.body, d.type))
    sig = d.signature
    check_type(psi, sig)
    t, body = elaborate_proc(psi, dict(d.shared), dict(d.linear), d.body, d.offered[0], d.offered[1])
    return dataclasses.replace(d, body=body)


def check_file(f: SourceFile) -> Report:
    report = Report(f.path)
    for d, resolved, err in resolve(f):
        if err is None:
            try:
                report.elaborated[d.name] = check_decl(resolved)
                report.checked.append(d.name)
                continue
            except CheckError as e:
                err = e
            except RecursionError:
                err = CheckError("internal", "nesting too deep to check")
        pos = err.pos or d.pos or (0, 0)
        report.diagnostics.append(Diagnostic("error", f.path, pos[0], pos[1], err.rule, err.message))
    return report
