"""Small-step operational semantics.

Terms reduce in normal order.  Processes run as a configuration: a multiset
of threads, each providing one channel, together with the set of restricted
channels and the current session type of each restricted channel.  At every
step all enabled redexes are listed in a fixed order and one is picked with a
seeded pseudo-random generator, so a run is a pure function of its inputs.
"""

from __future__ import annotations

import dataclasses
import json
import re

from . import equality as eq
from .core import (
    Anno,
    App,
    Bang,
    Case,
    Copy,
    Exists,
    FF,
    Forall,
    Fwd,
    IfP,
    IfT,
    In,
    Lam,
    Lolli,
    Monad,
    MonadVal,
    NatRecT,
    New,
    Nil,
    OutFresh,
    OutTerm,
    Pi,
    Plus,
    Process,
    Repl,
    Select,
    Spawn,
    Succ,
    TT,
    Tensor,
    Term,
    With,
    Zero,
    all_names,
    free_names,
    subst,
)
from .surface import show

MASK = (1 << 64) - 1


class Rng:
    """xorshift64* seeded through splitmix64."""

    def __init__(self, seed: int):
        z = (seed + 0x9E3779B97F4A7C15) & MASK
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        z ^= z >> 31
        self.state = z or 0x2545F4914F6CDD1D

    def next(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK

    def below(self, n: int) -> int:
        return self.next() % n


# ---------------------------------------------------------------- terms


class StuckTerm(Exception):
    pass


def is_value(m: Term) -> bool:
    return isinstance(m, (Lam, MonadVal, TT, FF, Zero, Succ))


def step_term(m: Term):
    """One normal-order step, or ``None`` if ``m`` is a value."""
    if is_value(m):
        return None
    if isinstance(m, Anno):
        if is_value(m.term):
            return m.term
        inner = step_term(m.term)
        if inner is None:  # pragma: no cover - values are handled above
            return m.term
        return Anno(inner, m.type, pos=m.pos)
    if isinstance(m, App):
        if isinstance(m.fn, Lam):
            return subst(m.fn.body, {m.fn.x: m.arg})
        if isinstance(m.fn, Anno) and isinstance(m.fn.term, Lam):
            # Keep the ascription on the result so that the reduct still
            # synthesizes a type.
            lam, t = m.fn.term, eq.whnf(m.fn.type)
            body = subst(lam.body, {lam.x: m.arg})
            if isinstance(t, Pi):
                return Anno(body, subst(t.cod, {t.x: m.arg}), pos=m.pos)
            return body
        f = step_term(m.fn)
        if f is None:
            raise StuckTerm(f"cannot apply {show(m.fn)}")
        return App(f, m.arg, pos=m.pos)
    if isinstance(m, IfT):
        if isinstance(m.cond, TT):
            return m.then
        if isinstance(m.cond, FF):
            return m.other
        c = step_term(m.cond)
        if c is None:
            raise StuckTerm(f"cannot branch on {show(m.cond)}")
        return dataclasses.replace(m, cond=c)
    if isinstance(m, NatRecT):
        t = m.target
        if isinstance(t, Zero):
            return m.zero
        if isinstance(t, Succ):
            again = dataclasses.replace(m, target=t.pred)
            return subst(m.succ, {m.n: t.pred, m.r: again})
        t2 = step_term(t)
        if t2 is None:
            raise StuckTerm(f"cannot recurse on {show(t)}")
        return dataclasses.replace(m, target=t2)
    raise StuckTerm(f"{show(m)} is stuck")


def evaluate(m: Term, limit=100_000) -> Term:
    for _ in range(limit):
        nxt = step_term(m)
        if nxt is None:
            return m
        m = nxt
    raise StuckTerm("term evaluation exceeded its step limit")


# ---------------------------------------------------------------- configurations


@dataclasses.dataclass(frozen=True)
class Event:
    kind: str
    chan: str
    payload: object = None

    def render(self) -> str:
        parts = [self.kind, self.chan]
        if self.payload is not None:
            parts.append(show(self.payload) if not isinstance(self.payload, str) else self.payload)
        return " ".join(parts)

    def record(self) -> dict:
        out = {"kind": self.kind, "chan": self.chan}
        if self.payload is not None:
            out["payload"] = show(self.payload) if not isinstance(self.payload, str) else self.payload
        return out


@dataclasses.dataclass(frozen=True)
class Thread:
    proc: Process
    offers: str


_SUFFIX = re.compile(r"_(\d+)$")


@dataclasses.dataclass(frozen=True)
class Configuration:
    threads: tuple
    restricted: frozenset
    types: dict
    supply: int
    trace: tuple = ()
    external: tuple = ("c", None)

    @classmethod
    def initial(cls, p: Process, offered="c", a=None) -> Configuration:
        names = all_names(p) | {offered}
        supply = 1 + max([int(m.group(1)) for n in names if (m := _SUFFIX.search(n))] or [0])
        cfg = cls((Thread(p, offered),), frozenset(), {}, supply, (), (offered, a))
        return cfg._settle()

    # -- helpers

    def used_names(self) -> set:
        out = set(self.restricted) | {self.external[0]}
        for t in self.threads:
            out |= free_names(t.proc)
            out.add(t.offers)
        return out

    def _fresh(self, base, used):
        stem = _SUFFIX.sub("", base).strip("_") or "ch"
        k = self.supply
        while f"{stem}_{k}" in used:
            k += 1
        object.__setattr__(self, "supply", k + 1)
        return f"{stem}_{k}"

    def _settle(self) -> Configuration:
        """Split top-level compositions into separate threads."""
        threads = list(self.threads)
        restricted = set(self.restricted)
        types = dict(self.types)
        cfg = dataclasses.replace(self)
        out = []
        while threads:
            t = threads.pop(0)
            p = t.proc
            if isinstance(p, New):
                x = p.bind
                used = cfg.used_names() | restricted | {th.offers for th in out}
                used |= {n for th in threads for n in free_names(th.proc)}
                if x in used:
                    y = cfg._fresh(x, used | all_names(p))
                    p = New(y, subst(p.left, {x: y}), subst(p.right, {x: y}), p.anno, pos=p.pos)
                    x = y
                restricted.add(x)
                types[x] = p.anno
                threads[0:0] = [Thread(p.left, x), Thread(p.right, t.offers)]
                continue
            out.append(t)
        return Configuration(tuple(out), frozenset(restricted), types, cfg.supply, self.trace, self.external)

    # -- redexes

    def redexes(self) -> list:
        out = []
        ths = self.threads
        provider = {}
        for i, t in enumerate(ths):
            provider.setdefault(t.offers, i)
        for j, t in enumerate(ths):
            p = t.proc
            if isinstance(p, Fwd):
                if p.src in self.restricted or p.dst in self.restricted:
                    out.append(("fwd", j))
                continue
            if isinstance(p, Spawn):
                out.append(("spawn", j))
                continue
            if isinstance(p, IfP):
                out.append(("if", j))
                continue
            x = _head_chan(p)
            if x is None or x == t.offers or x not in self.restricted:
                continue
            i = provider.get(x)
            if i is None or i == j:
                continue
            if _compatible(ths[i].proc, p, x):
                out.append(("comm", i, j))
        return out

    def live_stuck(self) -> list:
        """Threads waiting on a restricted channel with no partner."""
        out = []
        for t in self.threads:
            p = t.proc
            if isinstance(p, (Nil, Repl)):
                continue
            if isinstance(p, Fwd) and not (p.src in self.restricted or p.dst in self.restricted):
                continue
            ch = _head_chan(p)
            if ch is not None and ch not in self.restricted:
                continue
            out.append(t)
        return out

    # -- reduction

    def step(self, rng: Rng):
        rs = self.redexes()
        if not rs:
            return None
        choice = rs[rng.below(len(rs))]
        return self._fire(choice)

    def _fire(self, r):
        threads = list(self.threads)
        types = dict(self.types)
        restricted = set(self.restricted)
        cfg = dataclasses.replace(self)
        used = self.used_names()
        if r[0] == "fwd":
            j = r[1]
            f = threads.pop(j).proc
            if f.src in restricted:
                old, new = f.src, f.dst
            else:
                old, new = f.dst, f.src
            restricted.discard(old)
            if new in restricted or new == self.external[0]:
                types.setdefault(new, types.get(old))
            types.pop(old, None)
            threads = [Thread(subst(t.proc, {old: new}), new if t.offers == old else t.offers) for t in threads]
            ev = Event("FwdRename", old, new)
        elif r[0] == "spawn":
            j = r[1]
            t = threads[j]
            p = t.proc
            m = evaluate(p.monadic)
            if not isinstance(m, MonadVal) or len(m.shared) != len(p.shared) or len(m.linear) != len(p.linear):
                raise StuckTerm(f"cannot spawn {show(m)}")
            x = p.bind
            if x in used:
                x = cfg._fresh(x, used | all_names(p))
            ren = {m.offered: x}
            ren.update(zip(m.shared, p.shared))
            ren.update(zip(m.linear, p.linear))
            body = subst(m.body, ren)
            cont = subst(p.cont, {p.bind: x}) if x != p.bind else p.cont
            anno = p.anno.offered[1] if isinstance(p.anno, Monad) else None
            threads[j : j + 1] = [Thread(New(x, body, cont, anno), t.offers)]
            ev = Event("MonadSpawn", x)
        elif r[0] == "if":
            j = r[1]
            t = threads[j]
            c = evaluate(t.proc.cond)
            if isinstance(c, TT):
                threads[j] = Thread(t.proc.then, t.offers)
            elif isinstance(c, FF):
                threads[j] = Thread(t.proc.other, t.offers)
            else:
                raise StuckTerm(f"cannot branch on {show(c)}")
            ev = Event("CondBranch", t.offers, "tt" if isinstance(c, TT) else "ff")
        else:
            _, i, j = r
            prov, cli = threads[i], threads[j]
            x = prov.offers
            p, q = prov.proc, cli.proc
            tx = types.get(x)
            tw = eq.whnf(tx) if tx is not None else None
            new_threads = []
            if isinstance(p, OutTerm) and isinstance(q, In):
                payload = p.payload
                p2, q2 = p.body, subst(q.body, {q.bind: payload})
                types[x] = subst(tw.body, {tw.x: payload}) if isinstance(tw, Exists) else None
                ev = Event("ValueComm", x, payload)
            elif isinstance(p, In) and isinstance(q, OutTerm):
                payload = q.payload
                p2, q2 = subst(p.body, {p.bind: payload}), q.body
                types[x] = subst(tw.body, {tw.x: payload}) if isinstance(tw, Forall) else None
                ev = Event("ValueComm", x, payload)
            elif isinstance(p, OutFresh) and isinstance(q, In):
                n = cfg._fresh(p.bind, used | all_names(p) | all_names(q))
                new_threads.append(Thread(subst(p.left, {p.bind: n}), n))
                p2 = subst(p.right, {p.bind: n})
                q2 = subst(q.body, {q.bind: n})
                restricted.add(n)
                types[n], types[x] = (tw.left, tw.right) if isinstance(tw, Tensor) else (None, None)
                ev = Event("FreshComm", x, n)
            elif isinstance(p, In) and isinstance(q, OutFresh):
                n = cfg._fresh(q.bind, used | all_names(p) | all_names(q))
                new_threads.append(Thread(subst(q.left, {q.bind: n}), n))
                p2 = subst(p.body, {p.bind: n})
                q2 = subst(q.right, {q.bind: n})
                restricted.add(n)
                types[n], types[x] = (tw.left, tw.right) if isinstance(tw, Lolli) else (None, None)
                ev = Event("FreshComm", x, n)
            elif isinstance(p, Case) and isinstance(q, Select):
                p2, q2 = dict(p.branches)[q.label], q.body
                types[x] = dict(tw.branches).get(q.label) if isinstance(tw, With) else None
                ev = Event("Choice", x, q.label)
            elif isinstance(p, Select) and isinstance(q, Case):
                p2, q2 = p.body, dict(q.branches)[p.label]
                types[x] = dict(tw.branches).get(p.label) if isinstance(tw, Plus) else None
                ev = Event("Choice", x, p.label)
            elif isinstance(p, Repl) and isinstance(q, Copy):
                n = cfg._fresh(q.bind, used | all_names(p) | all_names(q))
                new_threads.append(Thread(subst(p.body, {p.bind: n}), n))
                p2 = p
                q2 = subst(q.body, {q.bind: n})
                restricted.add(n)
                types[n] = tw.body if isinstance(tw, Bang) else None
                ev = Event("ReplSpawn", x)
            else:  # pragma: no cover - excluded by _compatible
                raise AssertionError("not a redex")
            threads[i] = Thread(p2, prov.offers)
            threads[j] = Thread(q2, cli.offers)
            threads[i + 1 : i + 1] = new_threads
        nxt = Configuration(
            tuple(threads),
            frozenset(restricted),
            types,
            cfg.supply,
            self.trace + (ev,),
            self.external,
        )
        return nxt._settle()

    # -- reading back

    def to_process(self) -> Process:
        """Rebuild a single process, restoring each restriction as a cut."""
        ths = self.threads
        provider = {t.offers: i for i, t in enumerate(ths)}
        placed = set()

        def shared(x):
            i = provider.get(x)
            return i is not None and isinstance(ths[i].proc, Repl)

        def build(i):
            placed.add(i)
            p = ths[i].proc
            for x in sorted(free_names(p) & self.restricted):
                j = provider.get(x)
                if j is None or j in placed or shared(x) or j == i:
                    continue
                p = New(x, build(j), p, self.types.get(x))
            return p

        root_idx = provider.get(self.external[0])
        root = build(root_idx) if root_idx is not None else Nil()
        while len(placed) < len(ths):
            rest = [i for i in range(len(ths)) if i not in placed]
            pick = None
            for i in rest:
                x = ths[i].offers
                if not any(x in free_names(ths[k].proc) for k in rest if k != i):
                    pick = i
                    break
            if pick is None:
                pick = rest[0]
            x = ths[pick].offers
            root = New(x, build(pick), root, self.types.get(x))
        return root

    def render(self) -> str:
        return show(self.to_process())


def _head_chan(p):
    if isinstance(p, (In, OutTerm, OutFresh, Select, Case, Copy, Repl)):
        return p.on
    return None


def _compatible(p, q, x) -> bool:
    """Is provider ``p`` ready to interact with client ``q`` on ``x``?"""
    if _head_chan(p) != x:
        return False
    pairs = [
        (OutTerm, In),
        (In, OutTerm),
        (OutFresh, In),
        (In, OutFresh),
        (Case, Select),
        (Select, Case),
        (Repl, Copy),
    ]
    for a, b in pairs:
        if isinstance(p, a) and isinstance(q, b):
            if a is Case:
                return q.label in dict(p.branches)
            if b is Case:
                return p.label in dict(q.branches)
            return True
    return False


def step_config(c: Configuration, seed=0):
    """One reduction step chosen by ``seed`` (an int or an :class:`Rng`)."""
    rng = seed if isinstance(seed, Rng) else Rng(seed)
    return c.step(rng)


@dataclasses.dataclass(frozen=True)
class RunResult:
    trace: tuple
    final: Configuration
    status: str  # 'quiescent', 'budget', 'stuck-live'

    def lines(self, as_json=False) -> list[str]:
        if as_json:
            return [json.dumps({"step": n, **e.record()}, sort_keys=True) for n, e in enumerate(self.trace, 1)]
        return [f"STEP {n}: {e.render()}" for n, e in enumerate(self.trace, 1)]


def run(c: Configuration, seed=0, max_steps=100_000) -> RunResult:
    rng = Rng(seed)
    for _ in range(max_steps):
        nxt = c.step(rng)
        if nxt is None:
            status = "stuck-live" if c.live_stuck() else "quiescent"
            return RunResult(c.trace, c, status)
        c = nxt
    if not c.redexes():
        status = "stuck-live" if c.live_stuck() else "quiescent"
        return RunResult(c.trace, c, status)
    return RunResult(c.trace, c, "budget")
