import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import F, K, P, S, T
from sdpi import equality as eq
from sdpi.core import Base, IfF, Pi, TT, alpha_eq, monad, One
from sdpi.dynamics import step_term
from sdpi.meta import Gen, GenerationFailed, gen_typed_term
from sdpi.typing import check_term
from sdpi.wf import Psi

YES, NO, UNDECIDED = eq.Verdict.YES, eq.Verdict.NO, eq.Verdict.UNDECIDED
COUNT_DOWN = r"(\x:Nat. natrecS x 1 (n, r => exists y:Nat. r))"
UNIT = monad(One())


# ---------------------------------------------------------------- normalization


def test_beta():
    assert eq.normalize_term(Psi(), T(r"(\x:Bool. x) tt")) == T("tt")


def test_number_recursion():
    # natrecT over succ z runs the successor branch once on the zero result:
    # succ-branch(n = z, r = z) = succ z
    assert eq.normalize_term(Psi(), T("natrecT Nat (succ z) z (n, r => succ r)")) == T("succ z")
    assert eq.normalize_term(Psi(), T("natrecT Nat 3 z (n, r => succ (succ r))")) == T("6")


def test_monad_eta_contracts():
    psi = Psi((("m", UNIT),))
    assert eq.normalize_term(psi, T("{ c <- y <- m; fwd y c }", "m")) == T("m", "m")


def test_no_reduction_inside_monadic_values():
    m = T(r"{ c <- x <- (\y:{ |- c:1 }. y) { d <- end }; fwd x c }")
    assert isinstance(eq.normalize_term(Psi(), m), type(m))


def test_normalization_reports_exhausted_fuel():
    omega_like = T("natrecT Nat 40 z (n, r => succ r)")
    with pytest.raises(eq.OutOfFuel):
        eq.normalize_term(Psi(), omega_like, fuel=5)


# ---------------------------------------------------------------- terms, types, kinds


def test_term_equalities():
    bb = F("pi x:Bool. Bool")
    assert eq.term_eq(Psi((("f", bb),)), T(r"\x:Bool. f x", "f"), T("f", "f"), bb) is YES
    assert eq.term_eq(Psi(), T("tt"), T("ff"), Base("Bool")) is NO
    assert eq.term_eq(Psi(), T("{ c <- end }"), T("{ c <- nu d. (end || end) }"), UNIT) is YES


def test_type_equalities():
    lhs = S(rf"(\w:Nat. {COUNT_DOWN} [w]) [succ z]")
    assert eq.type_eq(Psi(), lhs, S(rf"exists y:Nat. {COUNT_DOWN} [z]")) is YES
    assert eq.type_eq(Psi(), S(r"ifS tt (Nat /\ 1) (Bool /\ 1)"), S(r"Nat /\ 1")) is YES
    assert eq.type_eq(Psi(), S(r"Nat /\ 1"), S(r"Bool /\ 1")) is NO


def test_functional_type_equalities():
    assert eq.type_eq(Psi(), F("(\\x:Nat. { |- c:1 }) [3]"), UNIT) is YES
    assert eq.type_eq(Psi(), F("ifT ff Nat Bool"), Base("Bool")) is YES
    assert eq.type_eq(Psi(), F("pi x:Nat. Nat"), F("pi y:Nat. Nat")) is YES
    assert eq.type_eq(Psi(), F("pi x:Nat. Nat"), F("pi y:Nat. Bool")) is NO


def test_stuck_eliminators_compare_by_congruence():
    psi = Psi((("b", Base("Bool")),))
    a = S(r"ifS b (Nat /\ 1) 1")
    assert eq.type_eq(psi, a, S(r"ifS b (Nat /\ 1) 1")) is YES
    assert eq.type_eq(psi, a, S(r"ifS b 1 1")) is NO


def test_kind_equalities():
    assert eq.kind_eq(Psi(), K("type"), K("type")) is YES
    assert eq.kind_eq(Psi(), K("pi x:Bool. stype"), K("pi x:(ifT tt Bool Nat). stype")) is YES
    assert eq.kind_eq(Psi(), K("type"), K("stype")) is NO


# ---------------------------------------------------------------- processes


def test_forwarder_eta():
    a = S("forall x:Bool. 1")
    assert eq.proc_eq(None, P("fwd d c"), P("recv c (x). send d <x>. fwd d c"), ("c", a)) is YES


def test_commuting_conversion_for_input():
    lhs = P("nu d. (send d <tt>. end || recv c (x). recv d (y). fwd e c)")
    rhs = P("recv c (x). nu d. (send d <tt>. end || recv d (y). fwd e c)")
    assert eq.proc_eq(None, lhs, rhs) is YES


def test_distinct_payloads():
    a = S(r"Bool /\ 1")
    assert eq.proc_eq(None, P("send c <tt : Bool /\\ 1>. end"), P("send c <ff : Bool /\\ 1>. end"), ("c", a)) is NO


def test_reduction_is_part_of_process_equality():
    lhs = P("nu d. (send d <tt>. end || recv d (x). fwd e c)")
    assert eq.proc_eq(None, lhs, P("fwd e c")) is YES


def test_choice_eta():
    a = S("&{l: 1, r: 1}")
    expanded = P("case c { l => d.l; fwd d c, r => d.r; fwd d c }")
    assert eq.proc_eq(None, P("fwd d c"), expanded, ("c", a)) is YES


def test_fuel_exhaustion_is_undecided_not_no():
    lhs = T("natrecT Nat 30 z (n, r => succ r)")
    assert eq.term_eq(Psi(), lhs, T("30"), fuel=3) is UNDECIDED
    assert eq.term_eq(Psi(), lhs, T("30")) is YES


def test_fuel_default_reads_the_environment(monkeypatch):
    monkeypatch.setenv("SDPI_FUEL", "2")
    assert eq.default_fuel() == 2
    assert eq.term_eq(Psi(), T("natrecT Nat 30 z (n, r => succ r)"), T("30")) is UNDECIDED
    monkeypatch.setenv("SDPI_FUEL", "junk")
    assert eq.default_fuel() == eq.DEFAULT_FUEL
    monkeypatch.delenv("SDPI_FUEL")
    assert eq.default_fuel() == 10_000


# ---------------------------------------------------------------- properties


def _typed_term(seed, depth=4):
    g = Gen(seed)
    target = g.ftype(g.rng.randint(0, 2))
    try:
        return target, gen_typed_term(Psi(), target, depth, g.rng)
    except GenerationFailed:
        return target, None


def _reducts(m, limit=20):
    out = [m]
    for _ in range(limit):
        nxt = step_term(out[-1])
        if nxt is None:
            break
        out.append(nxt)
    return out


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_normalization_is_idempotent_and_preserves_typing(seed):
    target, m = _typed_term(seed)
    if m is None:
        return
    n = eq.normalize_term(Psi(), m)
    assert eq.normalize_term(Psi(), n) == n
    check_term(Psi(), n, target)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_term_equality_is_an_equivalence_on_reducts(seed):
    target, m = _typed_term(seed)
    if m is None:
        return
    chain = _reducts(m)
    first, mid, last = chain[0], chain[len(chain) // 2], chain[-1]
    assert eq.term_eq(Psi(), first, first, target) is YES
    assert eq.term_eq(Psi(), first, mid, target) is YES
    assert eq.term_eq(Psi(), mid, first, target) is YES
    assert eq.term_eq(Psi(), mid, last, target) is YES
    assert eq.term_eq(Psi(), first, last, target) is YES


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_yes_answers_are_valid(seed, other):
    """Whenever two generated terms are judged equal, both check at the type."""
    target, m = _typed_term(seed)
    _, n = _typed_term(other)
    if m is None or n is None:
        return
    if eq.term_eq(Psi(), m, n, target) is YES:
        check_term(Psi(), m, target)
        check_term(Psi(), n, target)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_injectivity_of_products(seed, disguise_domain):
    g = Gen(seed)
    dom, cod = g.ftype(1), g.ftype(1)
    other_dom = IfF(TT(), dom, Base("Nat")) if disguise_domain else dom
    other_cod = cod if disguise_domain else IfF(TT(), cod, Base("Bool"))
    lhs, rhs = Pi("x", dom, cod), Pi("x", other_dom, other_cod)
    assert eq.type_eq(Psi(), lhs, rhs) is YES
    assert eq.type_eq(Psi(), dom, other_dom) is YES
    assert eq.type_eq(Psi(), cod, other_cod) is YES


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_type_equality_is_reflexive_and_symmetric(seed):
    g = Gen(seed)
    a, b = g.stype(2), g.stype(2)
    assert eq.type_eq(Psi(), a, a) is YES
    assert eq.type_eq(Psi(), a, b) is eq.type_eq(Psi(), b, a)
    assert alpha_eq(a, b) <= (eq.type_eq(Psi(), a, b) is YES)
