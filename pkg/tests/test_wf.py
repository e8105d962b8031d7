import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import F, K, S
from sdpi import equality as eq
from sdpi.core import Base, FunType, PiTerm, SType, alpha_eq
from sdpi.meta import Gen
from sdpi.wf import CheckError, Psi, check_ctx, check_kind, infer_kind_fun, infer_kind_sess

COUNT_DOWN = r"\x:Nat. natrecS x 1 (n, r => exists y:Nat. r)"
T_PRIME = r"forall x:Bool. ifS x (Nat /\ 1) (Bool /\ 1)"


def test_empty_context():
    check_ctx(Psi())


def test_session_type_where_a_functional_type_belongs():
    psi = Psi((("x", Base("Bool")), ("y", S(r"ifS x (Nat /\ 1) (Bool /\ 1)"))))
    with pytest.raises(CheckError) as info:
        check_ctx(psi)
    assert info.value.rule == "ctx" and "y" in info.value.message


def test_context_with_a_type_family():
    check_ctx(Psi((("x", Base("Nat")), ("t", K("pi y:Nat. stype")))))


def test_context_is_telescopic():
    with pytest.raises(CheckError):
        check_ctx(Psi((("f", F("pi y:Nat. { |- c:t [y] }", t="sess")), ("t", K("pi y:Nat. stype")))))
    check_ctx(Psi((("t", K("pi y:Nat. stype")), ("f", F("pi y:Nat. { |- c:t [y] }", t="sess")))))


@pytest.mark.parametrize(
    "text, kind",
    [
        ("{ |- c:1 }", "type"),
        ("pi x:Bool. { |- c:1 }", "type"),
        (r"\x:Nat. { |- c:(%s) [x] }" % COUNT_DOWN, "pi x:Nat. type"),
        (r"\t::stype. { |- c:t }", "pi t::stype. type"),
    ],
)
def test_functional_kinds(text, kind):
    assert eq.kind_eq(Psi(), infer_kind_fun(Psi(), F(text)), K(kind)) is eq.Verdict.YES


@pytest.mark.parametrize(
    "text, kind",
    [
        ("1", "stype"),
        (T_PRIME, "stype"),
        (COUNT_DOWN, "pi x:Nat. stype"),
        (r"&{a: 1, b: !(Nat /\ 1)}", "stype"),
        (r"(\t::stype. t -o t) <1>", "stype"),
    ],
)
def test_session_kinds(text, kind):
    assert alpha_eq(infer_kind_sess(Psi(), S(text)), K(kind))


@pytest.mark.parametrize(
    "text",
    [
        "ifS z 1 1",  # condition must be a boolean
        "natrecS tt 1 (n, r => r)",  # target must be a number
        f"({COUNT_DOWN}) [tt]",  # argument of the wrong type
        "t",  # unbound
    ],
)
def test_ill_kinded_session_types(text):
    with pytest.raises(CheckError):
        infer_kind_sess(Psi(), S(text, t="sess"))


def test_monad_needs_session_components():
    with pytest.raises(CheckError):
        infer_kind_fun(Psi(), F(r"{ |- c:(\x:Nat. 1) }"))


def test_kind_domains_must_be_types():
    check_kind(Psi(), PiTerm("x", Base("Nat"), SType()))
    with pytest.raises(CheckError):
        check_kind(Psi(), K(r"pi x:(\y:Nat. Nat). type"))


# ---------------------------------------------------------------- properties


def _generated_types(seed):
    g = Gen(seed)
    return g.ftype(2), g.stype(2)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_validity(seed):
    """Synthesized kinds are themselves well formed."""
    for t in _generated_types(seed):
        k = infer_kind_fun(Psi(), t) if isinstance(t, FunType) else infer_kind_sess(Psi(), t)
        check_kind(Psi(), k)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["w", "v"]))
def test_weakening(seed, extra):
    """An unused context entry never turns success into failure."""
    t, a = _generated_types(seed)
    wide = Psi(((extra, Base("Nat")), ("u", K("pi y:Nat. stype"))))
    assert alpha_eq(infer_kind_fun(Psi(), t), infer_kind_fun(wide, t))
    assert alpha_eq(infer_kind_sess(Psi(), a), infer_kind_sess(wide, a))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_unicity_under_reordering(seed):
    """Independent context entries may be listed in any order."""
    _, a = _generated_types(seed)
    one = Psi((("p", Base("Nat")), ("q", Base("Bool"))))
    two = Psi((("q", Base("Bool")), ("p", Base("Nat"))))
    assert eq.kind_eq(one, infer_kind_sess(one, a), infer_kind_sess(two, a)) is eq.Verdict.YES
