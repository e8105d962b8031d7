import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import F, P, S, T, program
from sdpi import equality as eq
from sdpi.core import Anno, App, AppTm, Base, Fwd, MonadVal, One, Spawn, Var, freshen, monad, numeral, subst
from sdpi.meta import Gen, GenerationFailed, gen_typed_term
from sdpi.surface import ParseError, TermDef, parse
from sdpi.typing import (
    LinearLedger,
    check_file,
    check_proc,
    check_term,
    elaborate_proc,
    infer_term,
    resolve,
)
from sdpi.wf import CheckError, Psi

YES = eq.Verdict.YES
T_PRIME = r"forall x:Bool. ifS x (Nat /\ 1) (Bool /\ 1)"
T_PLAIN = r"Bool => +{t: Nat /\ 1, f: Bool /\ 1}"


def _defs(name):
    """Resolved definitions of a corpus file, by name."""
    return {d.name: r for d, r, err in resolve(program(name)) if err is None}


def _body(name, decl):
    d = program(name).lookup(decl)
    return d.body


# ---------------------------------------------------------------- terms


def test_infer_identity():
    assert eq.type_eq(Psi(), infer_term(Psi(), T(r"\x:Bool. x")), F("pi x:Bool. Bool")) is YES


def test_application_substitutes_into_the_codomain():
    psi = Psi((("f", F(r"pi n:Nat. { |- c:(\x:Nat. natrecS x 1 (k, r => Nat /\ r)) [n] }")),))
    t = infer_term(psi, T("f 2", "f"))
    assert eq.type_eq(psi, t, F(r"{ |- c:Nat /\ Nat /\ 1 }")) is YES


def test_closed_monad_value():
    check_term(Psi(), T("{ c <- end }"), monad(One()))


def test_counter_applied_to_one():
    defs = _defs("counter.sdp")
    counter = defs["counter"]
    m = App(_annotated(counter), numeral(1))
    count_down = defs["countDown"].body
    check_term(Psi(), m, monad(AppTm(count_down, numeral(1))))


def _annotated(d: TermDef):
    return Anno(d.body, d.type)


def test_check_lambda_and_reject_mismatch():
    check_term(Psi(), T(r"\x:Bool. x"), F("pi x:Bool. Bool"))
    with pytest.raises(CheckError) as info:
        check_term(Psi(), T("tt"), Base("Nat"))
    assert "Bool" in info.value.message and "Nat" in info.value.message


def test_dependent_protocol_as_a_monadic_value():
    r = _body("datadep.sdp", "R")
    check_term(Psi(), MonadVal("z", r), monad(S(T_PRIME), "z"))
    flipped = _body("datadep_flipped.sdp", "RFlipped")
    with pytest.raises(CheckError):
        check_term(Psi(), MonadVal("z", flipped), monad(S(T_PRIME), "z"))


def test_monad_values_need_an_expected_type():
    with pytest.raises(CheckError):
        infer_term(Psi(), T("{ c <- end }"))


# ---------------------------------------------------------------- processes


def test_forwarder_consumes_its_source():
    a = S(r"Nat /\ 1")
    out = check_proc(Psi(), {}, LinearLedger.of({"d": a}), Fwd("d", "c"), "c", a)
    assert out.consumed == {"d"} and out.output == {}


def test_nondependent_protocol_both_ways():
    for name in ("Q", "QFlipped"):
        check_proc(Psi(), {}, {}, _body("datadep.sdp", name), "z", S(T_PLAIN))


def test_spawn_of_a_counter():
    defs = _defs("simple_counter.sdp")
    sc = _annotated(defs["simpleCounter"])
    t = defs["simpleCounterT"].body
    p = Spawn("x", App(sc, T("succ z")), (), (), Fwd("x", "c"))
    check_proc(Psi(), {}, {}, p, "c", AppTm(t, T("succ z")))
    # and for an unknown number
    psi = Psi((("n", Base("Nat")),))
    p = Spawn("x", App(sc, Var("n")), (), (), Fwd("x", "c"))
    check_proc(psi, {}, {}, p, "c", AppTm(t, Var("n")))


@pytest.mark.parametrize(
    "text, delta, offered, rule",
    [
        ("end", {"d": r"Nat /\ 1"}, "1", "linearity"),  # unused linear channel
        ("recv d (x). recv d (y). end", {"d": r"Nat /\ 1"}, "1", None),  # used past its end
        ("c.nope; end", {}, "+{a: 1}", None),  # unknown label
        ("send c <tt>. end", {}, r"Nat /\ 1", None),  # payload of the wrong type
        ("fwd d c", {"d": "1"}, r"Nat /\ 1", None),  # forwarder between different types
    ],
)
def test_process_errors(text, delta, offered, rule):
    with pytest.raises(CheckError) as info:
        elaborate_proc(Psi(), {}, {k: S(v) for k, v in delta.items()}, P(text), "c", S(offered))
    if rule is not None:
        assert info.value.rule == rule


def test_spawn_arity_mismatch():
    psi = Psi((("m", F(r"{ d:Nat /\ 1 |- c:1 }")),))
    with pytest.raises(CheckError):
        elaborate_proc(psi, {}, {}, P("x <- m; fwd x c", "m"), "c", One())


def test_unit_channels_close_silently():
    elaborate_proc(Psi(), {}, {"d": One()}, P("end"), "c", One())


def test_shared_channels_may_be_copied_or_dropped():
    b = S(r"Nat /\ 1")
    elaborate_proc(Psi(), {"u": b}, {}, P("end"), "c", One())
    elaborate_proc(Psi(), {"u": b}, {}, P("copy u (y). recv y (n). copy u (w). recv w (k). end"), "c", One())


# ---------------------------------------------------------------- files


def test_corpus_files_check():
    for name in ("counter.sdp", "datadep.sdp", "simple_counter.sdp", "embed_example.sdp"):
        report = check_file(program(name))
        assert report.ok, str(report)


def test_flipped_file_is_rejected_once():
    report = check_file(program("datadep_flipped.sdp"))
    assert not report.ok
    errors = [d for d in report.diagnostics if d.severity == "error"]
    assert len(errors) == 1
    assert errors[0].rule == "exists-R"
    assert str(errors[0]).startswith("error ") and "datadep_flipped.sdp:" in str(errors[0])


def test_empty_file_has_an_empty_report():
    report = check_file(parse(""))
    assert report.ok and report.diagnostics == [] and report.checked == []


def test_definitions_may_not_refer_forward():
    # a name must be declared before use, since its sort decides how it parses
    with pytest.raises(ParseError):
        parse("type A :: stype = B\ntype B :: stype = 1\n")


# ---------------------------------------------------------------- properties


def _open_process(seed):
    """A process using two linear channels and offering ``c``."""
    g = Gen(seed)
    a, b1, b2 = g.stype(1), g.stype(2), g.stype(2)
    q = g.client(
        Psi(), "d1", b1, lambda psi: g.client(psi, "d2", b2, lambda psi2: g.provider(psi2, "c", a, 2), 2), 2
    )
    return q, {"d1": b1, "d2": b2}, a


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_leftover_soundness(seed):
    try:
        q, delta, a = _open_process(seed)
    except GenerationFailed:
        return
    forward = check_proc(Psi(), {}, LinearLedger.of(delta), q, "c", a)
    backward = check_proc(Psi(), {}, LinearLedger.of(dict(reversed(list(delta.items())))), q, "c", a)
    assert forward.consumed | set(forward.output) == set(delta)
    for out in (forward, backward):
        assert all(eq.whnf(t).__class__.__name__ in ("One", "Bang") for t in out.output.values())
    assert forward.consumed == backward.consumed


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_missing_linear_channel_is_an_error(seed):
    try:
        q, delta, a = _open_process(seed)
    except GenerationFailed:
        return
    needed = {k: v for k, v in delta.items() if eq.whnf(v).__class__.__name__ not in ("One", "Bang")}
    if not needed:
        return
    victim = sorted(needed)[0]
    smaller = {k: v for k, v in delta.items() if k != victim}
    with pytest.raises(CheckError):
        elaborate_proc(Psi(), {}, smaller, q, "c", a)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_unicity_over_alpha_variants(seed):
    g = Gen(seed)
    target = g.ftype(g.rng.randint(0, 2))
    try:
        m = gen_typed_term(Psi(), target, 4, g.rng)
    except GenerationFailed:
        return
    first = _inferred(m)
    if first is None:
        return
    variant = freshen(m, {"x1", "x2", "x3", "c1", "c2", "y1"})
    assert eq.type_eq(Psi(), first, infer_term(Psi(), variant)) is YES


def _inferred(m):
    """The synthesized type, or None for terms whose monadic values carry no
    annotation (those only check against a known type)."""
    try:
        return infer_term(Psi(), m)
    except CheckError as e:
        if e.rule == "monad-I":
            return None
        raise


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_generated_terms_check_at_their_target(seed):
    g = Gen(seed)
    target = g.ftype(g.rng.randint(0, 2))
    try:
        m = gen_typed_term(Psi(), target, 4, g.rng)
    except GenerationFailed:
        return
    check_term(Psi(), m, target)
    t = _inferred(m)
    assert t is None or eq.type_eq(Psi(), t, target) is YES


def test_renaming_a_provided_channel_is_harmless():
    r = _body("datadep.sdp", "R")
    check_proc(Psi(), {}, {}, subst(r, {"z": "w"}), "w", S(T_PRIME))
