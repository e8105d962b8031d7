import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import F, K, P, S, T, program
from sdpi import equality as eq
from sdpi.core import New, alpha_eq, erase, free_names, subst
from sdpi.dynamics import Configuration, run
from sdpi.embed import (
    Embedder,
    FragmentError,
    embed_ctx,
    embed_ftype,
    embed_kind,
    embed_proc,
    embed_stype,
    embed_term,
    in_fragment,
)
from sdpi.meta import Gen, GenerationFailed, correspondence, corpus_fragment_terms, gen_typed_term
from sdpi.typing import check_term, elaborate_proc, resolve
from sdpi.wf import Psi

YES = eq.Verdict.YES
U = "{ |- c:1 }"
UU = f"pi x:{U}. {U}"
EXAMPLE = rf"(\x:(pi x:{U}. pi y:{U}. {U}). x) (\x:{U}. \y:{U}. y)"


# ---------------------------------------------------------------- kinds and types


def test_kinds():
    assert embed_kind(K("type")) == K("stype")
    assert alpha_eq(embed_kind(K(f"pi x:{U}. type")), K(f"pi x:{U}. stype"))


def test_monad_without_channels_is_its_offered_session():
    assert embed_ftype(F(U)) == S("1")


def test_function_types_receive_suspended_arguments():
    # pi x:U. U  becomes  forall x:{ |- c:[[U]] }. [[U]]  with [[U]] = 1
    assert alpha_eq(embed_ftype(F(UU)), S(f"forall x:{U}. 1"))


def test_monad_channels_become_implications():
    t = F(rf"{{ u:{U} /\ 1 ; d:1 |- c:1 }}")
    assert alpha_eq(embed_ftype(t), S(rf"!(exists x:{U}. 1) -o 1 -o 1"))


def test_session_connectives_are_kept():
    assert embed_stype(S("1")) == S("1")
    a = S("&{a: 1 -o 1, b: !1}")
    assert embed_stype(a) == a


def test_contexts_suspend_their_variables():
    psi = embed_ctx([("x", F(UU))])
    assert alpha_eq(psi.entries[0][1], F(f"{{ |- c:forall x:{U}. 1 }}"))


# ---------------------------------------------------------------- terms and processes


def test_variable():
    assert alpha_eq(embed_term(T("x", "x")), P("y <- x; fwd y z", "x"))


def test_closed_process_value():
    assert embed_term(T("{ z <- end }")) == P("end")


def test_worked_example():
    out = embed_term(T(rf"(\x:{U}. x) (\x:{U}. \y:{U}. y)"))
    expected = P("nu c. (recv c (x). y <- x; fwd y c || send c <{ w <- recv w (x). recv w (y). d <- y; fwd d w }>. fwd c z)")
    assert alpha_eq(erase(out), expected)


def test_spawn_without_channels():
    out = embed_proc(P("x <- m; fwd x c", "m"))
    assert isinstance(out, New)
    assert alpha_eq(out, P("nu x. (y <- m; fwd y x || fwd x c)", "m"))


def test_spawn_with_a_linear_channel_forwards_it():
    out = embed_proc(P("x <- m <- ; d; fwd x c", "m"))
    assert alpha_eq(erase(out), P("nu x. (y <- m; fwd y x || out x (e). (fwd d e || fwd x c))", "m"))


def test_homomorphic_on_forwarders():
    assert embed_proc(P("fwd d c")) == P("fwd d c")


@pytest.mark.parametrize("text", ["tt", "z", r"\x:Bool. x", "ifT tt z z"])
def test_builtin_data_is_outside_the_fragment(text):
    with pytest.raises(FragmentError, match="outside embedding fragment"):
        embed_term(T(text))
    assert not in_fragment(T(text))


def test_builtin_types_are_outside_the_fragment():
    with pytest.raises(FragmentError):
        embed_ftype(F("Bool"))
    with pytest.raises(FragmentError):
        embed_stype(S(r"forall x:Bool. ifS x 1 1"))


# ---------------------------------------------------------------- behavior


def test_worked_example_runs_to_the_translated_value():
    m = T(EXAMPLE)
    target = F(f"pi x:{U}. pi y:{U}. {U}")
    e = Embedder()
    e.see(m, "z")
    a = e.ftype(target)
    p = elaborate_proc(Psi(), {}, {}, e.term(m, "z"), "z", a)[1]
    goal = embed_term(T(rf"\x:{U}. \y:{U}. y"))
    result = run(Configuration.initial(p, "z", a), 0, max_steps=4)
    assert len(result.trace) <= 4
    assert eq.proc_eq(None, result.final.to_process(), goal) is YES


def test_worked_example_correspondence():
    matched, err = correspondence(T(EXAMPLE), F(f"pi x:{U}. pi y:{U}. {U}"))
    assert err is None and len(matched) == 1 and matched[0] <= 8


def test_corpus_fragment_terms_embed_and_check():
    cases = corpus_fragment_terms()
    assert {"embed_example.sdp:example", "embed_example.sdp:passOn"} <= {name for name, _, _ in cases}
    for name, m, t in cases:
        e = Embedder()
        e.see(m, "z")
        elaborate_proc(Psi(), {}, {}, e.term(m, "z"), "z", e.ftype(t))


def test_corpus_fragment_terms_correspond():
    for name, m, t in corpus_fragment_terms():
        matched, err = correspondence(m, t, k=8)
        assert err is None, f"{name}: {err}"


# ---------------------------------------------------------------- equality is preserved


EQUALITIES = [
    # beta
    (rf"(\x:{U}. x) {{ c <- end }}", "{ c <- end }", U, ()),
    (rf"(\x:{U}. \y:{U}. y) {{ c <- end }}", rf"\y:{U}. y", UU, ()),
    # eta for functions
    (rf"\x:{U}. f x", "f", UU, ("f",)),
    # eta for monadic values
    ("{ c <- y <- m; fwd y c }", "m", U, ("m",)),
    # congruence under a binder
    (rf"\x:{U}. (\y:{U}. y) x", rf"\x:{U}. x", UU, ()),
]


@pytest.mark.parametrize("lhs, rhs, ty, free", EQUALITIES)
def test_equal_terms_translate_to_equal_processes(lhs, rhs, ty, free):
    psi = Psi(tuple((v, F(UU if v == "f" else U)) for v in free))
    m, n, t = T(lhs, *free), T(rhs, *free), F(ty)
    assert eq.term_eq(psi, m, n, t) is YES
    assert eq.proc_eq(None, embed_term(m), embed_term(n), ("z", embed_ftype(t))) is YES


def test_distinct_terms_stay_distinct():
    m, n = T(rf"\x:{U}. \y:{U}. x"), T(rf"\x:{U}. \y:{U}. y")
    assert eq.proc_eq(None, embed_term(m), embed_term(n)) is eq.Verdict.NO


# ---------------------------------------------------------------- properties


def _fragment_term(seed, depth=5):
    g = Gen(seed, fragment=True)
    entries = tuple((g.name("v"), g.ftype(1)) for _ in range(g.rng.randint(0, 2)))
    psi = Psi(entries)
    target = g.ftype(g.rng.randint(0, 2))
    try:
        return psi, target, gen_typed_term(psi, target, g.rng.randint(1, depth), g.rng, fragment=True)
    except GenerationFailed:
        return psi, target, None


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_translation_preserves_typing(seed):
    psi, target, m = _fragment_term(seed)
    if m is None:
        return
    check_term(psi, m, target)
    e = Embedder()
    e.see(m, "z")
    elaborate_proc(embed_ctx(psi), {}, {}, e.term(m, "z"), "z", e.ftype(target))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_translation_is_compositional(seed):
    g = Gen(seed, fragment=True)
    tx = g.ftype(1)
    psi = Psi((("x0", tx),))
    target = g.ftype(g.rng.randint(0, 2))
    try:
        m = gen_typed_term(psi, target, g.rng.randint(1, 4), g.rng, fragment=True)
        n = gen_typed_term(Psi(), tx, g.rng.randint(1, 4), g.rng, fragment=True)
    except GenerationFailed:
        return
    e = Embedder()
    e.see(m, n, "z")
    lhs = e.term(subst(m, {"x0": n}), "z")
    rhs = subst(e.term(m, "z"), {"x0": e.suspend(n)})
    assert eq.proc_eq(None, lhs, rhs) is not eq.Verdict.NO


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_translation_adds_no_free_names(seed):
    _, _, m = _fragment_term(seed)
    if m is None:
        return
    e = Embedder()
    e.see(m, "z")
    p = e.term(m, "z")
    assert free_names(p) <= free_names(m) | {"z"}


def test_fragment_programs_resolve():
    defs = [d.name for d, r, err in resolve(program("embed_example.sdp")) if err is None]
    assert "example" in defs
