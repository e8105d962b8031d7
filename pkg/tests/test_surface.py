import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from helpers import PROGRAMS, P, S, T, any_syntax, program
from sdpi.core import (
    Base,
    Exists,
    Forall,
    Fwd,
    In,
    IfP,
    MonadVal,
    Nil,
    One,
    OutTerm,
    Plus,
    Spawn,
    SVar,
    Var,
    alpha_eq,
    numeral,
    sort_of,
)
from sdpi.meta import SyntaxGen, round_trip
from sdpi.surface import ParseError, ProcDef, TermDef, TypeDef, parse, parse_node, show

R_TEXT = (
    "recv z (x). case x { tt => send z <23 : exists y:Nat. 1>. end, "
    "ff => send z <tt : exists y:Bool. 1>. end }"
)


def test_forwarder():
    assert P("fwd d c") == Fwd("d", "c")
    assert show(Fwd("d", "c")) == "fwd d c"


def test_boolean_driven_process():
    r = P(R_TEXT)
    assert isinstance(r, In) and r.on == "z"
    body = r.body
    assert isinstance(body, IfP) and body.cond == Var(r.bind)
    assert body.then == OutTerm("z", numeral(23), Exists("y", Base("Nat"), One()), Nil())
    assert body.other == OutTerm("z", T("tt"), Exists("y", Base("Bool"), One()), Nil())


def test_lambda_requires_annotation():
    with pytest.raises(ParseError) as info:
        T(r"\x. x")
    assert (info.value.line, info.value.col) == (1, 3)
    assert ":" in info.value.expected


def test_internal_choice_prints_with_sugar():
    a = S(r"+{dec: Nat /\ simpleCounterT, done: 1}", simpleCounterT="sess")
    assert isinstance(a, Plus)
    assert a.branches[0][1] == Exists("_", Base("Nat"), SVar("simpleCounterT"))
    assert show(a) == r"+{dec: Nat /\ simpleCounterT, done: 1}"


def test_sugared_quantifiers():
    assert S(r"Nat /\ 1") == Exists("_", Base("Nat"), One())
    assert S("Bool => 1") == Forall("_", Base("Bool"), One())
    assert show(Forall("_", Base("Bool"), One())) == "Bool => 1"


def test_sugared_monad_value_and_spawn():
    m = T("{ c <- end }")
    assert m == MonadVal("c", Nil(), (), ())
    assert show(m) == "{ c <- end }"
    p = P("x <- m; fwd x c", "m")
    assert p == Spawn("x", Var("m"), (), (), Fwd("x", "c"))
    assert P("x <- m <- u ; d; fwd x c", "m").linear == ("d",)


def test_numerals_read_as_successors():
    assert T("2") == numeral(2)


def test_comments_are_ignored():
    src = parse("-- header\nproc p : { |- c:1 } = end -- trailing\n")
    assert [d.name for d in src.decls] == ["p"]


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("type A :: stype = 1\ntype A :: stype = 1", 2, 1),
        ("proc p : { |- c:&{} } = end", 1, 19),
        ("proc p : { |- c:1 } = fwd", 1, 26),
        ("\x00", 1, 1),
        ("def f : Bool = (((", 1, 19),
    ],
)
def test_errors_are_positioned(text, line, col):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert (info.value.line, info.value.col) == (line, col)
    assert str(info.value).startswith(f"{line}:{col}:")


def test_empty_file():
    assert parse("").decls == ()


@pytest.mark.parametrize("path", sorted(PROGRAMS.glob("*.sdp")), ids=lambda p: p.name)
def test_corpus_files_print_and_reparse(path):
    src = program(path.name)
    again = parse(show(src))
    assert [d.name for d in again.decls] == [d.name for d in src.decls]
    for a, b in zip(src.decls, again.decls):
        assert type(a) is type(b)
        if isinstance(a, TypeDef):
            assert alpha_eq(a.kind, b.kind) and alpha_eq(a.body, b.body)
        elif isinstance(a, TermDef):
            assert alpha_eq(a.type, b.type) and alpha_eq(a.body, b.body)
        else:
            assert isinstance(a, ProcDef)
            assert alpha_eq(a.signature, b.signature) and alpha_eq(a.body, b.body)


@settings(max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(any_syntax)
def test_round_trip(node):
    text = show(node)
    back = parse_node(text, sort_of(node))
    assert alpha_eq(node, back), text


def test_round_trip_sweep():
    """A fixed sweep over every sort and depth, independent of hypothesis."""
    failures = []
    sorts = ("Kind", "FunType", "SessType", "Term", "Process")
    from sdpi import core

    for i in range(500):
        g = SyntaxGen(random.Random(10_000 + i))
        node = g.node(getattr(core, sorts[i % 5]), i % 7)
        if not round_trip(node):
            failures.append(show(node))
    assert failures == []


TOKENS = list("{}()<>[]:;.,|=-\\/*&+!~ \nabcxyz01") + [
    "nu ", "recv ", "send ", "type ", "proc ", "def ", "pi ", "end", "|-", "<-", "=>", "->", "::", "--",
]


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(TOKENS), max_size=30))
def test_parser_never_panics(pieces):
    text = "".join(pieces)
    try:
        parse(text)
    except ParseError as e:
        assert e.line >= 1 and e.col >= 1


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(sorted(PROGRAMS.glob("*.sdp"))), st.integers(0, 10_000), st.integers(0, 2))
def test_parser_never_panics_on_damaged_programs(path, at, how):
    text = path.read_text(encoding="utf-8")
    at %= len(text)
    damaged = [text[:at] + text[at + 1:], text[:at] + "(" + text[at:], text[:at] + "." + text[at:]][how]
    try:
        parse(damaged)
    except ParseError as e:
        assert e.line >= 1 and e.col >= 1
