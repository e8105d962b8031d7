"""Parsing shortcuts and generator strategies shared by the test modules."""

from __future__ import annotations

import random
from pathlib import Path

from hypothesis import strategies as st

from sdpi.core import FunType, Kind, Process, SessType, Term
from sdpi.meta import SyntaxGen
from sdpi.surface import parse_file, parse_node

PROGRAMS = Path(__file__).resolve().parents[1] / "programs"


def T(text, *free):
    return parse_node(text, Term, termvars=set(free))


def F(text, **tyvars):
    return parse_node(text, FunType, tyvars)


def S(text, **tyvars):
    return parse_node(text, SessType, tyvars)


def K(text):
    return parse_node(text, Kind)


def P(text, *free):
    return parse_node(text, Process, termvars=set(free))


def program(name):
    return parse_file(PROGRAMS / name)


SORTS = (Kind, FunType, SessType, Term, Process)


def syntax(sort, max_depth=6):
    """Arbitrary well-scoped nodes of ``sort``, driven by a drawn seed."""
    return st.builds(
        lambda seed, depth: SyntaxGen(random.Random(seed)).node(sort, depth),
        st.integers(0, 2**32 - 1),
        st.integers(0, max_depth),
    )


any_syntax = st.sampled_from(SORTS).flatmap(syntax)
