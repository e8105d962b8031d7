"""Concrete syntax: lexer, parser, printer and the ``.sdp`` file format.

The parser is sort directed.  Type expressions are read by one routine that
works out from the constructors used (and from the declared kinds of type
variables in scope) whether it has built a functional or a session type.

    type NAME :: KIND = TYPE
    def NAME : TYPE = TERM
    proc NAME : { u:B, ... ; d:A, ... |- c:A } = PROC
"""

from __future__ import annotations

import dataclasses
import re

from .core import (
    BOOL,
    NAT,
    Anno,
    App,
    AppK,
    AppT,
    AppTm,
    AppTy,
    Bang,
    Base,
    Case,
    Copy,
    Exists,
    FF,
    Forall,
    FunType,
    Fwd,
    IfF,
    IfP,
    IfS,
    IfT,
    In,
    Kind,
    Lam,
    LamK,
    LamT,
    LamTm,
    LamTy,
    Lolli,
    Monad,
    MonadVal,
    NatRecS,
    NatRecT,
    New,
    Nil,
    Node,
    One,
    OutFresh,
    OutTerm,
    Pi,
    PiTerm,
    PiType,
    Plus,
    Process,
    Repl,
    Select,
    SessType,
    Spawn,
    SType,
    Succ,
    SVar,
    TT,
    Tensor,
    Term,
    TVar,
    Type,
    Var,
    With,
    Zero,
    as_numeral,
    free_names,
    numeral,
)

# ---------------------------------------------------------------- declarations


@dataclasses.dataclass(frozen=True)
class TypeDef:
    name: str
    kind: Kind
    body: Node
    pos: tuple | None = None


@dataclasses.dataclass(frozen=True)
class TermDef:
    name: str
    type: FunType
    body: Term
    pos: tuple | None = None


@dataclasses.dataclass(frozen=True)
class ProcDef:
    name: str
    shared: tuple
    linear: tuple
    offered: tuple
    body: Process
    pos: tuple | None = None

    @property
    def signature(self) -> Monad:
        return Monad(self.shared, self.linear, self.offered)


@dataclasses.dataclass(frozen=True)
class SourceFile:
    decls: tuple
    path: str = "<input>"

    def lookup(self, name):
        for d in self.decls:
            if d.name == name:
                return d
        return None


class ParseError(Exception):
    def __init__(self, message, line, col, expected=()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(sorted(set(expected)))
        exp = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{col}: {message}{exp}")


# ---------------------------------------------------------------- lexer

KEYWORDS = {
    "type", "stype", "pi", "forall", "exists", "ifS", "natrecS", "ifT", "natrecT",
    "tt", "ff", "succ", "Bool", "Nat", "out", "nu", "recv", "send", "serve", "copy",
    "case", "fwd", "end", "def", "proc",
}
SYMBOLS = ["|-", "::", "||", "<-", "-o", "=>", "/\\", "&{", "+{", "\\", "(", ")",
           "{", "}", "[", "]", "<", ">", ",", ";", ":", ".", "!", "*", "="]

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>--[^\n]*)"
    r"|(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<sym>" + "|".join(re.escape(s) for s in SYMBOLS) + ")"
)


@dataclasses.dataclass(frozen=True)
class Token:
    kind: str  # 'ident', 'kw', 'num', 'sym', 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    line, start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind in ("ident", "num", "sym"):
            word = m.group()
            if kind == "ident" and word in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, word, line, i - start + 1))
        i = m.end()
    out.append(Token("eof", "", line, i - start + 1))
    return out


# ---------------------------------------------------------------- parser

F, S = "fun", "sess"  # the two sorts of type expressions


def kind_sort(k: Kind) -> str:
    while isinstance(k, (PiTerm, PiType)):
        k = k.body
    return S if isinstance(k, SType) else F


class Parser:
    def __init__(self, text, tyvars=None, termvars=()):
        self.toks = tokenize(text)
        self.i = 0
        # type variable -> sort, term variables (needed to read ``z``)
        self.tyvars = dict(tyvars or {})
        self.termvars = set(termvars)

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts) -> bool:
        t = self.tok
        return t.kind in ("kw", "sym") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def fail(self, message, expected=(), tok=None):
        t = tok or self.tok
        raise ParseError(message, t.line, t.col, expected)

    def expect(self, text) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.fail(f"unexpected {found!r}", [text])
        return self.advance()

    def ident(self, what="identifier") -> str:
        t = self.tok
        if t.kind != "ident":
            found = t.text or "end of input"
            self.fail(f"expected {what}, found {found!r}", [what])
        self.advance()
        return t.text

    def pos(self):
        return (self.tok.line, self.tok.col)

    def done(self):
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.text!r}", ["end of input"])

    # -- scopes

    def with_tyvar(self, name, sort, fn):
        old = self.tyvars.get(name)
        self.tyvars[name] = sort
        try:
            return fn()
        finally:
            if old is None:
                del self.tyvars[name]
            else:
                self.tyvars[name] = old

    def with_termvars(self, names, fn):
        added = [n for n in names if n not in self.termvars]
        self.termvars.update(added)
        try:
            return fn()
        finally:
            self.termvars.difference_update(added)

    # -- kinds

    def kind(self) -> Kind:
        p = self.pos()
        if self.at("type"):
            self.advance()
            return Type(pos=p)
        if self.at("stype"):
            self.advance()
            return SType(pos=p)
        if self.at("pi"):
            self.advance()
            x = self.ident("binder")
            if self.at("::"):
                self.advance()
                dom = self.kind()
                self.expect(".")
                body = self.with_tyvar(x, kind_sort(dom), self.kind)
                return PiType(x, dom, body, pos=p)
            self.expect(":")
            dom = self.fun_type()
            self.expect(".")
            body = self.with_termvars([x], self.kind)
            return PiTerm(x, dom, body, pos=p)
        if self.at("("):
            self.advance()
            k = self.kind()
            self.expect(")")
            return k
        self.fail("expected a kind", ["type", "stype", "pi", "("])

    # -- type expressions

    def fun_type(self) -> FunType:
        t = self.type_expr()
        if not isinstance(t, FunType):
            self.fail("expected a functional type, found a session type", tok=self._last_start)
        return t

    def sess_type(self) -> SessType:
        t = self.type_expr()
        if not isinstance(t, SessType):
            self.fail("expected a session type, found a functional type", tok=self._last_start)
        return t

    def type_expr(self) -> Node:
        start = self.tok
        t = self._type0()
        self._last_start = start
        return t

    def _need(self, node, cls, tok, what):
        if not isinstance(node, cls):
            self.fail(f"expected {what}", tok=tok)
        return node

    def _type0(self) -> Node:
        p = self.pos()
        if self.at("pi"):
            self.advance()
            x = self.ident("binder")
            self.expect(":")
            dom = self.fun_type()
            self.expect(".")
            tok = self.tok
            cod = self.with_termvars([x], self._type0)
            return Pi(x, dom, self._need(cod, FunType, tok, "a functional type"), pos=p)
        if self.at("forall", "exists"):
            cls = Forall if self.advance().text == "forall" else Exists
            x = self.ident("binder")
            self.expect(":")
            dom = self.fun_type()
            self.expect(".")
            tok = self.tok
            body = self.with_termvars([x], self._type0)
            return cls(x, dom, self._need(body, SessType, tok, "a session type"), pos=p)
        if self.at("\\"):
            self.advance()
            x = self.ident("binder")
            if self.at("::"):
                self.advance()
                dom = self.kind()
                self.expect(".")
                body = self.with_tyvar(x, kind_sort(dom), self._type0)
                cls = LamK if isinstance(body, FunType) else LamTy
                return cls(x, dom, body, pos=p)
            if not self.at(":"):
                self.fail("lambda requires a domain annotation", [":", "::"])
            self.advance()
            dom = self.fun_type()
            self.expect(".")
            body = self.with_termvars([x], self._type0)
            cls = LamT if isinstance(body, FunType) else LamTm
            return cls(x, dom, body, pos=p)
        tok = self.tok
        left = self._tensor()
        if self.at("-o"):
            self.advance()
            self._need(left, SessType, tok, "a session type on the left of -o")
            tok2 = self.tok
            right = self._type0()
            return Lolli(left, self._need(right, SessType, tok2, "a session type"), pos=p)
        return left

    def _tensor(self) -> Node:
        p = self.pos()
        tok = self.tok
        left = self._unary()
        if self.at("*"):
            self.advance()
            self._need(left, SessType, tok, "a session type on the left of *")
            tok2 = self.tok
            right = self._tensor()
            return Tensor(left, self._need(right, SessType, tok2, "a session type"), pos=p)
        return left

    def _unary(self) -> Node:
        p = self.pos()
        if self.at("!"):
            self.advance()
            tok = self.tok
            body = self._unary()
            return Bang(self._need(body, SessType, tok, "a session type"), pos=p)
        tok = self.tok
        left = self._type_app()
        if self.at("/\\", "=>"):
            cls = Exists if self.advance().text == "/\\" else Forall
            self._need(left, FunType, tok, "a functional type on the left of /\\ or =>")
            tok2 = self.tok
            body = self._type0()
            return cls("_", left, self._need(body, SessType, tok2, "a session type"), pos=p)
        return left

    def _type_app(self) -> Node:
        p = self.pos()
        head = self._type_atom()
        while self.at("[", "<"):
            if self.advance().text == "[":
                arg = self.term()
                self.expect("]")
                cls = AppT if isinstance(head, FunType) else AppTm
            else:
                arg = self.type_expr()
                self.expect(">")
                cls = AppK if isinstance(head, FunType) else AppTy
            head = cls(head, arg, pos=p)
        return head

    def _type_atom(self) -> Node:
        p = self.pos()
        t = self.tok
        if t.kind == "num" and t.text == "1":
            self.advance()
            return One(pos=p)
        if t.kind == "ident":
            self.advance()
            sort = self.tyvars.get(t.text)
            if sort is None:
                self.fail(f"unknown type name {t.text!r}", tok=t)
            return (TVar if sort == F else SVar)(t.text, pos=p)
        if self.at("Bool", "Nat"):
            self.advance()
            return Base(t.text, pos=p)
        if self.at("("):
            self.advance()
            inner = self.type_expr()
            self.expect(")")
            return inner
        if self.at("&{", "+{"):
            cls = With if self.advance().text == "&{" else Plus
            branches = self._labelled(lambda: self.sess_type(), ":")
            return cls(branches, pos=p)
        if self.at("{"):
            return self._monad_type()
        if self.at("ifS", "ifT"):
            kw = self.advance().text
            cond = self.term_atom()
            tok = self.tok
            a = self._type_atom()
            b = self._type_atom()
            if kw == "ifS":
                self._need(a, SessType, tok, "session types in ifS")
                self._need(b, SessType, tok, "session types in ifS")
                return IfS(cond, a, b, pos=p)
            self._need(a, FunType, tok, "functional types in ifT")
            self._need(b, FunType, tok, "functional types in ifT")
            return IfF(cond, a, b, pos=p)
        if self.at("natrecS"):
            self.advance()
            target = self.term_atom()
            tok = self.tok
            zero = self._need(self._type_atom(), SessType, tok, "a session type")
            self.expect("(")
            n = self.ident("binder")
            self.expect(",")
            r = self.ident("binder")
            self.expect("=>")
            tok = self.tok
            succ = self.with_termvars([n], lambda: self.with_tyvar(r, S, self._type0))
            self.expect(")")
            return NatRecS(target, zero, n, r, self._need(succ, SessType, tok, "a session type"), pos=p)
        self.fail(
            "expected a type",
            ["identifier", "1", "Bool", "Nat", "(", "{", "&{", "+{", "!", "pi", "forall",
             "exists", "\\", "ifS", "ifT", "natrecS"],
        )

    def _labelled(self, item, sep):
        out, seen = [], set()
        if self.at("}"):
            self.fail("a label set needs at least one branch", ["label"])
        while True:
            t = self.tok
            lab = self.ident("label")
            if lab in seen:
                self.fail(f"duplicate label {lab!r}", tok=t)
            seen.add(lab)
            self.expect(sep)
            out.append((lab, item()))
            if self.at(","):
                self.advance()
                continue
            self.expect("}")
            return tuple(out)

    def _chan_decls(self, stops):
        out = []
        if self.at(*stops):
            return out
        while True:
            name = self.ident("channel")
            self.expect(":")
            out.append((name, self.sess_type()))
            if not self.at(","):
                return out
            self.advance()

    def _monad_type(self) -> Monad:
        p = self.pos()
        self.expect("{")
        first = self._chan_decls([";", "|-"])
        if self.at(";"):
            self.advance()
            shared, linear = first, self._chan_decls(["|-"])
        else:
            shared, linear = [], first
        self.expect("|-")
        c = self.ident("channel")
        self.expect(":")
        a = self.sess_type()
        self.expect("}")
        names = [n for n, _ in shared] + [n for n, _ in linear] + [c]
        if len(set(names)) != len(names):
            self.fail("channel names in a monad type must be distinct", tok=self.toks[self.i - 1])
        return Monad(tuple(shared), tuple(linear), (c, a), pos=p)

    # -- terms

    def term(self) -> Term:
        p = self.pos()
        if self.at("\\"):
            self.advance()
            x = self.ident("binder")
            if not self.at(":"):
                self.fail("lambda requires a domain annotation", [":"])
            self.advance()
            dom = self.fun_type()
            self.expect(".")
            body = self.with_termvars([x], self.term)
            return Lam(x, dom, body, pos=p)
        head = self._term_app_item()
        while self._starts_term_atom():
            head = App(head, self._term_app_item(), pos=p)
        return head

    def _starts_term_atom(self) -> bool:
        t = self.tok
        if t.kind in ("ident", "num"):
            return True
        return self.at("(", "{", "tt", "ff", "succ", "ifT", "natrecT")

    def _term_app_item(self) -> Term:
        p = self.pos()
        if self.at("succ"):
            self.advance()
            return Succ(self._term_app_item(), pos=p)
        if self.at("ifT"):
            self.advance()
            c = self.term_atom()
            a = self.term_atom()
            b = self.term_atom()
            return IfT(c, a, b, pos=p)
        if self.at("natrecT"):
            self.advance()
            motive = self._fun_type_atom()
            target = self.term_atom()
            zero = self.term_atom()
            self.expect("(")
            n = self.ident("binder")
            self.expect(",")
            r = self.ident("binder")
            self.expect("=>")
            succ = self.with_termvars([n, r], self.term)
            self.expect(")")
            return NatRecT(motive, target, zero, n, r, succ, pos=p)
        return self.term_atom()

    def _fun_type_atom(self) -> FunType:
        tok = self.tok
        t = self._type_atom()
        return self._need(t, FunType, tok, "a functional type")

    def term_atom(self) -> Term:
        p = self.pos()
        t = self.tok
        if t.kind == "ident":
            self.advance()
            if t.text == "z" and "z" not in self.termvars:
                return Zero(pos=p)
            return Var(t.text, pos=p)
        if t.kind == "num":
            self.advance()
            return dataclasses.replace(numeral(int(t.text)), pos=p)
        if self.at("tt"):
            self.advance()
            return TT(pos=p)
        if self.at("ff"):
            self.advance()
            return FF(pos=p)
        if self.at("succ", "ifT", "natrecT"):
            return self._term_app_item()
        if self.at("("):
            self.advance()
            inner = self.term()
            if self.at(":"):
                self.advance()
                ty = self.fun_type()
                self.expect(")")
                return Anno(inner, ty, pos=p)
            self.expect(")")
            return inner
        if self.at("{"):
            return self._monad_value()
        self.fail("expected a term", ["identifier", "number", "tt", "ff", "succ", "(", "{", "\\"])

    def _names(self, stops):
        out = []
        if self.at(*stops):
            return out
        while True:
            out.append(self.ident("channel"))
            if not self.at(","):
                return out
            self.advance()

    def _monad_value(self) -> MonadVal:
        p = self.pos()
        self.expect("{")
        c = self.ident("channel")
        self.expect("<-")
        body = self.process()
        shared, linear = [], []
        if self.at("<-"):
            self.advance()
            shared = self._names([";", "}"])
            if self.at(";"):
                self.advance()
                linear = self._names(["}"])
        self.expect("}")
        names = [c, *shared, *linear]
        if len(set(names)) != len(names):
            self.fail("channel names of a monadic value must be distinct", tok=self.toks[self.i - 1])
        return MonadVal(c, body, tuple(shared), tuple(linear), pos=p)

    # -- processes

    def process(self) -> Process:
        p = self.pos()
        t = self.tok
        if self.at("end"):
            self.advance()
            return Nil(pos=p)
        if self.at("fwd"):
            self.advance()
            d = self.ident("channel")
            c = self.ident("channel")
            return Fwd(d, c, pos=p)
        if self.at("out", "copy", "serve"):
            kw = self.advance().text
            c = self.ident("channel")
            self.expect("(")
            x = self.ident("channel")
            self.expect(")")
            self.expect(".")
            if kw == "copy":
                return Copy(c, x, self.process(), pos=p)
            if kw == "serve":
                return Repl(c, x, self.process(), pos=p)
            left, right = self._pair()
            return OutFresh(c, x, left, right, pos=p)
        if self.at("nu"):
            self.advance()
            x = self.ident("channel")
            anno = None
            if self.at(":"):
                self.advance()
                anno = self.sess_type()
            self.expect(".")
            left, right = self._pair()
            return New(x, left, right, anno, pos=p)
        if self.at("recv"):
            self.advance()
            c = self.ident("channel")
            self.expect("(")
            x = self.ident("binder")
            anno = None
            if self.at(":"):
                self.advance()
                anno = self.type_expr()
            self.expect(")")
            self.expect(".")
            body = self.with_termvars([x], self.process)
            return In(c, x, body, anno, pos=p)
        if self.at("send"):
            self.advance()
            c = self.ident("channel")
            self.expect("<")
            m = self.term()
            anno = None
            if self.at(":"):
                self.advance()
                anno = self.sess_type()
            self.expect(">")
            self.expect(".")
            return OutTerm(c, m, anno, self.process(), pos=p)
        if self.at("case"):
            self.advance()
            if self.tok.kind == "ident":
                # channels are plain names, even ``z``
                p0 = self.pos()
                scrut = Var(self.advance().text, pos=p0)
            else:
                scrut = self.term_atom()
            self.expect("{")
            if self.at("tt", "ff"):
                return self._bool_case(scrut, p)
            if not isinstance(scrut, Var):
                self.fail("expected a channel to branch on", ["identifier"], tok=t)
            branches = self._labelled(self.process, "=>")
            return Case(scrut.name, branches, pos=p)
        if self.at("("):
            self.advance()
            inner = self.process()
            self.expect(")")
            return inner
        if t.kind == "ident":
            nxt = self.peek()
            if nxt.kind == "sym" and nxt.text == ".":
                self.advance()
                self.advance()
                lab = self.ident("label")
                self.expect(";")
                return Select(t.text, lab, self.process(), pos=p)
            if nxt.kind == "sym" and nxt.text == "<-":
                self.advance()
                self.advance()
                m = self.term()
                shared, linear = [], []
                if self.at("<-"):
                    self.advance()
                    shared = self._names([";"])
                    self.expect(";")
                    linear = self._names([";"])
                self.expect(";")
                return Spawn(t.text, m, tuple(shared), tuple(linear), self.process(), pos=p)
        self.fail(
            "expected a process",
            ["end", "fwd", "out", "copy", "serve", "nu", "recv", "send", "case", "(", "identifier"],
        )

    def _pair(self):
        self.expect("(")
        left = self.process()
        self.expect("||")
        right = self.process()
        self.expect(")")
        return left, right

    def _bool_case(self, cond, p):
        arms = {}
        while True:
            t = self.tok
            if not self.at("tt", "ff"):
                self.fail("expected tt or ff", ["tt", "ff"])
            self.advance()
            if t.text in arms:
                self.fail(f"duplicate branch {t.text}", tok=t)
            self.expect("=>")
            arms[t.text] = self.process()
            if self.at(","):
                self.advance()
                continue
            self.expect("}")
            break
        if set(arms) != {"tt", "ff"}:
            self.fail("a boolean case needs both tt and ff branches", tok=self.toks[self.i - 1])
        return IfP(cond, arms["tt"], arms["ff"], pos=p)

    # -- files

    def source_file(self, path="<input>") -> SourceFile:
        decls, seen = [], set()
        while self.tok.kind != "eof":
            p = self.pos()
            t = self.tok
            if self.at("type"):
                self.advance()
                name = self.ident("definition name")
                self.expect("::")
                k = self.kind()
                self.expect("=")
                body = self.type_expr()
                d = TypeDef(name, k, body, pos=p)
                self.tyvars[name] = kind_sort(k)
            elif self.at("def"):
                self.advance()
                name = self.ident("definition name")
                self.expect(":")
                ty = self.fun_type()
                self.expect("=")
                d = TermDef(name, ty, self.term(), pos=p)
                self.termvars.add(name)
            elif self.at("proc"):
                self.advance()
                name = self.ident("definition name")
                self.expect(":")
                sig = self._monad_type()
                self.expect("=")
                d = ProcDef(name, sig.shared, sig.linear, sig.offered, self.process(), pos=p)
            else:
                self.fail("expected a declaration", ["type", "def", "proc"])
            if d.name in seen:
                raise ParseError(f"{d.name!r} is defined twice", t.line, t.col)
            seen.add(d.name)
            decls.append(d)
        return SourceFile(tuple(decls), path)


def parse(text: str, path: str = "<input>") -> SourceFile:
    return Parser(text).source_file(path)


def parse_file(path) -> SourceFile:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), str(path))


_ENTRY = {
    Kind: Parser.kind,
    FunType: Parser.fun_type,
    SessType: Parser.sess_type,
    Term: Parser.term,
    Process: Parser.process,
}


def parse_node(text: str, sort=Term, tyvars=None, termvars=()) -> Node:
    """Parse a single node of the given sort.

    ``tyvars`` maps free type variables to their sort ('fun' or 'sess').
    """
    p = Parser(text, tyvars, termvars)
    node = _ENTRY[sort](p)
    p.done()
    return node


def scope_of(src: SourceFile) -> tuple[dict, set]:
    tyvars = {d.name: kind_sort(d.kind) for d in src.decls if isinstance(d, TypeDef)}
    termvars = {d.name for d in src.decls if isinstance(d, TermDef)}
    return tyvars, termvars


# ---------------------------------------------------------------- printer


def show(node) -> str:
    if isinstance(node, Kind):
        return _kind(node)
    if isinstance(node, (FunType, SessType)):
        return _type(node, 0)
    if isinstance(node, Term):
        return _term(node, 0)
    if isinstance(node, Process):
        return _proc(node)
    if isinstance(node, (TypeDef, TermDef, ProcDef)):
        return show_decl(node)
    if isinstance(node, SourceFile):
        return "\n\n".join(show_decl(d) for d in node.decls) + "\n"
    raise TypeError(f"cannot print {node!r}")


def show_decl(d) -> str:
    if isinstance(d, TypeDef):
        return f"type {d.name} :: {_kind(d.kind)} =\n  {_type(d.body, 0)}"
    if isinstance(d, TermDef):
        return f"def {d.name} : {_type(d.type, 0)} =\n  {_term(d.body, 0)}"
    return f"proc {d.name} : {_type(d.signature, 0)} =\n  {_proc(d.body)}"


def _kind(k) -> str:
    if isinstance(k, Type):
        return "type"
    if isinstance(k, SType):
        return "stype"
    if isinstance(k, PiTerm):
        return f"pi {k.x}:{_type(k.dom, 0)}. {_kind(k.body)}"
    return f"pi {k.t}::{_kind(k.dom)}. {_kind(k.body)}"


def _paren(s, need):
    return f"({s})" if need else s


# type levels: 0 binders and -o, 1 tensor, 2 unary, 3 application, 4 atom
def _type(t, lvl) -> str:
    if isinstance(t, (Pi, Forall, Exists, LamT, LamTm, LamK, LamTy)):
        return _paren(_binder_type(t), lvl > 0)
    if isinstance(t, Lolli):
        return _paren(f"{_type(t.left, 1)} -o {_type(t.right, 0)}", lvl > 0)
    if isinstance(t, Tensor):
        return _paren(f"{_type(t.left, 2)} * {_type(t.right, 1)}", lvl > 1)
    if isinstance(t, Bang):
        return _paren(f"!{_type(t.body, 2)}", lvl > 2)
    if isinstance(t, (AppT, AppTm)):
        return _paren(f"{_type(t.fn, 3)} [{_term(t.arg, 0)}]", lvl > 3)
    if isinstance(t, (AppK, AppTy)):
        return _paren(f"{_type(t.fn, 3)} <{_type(t.arg, 0)}>", lvl > 3)
    if isinstance(t, (IfS, IfF)):
        kw = "ifS" if isinstance(t, IfS) else "ifT"
        return _paren(f"{kw} {_term(t.cond, 2)} {_type(t.then, 4)} {_type(t.other, 4)}", lvl > 3)
    if isinstance(t, NatRecS):
        return _paren(
            f"natrecS {_term(t.target, 2)} {_type(t.zero, 4)} ({t.n}, {t.r} => {_type(t.succ, 0)})",
            lvl > 3,
        )
    if isinstance(t, One):
        return "1"
    if isinstance(t, (TVar, SVar)):
        return t.name
    if isinstance(t, Base):
        return t.name
    if isinstance(t, (With, Plus)):
        sym = "&{" if isinstance(t, With) else "+{"
        return sym + ", ".join(f"{lab}: {_type(a, 0)}" for lab, a in t.branches) + "}"
    if isinstance(t, Monad):
        return _monad_type(t)
    raise TypeError(f"not a type: {t!r}")


def _binder_type(t) -> str:
    if isinstance(t, (Forall, Exists)) and t.x not in free_names(t.body):
        op = "/\\" if isinstance(t, Exists) else "=>"
        return f"{_type(t.dom, 3)} {op} {_type(t.body, 0)}"
    if isinstance(t, (LamK, LamTy)):
        return f"\\{t.t}::{_kind(t.dom)}. {_type(t.body, 0)}"
    kw = {Pi: "pi ", Forall: "forall ", Exists: "exists "}.get(type(t), "\\")
    body = t.cod if isinstance(t, Pi) else t.body
    return f"{kw}{t.x}:{_type(t.dom, 0)}. {_type(body, 0)}"


def _monad_type(t: Monad) -> str:
    def decls(xs):
        return ", ".join(f"{n}:{_type(a, 0)}" for n, a in xs)

    c, a = t.offered
    head = ""
    if t.shared:
        head = f"{decls(t.shared)} ; {decls(t.linear)} "
    elif t.linear:
        head = f"{decls(t.linear)} "
    return "{ " + head + f"|- {c}:{_type(a, 0)} }}"


# term levels: 0 lambda, 1 application, 2 atom
def _term(m, lvl) -> str:
    if isinstance(m, Lam):
        return _paren(f"\\{m.x}:{_type(m.dom, 0)}. {_term(m.body, 0)}", lvl > 0)
    if isinstance(m, App):
        return _paren(f"{_term(m.fn, 1)} {_term(m.arg, 2)}", lvl > 1)
    if isinstance(m, Succ):
        return _paren(f"succ {_term(m.pred, 2)}", lvl > 1)
    if isinstance(m, IfT):
        return _paren(f"ifT {_term(m.cond, 2)} {_term(m.then, 2)} {_term(m.other, 2)}", lvl > 1)
    if isinstance(m, NatRecT):
        return _paren(
            f"natrecT {_type(m.motive, 4)} {_term(m.target, 2)} {_term(m.zero, 2)} "
            f"({m.n}, {m.r} => {_term(m.succ, 0)})",
            lvl > 1,
        )
    if isinstance(m, Var):
        return m.name
    if isinstance(m, TT):
        return "tt"
    if isinstance(m, FF):
        return "ff"
    if isinstance(m, Zero):
        return "z"
    if isinstance(m, Anno):
        return f"({_term(m.term, 0)} : {_type(m.type, 0)})"
    if isinstance(m, MonadVal):
        lists = ""
        if m.shared or m.linear:
            lists = f" <- {', '.join(m.shared)} ; {', '.join(m.linear)}"
        return "{ " + f"{m.offered} <- {_proc(m.body)}{lists}" + " }"
    raise TypeError(f"not a term: {m!r}")


def show_numeral(m: Term) -> str:
    n = as_numeral(m)
    return str(n) if n is not None else _term(m, 0)


def _proc(p) -> str:
    if isinstance(p, Nil):
        return "end"
    if isinstance(p, Fwd):
        return f"fwd {p.src} {p.dst}"
    if isinstance(p, OutFresh):
        return f"out {p.on} ({p.bind}). ({_proc(p.left)} || {_proc(p.right)})"
    if isinstance(p, New):
        anno = f" : {_type(p.anno, 0)}" if p.anno is not None else ""
        return f"nu {p.bind}{anno}. ({_proc(p.left)} || {_proc(p.right)})"
    if isinstance(p, In):
        anno = f" : {_type(p.anno, 0)}" if p.anno is not None else ""
        return f"recv {p.on} ({p.bind}{anno}). {_proc(p.body)}"
    if isinstance(p, OutTerm):
        anno = f" : {_type(p.anno, 0)}" if p.anno is not None else ""
        return f"send {p.on} <{_term(p.payload, 0)}{anno}>. {_proc(p.body)}"
    if isinstance(p, Repl):
        return f"serve {p.on} ({p.bind}). {_proc(p.body)}"
    if isinstance(p, Copy):
        return f"copy {p.on} ({p.bind}). {_proc(p.body)}"
    if isinstance(p, Case):
        arms = ", ".join(f"{lab} => {_proc(q)}" for lab, q in p.branches)
        return f"case {p.on} {{ {arms} }}"
    if isinstance(p, IfP):
        # a bare identifier after `case` names a channel or variable, so the
        # literal zero needs parentheses
        cond = "(z)" if isinstance(p.cond, Zero) else _term(p.cond, 2)
        return f"case {cond} {{ tt => {_proc(p.then)}, ff => {_proc(p.other)} }}"
    if isinstance(p, Select):
        return f"{p.on}.{p.label}; {_proc(p.body)}"
    if isinstance(p, Spawn):
        lists = ""
        if p.shared or p.linear:
            lists = f" <- {', '.join(p.shared)} ; {', '.join(p.linear)}"
        return f"{p.bind} <- {_term(p.monadic, 1)}{lists}; {_proc(p.cont)}"
    raise TypeError(f"not a process: {p!r}")
