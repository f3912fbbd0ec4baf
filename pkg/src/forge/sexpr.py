"""S-expression reader and printer for terms and formulas.

Grammar
  term     ::= 0 | 1 | <ident> | (+ t t) | (* t t) | (len <Ident>)
             | (seq t t) | (seqlen t)
  formula  ::= (= t t) | (leq t t) | (seteq X Y) | (in t X)
             | (and f f) | (or f f) | (not f) | (imp f f)
             | (exN x t f) | (alN x t f) | (exS X t f) | (alS X t f)

Number variables start lowercase, string variables start uppercase; `;`
comments run to end of line.  Connectives written with more than two
arguments fold right, so (and a b c) reads as (and a (and b c)); `memb` is
accepted as an alias for `in`.

Parsing alpha-renames binders so no name is bound twice anywhere in the
result: rebinding a name under itself is rejected, a repeat in a sibling
branch gets a numeric suffix.  Substitution downstream then never needs to
rename on its own.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import DuplicateBindingError, ParseError, SortMismatchError
from .formulas import (AlN, AlS, And, EqNum, EqStr, ExN, ExS, Formula, Imp,
                       Len, Leq, Memb, Not, NumTerm, NVar, One, Or, Plus,
                       SeqAt, SeqLen, Times, Zero, is_num_name, is_str_name)

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


@dataclass(frozen=True, slots=True)
class _Tok:
    text: str
    line: int
    col: int


@dataclass(frozen=True, slots=True)
class _Node:
    """Atom (text set) or list (items set), tagged with its source position."""

    text: str | None
    items: tuple["_Node", ...] | None
    line: int
    col: int


def _tokenize(source: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == ";":
            while i < n and source[i] != "\n":
                i += 1
        elif ch in "()":
            toks.append(_Tok(ch, line, col))
            i += 1
            col += 1
        else:
            start = i
            start_col = col
            while i < n and source[i] not in " \t\r\n();":
                i += 1
                col += 1
            toks.append(_Tok(source[start:i], line, start_col))
    return toks


def _read(toks: list[_Tok], at: int) -> tuple[_Node, int]:
    if at >= len(toks):
        last = toks[-1] if toks else _Tok("", 1, 1)
        raise ParseError("unexpected end of input", last.line, last.col + len(last.text))
    tok = toks[at]
    if tok.text == ")":
        raise ParseError("unexpected )", tok.line, tok.col)
    if tok.text == "(":
        items: list[_Node] = []
        at += 1
        while True:
            if at >= len(toks):
                raise ParseError("missing )", tok.line, tok.col)
            if toks[at].text == ")":
                return _Node(None, tuple(items), tok.line, tok.col), at + 1
            node, at = _read(toks, at)
            items.append(node)
    return _Node(tok.text, None, tok.line, tok.col), at + 1


def _read_one(source: str) -> _Node:
    toks = _tokenize(source)
    if not toks:
        raise ParseError("empty input", 1, 1)
    node, at = _read(toks, 0)
    if at != len(toks):
        extra = toks[at]
        raise ParseError("trailing input after expression", extra.line, extra.col)
    return node


def _ident(node: _Node, want: str) -> str:
    if node.text is None or not _IDENT.match(node.text):
        raise ParseError(f"expected {want} name", node.line, node.col)
    return node.text


def _num_name(node: _Node) -> str:
    name = _ident(node, "number-variable")
    if not is_num_name(name):
        raise SortMismatchError(
            f"{node.line}:{node.col}: {name} is a string name in number position"
        )
    return name


def _str_name(node: _Node) -> str:
    name = _ident(node, "string-variable")
    if not is_str_name(name):
        raise SortMismatchError(
            f"{node.line}:{node.col}: {name} is a number name in string position"
        )
    return name


class _Binders:
    """Allocates parse-wide unique binder names, left to right."""

    def __init__(self, reserved: set[str]):
        self.reserved = set(reserved)
        self.taken: set[str] = set()

    def assign(self, name: str) -> str:
        if name not in self.taken:
            self.taken.add(name)
            return name
        k = 2
        while f"{name}_{k}" in self.taken or f"{name}_{k}" in self.reserved:
            k += 1
        fresh = f"{name}_{k}"
        self.taken.add(fresh)
        return fresh


def _parse_term(node: _Node, env: dict[str, str]) -> NumTerm:
    if node.text is not None:
        if node.text == "0":
            return Zero()
        if node.text == "1":
            return One()
        name = _num_name(node)
        return NVar(env.get(name, name))
    items = node.items
    assert items is not None
    if not items or items[0].text is None:
        raise ParseError("expected a term operator", node.line, node.col)
    op = items[0].text
    if op == "+" or op == "*":
        if len(items) != 3:
            raise ParseError(f"({op} t t) takes two arguments", node.line, node.col)
        make = Plus if op == "+" else Times
        return make(_parse_term(items[1], env), _parse_term(items[2], env))
    if op == "len":
        if len(items) != 2:
            raise ParseError("(len X) takes one argument", node.line, node.col)
        name = _str_name(items[1])
        return Len(env.get(name, name))
    if op == "seq":
        if len(items) != 3:
            raise ParseError("(seq t t) takes two arguments", node.line, node.col)
        return SeqAt(_parse_term(items[1], env), _parse_term(items[2], env))
    if op == "seqlen":
        if len(items) != 2:
            raise ParseError("(seqlen t) takes one argument", node.line, node.col)
        return SeqLen(_parse_term(items[1], env))
    raise ParseError(f"unknown term operator {op}", items[0].line, items[0].col)


_QUANT = {"exN": (ExN, _num_name), "alN": (AlN, _num_name),
          "exS": (ExS, _str_name), "alS": (AlS, _str_name)}


def _parse_formula(node: _Node, env: dict[str, str], binders: _Binders) -> Formula:
    if node.text is not None:
        raise ParseError("expected a formula, got an atom", node.line, node.col)
    items = node.items
    assert items is not None
    if not items or items[0].text is None:
        raise ParseError("expected a formula operator", node.line, node.col)
    op = items[0].text
    args = items[1:]

    if op in ("=", "leq"):
        if len(args) != 2:
            raise ParseError(f"({op} t t) takes two arguments", node.line, node.col)
        make = EqNum if op == "=" else Leq
        return make(_parse_term(args[0], env), _parse_term(args[1], env))
    if op == "seteq":
        if len(args) != 2:
            raise ParseError("(seteq X Y) takes two arguments", node.line, node.col)
        a = _str_name(args[0])
        b = _str_name(args[1])
        return EqStr(env.get(a, a), env.get(b, b))
    if op in ("in", "memb"):
        if len(args) != 2:
            raise ParseError("(in t X) takes two arguments", node.line, node.col)
        name = _str_name(args[1])
        return Memb(_parse_term(args[0], env), env.get(name, name))
    if op == "not":
        if len(args) != 1:
            raise ParseError("(not f) takes one argument", node.line, node.col)
        return Not(_parse_formula(args[0], env, binders))
    if op in ("and", "or", "imp"):
        if len(args) < 2:
            raise ParseError(f"({op} f f ...) takes at least two arguments", node.line, node.col)
        make = {"and": And, "or": Or, "imp": Imp}[op]
        parts = [_parse_formula(a, env, binders) for a in args]
        acc = parts[-1]
        for part in reversed(parts[:-1]):
            acc = make(part, acc)
        return acc
    if op in _QUANT:
        if len(args) != 3:
            raise ParseError(f"({op} v t f) takes three arguments", node.line, node.col)
        make, name_of = _QUANT[op]
        source_name = name_of(args[0])
        if source_name in env:
            raise DuplicateBindingError(
                f"{source_name} is already bound here", args[0].line, args[0].col
            )
        bound = _parse_term(args[1], env)
        fresh = binders.assign(source_name)
        env[source_name] = fresh
        try:
            body = _parse_formula(args[2], env, binders)
        finally:
            del env[source_name]
        return make(fresh, bound, body)
    raise ParseError(f"unknown formula operator {op}", items[0].line, items[0].col)


def parse_formula(source: str) -> Formula:
    """Parse one formula; see the module docstring for the grammar."""
    node = _read_one(source)
    reserved = {t.text for t in _tokenize(source) if t.text not in ("(", ")")}
    return _parse_formula(node, {}, _Binders(reserved))


def parse_term(source: str) -> NumTerm:
    """Parse one closed or open term."""
    return _parse_term(_read_one(source), {})


# --- printing ---


def print_term(t: NumTerm) -> str:
    tt = type(t)
    if tt is Zero:
        return "0"
    if tt is One:
        return "1"
    if tt is NVar:
        return t.name
    if tt is Plus:
        return f"(+ {print_term(t.left)} {print_term(t.right)})"
    if tt is Times:
        return f"(* {print_term(t.left)} {print_term(t.right)})"
    if tt is Len:
        return f"(len {t.svar})"
    if tt is SeqAt:
        return f"(seq {print_term(t.seq)} {print_term(t.index)})"
    if tt is SeqLen:
        return f"(seqlen {print_term(t.seq)})"
    raise TypeError(f"not a term: {t!r}")


_QUANT_NAMES = {ExN: "exN", AlN: "alN", ExS: "exS", AlS: "alS"}


def print_formula(f: Formula) -> str:
    tf = type(f)
    if tf is EqNum:
        return f"(= {print_term(f.left)} {print_term(f.right)})"
    if tf is Leq:
        return f"(leq {print_term(f.left)} {print_term(f.right)})"
    if tf is EqStr:
        return f"(seteq {f.left} {f.right})"
    if tf is Memb:
        return f"(in {print_term(f.index)} {f.svar})"
    if tf is And:
        return f"(and {print_formula(f.left)} {print_formula(f.right)})"
    if tf is Or:
        return f"(or {print_formula(f.left)} {print_formula(f.right)})"
    if tf is Not:
        return f"(not {print_formula(f.body)})"
    if tf is Imp:
        return f"(imp {print_formula(f.left)} {print_formula(f.right)})"
    if tf in _QUANT_NAMES:
        name = _QUANT_NAMES[tf]
        return f"({name} {f.var} {print_term(f.bound)} {print_formula(f.body)})"
    raise TypeError(f"not a formula: {f!r}")
