"""AST for bounded two-sorted formulas plus structural operations.

Terms are number-valued: constants zero and one, number variables, sum,
product, the length of a string variable, and two sequence primitives over
number codes (element access and element count).  The sequence primitives
stand in for a fixed definable coding of short sequences by numbers, which
the rest of the toolchain treats as part of the base language.

Formulas: number equality and order, string extensional equality, string
membership X(t), the connectives and/or/not/imp, and bounded quantifiers of
both sorts.  Every quantifier carries an inclusive bound term.

Naming discipline: number variables start with a lowercase letter, string
variables with an uppercase letter.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CaptureError


# --- terms ---


class NumTerm:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Zero(NumTerm):
    pass


@dataclass(frozen=True, slots=True)
class One(NumTerm):
    pass


@dataclass(frozen=True, slots=True)
class NVar(NumTerm):
    name: str


@dataclass(frozen=True, slots=True)
class Plus(NumTerm):
    left: NumTerm
    right: NumTerm


@dataclass(frozen=True, slots=True)
class Times(NumTerm):
    left: NumTerm
    right: NumTerm


@dataclass(frozen=True, slots=True)
class Len(NumTerm):
    svar: str


@dataclass(frozen=True, slots=True)
class SeqAt(NumTerm):
    """Element of the sequence coded by `seq` at position `index`."""

    seq: NumTerm
    index: NumTerm


@dataclass(frozen=True, slots=True)
class SeqLen(NumTerm):
    """Element count of the sequence coded by `seq`."""

    seq: NumTerm


# --- formulas ---


class Formula:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class EqNum(Formula):
    left: NumTerm
    right: NumTerm


@dataclass(frozen=True, slots=True)
class Leq(Formula):
    left: NumTerm
    right: NumTerm


@dataclass(frozen=True, slots=True)
class EqStr(Formula):
    left: str
    right: str


@dataclass(frozen=True, slots=True)
class Memb(Formula):
    index: NumTerm
    svar: str


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True, slots=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class ExN(Formula):
    var: str
    bound: NumTerm
    body: Formula


@dataclass(frozen=True, slots=True)
class AlN(Formula):
    var: str
    bound: NumTerm
    body: Formula


@dataclass(frozen=True, slots=True)
class ExS(Formula):
    var: str
    bound: NumTerm
    body: Formula


@dataclass(frozen=True, slots=True)
class AlS(Formula):
    var: str
    bound: NumTerm
    body: Formula


NUM_QUANTIFIERS = (ExN, AlN)
STR_QUANTIFIERS = (ExS, AlS)
QUANTIFIERS = NUM_QUANTIFIERS + STR_QUANTIFIERS


@dataclass(frozen=True, slots=True)
class QuantClass:
    """Position in the string-quantifier alternation hierarchy."""

    kind: str  # "sigma" or "pi"
    level: int

    def __post_init__(self):
        if self.kind not in ("sigma", "pi"):
            raise ValueError("kind must be sigma or pi")
        if self.level < 0:
            raise ValueError("level must be non-negative")

    def __str__(self) -> str:
        return f"{'Sigma' if self.kind == 'sigma' else 'Pi'}B({self.level})"


def is_num_name(name: str) -> bool:
    return bool(name) and name[0].islower()


def is_str_name(name: str) -> bool:
    return bool(name) and name[0].isupper()


# --- constant terms ---


def const_term(n: int) -> NumTerm:
    """Binary expansion of n over {0, 1, +, *}; O(log n) nodes."""
    if n < 0:
        raise ValueError("terms denote non-negative numbers")
    if n == 0:
        return Zero()
    if n == 1:
        return One()
    two = Plus(One(), One())
    half = const_term(n // 2)
    doubled = Times(two, half)
    return Plus(doubled, One()) if n % 2 else doubled


# --- variable bookkeeping ---


def term_num_vars(t: NumTerm, acc: set[str]) -> None:
    if type(t) is NVar:
        acc.add(t.name)
    elif type(t) in (Plus, Times):
        term_num_vars(t.left, acc)
        term_num_vars(t.right, acc)
    elif type(t) is SeqAt:
        term_num_vars(t.seq, acc)
        term_num_vars(t.index, acc)
    elif type(t) is SeqLen:
        term_num_vars(t.seq, acc)


def term_str_vars(t: NumTerm, acc: set[str]) -> None:
    if type(t) is Len:
        acc.add(t.svar)
    elif type(t) in (Plus, Times):
        term_str_vars(t.left, acc)
        term_str_vars(t.right, acc)
    elif type(t) is SeqAt:
        term_str_vars(t.seq, acc)
        term_str_vars(t.index, acc)
    elif type(t) is SeqLen:
        term_str_vars(t.seq, acc)


def free_vars(f: Formula) -> tuple[set[str], set[str]]:
    """Free (number, string) variable names of f."""
    nums: set[str] = set()
    strs: set[str] = set()

    def walk(g: Formula, bound_n: frozenset[str], bound_s: frozenset[str]) -> None:
        tg = type(g)
        if tg in (EqNum, Leq):
            ns: set[str] = set()
            ss: set[str] = set()
            for t in (g.left, g.right):
                term_num_vars(t, ns)
                term_str_vars(t, ss)
            nums.update(ns - bound_n)
            strs.update(ss - bound_s)
        elif tg is EqStr:
            strs.update({g.left, g.right} - bound_s)
        elif tg is Memb:
            ns, ss = set(), set()
            term_num_vars(g.index, ns)
            term_str_vars(g.index, ss)
            nums.update(ns - bound_n)
            strs.update((ss | {g.svar}) - bound_s)
        elif tg in (And, Or, Imp):
            walk(g.left, bound_n, bound_s)
            walk(g.right, bound_n, bound_s)
        elif tg is Not:
            walk(g.body, bound_n, bound_s)
        elif tg in NUM_QUANTIFIERS:
            ns, ss = set(), set()
            term_num_vars(g.bound, ns)
            term_str_vars(g.bound, ss)
            nums.update(ns - bound_n)
            strs.update(ss - bound_s)
            walk(g.body, bound_n | {g.var}, bound_s)
        elif tg in STR_QUANTIFIERS:
            ns, ss = set(), set()
            term_num_vars(g.bound, ns)
            term_str_vars(g.bound, ss)
            nums.update(ns - bound_n)
            strs.update(ss - bound_s)
            walk(g.body, bound_n, bound_s | {g.var})
        else:
            raise TypeError(f"not a formula: {g!r}")

    walk(f, frozenset(), frozenset())
    return nums, strs


def all_names(f: Formula) -> set[str]:
    """Every variable name occurring in f, free or bound."""
    names: set[str] = set()

    def walk_term(t: NumTerm) -> None:
        term_num_vars(t, names)
        term_str_vars(t, names)

    def walk(g: Formula) -> None:
        tg = type(g)
        if tg in (EqNum, Leq):
            walk_term(g.left)
            walk_term(g.right)
        elif tg is EqStr:
            names.add(g.left)
            names.add(g.right)
        elif tg is Memb:
            walk_term(g.index)
            names.add(g.svar)
        elif tg in (And, Or, Imp):
            walk(g.left)
            walk(g.right)
        elif tg is Not:
            walk(g.body)
        elif tg in QUANTIFIERS:
            names.add(g.var)
            walk_term(g.bound)
            walk(g.body)

    walk(f)
    return names


# --- substitution ---


def substitute_term(t: NumTerm, var: str, repl: NumTerm) -> NumTerm:
    tt = type(t)
    if tt is NVar:
        return repl if t.name == var else t
    if tt is Plus:
        return Plus(substitute_term(t.left, var, repl), substitute_term(t.right, var, repl))
    if tt is Times:
        return Times(substitute_term(t.left, var, repl), substitute_term(t.right, var, repl))
    if tt is SeqAt:
        return SeqAt(substitute_term(t.seq, var, repl), substitute_term(t.index, var, repl))
    if tt is SeqLen:
        return SeqLen(substitute_term(t.seq, var, repl))
    return t


def substitute(f: Formula, var: str, repl: NumTerm) -> Formula:
    """Replace free occurrences of the number variable var by repl.

    Bound occurrences shadow; a binder whose name occurs in repl raises
    CaptureError when var is still free below it.
    """
    repl_names: set[str] = set()
    term_num_vars(repl, repl_names)
    term_str_vars(repl, repl_names)

    def walk(g: Formula) -> Formula:
        tg = type(g)
        if tg in (EqNum, Leq):
            return tg(substitute_term(g.left, var, repl), substitute_term(g.right, var, repl))
        if tg is EqStr:
            return g
        if tg is Memb:
            return Memb(substitute_term(g.index, var, repl), g.svar)
        if tg in (And, Or, Imp):
            return tg(walk(g.left), walk(g.right))
        if tg is Not:
            return Not(walk(g.body))
        if tg in QUANTIFIERS:
            bound = substitute_term(g.bound, var, repl)
            if g.var == var and tg in NUM_QUANTIFIERS:
                return tg(g.var, bound, g.body)
            if g.var in repl_names and _occurs_free(g.body, var):
                raise CaptureError(
                    f"substituting for {var} would capture {g.var}; rename the binder first"
                )
            return tg(g.var, bound, walk(g.body))
        raise TypeError(f"not a formula: {g!r}")

    return walk(f)


def _occurs_free(f: Formula, var: str) -> bool:
    nums, strs = free_vars(f)
    return var in nums or var in strs


# --- classification ---


def classify(f: Formula) -> QuantClass:
    """Smallest hierarchy class, counting string-quantifier alternations.

    Number quantifiers are transparent; a formula with no string quantifier
    sits at level 0 and is reported on the sigma side.
    """
    s, p = _levels(f)
    if s == 0 and p == 0:
        return QuantClass("sigma", 0)
    if s <= p:
        return QuantClass("sigma", s)
    return QuantClass("pi", p)


def _levels(f: Formula) -> tuple[int, int]:
    """(least sigma level, least pi level) of f."""
    tf = type(f)
    if tf in (EqNum, Leq, EqStr, Memb):
        return 0, 0
    if tf in (And, Or):
        ls, lp = _levels(f.left)
        rs, rp = _levels(f.right)
        return max(ls, rs), max(lp, rp)
    if tf is Imp:
        ls, lp = _levels(f.left)
        rs, rp = _levels(f.right)
        return max(lp, rs), max(ls, rp)
    if tf is Not:
        s, p = _levels(f.body)
        return p, s
    if tf in NUM_QUANTIFIERS:
        return _levels(f.body)
    if tf is ExS:
        s, p = _levels(f.body)
        s2 = max(1, s)
        return s2, s2 + 1
    if tf is AlS:
        s, p = _levels(f.body)
        p2 = max(1, p)
        return p2 + 1, p2
    raise TypeError(f"not a formula: {f!r}")


# --- depth ---

_LABELS = {And: "and", Or: "or", Not: "not", Imp: "imp",
           ExN: "exN", AlN: "alN", ExS: "exS", AlS: "alS"}


def depth(f: Formula) -> int:
    """Alternation depth: maximal runs of equal connectives on any path.

    Adjacent identical connectives or quantifiers count once, so a block of
    conjunctions adds a single level regardless of fan-in.
    """

    def walk(g: Formula, parent: str | None) -> int:
        tg = type(g)
        label = _LABELS.get(tg)
        if label is None:
            return 0
        step = 0 if label == parent else 1
        if tg in (And, Or, Imp):
            return step + max(walk(g.left, label), walk(g.right, label))
        if tg is Not:
            return step + walk(g.body, label)
        return step + walk(g.body, label)

    return walk(f, None)


# --- size ---


def term_size(t: NumTerm) -> int:
    tt = type(t)
    if tt in (Zero, One, NVar, Len):
        return 1
    if tt in (Plus, Times):
        return 1 + term_size(t.left) + term_size(t.right)
    if tt is SeqAt:
        return 1 + term_size(t.seq) + term_size(t.index)
    if tt is SeqLen:
        return 1 + term_size(t.seq)
    raise TypeError(f"not a term: {t!r}")


def formula_size(f: Formula) -> int:
    """Node count over the formula and all its terms."""
    tf = type(f)
    if tf in (EqNum, Leq):
        return 1 + term_size(f.left) + term_size(f.right)
    if tf is EqStr:
        return 3
    if tf is Memb:
        return 2 + term_size(f.index)
    if tf in (And, Or, Imp):
        return 1 + formula_size(f.left) + formula_size(f.right)
    if tf is Not:
        return 1 + formula_size(f.body)
    if tf in QUANTIFIERS:
        return 2 + term_size(f.bound) + formula_size(f.body)
    raise TypeError(f"not a formula: {f!r}")


# --- builders used by the compilers ---

TRUE = Leq(Zero(), Zero())
FALSE = Leq(One(), Zero())


def land(parts: list[Formula]) -> Formula:
    """Right-nested conjunction; empty list is the true constant."""
    if not parts:
        return TRUE
    acc = parts[-1]
    for g in reversed(parts[:-1]):
        acc = And(g, acc)
    return acc


def lor(parts: list[Formula]) -> Formula:
    """Right-nested disjunction; empty list is the false constant."""
    if not parts:
        return FALSE
    acc = parts[-1]
    for g in reversed(parts[:-1]):
        acc = Or(g, acc)
    return acc


def lt(a: NumTerm, b: NumTerm) -> Formula:
    """a < b over naturals."""
    return Leq(Plus(a, One()), b)


def neq(a: NumTerm, b: NumTerm) -> Formula:
    return Not(EqNum(a, b))
