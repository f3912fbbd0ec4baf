"""Propositional image of level-0 formulas at fixed parameter sizes.

Every number parameter is pinned to a concrete value and every string
parameter to an exact length, so quantifier-free number atoms collapse to
constants and bounded number quantifiers expand into finite conjunctions
and disjunctions.  Only string memberships survive as propositional
variables.

Exact-length convention: a string of length n has its top bit set, so the
membership at position n-1 translates to the constant 1, positions below
n-1 become variables, and positions at n or above become the constant 0.
"""

from dataclasses import dataclass, field

from .errors import (BudgetError, ClassError, SliceExceededError,
                     UnboundVariableError)
from .formulas import (AlN, AlS, And, EqNum, EqStr, ExN, ExS, Formula, Imp,
                       Len, Leq, Memb, Not, NumTerm, NVar, One, Or, Plus,
                       SeqAt, SeqLen, Times, Zero, classify)
from .codec import seq_get_total, seq_len_total

__all__ = [
    "PropFormula", "PConst", "PVar", "PAnd", "POr", "PNot", "SizeProfile",
    "pand", "por", "pnot", "translate", "taut_check", "prop_depth",
    "prop_size", "prop_vars", "eval_prop", "prop_to_sexpr", "parse_prop",
    "parse_prop_at", "tokenize_sexpr",
]


class PropFormula:
    """Base class for propositional formulas."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class PConst(PropFormula):
    bit: int

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError("constant must be 0 or 1")


@dataclass(frozen=True, slots=True)
class PVar(PropFormula):
    name: str
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("variable index must be non-negative")


@dataclass(frozen=True, slots=True)
class PAnd(PropFormula):
    args: tuple[PropFormula, ...]


@dataclass(frozen=True, slots=True)
class POr(PropFormula):
    args: tuple[PropFormula, ...]


@dataclass(frozen=True, slots=True)
class PNot(PropFormula):
    arg: PropFormula


def pand(args) -> PropFormula:
    """Conjunction with constant folding and same-connective flattening."""
    flat: list[PropFormula] = []
    for a in args:
        if type(a) is PConst:
            if a.bit == 0:
                return PConst(0)
            continue
        if type(a) is PAnd:
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return PConst(1)
    if len(flat) == 1:
        return flat[0]
    return PAnd(tuple(flat))


def por(args) -> PropFormula:
    flat: list[PropFormula] = []
    for a in args:
        if type(a) is PConst:
            if a.bit == 1:
                return PConst(1)
            continue
        if type(a) is POr:
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return PConst(0)
    if len(flat) == 1:
        return flat[0]
    return POr(tuple(flat))


def pnot(a: PropFormula) -> PropFormula:
    if type(a) is PConst:
        return PConst(1 - a.bit)
    if type(a) is PNot:
        return a.arg
    return PNot(a)


@dataclass(frozen=True, slots=True)
class SizeProfile:
    """Concrete sizes for free parameters: exact string lengths, number values."""

    lengths: dict[str, int] = field(default_factory=dict)
    values: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for name, n in self.lengths.items():
            if n < 0:
                raise ValueError(f"length of {name} must be non-negative")
        for name, v in self.values.items():
            if v < 0:
                raise ValueError(f"value of {name} must be non-negative")


def _ev(t: NumTerm, env: dict[str, int], sizes: SizeProfile) -> int:
    k = type(t)
    if k is Zero:
        return 0
    if k is One:
        return 1
    if k is NVar:
        if t.name in env:
            return env[t.name]
        raise UnboundVariableError(f"number variable {t.name} has no value")
    if k is Plus:
        return _ev(t.left, env, sizes) + _ev(t.right, env, sizes)
    if k is Times:
        return _ev(t.left, env, sizes) * _ev(t.right, env, sizes)
    if k is Len:
        if t.svar in sizes.lengths:
            return sizes.lengths[t.svar]
        raise UnboundVariableError(f"string parameter {t.svar} has no length")
    if k is SeqAt:
        return seq_get_total(_ev(t.seq, env, sizes), _ev(t.index, env, sizes))
    if k is SeqLen:
        return seq_len_total(_ev(t.seq, env, sizes))
    raise TypeError(f"unknown term {t!r}")


def _bit(name: str, pos: int, sizes: SizeProfile) -> PropFormula:
    n = sizes.lengths.get(name)
    if n is None:
        raise UnboundVariableError(f"string parameter {name} has no length")
    if pos >= n:
        return PConst(0)
    if pos == n - 1:
        return PConst(1)  # exact length pins the top bit
    return PVar(name, pos)


def translate(phi: Formula, sizes: SizeProfile,
              num_bound: int = 1 << 16) -> PropFormula:
    """Propositional image of a level-0 formula at the given sizes."""
    if classify(phi).level != 0:
        raise ClassError("only string-quantifier-free formulas translate")

    def go(f: Formula, env: dict[str, int]) -> PropFormula:
        k = type(f)
        if k is EqNum:
            return PConst(int(_ev(f.left, env, sizes) == _ev(f.right, env, sizes)))
        if k is Leq:
            return PConst(int(_ev(f.left, env, sizes) <= _ev(f.right, env, sizes)))
        if k is Memb:
            return _bit(f.svar, _ev(f.index, env, sizes), sizes)
        if k is EqStr:
            m = sizes.lengths.get(f.left)
            n = sizes.lengths.get(f.right)
            if m is None or n is None:
                missing = f.left if m is None else f.right
                raise UnboundVariableError(f"string parameter {missing} has no length")
            if m != n:
                return PConst(0)
            return pand(_iff(_bit(f.left, i, sizes), _bit(f.right, i, sizes))
                        for i in range(max(0, n - 1)))
        if k is And:
            return pand((go(f.left, env), go(f.right, env)))
        if k is Or:
            return por((go(f.left, env), go(f.right, env)))
        if k is Not:
            return pnot(go(f.body, env))
        if k is Imp:
            return por((pnot(go(f.left, env)), go(f.right, env)))
        if k is ExN or k is AlN:
            b = _ev(f.bound, env, sizes)
            if b > num_bound:
                raise SliceExceededError(
                    f"quantifier bound {b} exceeds expansion cap {num_bound}")
            parts = []
            for v in range(b + 1):
                parts.append(go(f.body, {**env, f.var: v}))
            return por(parts) if k is ExN else pand(parts)
        if k is ExS or k is AlS:
            raise ClassError("string quantifier has no propositional image")
        raise TypeError(f"unknown formula {f!r}")

    return go(phi, dict(sizes.values))


def _iff(a: PropFormula, b: PropFormula) -> PropFormula:
    return pand((por((pnot(a), b)), por((pnot(b), a))))


def prop_vars(p: PropFormula) -> list[tuple[str, int]]:
    """Distinct variables, sorted by (name, index)."""
    seen: set[tuple[str, int]] = set()
    stack = [p]
    while stack:
        q = stack.pop()
        k = type(q)
        if k is PVar:
            seen.add((q.name, q.index))
        elif k is PNot:
            stack.append(q.arg)
        elif k is PAnd or k is POr:
            stack.extend(q.args)
    return sorted(seen)


def eval_prop(p: PropFormula, env: dict[tuple[str, int], int]) -> bool:
    k = type(p)
    if k is PConst:
        return bool(p.bit)
    if k is PVar:
        return bool(env[(p.name, p.index)])
    if k is PNot:
        return not eval_prop(p.arg, env)
    if k is PAnd:
        return all(eval_prop(a, env) for a in p.args)
    if k is POr:
        return any(eval_prop(a, env) for a in p.args)
    raise TypeError(f"unknown propositional formula {p!r}")


def taut_check(p: PropFormula, var_cap: int = 20) -> bool:
    """Exhaustive truth-table sweep; refuses more than var_cap variables."""
    names = prop_vars(p)
    if len(names) > var_cap:
        raise BudgetError(
            f"{len(names)} variables exceed the tautology-check cap {var_cap}")
    for mask in range(1 << len(names)):
        env = {nm: (mask >> i) & 1 for i, nm in enumerate(names)}
        if not eval_prop(p, env):
            return False
    return True


def prop_depth(p: PropFormula) -> int:
    """Alternation depth with unbounded fan-in: adjacent same connectives merge."""
    return _kind_depth(p)[1]


def _kind_depth(p: PropFormula) -> tuple[str, int]:
    k = type(p)
    if k is PConst or k is PVar:
        return "leaf", 1
    if k is PNot:
        kind, d = _kind_depth(p.arg)
        return "not", d if kind in ("not", "leaf") else d + 1
    label = "and" if k is PAnd else "or"
    best = 1
    for a in p.args:
        kind, d = _kind_depth(a)
        best = max(best, d if kind == label else d + 1)
    return label, best


def prop_size(p: PropFormula) -> int:
    """Node count, constants and variables included."""
    k = type(p)
    if k is PConst or k is PVar:
        return 1
    if k is PNot:
        return 1 + prop_size(p.arg)
    return 1 + sum(prop_size(a) for a in p.args)


# --- s-expression text form ---


def prop_to_sexpr(p: PropFormula) -> str:
    k = type(p)
    if k is PConst:
        return f"(pc {p.bit})"
    if k is PVar:
        return f"(pv {p.name} {p.index})"
    if k is PNot:
        return f"(pnot {prop_to_sexpr(p.arg)})"
    head = "pand" if k is PAnd else "por"
    return f"({head} {' '.join(prop_to_sexpr(a) for a in p.args)})"


def tokenize_sexpr(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse_prop_at(tokens: list[str], pos: int) -> tuple[PropFormula, int]:
    """Parse one formula starting at tokens[pos]; returns it and the next position."""

    def fail(msg: str):
        raise ValueError(f"token {pos}: {msg}")

    def need(what: str) -> str:
        nonlocal pos
        if pos >= len(tokens):
            fail(f"expected {what}, found end of input")
        tok = tokens[pos]
        pos += 1
        return tok

    def form() -> PropFormula:
        nonlocal pos
        if need("'('") != "(":
            fail("expected '('")
        head = need("operator")
        if head == "pc":
            bit = need("bit")
            if bit not in ("0", "1"):
                fail("pc takes 0 or 1")
            out: PropFormula = PConst(int(bit))
        elif head == "pv":
            name = need("name")
            idx = need("index")
            if not idx.isdigit():
                fail("pv index must be a number")
            out = PVar(name, int(idx))
        elif head == "pnot":
            out = PNot(form())
        elif head in ("pand", "por"):
            args = []
            while pos < len(tokens) and tokens[pos] != ")":
                args.append(form())
            out = PAnd(tuple(args)) if head == "pand" else POr(tuple(args))
        else:
            fail(f"unknown operator {head}")
        if need("')'") != ")":
            fail("expected ')'")
        return out

    return form(), pos


def parse_prop(text: str) -> PropFormula:
    tokens = tokenize_sexpr(text)
    out, pos = parse_prop_at(tokens, 0)
    if pos != len(tokens):
        raise ValueError(f"token {pos}: trailing input")
    return out
