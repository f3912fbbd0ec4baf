"""Sequent-calculus proofs and checkers.

A sequent holds two formula lists read as multisets: the conjunction of the
left side implies the disjunction of the right side.  Proofs are checked
line by line against nine rules; contraction and exchange are absorbed by
the multiset matching of the two weakening rules.  Structural breakage
(dangling premise references, unknown rule tags) raises MalformedProofError,
while a line that simply does not follow makes the checker return False.
"""

from collections import Counter
from dataclasses import dataclass
from importlib import resources

from .errors import MalformedProofError, ParseError
from .prop import (PAnd, PNot, POr, PropFormula, PVar, parse_prop_at, pnot,
                   por, prop_depth, prop_to_sexpr, taut_check, tokenize_sexpr)

__all__ = [
    "Sequent", "ProofLine", "Proof", "RULES", "check_frege",
    "check_depth_frege", "soundness_sweep", "sequent_formula", "parse_proof",
    "proof_to_text", "corpus_proofs", "proof_mutations", "proof_target",
]

RULES = ("axiom", "weak-left", "weak-right", "and-left", "and-right",
         "or-left", "or-right", "not-left", "not-right", "cut")


@dataclass(frozen=True, slots=True)
class Sequent:
    left: tuple[PropFormula, ...]
    right: tuple[PropFormula, ...]


@dataclass(frozen=True, slots=True)
class ProofLine:
    sequent: Sequent
    rule: str
    premises: tuple[int, ...] = ()
    cut_index: int = 0  # position of the cut formula in premise 1's right side


@dataclass(frozen=True, slots=True)
class Proof:
    lines: tuple[ProofLine, ...]


def sequent_formula(s: Sequent) -> PropFormula:
    """The implication a sequent asserts, as one formula."""
    return por([pnot(f) for f in s.left] + list(s.right))


def _meq(a: tuple, b: tuple) -> bool:
    return Counter(a) == Counter(b)


def _minus(a: tuple, f: PropFormula, at: int) -> tuple:
    return a[:at] + a[at + 1:]


def _rule_holds(line: ProofLine, prems: list[Sequent]) -> bool:
    c = line.sequent
    rule = line.rule
    if rule == "axiom":
        return (not prems and len(c.left) == 1 and len(c.right) == 1
                and c.left[0] == c.right[0])
    if rule == "weak-left":
        return (len(prems) == 1 and _meq(prems[0].right, c.right)
                and set(prems[0].left) <= set(c.left))
    if rule == "weak-right":
        return (len(prems) == 1 and _meq(prems[0].left, c.left)
                and set(prems[0].right) <= set(c.right))
    if rule == "not-left":
        if len(prems) != 1:
            return False
        p = prems[0]
        for at, f in enumerate(c.left):
            if type(f) is PNot and _meq(p.left, _minus(c.left, f, at)) \
                    and _meq(p.right, c.right + (f.arg,)):
                return True
        return False
    if rule == "not-right":
        if len(prems) != 1:
            return False
        p = prems[0]
        for at, f in enumerate(c.right):
            if type(f) is PNot and _meq(p.right, _minus(c.right, f, at)) \
                    and _meq(p.left, c.left + (f.arg,)):
                return True
        return False
    if rule == "and-left":
        if len(prems) != 1:
            return False
        p = prems[0]
        for at, f in enumerate(c.left):
            if type(f) is PAnd and _meq(p.left, _minus(c.left, f, at) + f.args) \
                    and _meq(p.right, c.right):
                return True
        return False
    if rule == "or-right":
        if len(prems) != 1:
            return False
        p = prems[0]
        for at, f in enumerate(c.right):
            if type(f) is POr and _meq(p.right, _minus(c.right, f, at) + f.args) \
                    and _meq(p.left, c.left):
                return True
        return False
    if rule == "and-right":
        for at, f in enumerate(c.right):
            if type(f) is not PAnd or len(prems) != len(f.args):
                continue
            rest = _minus(c.right, f, at)
            if all(_meq(p.left, c.left) and _meq(p.right, rest + (arg,))
                   for p, arg in zip(prems, f.args)):
                return True
        return False
    if rule == "or-left":
        for at, f in enumerate(c.left):
            if type(f) is not POr or len(prems) != len(f.args):
                continue
            rest = _minus(c.left, f, at)
            if all(_meq(p.left, rest + (arg,)) and _meq(p.right, c.right)
                   for p, arg in zip(prems, f.args)):
                return True
        return False
    if rule == "cut":
        if len(prems) != 2:
            return False
        p1, p2 = prems
        if not 0 <= line.cut_index < len(p1.right):
            return False
        a = p1.right[line.cut_index]
        return (_meq(p1.left, c.left)
                and _meq(_minus(p1.right, a, line.cut_index), c.right)
                and _meq(p2.left, c.left + (a,))
                and _meq(p2.right, c.right))
    raise MalformedProofError(f"unknown rule tag {rule!r}")


def check_frege(pi: Proof, target: PropFormula) -> bool:
    """Purely syntactic line-by-line check; endsequent must be `--> target`."""
    if not pi.lines:
        return False
    for i, line in enumerate(pi.lines):
        for p in line.premises:
            if not 0 <= p < i:
                raise MalformedProofError(
                    f"line {i + 1} cites line {p + 1}, which is not earlier")
        prems = [pi.lines[p].sequent for p in line.premises]
        if not _rule_holds(line, prems):
            return False
    end = pi.lines[-1].sequent
    return end.left == () and end.right == (target,)


def check_depth_frege(pi: Proof, target: PropFormula, d: int) -> bool:
    """check_frege, plus every formula anywhere in the proof has depth <= d."""
    if not check_frege(pi, target):
        return False
    for line in pi.lines:
        for f in line.sequent.left + line.sequent.right:
            if prop_depth(f) > d:
                return False
    return True


def proof_target(pi: Proof) -> PropFormula | None:
    """The endsequent's formula when the proof ends in `--> A`, else None."""
    if not pi.lines:
        return None
    end = pi.lines[-1].sequent
    if end.left == () and len(end.right) == 1:
        return end.right[0]
    return None


def soundness_sweep(system, var_cap: int, corpus) -> dict:
    """Check each proof; every accepted endsequent must be a tautology."""
    if system == "frege":
        accept = check_frege
    elif isinstance(system, tuple) and len(system) == 2 and system[0] == "depth-frege":
        depth = system[1]
        accept = lambda pi, t: check_depth_frege(pi, t, depth)
    else:
        raise ValueError(f"unknown proof system {system!r}")
    checked = accepted = 0
    failures: list[int] = []
    for idx, pi in enumerate(corpus):
        checked += 1
        target = proof_target(pi)
        if target is None or not accept(pi, target):
            continue
        accepted += 1
        if not taut_check(target, var_cap):
            failures.append(idx)
    return {"system": system, "checked": checked, "accepted": accepted,
            "failures": failures}


# --- text format ---
#
# One line per proof step:  `n: (seq (<formula>*) (<formula>*)) <rule> [m ...]`
# Labels are 1-based and must be sequential; premises cite labels.  The cut
# rule names its cut formula as `cut:<index>` into premise 1's right side.


def proof_to_text(pi: Proof) -> str:
    out = []
    for i, line in enumerate(pi.lines):
        left = " ".join(prop_to_sexpr(f) for f in line.sequent.left)
        right = " ".join(prop_to_sexpr(f) for f in line.sequent.right)
        rule = f"cut:{line.cut_index}" if line.rule == "cut" else line.rule
        prems = " ".join(str(p + 1) for p in line.premises)
        text = f"{i + 1}: (seq ({left}) ({right})) {rule}"
        out.append(f"{text} {prems}".rstrip())
    return "\n".join(out) + "\n"


def _parse_side(tokens: list[str], pos: int, lineno: int) -> tuple[tuple, int]:
    if pos >= len(tokens) or tokens[pos] != "(":
        raise ParseError("expected '(' opening a sequent side", lineno, pos)
    pos += 1
    forms = []
    while pos < len(tokens) and tokens[pos] != ")":
        try:
            f, pos = parse_prop_at(tokens, pos)
        except ValueError as e:
            raise ParseError(str(e), lineno, pos) from None
        forms.append(f)
    if pos >= len(tokens):
        raise ParseError("unclosed sequent side", lineno, pos)
    return tuple(forms), pos + 1


def parse_proof(text: str) -> Proof:
    lines: list[ProofLine] = []
    label = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        label += 1
        head, colon, rest = stripped.partition(":")
        if not colon or not head.strip().isdigit():
            raise ParseError("expected 'n: (seq ...) rule ...'", lineno, 0)
        if int(head) != label:
            raise ParseError(f"expected label {label}, found {head}", lineno, 0)
        tokens = tokenize_sexpr(rest)
        if tokens[:2] != ["(", "seq"]:
            raise ParseError("expected '(seq' after the label", lineno, 0)
        left, pos = _parse_side(tokens, 2, lineno)
        right, pos = _parse_side(tokens, pos, lineno)
        if pos >= len(tokens) or tokens[pos] != ")":
            raise ParseError("expected ')' closing the sequent", lineno, pos)
        pos += 1
        if pos >= len(tokens):
            raise ParseError("missing rule tag", lineno, pos)
        rule_tok = tokens[pos]
        pos += 1
        cut_index = 0
        if rule_tok.startswith("cut:"):
            rule, _, idx = rule_tok.partition(":")
            if not idx.isdigit():
                raise ParseError("cut index must be a number", lineno, pos)
            cut_index = int(idx)
        else:
            rule = rule_tok
        if rule not in RULES:
            raise ParseError(f"unknown rule tag {rule_tok!r}", lineno, pos)
        prems = []
        for tok in tokens[pos:]:
            if not tok.isdigit() or tok == "0":
                raise ParseError(f"premise label {tok!r} is not a positive number",
                                 lineno, pos)
            prems.append(int(tok) - 1)
        lines.append(ProofLine(Sequent(left, right), rule, tuple(prems), cut_index))
    return Proof(tuple(lines))


_CORPUS_FILES = [f"corpus{i:02d}.pk" for i in range(1, 11)]


def corpus_proofs() -> list[tuple[str, Proof]]:
    """The ten shipped valid proofs, parsed from package data."""
    out = []
    for name in _CORPUS_FILES:
        text = resources.files("forge").joinpath("pk", name).read_text()
        out.append((name, parse_proof(text)))
    return out


# --- mutation harness ---

_JUNK = PVar("z", 97)  # index far outside anything the corpus uses


def _with_line(pi: Proof, i: int, line: ProofLine) -> Proof:
    return Proof(pi.lines[:i] + (line,) + pi.lines[i + 1:])


def proof_mutations(pi: Proof):
    """Single-line corruptions; a valid proof must fail the check under each.

    Yields (description, mutated proof).  Operators: rule-tag swap, a junk
    formula appended to either side, side swap where the sides differ, and
    dropping the first premise.  Each breaks the line's own derivation, a
    later line that cites it, or the endsequent shape.
    """
    for i, line in enumerate(pi.lines):
        s = line.sequent
        swapped_rule = "weak-left" if line.rule == "axiom" else "axiom"
        yield (f"line {i + 1}: rule -> {swapped_rule}",
               _with_line(pi, i, ProofLine(s, swapped_rule, line.premises,
                                           line.cut_index)))
        for side, seq in (("left", Sequent(s.left + (_JUNK,), s.right)),
                          ("right", Sequent(s.left, s.right + (_JUNK,)))):
            yield (f"line {i + 1}: junk appended {side}",
                   _with_line(pi, i, ProofLine(seq, line.rule, line.premises,
                                               line.cut_index)))
        if Counter(s.left) != Counter(s.right):
            yield (f"line {i + 1}: sides swapped",
                   _with_line(pi, i, ProofLine(Sequent(s.right, s.left),
                                               line.rule, line.premises,
                                               line.cut_index)))
        if line.premises:
            yield (f"line {i + 1}: first premise dropped",
                   _with_line(pi, i, ProofLine(s, line.rule, line.premises[1:],
                                               line.cut_index)))
