"""Single-tape machines over {0,1}: simulator, tableaux, witness layout.

The simulator is the ground truth the compiled formulas are tested against.
States are numbered 1..k with 1 initial and k accepting; moves are 0 stay,
1 left, 2 right.  Both tape ends clamp: a left move at cell 0 and a right
move at the last cell stay put.

A computation tableau flattens to a bit-string witness with the fields of
cell (row t, column i) stored consecutively: field 0 is the tape bit and
fields 1..state_bits hold the head mark (0 when the head is elsewhere) in
binary, at string position (t * width + i) * (1 + state_bits) + field.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .errors import LayoutError, MachineFormatError

MOVE_STAY, MOVE_LEFT, MOVE_RIGHT = 0, 1, 2


@dataclass(frozen=True, slots=True)
class TMDescription:
    """k states, total deterministic transition map (state, bit) -> (state, bit, move)."""

    k: int
    delta: dict[tuple[int, int], tuple[int, int, int]]

    def __post_init__(self):
        if self.k < 1:
            raise MachineFormatError("need at least one state")
        for q in range(1, self.k + 1):
            for b in (0, 1):
                if (q, b) not in self.delta:
                    raise MachineFormatError(f"delta is partial: no rule for ({q},{b})")
        for (q, b), (q2, b2, m) in self.delta.items():
            if not (1 <= q <= self.k and 1 <= q2 <= self.k):
                raise MachineFormatError(f"state out of range in rule ({q},{b})")
            if b not in (0, 1) or b2 not in (0, 1):
                raise MachineFormatError(f"bit out of range in rule ({q},{b})")
            if m not in (MOVE_STAY, MOVE_LEFT, MOVE_RIGHT):
                raise MachineFormatError(f"move out of range in rule ({q},{b})")

    @property
    def state_bits(self) -> int:
        """Bits needed for a head mark in 0..k."""
        return self.k.bit_length()


@dataclass(frozen=True, slots=True)
class Configuration:
    """One tape row: (bit, mark) per cell, exactly one mark positive."""

    cells: tuple[tuple[int, int], ...]

    def __post_init__(self):
        marked = [i for i, (_, mark) in enumerate(self.cells) if mark]
        if len(marked) != 1:
            raise ValueError(f"a configuration needs exactly one head, found {len(marked)}")

    @property
    def head(self) -> int:
        return next(i for i, (_, mark) in enumerate(self.cells) if mark)

    @property
    def state(self) -> int:
        return self.cells[self.head][1]

    @property
    def bits(self) -> str:
        return "".join(str(b) for b, _ in self.cells)


def initial_configuration(input_bits: str, width: int) -> Configuration:
    """Input padded with zeroes, head on cell 0 in state 1."""
    if width < len(input_bits):
        raise LayoutError(f"width {width} cannot hold input of length {len(input_bits)}")
    if width < 1:
        raise LayoutError("width must be at least 1")
    padded = input_bits + "0" * (width - len(input_bits))
    cells = tuple((int(c), 1 if i == 0 else 0) for i, c in enumerate(padded))
    return Configuration(cells)


def step(tm: TMDescription, c: Configuration) -> Configuration:
    pos = c.head
    bit, state = c.cells[pos]
    new_state, new_bit, move = tm.delta[(state, bit)]
    target = pos
    if move == MOVE_LEFT and pos > 0:
        target = pos - 1
    elif move == MOVE_RIGHT and pos < len(c.cells) - 1:
        target = pos + 1
    cells = list(c.cells)
    cells[pos] = (new_bit, 0)
    cells[target] = (cells[target][0], new_state)
    return Configuration(tuple(cells))


@dataclass(frozen=True, slots=True)
class ComputationTableau:
    rows: tuple[Configuration, ...]
    width: int
    state_bits: int


def run(tm: TMDescription, input_bits: str, steps: int, width: int) -> ComputationTableau:
    """steps + 1 rows of deterministic evolution from the initial row."""
    return run_from(tm, initial_configuration(input_bits, width), steps)


def run_from(tm: TMDescription, start: Configuration, steps: int) -> ComputationTableau:
    c = start
    rows = [c]
    for _ in range(steps):
        c = step(tm, c)
        rows.append(c)
    return ComputationTableau(tuple(rows), len(start.cells), tm.state_bits)


@dataclass(frozen=True, slots=True)
class PolyBound:
    """Nonnegative-coefficient polynomial, coefficients low degree first.

    A degree-0 bound must be flagged constant explicitly so that accidental
    single-coefficient bounds fail loudly.
    """

    coeffs: tuple[int, ...]
    constant: bool = False

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a polynomial needs at least one coefficient")
        if any(c < 0 for c in self.coeffs):
            raise ValueError("coefficients must be non-negative")
        degree = max((i for i, c in enumerate(self.coeffs) if c), default=0)
        if degree == 0 and not self.constant:
            raise ValueError("degree-0 bound requires the constant flag")

    def eval(self, n: int) -> int:
        total = 0
        for c in reversed(self.coeffs):
            total = total * n + c
        return total


def accepts(tm: TMDescription, input_bits: str, p: PolyBound) -> bool:
    """Is the machine in its accepting state after exactly p(|input|) steps?"""
    budget = p.eval(len(input_bits))
    tableau = run(tm, input_bits, budget, max(budget, len(input_bits), 1))
    return tableau.rows[-1].state == tm.k


@dataclass(frozen=True, slots=True)
class TableauLayout:
    """Where each tableau field lives inside the flat witness string."""

    width: int
    steps: int
    state_bits: int

    @property
    def fields(self) -> int:
        return 1 + self.state_bits

    @property
    def total_bits(self) -> int:
        return (self.steps + 1) * self.width * self.fields

    def pos(self, t: int, i: int, f: int) -> int:
        if not (0 <= t <= self.steps and 0 <= i < self.width and 0 <= f < self.fields):
            raise LayoutError(f"field ({t},{i},{f}) outside the layout")
        return (t * self.width + i) * self.fields + f


def tableau_to_witness(tableau: ComputationTableau) -> str:
    layout = TableauLayout(tableau.width, len(tableau.rows) - 1, tableau.state_bits)
    bits = ["0"] * layout.total_bits
    for t, row in enumerate(tableau.rows):
        for i, (bit, mark) in enumerate(row.cells):
            bits[layout.pos(t, i, 0)] = str(bit)
            for f in range(tableau.state_bits):
                bits[layout.pos(t, i, 1 + f)] = str((mark >> f) & 1)
    return "".join(bits)


def witness_to_tableau(bits: str, layout: TableauLayout) -> ComputationTableau:
    """Inverse of tableau_to_witness for strings laid out by layout.

    Rows that violate the one-head invariant raise ValueError, so this is
    also a cheap structural check on candidate witnesses.
    """
    from .codec import bit_at

    rows = []
    for t in range(layout.steps + 1):
        cells = []
        for i in range(layout.width):
            bit = 1 if bit_at(bits, layout.pos(t, i, 0)) else 0
            mark = 0
            for f in range(layout.state_bits):
                if bit_at(bits, layout.pos(t, i, 1 + f)):
                    mark |= 1 << f
            cells.append((bit, mark))
        rows.append(Configuration(tuple(cells)))
    return ComputationTableau(tuple(rows), layout.width, layout.state_bits)


# --- text format and shipped corpus ---


def parse_tm(text: str) -> TMDescription:
    """Read `states <k>` then `<q> <b> -> <q'> <b'> <m>` rule lines."""
    k: int | None = None
    delta: dict[tuple[int, int], tuple[int, int, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if k is None:
            if len(parts) != 2 or parts[0] != "states":
                raise MachineFormatError(f"line {lineno}: expected `states <k>`")
            try:
                k = int(parts[1])
            except ValueError:
                raise MachineFormatError(f"line {lineno}: bad state count") from None
            continue
        if len(parts) != 6 or parts[2] != "->":
            raise MachineFormatError(
                f"line {lineno}: expected `<q> <b> -> <q'> <b'> <m>`")
        try:
            q, b, q2, b2, m = (int(parts[i]) for i in (0, 1, 3, 4, 5))
        except ValueError:
            raise MachineFormatError(f"line {lineno}: rule fields must be integers") from None
        if (q, b) in delta:
            raise MachineFormatError(
                f"line {lineno}: duplicate rule for ({q},{b}) makes delta nondeterministic")
        delta[(q, b)] = (q2, b2, m)
    if k is None:
        raise MachineFormatError("missing `states <k>` header")
    return TMDescription(k, delta)


CORPUS = ("scan1", "parity", "zeros")


def corpus_machine(name: str) -> TMDescription:
    """Load one of the shipped machines by lowercase name."""
    if name not in CORPUS:
        raise MachineFormatError(f"unknown corpus machine {name!r}; have {CORPUS}")
    text = resources.files("forge").joinpath(f"machines/{name}.tm").read_text()
    return parse_tm(text)
