"""Standard-cell vocabulary: pin signatures, symmetry classes, logic and area.

The cell set is closed.  Every cell has exactly one output pin ``O``; input
pins are listed in declaration order, which is also the order used when a
gate is written back out.

Logic functions are written with ``~ & | ^`` only, so the same callable
evaluates a single bit (python ``int``, masked with ``& 1``) or 64 lanes at
once (``numpy.uint64`` words).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from pathlib import Path
from typing import Callable, Mapping


class PinMismatchError(ValueError):
    pass


class AreaTableError(ValueError):
    pass


@dataclass(frozen=True)
class CellType:
    name: str
    input_pins: tuple[str, ...]
    symmetry_classes: tuple[tuple[str, ...], ...]
    logic: Callable = field(compare=False, repr=False)

    @property
    def is_single_input(self) -> bool:
        return len(self.input_pins) == 1

    def class_of(self, pin: str) -> tuple[str, ...]:
        for cls in self.symmetry_classes:
            if pin in cls:
                return cls
        raise PinMismatchError(f"{self.name} has no pin {pin!r}")

    def __str__(self) -> str:
        return self.name


def _cell(name, pins, classes, logic):
    return CellType(name, tuple(pins), tuple(tuple(c) for c in classes), logic)


INV = _cell("INV", "A", ["A"], lambda A: ~A)
BUF = _cell("BUF", "A", ["A"], lambda A: A)
NAND2 = _cell("NAND2", "AB", ["AB"], lambda A, B: ~(A & B))
NAND3 = _cell("NAND3", "ABC", ["ABC"], lambda A, B, C: ~(A & B & C))
NOR2 = _cell("NOR2", "AB", ["AB"], lambda A, B: ~(A | B))
NOR3 = _cell("NOR3", "ABC", ["ABC"], lambda A, B, C: ~(A | B | C))
AND2 = _cell("AND2", "AB", ["AB"], lambda A, B: A & B)
OR2 = _cell("OR2", "AB", ["AB"], lambda A, B: A | B)
XOR2 = _cell("XOR2", "AB", ["AB"], lambda A, B: A ^ B)
XNOR2 = _cell("XNOR2", "AB", ["AB"], lambda A, B: ~(A ^ B))
AOI21 = _cell("AOI21", "ABC", ["AB", "C"], lambda A, B, C: ~((A & B) | C))
OAI21 = _cell("OAI21", "ABC", ["AB", "C"], lambda A, B, C: ~((A | B) & C))
# O = ~S&A | S&B : B is the s=1 input
MUX2 = _cell("MUX2", "ABS", ["A", "B", "S"], lambda A, B, S: (~S & A) | (S & B))

CELL_TYPES: dict[str, CellType] = {
    c.name: c
    for c in (INV, BUF, NAND2, NAND3, NOR2, NOR3, AND2, OR2, XOR2, XNOR2,
              AOI21, OAI21, MUX2)
}

# cells skipped like wires during matching (approximate mode adds INV)
WIRE_CELLS = frozenset({"BUF"})
INVERTING_WIRE_CELLS = frozenset({"INV"})
ZERO_LEVEL_CELLS = frozenset({"INV", "BUF"})


def get_cell(name: str) -> CellType:
    try:
        return CELL_TYPES[name]
    except KeyError:
        raise KeyError(f"unknown cell {name!r}") from None


def eval_cell(cell: CellType, inputs: Mapping[str, int]) -> int:
    """Evaluate ``cell`` on one bit per input pin."""
    if set(inputs) != set(cell.input_pins):
        raise PinMismatchError(
            f"{cell.name} expects pins {cell.input_pins}, got {tuple(sorted(inputs))}")
    return cell.logic(**{p: int(inputs[p]) & 1 for p in cell.input_pins}) & 1


def eval_words(cell: CellType, inputs: Mapping[str, object]):
    """Lane-parallel evaluation; ``inputs`` hold integer words or uint64 arrays."""
    return cell.logic(**{p: inputs[p] for p in cell.input_pins})


def truth_table(cell: CellType) -> tuple[int, ...]:
    rows = []
    for bits in product((0, 1), repeat=len(cell.input_pins)):
        rows.append(eval_cell(cell, dict(zip(cell.input_pins, bits))))
    return tuple(rows)


def symmetry_holds(cell: CellType) -> bool:
    """Exhaustively check that permuting pins inside a class keeps the function."""
    for cls in cell.symmetry_classes:
        for perm in permutations(cls):
            remap = dict(zip(cls, perm))
            for bits in product((0, 1), repeat=len(cell.input_pins)):
                assign = dict(zip(cell.input_pins, bits))
                swapped = {remap.get(p, p): v for p, v in assign.items()}
                if eval_cell(cell, assign) != eval_cell(cell, swapped):
                    return False
    return True


def canonical_pin_order(cell: CellType, pins: Mapping[str, object],
                        key: Callable | None = None) -> dict[str, object]:
    """Sort the nets inside each symmetry class.

    ``key`` maps a net to its sort key (defaults to the net itself).  Pins
    outside a multi-pin class never move.
    """
    if set(pins) != set(cell.input_pins):
        raise PinMismatchError(f"{cell.name} expects pins {cell.input_pins}")
    key = key or (lambda n: n)
    out = dict(pins)
    for cls in cell.symmetry_classes:
        if len(cls) < 2:
            continue
        nets = sorted((pins[p] for p in cls), key=key)
        out.update(zip(cls, nets))
    return {p: out[p] for p in cell.input_pins}


DEFAULT_AREAS = {
    "INV": 1, "BUF": 1, "NAND2": 2, "NOR2": 2, "NAND3": 3, "NOR3": 3,
    "AND2": 3, "OR2": 3, "AOI21": 3, "OAI21": 3, "XOR2": 5, "XNOR2": 5,
    "MUX2": 4,
}


@dataclass(frozen=True)
class AreaTable:
    entries: Mapping[str, Fraction]

    def __post_init__(self):
        for name, a in self.entries.items():
            if a <= 0:
                raise AreaTableError(f"area of {name} must be positive, got {a}")

    @classmethod
    def default(cls) -> "AreaTable":
        return cls({k: Fraction(v) for k, v in DEFAULT_AREAS.items()})

    @classmethod
    def parse(cls, text: str, base: "AreaTable | None" = None) -> "AreaTable":
        """Parse ``CELLNAME <decimal-area>`` lines on top of ``base``."""
        entries = dict((base or cls.default()).entries)
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise AreaTableError(f"line {lineno}: expected 'CELL area'")
            name, value = parts
            if name not in CELL_TYPES:
                raise AreaTableError(f"line {lineno}: unknown cell {name!r}")
            try:
                area = Fraction(value)
            except (ValueError, ZeroDivisionError):
                raise AreaTableError(f"line {lineno}: bad area {value!r}") from None
            if area <= 0:
                raise AreaTableError(f"line {lineno}: area must be positive")
            entries[name] = area
        return cls(entries)

    @classmethod
    def from_file(cls, path: str | Path) -> "AreaTable":
        return cls.parse(Path(path).read_text())

    def __getitem__(self, cell: CellType | str) -> Fraction:
        name = cell if isinstance(cell, str) else cell.name
        try:
            return self.entries[name]
        except KeyError:
            raise AreaTableError(f"no area entry for {name}") from None
