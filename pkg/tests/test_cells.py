import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import REF_LOGIC
from muxreloc.cells import (AOI21, CELL_TYPES, DEFAULT_AREAS, INV, MUX2, NAND2,
                            AreaTable, AreaTableError, PinMismatchError,
                            canonical_pin_order, eval_cell, eval_words, get_cell,
                            symmetry_holds, truth_table)


def test_cell_set_is_closed():
    assert sorted(CELL_TYPES) == sorted(DEFAULT_AREAS)
    assert len(CELL_TYPES) == 13
    with pytest.raises(KeyError):
        get_cell("FOO")


@pytest.mark.parametrize("name", sorted(CELL_TYPES))
def test_logic_matches_reference(name):
    cell = CELL_TYPES[name]
    for bits in itertools.product((0, 1), repeat=len(cell.input_pins)):
        pins = dict(zip(cell.input_pins, bits))
        assert eval_cell(cell, pins) == int(REF_LOGIC[name](pins))


@pytest.mark.parametrize("name", sorted(CELL_TYPES))
def test_every_pin_in_one_class_and_symmetry_holds(name):
    cell = CELL_TYPES[name]
    flat = [p for cls in cell.symmetry_classes for p in cls]
    assert sorted(flat) == sorted(cell.input_pins)
    assert symmetry_holds(cell)


def test_class_structure():
    assert AOI21.symmetry_classes == (("A", "B"), ("C",))
    assert CELL_TYPES["OAI21"].symmetry_classes == (("A", "B"), ("C",))
    assert MUX2.symmetry_classes == (("A",), ("B",), ("S",))
    for n in ("NAND2", "NOR2", "AND2", "OR2", "XOR2", "XNOR2"):
        assert CELL_TYPES[n].symmetry_classes == (("A", "B"),)


def test_eval_examples():
    assert eval_cell(AOI21, {"A": 1, "B": 1, "C": 0}) == 0
    assert eval_cell(MUX2, {"A": 1, "B": 0, "S": 0}) == 1
    assert eval_cell(AOI21, {"A": 0, "B": 1, "C": 0}) == 1


def test_eval_pin_mismatch():
    with pytest.raises(PinMismatchError):
        eval_cell(NAND2, {"A": 1})
    with pytest.raises(PinMismatchError):
        eval_cell(INV, {"A": 1, "B": 0})


def test_truth_table_order():
    # rows enumerate pins in declaration order, first pin most significant
    assert truth_table(NAND2) == (1, 1, 1, 0)
    assert truth_table(MUX2) == (0, 0, 0, 1, 1, 0, 1, 1)


@given(st.sampled_from(sorted(CELL_TYPES)), st.data())
def test_word_eval_agrees_with_bit_eval(name, data):
    cell = CELL_TYPES[name]
    words = {p: data.draw(st.integers(0, 2**64 - 1)) for p in cell.input_pins}
    arr = {p: np.array([w], dtype=np.uint64) for p, w in words.items()}
    out = int(eval_words(cell, arr)[0])
    for lane in range(0, 64, 7):
        bits = {p: (w >> lane) & 1 for p, w in words.items()}
        assert (out >> lane) & 1 == eval_cell(cell, bits)


def test_canonical_pin_order_examples():
    assert canonical_pin_order(NAND2, {"A": 2, "B": 1}) == {"A": 1, "B": 2}
    assert canonical_pin_order(AOI21, {"A": 3, "B": 1, "C": 2}) == {"A": 1, "B": 3, "C": 2}
    assert canonical_pin_order(INV, {"A": 1}) == {"A": 1}


@given(st.sampled_from(sorted(CELL_TYPES)), st.data())
def test_canonical_order_preserves_function(name, data):
    cell = CELL_TYPES[name]
    nets = {p: data.draw(st.integers(0, 5)) for p in cell.input_pins}
    canon = canonical_pin_order(cell, nets)
    values = {n: data.draw(st.integers(0, 1)) for n in range(6)}
    a = eval_cell(cell, {p: values[n] for p, n in nets.items()})
    b = eval_cell(cell, {p: values[n] for p, n in canon.items()})
    assert a == b
    assert canonical_pin_order(cell, canon) == canon


def test_default_area_table():
    t = AreaTable.default()
    assert t["INV"] == 1 and t[AOI21] == 3 and t["MUX2"] == 4 and t["XOR2"] == 5


def test_area_table_parse_overrides_and_errors():
    t = AreaTable.parse("# custom\nMUX2 2.5\nXOR2 3\n")
    assert t["MUX2"] == Fraction(5, 2)
    assert t["XOR2"] == 3
    assert t["NAND2"] == 2
    for bad in ("FOO 1", "MUX2", "MUX2 abc", "MUX2 0", "MUX2 -1"):
        with pytest.raises(AreaTableError):
            AreaTable.parse(bad)
