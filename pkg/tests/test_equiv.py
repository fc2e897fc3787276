import pytest

from conftest import AOI_NAND, ref_eval
from muxreloc import gnl
from muxreloc.benchgen import BenchSpec, Kind, generate
from muxreloc.equiv import EquivError, Mode, Status, equivalent, exhaustive_words
from muxreloc.netlist import simulate_bits

A_OR_BC = """\
.module ref
.inputs a b c d
.outputs f
.gate AND2 x O=x A=b B=c
.gate OR2 y O=f A=a B=x
.end
"""


def test_reflexive(aoi_nand):
    v = equivalent(aoi_nand, aoi_nand)
    assert v.status is Status.EQUAL and v.mode is Mode.EXHAUSTIVE and v.vectors_used == 16


def test_aoi_nand_is_a_or_bc(aoi_nand):
    v = equivalent(aoi_nand, gnl.parse(A_OR_BC))
    assert v.equal and v.vectors_used == 16


def test_mutation_gives_replayable_counterexample(aoi_nand):
    bad = gnl.parse(AOI_NAND.replace("A=b B=c C=a", "A=b B=d C=a"))
    v = equivalent(aoi_nand, bad)
    assert v.status is Status.COUNTEREXAMPLE
    cx = v.counterexample
    assert simulate_bits(aoi_nand, cx.assignment)[cx.output] == cx.value_a
    assert simulate_bits(bad, cx.assignment)[cx.output] == cx.value_b
    assert cx.value_a != cx.value_b
    assert ref_eval(aoi_nand, cx.assignment) != ref_eval(bad, cx.assignment)
    text = v.format()
    assert "differs at f" in text and "a=" in text


def test_interface_mismatch(aoi_nand):
    other = gnl.parse(A_OR_BC.replace(".outputs f", ".outputs g").replace("O=f", "O=g"))
    with pytest.raises(EquivError):
        equivalent(aoi_nand, other)
    other = gnl.parse(A_OR_BC.replace(".inputs a b c d", ".inputs a b c e"))
    with pytest.raises(EquivError):
        equivalent(aoi_nand, other)


def test_exhaustive_words_enumerate_rows():
    vec = exhaustive_words(["a", "b", "c"], 0, 1)
    rows = {tuple((int(vec[n][0]) >> k) & 1 for n in "abc") for k in range(8)}
    assert len(rows) == 8


def test_random_mode_reproducible():
    nl = generate(BenchSpec(Kind.ADD_ADD, 8))
    bad = nl.copy()
    g = bad.gate_by_name(sorted(x.name for x in bad.gates.values() if x.cell.name == "MUX2")[3])
    g.pins["A"], g.pins["B"] = g.pins["B"], g.pins["A"]
    bad = gnl.parse(gnl.write(bad))
    v1 = equivalent(nl, bad, exhaustive_limit=4, random_vectors=5000, seed=9)
    v2 = equivalent(nl, bad, exhaustive_limit=4, random_vectors=5000, seed=9)
    assert v1.mode is Mode.RANDOM and v1.status is Status.COUNTEREXAMPLE
    assert v1 == v2
    ok = equivalent(nl, nl.copy(), exhaustive_limit=4, random_vectors=100_000, seed=3)
    assert ok.equal and ok.vectors_used == 100_000


def test_zero_vectors_are_inconclusive():
    nl = generate(BenchSpec(Kind.ADD_ADD, 8))
    v = equivalent(nl, nl, exhaustive_limit=4, random_vectors=0)
    assert v.status is Status.INCONCLUSIVE and v.vectors_used == 0
