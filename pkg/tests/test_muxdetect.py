import pytest
from hypothesis import given, settings

from conftest import all_assignments, mux_circuits, random_netlists, ref_eval
from muxreloc import gnl
from muxreloc.benchgen import BenchSpec, Kind, generate
from muxreloc.muxdetect import (Pattern, cone_sizes, detect_muxes, extract_subcircuits,
                                group_vector_muxes, passes_fanout_filter)
from muxreloc.netlist import extract_cone

HEAD = ".module m\n.inputs d0 d1 s\n.outputs f\n"

PATTERNS = {
    Pattern.NAND_NAND: ".gate INV i O=sb A=s\n.gate NAND2 x O=x A=d0 B=sb\n"
                       ".gate NAND2 y O=y A=d1 B=s\n.gate NAND2 z O=f A=x B=y\n",
    Pattern.AND_OR: ".gate INV i O=sb A=s\n.gate AND2 x O=x A=sb B=d0\n"
                    ".gate AND2 y O=y A=s B=d1\n.gate OR2 z O=f A=y B=x\n",
    Pattern.AOI_INV: ".gate INV i O=sb A=s\n.gate AND2 x O=x A=d0 B=sb\n"
                     ".gate AOI21 y O=y A=d1 B=s C=x\n.gate INV z O=f A=y\n",
    Pattern.MUX2_CELL: ".gate MUX2 m O=f A=d0 B=d1 S=s\n",
}


@pytest.mark.parametrize("pattern", list(PATTERNS))
def test_each_pattern_oriented(pattern):
    nl = gnl.parse(HEAD + PATTERNS[pattern] + ".end\n")
    (m,) = detect_muxes(nl)
    name = nl.net_name
    assert m.pattern is pattern
    assert (name(m.sel), name(m.d0), name(m.d1), name(m.out)) == ("s", "d0", "d1", "f")
    assert all(nl.gates[g].name != "i" for g in m.internal_gates)
    # oracle: the recognized orientation is the actual function
    for asg in all_assignments(["d0", "d1", "s"]):
        want = asg["d1"] if asg["s"] else asg["d0"]
        assert ref_eval(nl, asg)["f"] == want


def test_swapped_data_is_not_misread():
    # d0 sits with s and d1 with s-bar: the mux selects d0 at s=1
    nl = gnl.parse(HEAD + ".gate INV i O=sb A=s\n.gate NAND2 x O=x A=d1 B=sb\n"
                   ".gate NAND2 y O=y A=d0 B=s\n.gate NAND2 z O=f A=x B=y\n.end\n")
    (m,) = detect_muxes(nl)
    assert nl.net_name(m.d1) == "d0" and nl.net_name(m.d0) == "d1"


def test_near_miss_not_detected():
    # both products use s: not a mux
    nl = gnl.parse(HEAD + ".gate NAND2 x O=x A=d0 B=s\n.gate NAND2 y O=y A=d1 B=s\n"
                   ".gate NAND2 z O=f A=x B=y\n.end\n")
    assert detect_muxes(nl) == []


def test_aoi_nand_has_no_mux(aoi_nand):
    assert detect_muxes(aoi_nand) == []


@settings(max_examples=80, deadline=None)
@given(random_netlists(max_pi=4, max_gates=10))
def test_every_detected_mux_is_a_mux(nl):
    for m in detect_muxes(nl):
        probe = nl.copy()
        for n in (m.out, m.sel, m.d0, m.d1):
            if not probe.is_po(n) and not probe.nets[n].is_pi:
                probe.add_output(n)
        name = probe.net_name

        def value(vals, asg, n):
            return asg[name(n)] if probe.nets[n].is_pi else vals[name(n)]

        for asg in all_assignments(probe.input_names):
            vals = ref_eval(probe, asg)
            sel = value(vals, asg, m.sel)
            want = value(vals, asg, m.d1 if sel else m.d0)
            assert value(vals, asg, m.out) == want


@settings(max_examples=60, deadline=None)
@given(mux_circuits())
def test_generated_mux_is_found(nl):
    f = nl.find_net("f")
    assert any(m.out == f for m in detect_muxes(nl))


def test_fanout_filter_and_grouping():
    text = (".module m\n.inputs a0 a1 b0 b1 s t\n.outputs f g h k\n"
            ".gate MUX2 m1 O=f A=a0 B=a1 S=s\n"
            ".gate MUX2 m2 O=g A=b0 B=b1 S=s\n"
            ".gate MUX2 m3 O=h A=a0 B=b1 S=t\n"
            ".gate NAND2 x O=k A=b1 B=b0\n.end\n")
    nl = gnl.parse(text)
    muxes = detect_muxes(nl)
    assert len(muxes) == 3
    keep = [m for m in muxes if passes_fanout_filter(nl, m)]
    # a0 feeds two muxes, b0/b1 feed the NAND2: every mux has a data side load
    assert keep == []
    text2 = (".module m\n.inputs a0 a1 b0 b1 c0 c1 s t\n.outputs f g h\n"
             ".gate MUX2 m1 O=f A=a0 B=a1 S=s\n.gate MUX2 m2 O=g A=b0 B=b1 S=s\n"
             ".gate MUX2 m3 O=h A=c0 B=c1 S=t\n.end\n")
    nl = gnl.parse(text2)
    vecs = group_vector_muxes(nl, detect_muxes(nl))
    assert [nl.net_name(v.sel) for v in vecs] == ["s", "t"]
    assert [nl.net_name(m.out) for m in vecs[0].muxes] == ["f", "g"]


def test_po_data_net_filtered():
    nl = gnl.parse(".module m\n.inputs a b s\n.outputs f x\n.gate INV i O=x A=a\n"
                   ".gate MUX2 m O=f A=x B=b S=s\n.end\n")
    (m,) = detect_muxes(nl)
    assert not passes_fanout_filter(nl, m)


def test_eight_bit_vector():
    nl = generate(BenchSpec(Kind.ADD_ADD, 8))
    vecs = group_vector_muxes(nl, detect_muxes(nl))
    assert len(vecs) == 1 and len(vecs[0].muxes) == 9


def test_subcircuit_of_add_add_contains_both_adders():
    nl = generate(BenchSpec(Kind.ADD_ADD, 4))
    subs = extract_subcircuits(nl, group_vector_muxes(nl, detect_muxes(nl)))
    assert len(subs) == 1
    assert subs[0].cone.member_gates == frozenset(nl.gates)


def test_pi_data_subcircuit_is_just_the_muxes():
    nl = gnl.parse(".module m\n.inputs a0 a1 b0 b1 s t\n.outputs f g\n"
                   ".gate MUX2 m1 O=f A=a0 B=a1 S=s\n.gate MUX2 m2 O=g A=b0 B=b1 S=t\n.end\n")
    subs = extract_subcircuits(nl, group_vector_muxes(nl, detect_muxes(nl)))
    assert len(subs) == 2
    assert subs[0].cone.member_gates.isdisjoint(subs[1].cone.member_gates)
    assert all(len(s.cone.member_gates) == 1 for s in subs)


@settings(max_examples=60, deadline=None)
@given(random_netlists(max_pi=4, max_gates=14))
def test_cone_sizes_match_extract_cone(nl):
    roots = sorted(nl.nets)
    assert cone_sizes(nl, roots) == [len(extract_cone(nl, [r]).member_gates) for r in roots]
