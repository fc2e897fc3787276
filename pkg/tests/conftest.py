"""Shared fixtures, an independent reference evaluator and netlist strategies."""
from __future__ import annotations

import itertools
import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

from muxreloc import gnl
from muxreloc.cells import CELL_TYPES, canonical_pin_order
from muxreloc.netlist import Netlist

sys.path.insert(0, str(Path(__file__).parent))
sys.setrecursionlimit(max(20000, sys.getrecursionlimit()))

AOI_NAND = """\
.module aoi_nand
.inputs a b c d
.outputs f
.gate AOI21 g1 O=n1 A=b B=c C=a
.gate NAND2 g2 O=n2 A=a B=d
.gate NAND2 g3 O=f A=n1 B=n2
.end
"""

# written from the cell datasheet, not from cells.py
REF_LOGIC = {
    "INV": lambda p: not p["A"],
    "BUF": lambda p: p["A"],
    "NAND2": lambda p: not (p["A"] and p["B"]),
    "NOR2": lambda p: not (p["A"] or p["B"]),
    "NAND3": lambda p: not (p["A"] and p["B"] and p["C"]),
    "NOR3": lambda p: not (p["A"] or p["B"] or p["C"]),
    "AND2": lambda p: p["A"] and p["B"],
    "OR2": lambda p: p["A"] or p["B"],
    "AOI21": lambda p: not ((p["A"] and p["B"]) or p["C"]),
    "OAI21": lambda p: not ((p["A"] or p["B"]) and p["C"]),
    "XOR2": lambda p: p["A"] != p["B"],
    "XNOR2": lambda p: p["A"] == p["B"],
    "MUX2": lambda p: p["B"] if p["S"] else p["A"],
}


def ref_eval(nl: Netlist, assignment: dict) -> dict:
    """Recursive evaluation by name; independent of the package simulators."""
    memo = {}

    def val(nid):
        if nid in memo:
            return memo[nid]
        net = nl.nets[nid]
        if net.is_pi:
            v = bool(assignment[net.name])
        else:
            g = nl.gates[net.driver]
            v = bool(REF_LOGIC[g.cell.name]({p: val(n) for p, n in g.pins.items()}))
        memo[nid] = v
        return v

    return {nl.net_name(o): int(val(o)) for o in nl.outputs}


def all_assignments(names):
    names = sorted(names)
    for bits in itertools.product((0, 1), repeat=len(names)):
        yield dict(zip(names, bits))


def ref_equal(a: Netlist, b: Netlist) -> bool:
    for asg in all_assignments(a.input_names):
        if ref_eval(a, asg) != ref_eval(b, asg):
            return False
    return True


@pytest.fixture
def aoi_nand() -> Netlist:
    return gnl.parse(AOI_NAND)


# ------------------------------------------------------------------ strategies

LOGIC_CELLS = sorted(n for n in CELL_TYPES if n != "MUX2")


def build_random(draw, n_pi: int, n_gates: int, cells=None, prefix="g") -> Netlist:
    cells = cells or sorted(CELL_TYPES)
    nl = Netlist("rand")
    nets = [nl.add_input(f"x{i}") for i in range(n_pi)]
    for k in range(n_gates):
        cell = CELL_TYPES[draw(st.sampled_from(cells))]
        pins = {p: draw(st.sampled_from(nets)) for p in cell.input_pins}
        pins = canonical_pin_order(cell, pins)
        gid = nl.add_gate(cell, pins, nl.add_net(f"{prefix}{k}"), f"{prefix}{k}")
        nets.append(nl.gates[gid].out)
    outs = draw(st.lists(st.sampled_from(nets[n_pi:] or nets), min_size=1, max_size=4,
                         unique=True))
    for o in outs:
        nl.add_output(o)
    return nl


@st.composite
def random_netlists(draw, max_pi=5, max_gates=12):
    n_pi = draw(st.integers(1, max_pi))
    n_gates = draw(st.integers(1, max_gates))
    return build_random(draw, n_pi, n_gates)


@st.composite
def mux_circuits(draw, max_pi=6, max_gates=8):
    """``f = s ? C1 : C0`` where C0 is a perturbed copy of C1.

    Perturbations: pins swapped inside symmetry classes, a leaf moved to
    another input, an inverter inserted on one edge, an extra side load.
    The output mux uses one of the four recognizable patterns.
    """
    n_pi = draw(st.integers(2, max_pi))
    n_gates = draw(st.integers(1, max_gates))
    nl = Netlist("muxc")
    pis = [nl.add_input(f"x{i}") for i in range(n_pi)]
    s = nl.add_input("s")
    recipe = []
    for k in range(n_gates):
        cell = draw(st.sampled_from(LOGIC_CELLS))
        srcs = {p: draw(st.integers(0, n_pi + k - 1)) for p in CELL_TYPES[cell].input_pins}
        recipe.append((cell, srcs))

    def build(tag, mutate):
        nets = list(pis)
        for k, (cell, srcs) in enumerate(recipe):
            c = CELL_TYPES[cell]
            pins = {p: nets[i] for p, i in srcs.items()}
            if mutate:
                kind = draw(st.sampled_from(["none", "none", "swap", "leaf", "inv"]))
                if kind == "swap":
                    for cls in c.symmetry_classes:
                        if len(cls) > 1:
                            vals = [pins[p] for p in cls][::-1]
                            pins.update(zip(cls, vals))
                elif kind == "leaf":
                    p = draw(st.sampled_from(c.input_pins))
                    pins[p] = draw(st.sampled_from(pis))
                elif kind == "inv":
                    p = draw(st.sampled_from(c.input_pins))
                    ig = nl.add_gate(CELL_TYPES["INV"], {"A": pins[p]})
                    pins[p] = nl.gates[ig].out
            gid = nl.add_gate(c, pins, nl.add_net(f"{tag}{k}"), f"{tag}{k}")
            nets.append(nl.gates[gid].out)
        return nets[-1], nets

    top1, nets1 = build("p", False)
    top0, nets0 = build("q", True)
    if top1 == top0 or top1 in pis or top0 in pis:
        top0 = nl.gates[nl.add_gate(CELL_TYPES["BUF"], {"A": top0})].out
    if draw(st.booleans()) and len(nets1) > n_pi + 1:
        side = draw(st.sampled_from(nets1[n_pi:-1]))
        g = nl.add_gate(CELL_TYPES["AND2"], {"A": side, "B": pis[0]}, nl.add_net("side"))
        nl.add_output(nl.gates[g].out)
    pattern = draw(st.sampled_from(["MUX2", "NAND", "ANDOR", "AOI"]))
    f = nl.add_net("f")
    if pattern == "MUX2":
        nl.add_gate(CELL_TYPES["MUX2"], {"A": top0, "B": top1, "S": s}, f)
    else:
        sb = nl.gates[nl.add_gate(CELL_TYPES["INV"], {"A": s})].out
        if pattern == "NAND":
            x = nl.gates[nl.add_gate(CELL_TYPES["NAND2"], {"A": top1, "B": s})].out
            y = nl.gates[nl.add_gate(CELL_TYPES["NAND2"], {"A": top0, "B": sb})].out
            nl.add_gate(CELL_TYPES["NAND2"], {"A": x, "B": y}, f)
        elif pattern == "ANDOR":
            x = nl.gates[nl.add_gate(CELL_TYPES["AND2"], {"A": top1, "B": s})].out
            y = nl.gates[nl.add_gate(CELL_TYPES["AND2"], {"A": top0, "B": sb})].out
            nl.add_gate(CELL_TYPES["OR2"], {"A": x, "B": y}, f)
        else:
            y = nl.gates[nl.add_gate(CELL_TYPES["AND2"], {"A": top0, "B": sb})].out
            z = nl.gates[nl.add_gate(CELL_TYPES["AOI21"], {"A": top1, "B": s, "C": y})].out
            nl.add_gate(CELL_TYPES["INV"], {"A": z}, f)
    nl.add_output(f)
    return nl
