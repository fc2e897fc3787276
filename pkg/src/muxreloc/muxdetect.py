"""Structural 2-to-1 multiplexer recovery and vector-mux grouping."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .cells import eval_cell
from .netlist import Cone, Netlist, extract_cone, topo_order


class Pattern(enum.Enum):
    MUX2_CELL = "MUX2_CELL"
    NAND_NAND = "NAND_NAND"
    AND_OR = "AND_OR"
    AOI_INV = "AOI_INV"


@dataclass(frozen=True)
class MuxInstance:
    sel: int
    d0: int
    d1: int
    out: int
    internal_gates: frozenset
    pattern: Pattern


@dataclass(frozen=True)
class VectorMux:
    sel: int
    muxes: tuple


@dataclass
class SubCircuit:
    owner: Netlist
    vector: VectorMux
    cone: Cone


def _private(nl: Netlist, nid: int, cell: str, used) -> object:
    """Driver of ``nid`` if it is a ``cell`` gate feeding nothing but its consumer."""
    g = nl.driver(nid)
    if g is None or g.cell.name != cell or g.id in used:
        return None
    if nl.fanout_count(nid) != 1:
        return None
    return g


def _orient(nl: Netlist, with_s: tuple, with_sbar: tuple):
    """Find (sel, d1, d0) given the input pairs of the two product terms."""
    for (u, d1), (v, d0) in product(
            (with_s, with_s[::-1]), (with_sbar, with_sbar[::-1])):
        inv = nl.driver(v)
        if inv is not None and inv.cell.name == "INV" and inv.pins["A"] == u:
            return u, d1, d0, v
    return None


def _local_ok(nl: Netlist, mux: MuxInstance, sbar: int | None) -> bool:
    """Check out == s ? d1 : d0 over all 8 local input rows."""
    order = [g for g in topo_order_subset(nl, mux.internal_gates)]
    for s, d0, d1 in product((0, 1), repeat=3):
        val = {mux.sel: s, mux.d0: d0, mux.d1: d1}
        if sbar is not None:
            val[sbar] = 1 - s
        for gid in order:
            g = nl.gates[gid]
            try:
                val[g.out] = eval_cell(g.cell, {p: val[n] for p, n in g.pins.items()})
            except KeyError:
                return False
        if val[mux.out] != (d1 if s else d0):
            return False
    return True


def topo_order_subset(nl: Netlist, gids: Iterable[int]) -> list[int]:
    gids = set(gids)
    done: set[int] = set()
    order: list[int] = []

    def visit(g):
        if g in done:
            return
        done.add(g)
        for n in nl.gates[g].pins.values():
            d = nl.nets[n].driver
            if d in gids:
                visit(d)
        order.append(g)

    for g in sorted(gids):
        visit(g)
    return order


def match_mux_at(nl: Netlist, gid: int, used=frozenset()) -> MuxInstance | None:
    """Recognize a 2-to-1 mux whose output gate is ``gid``."""
    top = nl.gates.get(gid)
    if top is None or gid in used:
        return None
    name = top.cell.name
    found = None
    sbar = None
    if name == "MUX2":
        s, a, b = top.pins["S"], top.pins["A"], top.pins["B"]
        found = (s, b, a, frozenset({gid}), Pattern.MUX2_CELL)
    elif name in ("NAND2", "OR2"):
        inner = "NAND2" if name == "NAND2" else "AND2"
        x = _private(nl, top.pins["A"], inner, used)
        y = _private(nl, top.pins["B"], inner, used)
        if x is not None and y is not None and x.id != y.id:
            px = (x.pins["A"], x.pins["B"])
            py = (y.pins["A"], y.pins["B"])
            hit = _orient(nl, px, py) or _orient(nl, py, px)
            if hit:
                s, d1, d0, sbar = hit
                pattern = Pattern.NAND_NAND if name == "NAND2" else Pattern.AND_OR
                found = (s, d1, d0, frozenset({gid, x.id, y.id}), pattern)
    elif name == "INV":
        aoi = _private(nl, top.pins["A"], "AOI21", used)
        if aoi is not None:
            conj = _private(nl, aoi.pins["C"], "AND2", used)
            if conj is not None:
                pa = (aoi.pins["A"], aoi.pins["B"])
                pc = (conj.pins["A"], conj.pins["B"])
                hit = _orient(nl, pa, pc) or _orient(nl, pc, pa)
                if hit:
                    s, d1, d0, sbar = hit
                    found = (s, d1, d0, frozenset({gid, aoi.id, conj.id}), Pattern.AOI_INV)
    if found is None:
        return None
    s, d1, d0, internal, pattern = found
    if len({s, d0, d1}) != 3 or sbar in (d0, d1):
        return None
    mux = MuxInstance(s, d0, d1, top.out, internal, pattern)
    if pattern is not Pattern.MUX2_CELL and not _local_ok(nl, mux, sbar):
        return None
    return mux


def detect_muxes(nl: Netlist) -> list[MuxInstance]:
    """All structural muxes; overlaps resolved greedily by ascending output net id."""
    used: set[int] = set()
    found = []
    for gid in sorted(nl.gates, key=lambda g: nl.gates[g].out):
        m = match_mux_at(nl, gid, used)
        if m is not None:
            used |= m.internal_gates
            found.append(m)
    return found


def passes_fanout_filter(nl: Netlist, mux: MuxInstance) -> bool:
    """Data nets may feed only the mux's own gates."""
    for d in (mux.d0, mux.d1):
        if nl.is_po(d):
            return False
        if any(g not in mux.internal_gates for g, _ in nl.nets[d].fanouts):
            return False
    return True


def group_vector_muxes(nl: Netlist, muxes: Sequence[MuxInstance]) -> list[VectorMux]:
    groups: dict[int, list[MuxInstance]] = {}
    for m in muxes:
        if passes_fanout_filter(nl, m):
            groups.setdefault(m.sel, []).append(m)
    return [VectorMux(sel, tuple(sorted(ms, key=lambda m: m.out)))
            for sel, ms in sorted(groups.items())]


def extract_subcircuits(nl: Netlist, vectors: Sequence[VectorMux]) -> list[SubCircuit]:
    return [SubCircuit(nl, v, extract_cone(nl, [m.out for m in v.muxes]))
            for v in vectors]


def cone_sizes(nl: Netlist, roots: Sequence[int]) -> list[int]:
    """Gate count of the backward cone of each root net, computed together."""
    if not roots:
        return []
    bit = {}
    for k, r in enumerate(roots):
        bit[r] = bit.get(r, 0) | (1 << k)
    masks: dict[int, int] = {}
    for gid in reversed(topo_order(nl)):
        g = nl.gates[gid]
        m = bit.get(g.out, 0)
        for cg, _ in nl.nets[g.out].fanouts:
            m |= masks.get(cg, 0)
        if m:
            masks[gid] = m
    nbytes = (len(roots) + 7) // 8
    if not masks:
        return [0] * len(roots)
    buf = np.frombuffer(b"".join(m.to_bytes(nbytes, "little") for m in masks.values()),
                        dtype=np.uint8).reshape(len(masks), nbytes)
    counts = np.unpackbits(buf, axis=1, bitorder="little").sum(axis=0)
    return [int(c) for c in counts[:len(roots)]]
