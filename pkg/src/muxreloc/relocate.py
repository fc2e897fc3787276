"""Move a 2-to-1 mux from the output of two similar cones to their inputs.

For a mux ``out = s ? F1 : F0`` whose data cones share structure, the
paired gates of F1 are kept as the merged cone, the F0 copies are left to
die, and every boundary edge gets its own small mux ``s ? x_i : y_i``.
Inversion differences found in approximate mode are repaired with XOR2
gates on ``s`` or ``s-bar``.  An edit is kept only when it strictly reduces
area; otherwise the netlist is rolled back to the exact previous state.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .cells import BUF, INV, MUX2, XOR2, AreaTable
from .isomatch import ROOT, Boundary, MatchOptions, Safety, relocation_boundary
from .muxdetect import (MuxInstance, cone_sizes, detect_muxes, group_vector_muxes,
                        match_mux_at, passes_fanout_filter)
from .netlist import Netlist, NetlistError, area, sweep, validate


class RelocationError(NetlistError):
    """An edit produced a structurally invalid netlist (a bug, not a user error)."""


@dataclass
class RelocationResult:
    mux: str
    sel: str
    accepted: bool
    reason: str
    area_before: Fraction
    area_after: Fraction
    matched_pairs: int = 0
    boundary_edges: int = 0
    muxes_added: int = 0
    xors_added: int = 0
    invs_added: int = 0
    gates_removed: int = 0
    gates_cloned: int = 0
    boundary_depth: int = 0
    lookahead_calls: int = 0

    @property
    def gain(self) -> Fraction:
        return self.area_before - self.area_after

    def as_dict(self) -> dict:
        d = asdict(self)
        d["area_before"] = _num(self.area_before)
        d["area_after"] = _num(self.area_after)
        return d


def _num(x: Fraction):
    return int(x) if x.denominator == 1 else float(x)


# ------------------------------------------------------------------ editing

def _closure(nl: Netlist, b: Boundary, chain1: set) -> set:
    """Region-1 gates that must survive unchanged because something outside sees them."""
    region1 = b.region1
    allowed = region1 | set(b.mux.internal_gates) | chain1
    keep = set()
    for g in region1:
        out = nl.gates[g].out
        if nl.is_po(out) or any(c not in allowed for c, _ in nl.nets[out].fanouts):
            keep.add(g)
    for c in chain1:
        out = nl.gates[c].out
        if nl.is_po(out) or any(x not in allowed for x, _ in nl.nets[out].fanouts):
            keep.add(c)
    stack = list(keep)
    while stack:
        g = stack.pop()
        for n in nl.gates[g].pins.values():
            d = nl.nets[n].driver
            if d is not None and d not in keep and (d in region1 or d in chain1):
                keep.add(d)
                stack.append(d)
    return keep & region1


class _Editor:
    def __init__(self, nl: Netlist, b: Boundary, opts: MatchOptions):
        self.nl, self.b, self.mux = nl, b, b.mux
        self.sel = b.mux.sel
        self.chain1 = {c for e in b.edges for c in e.c1.chain}
        clones = set()
        if opts.safety_mode is Safety.DUPLICATE:
            clones = _closure(nl, b, self.chain1)
        self.excluded = (b.region1 | b.region0 | self.chain1
                         | set(b.mux.internal_gates))
        self.clone_of = {}
        for g in sorted(clones):
            G = nl.gates[g]
            self.clone_of[g] = nl.add_gate(G.cell, dict(G.pins))
        self.excluded |= set(self.clone_of.values())
        self._sbar = None
        self._mux: dict = {}
        self._xor: dict = {}
        self._inv: dict = {}

    def new_out(self, g: int) -> int:
        return self.nl.gates[self.clone_of.get(g, g)].out

    def sbar(self) -> int:
        if self._sbar is None:
            nl = self.nl
            cands = sorted(g for g, p in nl.nets[self.sel].fanouts
                           if p == "A" and nl.gates[g].cell is INV and g not in self.excluded)
            if cands:
                self._sbar = nl.gates[cands[0]].out
            else:
                self._sbar = nl.gates[nl.add_gate(INV, {"A": self.sel})].out
        return self._sbar

    def mux2(self, y: int, x: int) -> int:
        key = (y, x)
        if key not in self._mux:
            nl = self.nl
            reuse = [g for g, p in nl.nets[x].fanouts
                     if p == "B" and g not in self.excluded and nl.gates[g].cell is MUX2
                     and nl.gates[g].pins["A"] == y and nl.gates[g].pins["S"] == self.sel]
            if reuse:
                self._mux[key] = nl.gates[min(reuse)].out
            else:
                gid = nl.add_gate(MUX2, {"A": y, "B": x, "S": self.sel})
                self._mux[key] = nl.gates[gid].out
        return self._mux[key]

    def xor(self, base: int, ctl: int) -> int:
        key = (base, ctl)
        if key not in self._xor:
            gid = self.nl.add_gate(XOR2, {"A": base, "B": ctl})
            self._xor[key] = self.nl.gates[gid].out
        return self._xor[key]

    def inv(self, base: int) -> int:
        if base not in self._inv:
            gid = self.nl.add_gate(INV, {"A": base})
            self._inv[base] = self.nl.gates[gid].out
        return self._inv[base]

    def signal(self, e) -> int | None:
        """New net for the consumer pin of edge ``e``; ``None`` keeps the pin."""
        nl = self.nl
        if not e.parity_edge:
            return self.mux2(e.c0.top, e.c1.top)
        p1, p0 = e.c1.parity, e.c0.parity
        if e.shared:
            if p1 == p0:
                return None
            base = e.c1.net
        else:
            child = nl.nets[e.c1.net].driver
            base = self.new_out(child)
            if p1 == p0 == 0:
                if not e.c1.chain and child not in self.clone_of:
                    return None
                return base
            if p1 == p0 == 1:
                cloned = e.consumer1 in self.clone_of
                if not cloned and all(nl.fanout_count(nl.gates[c].out) == 1
                                      for c in e.c1.chain):
                    nl.set_pin(e.c1.chain[-1], "A", base)
                    return None
                return self.inv(base)
        return self.xor(base, self.sel if p1 else self.sbar())

    def run(self) -> int:
        nl, mux = self.nl, self.mux
        root = None
        for e in self.b.edges:
            sig = self.signal(e)
            if e.consumer1 == ROOT:
                root = e.c1.top if sig is None else sig
            elif sig is not None:
                nl.set_pin(self.clone_of.get(e.consumer1, e.consumer1), e.pin1, sig)
        starts = []
        orphans = []
        for gid in sorted(mux.internal_gates):
            G = nl.gates[gid]
            starts.extend(G.pins.values())
            if G.out != mux.out:
                orphans.append(G.out)
            nl.remove_gate(gid)
        for n in orphans:
            net = nl.nets.get(n)
            if net is not None and not net.fanouts and net.driver is None \
                    and not net.is_pi and not nl.is_po(n):
                nl.remove_net(n)
        starts.extend(entry[3] for entry in nl.journal if entry[0] == "set_pin")
        sweep(nl, starts, protected={root})
        rn = nl.nets[root]
        if rn.driver is not None and not rn.fanouts and not rn.is_pi and not nl.is_po(root):
            nl.set_out(rn.driver, mux.out)
            nl.remove_net(root)
        else:
            nl.add_gate(BUF, {"A": root}, mux.out)
        return root


def _touched(nl: Netlist) -> set:
    gids = set()
    for entry in nl.journal:
        if entry[0] in ("add_gate", "set_pin", "set_out"):
            gids.add(entry[1])
    return {g for g in gids if g in nl.gates}


def _local_problems(nl: Netlist, mux: MuxInstance) -> list[str]:
    bad = []
    for gid in _touched(nl):
        g = nl.gates[gid]
        for p, n in g.pins.items():
            net = nl.nets.get(n)
            if net is None or (net.driver is None and not net.is_pi):
                bad.append(f"gate {g.name} pin {p} reads an undriven net")
        if nl.nets.get(g.out) is None or nl.nets[g.out].driver != gid:
            bad.append(f"gate {g.name} lost its output net")
    if nl.nets.get(mux.out) is None or nl.nets[mux.out].driver is None:
        bad.append("mux output is undriven")
    return bad


def _delta(nl: Netlist, table: AreaTable) -> dict:
    added, removed = [], []
    for entry in nl.journal:
        if entry[0] == "add_gate":
            added.append(entry[1])
        elif entry[0] == "remove_gate":
            removed.append(entry[1])
    new = set(added)
    alive = [nl.gates[g] for g in added if g in nl.gates]
    gone = [g for g in removed if g.id not in new]
    d = sum((table[g.cell] for g in alive), Fraction(0))
    d -= sum((table[g.cell] for g in gone), Fraction(0))
    return {
        "delta": d,
        "muxes": sum(g.cell is MUX2 for g in alive),
        "xors": sum(g.cell is XOR2 for g in alive),
        "invs": sum(g.cell is INV for g in alive),
        "removed": len(gone),
    }


def _trial(nl: Netlist, b: Boundary, opts: MatchOptions, table: AreaTable,
           check: bool):
    """Apply inside an open transaction; returns (delta info, clone count)."""
    editor = _Editor(nl, b, opts)
    editor.run()
    problems = _local_problems(nl, b.mux)
    if check and not problems:
        problems = [d.message for d in validate(nl)]
    if problems:
        nl.rollback()
        raise RelocationError("relocation broke the netlist: " + "; ".join(problems))
    return _delta(nl, table), len(editor.clone_of)


def estimate_gain(nl: Netlist, boundary: Boundary, table: AreaTable | None = None,
                  opts: MatchOptions = MatchOptions()) -> Fraction:
    """Exact area saving of relocating ``boundary.mux``; the netlist is left untouched."""
    table = table or AreaTable.default()
    nl.begin()
    try:
        info, _ = _trial(nl, boundary, opts, table, check=False)
    except RelocationError:
        raise
    except Exception:
        nl.rollback()
        raise
    nl.rollback()
    return -info["delta"]


def relocate_single_mux(nl: Netlist, mux: MuxInstance,
                        opts: MatchOptions = MatchOptions(),
                        table: AreaTable | None = None, *,
                        area_before: Fraction | None = None,
                        check: bool = False) -> RelocationResult:
    """Relocate one mux in place when that strictly reduces area."""
    table = table or AreaTable.default()
    before = area(nl, table) if area_before is None else area_before
    res = RelocationResult(nl.net_name(mux.out), nl.net_name(mux.sel), False, "",
                           before, before)
    b = relocation_boundary(nl, mux, opts)
    if b is None or not b.pairs:
        res.reason = "no-match"
        return res
    res.matched_pairs = len(b.pairs)
    res.boundary_edges = len(b.boundary_edges)
    res.boundary_depth = b.depth
    res.lookahead_calls = b.lookahead_calls
    nl.begin()
    try:
        info, clones = _trial(nl, b, opts, table, check)
    except RelocationError:
        raise
    except Exception:
        nl.rollback()
        raise
    if info["delta"] >= 0:
        nl.rollback()
        res.reason = "no-gain"
        return res
    nl.commit()
    res.accepted = True
    res.reason = "accepted"
    res.area_after = before + info["delta"]
    res.muxes_added = info["muxes"]
    res.xors_added = info["xors"]
    res.invs_added = info["invs"]
    res.gates_removed = info["removed"]
    res.gates_cloned = clones
    return res


# --------------------------------------------------------------- top level

@dataclass
class OptimizeReport:
    area_before: Fraction
    area_after: Fraction = Fraction(0)
    passes: int = 0
    attempted: int = 0
    inventory: list = field(default_factory=list)
    subcircuits: list = field(default_factory=list)

    @property
    def accepted(self) -> int:
        return sum(r.accepted for s in self.subcircuits for r in s["relocations"])

    def _sum(self, attr: str) -> int:
        return sum(getattr(r, attr) for s in self.subcircuits
                   for r in s["relocations"] if r.accepted)

    def as_dict(self) -> dict:
        accepted = [r for s in self.subcircuits for r in s["relocations"] if r.accepted]
        return {
            "area_before": _num(self.area_before),
            "area_after": _num(self.area_after),
            "passes": self.passes,
            "attempted": self.attempted,
            "accepted": len(accepted),
            "muxes_added": self._sum("muxes_added"),
            "xors_added": self._sum("xors_added"),
            "gates_removed": self._sum("gates_removed"),
            "gates_cloned": self._sum("gates_cloned"),
            "boundary_depth": max((r.boundary_depth for r in accepted), default=0),
            "inventory": self.inventory,
            "subcircuits": [
                {"sel": s["sel"], "muxes": s["muxes"],
                 "relocations": [r.as_dict() for r in s["relocations"]]}
                for s in self.subcircuits],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent)


def _neighbor_muxes(nl: Netlist, journal: list, skip=frozenset()) -> list[int]:
    """Output nets of muxes at, or one or two levels above, the edited nets.

    Primary inputs only gain or lose consumers, so they are not expanded;
    muxes whose output is in ``skip`` are already queued.
    """
    nets = set()
    for entry in journal:
        op = entry[0]
        if op == "set_pin":
            nets.add(entry[3])
            if entry[1] in nl.gates:
                nets.add(nl.gates[entry[1]].pins[entry[2]])
        elif op == "add_gate" and entry[1] in nl.gates:
            g = nl.gates[entry[1]]
            nets.add(g.out)
            nets.update(g.pins.values())
        elif op == "remove_gate":
            nets.update(entry[1].pins.values())
        elif op == "set_out":
            if entry[1] in nl.gates:
                nets.add(nl.gates[entry[1]].out)
    gates = set()
    for n in nets:
        net = nl.nets.get(n)
        if net is None or net.is_pi:
            continue
        if net.driver is not None:
            gates.add(net.driver)
        for c, _ in net.fanouts:
            gates.add(c)
            for c2, _ in nl.nets[nl.gates[c].out].fanouts:
                gates.add(c2)
    found = []
    for gid in sorted(gates):
        if nl.gates[gid].out in skip:
            continue
        m = match_mux_at(nl, gid)
        if m is not None and passes_fanout_filter(nl, m):
            found.append(m.out)
    return found


def _initial_queue(nl: Netlist) -> list[int]:
    order = []
    for v in group_vector_muxes(nl, detect_muxes(nl)):
        outs = [m.out for m in v.muxes]
        sizes = cone_sizes(nl, outs)
        order.extend(o for _, o in sorted(zip(sizes, outs), key=lambda t: (-t[0], t[1])))
    return order


def optimize(nl: Netlist, opts: MatchOptions = MatchOptions(),
             table: AreaTable | None = None, *, inplace: bool = False,
             check: bool = False, max_passes: int = 100):
    """Relocate muxes until a full pass accepts nothing.

    Returns ``(netlist, report)``; the input is copied unless ``inplace``.
    """
    work = nl if inplace else nl.copy()
    table = table or AreaTable.default()
    total = area(work, table)
    report = OptimizeReport(area_before=total)
    vectors = group_vector_muxes(work, detect_muxes(work))
    report.inventory = [
        {"sel": work.net_name(v.sel),
         "outputs": [work.net_name(m.out) for m in v.muxes],
         "patterns": [m.pattern.value for m in v.muxes]}
        for v in vectors]
    buckets: dict[str, dict] = {}
    for v in vectors:
        name = work.net_name(v.sel)
        buckets[name] = {"sel": name, "muxes": len(v.muxes), "relocations": []}

    for _ in range(max_passes):
        report.passes += 1
        queue = deque(_initial_queue(work))
        queued = set(queue)
        accepted = 0
        while queue:
            onet = queue.popleft()
            queued.discard(onet)
            net = work.nets.get(onet)
            if net is None or net.driver is None:
                continue
            m = match_mux_at(work, net.driver)
            if m is None or not passes_fanout_filter(work, m):
                continue
            report.attempted += 1
            res = relocate_single_mux(work, m, opts, table, area_before=total, check=check)
            bucket = buckets.setdefault(res.sel, {"sel": res.sel, "muxes": 0,
                                                  "relocations": []})
            bucket["relocations"].append(res)
            if not res.accepted:
                continue
            if res.area_after >= total:
                raise RelocationError("accepted edit did not reduce area")
            total = res.area_after
            accepted += 1
            for o in _neighbor_muxes(work, work.last_journal, queued):
                if o not in queued:
                    queue.append(o)
                    queued.add(o)
        if not accepted:
            break
    diags = validate(work)
    if diags:
        raise RelocationError("; ".join(d.message for d in diags), diags)
    report.area_after = area(work, table)
    if report.area_after != total:
        raise RelocationError("area bookkeeping drifted")
    report.subcircuits = list(buckets.values())
    return work, report
