"""GNL text format: read, write and summarize gate-level netlists.

::

    .module <name>
    .inputs <net> <net> ...
    .outputs <net> <net> ...
    .gate <CELL> <inst> O=<net> A=<net> [B=<net>] [C=<net>] [S=<net>]
    .end

``#`` starts a comment, blank lines are ignored and ``.inputs``/``.outputs``
may repeat.  Nets first seen on a gate pin are created as internal nets; a
net that is used but never driven (and is not a PI) is rejected.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .cells import CELL_TYPES, AreaTable, canonical_pin_order
from .netlist import Netlist, NetlistError, area, max_level, validate

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.\[\]]*\Z")


class GnlSyntaxError(NetlistError):
    def __init__(self, lineno: int, reason: str):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason


def _ident(tok: str, lineno: int, what: str) -> str:
    if not IDENT.match(tok):
        raise GnlSyntaxError(lineno, f"bad {what} identifier {tok!r}")
    return tok


def parse(text: str) -> Netlist:
    """Parse GNL text into a validated netlist with canonical pin order."""
    nl: Netlist | None = None
    outputs: list[tuple[int, str]] = []
    gate_lines: list[tuple[int, str, str, dict, str]] = []
    ended = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        kw = toks[0]
        if ended:
            raise GnlSyntaxError(lineno, "text after .end")
        if not kw.startswith("."):
            raise GnlSyntaxError(lineno, f"expected a directive, got {kw!r}")
        if kw == ".module":
            if nl is not None:
                raise GnlSyntaxError(lineno, "second .module")
            if len(toks) != 2:
                raise GnlSyntaxError(lineno, ".module takes one name")
            nl = Netlist(_ident(toks[1], lineno, "module"))
            continue
        if nl is None:
            raise GnlSyntaxError(lineno, f"{kw} before .module")
        if kw == ".inputs":
            for t in toks[1:]:
                _ident(t, lineno, "net")
                if nl.find_net(t) is not None and nl.nets[nl.find_net(t)].is_pi:
                    raise GnlSyntaxError(lineno, f"duplicate input {t!r}")
                nl.add_input(t)
        elif kw == ".outputs":
            for t in toks[1:]:
                outputs.append((lineno, _ident(t, lineno, "net")))
        elif kw == ".gate":
            if len(toks) < 4:
                raise GnlSyntaxError(lineno, ".gate needs CELL, instance and pins")
            cell_name, inst = toks[1], toks[2]
            if cell_name not in CELL_TYPES:
                raise GnlSyntaxError(lineno, f"unknown cell {cell_name!r}")
            _ident(inst, lineno, "instance")
            pins: dict[str, str] = {}
            for t in toks[3:]:
                pin, eq, net = t.partition("=")
                if not eq or not pin:
                    raise GnlSyntaxError(lineno, f"expected PIN=net, got {t!r}")
                if pin in pins:
                    raise GnlSyntaxError(lineno, f"pin {pin} given twice")
                pins[pin] = _ident(net, lineno, "net")
            cell = CELL_TYPES[cell_name]
            if "O" not in pins:
                raise GnlSyntaxError(lineno, f"gate {inst}: missing O pin")
            out = pins.pop("O")
            want = set(cell.input_pins)
            if set(pins) != want:
                raise GnlSyntaxError(
                    lineno, f"gate {inst}: {cell_name} takes pins O,"
                    f"{','.join(cell.input_pins)}")
            gate_lines.append((lineno, cell_name, inst, pins, out))
        elif kw == ".end":
            ended = True
        else:
            raise GnlSyntaxError(lineno, f"unknown directive {kw!r}")
    if nl is None:
        raise GnlSyntaxError(0, "missing .module")
    if not ended:
        raise GnlSyntaxError(len(text.splitlines()), "missing .end")

    seen_inst: set[str] = set()
    driven: dict[str, int] = {}
    for lineno, cell_name, inst, pins, out in gate_lines:
        if inst in seen_inst:
            raise GnlSyntaxError(lineno, f"duplicate instance name {inst!r}")
        seen_inst.add(inst)
        cell = CELL_TYPES[cell_name]
        if out in driven:
            raise GnlSyntaxError(lineno, f"net {out!r} already driven on line {driven[out]}")
        o = nl.find_net(out)
        if o is not None and nl.nets[o].is_pi:
            raise GnlSyntaxError(lineno, f"gate {inst} drives primary input {out!r}")
        driven[out] = lineno
        ids = {p: nl.net(n) for p, n in pins.items()}
        ids = canonical_pin_order(cell, ids, key=nl.net_name)
        nl.add_gate(cell, ids, nl.net(out), inst)
    for lineno, name in outputs:
        nid = nl.find_net(name)
        if nid is None or (nl.nets[nid].driver is None and not nl.nets[nid].is_pi):
            raise GnlSyntaxError(lineno, f"output {name!r} is never driven")
        if nl.is_po(nid):
            raise GnlSyntaxError(lineno, f"duplicate output {name!r}")
        nl.add_output(nid)
    diags = validate(nl)
    if diags:
        raise NetlistError("; ".join(d.message for d in diags), diags)
    return nl


def read(path: str | Path) -> Netlist:
    return parse(Path(path).read_text(encoding="utf-8"))


def write(netlist: Netlist) -> str:
    """Canonical GNL: gates in ascending id order, pins in declared order."""
    name = netlist.net_name
    lines = [f".module {netlist.module_name}"]
    if netlist.inputs:
        lines.append(".inputs " + " ".join(netlist.input_names))
    if netlist.outputs:
        lines.append(".outputs " + " ".join(netlist.output_names))
    for gid in sorted(netlist.gates):
        g = netlist.gates[gid]
        pins = canonical_pin_order(g.cell, g.pins, key=name)
        parts = [f"O={name(g.out)}"] + [f"{p}={name(pins[p])}" for p in g.cell.input_pins]
        lines.append(f".gate {g.cell.name} {g.name} " + " ".join(parts))
    lines.append(".end")
    return "\n".join(lines) + "\n"


def save(netlist: Netlist, path: str | Path) -> None:
    Path(path).write_text(write(netlist), encoding="utf-8")


@dataclass
class Stats:
    cells: dict[str, int] = field(default_factory=dict)
    inputs: int = 0
    outputs: int = 0
    gates: int = 0
    lev: int = 0
    area: Fraction = Fraction(0)

    def as_dict(self) -> dict:
        a = self.area
        return {"cells": dict(self.cells), "inputs": self.inputs,
                "outputs": self.outputs, "gates": self.gates, "lev": self.lev,
                "area": int(a) if a.denominator == 1 else float(a)}

    def format(self) -> str:
        out = [f"inputs  {self.inputs}", f"outputs {self.outputs}",
               f"gates   {self.gates}"]
        for cell, n in self.cells.items():
            out.append(f"  {cell:<6} {n}")
        a = self.area
        out.append(f"Lev     {self.lev}")
        out.append(f"Area    {a if a.denominator != 1 else int(a)}")
        return "\n".join(out)


def stats(netlist: Netlist, table: AreaTable | None = None) -> Stats:
    table = table or AreaTable.default()
    counts = Counter(g.cell.name for g in netlist.gates.values())
    return Stats(
        cells=dict(sorted(counts.items())),
        inputs=len(netlist.inputs),
        outputs=len(netlist.outputs),
        gates=len(netlist.gates),
        lev=max_level(netlist),
        area=area(netlist, table),
    )
