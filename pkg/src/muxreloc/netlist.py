"""In-memory gate-level netlist: a DAG of single-output standard cells.

Nets and gates carry dense integer ids assigned in creation order; every
iteration that influences an output (writing, matching, tie-breaking) is
driven by those ids so results are reproducible.

Mutations can be recorded in a journal (:meth:`Netlist.begin`) and undone
with :meth:`Netlist.rollback`, which restores the netlist exactly, id
counters included.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .cells import ZERO_LEVEL_CELLS, AreaTable, CellType, PinMismatchError, eval_cell


class NetlistError(Exception):
    """Raised for structurally invalid netlists."""

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class CycleError(NetlistError):
    pass


@dataclass(eq=False)
class Net:
    id: int
    name: str
    driver: int | None = None
    is_pi: bool = False
    fanouts: set = field(default_factory=set)  # {(gate id, pin)}


@dataclass(eq=False)
class Gate:
    id: int
    name: str
    cell: CellType
    pins: dict
    out: int


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str


@dataclass
class Cone:
    root_nets: frozenset
    member_gates: frozenset
    support: frozenset

    def __len__(self):
        return len(self.member_gates)


class Netlist:
    def __init__(self, module_name: str = "top"):
        self.module_name = module_name
        self.nets: dict[int, Net] = {}
        self.gates: dict[int, Gate] = {}
        self.inputs: list[int] = []
        self.outputs: list[int] = []
        self._po: set[int] = set()
        self._net_by_name: dict[str, int] = {}
        self._gate_by_name: dict[str, int] = {}
        self._next_net = 0
        self._next_gate = 0
        self._auto = 0
        self._journal: list | None = None
        self.last_journal: list = []
        self._saved: tuple | None = None
        self.version = 0
        self._topo_cache: tuple[int, list[int]] | None = None

    # ------------------------------------------------------------------ build

    def _fresh_name(self, prefix: str, taken: Mapping[str, int]) -> str:
        while True:
            self._auto += 1
            name = f"{prefix}{self._auto}"
            if name not in taken:
                return name

    def _touch(self):
        self.version += 1

    def net(self, name: str) -> int:
        """Id of net ``name``, created as an internal net when missing."""
        nid = self._net_by_name.get(name)
        if nid is None:
            nid = self.add_net(name)
        return nid

    def find_net(self, name: str) -> int | None:
        return self._net_by_name.get(name)

    def add_net(self, name: str | None = None) -> int:
        if name is None:
            name = self._fresh_name("_n", self._net_by_name)
        elif name in self._net_by_name:
            raise NetlistError(f"duplicate net name {name!r}")
        nid = self._next_net
        self._next_net += 1
        self.nets[nid] = Net(nid, name)
        self._net_by_name[name] = nid
        self._touch()
        if self._journal is not None:
            self._journal.append(("add_net", nid))
        return nid

    def add_input(self, name: str) -> int:
        nid = self.net(name)
        net = self.nets[nid]
        if net.is_pi:
            raise NetlistError(f"duplicate primary input {name!r}")
        net.is_pi = True
        self.inputs.append(nid)
        self._touch()
        return nid

    def add_output(self, nid: int) -> None:
        if nid in self._po:
            raise NetlistError(f"duplicate primary output {self.nets[nid].name!r}")
        self.outputs.append(nid)
        self._po.add(nid)
        self._touch()

    def add_gate(self, cell: CellType, pins: Mapping[str, int],
                 out: int | None = None, name: str | None = None) -> int:
        if set(pins) != set(cell.input_pins):
            raise PinMismatchError(
                f"{cell.name} expects pins {cell.input_pins}, got {tuple(pins)}")
        if name is None:
            name = self._fresh_name("_g", self._gate_by_name)
        elif name in self._gate_by_name:
            raise NetlistError(f"duplicate instance name {name!r}")
        if out is None:
            out = self.add_net()
        gid = self._next_gate
        self._next_gate += 1
        gate = Gate(gid, name, cell, {p: pins[p] for p in cell.input_pins}, out)
        self.gates[gid] = gate
        self._gate_by_name[name] = gid
        for p, n in gate.pins.items():
            self.nets[n].fanouts.add((gid, p))
        if self.nets[out].driver is None:
            self.nets[out].driver = gid
        self._touch()
        if self._journal is not None:
            self._journal.append(("add_gate", gid))
        return gid

    # --------------------------------------------------------------- mutate

    def remove_gate(self, gid: int) -> None:
        gate = self.gates.pop(gid)
        del self._gate_by_name[gate.name]
        for p, n in gate.pins.items():
            self.nets[n].fanouts.discard((gid, p))
        if self.nets[gate.out].driver == gid:
            self.nets[gate.out].driver = None
        self._touch()
        if self._journal is not None:
            self._journal.append(("remove_gate", gate))

    def set_pin(self, gid: int, pin: str, nid: int) -> None:
        gate = self.gates[gid]
        old = gate.pins[pin]
        if old == nid:
            return
        self.nets[old].fanouts.discard((gid, pin))
        self.nets[nid].fanouts.add((gid, pin))
        gate.pins[pin] = nid
        self._touch()
        if self._journal is not None:
            self._journal.append(("set_pin", gid, pin, old))

    def set_out(self, gid: int, nid: int) -> None:
        gate = self.gates[gid]
        old = gate.out
        if self.nets[old].driver == gid:
            self.nets[old].driver = None
        gate.out = nid
        self.nets[nid].driver = gid
        self._touch()
        if self._journal is not None:
            self._journal.append(("set_out", gid, old))

    def remove_net(self, nid: int) -> None:
        net = self.nets[nid]
        if net.driver is not None or net.fanouts or net.is_pi or nid in self._po:
            raise NetlistError(f"net {net.name!r} is still in use")
        del self.nets[nid]
        del self._net_by_name[net.name]
        self._touch()
        if self._journal is not None:
            self._journal.append(("remove_net", net))

    # ------------------------------------------------------------- journal

    def begin(self) -> None:
        if self._journal is not None:
            raise NetlistError("transaction already open")
        self._journal = []
        self._saved = (self._next_net, self._next_gate, self._auto)

    def commit(self) -> list:
        journal, self._journal, self._saved = self._journal or [], None, None
        self.last_journal = journal
        return journal

    @property
    def journal(self) -> list:
        return self._journal if self._journal is not None else []

    def rollback(self) -> None:
        journal, self._journal = self._journal or [], None
        for entry in reversed(journal):
            op = entry[0]
            if op == "add_net":
                net = self.nets.pop(entry[1])
                del self._net_by_name[net.name]
            elif op == "add_gate":
                gate = self.gates.pop(entry[1])
                del self._gate_by_name[gate.name]
                for p, n in gate.pins.items():
                    self.nets[n].fanouts.discard((gate.id, p))
                if self.nets[gate.out].driver == gate.id:
                    self.nets[gate.out].driver = None
            elif op == "remove_gate":
                gate = entry[1]
                self.gates[gate.id] = gate
                self._gate_by_name[gate.name] = gate.id
                for p, n in gate.pins.items():
                    self.nets[n].fanouts.add((gate.id, p))
                self.nets[gate.out].driver = gate.id
            elif op == "set_pin":
                _, gid, pin, old = entry
                gate = self.gates[gid]
                self.nets[gate.pins[pin]].fanouts.discard((gid, pin))
                self.nets[old].fanouts.add((gid, pin))
                gate.pins[pin] = old
            elif op == "set_out":
                _, gid, old = entry
                gate = self.gates[gid]
                if self.nets[gate.out].driver == gid:
                    self.nets[gate.out].driver = None
                gate.out = old
                self.nets[old].driver = gid
            elif op == "remove_net":
                net = entry[1]
                self.nets[net.id] = net
                self._net_by_name[net.name] = net.id
        self._next_net, self._next_gate, self._auto = self._saved
        self._saved = None
        self._touch()

    # ------------------------------------------------------------- queries

    def is_po(self, nid: int) -> bool:
        return nid in self._po

    def fanout_count(self, nid: int) -> int:
        return len(self.nets[nid].fanouts) + (nid in self._po)

    def consumers(self, nid: int) -> list[tuple[int, str]]:
        return sorted(self.nets[nid].fanouts)

    def driver(self, nid: int) -> Gate | None:
        d = self.nets[nid].driver
        return None if d is None else self.gates[d]

    def net_name(self, nid: int) -> str:
        return self.nets[nid].name

    def gate_by_name(self, name: str) -> Gate:
        return self.gates[self._gate_by_name[name]]

    @property
    def input_names(self) -> list[str]:
        return [self.nets[n].name for n in self.inputs]

    @property
    def output_names(self) -> list[str]:
        return [self.nets[n].name for n in self.outputs]

    def copy(self) -> "Netlist":
        if self._journal is not None:
            raise NetlistError("cannot copy inside a transaction")
        new = Netlist(self.module_name)
        new.nets = {i: Net(n.id, n.name, n.driver, n.is_pi, set(n.fanouts))
                    for i, n in self.nets.items()}
        new.gates = {i: Gate(g.id, g.name, g.cell, dict(g.pins), g.out)
                     for i, g in self.gates.items()}
        new.inputs = list(self.inputs)
        new.outputs = list(self.outputs)
        new._po = set(self._po)
        new._net_by_name = dict(self._net_by_name)
        new._gate_by_name = dict(self._gate_by_name)
        new._next_net, new._next_gate, new._auto = (
            self._next_net, self._next_gate, self._auto)
        return new

    def structure(self) -> tuple:
        """Name-level structural fingerprint, independent of ids."""
        name = self.net_name
        gates = sorted(
            (g.name, g.cell.name, name(g.out),
             tuple(sorted((p, name(n)) for p, n in g.pins.items())))
            for g in self.gates.values())
        return (self.module_name, tuple(self.input_names),
                tuple(self.output_names), tuple(gates))

    def __repr__(self):
        return (f"<Netlist {self.module_name}: {len(self.inputs)} PI, "
                f"{len(self.outputs)} PO, {len(self.gates)} gates>")


# ----------------------------------------------------------------- analyses

def validate(netlist: Netlist) -> list[Diagnostic]:
    """Structural check; an empty list means the netlist is well formed."""
    diags: list[Diagnostic] = []
    drivers: dict[int, list[int]] = {}
    nets = netlist.nets
    for g in netlist.gates.values():
        if set(g.pins) != set(g.cell.input_pins):
            diags.append(Diagnostic(
                "pin-count", f"gate {g.name}: {g.cell.name} needs pins "
                f"{','.join(g.cell.input_pins)}"))
        for p, n in g.pins.items():
            if n not in nets:
                diags.append(Diagnostic("dangling", f"gate {g.name} pin {p}: unknown net"))
        if g.out not in nets:
            diags.append(Diagnostic("dangling", f"gate {g.name}: unknown output net"))
            continue
        drivers.setdefault(g.out, []).append(g.id)
    for nid, ds in drivers.items():
        if len(ds) > 1 or nets[nid].is_pi:
            who = ", ".join(netlist.gates[d].name for d in ds)
            diags.append(Diagnostic(
                "multi-driver", f"net {nets[nid].name} driven by {who}"
                + (" and a primary input" if nets[nid].is_pi else "")))
    for nid, net in nets.items():
        used = net.fanouts or netlist.is_po(nid)
        if used and not net.is_pi and nid not in drivers:
            diags.append(Diagnostic("dangling", f"net {net.name} is never driven"))
    if len({nets[n].name for n in netlist.outputs}) != len(netlist.outputs):
        diags.append(Diagnostic("duplicate-name", "primary output names repeat"))
    if len({nets[n].name for n in netlist.inputs}) != len(netlist.inputs):
        diags.append(Diagnostic("duplicate-name", "primary input names repeat"))
    if not any(d.kind == "dangling" for d in diags):
        try:
            topo_order(netlist)
        except CycleError as exc:
            diags.append(Diagnostic("cycle", str(exc)))
    return diags


def topo_order(netlist: Netlist) -> list[int]:
    """Gate ids in topological order (ties by id); cached per netlist version."""
    cache = netlist._topo_cache
    if cache is not None and cache[0] == netlist.version:
        return cache[1]
    gates = netlist.gates
    indeg = {}
    for gid, g in gates.items():
        indeg[gid] = sum(1 for n in g.pins.values()
                         if netlist.nets[n].driver is not None
                         and netlist.nets[n].driver in gates)
    ready = deque(sorted(gid for gid, d in indeg.items() if d == 0))
    order = []
    while ready:
        gid = ready.popleft()
        order.append(gid)
        for cg, _ in sorted(netlist.nets[gates[gid].out].fanouts):
            indeg[cg] -= 1
            if indeg[cg] == 0:
                ready.append(cg)
    if len(order) != len(gates):
        stuck = sorted(gid for gid, d in indeg.items() if d > 0)
        names = ", ".join(gates[g].name for g in stuck[:5])
        raise CycleError(f"combinational cycle through {names}")
    netlist._topo_cache = (netlist.version, order)
    return order


def levels(netlist: Netlist) -> dict[int, int]:
    """Level per net: PIs 0, INV/BUF add 0, every other cell adds 1."""
    lev: dict[int, int] = {}
    for nid, net in netlist.nets.items():
        if net.driver is None:
            lev[nid] = 0
    for gid in topo_order(netlist):
        g = netlist.gates[gid]
        base = max((lev.get(n, 0) for n in g.pins.values()), default=0)
        lev[g.out] = base + (0 if g.cell.name in ZERO_LEVEL_CELLS else 1)
    return lev


def max_level(netlist: Netlist) -> int:
    if not netlist.gates:
        return 0
    return max(levels(netlist).values())


def extract_cone(netlist: Netlist, roots: Iterable[int],
                 stop_at: Iterable[int] = ()) -> Cone:
    """Gates backward-reachable from ``roots``, not crossing ``stop_at``."""
    roots = frozenset(roots)
    stop = frozenset(stop_at)
    for n in roots | stop:
        if n not in netlist.nets:
            raise KeyError(f"unknown net id {n}")
    members: set[int] = set()
    support: set[int] = set()
    seen: set[int] = set()
    stack = list(roots)
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        d = netlist.nets[n].driver
        if (n in stop and n not in roots) or d is None:
            support.add(n)
            continue
        if n in stop:
            support.add(n)
            continue
        members.add(d)
        stack.extend(netlist.gates[d].pins.values())
    return Cone(roots, frozenset(members), frozenset(support))


def sweep(netlist: Netlist, start_nets: Iterable[int],
          protected: Iterable[int] = ()) -> list[int]:
    """Delete gates made dead, starting from ``start_nets``; returns removed ids."""
    protected = set(protected)
    removed = []
    stack = sorted(set(start_nets), reverse=True)
    while stack:
        n = stack.pop()
        net = netlist.nets.get(n)
        if net is None or net.fanouts or net.driver is None:
            continue
        if n in protected or netlist.is_po(n) or net.is_pi:
            continue
        gate = netlist.gates[net.driver]
        ins = list(gate.pins.values())
        netlist.remove_gate(gate.id)
        netlist.remove_net(n)
        removed.append(gate.id)
        for i in ins:
            stack.append(i)
    return removed


def remove_dead(netlist: Netlist, protected: Iterable[int] = ()) -> tuple[Netlist, int]:
    """Remove, in place, every gate whose output reaches no PO or protected net."""
    starts = [g.out for g in netlist.gates.values()]
    removed = sweep(netlist, starts, protected)
    return netlist, len(removed)


def area(netlist: Netlist, table: AreaTable) -> Fraction:
    return sum((table[g.cell] for g in netlist.gates.values()), Fraction(0))


# --------------------------------------------------------------- simulation

WORD_BITS = 64


def simulate(netlist: Netlist, vectors: Mapping[str, np.ndarray]) -> dict[str, np.ndarray]:
    """Evaluate the netlist on 64 lanes per word.

    ``vectors`` maps every PI name to a ``uint64`` array (all the same shape).
    Returns PO name -> ``uint64`` array.
    """
    names = set(netlist.input_names)
    if set(vectors) != names:
        missing = sorted(names - set(vectors))
        extra = sorted(set(vectors) - names)
        raise NetlistError(f"PI mismatch: missing {missing}, unexpected {extra}")
    shape = None
    values: dict[int, np.ndarray] = {}
    for nid in netlist.inputs:
        arr = np.asarray(vectors[netlist.nets[nid].name], dtype=np.uint64)
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise NetlistError("PI vectors differ in shape")
        values[nid] = arr
    if shape is None:
        shape = (1,)
    remaining = {nid: len(net.fanouts) for nid, net in netlist.nets.items()}
    keep = set(netlist.outputs)
    gates = netlist.gates
    for gid in topo_order(netlist):
        g = gates[gid]
        ins = {p: values[n] for p, n in g.pins.items()}
        values[g.out] = g.cell.logic(**ins)
        for n in g.pins.values():
            remaining[n] -= 1
            if remaining[n] == 0 and n not in keep:
                del values[n]
    out = {}
    for nid in netlist.outputs:
        v = values.get(nid)
        if v is None:  # undriven PO cannot happen on a validated netlist
            raise NetlistError(f"output {netlist.nets[nid].name} has no value")
        out[netlist.nets[nid].name] = np.broadcast_to(v, shape).astype(np.uint64)
    return out


def simulate_bits(netlist: Netlist, assignment: Mapping[str, int]) -> dict[str, int]:
    """Scalar evaluation of one vector, gate by gate through ``eval_cell``."""
    if set(assignment) != set(netlist.input_names):
        raise NetlistError("PI mismatch")
    val = {nid: int(assignment[netlist.nets[nid].name]) & 1 for nid in netlist.inputs}
    for gid in topo_order(netlist):
        g = netlist.gates[gid]
        val[g.out] = eval_cell(g.cell, {p: val[n] for p, n in g.pins.items()})
    return {netlist.nets[n].name: val[n] for n in netlist.outputs}
