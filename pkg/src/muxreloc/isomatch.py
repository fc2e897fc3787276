"""Common-logic identification between the two data cones of a 2-to-1 mux.

The two cones are walked backward in lockstep from the mux data pins.  A
gate of the s=1 cone is paired with a gate of the s=0 cone when they have
the same cell and sit on corresponding pins of an already-paired consumer
pair.  Inside one symmetry class of a cell the pins are interchangeable, so
the children of a paired gate are bijected class by class:

1. identical nets (shared operands) pair first,
2. gates whose signature (cell, pin class, side-fanout count) is unique on
   both sides pair directly,
3. remaining same-signature groups are resolved by a bounded look-ahead
   that counts how many gates each candidate bijection would match,
4. whatever is left becomes a boundary edge.

In approximate mode inverters are transparent: each edge records the
inversion parity on both sides and the caller repairs differing parities
with select-gated XOR2 gates.

With ``Safety.STRICT`` a gate of the s=1 cone is paired only once every one
of its consumers inside the cone has proposed the same partner, so an
externally observed gate is never rewired.  ``Safety.DUPLICATE`` pairs such
gates and leaves it to the relocation step to clone them.
"""
from __future__ import annotations

import enum
from collections import Counter, deque
from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, Hashable, Sequence

from .cells import ZERO_LEVEL_CELLS
from .muxdetect import MuxInstance
from .netlist import Netlist, extract_cone

ROOT = -1
EXHAUSTIVE_GROUP = 4


class Safety(enum.Enum):
    STRICT = "strict"
    DUPLICATE = "duplicate"


@dataclass(frozen=True)
class MatchOptions:
    approximate: bool = True
    lookahead_depth: int = 3
    safety_mode: Safety = Safety.STRICT

    def __post_init__(self):
        if self.lookahead_depth < 1:
            raise ValueError("lookahead_depth must be >= 1")


@dataclass(frozen=True)
class Resolved:
    """A pin net followed backward through skipped single-input cells."""
    top: int
    net: int
    parity: int
    chain: tuple = ()


@dataclass(frozen=True)
class Signature:
    cell: str
    pin_class: tuple
    side_fanouts: int


@dataclass
class Edge:
    consumer1: int
    pin1: str
    consumer0: int
    pin0: str
    c1: Resolved
    c0: Resolved
    internal: bool = False

    @property
    def position(self) -> tuple:
        return (self.consumer1, self.pin1)

    @property
    def shared(self) -> bool:
        return self.c1.net == self.c0.net

    @property
    def parity_edge(self) -> bool:
        return self.internal or self.shared


@dataclass
class Boundary:
    mux: MuxInstance
    pairs: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    depth: int = 0
    lookahead_calls: int = 0
    pairings_scored: int = 0
    visits: int = 0

    @property
    def region1(self) -> set:
        return {g for g, _ in self.pairs}

    @property
    def region0(self) -> set:
        return {h for _, h in self.pairs}

    @property
    def boundary_edges(self) -> list:
        return [e for e in self.edges if not e.internal]

    @property
    def boundary_pairs(self) -> list:
        """(x_i, y_i) per boundary edge: the nets a boundary mux would select."""
        out = []
        for e in self.boundary_edges:
            if e.shared:
                out.append((e.c1.net, e.c0.net))
            else:
                out.append((e.c1.top, e.c0.top))
        return out

    def _inv(self, side: int) -> set:
        res = set()
        for e in self.edges:
            if not e.parity_edge:
                continue
            c = e.c1 if side else e.c0
            if c.parity:
                res.add((e.position, c.parity))
        return res

    @property
    def inv1(self) -> set:
        return self._inv(1)

    @property
    def inv0(self) -> set:
        return self._inv(0)


def signature(nl: Netlist, net: int, pin_class: tuple) -> Signature | None:
    g = nl.driver(net)
    if g is None:
        return None
    return Signature(g.cell.name, tuple(pin_class), nl.fanout_count(net) - 1)


def unique_fanout_pairs(l0: Sequence, l1: Sequence,
                        sig: Callable[[object], Hashable],
                        sig1: Callable[[object], Hashable] | None = None):
    """Pair items whose signature occurs exactly once in each list.

    ``sig1`` defaults to ``sig``.  Returns ``(pairs, rest0, rest1)`` with
    pairs given as ``(l0 item, l1 item)`` in ``l0`` order.
    """
    sig1 = sig1 or sig
    s0 = [sig(x) for x in l0]
    s1 = [sig1(y) for y in l1]
    c0, c1 = Counter(s0), Counter(s1)
    where1 = {s: k for k, s in enumerate(s1)}
    pairs = []
    taken0, taken1 = set(), set()
    for k, s in enumerate(s0):
        if s is not None and c0[s] == 1 and c1.get(s) == 1:
            pairs.append((l0[k], l1[where1[s]]))
            taken0.add(k)
            taken1.add(where1[s])
    rest0 = [x for k, x in enumerate(l0) if k not in taken0]
    rest1 = [y for k, y in enumerate(l1) if k not in taken1]
    return pairs, rest0, rest1


class _Matcher:
    def __init__(self, nl: Netlist, mux: MuxInstance | None, opts: MatchOptions):
        self.nl = nl
        self.mux = mux
        self.opts = opts
        self.strict = opts.safety_mode is Safety.STRICT
        self.skip = {"BUF", "INV"} if opts.approximate else {"BUF"}
        self.forbidden = set()
        if mux is not None:
            self.forbidden = set(extract_cone(nl, [mux.sel]).member_gates)
            self.forbidden |= set(mux.internal_gates)
        self.m1: dict[int, int] = {}
        self.m0: dict[int, int] = {}
        self.depth_of: dict[int, int] = {}
        self.pending: dict[int, list] = {}
        self.queue: deque = deque()
        self.b = Boundary(mux)
        self._memo: dict = {}

    # ---------------------------------------------------------- helpers

    def resolve(self, net: int, side: int) -> Resolved:
        nl = self.nl
        chain = []
        parity = 0
        n = net
        while True:
            g = nl.driver(n)
            if g is None or g.cell.name not in self.skip or g.id in self.forbidden:
                break
            if side == 1 and self.strict and (nl.fanout_count(n) != 1):
                break
            if g.id in self.m0 or g.id in self.m1:
                break
            chain.append(g.id)
            parity ^= g.cell.name == "INV"
            n = g.pins["A"]
        return Resolved(net, n, int(parity), tuple(chain))

    def _gate1(self, net: int):
        g = self.nl.driver(net)
        if g is None or g.id in self.forbidden or g.id in self.m0:
            return None
        return g

    def _gate0(self, net: int):
        g = self.nl.driver(net)
        if g is None or g.id in self.forbidden or g.id in self.m1:
            return None
        return g

    def _compatible(self, g, h) -> bool:
        return g is not None and h is not None and g.id != h.id and g.cell is h.cell

    def _step(self, cell_name: str) -> int:
        return 0 if cell_name in ZERO_LEVEL_CELLS else 1

    # -------------------------------------------------------------- run

    def run(self) -> Boundary | None:
        nl, mux = self.nl, self.mux
        r1 = self.resolve(mux.d1, 1)
        r0 = self.resolve(mux.d0, 0)
        g, h = self._gate1(r1.net), self._gate0(r0.net)
        if not self._compatible(g, h) or r1.net == r0.net:
            return None
        if self.strict:
            allowed = set(mux.internal_gates) | set(r1.chain)
            if nl.is_po(r1.net) or any(c not in allowed for c, _ in nl.nets[r1.net].fanouts):
                return None
        root = Edge(ROOT, "B", ROOT, "A", r1, r0, internal=True)
        self.b.edges.append(root)
        self._match(g.id, h.id, self._step(g.cell.name))
        while self.queue:
            self._expand(*self.queue.popleft())
        return self.b

    def _match(self, g: int, h: int, depth: int) -> None:
        self.m1[g] = h
        self.m0[h] = g
        self.depth_of[g] = depth
        self.b.pairs.append((g, h))
        self.b.depth = max(self.b.depth, depth)
        self.queue.append((g, h))

    def _expand(self, g: int, h: int) -> None:
        nl = self.nl
        G, H = nl.gates[g], nl.gates[h]
        self.b.visits += 2
        for cls in G.cell.symmetry_classes:
            kids1 = [(p, self.resolve(G.pins[p], 1)) for p in cls]
            kids0 = [(p, self.resolve(H.pins[p], 0)) for p in cls]
            for (p1, c1), (p0, c0) in self._pair_slot(cls, kids1, kids0):
                edge = Edge(g, p1, h, p0, c1, c0)
                self.b.edges.append(edge)
                self._propose(edge)

    def _propose(self, edge: Edge) -> None:
        c1, c0 = edge.c1, edge.c0
        if c1.net == c0.net:
            return
        G1, G0 = self._gate1(c1.net), self._gate0(c0.net)
        if not self._compatible(G1, G0):
            return
        if G1.id in self.m1:
            if self.m1[G1.id] == G0.id:
                edge.internal = True
            return
        if G0.id in self.m0:
            return
        depth = self.depth_of[edge.consumer1] + self._step(G1.cell.name)
        if not self.strict:
            edge.internal = True
            self._match(G1.id, G0.id, depth)
            return
        waiting = self.pending.setdefault(G1.id, [])
        waiting.append(edge)
        if len(waiting) < self.nl.fanout_count(G1.out):
            return
        del self.pending[G1.id]
        if all(e.c0.net == c0.net for e in waiting):
            for e in waiting:
                e.internal = True
            self._match(G1.id, G0.id, depth)

    # ----------------------------------------------------- slot pairing

    def _pair_slot(self, cls, kids1, kids0):
        n = len(kids1)
        if n == 1:
            return [(kids1[0], kids0[0])]
        left1 = list(range(n))
        left0 = list(range(n))
        out = []

        def take(i, j):
            out.append((kids1[i], kids0[j]))
            left1.remove(i)
            left0.remove(j)

        def sweep(pred):
            for i in list(left1):
                for j in left0:
                    if pred(kids1[i][1], kids0[j][1]):
                        take(i, j)
                        break

        sweep(lambda a, b: a.net == b.net and a.parity == b.parity)
        sweep(lambda a, b: self._already(a, b))

        # candidate gates on each side
        g1 = [i for i in left1 if self._gate1(kids1[i][1].net) is not None
              and kids1[i][1].net not in {kids0[j][1].net for j in left0}]
        g0 = [j for j in left0 if self._gate0(kids0[j][1].net) is not None
              and kids0[j][1].net not in {kids1[i][1].net for i in left1}]
        sig1 = {i: signature(self.nl, kids1[i][1].net, cls) for i in g1}
        sig0 = {j: signature(self.nl, kids0[j][1].net, cls) for j in g0}
        pairs, rest0, rest1 = unique_fanout_pairs(g0, g1, sig0.get, sig1.get)
        for j, i in pairs:
            take(i, j)
        groups: dict = {}
        for j in rest0:
            groups.setdefault(sig0[j], ([], []))[1].append(j)
        for i in rest1:
            groups.setdefault(sig1[i], ([], []))[0].append(i)
        for s in sorted(groups, key=lambda s: (s.cell, s.side_fanouts)):
            gi, gj = groups[s]
            if not gi or not gj:
                continue
            for i, j in self._lookahead(gi, gj, kids1, kids0):
                take(i, j)
        # same cell, different fanout signature
        for i in [i for i in g1 if i in left1]:
            ci = self.nl.driver(kids1[i][1].net)
            for j in [j for j in g0 if j in left0]:
                if self._compatible(ci, self.nl.driver(kids0[j][1].net)):
                    take(i, j)
                    break
        sweep(lambda a, b: a.net == b.net)
        sweep(lambda a, b: a.parity == b.parity and self._kind(a) == self._kind(b))
        sweep(lambda a, b: a.parity == b.parity)
        sweep(lambda a, b: True)
        return out

    def _already(self, a: Resolved, b: Resolved) -> bool:
        g = self.nl.nets[a.net].driver
        h = self.nl.nets[b.net].driver
        return g is not None and h is not None and self.m1.get(g) == h

    def _kind(self, r: Resolved) -> str:
        g = self.nl.driver(r.net)
        return "PI" if g is None else g.cell.name

    def _lookahead(self, gi, gj, kids1, kids0):
        """Best injection between same-signature groups (indices into kids)."""
        if len(gi) == 1 and len(gj) == 1:
            return [(gi[0], gj[0])]
        self.b.lookahead_calls += 1
        depth = self.opts.lookahead_depth
        gate1 = {i: self.nl.driver(kids1[i][1].net).id for i in gi}
        gate0 = {j: self.nl.driver(kids0[j][1].net).id for j in gj}
        gi = sorted(gi, key=lambda i: gate1[i])
        gj = sorted(gj, key=lambda j: gate0[j])

        def score(i, j):
            return self._score(gate1[i], gate0[j], depth + 1)

        if max(len(gi), len(gj)) <= EXHAUSTIVE_GROUP:
            best, best_key = None, None
            if len(gi) <= len(gj):
                cands = ([(i, j) for i, j in zip(gi, perm)]
                         for perm in permutations(gj, len(gi)))
            else:
                cands = ([(i, j) for j, i in zip(gj, perm)]
                         for perm in permutations(gi, len(gj)))
            for cand in cands:
                self.b.pairings_scored += 1
                tot = [0, 0]
                for i, j in cand:
                    s = score(i, j)
                    tot[0] += s[0]
                    tot[1] += s[1]
                key = tuple(tot)
                if best_key is None or key > best_key:
                    best, best_key = cand, key
            return sorted(best, key=lambda p: gate1[p[0]])
        res = []
        free = list(gj)
        for i in gi:
            if not free:
                break
            best_j, best_s = None, None
            for j in free:
                self.b.pairings_scored += 1
                s = score(i, j)
                if best_s is None or s > best_s:
                    best_j, best_s = j, s
            res.append((i, best_j))
            free.remove(best_j)
        return res

    def _score(self, g: int, h: int, depth: int) -> tuple:
        """(gates, shared operands) matched by extending (g, h) ``depth`` levels."""
        key = (g, h, depth)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        nl = self.nl
        G, H = nl.gates[g], nl.gates[h]
        self.b.visits += 2
        if depth <= 0 or not self._compatible(G, H):
            return (0, 0)
        gates, shared = 1, 0
        if depth > 1:
            for cls in G.cell.symmetry_classes:
                k1 = [self.resolve(G.pins[p], 1).net for p in cls]
                k0 = [self.resolve(H.pins[p], 0).net for p in cls]
                best = (0, 0)
                for perm in permutations(k0):
                    tg, ts = 0, 0
                    for a, b in zip(k1, perm):
                        if a == b:
                            ts += 1
                            continue
                        ga, gb = nl.driver(a), nl.driver(b)
                        if self._compatible(ga, gb):
                            sg, ss = self._score(ga.id, gb.id, depth - 1)
                            tg += sg
                            ts += ss
                    if (tg, ts) > best:
                        best = (tg, ts)
                gates += best[0]
                shared += best[1]
        res = (gates, shared)
        self._memo[key] = res
        return res


def relocation_boundary(nl: Netlist, mux: MuxInstance,
                        opts: MatchOptions = MatchOptions()) -> Boundary | None:
    """Pair the s=1 and s=0 cones of ``mux``; ``None`` when the drivers differ."""
    return _Matcher(nl, mux, opts).run()


def lookahead_pair(nl: Netlist, group0: Sequence[int], group1: Sequence[int],
                   depth: int = 3, opts: MatchOptions | None = None) -> list:
    """Pair two same-signature gate groups by look-ahead score.

    Returns ``(g0, g1)`` tuples; ties go to the lowest gate ids.
    """
    opts = opts or MatchOptions(lookahead_depth=depth)
    if opts.lookahead_depth != depth:
        opts = MatchOptions(opts.approximate, depth, opts.safety_mode)
    m = _Matcher(nl, None, opts)
    kids1 = [(None, Resolved(nl.gates[g].out, nl.gates[g].out, 0)) for g in group1]
    kids0 = [(None, Resolved(nl.gates[h].out, nl.gates[h].out, 0)) for h in group0]
    pairs = m._lookahead(list(range(len(kids1))), list(range(len(kids0))), kids1, kids0)
    return sorted((group0[j], group1[i]) for i, j in pairs)


def inv2xor_positions(boundary: Boundary):
    """Split parity edges into (xor with s, xor with s-bar, keep inverter)."""
    xor_s, xor_sbar, keep = set(), set(), set()
    for e in boundary.edges:
        if not e.parity_edge:
            continue
        p1, p0 = e.c1.parity, e.c0.parity
        if p1 == p0:
            if p1:
                keep.add(e.position)
        elif p1:
            xor_s.add(e.position)
        else:
            xor_sbar.add(e.position)
    return xor_s, xor_sbar, keep
