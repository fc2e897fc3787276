"""Generators for mux-selected arithmetic operator pairs.

Every design computes ``f = s ? OP1 : OP0`` with one MUX2 per output bit
(``A`` = OP0 bit, ``B`` = OP1 bit).  Operators are built from plain cells:

* ripple-carry adder: full adder is 2 XOR2 + 2 AND2 + 1 OR2, a half adder
  (XOR2 + AND2) is used where an operand bit is missing;
* subtraction ``x - y``: adder on ``x`` and the inverted ``y`` with the
  carry-in of 1 folded into bit 0;
* comparator ``x < y``: LSB-first ripple of less-than and equality terms;
* array multiplier: AND2 partial products summed row by row;
* decoder: AND tree over input literals.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

from .cells import AND2, INV, MUX2, OR2, XNOR2, XOR2
from .netlist import Netlist, validate


class Kind(enum.Enum):
    ADD_ADD = "add-add"
    ADD_SUB = "add-sub"
    LT_LT = "lt-lt"
    LT_LE = "lt-le"
    MUL_MUL = "mul-mul"
    MULADD_SWAP = "muladd-swap"
    DEC_DEC = "dec-dec"

    @classmethod
    def parse(cls, text: str) -> "Kind":
        key = text.strip().lower().replace("_", "-")
        for k in cls:
            if k.value == key:
                return k
        raise ValueError(f"unknown benchmark kind {text!r}; "
                         f"choose from {', '.join(k.value for k in cls)}")


@dataclass(frozen=True)
class BenchSpec:
    kind: Kind
    bits: int
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.kind, Kind):
            raise ValueError(f"kind must be a Kind, got {self.kind!r}")
        if self.kind is Kind.DEC_DEC:
            if not 1 <= self.bits <= 8:
                raise ValueError("DEC_DEC needs 1 <= bits <= 8")
        elif self.bits < 2:
            raise ValueError(f"{self.kind.name} needs bits >= 2")

    @property
    def operands(self) -> str:
        """Letters of the operand buses used by this kind."""
        return "ab" if self.kind in (Kind.LT_LE, Kind.DEC_DEC) else "abc"

    @property
    def out_bits(self) -> int:
        n = self.bits
        k = self.kind
        if k in (Kind.ADD_ADD, Kind.ADD_SUB):
            return n + 1
        if k in (Kind.LT_LT, Kind.LT_LE):
            return 1
        if k in (Kind.MUL_MUL, Kind.MULADD_SWAP):
            return 2 * n
        return 1 << n


class _Builder:
    def __init__(self, nl: Netlist):
        self.nl = nl

    def g(self, cell, *ins) -> int:
        gid = self.nl.add_gate(cell, dict(zip(cell.input_pins, ins)))
        return self.nl.gates[gid].out

    def half(self, x, y):
        return self.g(XOR2, x, y), self.g(AND2, x, y)

    def full(self, x, y, cin):
        t = self.g(XOR2, x, y)
        s = self.g(XOR2, t, cin)
        c = self.g(OR2, self.g(AND2, x, y), self.g(AND2, t, cin))
        return s, c

    def add(self, xs, ys, width=None):
        """Ripple sum of two LSB-first bit lists, truncated to ``width`` bits."""
        n = max(len(xs), len(ys))
        width = n + 1 if width is None else width
        out = []
        carry = None
        for i in range(min(n, width)):
            bits = [v for v in (xs[i] if i < len(xs) else None,
                                ys[i] if i < len(ys) else None, carry) if v is not None]
            last = i == width - 1
            if len(bits) == 1:
                out.append(bits[0])
                carry = None
            elif len(bits) == 2:
                if last:
                    out.append(self.g(XOR2, *bits))
                else:
                    s, carry = self.half(*bits)
                    out.append(s)
            else:
                if last:
                    out.append(self.g(XOR2, self.g(XOR2, bits[0], bits[1]), bits[2]))
                else:
                    s, carry = self.full(*bits)
                    out.append(s)
        if len(out) < width and carry is not None:
            out.append(carry)
        return out

    def sub(self, xs, ys):
        """``x - y`` modulo 2**(n+1) for equal-width operands."""
        n = len(xs)
        ny = [self.g(INV, y) for y in ys]
        out = [self.g(XNOR2, xs[0], ny[0])]
        carry = self.g(OR2, xs[0], ny[0])
        for i in range(1, n):
            s, carry = self.full(xs[i], ny[i], carry)
            out.append(s)
        # top bit: 0 + 1 + carry
        out.append(self.g(INV, carry))
        return out

    def lt(self, xs, ys):
        lt = self.g(AND2, self.g(INV, xs[0]), ys[0])
        for x, y in zip(xs[1:], ys[1:]):
            less = self.g(AND2, self.g(INV, x), y)
            eq = self.g(XNOR2, x, y)
            lt = self.g(OR2, less, self.g(AND2, eq, lt))
        return [lt]

    def mul(self, xs, ys):
        n = len(xs)
        acc = [self.g(AND2, x, ys[0]) for x in xs]
        for i in range(1, len(ys)):
            row = [self.g(AND2, x, ys[i]) for x in xs]
            acc = acc[:i] + self.add(acc[i:], row)
        return acc[:2 * n]

    def dec(self, xs):
        lits = [(self.g(INV, x), x) for x in xs]
        outs = []
        for v in range(1 << len(xs)):
            terms = [lits[i][(v >> i) & 1] for i in range(len(xs))]
            while len(terms) > 1:
                nxt = [self.g(AND2, terms[k], terms[k + 1]) for k in range(0, len(terms) - 1, 2)]
                if len(terms) % 2:
                    nxt.append(terms[-1])
                terms = nxt
            outs.append(terms[0])
        return outs


def generate(spec: BenchSpec) -> Netlist:
    """Build the gate-level design for ``spec``."""
    n = spec.bits
    nl = Netlist(f"{spec.kind.value.replace('-', '_')}_{n}")
    bus = {ch: [nl.add_input(f"{ch}[{i}]") for i in range(n)] for ch in spec.operands}
    s = nl.add_input("s")
    bld = _Builder(nl)
    a, b = bus["a"], bus["b"]
    c = bus.get("c")
    k = spec.kind
    if k is Kind.ADD_ADD:
        op1, op0 = bld.add(a, b), bld.add(a, c)
    elif k is Kind.ADD_SUB:
        op1, op0 = bld.add(a, b), bld.sub(a, c)
    elif k is Kind.LT_LT:
        op1, op0 = bld.lt(a, b), bld.lt(a, c)
    elif k is Kind.LT_LE:
        op0 = bld.lt(a, b)
        op1 = [bld.g(INV, bld.lt(b, a)[0])]
    elif k is Kind.MUL_MUL:
        op1, op0 = bld.mul(a, b), bld.mul(a, c)
    elif k is Kind.MULADD_SWAP:
        op1 = bld.add(bld.mul(a, b), c, 2 * n)
        op0 = bld.add(bld.mul(b, c), a, 2 * n)
    elif k is Kind.DEC_DEC:
        op1, op0 = bld.dec(a), bld.dec(b)
    else:
        raise ValueError(f"unsupported kind {k}")
    assert len(op0) == len(op1) == spec.out_bits
    for i, (x0, x1) in enumerate(zip(op0, op1)):
        nl.add_gate(MUX2, {"A": x0, "B": x1, "S": s}, nl.add_net(f"f[{i}]"))
        nl.add_output(nl.find_net(f"f[{i}]"))
    diags = validate(nl)
    if diags:
        raise AssertionError(f"generator produced an invalid netlist: {diags}")
    return nl


def reference_function(spec: BenchSpec) -> Callable[..., int]:
    """Integer model ``f(a, b, c, s)`` of the design built by :func:`generate`."""
    n = spec.bits
    k = spec.kind
    m1 = (1 << (n + 1)) - 1
    m2 = (1 << (2 * n)) - 1

    def op(a: int, b: int, c: int, s: int) -> int:
        if k is Kind.ADD_ADD:
            return (a + b) & m1 if s else (a + c) & m1
        if k is Kind.ADD_SUB:
            return (a + b) & m1 if s else (a - c) & m1
        if k is Kind.LT_LT:
            return int(a < b) if s else int(a < c)
        if k is Kind.LT_LE:
            return int(a <= b) if s else int(a < b)
        if k is Kind.MUL_MUL:
            return (a * b) & m2 if s else (a * c) & m2
        if k is Kind.MULADD_SWAP:
            return (a * b + c) & m2 if s else (b * c + a) & m2
        if k is Kind.DEC_DEC:
            return 1 << (a if s else b)
        raise ValueError(f"unsupported kind {k}")

    def f(a: int = 0, b: int = 0, c: int = 0, s: int = 0) -> int:
        return op(a, b, c, s)

    return f
