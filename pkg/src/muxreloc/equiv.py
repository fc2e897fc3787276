"""Simulation-based combinational equivalence check.

Small designs are checked on every input vector; larger ones on a seeded
stream of uniform random vectors, 64 per machine word.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .netlist import Netlist, simulate, simulate_bits

CHUNK_WORDS = 2048
_ONE = np.uint64(1)


class EquivError(ValueError):
    pass


class Status(enum.Enum):
    EQUAL = "EQUAL"
    COUNTEREXAMPLE = "COUNTEREXAMPLE"
    INCONCLUSIVE = "INCONCLUSIVE"


class Mode(enum.Enum):
    EXHAUSTIVE = "EXHAUSTIVE"
    RANDOM = "RANDOM"


@dataclass
class Counterexample:
    assignment: dict
    output: str
    value_a: int
    value_b: int

    def format(self) -> str:
        lines = [f"{k}={v}" for k, v in self.assignment.items()]
        lines.append(f"differs at {self.output}: {self.value_a} vs {self.value_b}")
        return "\n".join(lines)


@dataclass
class EquivVerdict:
    status: Status
    mode: Mode
    vectors_used: int
    counterexample: Counterexample | None = field(default=None)

    @property
    def equal(self) -> bool:
        return self.status is Status.EQUAL

    def format(self) -> str:
        head = f"{self.status.value} ({self.mode.value}, {self.vectors_used} vectors)"
        if self.counterexample is None:
            return head
        return head + "\n" + self.counterexample.format()


def _check_interfaces(a: Netlist, b: Netlist) -> None:
    pa, pb = set(a.input_names), set(b.input_names)
    if pa != pb:
        raise EquivError(f"primary inputs differ: {sorted(pa ^ pb)}")
    oa, ob = set(a.output_names), set(b.output_names)
    if oa != ob:
        raise EquivError(f"primary outputs differ: {sorted(oa ^ ob)}")


def exhaustive_words(names: list[str], start: int, count: int) -> dict[str, np.ndarray]:
    """Words ``start .. start+count-1`` of the full truth-table enumeration.

    Lane ``j`` of word ``w`` holds input row ``64*w + j``; PI ``k`` carries
    bit ``k`` of the row number.
    """
    lanes = np.arange(64, dtype=np.uint64)
    words = np.arange(start, start + count, dtype=np.uint64)
    out = {}
    for k, name in enumerate(names):
        if k < 6:
            pat = int(np.bitwise_or.reduce(
                np.where((lanes >> np.uint64(k)) & _ONE, _ONE << lanes, np.uint64(0))))
            out[name] = np.full(count, pat, dtype=np.uint64)
        else:
            on = ((words >> np.uint64(k - 6)) & _ONE).astype(bool)
            out[name] = np.where(on, ~np.uint64(0), np.uint64(0))
    return out


def _valid_mask(total: int, start: int, count: int) -> np.ndarray:
    """Per-word lane mask; lanes past ``total`` vectors are ignored."""
    mask = np.full(count, ~np.uint64(0), dtype=np.uint64)
    last = total - 64 * (start + count - 1)
    if 0 < last < 64:
        mask[-1] = np.uint64((1 << last) - 1)
    return mask


def _compare(a, b, vec, mask, outputs):
    ra = simulate(a, vec)
    rb = simulate(b, vec)
    for name in outputs:
        diff = (ra[name] ^ rb[name]) & mask
        hits = np.flatnonzero(diff)
        if hits.size:
            w = int(hits[0])
            word = int(diff[w])
            lane = (word & -word).bit_length() - 1
            return w, lane
    return None


def _replay(a, b, assignment):
    ya = simulate_bits(a, assignment)
    yb = simulate_bits(b, assignment)
    for name in sorted(ya):
        if ya[name] != yb[name]:
            return Counterexample(dict(assignment), name, ya[name], yb[name])
    raise AssertionError("word and bit simulation disagree on a counterexample")


def equivalent(a: Netlist, b: Netlist, exhaustive_limit: int = 16,
               random_vectors: int = 100_000, seed: int = 1) -> EquivVerdict:
    """Compare ``a`` and ``b`` output by output on the same input vectors."""
    _check_interfaces(a, b)
    names = sorted(a.input_names)
    outputs = sorted(a.output_names)
    if len(names) <= exhaustive_limit:
        mode = Mode.EXHAUSTIVE
        total = 1 << len(names)
        rng = None
    else:
        mode = Mode.RANDOM
        total = max(0, int(random_vectors))
        rng = np.random.default_rng(seed)
    if total == 0:
        return EquivVerdict(Status.INCONCLUSIVE, mode, 0)
    nwords = (total + 63) // 64
    for start in range(0, nwords, CHUNK_WORDS):
        count = min(CHUNK_WORDS, nwords - start)
        if rng is None:
            vec = exhaustive_words(names, start, count)
        else:
            vec = {nm: rng.integers(0, 1 << 64, size=count, dtype=np.uint64,
                                    endpoint=False) for nm in names}
        mask = _valid_mask(total, start, count)
        hit = _compare(a, b, vec, mask, outputs)
        if hit is not None:
            w, lane = hit
            assignment = {nm: int((int(vec[nm][w]) >> lane) & 1) for nm in names}
            cex = _replay(a, b, assignment)
            used = min(total, 64 * (start + w) + lane + 1)
            return EquivVerdict(Status.COUNTEREXAMPLE, mode, used, cex)
    return EquivVerdict(Status.EQUAL, mode, total)
