"""Gate-level multiplier netlists: construction, simulation, pruning.

Nets are integers.  The ``2B`` primary inputs occupy nets ``0..2B-1``
(operand ``a`` LSB-first, then operand ``b``); every gate drives the net
with its own id.  Gates are stored in topological order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

GATE_KINDS = ("AND", "OR", "XOR", "NAND", "NOR", "INV", "CONST0", "CONST1")
CONST_KINDS = ("CONST0", "CONST1")
MAX_BITWIDTH = 16

DEFAULT_GATE_AREA = {
    "NAND": 1.0,
    "NOR": 1.0,
    "INV": 0.5,
    "AND": 1.5,
    "OR": 1.5,
    "XOR": 2.5,
    "CONST0": 0.0,
    "CONST1": 0.0,
}

_ARITY = {"AND": 2, "OR": 2, "XOR": 2, "NAND": 2, "NOR": 2, "INV": 1, "CONST0": 0, "CONST1": 0}


@dataclass(frozen=True)
class Gate:
    id: int
    kind: str
    inputs: tuple[int, ...] = ()


@dataclass(frozen=True)
class Netlist:
    bitwidth: int
    gates: tuple[Gate, ...]
    primary_outputs: tuple[int, ...]

    def __post_init__(self):
        B = self.bitwidth
        if not 1 <= B <= MAX_BITWIDTH:
            raise ValueError(f"bitwidth must be in [1, {MAX_BITWIDTH}], got {B}")
        if len(self.primary_outputs) != 2 * B:
            raise ValueError(f"expected {2 * B} primary outputs, got {len(self.primary_outputs)}")
        known = set(range(2 * B))
        for g in self.gates:
            if g.kind not in _ARITY:
                raise ValueError(f"unknown gate kind {g.kind!r}")
            if len(g.inputs) != _ARITY[g.kind]:
                raise ValueError(f"gate {g.id} ({g.kind}) needs {_ARITY[g.kind]} inputs")
            if g.id in known:
                raise ValueError(f"duplicate net id {g.id}")
            for i in g.inputs:
                if i not in known:
                    raise ValueError(f"gate {g.id} reads net {i} before it is driven")
            known.add(g.id)
        for po in self.primary_outputs:
            if po not in known:
                raise ValueError(f"primary output references undriven net {po}")

    @property
    def primary_inputs(self) -> tuple[int, ...]:
        return tuple(range(2 * self.bitwidth))

    def gate_ids(self) -> list[int]:
        return [g.id for g in self.gates]

    def area(self, table: Mapping[str, float] | None = None) -> float:
        table = table or DEFAULT_GATE_AREA
        return sum(gate_area(g.kind, table) for g in self.gates)

    def kind_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for g in self.gates:
            counts[g.kind] = counts.get(g.kind, 0) + 1
        return counts


def gate_area(kind: str, table: Mapping[str, float] | None = None) -> float:
    table = table or DEFAULT_GATE_AREA
    if kind in CONST_KINDS:
        return 0.0
    return float(table[kind])


class _Builder:
    def __init__(self, bitwidth: int):
        self.bitwidth = bitwidth
        self.gates: list[Gate] = []
        self.next_id = 2 * bitwidth

    def add(self, kind: str, *inputs: int) -> int:
        gid = self.next_id
        self.next_id += 1
        self.gates.append(Gate(gid, kind, tuple(inputs)))
        return gid

    def half_adder(self, x: int, y: int) -> tuple[int, int]:
        return self.add("XOR", x, y), self.add("AND", x, y)

    def full_adder(self, x: int, y: int, c: int) -> tuple[int, int]:
        p = self.add("XOR", x, y)
        s = self.add("XOR", p, c)
        g = self.add("AND", x, y)
        t = self.add("AND", p, c)
        return s, self.add("OR", g, t)


def build_exact_multiplier(bitwidth: int) -> Netlist:
    """Unsigned ripple-carry array multiplier.

    Row ``i`` of partial products ``a_j & b_i`` is added into the running
    sum at bit offset ``i`` with a chain of half/full adders.
    """
    if not 2 <= bitwidth <= MAX_BITWIDTH:
        raise ValueError(f"bitwidth must be in [2, {MAX_BITWIDTH}], got {bitwidth}")
    B = bitwidth
    nb = _Builder(B)
    pp = [[nb.add("AND", j, B + i) for j in range(B)] for i in range(B)]
    acc = list(pp[0])
    for i in range(1, B):
        carry = None
        for j in range(B):
            pos = i + j
            terms = [acc[pos]] if pos < len(acc) else []
            terms.append(pp[i][j])
            if carry is not None:
                terms.append(carry)
            if len(terms) == 3:
                s, carry = nb.full_adder(*terms)
            else:
                s, carry = nb.half_adder(*terms)
            if pos < len(acc):
                acc[pos] = s
            else:
                acc.append(s)
        acc.append(carry)
    return Netlist(B, tuple(nb.gates), tuple(acc))


def _check_operand(x: int, bitwidth: int) -> None:
    if not 0 <= x < (1 << bitwidth):
        raise ValueError(f"operand {x} out of range for {bitwidth}-bit inputs")


def _eval_gate(kind: str, v: Sequence[int]) -> int:
    if kind == "AND":
        return v[0] & v[1]
    if kind == "OR":
        return v[0] | v[1]
    if kind == "XOR":
        return v[0] ^ v[1]
    if kind == "NAND":
        return 1 - (v[0] & v[1])
    if kind == "NOR":
        return 1 - (v[0] | v[1])
    if kind == "INV":
        return 1 - v[0]
    return 1 if kind == "CONST1" else 0


def simulate(netlist: Netlist, a: int, b: int) -> int:
    """Evaluate the circuit on one operand pair and return the product word."""
    B = netlist.bitwidth
    _check_operand(a, B)
    _check_operand(b, B)
    val = {}
    for i in range(B):
        val[i] = (a >> i) & 1
        val[B + i] = (b >> i) & 1
    for g in netlist.gates:
        val[g.id] = _eval_gate(g.kind, [val[i] for i in g.inputs])
    return sum(val[po] << k for k, po in enumerate(netlist.primary_outputs))


def _pack(bits: np.ndarray) -> np.ndarray:
    packed = np.packbits(bits, bitorder="little")
    pad = (-packed.size) % 8
    if pad:
        packed = np.concatenate([packed, np.zeros(pad, dtype=np.uint8)])
    return packed.view(np.uint64)


def simulate_batch(netlist: Netlist, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized evaluation over operand arrays; returns int64 products.

    Nets are evaluated bit-parallel, 64 operand pairs per machine word.
    """
    B = netlist.bitwidth
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError("operand arrays must have the same shape")
    if a.size and (a.min() < 0 or a.max() >= 1 << B or b.min() < 0 or b.max() >= 1 << B):
        raise ValueError(f"operands out of range for {B}-bit inputs")
    flat_a, flat_b = a.ravel(), b.ravel()
    val: dict[int, np.ndarray] = {}
    for i in range(B):
        val[i] = _pack(((flat_a >> i) & 1).astype(bool))
        val[B + i] = _pack(((flat_b >> i) & 1).astype(bool))
    words = val[0].size
    zeros = np.zeros(words, dtype=np.uint64)
    ones = ~zeros
    for g in netlist.gates:
        k = g.kind
        if k == "AND":
            out = val[g.inputs[0]] & val[g.inputs[1]]
        elif k == "OR":
            out = val[g.inputs[0]] | val[g.inputs[1]]
        elif k == "XOR":
            out = val[g.inputs[0]] ^ val[g.inputs[1]]
        elif k == "NAND":
            out = ~(val[g.inputs[0]] & val[g.inputs[1]])
        elif k == "NOR":
            out = ~(val[g.inputs[0]] | val[g.inputs[1]])
        elif k == "INV":
            out = ~val[g.inputs[0]]
        else:
            out = ones if k == "CONST1" else zeros
        val[g.id] = out
    n = flat_a.size
    result = np.zeros(n, dtype=np.int64)
    for k, po in enumerate(netlist.primary_outputs):
        bits = np.unpackbits(val[po].view(np.uint8), count=n, bitorder="little")
        result |= bits.astype(np.int64) << k
    return result.reshape(a.shape)


def all_operand_pairs(bitwidth: int) -> tuple[np.ndarray, np.ndarray]:
    """Every (a, b) pair, ``a`` varying fastest."""
    n = 1 << bitwidth
    idx = np.arange(n * n, dtype=np.int64)
    return idx % n, idx // n


# -- pruning and constant folding ------------------------------------------

def _fold(netlist: Netlist, forced: Mapping[int, int]) -> Netlist:
    """Force nets to constants, then constant-fold and drop dead gates.

    ``forced`` maps a primary-input or gate net to 0/1.  Partial constants
    are simplified too (``x & 1 -> x``, ``x ^ 1 -> ~x``), so area never grows.
    """
    B = netlist.bitwidth
    # resolved value of each net: ("c", 0|1) or ("n", net)
    res: dict[int, tuple[str, int]] = {}
    for i in range(2 * B):
        res[i] = ("c", forced[i]) if i in forced else ("n", i)
    kept: dict[int, Gate] = {}
    for g in netlist.gates:
        if g.id in forced:
            res[g.id] = ("c", forced[g.id])
            continue
        if g.kind in CONST_KINDS:
            res[g.id] = ("c", 1 if g.kind == "CONST1" else 0)
            continue
        ins = [res[i] for i in g.inputs]
        consts = [v for t, v in ins if t == "c"]
        nets = [v for t, v in ins if t == "n"]
        if len(consts) == len(ins):
            res[g.id] = ("c", _eval_gate(g.kind, consts))
            continue
        if consts:
            c, x = consts[0], nets[0]
            k = g.kind
            # (kind, const) -> 0/1 constant, "x" passthrough, "inv" inverter
            rule = {
                ("AND", 0): 0, ("AND", 1): "x",
                ("OR", 1): 1, ("OR", 0): "x",
                ("XOR", 0): "x", ("XOR", 1): "inv",
                ("NAND", 0): 1, ("NAND", 1): "inv",
                ("NOR", 1): 0, ("NOR", 0): "inv",
            }[(k, c)]
            if rule == "x":
                res[g.id] = ("n", x)
            elif rule == "inv":
                kept[g.id] = Gate(g.id, "INV", (x,))
                res[g.id] = ("n", g.id)
            else:
                res[g.id] = ("c", rule)
            continue
        kept[g.id] = Gate(g.id, g.kind, tuple(nets))
        res[g.id] = ("n", g.id)

    next_id = max([2 * B - 1] + [g.id for g in netlist.gates]) + 1
    const_gate: dict[int, Gate] = {}
    outputs = []
    for po in netlist.primary_outputs:
        t, v = res[po]
        if t == "c":
            if v not in const_gate:
                const_gate[v] = Gate(next_id, "CONST1" if v else "CONST0")
                next_id += 1
            outputs.append(const_gate[v].id)
        else:
            outputs.append(v)

    live = set(outputs)
    for g in reversed(netlist.gates):
        if g.id in live and g.id in kept:
            live.update(kept[g.id].inputs)
    gates = [kept[g.id] for g in netlist.gates if g.id in kept and g.id in live]
    gates = [const_gate[v] for v in sorted(const_gate)] + gates
    return Netlist(B, tuple(gates), tuple(outputs))


def _normalize_const(value) -> int:
    if value in ("CONST0", 0, False):
        return 0
    if value in ("CONST1", 1, True):
        return 1
    raise ValueError(f"replacement must be CONST0 or CONST1, got {value!r}")


def prune(netlist: Netlist, cuts: Mapping[int, str] | Iterable[tuple[int, str]]) -> Netlist:
    """Replace each cut gate's output by a constant and simplify."""
    items = cuts.items() if isinstance(cuts, Mapping) else cuts
    ids = set(netlist.gate_ids())
    forced = {}
    for gid, rep in items:
        if gid not in ids:
            raise ValueError(f"unknown gate id {gid}")
        forced[gid] = _normalize_const(rep)
    if not forced:
        return netlist
    return _fold(netlist, forced)


def precision_scale(netlist: Netlist, k: int) -> Netlist:
    """Tie the ``k`` least-significant bits of both operands to zero."""
    B = netlist.bitwidth
    if not 0 <= k <= B:
        raise ValueError(f"k must be in [0, {B}], got {k}")
    if k == 0:
        return netlist
    forced = {i: 0 for i in range(k)}
    forced.update({B + i: 0 for i in range(k)})
    return _fold(netlist, forced)


def apply_approximation(netlist: Netlist, cuts: Mapping[int, str], k: int) -> Netlist:
    """Gate cuts and precision scaling folded in a single pass."""
    B = netlist.bitwidth
    if not 0 <= k <= B:
        raise ValueError(f"k must be in [0, {B}], got {k}")
    ids = set(netlist.gate_ids())
    forced = {}
    for gid, rep in cuts.items():
        if gid not in ids:
            raise ValueError(f"unknown gate id {gid}")
        forced[gid] = _normalize_const(rep)
    for i in range(k):
        forced[i] = 0
        forced[B + i] = 0
    if not forced:
        return netlist
    return _fold(netlist, forced)


# -- text format -----------------------------------------------------------

def dumps(netlist: Netlist) -> str:
    lines = [f"B={netlist.bitwidth}"]
    for g in netlist.gates:
        lines.append(" ".join([str(g.id), g.kind, *map(str, g.inputs)]))
    lines.append("PO " + " ".join(map(str, netlist.primary_outputs)))
    return "\n".join(lines) + "\n"


def loads(text: str) -> Netlist:
    bitwidth = None
    gates = []
    outputs = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if bitwidth is None:
            if not line.startswith("B="):
                raise ValueError(f"line {lineno}: expected header 'B=<bitwidth>'")
            bitwidth = int(line[2:])
            continue
        parts = line.split()
        if parts[0] == "PO":
            outputs = tuple(int(p) for p in parts[1:])
            continue
        if outputs is not None:
            raise ValueError(f"line {lineno}: gate after PO line")
        if len(parts) < 2 or parts[1] not in GATE_KINDS:
            raise ValueError(f"line {lineno}: malformed gate line {raw!r}")
        gates.append(Gate(int(parts[0]), parts[1], tuple(int(p) for p in parts[2:])))
    if bitwidth is None or outputs is None:
        raise ValueError("netlist text needs a B= header and a PO line")
    return Netlist(bitwidth, tuple(gates), outputs)
