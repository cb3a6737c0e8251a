"""Threshold logic gates: evaluation, margins and integer weight solving.

A gate fires (outputs 1) iff the weighted input sum plus bias is >= 0.
Synthesized gates additionally keep the sum at least 1 away from zero on
every input row, because the hardware comparator is metastable at zero net
current.  Weight magnitudes are capped at W_MAX, matching the number of
distinct conductance levels the memristors are programmed to.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

FANIN_LIMIT = 4
W_MAX = 6


class NotThreshold:
    """Sentinel: the requested truth table is not a threshold function."""

    def __repr__(self):
        return "NotThreshold"


NOT_THRESHOLD = NotThreshold()


@dataclass(frozen=True)
class ThresholdGate:
    """Integer-weight threshold gate.

    `inputs` are node ids referencing the surrounding network; `weights`
    aligns with them positionally.
    """

    inputs: tuple[str, ...]
    weights: tuple[int, ...]
    bias: int

    def __post_init__(self):
        if len(self.inputs) != len(self.weights):
            raise ValueError("inputs/weights length mismatch")
        if not self.inputs:
            raise ValueError("gate needs at least one input")

    @property
    def fan_in(self):
        return len(self.inputs)


def eval_tlg(gate, x):
    """Output bit for one input vector (1 iff weighted sum + bias >= 0)."""
    x = tuple(x)
    if len(x) != gate.fan_in:
        raise ValueError(f"expected {gate.fan_in} inputs, got {len(x)}")
    s = sum(w * int(bool(v)) for w, v in zip(gate.weights, x)) + gate.bias
    return 1 if s >= 0 else 0


def gate_margin(gate):
    """Min over all input rows of |weighted sum + bias|."""
    w = np.array(gate.weights)
    rows = _input_rows(gate.fan_in)
    return int(np.min(np.abs(rows @ w + gate.bias)))


def truth_table(gate):
    """Truth table as a tuple of 2^fan_in bits; input i is bit i (LSB first)."""
    w = np.array(gate.weights)
    rows = _input_rows(gate.fan_in)
    return tuple(int(v) for v in (rows @ w + gate.bias >= 0))


def bias_bound(n, w_max=W_MAX):
    return n * w_max + 1


def _input_rows(n):
    rows = np.zeros((2 ** n, n), dtype=np.int64)
    for r in range(2 ** n):
        for i in range(n):
            rows[r, i] = (r >> i) & 1
    return rows


# Weight lattice per (n, w_max): all weight vectors sorted by (sum|w|, vector),
# plus the precomputed row-sum matrix. Cached because the greedy collapse in
# synthesis calls solve_weights many times.
_lattice_cache = {}


def _lattice(n, w_max):
    key = (n, w_max)
    if key not in _lattice_cache:
        vals = np.arange(-w_max, w_max + 1)
        W = np.array(list(itertools.product(vals, repeat=n)), dtype=np.int64)
        order = np.lexsort(tuple(W[:, i] for i in reversed(range(n)))
                           + (np.abs(W).sum(axis=1),))
        W = W[order]
        S = W @ _input_rows(n).T  # (num_vectors, 2^n) row sums
        _lattice_cache[key] = (W, S)
    return _lattice_cache[key]


def solve_weights(table, w_max=W_MAX, fanin_limit=FANIN_LIMIT):
    """Find integer weights/bias realizing `table`, or NOT_THRESHOLD.

    Exhaustive search over the bounded integer lattice with the margin >= 1
    requirement on every row. Deterministic tie-break: smallest sum of
    |weights|, then lexicographically smallest weight vector, then the bias
    closest to zero (negative side first on ties).
    """
    table = tuple(int(b) for b in table)
    n = _table_arity(table)
    if n > fanin_limit:
        raise ValueError(f"arity {n} exceeds fan-in limit {fanin_limit}")
    W, S = _lattice(n, w_max)
    t = np.array(table, dtype=bool)
    b_max = bias_bound(n, w_max)

    # For true rows need s + b >= 1, for false rows s + b <= -1.
    lo = np.full(len(W), -b_max, dtype=np.int64)
    hi = np.full(len(W), b_max, dtype=np.int64)
    if t.any():
        lo = np.maximum(lo, 1 - S[:, t].min(axis=1))
    if (~t).any():
        hi = np.minimum(hi, -1 - S[:, ~t].max(axis=1))
    feasible = lo <= hi
    if not feasible.any():
        return NOT_THRESHOLD
    idx = int(np.argmax(feasible))
    b = _pick_bias(int(lo[idx]), int(hi[idx]))
    return ThresholdGate(
        tuple(f"x{i}" for i in range(n)), tuple(int(w) for w in W[idx]), b
    )


def _pick_bias(lo, hi):
    # Bias closest to zero; exact zero allowed, negative preferred on |b| ties.
    if lo <= 0 <= hi:
        return 0
    return lo if lo > 0 else hi


def _table_arity(table):
    n = len(table).bit_length() - 1
    if 2 ** n != len(table):
        raise ValueError(f"table length {len(table)} is not a power of two")
    return n


def complement_gate(gate):
    """Gate computing the complement under the same >= 0 convention.

    Only exact for gates with margin >= 1 (negating flips every strict sum).
    """
    return ThresholdGate(
        gate.inputs,
        tuple(-w for w in gate.weights),
        -gate.bias,
    )


@dataclass
class TLGNode:
    """A threshold gate instantiated in a network, with mapping metadata."""

    id: str
    gate: ThresholdGate
    level: int = 0      # ASAP logic level, inputs at 0
    stage: int = 0      # pipeline stage, filled by the mapper
    is_buffer: bool = False


@dataclass
class ThresholdLogicNetwork:
    """DAG of threshold gates equivalent to a Boolean netlist."""

    inputs: list[str] = field(default_factory=list)
    nodes: dict[str, TLGNode] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)

    def add_node(self, node_id, gate, is_buffer=False):
        if node_id in self.nodes or node_id in self.inputs:
            raise ValueError(f"duplicate node id {node_id!r}")
        for i in gate.inputs:
            if i not in self.nodes and i not in self.inputs:
                raise ValueError(f"node {node_id!r} references unknown {i!r}")
        node = TLGNode(node_id, gate, is_buffer=is_buffer)
        self.nodes[node_id] = node
        return node

    def consumers(self):
        """Map node/input id -> list of node ids consuming it (with multiplicity)."""
        out = {name: [] for name in list(self.inputs) + list(self.nodes)}
        for node in self.nodes.values():
            for i in node.gate.inputs:
                out[i].append(node.id)
        return out

    def topological_order(self):
        order, seen = [], set(self.inputs)
        pending = list(self.nodes.values())
        while pending:
            rest = []
            for node in pending:
                if all(i in seen for i in node.gate.inputs):
                    order.append(node.id)
                    seen.add(node.id)
                else:
                    rest.append(node)
            if len(rest) == len(pending):
                raise ValueError("cycle in threshold network")
            pending = rest
        return order

    def assign_levels(self):
        levels = {name: 0 for name in self.inputs}
        for nid in self.topological_order():
            node = self.nodes[nid]
            node.level = 1 + max(levels[i] for i in node.gate.inputs)
            levels[nid] = node.level
        return levels

    def max_fan_in(self):
        return max((n.gate.fan_in for n in self.nodes.values()), default=0)

    def depth(self):
        self.assign_levels()
        return max((n.level for n in self.nodes.values()), default=0)

    def evaluate_many(self, vectors):
        """Ideal (infinite precision) evaluation over a vector matrix."""
        vectors = np.asarray(vectors, dtype=bool)
        vals = {name: vectors[:, i] for i, name in enumerate(self.inputs)}
        for nid in self.topological_order():
            node = self.nodes[nid]
            s = np.full(vectors.shape[0], node.gate.bias, dtype=np.int64)
            for w, src in zip(node.gate.weights, node.gate.inputs):
                s += w * vals[src]
            vals[nid] = s >= 0
        return np.column_stack([vals[o] for o in self.outputs])

    def validate(self, fanin_limit=FANIN_LIMIT, w_max=W_MAX):
        self.topological_order()
        for node in self.nodes.values():
            g = node.gate
            if g.fan_in > fanin_limit:
                raise ValueError(f"{node.id}: fan-in {g.fan_in} > {fanin_limit}")
            if any(w == 0 for w in g.weights):
                raise ValueError(f"{node.id}: zero weight stored")
            if any(abs(w) > w_max for w in g.weights):
                raise ValueError(f"{node.id}: weight magnitude > {w_max}")
            if gate_margin(g) < 1:
                raise ValueError(f"{node.id}: margin < 1")
        for o in self.outputs:
            if o not in self.nodes and o not in self.inputs:
                raise ValueError(f"output {o!r} unresolved")

    def to_json(self):
        return {
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "nodes": [
                {
                    "id": n.id,
                    "inputs": list(n.gate.inputs),
                    "weights": list(n.gate.weights),
                    "bias": n.gate.bias,
                    "level": n.level,
                    "stage": n.stage,
                    "is_buffer": n.is_buffer,
                }
                for n in self.nodes.values()
            ],
        }

    @classmethod
    def from_json(cls, obj):
        tln = cls(inputs=list(obj["inputs"]), outputs=list(obj["outputs"]))
        # Nodes are stored in insertion order, which after mapping passes is
        # not necessarily topological; resolve references after loading all.
        for n in obj["nodes"]:
            gate = ThresholdGate(tuple(n["inputs"]), tuple(n["weights"]), n["bias"])
            node = TLGNode(n["id"], gate, is_buffer=n.get("is_buffer", False))
            node.level = n.get("level", 0)
            node.stage = n.get("stage", 0)
            tln.nodes[n["id"]] = node
        known = set(tln.inputs) | set(tln.nodes)
        for node in tln.nodes.values():
            for i in node.gate.inputs:
                if i not in known:
                    raise ValueError(f"node {node.id!r} references unknown {i!r}")
        return tln
