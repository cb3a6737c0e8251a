"""Compile Boolean gate networks into fan-in-restricted threshold networks.

Strategy: each primitive gate becomes one threshold gate (wide gates are
split into balanced trees, XOR is expanded since it is not linearly
separable), followed by a greedy collapse phase that merges single-fan-out
nodes into their consumer whenever the merged function is still a threshold
function within the weight and fan-in budget.
"""

from __future__ import annotations

import itertools

import numpy as np

from .bench import evaluate_many
from .tlg import (
    FANIN_LIMIT,
    NOT_THRESHOLD,
    W_MAX,
    NotThreshold,
    ThresholdGate,
    ThresholdLogicNetwork,
    solve_weights,
)

BUFFER_GATE = lambda src: ThresholdGate((src,), (2,), -1)  # noqa: E731


def gate_to_tlg(kind, sources):
    """Single threshold gate for a primitive Boolean gate.

    Weights are doubled relative to the textbook unit-weight encodings so
    that every input row clears the comparator by at least 1.
    """
    n = len(sources)
    sources = tuple(sources)
    if kind == "AND":
        return ThresholdGate(sources, (2,) * n, -(2 * n - 1))
    if kind == "OR":
        return ThresholdGate(sources, (2,) * n, -1)
    if kind == "NAND":
        return ThresholdGate(sources, (-2,) * n, 2 * n - 1)
    if kind == "NOR":
        return ThresholdGate(sources, (-2,) * n, 1)
    if kind == "NOT":
        if n != 1:
            raise ValueError("NOT takes one input")
        return ThresholdGate(sources, (-2,), 1)
    if kind == "BUFF":
        if n != 1:
            raise ValueError("BUFF takes one input")
        return BUFFER_GATE(sources[0])
    if kind == "XOR":
        raise ValueError("XOR is not a threshold function; decompose first")
    raise ValueError(f"unknown gate kind {kind!r}")


class _Builder:
    def __init__(self, tln):
        self.tln = tln
        self.counter = itertools.count()

    def fresh(self, hint):
        return f"{hint}${next(self.counter)}"

    def emit(self, node_id, gate):
        return self.tln.add_node(node_id, gate).id


def _tree_reduce(b, sources, kind, limit, hint):
    """Reduce wide associative gates to a list of at most `limit` sources."""
    sources = list(sources)
    while len(sources) > limit:
        grouped = []
        for i in range(0, len(sources), limit):
            chunk = sources[i:i + limit]
            if len(chunk) == 1:
                grouped.append(chunk[0])
            else:
                grouped.append(b.emit(b.fresh(hint), gate_to_tlg(kind, chunk)))
        sources = grouped
    return sources


def _emit_xor2(b, a, c, node_id):
    """XOR2 as (a OR c) AND NOT(a AND c), three threshold gates."""
    u = b.emit(b.fresh(node_id), gate_to_tlg("OR", [a, c]))
    v = b.emit(b.fresh(node_id), gate_to_tlg("NAND", [a, c]))
    return b.emit(node_id, gate_to_tlg("AND", [u, v]))


def _emit_gate(b, gate, fanin_limit):
    kind, srcs = gate.kind, list(gate.inputs)
    if kind == "XOR":
        if len(srcs) == 1:
            return b.emit(gate.name, gate_to_tlg("BUFF", srcs))
        # balanced pairing tree of 2-input XOR fragments
        while len(srcs) > 2:
            nxt = []
            for i in range(0, len(srcs) - 1, 2):
                nxt.append(_emit_xor2(b, srcs[i], srcs[i + 1], b.fresh(gate.name)))
            if len(srcs) % 2:
                nxt.append(srcs[-1])
            srcs = nxt
        return _emit_xor2(b, srcs[0], srcs[1], gate.name)
    if kind in ("NOT", "BUFF"):
        return b.emit(gate.name, gate_to_tlg(kind, srcs))
    core = {"NAND": "AND", "NOR": "OR"}.get(kind, kind)
    srcs = _tree_reduce(b, srcs, core, fanin_limit, gate.name)
    return b.emit(gate.name, gate_to_tlg(kind, srcs))


def synthesize_tln(net, fanin_limit=FANIN_LIMIT, w_max=W_MAX, collapse=True):
    """Build a functionally equivalent ThresholdLogicNetwork."""
    if not 2 <= fanin_limit:
        raise ValueError("fan-in limit must be at least 2")
    tln = ThresholdLogicNetwork(inputs=list(net.inputs))
    b = _Builder(tln)
    for name in net.topological_order():
        _emit_gate(b, net.gate(name), fanin_limit)
    for out in net.outputs:
        if out in tln.nodes:
            tln.outputs.append(out)
        else:  # primary output aliased straight to a primary input
            nid = out + "$buf"
            tln.add_node(nid, BUFFER_GATE(out), is_buffer=True)
            tln.outputs.append(nid)
    if collapse:
        collapse_tln(tln, fanin_limit, w_max)
    _prune_dead(tln)
    tln.assign_levels()
    tln.validate(fanin_limit, w_max)
    return tln


def _merged_table(producer, consumer, support):
    pos = {s: i for i, s in enumerate(support)}
    table = []
    for row in range(2 ** len(support)):
        env = {s: (row >> i) & 1 for s, i in pos.items()}
        pv = 1 if sum(w * env[i] for w, i in
                      zip(producer.gate.weights, producer.gate.inputs)) \
            + producer.gate.bias >= 0 else 0
        env[producer.id] = pv
        cv = sum(w * env[i] for w, i in
                 zip(consumer.gate.weights, consumer.gate.inputs)) \
            + consumer.gate.bias
        table.append(1 if cv >= 0 else 0)
    return tuple(table)


def collapse_tln(tln, fanin_limit=FANIN_LIMIT, w_max=W_MAX):
    """Greedy single-fan-out collapse; node count decreases monotonically.

    Scans in reverse topological order, deterministic by insertion order.
    """
    merged = 0
    changed = True
    while changed:
        changed = False
        cons = tln.consumers()
        for nid in reversed(tln.topological_order()):
            if nid in tln.outputs:
                continue
            users = sorted(set(cons[nid]))
            if len(users) != 1:
                continue
            consumer = tln.nodes[users[0]]
            producer = tln.nodes[nid]
            support = [i for i in consumer.gate.inputs if i != nid]
            support += [i for i in producer.gate.inputs if i not in support]
            if len(support) > fanin_limit:
                continue
            gate = solve_weights(_merged_table(producer, consumer, support),
                                 w_max, fanin_limit)
            if isinstance(gate, NotThreshold):
                continue
            keep = [(s, w) for s, w in zip(support, gate.weights) if w != 0]
            if not keep:
                continue  # constant function; cannot be stored as a gate
            consumer.gate = ThresholdGate(
                tuple(s for s, _ in keep), tuple(w for _, w in keep), gate.bias
            )
            del tln.nodes[nid]
            merged += 1
            changed = True
            break
    return merged


def _prune_dead(tln):
    live = set(tln.outputs)
    stack = [o for o in tln.outputs if o in tln.nodes]
    while stack:
        node = tln.nodes[stack.pop()]
        for i in node.gate.inputs:
            if i in tln.nodes and i not in live:
                live.add(i)
                stack.append(i)
    for nid in [n for n in tln.nodes if n not in live]:
        del tln.nodes[nid]


def exhaustive_vectors(n):
    rows = np.zeros((2 ** n, n), dtype=bool)
    for i in range(n):
        rows[:, i] = (np.arange(2 ** n) >> i) & 1
    return rows


def sampled_vectors(n, count, seed):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2, size=(count, n), dtype=np.int8).astype(bool)


def verify_equivalence(net, tln, mode="exhaustive", count=10_000, seed=0,
                       simulate=None):
    """Compare a Boolean network against a threshold network.

    `simulate` may override how the threshold side is evaluated (used to
    check mapped designs through the crossbar current model). Returns
    (ok, counterexample) where the counterexample holds the failing input
    vector and both output vectors.
    """
    if list(net.inputs) != list(tln.inputs):
        raise ValueError("primary input mismatch")
    if len(net.outputs) != len(tln.outputs):
        raise ValueError("primary output arity mismatch")
    if mode == "exhaustive":
        vectors = exhaustive_vectors(len(net.inputs))
    elif mode == "sampled":
        vectors = sampled_vectors(len(net.inputs), count, seed)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    want = evaluate_many(net, vectors)
    got = simulate(vectors) if simulate else tln.evaluate_many(vectors)
    bad = np.nonzero((want != got).any(axis=1))[0]
    if bad.size == 0:
        return True, None
    i = int(bad[0])
    return False, {
        "vector": [int(v) for v in vectors[i]],
        "expected": [int(v) for v in want[i]],
        "got": [int(v) for v in got[i]],
    }
