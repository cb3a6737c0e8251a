"""ISCAS85 `.bench` netlist parsing and exact Boolean evaluation.

The BooleanNetwork built here is the golden functional reference that every
downstream transformation (threshold synthesis, hardware mapping, crossbar
simulation) is checked against.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np

GATE_KINDS = ("AND", "OR", "NAND", "NOR", "NOT", "BUFF", "XOR")

# Sequential primitives are out of scope; reject them loudly instead of
# silently treating them as combinational.
_SEQUENTIAL = ("DFF", "DFFSR", "LATCH", "FF")


class BenchError(ValueError):
    """Raised for malformed or semantically invalid `.bench` input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Gate:
    name: str
    kind: str
    inputs: tuple[str, ...]


@dataclass(frozen=True)
class BooleanNetwork:
    """Immutable DAG of primitive gates.

    Gates are stored in file order, which is not necessarily topological;
    use `topological_order` for evaluation order.
    """

    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    gates: tuple[Gate, ...]
    _gate_map: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_gate_map", {g.name: g for g in self.gates})

    def gate(self, name):
        return self._gate_map[name]

    def is_input(self, name):
        return name in self._input_set

    @property
    def _input_set(self):
        return set(self.inputs)

    def topological_order(self):
        """Gate names in dependency order (inputs excluded)."""
        order = []
        seen = set(self.inputs)
        pending = list(self.gates)
        while pending:
            rest = []
            for g in pending:
                if all(i in seen for i in g.inputs):
                    order.append(g.name)
                    seen.add(g.name)
                else:
                    rest.append(g)
            if len(rest) == len(pending):
                raise BenchError("cycle detected among gates: " +
                                 ", ".join(g.name for g in rest[:5]))
            pending = rest
        return order

    def to_json(self):
        return {
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "gates": [
                {"name": g.name, "kind": g.kind, "inputs": list(g.inputs)}
                for g in self.gates
            ],
        }

    @classmethod
    def from_json(cls, obj):
        gates = tuple(
            Gate(g["name"], g["kind"], tuple(g["inputs"])) for g in obj["gates"]
        )
        net = cls(tuple(obj["inputs"]), tuple(obj["outputs"]), gates)
        _validate(net)
        return net

    def to_bench(self):
        lines = [f"INPUT({n})" for n in self.inputs]
        lines += [f"OUTPUT({n})" for n in self.outputs]
        lines += [
            f"{g.name} = {g.kind}({', '.join(g.inputs)})" for g in self.gates
        ]
        return "\n".join(lines) + "\n"


_LINE_RE = re.compile(
    r"^\s*(?:"
    r"(?P<io>INPUT|OUTPUT)\s*\(\s*(?P<io_name>\S+?)\s*\)"
    r"|(?P<lhs>\S+)\s*=\s*(?P<kind>\w+)\s*\(\s*(?P<args>[^)]*)\)"
    r")\s*$"
)


def parse_bench(text):
    """Parse `.bench` text into a validated BooleanNetwork."""
    inputs, outputs, gates = [], [], []
    defined = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE_RE.match(line)
        if m is None:
            raise BenchError(f"syntax error near {line!r}", lineno)
        if m.group("io"):
            name = m.group("io_name")
            if m.group("io") == "INPUT":
                if name in defined:
                    raise BenchError(f"duplicate definition of {name!r}", lineno)
                inputs.append(name)
                defined.add(name)
            else:
                outputs.append(name)
            continue
        name = m.group("lhs")
        kind = m.group("kind").upper()
        args = tuple(a.strip() for a in m.group("args").split(",") if a.strip())
        if kind in _SEQUENTIAL:
            raise BenchError(
                f"sequential element {kind} not supported (combinational only)",
                lineno,
            )
        if kind not in GATE_KINDS:
            raise BenchError(f"unknown gate kind {kind!r}", lineno)
        if kind in ("NOT", "BUFF") and len(args) != 1:
            raise BenchError(f"{kind} takes exactly 1 input", lineno)
        if not args:
            raise BenchError(f"gate {name!r} has no inputs", lineno)
        if name in defined:
            raise BenchError(f"duplicate definition of {name!r}", lineno)
        gates.append(Gate(name, kind, args))
        defined.add(name)

    net = BooleanNetwork(tuple(inputs), tuple(outputs), tuple(gates))
    _validate(net)
    return net


def _validate(net):
    defined = set(net.inputs) | {g.name for g in net.gates}
    for g in net.gates:
        for i in g.inputs:
            if i not in defined:
                raise BenchError(f"gate {g.name!r} references undefined net {i!r}")
    for o in net.outputs:
        if o not in defined:
            raise BenchError(f"output {o!r} does not resolve to a defined net")
    net.topological_order()  # raises on cycles


_GATE_FN = {
    "AND": lambda vals: np.logical_and.reduce(vals),
    "OR": lambda vals: np.logical_or.reduce(vals),
    "NAND": lambda vals: ~np.logical_and.reduce(vals),
    "NOR": lambda vals: ~np.logical_or.reduce(vals),
    "XOR": lambda vals: np.logical_xor.reduce(vals),
    "NOT": lambda vals: ~vals[0],
    "BUFF": lambda vals: vals[0],
}


def evaluate_network(net, assignment):
    """Evaluate one input vector; returns a tuple of output bits."""
    out = evaluate_many(net, np.asarray(assignment, dtype=bool).reshape(1, -1))
    return tuple(int(b) for b in out[0])


def evaluate_many(net, vectors):
    """Evaluate a (num_vectors, num_inputs) bool matrix; returns outputs matrix."""
    vectors = np.asarray(vectors, dtype=bool)
    if vectors.ndim != 2 or vectors.shape[1] != len(net.inputs):
        raise ValueError(
            f"expected {len(net.inputs)} input columns, got shape {vectors.shape}"
        )
    vals = {name: vectors[:, i] for i, name in enumerate(net.inputs)}
    for name in net.topological_order():
        g = net.gate(name)
        vals[name] = _GATE_FN[g.kind]([vals[i] for i in g.inputs])
    return np.column_stack([vals[o] for o in net.outputs])


def topological_levels(net):
    """ASAP levels: inputs at 0, each gate 1 + max over its input levels."""
    levels = {name: 0 for name in net.inputs}
    for name in net.topological_order():
        g = net.gate(name)
        levels[name] = 1 + max(levels[i] for i in g.inputs)
    return levels


def load_bench(path):
    with open(path) as f:
        return parse_bench(f.read())


def save_json(net, path):
    with open(path, "w") as f:
        json.dump(net.to_json(), f, indent=1)
