#!/usr/bin/env python3
"""Generate the C432-scale workload benchmark.

Produces a deterministic combinational netlist matching the topline shape
of the ISCAS85 c432 interrupt controller (36 inputs, 7 outputs, 160 gates
including 18 XORs, depth about 17), for use as the large test workload.
The canonical c432 netlist is not redistributed here; every test that uses
this file checks the toolchain against its own Boolean oracle, so only the
scale and gate mix matter.

Run from the repository root:  python tools/make_c432_like.py
"""

import random
from pathlib import Path

N_INPUTS = 36
N_OUTPUTS = 7
N_GATES = 160
N_XOR = 18
N_LAYERS = 16
SEED = 432


def main():
    rng = random.Random(SEED)
    inputs = [str(i) for i in range(1, N_INPUTS + 1)]
    gates = []  # (name, kind, [srcs])
    next_id = N_INPUTS + 100

    def fresh():
        nonlocal next_id
        next_id += 1
        return str(next_id)

    # layer 1: inverters on half the inputs, like the c432 front end
    layers = [inputs]
    layer1 = []
    for i in range(18):
        name = fresh()
        gates.append((name, "NOT", [inputs[i]]))
        layer1.append(name)
    layers.append(layer1)

    remaining = N_GATES - len(gates) - N_OUTPUTS
    per_layer = [remaining // (N_LAYERS - 1)] * (N_LAYERS - 1)
    for i in range(remaining - sum(per_layer)):
        per_layer[i] += 1
    xor_budget = N_XOR

    kinds = ["NAND", "NAND", "NAND", "NOR", "AND", "OR", "NOT"]
    for li, width in enumerate(per_layer, start=2):
        layer = []
        for gi in range(width):
            use_xor = xor_budget > 0 and rng.random() < 0.18
            if use_xor:
                kind = "XOR"
                xor_budget -= 1
            else:
                kind = rng.choice(kinds)
            if kind == "NOT":
                arity = 1
            elif kind == "XOR":
                arity = rng.choice([2, 2, 3])
            else:
                arity = rng.choice([2, 2, 2, 3, 3, 4, 4, 5, 9])
            pool = list(layers[-1]) + list(layers[-2])
            srcs = [rng.choice(layers[-1])]  # force the depth to grow
            while len(srcs) < arity:
                cand = rng.choice(pool)
                if cand not in srcs:
                    srcs.append(cand)
                elif len(set(pool)) <= len(srcs):
                    break
            name = fresh()
            gates.append((name, kind, srcs))
            layer.append(name)
        layers.append(layer)

    # one more XOR layer if the budget did not drain
    while xor_budget > 0:
        name = fresh()
        gates.append((name, "XOR", rng.sample(layers[-1], 2)))
        layers[-1].append(name)
        xor_budget -= 1

    # output cones: wide gates collecting the last layers
    outputs = []
    for i in range(N_OUTPUTS):
        kind = ["NAND", "NOR", "AND", "OR", "NAND", "NOR", "NAND"][i]
        pool = layers[-1] + layers[-2]
        arity = min(len(pool), rng.choice([3, 4, 4, 5, 6]))
        srcs = rng.sample(pool, arity)
        if not set(srcs) & set(layers[-1]):
            srcs[0] = rng.choice(layers[-1])
        name = fresh()
        gates.append((name, kind, srcs))
        outputs.append(name)

    lines = [
        f"# c432-scale workload: {N_INPUTS} inputs, {N_OUTPUTS} outputs, "
        f"{len(gates)} gates ({N_XOR} XOR), generated by "
        f"tools/make_c432_like.py seed={SEED}"
    ]
    lines += [f"INPUT({n})" for n in inputs]
    lines.append("")
    lines += [f"OUTPUT({n})" for n in outputs]
    lines.append("")
    lines += [f"{n} = {k}({', '.join(s)})" for n, k, s in gates]
    text = "\n".join(lines) + "\n"

    out = Path(__file__).resolve().parent.parent / "benchmarks" / "c432_like.bench"
    out.write_text(text)
    print(f"wrote {out} ({len(gates)} gates)")


if __name__ == "__main__":
    main()
