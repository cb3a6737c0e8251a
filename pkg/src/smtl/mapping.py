"""Map a threshold logic network onto pipelined crossbar-array hardware.

Passes, in pipeline order: ASAP stage assignment, path-equalizing buffer
insertion, per-stage capacity enforcement, heavy fan-out splitting, binning
into fixed-size crossbar blocks, absorption of underfilled stages via
backward connections, and a barycenter column reorder that maximizes direct
(face-to-face) links. Every public entry point ends with `validate`.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

from . import partition
from .devices import bias_rows
from .tlg import FANIN_LIMIT, W_MAX, ThresholdGate, ThresholdLogicNetwork

BUFFER = lambda src: ThresholdGate((src,), (2,), -1)  # noqa: E731


class MappingInfeasible(Exception):
    pass


@dataclass
class MappingConfig:
    k: int = 2                 # MCA logic levels per pipeline stage
    rows: int = 64             # input rows per block
    cols: int = 32             # TLG columns per block
    blocks_per_stage: int | None = None  # None: as many as needed
    f_max: int = 8             # fan-out bound before node splitting
    min_fill: float = 0.10     # stages below this fill get absorbed
    b_max: int = 4             # backward connections per block
    reorder_sweeps: int = 10

    def to_json(self):
        return dict(self.__dict__)

    @classmethod
    def from_json(cls, obj):
        return cls(**obj)


@dataclass
class MappedDesign:
    config: MappingConfig
    tln: ThresholdLogicNetwork
    source: "BooleanNetwork"            # noqa: F821  (oracle netlist)
    blocks: dict = field(default_factory=dict)   # stage -> [[node ids]]
    input_blocks: list = field(default_factory=list)  # [[input names]]
    absorbed: set = field(default_factory=set)
    backward_edges: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def n_stages(self):
        return max(self.blocks, default=0)

    @property
    def buffer_count(self):
        return sum(1 for n in self.tln.nodes.values() if n.is_buffer)

    def placements(self):
        """node id -> (stage, block, column); inputs keyed at stage 0."""
        place = {}
        for b, names in enumerate(self.input_blocks):
            for c, name in enumerate(names):
                place[name] = (0, b, c)
        for s, blks in self.blocks.items():
            for b, cols in enumerate(blks):
                for c, nid in enumerate(cols):
                    place[nid] = (s, b, c)
        return place

    def edges(self):
        for node in self.tln.nodes.values():
            for src in node.gate.inputs:
                yield src, node.id

    def stage_nodes(self, s):
        return [nid for blk in self.blocks[s] for nid in blk]

    def to_json(self):
        return {
            "config": self.config.to_json(),
            "tln": self.tln.to_json(),
            "source": self.source.to_json(),
            "blocks": {str(s): b for s, b in self.blocks.items()},
            "input_blocks": self.input_blocks,
            "absorbed": sorted(self.absorbed),
            "backward_edges": self.backward_edges,
            "warnings": self.warnings,
        }

    @classmethod
    def from_json(cls, obj):
        from .bench import BooleanNetwork

        return cls(
            config=MappingConfig.from_json(obj["config"]),
            tln=ThresholdLogicNetwork.from_json(obj["tln"]),
            source=BooleanNetwork.from_json(obj["source"]),
            blocks={int(s): b for s, b in obj["blocks"].items()},
            input_blocks=obj["input_blocks"],
            absorbed=set(obj["absorbed"]),
            backward_edges=[tuple(e) for e in obj["backward_edges"]],
            warnings=list(obj["warnings"]),
        )


def _stage_of(tln, name, k):
    if name in tln.nodes:
        return tln.nodes[name].stage
    return 0  # primary input


def assign_stages(tln, k):
    """ASAP levels, then pipeline stage = ceil(level / k)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    tln.assign_levels()
    for node in tln.nodes.values():
        node.stage = math.ceil(node.level / k)
    return tln


def strip_buffers(tln):
    """Remove path-equalization buffers, rewiring consumers to the source.

    Buffers that realize a primary output alias are kept.
    """
    removable = {
        nid for nid, n in tln.nodes.items()
        if n.is_buffer and nid not in tln.outputs
    }

    def resolve(src):
        while src in removable:
            src = tln.nodes[src].gate.inputs[0]
        return src

    for node in tln.nodes.values():
        if node.id in removable:
            continue
        g = node.gate
        node.gate = ThresholdGate(
            tuple(resolve(i) for i in g.inputs), g.weights, g.bias
        )
    for nid in removable:
        del tln.nodes[nid]


def insert_buffers(tln, k):
    """Break every edge spanning >= 2 stage boundaries with buffer chains.

    Chains are shared: one buffer per (source, stage) pair.
    """
    chains = {}

    def carried(src, stage):
        # id holding the value of `src`, placed in `stage`
        if _stage_of(tln, src, k) == stage:
            return src
        key = (src, stage)
        if key not in chains:
            prev = carried(src, stage - 1)
            nid = f"{src}$s{stage}"
            node = tln.add_node(nid, BUFFER(prev), is_buffer=True)
            node.stage = stage
            node.level = (stage - 1) * k + 1
            chains[key] = nid
        return chains[key]

    for nid in list(tln.nodes):
        node = tln.nodes[nid]
        if node.id in chains.values():
            continue
        g = node.gate
        srcs = []
        for src in g.inputs:
            span = node.stage - _stage_of(tln, src, k)
            srcs.append(carried(src, node.stage - 1) if span >= 2 else src)
        node.gate = ThresholdGate(tuple(srcs), g.weights, g.bias)
    return len(chains)


def _rebuffer(tln, k):
    strip_buffers(tln)
    return insert_buffers(tln, k)


def _bump_level(tln, nid, new_level, k):
    """Raise a node's level (and stage), cascading to same/lower consumers."""
    work = [(nid, new_level)]
    cons = tln.consumers()
    while work:
        name, lvl = work.pop()
        node = tln.nodes[name]
        if node.level >= lvl:
            continue
        node.level = lvl
        node.stage = math.ceil(lvl / k)
        for c in cons[name]:
            if tln.nodes[c].level <= lvl:
                work.append((c, lvl + 1))


def enforce_capacity(tln, cfg):
    """Defer overflowing nodes to the next stage until every stage fits.

    Selection priority per stage: first nodes whose fan-out skips the next
    stage entirely (their direct consumers are all buffers), then minimum
    fan-in; ties broken by insertion order.
    """
    if cfg.blocks_per_stage is None:
        return
    cap = cfg.blocks_per_stage * cfg.cols
    order = {nid: i for i, nid in enumerate(tln.nodes)}
    for _pass in range(50):
        moved = False
        s = 1
        while s <= max((n.stage for n in tln.nodes.values()), default=0):
            load = [n for n in tln.nodes.values() if n.stage == s]
            while len(load) > cap:
                cons = tln.consumers()

                def key(n):
                    skips_next = all(
                        tln.nodes[c].is_buffer for c in cons[n.id]
                    ) and bool(cons[n.id])
                    return (not skips_next, n.gate.fan_in, order.get(n.id, 0))

                victim = min(load, key=key)
                _bump_level(tln, victim.id, s * cfg.k + 1, cfg.k)
                moved = True
                load = [n for n in tln.nodes.values() if n.stage == s]
            s += 1
        _rebuffer(tln, cfg.k)
        if not moved:
            return
    raise MappingInfeasible("capacity enforcement did not converge")


def split_fanout(tln, f_max):
    """Duplicate nodes whose fan-out exceeds f_max; equivalence preserved.

    Processes consumers before producers so one reverse-topological pass
    suffices. Primary inputs are left as-is (they have no gate to copy).
    """
    if f_max < 2:
        raise ValueError("f_max must be >= 2")
    n_split = 0
    for nid in reversed(tln.topological_order()):
        if nid not in tln.nodes:
            continue
        node = tln.nodes[nid]
        # consumer slots: (consumer id, input position); output refs count too
        slots = []
        for other in tln.nodes.values():
            for pos, src in enumerate(other.gate.inputs):
                if src == nid:
                    slots.append(("node", other.id, pos))
        for pos, out in enumerate(tln.outputs):
            if out == nid:
                slots.append(("out", None, pos))
        if len(slots) <= f_max:
            continue
        n_copies = math.ceil(len(slots) / f_max)
        targets = [nid]
        for j in range(1, n_copies):
            cid = f"{nid}$c{j}"
            cnode = tln.add_node(cid, node.gate, is_buffer=node.is_buffer)
            cnode.level, cnode.stage = node.level, node.stage
            targets.append(cid)
        for i, slot in enumerate(slots):
            tgt = targets[i // f_max]
            if tgt == nid:
                continue
            kind, owner, pos = slot
            if kind == "out":
                tln.outputs[pos] = tgt
            else:
                g = tln.nodes[owner].gate
                srcs = list(g.inputs)
                srcs[pos] = tgt
                tln.nodes[owner].gate = ThresholdGate(
                    tuple(srcs), g.weights, g.bias
                )
        n_split += 1
    return n_split


def absorb_small_layers(design):
    """Fold underfilled stages into their predecessor via backward links.

    A stage is absorbed only when each of its nodes can sit in the block
    already holding all of its sources, with at most b_max backward
    connections per block; otherwise it is skipped with a warning.
    """
    cfg = design.config
    tln = design.tln
    s = design.n_stages
    while s >= 2:
        nodes = design.stage_nodes(s)
        n_blocks = len(design.blocks[s])
        fill = len(nodes) / (max(n_blocks, 1) * cfg.cols)
        if not nodes or fill >= cfg.min_fill:
            s -= 1
            continue
        place = design.placements()
        plan, back_count, ok = {}, {}, True
        for nid in nodes:
            srcs = tln.nodes[nid].gate.inputs
            src_blocks = {place[src][1] for src in srcs
                          if place[src][0] == s - 1}
            if len(src_blocks) != 1 or any(
                place[src][0] != s - 1 for src in srcs
            ):
                ok = False
                break
            b = src_blocks.pop()
            plan[nid] = b
            back_count[b] = back_count.get(b, 0) + len(srcs)
        if ok:
            for b, cnt in back_count.items():
                if cnt > cfg.b_max:
                    ok = False
                if len(design.blocks[s - 1][b]) + sum(
                    1 for x in plan.values() if x == b
                ) > cfg.cols:
                    ok = False
        if not ok:
            design.warnings.append(
                f"stage {s} underfilled ({fill:.0%}) but not absorbable "
                f"within b_max={cfg.b_max}"
            )
            s -= 1
            continue
        for nid, b in sorted(plan.items()):
            design.blocks[s - 1][b].append(nid)
            design.absorbed.add(nid)
            tln.nodes[nid].stage = s - 1
            for src in tln.nodes[nid].gate.inputs:
                design.backward_edges.append((src, nid))
        # close the gap: renumber stages above s
        for t in range(s, design.n_stages):
            design.blocks[t] = design.blocks[t + 1]
            for nid in design.stage_nodes(t):
                if nid not in design.absorbed:
                    tln.nodes[nid].stage = t
        del design.blocks[max(design.blocks)]
        s = min(s, design.n_stages)
    return design


def reorder_stages(design, sweeps=None):
    """Barycenter sweeps reassigning columns to maximize direct links.

    A stage's new ordering is kept only if the design-wide direct-link
    count does not decrease, so the pass is monotone. Stages holding
    absorbed (backward-connected) nodes are pinned.
    """
    cfg = design.config
    sweeps = cfg.reorder_sweeps if sweeps is None else sweeps
    pinned = {0}
    for s in design.blocks:
        if any(nid in design.absorbed for nid in design.stage_nodes(s)):
            pinned.update((s, s - 1))
    best = partition.direct_link_count(design)
    for _ in range(sweeps):
        improved = False
        for s in sorted(design.blocks):
            if s in pinned:
                continue
            old = design.blocks[s]
            nodes = [nid for nid in design.stage_nodes(s)]
            place = design.placements()
            cons = design.tln.consumers()
            bary = {}
            for i, nid in enumerate(nodes):
                neigh = [place[src][1]
                         for src in design.tln.nodes[nid].gate.inputs
                         if src in place]
                neigh += [place[c][1] for c in cons[nid] if c in place]
                bary[nid] = (sum(neigh) / len(neigh) if neigh else 0.0, i)
            ordered = sorted(nodes, key=lambda n: bary[n])
            design.blocks[s] = partition.rebin(
                ordered, design.tln, cfg.rows, cfg.cols
            )
            now = partition.direct_link_count(design)
            if now >= best:
                if now > best:
                    improved = True
                best = now
            else:
                design.blocks[s] = old
        if not improved:
            break
    return design


def validate(design, fanin_limit=FANIN_LIMIT, w_max=W_MAX):
    """Check every structural invariant of a mapped design."""
    cfg = design.config
    tln = design.tln
    tln.validate(fanin_limit, w_max)
    place = design.placements()
    backward = set(map(tuple, design.backward_edges))
    seen = set()
    for s, blks in design.blocks.items():
        for b, colnodes in enumerate(blks):
            if len(colnodes) > cfg.cols:
                raise MappingInfeasible(
                    f"stage {s} block {b}: {len(colnodes)} nodes > {cfg.cols} columns"
                )
            srcs = set()
            brows = 0
            for nid in colnodes:
                if nid in seen:
                    raise MappingInfeasible(f"{nid} placed twice")
                seen.add(nid)
                srcs.update(tln.nodes[nid].gate.inputs)
                brows = max(brows, bias_rows(tln.nodes[nid].gate.bias, w_max))
            if len(srcs) + brows > cfg.rows:
                raise MappingInfeasible(
                    f"stage {s} block {b}: needs {len(srcs) + brows} rows "
                    f"> {cfg.rows}"
                )
        limit = cfg.blocks_per_stage
        load = sum(len(c) for c in blks)
        if limit is not None and load > limit * cfg.cols:
            raise MappingInfeasible(
                f"stage {s}: {load} nodes > {limit} blocks x {cfg.cols}"
            )
    if seen != set(tln.nodes):
        missing = set(tln.nodes) - seen
        raise MappingInfeasible(f"unplaced nodes: {sorted(missing)[:5]}")
    for u, v in design.edges():
        if (u, v) in backward:
            if place[u][:2] != (place[v][0], place[v][1]):
                raise MappingInfeasible(
                    f"backward connection {u}->{v} crosses blocks"
                )
            continue
        su, sv = place[u][0], place[v][0]
        if sv - su == 1:
            continue
        if sv == su and cfg.k > 1 and v not in design.absorbed:
            nu = tln.nodes[u].level if u in tln.nodes else 0
            if tln.nodes[v].level > nu:
                continue
        raise MappingInfeasible(
            f"edge {u}(stage {su}) -> {v}(stage {sv}) spans "
            f"{sv - su} boundaries"
        )
    # backward connections per block within bound
    per_block = {}
    for u, v in backward:
        key = place[v][:2]
        per_block[key] = per_block.get(key, 0) + 1
    for key, cnt in per_block.items():
        if cnt > cfg.b_max:
            raise MappingInfeasible(
                f"stage/block {key}: {cnt} backward connections > {cfg.b_max}"
            )
    return True


def map_design(tln, source, config=None, fanin_limit=FANIN_LIMIT,
               w_max=W_MAX):
    """Run the full mapping pipeline on a synthesized network."""
    cfg = config or MappingConfig()
    tln = copy.deepcopy(tln)
    for node in tln.nodes.values():
        need = node.gate.fan_in + bias_rows(node.gate.bias)
        if need > cfg.rows:
            raise MappingInfeasible(
                f"node {node.id} needs {need} rows, block has {cfg.rows}"
            )
    assign_stages(tln, cfg.k)
    insert_buffers(tln, cfg.k)
    enforce_capacity(tln, cfg)
    split_fanout(tln, cfg.f_max)
    if cfg.blocks_per_stage is not None:
        enforce_capacity(tln, cfg)
        split_fanout(tln, cfg.f_max)

    design = MappedDesign(config=cfg, tln=tln, source=source)
    design.input_blocks = [
        list(tln.inputs[i:i + cfg.cols])
        for i in range(0, len(tln.inputs), cfg.cols)
    ]
    n_stages = max((n.stage for n in tln.nodes.values()), default=0)
    for s in range(1, n_stages + 1):
        nodes = [nid for nid in tln.nodes if tln.nodes[nid].stage == s]
        design.blocks[s] = partition.rebin(nodes, tln, cfg.rows, cfg.cols)
    absorb_small_layers(design)
    reorder_stages(design)
    validate(design, fanin_limit, w_max)
    return design


def summary(design):
    stats = partition.interconnect_stats(design)
    return {
        "stages": design.n_stages,
        "nodes": len(design.tln.nodes),
        "buffers": design.buffer_count,
        "blocks": sum(len(b) for b in design.blocks.values()),
        "direct_links": stats["direct"],
        "routed_links": stats["routed"],
        "backward_links": len(design.backward_edges),
        "route_length": stats["route_length"],
        "warnings": design.warnings,
    }
