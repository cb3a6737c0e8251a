"""Sub-array partitioning, interconnect accounting and area estimation.

Blocks are laid out on a (stage, block-index) grid. An edge between nodes
holding the same block index in consecutive stages is a direct link
(face-to-face arrays); everything else goes through the routing network and
is charged Manhattan distance in block-pitch units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .devices import bias_rows

# geometry defaults: 4F^2 per 1T1M cell at F = 45 nm, 20% periphery per
# block, one cell-row of interconnect per unit route length
F_NM = 45.0
CELL_AREA_UM2 = 4 * (F_NM / 1000.0) ** 2
PERIPHERY_OVERHEAD = 0.20


class PartitionInfeasible(Exception):
    pass


def rebin(node_ids, tln, rows, cols):
    """Greedy binning of a stage's nodes into blocks of rows x cols.

    A block closes when its columns fill up or the distinct input rows
    (sources plus always-on bias rows) would exceed the row budget.
    """
    blocks, cur, cur_srcs, cur_brows = [], [], set(), 0
    for nid in node_ids:
        gate = tln.nodes[nid].gate
        need = bias_rows(gate.bias)
        if gate.fan_in + need > rows:
            raise PartitionInfeasible(
                f"node {nid}: fan-in {gate.fan_in} + {need} bias rows "
                f"exceed {rows} rows"
            )
        new_srcs = cur_srcs | set(gate.inputs)
        new_brows = max(cur_brows, need)
        if cur and (len(cur) >= cols or len(new_srcs) + new_brows > rows):
            blocks.append(cur)
            cur, cur_srcs, cur_brows = [], set(), 0
            new_srcs, new_brows = set(gate.inputs), need
        cur.append(nid)
        cur_srcs, cur_brows = new_srcs, new_brows
    if cur:
        blocks.append(cur)
    return blocks


def partition_stage(node_ids, tln, subarray_rows, subarray_cols):
    """Bin one stage into sub-arrays of the given dimensions."""
    return rebin(node_ids, tln, subarray_rows, subarray_cols)


def repartition(design, subarray_rows, subarray_cols):
    """Return a copy of the design re-binned at different sub-array dims."""
    import copy

    if design.absorbed:
        # backward connections tie absorbed nodes to their source block;
        # keep those stages' binning untouched
        touched = {design.tln.nodes[n].stage for n in design.absorbed}
    else:
        touched = set()
    out = copy.deepcopy(design)
    out.config = copy.deepcopy(design.config)
    out.config.rows = subarray_rows
    out.config.cols = subarray_cols
    out.input_blocks = [
        list(out.tln.inputs[i:i + subarray_cols])
        for i in range(0, len(out.tln.inputs), subarray_cols)
    ]
    for s in list(out.blocks):
        if s in touched or s - 1 in touched:
            continue
        out.blocks[s] = rebin(
            out.stage_nodes(s), out.tln, subarray_rows, subarray_cols
        )
    return out


@dataclass(frozen=True)
class Link:
    src: str
    dst: str
    kind: str      # direct | routed | backward
    length: int    # block-pitch units; 0 unless routed


def classify_links(design):
    """Classify every edge of the design as direct, routed or backward."""
    place = design.placements()
    backward = set(map(tuple, design.backward_edges))
    links = []
    for u, v in design.edges():
        if (u, v) in backward:
            links.append(Link(u, v, "backward", 0))
            continue
        su, bu, _ = place[u]
        sv, bv, _ = place[v]
        if bu == bv:
            links.append(Link(u, v, "direct", 0))
        else:
            links.append(Link(u, v, "routed", abs(sv - su) + abs(bv - bu)))
    return links


def direct_link_count(design):
    return sum(1 for l in classify_links(design) if l.kind == "direct")


def interconnect_stats(design):
    links = classify_links(design)
    return {
        "direct": sum(1 for l in links if l.kind == "direct"),
        "routed": sum(1 for l in links if l.kind == "routed"),
        "backward": sum(1 for l in links if l.kind == "backward"),
        "route_length": sum(l.length for l in links),
    }


def cell_count(design):
    """Total allocated crossbar cells (rows x cols per block, both polarities)."""
    cfg = design.config
    n_blocks = sum(len(b) for b in design.blocks.values())
    return n_blocks * cfg.rows * cfg.cols


def area_estimate(design, cell_area_um2=CELL_AREA_UM2,
                  periphery_overhead=PERIPHERY_OVERHEAD,
                  interconnect_rows=1):
    """Area in um^2: block cells + periphery + routing tracks.

    Routing is charged `interconnect_rows` cell-rows (block width) per unit
    of route length.
    """
    cfg = design.config
    cells = cell_count(design)
    block_area = cells * cell_area_um2 * (1.0 + periphery_overhead)
    stats = interconnect_stats(design)
    route_area = (
        stats["route_length"] * interconnect_rows * cfg.cols * cell_area_um2
    )
    return block_area + route_area
