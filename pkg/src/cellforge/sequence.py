"""Build orders over the cell adjacency graph, and input/output splitting.

A build sequence is a cell ordering whose every prefix stays connected in
the face-contact graph.  All such orderings are enumerated when few enough,
otherwise a capped set is sampled by seeded frontier-uniform growth (start
cell uniform, then each step picks uniformly among cells touching the
prefix).  The sampled distribution is biased relative to uniform over
orderings; fine for data augmentation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DisconnectedError, InconsistentExampleError, SequenceTooShortError
from .geometry import Part
from .kernel import DEFAULT_KERNEL_CONFIG, KernelConfig, adjacency_pairs
from .rng import Stream, derive


@dataclass(frozen=True)
class AdjacencyGraph:
    part_id: str
    nodes: tuple[str, ...]
    edges: frozenset[frozenset]

    def neighbors(self, node: str) -> set[str]:
        return {other for e in self.edges for other in e if node in e} - {node}

    def is_connected(self) -> bool:
        if len(self.nodes) <= 1:
            return True
        seen = {self.nodes[0]}
        stack = [self.nodes[0]]
        while stack:
            for nxt in self.neighbors(stack.pop()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == len(self.nodes)


@dataclass(frozen=True)
class BuildSequence:
    part_id: str
    order: tuple[str, ...]


@dataclass(frozen=True)
class SplitExample:
    part_id: str
    order: tuple[str, ...]
    cut: int
    input_cells: tuple[str, ...]
    output_cells: tuple[str, ...]
    reused_surfaces: tuple[str, ...]


def build_graph(part: Part, cfg: KernelConfig = DEFAULT_KERNEL_CONFIG) -> AdjacencyGraph:
    """Edge (a, b) iff the cells share positive-area face contact."""
    ids = [c.id for c in part.cells]
    edges = frozenset(
        frozenset((ids[i], ids[j])) for i, j in adjacency_pairs(part.cells, cfg)
    )
    return AdjacencyGraph(part_id=part.id, nodes=tuple(ids), edges=edges)


def graph_from_edges(part_id: str, nodes, edges) -> AdjacencyGraph:
    """Direct construction, mostly for tests and fixtures."""
    return AdjacencyGraph(
        part_id=part_id,
        nodes=tuple(nodes),
        edges=frozenset(frozenset(e) for e in edges),
    )


def prefix_connected(graph: AdjacencyGraph, order) -> bool:
    placed: set[str] = set()
    for cell in order:
        if placed and not (graph.neighbors(cell) & placed):
            return False
        placed.add(cell)
    return True


def _enumerate_up_to(graph: AdjacencyGraph, limit: int | None):
    """Connected orderings in lexicographic order, stopping past limit."""
    out: list[tuple[str, ...]] = []
    nodes = sorted(graph.nodes)

    def grow(prefix: list[str], placed: set[str], frontier: set[str]) -> bool:
        if len(prefix) == len(nodes):
            out.append(tuple(prefix))
            return limit is None or len(out) <= limit
        for nxt in sorted(frontier):
            placed.add(nxt)
            new_frontier = (frontier | graph.neighbors(nxt)) - placed
            prefix.append(nxt)
            ok = grow(prefix, placed, new_frontier)
            prefix.pop()
            placed.remove(nxt)
            if not ok:
                return False
        return True

    for start in nodes:
        if not grow([start], {start}, graph.neighbors(start)):
            break
    return out


def enumerate_orders(graph: AdjacencyGraph, cap: int | None = None,
                     seed: int = 0) -> list[BuildSequence]:
    """All connected orderings if there are at most cap of them (sorted),
    else cap distinct frontier-uniform samples (de-duplicated, sorted)."""
    if cap is not None and cap < 1:
        raise ValueError("cap must be >= 1")
    if not graph.is_connected():
        raise DisconnectedError(f"part {graph.part_id}: adjacency graph is not connected")
    full = _enumerate_up_to(graph, cap)
    if cap is None or len(full) <= cap:
        return [BuildSequence(graph.part_id, o) for o in full]

    stream = Stream(derive(seed, "orders", graph.part_id))
    nodes = sorted(graph.nodes)
    picked: set[tuple[str, ...]] = set()
    attempts = 0
    max_attempts = 1000 * cap
    while len(picked) < cap and attempts < max_attempts:
        attempts += 1
        order = [stream.choice(nodes)]
        placed = {order[0]}
        frontier = graph.neighbors(order[0])
        while frontier:
            nxt = stream.choice(sorted(frontier))
            order.append(nxt)
            placed.add(nxt)
            frontier = (frontier | graph.neighbors(nxt)) - placed
        picked.add(tuple(order))
    return [BuildSequence(graph.part_id, o) for o in sorted(picked)]


def canonical_order(graph: AdjacencyGraph) -> BuildSequence:
    """The lexicographically least connected ordering (augmentation baseline)."""
    first = _enumerate_up_to(graph, 1)
    if not first:
        raise DisconnectedError(f"part {graph.part_id}: adjacency graph is not connected")
    return BuildSequence(graph.part_id, first[0])


def middle_cut(n: int) -> int:
    """The single-cut baseline: k = ceil((n-1)/2) == n // 2."""
    return n // 2


def split_at(seq: BuildSequence, part: Part, cut: int) -> SplitExample:
    n = len(seq.order)
    if not 1 <= cut <= n - 1:
        raise ValueError(f"cut must be in 1..{n - 1}")
    cells = part.cell_by_id()
    missing = [cid for cid in seq.order if cid not in cells]
    if missing:
        raise InconsistentExampleError(f"sequence references unknown cells {missing}")
    input_cells = seq.order[:cut]
    output_cells = seq.order[cut:]
    in_surfs = set().union(*(cells[c].surface_ids() for c in input_cells))
    out_surfs = set().union(*(cells[c].surface_ids() for c in output_cells))
    reused = tuple(sorted(in_surfs & out_surfs))
    return SplitExample(
        part_id=seq.part_id,
        order=seq.order,
        cut=cut,
        input_cells=input_cells,
        output_cells=output_cells,
        reused_surfaces=reused,
    )


def split_all(seq: BuildSequence, part: Part) -> list[SplitExample]:
    """One example per possible cut point: k = 1 .. n-1."""
    n = len(seq.order)
    if n < 2:
        raise SequenceTooShortError("splitting needs at least two cells")
    return [split_at(seq, part, k) for k in range(1, n)]
