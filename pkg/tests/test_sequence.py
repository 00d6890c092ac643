import itertools

import pytest

from cellforge import csg
from cellforge.decompose import DecomposeConfig, decompose
from cellforge.errors import DisconnectedError, SequenceTooShortError
from cellforge.sequence import (
    build_graph,
    canonical_order,
    enumerate_orders,
    graph_from_edges,
    middle_cut,
    prefix_connected,
    split_all,
)

from geomfix import box_row_part, three_box_row, two_box_part


def brute_force_orders(graph):
    """Oracle: all permutations whose every prefix is connected."""
    out = []
    for perm in itertools.permutations(sorted(graph.nodes)):
        if prefix_connected(graph, perm):
            out.append(perm)
    return sorted(out)


PATH3 = graph_from_edges("path3", "abc", [("a", "b"), ("b", "c")])
STAR13 = graph_from_edges("star13", "xabc", [("x", "a"), ("x", "b"), ("x", "c")])
CYCLE4 = graph_from_edges("cycle4", "abcd",
                          [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")])
COMPLETE4 = graph_from_edges("k4", "abcd",
                             [(u, v) for u, v in itertools.combinations("abcd", 2)])
BRIDGED_TRIANGLES = graph_from_edges(
    "butterfly", "abcdef",
    [("a", "b"), ("b", "c"), ("a", "c"), ("c", "d"),
     ("d", "e"), ("e", "f"), ("d", "f")])
SINGLE = graph_from_edges("one", "a", [])


class TestBuildGraph:
    def test_row_of_three(self, cfg):
        part = three_box_row()
        g = build_graph(part, cfg)
        assert g.edges == frozenset({frozenset({"c1", "c2"}), frozenset({"c2", "c3"})})

    def test_single_cell(self, cfg):
        part = decompose(csg.Box(0, 1, 0, 1, 0, 1))
        g = build_graph(part, cfg)
        assert g.edges == frozenset()

    def test_two_by_two_grid_matches_pairwise_oracle(self, cfg):
        part = box_row_part("grid4", [
            (0, 1, 0, 1, 0, 1), (1, 2, 0, 1, 0, 1),
            (0, 1, 1, 2, 0, 1), (1, 2, 1, 2, 0, 1),
        ])

        def boxes_touch(a, b):
            degenerate = positive = 0
            for axis in range(3):
                lo = max(a[2 * axis], b[2 * axis])
                hi = min(a[2 * axis + 1], b[2 * axis + 1])
                if hi - lo > 0:
                    positive += 1
                elif hi == lo:
                    degenerate += 1
            return degenerate == 1 and positive == 2

        bounds = {f"c{i + 1}": part_bounds for i, part_bounds in enumerate([
            (0, 1, 0, 1, 0, 1), (1, 2, 0, 1, 0, 1),
            (0, 1, 1, 2, 0, 1), (1, 2, 1, 2, 0, 1)])}
        expected = frozenset(
            frozenset((u, v)) for u, v in itertools.combinations(bounds, 2)
            if boxes_touch(bounds[u], bounds[v]))
        g = build_graph(part, cfg)
        assert g.edges == expected
        assert len(g.edges) == 4  # the 4-cycle, no diagonals


class TestEnumerateOrders:
    def test_path3_all_orders(self):
        got = [o.order for o in enumerate_orders(PATH3)]
        assert got == [("a", "b", "c"), ("b", "a", "c"), ("b", "c", "a"), ("c", "b", "a")]
        assert got == brute_force_orders(PATH3)

    def test_star_count(self):
        got = [o.order for o in enumerate_orders(STAR13)]
        assert len(got) == 12
        assert got == brute_force_orders(STAR13)

    def test_single_node(self):
        assert [o.order for o in enumerate_orders(SINGLE)] == [("a",)]

    @pytest.mark.parametrize("graph", [PATH3, STAR13, CYCLE4, COMPLETE4, BRIDGED_TRIANGLES])
    def test_matches_brute_force(self, graph):
        got = [o.order for o in enumerate_orders(graph)]
        assert got == brute_force_orders(graph)

    def test_disconnected_raises(self):
        g = graph_from_edges("gap", "ab", [])
        with pytest.raises(DisconnectedError):
            enumerate_orders(g)

    def test_cap_sampling_deterministic_and_valid(self):
        sampled1 = enumerate_orders(COMPLETE4, cap=5, seed=11)
        sampled2 = enumerate_orders(COMPLETE4, cap=5, seed=11)
        assert [o.order for o in sampled1] == [o.order for o in sampled2]
        assert len(sampled1) == 5
        assert len({o.order for o in sampled1}) == 5
        for o in sampled1:
            assert prefix_connected(COMPLETE4, o.order)

    def test_cap_not_exceeded_returns_all(self):
        assert len(enumerate_orders(PATH3, cap=4)) == 4
        assert len(enumerate_orders(PATH3, cap=100)) == 4

    def test_every_enumerated_order_prefix_connected(self):
        for graph in (PATH3, STAR13, CYCLE4, COMPLETE4, BRIDGED_TRIANGLES):
            for seq in enumerate_orders(graph):
                assert prefix_connected(graph, seq.order)


class TestSplit:
    def test_count_is_n_minus_one(self, cfg):
        part = box_row_part("row4", [
            (0, 1, 0, 1, 0, 1), (1, 2, 0, 1, 0, 1),
            (2, 3, 0, 1, 0, 1), (3, 4, 0, 1, 0, 1)])
        seq = canonical_order(build_graph(part, cfg))
        assert len(split_all(seq, part)) == 3

    def test_too_small(self, cfg):
        part = decompose(csg.Box(0, 1, 0, 1, 0, 1))
        seq = canonical_order(build_graph(part, cfg))
        with pytest.raises(SequenceTooShortError):
            split_all(seq, part)

    def test_reused_is_set_intersection(self, cfg):
        part = two_box_part()
        seq = canonical_order(build_graph(part, cfg))
        ex = split_all(seq, part)[0]
        by_cell = {c.id: c.surface_ids() for c in part.cells}
        expected = tuple(sorted(by_cell["c1"] & by_cell["c2"]))
        assert ex.reused_surfaces == expected == ("s2",)

    def test_reused_through_bridge(self, cfg):
        # cut after c1 with output {c2, c3}: only the c1|c2 plane is reused
        part = three_box_row()
        seq = canonical_order(build_graph(part, cfg))
        ex = split_all(seq, part)[0]
        cells = part.cell_by_id()
        in_s = cells["c1"].surface_ids()
        out_s = cells["c2"].surface_ids() | cells["c3"].surface_ids()
        assert set(ex.reused_surfaces) == (in_s & out_s)

    def test_reused_subset_invariant(self, cfg):
        part = three_box_row()
        for seq in enumerate_orders(build_graph(part, cfg)):
            cells = part.cell_by_id()
            for ex in split_all(seq, part):
                in_s = set().union(*(cells[c].surface_ids() for c in ex.input_cells))
                out_s = set().union(*(cells[c].surface_ids() for c in ex.output_cells))
                assert set(ex.reused_surfaces) <= in_s
                assert set(ex.reused_surfaces) <= out_s


def test_middle_cut_formula():
    assert [middle_cut(n) for n in (2, 3, 4, 5, 10)] == [1, 1, 2, 2, 5]
