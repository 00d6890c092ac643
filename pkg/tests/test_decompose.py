import itertools

import pytest

from cellforge import csg
from cellforge.decompose import (
    DecomposeConfig,
    decompose,
    region_empty,
    verify_decomposition,
)
from cellforge.errors import EmptySolidError
from cellforge.geometry import MINUS, PLUS, Box3, Part, SignedSurface, dump_part
from cellforge.kernel import is_bounded, validate_part

from geomfix import corpus, expr_member_reference, zcyl

NO_MERGE = DecomposeConfig(merge=False)


def _collect_box_planes(expr, offs):
    if isinstance(expr, csg.Box):
        b = (expr.x0, expr.x1, expr.y0, expr.y1, expr.z0, expr.z1)
        for axis in range(3):
            offs[axis].update((b[2 * axis], b[2 * axis + 1]))
    elif isinstance(expr, csg.FinCyl):
        raise AssertionError("plane-grid oracle is for box-only expressions")
    else:
        _collect_box_planes(expr.l, offs)
        _collect_box_planes(expr.r, offs)


def grid_cell_count_oracle(expr) -> int:
    """Independent expected cell count for box-only expressions: classify the
    center of every finite grid box with the reference membership."""
    offs = [set(), set(), set()]
    _collect_box_planes(expr, offs)
    axes = [sorted(o) for o in offs]
    count = 0
    for ix, iy, iz in itertools.product(*(range(len(a) - 1) for a in axes)):
        center = (
            (axes[0][ix] + axes[0][ix + 1]) / 2,
            (axes[1][iy] + axes[1][iy + 1]) / 2,
            (axes[2][iz] + axes[2][iz + 1]) / 2,
        )
        if expr_member_reference(expr, center):
            count += 1
    return count


class TestDecomposeExamples:
    def test_unit_box(self):
        part = decompose(csg.Box(0, 1, 0, 1, 0, 1))
        assert len(part.cells) == 1
        assert len(part.surfaces) == 6

    def test_stacked_boxes_merge(self):
        expr = csg.Union(csg.Box(0, 1, 0, 1, 0, 1), csg.Box(0, 1, 0, 1, 1, 2))
        pre = decompose(expr, NO_MERGE)
        assert len(pre.cells) == grid_cell_count_oracle(expr) == 2
        merged = decompose(expr)
        assert len(merged.cells) == 1

    def test_box_with_cylinder_hole(self):
        expr = csg.Difference(csg.Box(0, 1, 0, 1, 0, 1),
                              csg.FinCyl(2, 0.5, 0.5, 0.2, -1, 2))
        part = decompose(expr)
        assert len(part.cells) == 1
        cyl_terms = [t for t in part.cells[0].region if t.surface.is_cylinder]
        assert len(cyl_terms) == 1 and cyl_terms[0].sign == PLUS

    def test_lshape_premerge_count(self):
        expr = csg.Union(csg.Box(0, 2, 0, 1, 0, 1), csg.Box(0, 1, 0, 1, 1, 2))
        part = decompose(expr, NO_MERGE)
        assert len(part.cells) == grid_cell_count_oracle(expr) == 3

    def test_box_only_fixtures_match_grid_oracle(self):
        for fx in corpus():
            try:
                expected = grid_cell_count_oracle(fx.expr)
            except AssertionError:
                continue
            part = decompose(fx.expr, NO_MERGE)
            assert len(part.cells) == expected, fx.name

    def test_empty_solid(self):
        expr = csg.Intersect(csg.Box(0, 1, 0, 1, 0, 1), csg.Box(2, 3, 0, 1, 0, 1))
        with pytest.raises(EmptySolidError):
            decompose(expr)


class TestRegionEmpty:
    def test_far_disk(self):
        box = Box3((0, 0, 0), (1, 1, 1))
        term = SignedSurface(MINUS, zcyl("c", 5.0, 5.0, 1.0))
        assert region_empty(box, [term])

    def test_rect_swallowed_by_disk(self):
        box = Box3((0, 0, 0), (1, 1, 1))
        term = SignedSurface(PLUS, zcyl("c", 0.5, 0.5, 10.0))
        assert region_empty(box, [term])

    def test_disk_inside_rect(self):
        box = Box3((0, 0, 0), (1, 1, 1))
        term = SignedSurface(MINUS, zcyl("c", 0.5, 0.5, 0.2))
        assert not region_empty(box, [term])

    def test_two_disjoint_disks_sampled(self):
        box = Box3((0, 0, 0), (4, 2, 1))
        terms = [
            SignedSurface(MINUS, zcyl("c1", 1.0, 1.0, 0.3)),
            SignedSurface(MINUS, zcyl("c2", 3.0, 1.0, 0.3)),
        ]
        assert region_empty(box, terms)


class TestVerify:
    def test_identity(self):
        expr = csg.Box(0, 1, 0, 1, 0, 1)
        part = decompose(expr)
        assert verify_decomposition(expr, part, 10000) == 1.0

    def test_dropped_cell_ratio(self):
        expr = csg.Union(csg.Box(0, 1, 0, 1, 0, 1), csg.Box(0, 1, 0, 1, 1, 2))
        part = decompose(expr, NO_MERGE)
        crippled = Part(part.id, part.surfaces, (part.cells[0],))
        ratio = verify_decomposition(expr, crippled, 200000)
        # inflated bbox volume 1.1 * 1.1 * 2.2; the dropped box disagrees
        expected = 1.0 - 1.0 / (1.1 * 1.1 * 2.2)
        assert ratio < 1.0
        assert abs(ratio - expected) < 0.01

    def test_fixture_sweep_small(self):
        for fx in corpus():
            part = decompose(fx.expr, part_id=fx.name)
            assert verify_decomposition(fx.expr, part, 20000, seed=5) >= 0.999, fx.name


class TestInvariants:
    def test_cells_valid_and_disjoint(self, cfg):
        for fx in corpus()[:8]:
            part = decompose(fx.expr, part_id=fx.name)
            assert all(is_bounded(c) for c in part.cells), fx.name
            validate_part(part, cfg)

    def test_merge_never_increases_cells_or_hurts_verify(self):
        for fx in corpus():
            pre = decompose(fx.expr, NO_MERGE, part_id=fx.name)
            post = decompose(fx.expr, part_id=fx.name)
            assert len(post.cells) <= len(pre.cells), fx.name
            r_pre = verify_decomposition(fx.expr, pre, 20000, seed=9)
            r_post = verify_decomposition(fx.expr, post, 20000, seed=9)
            assert abs(r_pre - r_post) < 2e-3, fx.name

    def test_deterministic_bytes(self):
        expr = corpus()[4].expr
        a = dump_part(decompose(expr, DecomposeConfig(seed=77)))
        b = dump_part(decompose(expr, DecomposeConfig(seed=77)))
        assert a == b

    def test_unused_surfaces_pruned(self):
        # the hole's cap planes at z=-1/2 split only empty space and must
        # not survive into the part
        expr = csg.Difference(csg.Box(0, 1, 0, 1, 0, 1),
                              csg.FinCyl(2, 0.5, 0.5, 0.2, -1, 2))
        part = decompose(expr)
        offsets = [s.params[0] for s in part.surfaces if s.kind == "ZPlane"]
        assert sorted(offsets) == [0.0, 1.0]
