import math

import pytest

from cellforge import rng
from cellforge.errors import UnboundedCellError
from cellforge.geometry import MINUS, PLUS, Cell, SignedSurface
from cellforge.kernel import (
    PointClass,
    all_connected,
    bounding_box,
    cells_adjacent,
    cells_overlap,
    classify_point,
    interior_points,
    is_bounded,
)

from geomfix import box_region, plane, unit_box_cell, zcyl


def _box_cell(cid, x0, x1, y0, y1, z0, z1, prefix="b"):
    return Cell(cid, box_region(
        plane(f"{prefix}x0", 0, x0), plane(f"{prefix}x1", 0, x1),
        plane(f"{prefix}y0", 1, y0), plane(f"{prefix}y1", 1, y1),
        plane(f"{prefix}z0", 2, z0), plane(f"{prefix}z1", 2, z1),
    ))


def _shared_box_pair(bounds_a, bounds_b):
    """Two boxes that share every coincident plane as one surface."""
    surfaces = {}

    def get(axis, v):
        key = (axis, v)
        if key not in surfaces:
            surfaces[key] = plane(f"p{len(surfaces)}", axis, v)
        return surfaces[key]

    def build(cid, b):
        return Cell(cid, box_region(
            get(0, b[0]), get(0, b[1]), get(1, b[2]),
            get(1, b[3]), get(2, b[4]), get(2, b[5])))

    return build("a", bounds_a), build("b", bounds_b)


class TestClassifyPoint:
    def test_interior(self, cfg):
        assert classify_point((0.5, 0.5, 0.5), unit_box_cell(), cfg) is PointClass.INSIDE

    def test_on_face(self, cfg):
        assert classify_point((0.5, 0.5, 0.0), unit_box_cell(), cfg) is PointClass.BOUNDARY

    def test_outside_cylinder_slab(self, cfg):
        cell = Cell("c", (
            SignedSurface(MINUS, zcyl("s1", 0.0, 0.0, 1.0)),
            SignedSurface(PLUS, plane("s2", 2, 0.0)),
            SignedSurface(MINUS, plane("s3", 2, 1.0)),
        ))
        assert classify_point((2.0, 0.0, 0.5), cell, cfg) is PointClass.OUTSIDE

    def test_sign_agreement_near_every_constraint(self, cfg):
        # per-constraint analytic checks agree with the aggregate verdict
        cell = unit_box_cell()
        pts = rng.points_in_box(99, 300, (-0.5, -0.5, -0.5), (1.5, 1.5, 1.5))
        for p in pts:
            margins = [min(p) - 0.0, 1.0 - max(p)]
            inside = all(m > cfg.boundary_eps for m in margins)
            outside = any(m < -cfg.boundary_eps for m in margins)
            got = classify_point(tuple(p), cell, cfg)
            if inside:
                assert got is PointClass.INSIDE
            elif outside:
                assert got is PointClass.OUTSIDE


class TestIsBounded:
    def test_unit_box(self):
        assert is_bounded(unit_box_cell())

    def test_single_halfspace(self):
        cell = Cell("c", (SignedSurface(PLUS, plane("s1", 0, 0.0)),))
        assert not is_bounded(cell)

    def test_cylinder_slab(self):
        cell = Cell("c", (
            SignedSurface(MINUS, zcyl("s1", 0.0, 0.0, 1.0)),
            SignedSurface(PLUS, plane("s2", 2, 0.0)),
            SignedSurface(MINUS, plane("s3", 2, 2.0)),
        ))
        assert is_bounded(cell)

    def test_outside_cylinder_bounds_nothing(self):
        cell = Cell("c", (
            SignedSurface(PLUS, zcyl("s1", 0.0, 0.0, 1.0)),
            SignedSurface(PLUS, plane("s2", 2, 0.0)),
            SignedSurface(MINUS, plane("s3", 2, 2.0)),
        ))
        assert not is_bounded(cell)

    def test_unbounded_cell_escapes_trial_spheres(self, cfg):
        # Monte-Carlo escape: samples of an unbounded cell keep appearing
        # beyond any trial radius
        cell = Cell("c", (
            SignedSurface(PLUS, plane("s1", 0, 0.0)),
            SignedSurface(PLUS, plane("s2", 1, 0.0)),
            SignedSurface(MINUS, plane("s3", 1, 1.0)),
            SignedSurface(PLUS, plane("s4", 2, 0.0)),
            SignedSurface(MINUS, plane("s5", 2, 1.0)),
        ))
        assert not is_bounded(cell)
        for radius in (10.0, 100.0, 1000.0):
            p = (radius * 2.0, 0.5, 0.5)
            assert classify_point(p, cell, cfg) is PointClass.INSIDE


class TestBoundingBox:
    def test_unit_box(self):
        box = bounding_box(unit_box_cell())
        assert box.lo == (0.0, 0.0, 0.0) and box.hi == (1.0, 1.0, 1.0)

    def test_cylinder_extents(self):
        cell = Cell("c", (
            SignedSurface(MINUS, zcyl("s1", 0.0, 0.0, 1.0)),
            SignedSurface(PLUS, plane("s2", 2, 0.0)),
            SignedSurface(MINUS, plane("s3", 2, 2.0)),
        ))
        box = bounding_box(cell)
        assert box.lo == (-1.0, -1.0, 0.0) and box.hi == (1.0, 1.0, 2.0)

    def test_plane_tightens_cylinder(self):
        cell = Cell("c", (
            SignedSurface(MINUS, zcyl("s1", 0.0, 0.0, 1.0)),
            SignedSurface(PLUS, plane("s2", 0, 0.0)),
            SignedSurface(PLUS, plane("s3", 2, 0.0)),
            SignedSurface(MINUS, plane("s4", 2, 1.0)),
        ))
        box = bounding_box(cell)
        assert box.lo == (0.0, -1.0, 0.0) and box.hi == (1.0, 1.0, 1.0)

    def test_unbounded_raises(self):
        cell = Cell("c", (SignedSurface(PLUS, plane("s1", 0, 0.0)),))
        with pytest.raises(UnboundedCellError):
            bounding_box(cell)


class TestAdjacency:
    def test_full_shared_face(self, cfg):
        a, b = _shared_box_pair((0, 1, 0, 1, 0, 1), (1, 2, 0, 1, 0, 1))
        assert cells_adjacent(a, b, cfg)
        assert cells_adjacent(b, a, cfg)

    def test_edge_contact_is_not_adjacency(self, cfg):
        a, b = _shared_box_pair((0, 1, 0, 1, 0, 1), (1, 2, 1, 2, 0, 1))
        assert not cells_adjacent(a, b, cfg)

    def test_disjoint(self, cfg):
        a, b = _shared_box_pair((0, 1, 0, 1, 0, 1), (1.5, 2.5, 0, 1, 0, 1))
        assert not cells_adjacent(a, b, cfg)

    def test_no_shared_surface_means_no_edge(self, cfg):
        # coincident but separately defined planes do not count as touching
        a = _box_cell("a", 0, 1, 0, 1, 0, 1, prefix="a")
        b = _box_cell("b", 1, 2, 0, 1, 0, 1, prefix="b")
        assert not cells_adjacent(a, b, cfg)

    def test_unbounded_raises(self, cfg):
        a = unit_box_cell()
        b = Cell("u", (SignedSurface(PLUS, plane("q1", 0, 1.0)),))
        with pytest.raises(UnboundedCellError):
            cells_adjacent(a, b, cfg)

    def test_cylinder_face_contact(self, cfg):
        # slab inside a cylinder vs the ring around it, sharing the lateral
        # surface
        cyl = zcyl("cy", 0.0, 0.0, 0.5)
        zlo, zhi = plane("pz0", 2, 0.0), plane("pz1", 2, 1.0)
        xlo, xhi = plane("px0", 0, -1.0), plane("px1", 0, 1.0)
        ylo, yhi = plane("py0", 1, -1.0), plane("py1", 1, 1.0)
        inner = Cell("in", (
            SignedSurface(MINUS, cyl), SignedSurface(PLUS, zlo), SignedSurface(MINUS, zhi)))
        outer = Cell("out", (
            SignedSurface(PLUS, cyl),
            SignedSurface(PLUS, xlo), SignedSurface(MINUS, xhi),
            SignedSurface(PLUS, ylo), SignedSurface(MINUS, yhi),
            SignedSurface(PLUS, zlo), SignedSurface(MINUS, zhi)))
        assert cells_adjacent(inner, outer, cfg)


class TestOverlap:
    def test_identical_boxes(self, cfg):
        a = _box_cell("a", 0, 1, 0, 1, 0, 1, prefix="a")
        b = _box_cell("b", 0, 1, 0, 1, 0, 1, prefix="b")
        assert cells_overlap(a, b, cfg)

    def test_face_touch_is_not_overlap(self, cfg):
        a, b = _shared_box_pair((0, 1, 0, 1, 0, 1), (1, 2, 0, 1, 0, 1))
        assert not cells_overlap(a, b, cfg)

    def test_interval_overlap(self, cfg):
        a = _box_cell("a", 0, 1, 0, 1, 0, 1, prefix="a")
        b = _box_cell("b", 0.5, 1.5, 0, 1, 0, 1, prefix="b")
        assert cells_overlap(a, b, cfg)
        assert cells_overlap(b, a, cfg)

    def test_cylinder_in_box_overlap(self, cfg):
        box = _box_cell("a", 0, 1, 0, 1, 0, 1, prefix="a")
        slab = Cell("s", (
            SignedSurface(MINUS, zcyl("cy", 0.5, 0.5, 0.3)),
            SignedSurface(PLUS, plane("pz0", 2, 0.2)),
            SignedSurface(MINUS, plane("pz1", 2, 0.8))))
        assert cells_overlap(box, slab, cfg)

    def test_cylinder_disjoint_inside_bbox(self, cfg):
        # bbox overlap but interiors disjoint: MC must say no
        slab = Cell("s", (
            SignedSurface(MINUS, zcyl("cy", 0.0, 0.0, 1.0)),
            SignedSurface(PLUS, plane("pz0", 2, 0.0)),
            SignedSurface(MINUS, plane("pz1", 2, 1.0))))
        corner = _box_cell("b", 0.8, 1.0, 0.8, 1.0, 0, 1, prefix="b")
        # corner box sits in the bbox corner, fully outside the disc
        assert math.hypot(0.8, 0.8) > 1.0
        assert not cells_overlap(slab, corner, cfg)


class TestAllConnected:
    def test_single_cell(self, cfg):
        assert all_connected([unit_box_cell()], cfg)

    def test_row_of_three(self, cfg):
        surfaces = {}

        def get(axis, v):
            key = (axis, v)
            if key not in surfaces:
                surfaces[key] = plane(f"p{len(surfaces)}", axis, v)
            return surfaces[key]

        cells = []
        for k in range(3):
            cells.append(Cell(f"c{k}", box_region(
                get(0, float(k)), get(0, float(k + 1)),
                get(1, 0.0), get(1, 1.0), get(2, 0.0), get(2, 1.0))))
        assert all_connected(cells, cfg)

    def test_gap_disconnects(self, cfg):
        a, b = _shared_box_pair((0, 1, 0, 1, 0, 1), (2, 3, 0, 1, 0, 1))
        assert not all_connected([a, b], cfg)


class TestDeterminism:
    def test_repeated_calls_identical(self, cfg):
        slab = Cell("s", (
            SignedSurface(MINUS, zcyl("cy", 0.5, 0.5, 0.4)),
            SignedSurface(PLUS, plane("pz0", 2, 0.0)),
            SignedSurface(MINUS, plane("pz1", 2, 1.0))))
        box = _box_cell("b", 0.3, 0.7, 0.3, 0.7, 0.2, 0.8, prefix="b")
        results = {cells_overlap(slab, box, cfg) for _ in range(5)}
        assert len(results) == 1

    def test_symmetry_on_fixture_pairs(self, cfg):
        pairs = [
            _shared_box_pair((0, 1, 0, 1, 0, 1), (1, 2, 0, 1, 0, 1)),
            _shared_box_pair((0, 1, 0, 1, 0, 1), (1, 2, 1, 2, 0, 1)),
            _shared_box_pair((0, 1, 0, 1, 0, 1), (0.5, 1.5, 0, 1, 0, 1)),
        ]
        for a, b in pairs:
            assert cells_adjacent(a, b, cfg) == cells_adjacent(b, a, cfg)
            assert cells_overlap(a, b, cfg) == cells_overlap(b, a, cfg)


def test_interior_points_thin_ring_found_exactly():
    # ring sliver: box minus a cylinder that nearly fills it; the exact
    # witness must save the region even if rejection sampling misses
    region = (
        SignedSurface(PLUS, plane("x0", 0, 0.0)), SignedSurface(MINUS, plane("x1", 0, 1.0)),
        SignedSurface(PLUS, plane("y0", 1, 0.0)), SignedSurface(MINUS, plane("y1", 1, 1.0)),
        SignedSurface(PLUS, plane("z0", 2, 0.0)), SignedSurface(MINUS, plane("z1", 2, 1.0)),
        SignedSurface(PLUS, zcyl("cy", 0.5, 0.5, 0.7070)),
    )
    pts = interior_points(region, seed=11, want=4)
    assert pts is not None and len(pts) >= 1


def test_interior_points_empty_region():
    region = (
        SignedSurface(PLUS, plane("x0", 0, 1.0)),
        SignedSurface(MINUS, plane("x1", 0, 0.0)),
        SignedSurface(PLUS, plane("y0", 1, 0.0)), SignedSurface(MINUS, plane("y1", 1, 1.0)),
        SignedSurface(PLUS, plane("z0", 2, 0.0)), SignedSurface(MINUS, plane("z1", 2, 1.0)),
    )
    assert interior_points(region, seed=3) is None
