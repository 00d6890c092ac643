"""CSG expression -> Part of valid, pairwise-disjoint cells.

The arrangement is grid-first: every plane (box faces and cylinder caps)
splits all of space into slabs, then each grid box is subdivided by the
sign product of the cylinders whose lateral surface actually crosses it.
Each candidate region is classified by unanimous vote of strictly interior
sample points against the expression; disagreement means a surface is
missing from the arrangement and is a hard error.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels, csg, rng
from .errors import EmptySolidError, MixedRegionError
from .geometry import (
    MINUS,
    PLUS,
    Box3,
    Cell,
    Part,
    SignedSurface,
    Surface,
    compile_region,
    perp_axes,
    surface_rows,
)
from .kernel import (
    bounding_box,
    disk_rect_intersects,
    interior_points,
    rect_escapes_disk,
    region_bounds,
    region_is_bounded,
)


@dataclass(frozen=True)
class DecomposeConfig:
    classify_samples: int = 16
    empty_samples: int = 256
    merge: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.classify_samples < 1:
            raise ValueError("classify_samples must be >= 1")


DEFAULT_DECOMPOSE_CONFIG = DecomposeConfig()

_PLANE_KIND_OF_AXIS = ("XPlane", "YPlane", "ZPlane")


def _arrangement_surfaces(expr: csg.CsgExpr) -> list[Surface]:
    """Merged defining surfaces with provisional ids."""
    merged = csg.merge_descriptors(csg.defining_surfaces(expr))
    return [Surface(f"t{i}", kind, params) for i, (kind, params) in enumerate(merged)]


def _cyl_crosses_box(cyl: Surface, box: Box3) -> bool:
    """The lateral surface (circle in the perp plane) crosses the box's
    cross-section rectangle: part of the rect inside, part outside."""
    u, v = perp_axes(cyl.axis)
    c = (cyl.params[0], cyl.params[1])
    r = cyl.params[2]
    lo = (box.lo[u], box.lo[v])
    hi = (box.hi[u], box.hi[v])
    return disk_rect_intersects(c, r, lo, hi) and rect_escapes_disk(c, r, lo, hi)


def region_empty(box: Box3, cyl_terms: Sequence[SignedSurface],
                 cfg: DecomposeConfig = DEFAULT_DECOMPOSE_CONFIG,
                 seed: int | None = None) -> bool:
    """Is box ∩ (signed cylinders) empty?

    Exact circle-vs-rectangle geometry when at most one cylinder constraint
    is present; seeded sampling otherwise (a miss with zero hits counts as
    empty, a documented false-negative risk).
    """
    if box.is_empty(strict=True):
        return True
    if len(cyl_terms) == 0:
        return False
    if len(cyl_terms) == 1:
        term = cyl_terms[0]
        s = term.surface
        u, v = perp_axes(s.axis)
        c = (s.params[0], s.params[1])
        lo = (box.lo[u], box.lo[v])
        hi = (box.hi[u], box.hi[v])
        if term.sign == MINUS:
            return not disk_rect_intersects(c, s.params[2], lo, hi)
        return not rect_escapes_disk(c, s.params[2], lo, hi)
    lo, hi = region_bounds(list(cyl_terms))
    lo = [max(a, b) for a, b in zip(lo, box.lo)]
    hi = [min(a, b) for a, b in zip(hi, box.hi)]
    if any(h - l <= 0 for l, h in zip(lo, hi)):
        return True
    if not all(math.isfinite(l) and math.isfinite(h) for l, h in zip(lo, hi)):
        raise ValueError("sampling emptiness test needs a bounded domain")
    cons = compile_region(tuple(cyl_terms))
    pts = rng.points_in_box(cfg.seed if seed is None else seed, cfg.empty_samples, lo, hi)
    return not bool(np.any(_kernels.min_margins(pts, cons) > 0.0))


def _plane_terms_for_slab(axis: int, slab, lo_surf, hi_surf) -> list[SignedSurface]:
    terms = []
    if lo_surf is not None:
        terms.append(SignedSurface(PLUS, lo_surf))
    if hi_surf is not None:
        terms.append(SignedSurface(MINUS, hi_surf))
    return terms


def _region_sort_terms(terms) -> tuple[SignedSurface, ...]:
    return tuple(sorted(terms, key=lambda t: (t.surface.sort_key(), t.sign)))


# ---------------------------------------------------------------------------
# Greedy conjunction merging

def _split_axis_planes(region: frozenset, axis: int):
    planes = frozenset(t for t in region if t.surface.is_plane and t.surface.axis == axis)
    return planes, region - planes


def _merge_through_plane(ra: frozenset, rb: frozenset, surface: Surface):
    sa = next((t for t in ra if t.surface is surface), None)
    sb = next((t for t in rb if t.surface is surface), None)
    if sa is None or sb is None or sa.sign != -sb.sign:
        return None
    axis = surface.axis
    pa, rest_a = _split_axis_planes(ra - {sa}, axis)
    pb, rest_b = _split_axis_planes(rb - {sb}, axis)
    if rest_a != rest_b:
        return None
    # the cell on the Minus side of the shared plane keeps its lower bound,
    # the Plus side keeps its upper bound
    lo_side, hi_side = (pa, pb) if sa.sign == MINUS else (pb, pa)
    if any(t.sign == MINUS for t in lo_side) or any(t.sign == PLUS for t in hi_side):
        return None
    return rest_a | lo_side | hi_side


def _merge_through_cylinder(ra: frozenset, rb: frozenset, surface: Surface):
    sa = next((t for t in ra if t.surface is surface), None)
    sb = next((t for t in rb if t.surface is surface), None)
    if sa is None or sb is None or sa.sign != -sb.sign:
        return None
    if ra - {sa} != rb - {sb}:
        return None
    return ra - {sa}


def _merge_to_fixpoint(regions: list[frozenset]) -> list[frozenset]:
    """Axis-ordered greedy merge: x, then y, then z plane unions, then
    cylinder complements; repeated until nothing merges.  Ties break on the
    lowest creation index, so the result is deterministic."""
    cells: dict[int, frozenset] = dict(enumerate(regions))

    def merge_round(find_candidates) -> bool:
        merged_any = False
        while True:
            best = None
            idxs = sorted(cells)
            for i_pos, i in enumerate(idxs):
                for j in idxs[i_pos + 1:]:
                    for key, merged in find_candidates(cells[i], cells[j]):
                        cand = (key, i, j, merged)
                        if best is None or cand[:3] < best[:3]:
                            best = cand
            if best is None:
                return merged_any
            _, i, j, merged = best
            cells[i] = merged
            del cells[j]
            merged_any = True

    def plane_candidates(axis):
        def find(ra, rb):
            shared = {t.surface for t in ra} & {t.surface for t in rb}
            for s in shared:
                if s.is_plane and s.axis == axis:
                    merged = _merge_through_plane(ra, rb, s)
                    if merged:
                        yield (s.params[0],), merged
        return find

    def cyl_candidates(ra, rb):
        shared = {t.surface for t in ra} & {t.surface for t in rb}
        for s in shared:
            if s.is_cylinder:
                merged = _merge_through_cylinder(ra, rb, s)
                if merged:
                    yield s.sort_key(), merged

    while True:
        changed = False
        for axis in (0, 1, 2):
            changed |= merge_round(plane_candidates(axis))
        changed |= merge_round(cyl_candidates)
        if not changed:
            break
    return [cells[i] for i in sorted(cells)]


# ---------------------------------------------------------------------------

def decompose(expr: csg.CsgExpr, cfg: DecomposeConfig = DEFAULT_DECOMPOSE_CONFIG,
              part_id: str = "part") -> Part:
    """Decompose an expression into a Part of disjoint half-space cells."""
    arrangement = _arrangement_surfaces(expr)
    planes = [s for s in arrangement if s.is_plane]
    cylinders = sorted((s for s in arrangement if s.is_cylinder), key=Surface.sort_key)

    slabs: list[list[tuple[float, float, Surface | None, Surface | None]]] = []
    for axis in range(3):
        axis_planes = sorted((s for s in planes if s.axis == axis), key=lambda s: s.params[0])
        bounds: list[tuple[float, Surface | None]] = (
            [(-math.inf, None)] + [(s.params[0], s) for s in axis_planes] + [(math.inf, None)]
        )
        slabs.append(
            [(bounds[i][0], bounds[i + 1][0], bounds[i][1], bounds[i + 1][1])
             for i in range(len(bounds) - 1)]
        )

    regions: list[frozenset] = []
    grid = itertools.product(
        enumerate(slabs[0]), enumerate(slabs[1]), enumerate(slabs[2])
    )
    for (ix, sx), (iy, sy), (iz, sz) in grid:
        box = Box3((sx[0], sy[0], sz[0]), (sx[1], sy[1], sz[1]))
        plane_terms = (
            _plane_terms_for_slab(0, sx, sx[2], sx[3])
            + _plane_terms_for_slab(1, sy, sy[2], sy[3])
            + _plane_terms_for_slab(2, sz, sz[2], sz[3])
        )
        candidates = [c for c in cylinders if _cyl_crosses_box(c, box)]
        for signs in itertools.product((MINUS, PLUS), repeat=len(candidates)):
            cyl_terms = [SignedSurface(sg, c) for sg, c in zip(signs, candidates)]
            region = plane_terms + cyl_terms
            if not region_is_bounded(region):
                continue  # cannot lie inside a finite solid
            sign_code = sum((1 if sg == PLUS else 0) << k for k, sg in enumerate(signs))
            seed = rng.derive(cfg.seed, "region", ix, iy, iz, sign_code)
            if region_empty(box, cyl_terms, cfg, seed=rng.derive(seed, "empty")):
                continue
            pts = interior_points(region, rng.derive(seed, "interior"),
                                  want=cfg.classify_samples)
            if pts is None:
                continue
            inside = csg.member(expr, pts)
            if inside.all():
                regions.append(frozenset(region))
            elif inside.any():
                raise MixedRegionError(
                    f"region in grid box ({ix},{iy},{iz}) disagrees about membership: "
                    f"{int(inside.sum())}/{len(inside)} samples inside"
                )
    if not regions:
        raise EmptySolidError("expression has no interior")

    if cfg.merge:
        regions = _merge_to_fixpoint(regions)

    # deterministic assembly: cells by bbox corner, surfaces by geometry
    proto_cells = []
    for region in regions:
        terms = _region_sort_terms(region)
        cell = Cell("c0", terms)
        box = bounding_box(cell)
        proto_cells.append((box.lo, box.hi, terms))
    proto_cells.sort(key=lambda item: (item[0], item[1], tuple(
        (t.surface.sort_key(), t.sign) for t in item[2])))

    used = []
    seen = set()
    for _, _, terms in proto_cells:
        for t in terms:
            if t.surface.id not in seen:
                seen.add(t.surface.id)
                used.append(t.surface)
    used.sort(key=Surface.sort_key)
    renamed = {s.id: Surface(f"s{i + 1}", s.kind, s.params) for i, s in enumerate(used)}

    cells = []
    for i, (_, _, terms) in enumerate(proto_cells):
        region = tuple(SignedSurface(t.sign, renamed[t.surface.id]) for t in terms)
        cells.append(Cell(f"c{i + 1}", region))
    surfaces = tuple(sorted((renamed[s.id] for s in used), key=Surface.sort_key))
    return Part(id=part_id, surfaces=surfaces, cells=tuple(cells))


def pack_cells(cells: Sequence[Cell]):
    """Flat (rows, offsets) encoding of many cells for the kernels."""
    offsets = [0]
    rows = []
    for cell in cells:
        arr = compile_region(cell.region)
        rows.append(arr)
        offsets.append(offsets[-1] + arr.shape[0])
    flat = np.vstack(rows) if rows else np.empty((0, 5), dtype=np.float64)
    return np.ascontiguousarray(flat), np.asarray(offsets, dtype=np.int64)


def verify_decomposition(expr: csg.CsgExpr, part: Part, n: int, seed: int = 0,
                         boundary_eps: float = 1e-9) -> float:
    """Agreement fraction between expression membership and the union of the
    part's cells over n seeded points in the 10%-inflated expression bbox,
    skipping points within boundary_eps of any defining or part surface."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lo, hi = csg.expr_bbox(expr)
    box = Box3(lo, hi).inflate(0.10)
    pts = rng.points_in_box(rng.derive(seed, "verify"), n, box.lo, box.hi)
    surfs = list(part.surfaces) + _arrangement_surfaces(expr)
    rows = np.ascontiguousarray(surface_rows(surfs))
    flat, offsets = pack_cells(part.cells)
    ops, params = csg.compile_expr(expr)
    agree, used = _kernels.agreement_count(ops, params, rows, flat, offsets, pts, boundary_eps)
    if used == 0:
        return 1.0
    return agree / used
