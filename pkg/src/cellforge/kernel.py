"""Analytic and sampled predicates over cells.

Membership and bounding are analytic.  Face contact and interior overlap are
decided by deterministic seeded sampling: "touching" means positive-area face
contact, so sample points must clear the remaining constraints of both cells
by ``face_eps`` (edge or point contact leaves no room and is rejected).

All functions are pure; cells and configs are immutable, so everything here
is safe to call concurrently.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels, rng
from .errors import UnboundedCellError
from .geometry import (
    MINUS,
    PLUS,
    Box3,
    Cell,
    Part,
    SignedSurface,
    compile_cell,
    compile_region,
    perp_axes,
)


class PointClass(enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class KernelConfig:
    boundary_eps: float = 1e-9
    face_eps: float = 1e-6
    mc_samples_overlap: int = 4096
    mc_samples_face: int = 2048
    seed: int = 0

    def __post_init__(self):
        if self.boundary_eps <= 0 or self.face_eps <= 0:
            raise ValueError("tolerances must be positive")
        if self.mc_samples_overlap < 1 or self.mc_samples_face < 1:
            raise ValueError("sample counts must be >= 1")


DEFAULT_KERNEL_CONFIG = KernelConfig()


def classify_point(p, cell: Cell, cfg: KernelConfig = DEFAULT_KERNEL_CONFIG) -> PointClass:
    """Inside iff every constraint is met by more than boundary_eps, Outside
    iff some constraint is violated by more than boundary_eps, else Boundary."""
    pts = np.asarray([p], dtype=np.float64)
    m = float(_kernels.min_margins(pts, compile_cell(cell))[0])
    if m > cfg.boundary_eps:
        return PointClass.INSIDE
    if m < -cfg.boundary_eps:
        return PointClass.OUTSIDE
    return PointClass.BOUNDARY


def region_bounds(region: Sequence[SignedSurface]) -> tuple[list[float], list[float]]:
    """Per-axis analytic bounds: plane offsets and inside-cylinder extents.
    Unbounded directions come back infinite."""
    lo = [-math.inf] * 3
    hi = [math.inf] * 3
    for term in region:
        s = term.surface
        if s.is_plane:
            if term.sign == PLUS:
                lo[s.axis] = max(lo[s.axis], s.params[0])
            else:
                hi[s.axis] = min(hi[s.axis], s.params[0])
        elif term.sign == MINUS:
            u, v = perp_axes(s.axis)
            c1, c2, r = s.params
            lo[u] = max(lo[u], c1 - r)
            hi[u] = min(hi[u], c1 + r)
            lo[v] = max(lo[v], c2 - r)
            hi[v] = min(hi[v], c2 + r)
    return lo, hi


def region_is_bounded(region: Sequence[SignedSurface]) -> bool:
    lo, hi = region_bounds(region)
    return all(math.isfinite(l) and math.isfinite(h) for l, h in zip(lo, hi))


def is_bounded(cell: Cell) -> bool:
    """True iff every axis is bounded below and above by a plane of the right
    sign or by an inside cylinder.  Outside cylinders bound nothing."""
    return region_is_bounded(cell.region)


def bounding_box(cell: Cell) -> Box3:
    lo, hi = region_bounds(cell.region)
    if not all(math.isfinite(l) and math.isfinite(h) for l, h in zip(lo, hi)):
        raise UnboundedCellError(f"cell {cell.id} is not bounded")
    return Box3(tuple(lo), tuple(hi))


# ---------------------------------------------------------------------------
# Exact 2D helpers (circle vs axis-aligned rectangle)

def disk_rect_intersects(center, r: float, lo, hi) -> bool:
    """Open disk meets open rectangle (rect assumed nondegenerate)."""
    d = math.hypot(
        center[0] - min(max(center[0], lo[0]), hi[0]),
        center[1] - min(max(center[1], lo[1]), hi[1]),
    )
    return d < r


def rect_escapes_disk(center, r: float, lo, hi) -> bool:
    """Some open-rectangle point is strictly outside the closed disk."""
    fx = max(abs(lo[0] - center[0]), abs(hi[0] - center[0]))
    fy = max(abs(lo[1] - center[1]), abs(hi[1] - center[1]))
    return math.hypot(fx, fy) > r


def _single_cylinder_witness(term: SignedSurface, box: Box3):
    """Interior point of box ∩ (one signed cylinder), or None if empty.

    Exact construction so thin slivers (a ring barely poking out of a box)
    are never lost to rejection-sampling bad luck.
    """
    s = term.surface
    u, v = perp_axes(s.axis)
    c = (s.params[0], s.params[1])
    r = s.params[2]
    lo = (box.lo[u], box.lo[v])
    hi = (box.hi[u], box.hi[v])
    wmin = min(hi[0] - lo[0], hi[1] - lo[1])
    point = [0.0, 0.0, 0.0]
    point[s.axis] = 0.5 * (box.lo[s.axis] + box.hi[s.axis])
    if term.sign == MINUS:
        q = (min(max(c[0], lo[0]), hi[0]), min(max(c[1], lo[1]), hi[1]))
        d = math.hypot(q[0] - c[0], q[1] - c[1])
        if d >= r:
            return None
        g = min((r - d) / 4.0, wmin / 4.0)
        w = (min(max(q[0], lo[0] + g), hi[0] - g), min(max(q[1], lo[1] + g), hi[1] - g))
    else:
        # farthest rectangle corner from the center escapes the disk
        fu = lo[0] if abs(lo[0] - c[0]) >= abs(hi[0] - c[0]) else hi[0]
        fv = lo[1] if abs(lo[1] - c[1]) >= abs(hi[1] - c[1]) else hi[1]
        d = math.hypot(fu - c[0], fv - c[1])
        if d <= r:
            return None
        g = min((d - r) / 4.0, wmin / 4.0)
        w = (min(max(fu, lo[0] + g), hi[0] - g), min(max(fv, lo[1] + g), hi[1] - g))
    point[u], point[v] = w
    return tuple(point)


def interior_points(region: Sequence[SignedSurface], seed: int,
                    want: int = 16, budget: int = 64,
                    eps: float = 1e-9):
    """Up to ``want`` strictly interior points of a bounded region, found by
    seeded rejection sampling with an exact fallback witness when the region
    has at most one cylinder constraint.  None means empty interior."""
    lo, hi = region_bounds(region)
    if not all(math.isfinite(l) and math.isfinite(h) for l, h in zip(lo, hi)):
        raise UnboundedCellError("interior search needs a bounded region")
    if any(h - l <= 0 for l, h in zip(lo, hi)):
        return None
    cyl_terms = [t for t in region if t.surface.is_cylinder]
    witness = None
    if len(cyl_terms) == 0:
        witness = tuple(0.5 * (l + h) for l, h in zip(lo, hi))
    elif len(cyl_terms) == 1:
        box = Box3(tuple(lo), tuple(hi))
        witness = _single_cylinder_witness(cyl_terms[0], box)
        if witness is None:
            return None
    cons = compile_region(tuple(region))
    pts = rng.points_in_box(seed, budget, lo, hi)
    margins = _kernels.min_margins(pts, cons)
    hits = pts[margins > eps][:want]
    if hits.shape[0] == 0:
        if witness is None:
            return None
        wpt = np.asarray([witness], dtype=np.float64)
        if float(_kernels.min_margins(wpt, cons)[0]) <= eps:
            return None
        return wpt
    return hits


# ---------------------------------------------------------------------------
# Pairwise predicates

def _require_bounded(*cells: Cell):
    for c in cells:
        if not is_bounded(c):
            raise UnboundedCellError(f"cell {c.id} is not bounded")


def _shared_opposite(a: Cell, b: Cell):
    """Surfaces referenced by both cells with opposite signs."""
    signs_a = {t.surface.id: (t.sign, t.surface) for t in a.region}
    out = []
    for t in b.region:
        hit = signs_a.get(t.surface.id)
        if hit is not None and hit[0] == -t.sign:
            out.append(hit[1])
    return out


def _without_surface(cell: Cell, surface_id: str) -> np.ndarray:
    terms = tuple(t for t in cell.region if t.surface.id != surface_id)
    if not terms:
        return np.empty((0, 5), dtype=np.float64)
    return compile_region(terms)


def _face_samples(surface, window: Box3, seed: int, n: int) -> np.ndarray:
    """Deterministic sample points on a surface, confined to a window box."""
    pts = np.empty((n, 3), dtype=np.float64)
    u = rng.uniforms(seed, 2 * n).reshape(n, 2)
    if surface.is_plane:
        axis = surface.axis
        ua, va = perp_axes(axis)
        pts[:, axis] = surface.params[0]
        pts[:, ua] = window.lo[ua] + u[:, 0] * (window.hi[ua] - window.lo[ua])
        pts[:, va] = window.lo[va] + u[:, 1] * (window.hi[va] - window.lo[va])
    else:
        axis = surface.axis
        ua, va = perp_axes(axis)
        c1, c2, r = surface.params
        theta = u[:, 0] * (2.0 * math.pi)
        pts[:, ua] = c1 + r * np.cos(theta)
        pts[:, va] = c2 + r * np.sin(theta)
        pts[:, axis] = window.lo[axis] + u[:, 1] * (window.hi[axis] - window.lo[axis])
    return pts


def cells_adjacent(a: Cell, b: Cell, cfg: KernelConfig = DEFAULT_KERNEL_CONFIG) -> bool:
    """Positive-area face contact through a shared surface.

    For each surface both cells reference with opposite signs, seeded points
    on that surface (within the bbox overlap) must satisfy all remaining
    constraints of both cells with margin > face_eps.  Symmetric: the sample
    seed depends on the unordered cell pair.
    """
    if a.id == b.id and a.region == b.region:
        return False
    _require_bounded(a, b)
    window = bounding_box(a).intersect(bounding_box(b))
    if window.is_empty(strict=False):
        return False
    lo_id, hi_id = sorted((a.id, b.id))
    for surface in sorted(_shared_opposite(a, b), key=lambda s: s.id):
        seed = rng.derive(cfg.seed, "face", surface.id, lo_id, hi_id)
        pts = _face_samples(surface, window, seed, cfg.mc_samples_face)
        cons_a = _without_surface(a, surface.id)
        cons_b = _without_surface(b, surface.id)
        if _kernels.any_hit_two(pts, cons_a, cons_b, cfg.face_eps):
            return True
    return False


def _plane_only(cell: Cell) -> bool:
    return all(t.surface.is_plane for t in cell.region)


def cells_overlap(a: Cell, b: Cell, cfg: KernelConfig = DEFAULT_KERNEL_CONFIG) -> bool:
    """Interiors intersect.  Exact interval test when both cells are
    plane-only boxes; otherwise seeded Monte Carlo in the bbox overlap."""
    _require_bounded(a, b)
    window = bounding_box(a).intersect(bounding_box(b))
    if window.is_empty(strict=True):
        return False
    if _plane_only(a) and _plane_only(b):
        return True  # boxes with positive-width bbox overlap
    lo_id, hi_id = sorted((a.id, b.id))
    seed = rng.derive(cfg.seed, "overlap", lo_id, hi_id)
    pts = rng.points_in_box(seed, cfg.mc_samples_overlap, window.lo, window.hi)
    return bool(_kernels.any_hit_two(pts, compile_cell(a), compile_cell(b), cfg.boundary_eps))


def adjacency_pairs(cells: Sequence[Cell], cfg: KernelConfig = DEFAULT_KERNEL_CONFIG):
    """All unordered adjacent index pairs."""
    pairs = []
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            if cells_adjacent(cells[i], cells[j], cfg):
                pairs.append((i, j))
    return pairs


def all_connected(cells: Sequence[Cell], cfg: KernelConfig = DEFAULT_KERNEL_CONFIG) -> bool:
    """True iff the face-contact graph over the cells is connected."""
    if not cells:
        raise ValueError("empty cell list")
    n = len(cells)
    if n == 1:
        return True
    adj: dict[int, set[int]] = {i: set() for i in range(n)}
    for i, j in adjacency_pairs(cells, cfg):
        adj[i].add(j)
        adj[j].add(i)
    seen = {0}
    stack = [0]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == n


# ---------------------------------------------------------------------------
# Part validation

def validate_part(part: Part, cfg: KernelConfig = DEFAULT_KERNEL_CONFIG) -> None:
    """Enforce part invariants: unique ids, referenced surfaces, bounded
    nonempty cells, pairwise-disjoint interiors.  Raises on violation."""
    ids = [s.id for s in part.surfaces]
    if len(set(ids)) != len(ids):
        raise ValueError(f"part {part.id}: duplicate surface ids")
    cell_ids = [c.id for c in part.cells]
    if len(set(cell_ids)) != len(cell_ids):
        raise ValueError(f"part {part.id}: duplicate cell ids")
    known = set(ids)
    referenced: set[str] = set()
    for cell in part.cells:
        seen_signed = set()
        for term in cell.region:
            if term.surface.id not in known:
                raise ValueError(f"cell {cell.id}: surface {term.surface.id} not in part")
            key = (term.sign, term.surface.id)
            if key in seen_signed:
                raise ValueError(f"cell {cell.id}: duplicate term {key}")
            seen_signed.add(key)
            referenced.add(term.surface.id)
        if not is_bounded(cell):
            raise UnboundedCellError(f"cell {cell.id} is not bounded")
        seed = rng.derive(cfg.seed, "validate", part.id, cell.id)
        if interior_points(cell.region, seed, want=1, eps=cfg.boundary_eps) is None:
            raise ValueError(f"cell {cell.id}: empty interior")
    unused = known - referenced
    if unused:
        raise ValueError(f"part {part.id}: unreferenced surfaces {sorted(unused)}")
    for i in range(len(part.cells)):
        for j in range(i + 1, len(part.cells)):
            if cells_overlap(part.cells[i], part.cells[j], cfg):
                raise ValueError(
                    f"part {part.id}: cells {part.cells[i].id} and "
                    f"{part.cells[j].id} overlap"
                )


def part_bounding_box(part: Part) -> Box3:
    box = bounding_box(part.cells[0])
    for cell in part.cells[1:]:
        box = box.union(bounding_box(cell))
    return box
