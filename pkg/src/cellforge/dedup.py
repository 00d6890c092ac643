"""Similarity-invariant canonical hashing of parts.

Two parts that differ only by translation, uniform positive scaling, or one
of the 24 proper axis-aligned rotations collapse to the same key: normalize
(bbox min to origin, max extent to 1), then take the lexicographically
smallest canonical serialization over the whole rotation orbit, re-anchoring
the bbox after each rotation.  Reflections are deliberately excluded; mirror
images are distinct parts.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DegeneratePartError
from .geometry import Cell, Part, SignedSurface, Surface, perp_axes
from .kernel import part_bounding_box
from .script import canonicalize, emit_ast, part_to_ast


def rotation_group() -> list[np.ndarray]:
    """The 24 proper rotations of the axis-aligned frame, in a fixed order."""
    mats = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1, -1), repeat=3):
            m = np.zeros((3, 3), dtype=np.int64)
            for i in range(3):
                m[perm[i], i] = signs[i]
            if round(np.linalg.det(m)) == 1:
                mats.append(m)
    mats.sort(key=lambda m: tuple(m.flatten()))
    return mats


ROTATIONS = rotation_group()


def _map_axis(rot: np.ndarray, axis: int) -> tuple[int, int]:
    """(new_axis, sign) of the image of basis vector `axis`."""
    col = rot[:, axis]
    new_axis = int(np.nonzero(col)[0][0])
    return new_axis, int(col[new_axis])


def translate_part(part: Part, t) -> Part:
    return _rebuild(part, lambda s: _translate_surface(s, t), flip_ids=set())


def scale_part(part: Part, factor: float) -> Part:
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    return _rebuild(part, lambda s: _scale_surface(s, factor), flip_ids=set())


def rotate_part(part: Part, rot: np.ndarray) -> Part:
    """Rotate about the origin.  Planes landing on a reflected axis flip the
    side every referencing term selects; cylinder sides are unaffected."""
    new_surfaces = {}
    flip_ids = set()
    for s in part.surfaces:
        new_s, flips = _rotate_surface(s, rot)
        new_surfaces[s.id] = new_s
        if flips:
            flip_ids.add(s.id)
    return _rebuild(part, lambda s: new_surfaces[s.id], flip_ids=flip_ids)


def _rebuild(part: Part, surf_fn, flip_ids: set[str]) -> Part:
    table = {s.id: surf_fn(s) for s in part.surfaces}
    cells = []
    for c in part.cells:
        region = tuple(
            SignedSurface(-t.sign if t.surface.id in flip_ids else t.sign,
                          table[t.surface.id])
            for t in c.region
        )
        cells.append(Cell(c.id, region))
    return Part(part.id, tuple(table[s.id] for s in part.surfaces), tuple(cells))


def _translate_surface(s: Surface, t) -> Surface:
    if s.is_plane:
        return Surface(s.id, s.kind, (s.params[0] + t[s.axis],))
    u, v = perp_axes(s.axis)
    return Surface(s.id, s.kind, (s.params[0] + t[u], s.params[1] + t[v], s.params[2]))


def _scale_surface(s: Surface, f: float) -> Surface:
    return Surface(s.id, s.kind, tuple(p * f for p in s.params))


_PLANE_OF_AXIS = ("XPlane", "YPlane", "ZPlane")
_CYL_OF_AXIS = ("XCylinder", "YCylinder", "ZCylinder")


def _rotate_surface(s: Surface, rot: np.ndarray) -> tuple[Surface, bool]:
    axis2, sign2 = _map_axis(rot, s.axis)
    if s.is_plane:
        return Surface(s.id, _PLANE_OF_AXIS[axis2], (sign2 * s.params[0],)), sign2 < 0
    u, v = perp_axes(s.axis)
    coords = {}
    for src_axis, value in ((u, s.params[0]), (v, s.params[1])):
        dst, sg = _map_axis(rot, src_axis)
        coords[dst] = sg * value
    u2, v2 = perp_axes(axis2)
    return Surface(s.id, _CYL_OF_AXIS[axis2], (coords[u2], coords[v2], s.params[2])), False


@dataclass(frozen=True)
class CanonicalKey:
    key: str
    canonical_text: str


def canonical_key(part: Part, quantize_decimals: int = 6) -> CanonicalKey:
    """SHA-256 over the minimal canonical serialization of the part's
    similarity orbit."""
    box = part_bounding_box(part)
    extent = max(box.widths())
    if extent <= 0:
        raise DegeneratePartError(f"part {part.id}: zero-extent bounding box")
    norm = scale_part(translate_part(part, tuple(-v for v in box.lo)), 1.0 / extent)
    best = None
    for rot in ROTATIONS:
        cand = rotate_part(norm, rot)
        lo = part_bounding_box(cand).lo
        cand = translate_part(cand, tuple(-v for v in lo))
        text = emit_ast(canonicalize(part_to_ast(cand), quantize_decimals))
        if best is None or text < best:
            best = text
    digest = hashlib.sha256(best.encode("utf-8")).hexdigest()
    return CanonicalKey(key=digest, canonical_text=best)


def dedup_parts(parts: Iterable[Part]) -> tuple[list[Part], list[tuple[str, str]]]:
    """Keep the first part per canonical key (input order); report later
    collisions as (dropped_id, kept_id)."""
    kept: list[Part] = []
    dropped: list[tuple[str, str]] = []
    first_by_key: dict[str, str] = {}
    for part in parts:
        key = canonical_key(part).key
        if key in first_by_key:
            dropped.append((part.id, first_by_key[key]))
        else:
            first_by_key[key] = part.id
            kept.append(part)
    return kept, dropped
