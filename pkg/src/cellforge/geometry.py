"""Domain types for axis-aligned solids: surfaces, cells, parts.

A surface is an axis-aligned plane or an infinite axis-aligned cylinder.
A cell is a conjunction of signed surface references (Plus = above plane /
outside cylinder, Minus = below plane / inside cylinder).  A part bundles
surfaces and pairwise-disjoint cells into one solid.

Everything is immutable after construction; cells carry resolved Surface
objects so geometric predicates never need an external lookup table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import UnknownSurfaceError

PLANE_KINDS = ("XPlane", "YPlane", "ZPlane")
CYLINDER_KINDS = ("XCylinder", "YCylinder", "ZCylinder")
ALL_KINDS = PLANE_KINDS + CYLINDER_KINDS

# Fixed parameter names per kind; order matters for serialization and the
# script DSL.  Cylinder centers are given on the two non-axis coordinates in
# increasing axis order.
PARAM_NAMES = {
    "XPlane": ("x0",),
    "YPlane": ("y0",),
    "ZPlane": ("z0",),
    "XCylinder": ("y0", "z0", "r"),
    "YCylinder": ("x0", "z0", "r"),
    "ZCylinder": ("x0", "y0", "r"),
}

AXIS_OF_KIND = {
    "XPlane": 0, "YPlane": 1, "ZPlane": 2,
    "XCylinder": 0, "YCylinder": 1, "ZCylinder": 2,
}

# Constraint-row codes used by the numeric kernels: 0..2 plane normal axis,
# 3..5 cylinder axis.
_CODE_OF_KIND = {
    "XPlane": 0, "YPlane": 1, "ZPlane": 2,
    "XCylinder": 3, "YCylinder": 4, "ZCylinder": 5,
}

_KIND_RANK = {k: i for i, k in enumerate(ALL_KINDS)}

PLUS = 1
MINUS = -1


def perp_axes(axis: int) -> tuple[int, int]:
    """The two non-axis coordinates, in increasing axis order."""
    return tuple(a for a in (0, 1, 2) if a != axis)  # type: ignore[return-value]


@dataclass(frozen=True)
class Surface:
    """An axis-aligned plane (params: offset) or infinite cylinder
    (params: center1, center2, radius)."""

    id: str
    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown surface kind {self.kind!r}")
        expected = len(PARAM_NAMES[self.kind])
        if len(self.params) != expected:
            raise ValueError(f"{self.kind} takes {expected} params, got {len(self.params)}")
        if not all(np.isfinite(self.params)):
            raise ValueError(f"surface {self.id}: non-finite parameter")
        if self.is_cylinder and self.params[2] <= 0:
            raise ValueError(f"surface {self.id}: radius must be positive")

    @property
    def axis(self) -> int:
        return AXIS_OF_KIND[self.kind]

    @property
    def is_plane(self) -> bool:
        return self.kind in PLANE_KINDS

    @property
    def is_cylinder(self) -> bool:
        return self.kind in CYLINDER_KINDS

    def sort_key(self):
        """Deterministic ordering: axis, then offset/center, then kind."""
        return (self.axis, self.params, _KIND_RANK[self.kind])

    def geom_key(self, decimals: int = 9):
        """Identity of the underlying geometry, quantized for merging."""
        return (self.kind, tuple(round(p, decimals) + 0.0 for p in self.params))


@dataclass(frozen=True)
class SignedSurface:
    """A surface with a side selector: +1 above/outside, -1 below/inside."""

    sign: int
    surface: Surface

    def __post_init__(self):
        if self.sign not in (PLUS, MINUS):
            raise ValueError("sign must be +1 or -1")


@dataclass(frozen=True)
class Cell:
    """A solid region: the conjunction of its signed surface constraints."""

    id: str
    region: tuple[SignedSurface, ...]

    def __post_init__(self):
        if not self.region:
            raise ValueError(f"cell {self.id}: empty region")

    def surface_ids(self) -> set[str]:
        return {t.surface.id for t in self.region}


@dataclass(frozen=True)
class Part:
    """One solid: its surfaces plus pairwise-disjoint cells."""

    id: str
    surfaces: tuple[Surface, ...]
    cells: tuple[Cell, ...]

    def surface_by_id(self) -> dict[str, Surface]:
        return {s.id: s for s in self.surfaces}

    def cell_by_id(self) -> dict[str, Cell]:
        return {c.id: c for c in self.cells}


@dataclass(frozen=True)
class Box3:
    """Axis-aligned box, lo/hi per axis."""

    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def widths(self) -> tuple[float, float, float]:
        return tuple(h - l for l, h in zip(self.lo, self.hi))  # type: ignore[return-value]

    def is_empty(self, strict: bool = True) -> bool:
        if strict:
            return any(h <= l for l, h in zip(self.lo, self.hi))
        return any(h < l for l, h in zip(self.lo, self.hi))

    def intersect(self, other: "Box3") -> "Box3":
        return Box3(
            tuple(max(a, b) for a, b in zip(self.lo, other.lo)),
            tuple(min(a, b) for a, b in zip(self.hi, other.hi)),
        )

    def union(self, other: "Box3") -> "Box3":
        return Box3(
            tuple(min(a, b) for a, b in zip(self.lo, other.lo)),
            tuple(max(a, b) for a, b in zip(self.hi, other.hi)),
        )

    def center(self) -> tuple[float, float, float]:
        return tuple((l + h) / 2.0 for l, h in zip(self.lo, self.hi))  # type: ignore[return-value]

    def diagonal(self) -> float:
        return float(np.sqrt(sum(w * w for w in self.widths())))

    def inflate(self, factor: float) -> "Box3":
        """Scale extents by (1 + factor) about the center."""
        c = self.center()
        lo = tuple(c[i] + (self.lo[i] - c[i]) * (1.0 + factor) for i in range(3))
        hi = tuple(c[i] + (self.hi[i] - c[i]) * (1.0 + factor) for i in range(3))
        return Box3(lo, hi)


# ---------------------------------------------------------------------------
# Numeric compilation for the kernels

def constraint_row(sign: int, surface: Surface) -> tuple[float, ...]:
    """One (code, sign, p0, p1, p2) row; the margin at a point is positive
    where the constraint is satisfied."""
    code = _CODE_OF_KIND[surface.kind]
    p = surface.params
    if surface.is_plane:
        return (float(code), float(sign), p[0], 0.0, 0.0)
    return (float(code), float(sign), p[0], p[1], p[2])


@lru_cache(maxsize=8192)
def compile_region(region: tuple[SignedSurface, ...]) -> np.ndarray:
    rows = np.array([constraint_row(t.sign, t.surface) for t in region], dtype=np.float64)
    rows.setflags(write=False)
    return rows


def compile_cell(cell: Cell) -> np.ndarray:
    return compile_region(cell.region)


def surface_rows(surfaces: Iterable[Surface]) -> np.ndarray:
    """(k, 5) rows with sign fixed to +1, used for near-boundary tests."""
    rows = [constraint_row(PLUS, s) for s in surfaces]
    if not rows:
        return np.empty((0, 5), dtype=np.float64)
    return np.array(rows, dtype=np.float64)


def merge_coincident(cells: Sequence[Cell], decimals: int = 9) -> list[Cell]:
    """Rewrite cells so that geometrically identical surfaces (same kind and
    params within the quantization) are one shared Surface object.

    Needed when geometry comes from independently authored scripts: adjacency
    is defined via shared surfaces, not via coincidence testing.
    """
    canon: dict[tuple, Surface] = {}
    out = []
    for cell in cells:
        region = []
        for term in cell.region:
            key = term.surface.geom_key(decimals)
            rep = canon.setdefault(key, term.surface)
            region.append(SignedSurface(term.sign, rep))
        out.append(Cell(cell.id, tuple(region)))
    return out


# ---------------------------------------------------------------------------
# JSON wire format

def surface_to_json(s: Surface) -> dict:
    return {
        "id": s.id,
        "kind": s.kind,
        "params": {name: float(v) for name, v in zip(PARAM_NAMES[s.kind], s.params)},
    }


def surface_from_json(obj: dict) -> Surface:
    kind = obj["kind"]
    if kind not in ALL_KINDS:
        raise ValueError(f"unknown surface kind {kind!r}")
    names = PARAM_NAMES[kind]
    params = tuple(float(obj["params"][n]) for n in names)
    return Surface(id=obj["id"], kind=kind, params=params)


def part_to_json(part: Part) -> dict:
    return {
        "id": part.id,
        "surfaces": [surface_to_json(s) for s in part.surfaces],
        "cells": [
            {
                "id": c.id,
                "region": [["+" if t.sign > 0 else "-", t.surface.id] for t in c.region],
            }
            for c in part.cells
        ],
    }


def part_from_json(obj: dict) -> Part:
    surfaces = tuple(surface_from_json(s) for s in obj["surfaces"])
    by_id = {s.id: s for s in surfaces}
    if len(by_id) != len(surfaces):
        raise ValueError(f"part {obj['id']!r}: duplicate surface ids")
    cells = []
    for c in obj["cells"]:
        region = []
        for sign_str, sid in c["region"]:
            if sid not in by_id:
                raise UnknownSurfaceError(f"cell {c['id']!r} references unknown surface {sid!r}")
            region.append(SignedSurface(PLUS if sign_str == "+" else MINUS, by_id[sid]))
        cells.append(Cell(id=c["id"], region=tuple(region)))
    return Part(id=obj["id"], surfaces=surfaces, cells=tuple(cells))


def dump_part(part: Part) -> str:
    return json.dumps(part_to_json(part), indent=2) + "\n"


def load_part(text: str) -> Part:
    return part_from_json(json.loads(text))
