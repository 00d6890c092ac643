"""CSG expressions over axis-aligned primitives.

The input side of the decomposer: boolean trees of boxes and finite
cylinders.  Expressions compile to a flat postfix program evaluated by the
kernel backends, and expose the defining surfaces that seed the cell
arrangement.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Union as TUnion

import numpy as np

from . import _kernels

AXIS_NAMES = "xyz"


@dataclass(frozen=True)
class Box:
    x0: float
    x1: float
    y0: float
    y1: float
    z0: float
    z1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1 and self.z0 < self.z1):
            raise ValueError("box bounds must be strictly increasing per axis")


@dataclass(frozen=True)
class FinCyl:
    """Finite cylinder: lateral surface plus two cap planes at h0/h1 along
    the axis.  c1/c2 sit on the two non-axis coordinates in axis order."""

    axis: int
    c1: float
    c2: float
    r: float
    h0: float
    h1: float

    def __post_init__(self):
        if self.axis not in (0, 1, 2):
            raise ValueError("axis must be 0, 1 or 2")
        if self.r <= 0:
            raise ValueError("radius must be positive")
        if not self.h0 < self.h1:
            raise ValueError("cap planes must satisfy h0 < h1")


@dataclass(frozen=True)
class Union:
    l: "CsgExpr"
    r: "CsgExpr"


@dataclass(frozen=True)
class Intersect:
    l: "CsgExpr"
    r: "CsgExpr"


@dataclass(frozen=True)
class Difference:
    l: "CsgExpr"
    r: "CsgExpr"


CsgExpr = TUnion[Box, FinCyl, Union, Intersect, Difference]

_OPS = {Union: 2, Intersect: 3, Difference: 4}


def compile_expr(expr: CsgExpr):
    """Postfix program (ops int64, params float64 (k, 6)) for the kernels."""
    ops: list[int] = []
    params: list[list[float]] = []

    def walk(node):
        if isinstance(node, Box):
            ops.append(0)
            params.append([node.x0, node.x1, node.y0, node.y1, node.z0, node.z1])
        elif isinstance(node, FinCyl):
            ops.append(1)
            params.append([float(node.axis), node.c1, node.c2, node.r, node.h0, node.h1])
        else:
            walk(node.l)
            walk(node.r)
            ops.append(_OPS[type(node)])
            params.append([0.0] * 6)

    walk(expr)
    return np.asarray(ops, dtype=np.int64), np.asarray(params, dtype=np.float64)


def member(expr: CsgExpr, points: np.ndarray) -> np.ndarray:
    """Strict membership of (n, 3) points in the solid."""
    ops, params = compile_expr(expr)
    pts = np.ascontiguousarray(points, dtype=np.float64)
    return np.asarray(_kernels.csg_member(ops, params, pts), dtype=bool)


def expr_bbox(expr: CsgExpr) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    """Conservative bounding box (exact for unions of primitives)."""
    if isinstance(expr, Box):
        return (expr.x0, expr.y0, expr.z0), (expr.x1, expr.y1, expr.z1)
    if isinstance(expr, FinCyl):
        lo = [0.0] * 3
        hi = [0.0] * 3
        u, v = [a for a in (0, 1, 2) if a != expr.axis]
        lo[expr.axis], hi[expr.axis] = expr.h0, expr.h1
        lo[u], hi[u] = expr.c1 - expr.r, expr.c1 + expr.r
        lo[v], hi[v] = expr.c2 - expr.r, expr.c2 + expr.r
        return tuple(lo), tuple(hi)
    llo, lhi = expr_bbox(expr.l)
    if isinstance(expr, Difference):
        return llo, lhi
    rlo, rhi = expr_bbox(expr.r)
    if isinstance(expr, Intersect):
        return (
            tuple(max(a, b) for a, b in zip(llo, rlo)),
            tuple(min(a, b) for a, b in zip(lhi, rhi)),
        )
    return (
        tuple(min(a, b) for a, b in zip(llo, rlo)),
        tuple(max(a, b) for a, b in zip(lhi, rhi)),
    )


def defining_surfaces(expr: CsgExpr) -> list[tuple[str, tuple[float, ...]]]:
    """(kind, params) descriptors of every primitive boundary, unmerged."""
    out: list[tuple[str, tuple[float, ...]]] = []

    def walk(node):
        if isinstance(node, Box):
            out.append(("XPlane", (node.x0,)))
            out.append(("XPlane", (node.x1,)))
            out.append(("YPlane", (node.y0,)))
            out.append(("YPlane", (node.y1,)))
            out.append(("ZPlane", (node.z0,)))
            out.append(("ZPlane", (node.z1,)))
        elif isinstance(node, FinCyl):
            plane_kind = "XPlane YPlane ZPlane".split()[node.axis]
            cyl_kind = "XCylinder YCylinder ZCylinder".split()[node.axis]
            out.append((plane_kind, (node.h0,)))
            out.append((plane_kind, (node.h1,)))
            out.append((cyl_kind, (node.c1, node.c2, node.r)))
        else:
            walk(node.l)
            walk(node.r)

    walk(expr)
    return out


def merge_descriptors(descriptors, tol: float = 1e-9):
    """Greedy merge of (kind, params) descriptors whose params agree within
    tol; first occurrence wins as representative."""
    merged: list[tuple[str, tuple[float, ...]]] = []
    for kind, params in descriptors:
        for mk, mp in merged:
            if mk == kind and all(abs(a - b) <= tol for a, b in zip(params, mp)):
                break
        else:
            merged.append((kind, params))
    return merged


# ---------------------------------------------------------------------------
# JSON wire format

def expr_from_json(obj: dict) -> CsgExpr:
    if "op" in obj:
        op = obj["op"]
        l = expr_from_json(obj["l"])
        r = expr_from_json(obj["r"])
        if op == "union":
            return Union(l, r)
        if op == "intersect":
            return Intersect(l, r)
        if op == "difference":
            return Difference(l, r)
        raise ValueError(f"unknown op {op!r}")
    prim = obj.get("prim")
    if prim == "box":
        return Box(*[float(v) for v in obj["bounds"]])
    if prim == "cyl":
        axis = AXIS_NAMES.index(obj["axis"])
        c1, c2 = (float(v) for v in obj["center"])
        h0, h1 = (float(v) for v in obj["h"])
        return FinCyl(axis, c1, c2, float(obj["r"]), h0, h1)
    raise ValueError(f"unknown primitive {prim!r}")


def expr_to_json(expr: CsgExpr) -> dict:
    if isinstance(expr, Box):
        return {"prim": "box", "bounds": [expr.x0, expr.x1, expr.y0, expr.y1, expr.z0, expr.z1]}
    if isinstance(expr, FinCyl):
        return {
            "prim": "cyl",
            "axis": AXIS_NAMES[expr.axis],
            "center": [expr.c1, expr.c2],
            "r": expr.r,
            "h": [expr.h0, expr.h1],
        }
    name = {Union: "union", Intersect: "intersect", Difference: "difference"}[type(expr)]
    return {"op": name, "l": expr_to_json(expr.l), "r": expr_to_json(expr.r)}


def load_expr(text: str) -> CsgExpr:
    return expr_from_json(json.loads(text))


def dump_expr(expr: CsgExpr) -> str:
    return json.dumps(expr_to_json(expr), indent=2) + "\n"
