"""Vectorized numpy fallback for the hot geometry kernels.

Every function here has a compiled twin in ``_core.pyx``.  Both evaluate the
same IEEE expressions in the same per-point order, so boolean outcomes and
margins agree bit-for-bit; the compiled version only adds early exits.

Constraint rows are (code, sign, p0, p1, p2): codes 0..2 are planes with
normal x/y/z (p0 = offset), codes 3..5 are cylinders along x/y/z
(p0, p1 = center on the two non-axis coordinates, p2 = radius).  A margin is
positive where the signed constraint is satisfied.

CSG programs are postfix: opcode 0 = box (x0,x1,y0,y1,z0,z1), 1 = finite
cylinder (axis,c1,c2,r,h0,h1), 2 = union, 3 = intersect, 4 = difference.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "pure-python"

_PERP = {3: (1, 2), 4: (0, 2), 5: (0, 1)}


def _margins(points: np.ndarray, cons: np.ndarray) -> np.ndarray:
    """(n, m) margin matrix."""
    n = points.shape[0]
    m = cons.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    for j in range(m):
        code = int(cons[j, 0])
        sign = cons[j, 1]
        if code < 3:
            out[:, j] = sign * (points[:, code] - cons[j, 2])
        else:
            u, v = _PERP[code]
            du = points[:, u] - cons[j, 2]
            dv = points[:, v] - cons[j, 3]
            out[:, j] = sign * (np.sqrt(du * du + dv * dv) - cons[j, 4])
    return out


def min_margins(points: np.ndarray, cons: np.ndarray) -> np.ndarray:
    if cons.shape[0] == 0:
        return np.full(points.shape[0], np.inf)
    return _margins(points, cons).min(axis=1)


def count_hits_two(points, cons_a, cons_b, eps: float) -> int:
    hits = (min_margins(points, cons_a) > eps) & (min_margins(points, cons_b) > eps)
    return int(hits.sum())


def any_hit_two(points, cons_a, cons_b, eps: float) -> bool:
    return count_hits_two(points, cons_a, cons_b, eps) > 0


def csg_member(ops: np.ndarray, params: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Strict membership of each point in the CSG program's solid."""
    stack: list[np.ndarray] = []
    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    coords = (x, y, z)
    for i in range(len(ops)):
        op = int(ops[i])
        p = params[i]
        if op == 0:
            stack.append(
                (x > p[0]) & (x < p[1]) & (y > p[2]) & (y < p[3]) & (z > p[4]) & (z < p[5])
            )
        elif op == 1:
            axis = int(p[0])
            u, v = _PERP[axis + 3]
            du = coords[u] - p[1]
            dv = coords[v] - p[2]
            w = coords[axis]
            stack.append((w > p[4]) & (w < p[5]) & (np.sqrt(du * du + dv * dv) < p[3]))
        else:
            b = stack.pop()
            a = stack.pop()
            if op == 2:
                stack.append(a | b)
            elif op == 3:
                stack.append(a & b)
            else:
                stack.append(a & ~b)
    return stack.pop().astype(np.uint8)


def cells_member(cells_flat: np.ndarray, offsets: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Strict membership of each point in the union of cells (margin > 0)."""
    member = np.zeros(points.shape[0], dtype=bool)
    for c in range(len(offsets) - 1):
        cons = cells_flat[offsets[c]:offsets[c + 1]]
        member |= min_margins(points, cons) > 0.0
    return member.astype(np.uint8)


def near_any_surface(surf_rows: np.ndarray, points: np.ndarray, eps: float) -> np.ndarray:
    if surf_rows.shape[0] == 0:
        return np.zeros(points.shape[0], dtype=np.uint8)
    near = np.abs(_margins(points, surf_rows)).min(axis=1) < eps
    return near.astype(np.uint8)


def agreement_count(ops, params, surf_rows, cells_flat, offsets, points, eps: float):
    """(agreements, points used) comparing CSG vs cell-union membership,
    skipping points within eps of any listed surface."""
    keep = near_any_surface(surf_rows, points, eps) == 0
    pts = points[keep]
    if pts.shape[0] == 0:
        return 0, 0
    expr = csg_member(ops, params, pts).astype(bool)
    part = cells_member(cells_flat, offsets, pts).astype(bool)
    return int((expr == part).sum()), int(pts.shape[0])


def march(origins: np.ndarray, direction: np.ndarray, step: float, nsteps: int,
          cells_flat: np.ndarray, offsets: np.ndarray, eps: float) -> np.ndarray:
    """First step index at which each ray enters any cell, -1 if it never does.

    Sample position at step k is origin + direction * (k * step); k * step is
    computed fresh each step (not accumulated) to match the compiled twin.
    """
    n = origins.shape[0]
    hit = np.full(n, -1, dtype=np.int32)
    active = np.arange(n)
    for k in range(nsteps):
        if active.size == 0:
            break
        p = origins[active] + direction[None, :] * (k * step)
        inside = np.zeros(active.size, dtype=bool)
        for c in range(len(offsets) - 1):
            cons = cells_flat[offsets[c]:offsets[c + 1]]
            inside |= min_margins(p, cons) > eps
        hit[active[inside]] = k
        active = active[~inside]
    return hit
