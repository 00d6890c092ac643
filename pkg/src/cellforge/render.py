"""Orthographic depth renderings of cell geometry.

Four fixed views look in from the upper bbox corners; rays march with a
step of bbox-diagonal / (4 * size) until they first enter any cell, and the
hit depth shades the pixel (255 nearest, 1 farthest, 0 background).  The
whole render is seedless arithmetic, so images are byte-stable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .decompose import pack_cells
from .errors import EmptyGeometryError
from .geometry import Cell
from .kernel import DEFAULT_KERNEL_CONFIG, KernelConfig, bounding_box

# upper-corner camera directions, axis-permuted deterministically
_CORNERS = ((1, 1, 1), (-1, 1, 1), (1, -1, 1), (-1, -1, 1))


@dataclass(frozen=True, eq=False)
class ViewImage:
    width: int
    height: int
    pixels: np.ndarray  # (height, width) uint8, row 0 = top
    view_id: int

    def foreground(self) -> int:
        return int((self.pixels > 0).sum())

    def digest(self) -> str:
        return hashlib.sha256(self.to_pgm()).hexdigest()

    def to_pgm(self) -> bytes:
        header = f"P5\n{self.width} {self.height}\n255\n".encode("ascii")
        return header + self.pixels.tobytes()


def _geometry_box(cells: Sequence[Cell]):
    box = bounding_box(cells[0])
    for c in cells[1:]:
        box = box.union(bounding_box(c))
    return box


def _shade(hits: np.ndarray, step: float, march_len: float, size: int) -> np.ndarray:
    img = np.zeros(hits.shape[0], dtype=np.uint8)
    mask = hits >= 0
    frac = (hits[mask].astype(np.float64) * step) / march_len
    img[mask] = (255 - np.floor(254.0 * frac)).astype(np.uint8)
    return img.reshape(size, size)


def render_views(cells: Sequence[Cell], size: int,
                 cfg: KernelConfig = DEFAULT_KERNEL_CONFIG) -> list[ViewImage]:
    if not cells:
        raise EmptyGeometryError("nothing to render")
    if size < 1:
        raise ValueError("size must be >= 1")
    box = _geometry_box(cells)
    center = np.asarray(box.center())
    diag = max(box.diagonal(), 1e-12)
    step = diag / (4.0 * size)
    march_len = 2.0 * diag
    nsteps = int(np.ceil(march_len / step))
    flat, offsets = pack_cells(cells)

    images = []
    px = (np.arange(size) + 0.5) * (diag / size) - diag / 2.0
    for view_id, corner in enumerate(_CORNERS, start=1):
        u = np.asarray(corner, dtype=np.float64)
        u /= np.linalg.norm(u)
        w = -u  # ray direction, into the scene
        right = np.cross(w, np.array([0.0, 0.0, 1.0]))
        right /= np.linalg.norm(right)
        up = np.cross(right, w)
        sx, sy = np.meshgrid(px, -px)  # row 0 = top of image
        origins = (
            center[None, :]
            + sx.reshape(-1, 1) * right[None, :]
            + sy.reshape(-1, 1) * up[None, :]
            - w[None, :] * diag
        )
        hits = _kernels.march(np.ascontiguousarray(origins), w, step, nsteps,
                              flat, offsets, cfg.boundary_eps)
        images.append(ViewImage(size, size, _shade(np.asarray(hits), step, march_len, size),
                                view_id))
    return images


def render_top_view(cells: Sequence[Cell], size: int,
                    cfg: KernelConfig = DEFAULT_KERNEL_CONFIG) -> ViewImage:
    """Straight-down auxiliary view over the exact bbox footprint (debug aid;
    a centered cylinder fills ~pi/4 of it)."""
    if not cells:
        raise EmptyGeometryError("nothing to render")
    box = _geometry_box(cells)
    diag = max(box.diagonal(), 1e-12)
    step = diag / (4.0 * size)
    wx = box.hi[0] - box.lo[0]
    wy = box.hi[1] - box.lo[1]
    xs = box.lo[0] + (np.arange(size) + 0.5) * (wx / size)
    ys = box.hi[1] - (np.arange(size) + 0.5) * (wy / size)  # row 0 = +y edge
    gx, gy = np.meshgrid(xs, ys)
    z0 = box.hi[2] + 2.0 * step
    origins = np.column_stack([gx.ravel(), gy.ravel(), np.full(size * size, z0)])
    march_len = (box.hi[2] - box.lo[2]) + 4.0 * step
    nsteps = int(np.ceil(march_len / step))
    flat, offsets = pack_cells(cells)
    hits = _kernels.march(np.ascontiguousarray(origins),
                          np.array([0.0, 0.0, -1.0]), step, nsteps,
                          flat, offsets, cfg.boundary_eps)
    return ViewImage(size, size, _shade(np.asarray(hits), step, march_len, size), 0)


def write_pgm(image: ViewImage, path) -> None:
    with open(path, "wb") as fh:
        fh.write(image.to_pgm())
