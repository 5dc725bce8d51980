"""Small planar-geometry helpers for phase-plane audits."""

from __future__ import annotations

import numpy as np

__all__ = ["closed_polylines_cross", "points_in_polygon"]


def _orient(px, py, qx, qy, rx, ry):
    """Signed orientation of the triple (p, q, r); broadcasts."""
    return (qx - px) * (ry - py) - (qy - py) * (rx - px)


def closed_polylines_cross(pts_a: np.ndarray, pts_b: np.ndarray) -> bool:
    """True when two polylines have a transversal (proper) intersection.

    Touching or collinear overlaps do not count; nested non-crossing orbit
    projections must return False.  Vectorized over all segment pairs.
    """
    a0 = pts_a[:-1]
    a1 = pts_a[1:]
    b0 = pts_b[:-1]
    b1 = pts_b[1:]
    # broadcast segments of A (rows) against segments of B (columns)
    d1 = _orient(
        a0[:, None, 0], a0[:, None, 1], a1[:, None, 0], a1[:, None, 1],
        b0[None, :, 0], b0[None, :, 1],
    )
    d2 = _orient(
        a0[:, None, 0], a0[:, None, 1], a1[:, None, 0], a1[:, None, 1],
        b1[None, :, 0], b1[None, :, 1],
    )
    d3 = _orient(
        b0[None, :, 0], b0[None, :, 1], b1[None, :, 0], b1[None, :, 1],
        a0[:, None, 0], a0[:, None, 1],
    )
    d4 = _orient(
        b0[None, :, 0], b0[None, :, 1], b1[None, :, 0], b1[None, :, 1],
        a1[:, None, 0], a1[:, None, 1],
    )
    proper = (d1 * d2 < 0.0) & (d3 * d4 < 0.0)
    return bool(np.any(proper))


def points_in_polygon(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Even-odd point-in-polygon test; polygon given as a closed polyline."""
    x = points[:, 0][:, None]
    y = points[:, 1][:, None]
    x0 = polygon[:-1, 0][None, :]
    y0 = polygon[:-1, 1][None, :]
    x1 = polygon[1:, 0][None, :]
    y1 = polygon[1:, 1][None, :]
    straddles = (y0 <= y) != (y1 <= y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    hits = straddles & (x < x_cross)
    return np.sum(hits, axis=1) % 2 == 1
