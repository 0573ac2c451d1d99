"""Coordinates on the probability simplex.

Unconstrained coordinates are additive log-ratios against the last
component, ``z_j = log(w_j / w_K)``.  Ternary (2-simplex) points map to the
plane by the affine map

    (w1, w2, w3) -> (w2 + w3 / 2, w3 * sqrt(3) / 2)

which sends the vertices to (0, 0), (1, 0) and (1/2, sqrt(3)/2).
"""

import numpy as np

from .exceptions import DomainError

SQRT3_2 = np.sqrt(3.0) / 2.0


def to_unconstrained(w):
    w = np.asarray(w, dtype=float)
    return np.log(w[..., :-1]) - np.log(w[..., -1:])


def from_unconstrained(z):
    z = np.asarray(z, dtype=float)
    full = np.concatenate([z, np.zeros(z.shape[:-1] + (1,))], axis=-1)
    full -= full.max(axis=-1, keepdims=True)
    e = np.exp(full)
    return e / e.sum(axis=-1, keepdims=True)


def clamp_to_floor(w, floor):
    """Raise components below ``floor`` to it, rescaling the rest to keep sum 1."""
    w = np.array(w, dtype=float)
    fixed = np.zeros(w.shape, dtype=bool)
    while True:
        low = ~fixed & (w < floor)
        if not low.any():
            return w
        fixed |= low
        w[fixed] = floor
        free = ~fixed
        w[free] *= (1.0 - floor * fixed.sum()) / w[free].sum()


def check_on_simplex(points, tol=1e-9, what="point"):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[-1] != 3:
        raise DomainError(f"{what} must have 3 components, got {pts.shape[-1]}")
    if np.any(pts < -tol) or np.any(np.abs(pts.sum(axis=-1) - 1.0) > tol):
        raise DomainError(f"{what} is not on the 2-simplex")
    return pts


def barycentric_to_cartesian(points):
    pts = np.asarray(points, dtype=float)
    x = pts[..., 1] + 0.5 * pts[..., 2]
    y = SQRT3_2 * pts[..., 2]
    return np.stack([x, y], axis=-1)


def polygon_area(xy):
    """Signed shoelace area (positive when counter-clockwise)."""
    xy = np.asarray(xy, dtype=float)
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def point_in_polygon(pt, xy):
    """Even-odd ray casting test for a closed or open vertex list."""
    x, y = pt
    px, py = np.asarray(xy, dtype=float).T
    qx, qy = np.roll(px, -1), np.roll(py, -1)
    crosses = (py > y) != (qy > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = px + (y - py) * (qx - px) / (qy - py)
    return bool(np.count_nonzero(crosses & (x < xint)) % 2)
