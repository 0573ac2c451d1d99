"""Likelihood inference for the weight vector.

Maximum likelihood on the open simplex, Wilks intervals for two categories,
and likelihood-ratio regions on the 2-simplex for three categories.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import optimize, stats

from .core import WeightVector, log_likelihood_many, loglik_function
from .exceptions import BoundaryIntervalError, DomainError, FlatLikelihoodError, WalleniusError
from .simplex import (barycentric_to_cartesian, clamp_to_floor, from_unconstrained,
                      point_in_polygon, polygon_area, to_unconstrained)

__all__ = [
    "SIMPLEX_FLOOR",
    "MleResult",
    "WilksInterval",
    "ConfidenceRegion",
    "GridEvaluation",
    "fit_mle",
    "wilks_interval",
    "likelihood_region",
    "evaluate_grid",
    "lr_threshold",
    "zoom_window",
    "finite_difference_gradient",
]

#: Smallest weight component an estimate or grid point may take.
SIMPLEX_FLOOR = 1e-6
FATOL = 1e-10
XATOL = 1e-10
MAX_ITER = 10_000
GRADIENT_TOL = 1e-4
FD_STEP = 1e-5
MAX_POLISH = 3


@dataclass(frozen=True)
class MleResult:
    w_hat: WeightVector
    loglik_max: float
    iterations: int
    converged: bool
    boundary_flag: bool
    gradient_norm: float = float("nan")

    def to_dict(self):
        return {
            "w_hat": self.w_hat.tolist(),
            "loglik_max": self.loglik_max,
            "iterations": self.iterations,
            "converged": self.converged,
            "boundary_flag": self.boundary_flag,
            "gradient_norm": self.gradient_norm,
        }


@dataclass(frozen=True)
class WilksInterval:
    """Interval for the first weight component of a two-category model."""

    level: float
    lower: float
    upper: float
    at_boundary: tuple
    estimate: float
    threshold: float

    def to_dict(self):
        return {
            "level": self.level,
            "lower": self.lower,
            "upper": self.upper,
            "at_boundary": list(self.at_boundary),
            "estimate": self.estimate,
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class ConfidenceRegion:
    level: float
    contour: np.ndarray = field(repr=False)
    grid_resolution: int
    threshold: float
    calibration: str
    n_loops: int = 1
    window: tuple = None

    @property
    def cartesian(self):
        return barycentric_to_cartesian(self.contour)

    @property
    def area(self):
        return abs(polygon_area(self.cartesian[:-1]))

    def contains(self, w):
        return point_in_polygon(barycentric_to_cartesian(np.asarray(w, dtype=float)),
                                self.cartesian[:-1])

    def to_dict(self):
        return {
            "level": self.level,
            "threshold": self.threshold,
            "calibration": self.calibration,
            "grid_resolution": self.grid_resolution,
            "area": self.area,
            "n_loops": self.n_loops,
            "window": None if self.window is None else {"center": self.window[0],
                                                        "scale": self.window[1]},
            "contour": self.contour,
        }


@dataclass(frozen=True)
class GridEvaluation:
    """Log-likelihood on a regular grid of the 1- or 2-simplex.

    ``index`` holds the integer grid coordinates of each point: ``(i,)`` for
    two categories, ``(i, j, k)`` with ``i + j + k = resolution - 1`` for
    three.
    """

    points: np.ndarray = field(repr=False)
    loglik: np.ndarray = field(repr=False)
    index: np.ndarray = field(repr=False)
    resolution: int
    floor: float
    window: tuple = None

    def argmax(self):
        return self.points[int(np.argmax(self.loglik))]


def _canonical_order(dataset):
    keys = [tuple((t.urn.counts[i], t.outcome.x[i]) for t in dataset.tables)
            for i in range(dataset.K)]
    return sorted(range(dataset.K), key=lambda i: keys[i])


def finite_difference_gradient(dataset, w, step=FD_STEP):
    """Central differences of the log-likelihood in log-ratio coordinates."""
    f = loglik_function(dataset)
    z = to_unconstrained(np.asarray(w, dtype=float))
    grad = np.empty(z.size)
    for j in range(z.size):
        e = np.zeros(z.size)
        e[j] = step
        grad[j] = (f(from_unconstrained(z + e)) - f(from_unconstrained(z - e))) / (2 * step)
    return grad


def _start_points(K):
    starts = [np.ones(K)]
    off = np.ones(K)
    off[0] = 2.0
    starts.append(off)
    off = np.ones(K)
    off[-1] = 2.0
    starts.append(off)
    return [to_unconstrained(s / s.sum()) for s in starts]


def _nelder_mead(objective, z0, step):
    K1 = z0.size
    simplex = np.vstack([z0] + [z0 + step * np.eye(K1)[j] for j in range(K1)])
    return optimize.minimize(objective, z0, method="Nelder-Mead",
                             options={"initial_simplex": simplex, "xatol": XATOL,
                                      "fatol": FATOL, "maxiter": MAX_ITER,
                                      "maxfev": 4 * MAX_ITER})


def fit_mle(dataset, floor=SIMPLEX_FLOOR):
    """Maximize the shared-weight log-likelihood over the simplex.

    Nelder-Mead in log-ratio coordinates from three fixed starts (centre and
    two off-centre points); weights are clamped to ``floor`` so monotone
    likelihoods end on the simplex edge with ``boundary_flag`` set.
    Categories are processed in a canonical order, which makes the estimate
    exactly equivariant under relabeling.
    """
    if not dataset.informative:
        raise FlatLikelihoodError(
            "every table is empty or exhausts its urn; the likelihood is flat")
    K = dataset.K
    if K == 1:
        return MleResult(WeightVector([1.0]), 0.0, 0, True, False, 0.0)
    order = _canonical_order(dataset)
    inverse = np.argsort(order)
    work = dataset.permuted(order) if order != list(range(K)) else dataset
    f = loglik_function(work)

    def weights(z):
        return clamp_to_floor(from_unconstrained(z), floor)

    def objective(z):
        value = f(weights(z))
        return -value if math.isfinite(value) else 1e300

    best = None
    iterations = 0
    for z0 in _start_points(K):
        res = _nelder_mead(objective, z0, 0.5)
        iterations += res.nit
        if best is None or res.fun < best.fun:
            best = res

    success = bool(best.success)
    for _ in range(MAX_POLISH):
        w = weights(best.x)
        boundary = bool(np.any(w <= floor * (1 + 1e-9)))
        if boundary:
            grad_norm = float("nan")
            break
        grad_norm = float(np.linalg.norm(finite_difference_gradient(work, w)))
        if grad_norm <= GRADIENT_TOL:
            break
        res = _nelder_mead(objective, best.x, 1e-3)
        iterations += res.nit
        success = bool(res.success)
        if res.fun <= best.fun:
            best = res
    else:
        w = weights(best.x)
        boundary = bool(np.any(w <= floor * (1 + 1e-9)))
        grad_norm = (float("nan") if boundary else
                     float(np.linalg.norm(finite_difference_gradient(work, w))))

    converged = success and (boundary or grad_norm <= GRADIENT_TOL)
    w_hat = WeightVector(w[inverse])
    return MleResult(w_hat, -float(best.fun), int(iterations), converged, boundary, grad_norm)


def _two_category(dataset):
    if dataset.K != 2:
        raise DomainError(f"Wilks intervals need 2 categories, dataset has {dataset.K}")


def wilks_interval(dataset, level=0.95, mle=None, floor=SIMPLEX_FLOOR):
    """Likelihood-ratio interval for ``w_1`` in a two-category model.

    Each endpoint solves ``2 * (l(w_hat) - l(w)) = chi2_1(level)`` by a
    bracketed root search between the estimate and the simplex edge; when
    the statistic stays below the threshold up to the edge, the edge is
    returned and flagged.
    """
    _two_category(dataset)
    if not 0 < level < 1:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    mle = fit_mle(dataset, floor) if mle is None else mle
    if mle.boundary_flag:
        raise BoundaryIntervalError(
            "MLE lies on the simplex boundary; report a one-sided interval instead")
    if not mle.converged:
        raise WalleniusError("MLE did not converge; interval endpoints would be unreliable")
    f = loglik_function(dataset)
    q = float(stats.chi2.ppf(level, 1))
    w1 = mle.w_hat[0]

    def excess(v):
        return 2.0 * (mle.loglik_max - f(np.array([v, 1.0 - v]))) - q

    ends = []
    flags = []
    for edge in (floor, 1.0 - floor):
        if excess(edge) < 0:
            ends.append(edge)
            flags.append(True)
        else:
            lo, hi = sorted((edge, w1))
            ends.append(optimize.brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                                        maxiter=500))
            flags.append(False)
    return WilksInterval(level, ends[0], ends[1], tuple(flags), w1, q)


def evaluate_grid(dataset, grid_resolution, floor=SIMPLEX_FLOOR, window=None):
    """Log-likelihood on a uniform simplex grid (two or three categories).

    For three categories ``window=(center, scale)`` restricts the grid to
    the sub-triangle with vertices ``center + scale * (e_i - 1/3)``, a
    magnified view around ``center``.
    """
    r = int(grid_resolution)
    if r < 2:
        raise DomainError(f"grid resolution must be at least 2, got {r}")
    K = dataset.K
    if K == 2:
        index = np.arange(r)[:, None]
    elif K == 3:
        index = np.array([(i, j, r - 1 - i - j) for i in range(r) for j in range(r - i)])
    else:
        raise DomainError(f"grid evaluation supports 2 or 3 categories, dataset has {K}")
    if K == 2:
        w1 = floor + (1.0 - 2.0 * floor) * index[:, 0] / (r - 1)
        points = np.stack([w1, 1.0 - w1], axis=1)
    else:
        points = floor + (1.0 - 3.0 * floor) * index / (r - 1)
        if window is not None:
            center, scale = window
            center = np.asarray(center, dtype=float)
            points = center + scale * (points - 1.0 / 3.0)
            if np.any(points < floor * (1 - 1e-9)):
                raise DomainError("grid window extends past the simplex floor")
            window = (tuple(center.tolist()), float(scale))
    loglik = log_likelihood_many(dataset, points)
    return GridEvaluation(points, loglik, index, r, floor, window)


def zoom_window(grid, lr, threshold, center, floor=SIMPLEX_FLOOR, margin=1.5):
    """Sub-triangle around ``center`` covering every grid point with ``lr < threshold``."""
    inside = grid.points[lr < threshold]
    center = np.asarray(center, dtype=float)
    if inside.size == 0:
        spread = 1.0 / (grid.resolution - 1)
    else:
        spread = max(float(np.max(np.abs(inside - center))), 1.0 / (grid.resolution - 1))
    scale = 3.0 * margin * spread
    scale = min(scale, 3.0 * (float(center.min()) - floor))
    if scale >= 1.0 or scale <= 0.0:
        return None
    return tuple(center.tolist()), scale


def lr_threshold(level, calibration="chi2", df=2):
    """Likelihood-ratio cutoff for a region of the given level.

    ``chi2``: the chi-square quantile.  ``relative``: the region where
    ``L / L_max >= 1 - level``, so higher levels still give larger regions.
    """
    if not 0 < level < 1:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    if calibration == "chi2":
        return float(stats.chi2.ppf(level, df))
    if calibration == "relative":
        return -2.0 * math.log(1.0 - level)
    raise DomainError(f"unknown calibration {calibration!r}")


def _triangles(r, vid):
    for i in range(r - 1):
        for j in range(r - 1 - i):
            yield vid[i, j], vid[i + 1, j], vid[i, j + 1]
            if i + j <= r - 3:
                yield vid[i + 1, j], vid[i, j + 1], vid[i + 1, j + 1]


def _boundary_edges(r, vid):
    for i in range(r - 1):
        yield vid[i, 0], vid[i + 1, 0]
        yield vid[0, i], vid[0, i + 1]
        yield vid[i, r - 1 - i], vid[i + 1, r - 2 - i]


def _contour_loops(points, values, r, index):
    """Closed boundaries of ``{values < 0}`` over the triangulated grid."""
    vid = -np.ones((r, r), dtype=np.int64)
    vid[index[:, 0], index[:, 1]] = np.arange(index.shape[0])
    inside = values < 0

    def edge_key(a, b):
        return ("e", min(a, b), max(a, b))

    positions = {}

    def crossing(a, b):
        key = edge_key(a, b)
        if key not in positions:
            t = values[a] / (values[a] - values[b])
            positions[key] = points[a] + t * (points[b] - points[a])
        return key

    adjacency = {}

    def link(p, q):
        adjacency.setdefault(p, []).append(q)
        adjacency.setdefault(q, []).append(p)

    for tri in _triangles(r, vid):
        ins = [inside[v] for v in tri]
        if sum(ins) in (0, 3):
            continue
        keys = [crossing(tri[e], tri[(e + 1) % 3]) for e in range(3)
                if ins[e] != ins[(e + 1) % 3]]
        link(*keys)
    for a, b in _boundary_edges(r, vid):
        if inside[a] and inside[b]:
            link(("v", a), ("v", b))
        elif inside[a] or inside[b]:
            v = a if inside[a] else b
            link(("v", v), crossing(a, b))
    for key in adjacency:
        if key[0] == "v":
            positions[key] = points[key[1]]

    loops = []
    seen = set()
    for start in sorted(adjacency):
        if start in seen:
            continue
        loop = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [k for k in adjacency[cur] if k != prev]
            nxt = nxt[0] if nxt else adjacency[cur][0]
            if nxt == start:
                break
            if nxt in seen:
                break
            loop.append(nxt)
            seen.add(nxt)
            prev, cur = cur, nxt
        loops.append(np.array([positions[k] for k in loop]))
    return loops


def likelihood_region(dataset, levels=(0.95, 0.5, 0.05), grid_resolution=100,
                      calibration="chi2", mle=None, grid=None, floor=SIMPLEX_FLOOR,
                      zoom=True):
    """Likelihood-ratio regions on the 2-simplex, one per level.

    The statistic ``2 * (l(w_hat) - l(w))`` is evaluated on a barycentric
    grid and each contour is traced by linear interpolation along the edges
    of the grid triangles; where a region reaches the grid edge the contour
    follows that edge.  The largest closed loop is returned, closed
    (first point repeated) and oriented counter-clockwise in the ternary
    plane.

    With ``zoom`` (the default) the grid is re-evaluated on a magnified
    window around the estimate covering the largest region with a margin,
    whenever that region is small compared with the simplex.
    """
    if dataset.K != 3:
        raise DomainError(f"regions need 3 categories, dataset has {dataset.K}")
    r = int(grid_resolution)
    if r < 50:
        raise DomainError(f"grid resolution must be at least 50, got {r}")
    mle = fit_mle(dataset, floor) if mle is None else mle
    grid = evaluate_grid(dataset, r, floor) if grid is None else grid
    top = max(mle.loglik_max, float(np.max(grid.loglik)))
    lr = 2.0 * (top - grid.loglik)
    if zoom and grid.window is None:
        widest = max(lr_threshold(level, calibration) for level in levels)
        window = zoom_window(grid, lr, widest, mle.w_hat.w, floor)
        if window is not None:
            grid = evaluate_grid(dataset, r, floor, window)
            top = max(mle.loglik_max, float(np.max(grid.loglik)))
            lr = 2.0 * (top - grid.loglik)
    regions = []
    for level in levels:
        threshold = lr_threshold(level, calibration)
        loops = _contour_loops(grid.points, lr - threshold, r, grid.index)
        if not loops:
            raise WalleniusError(f"no grid point lies inside the {level} region; refine the grid")
        areas = [abs(polygon_area(barycentric_to_cartesian(lp))) for lp in loops]
        loop = loops[int(np.argmax(areas))]
        if polygon_area(barycentric_to_cartesian(loop)) < 0:
            loop = loop[::-1]
        contour = np.vstack([loop, loop[:1]])
        contour.setflags(write=False)
        regions.append(ConfidenceRegion(float(level), contour, r, threshold, calibration,
                                        len(loops), grid.window))
    return regions
