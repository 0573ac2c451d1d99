"""Sampling distribution of the weight MLE under the fitted model.

The ideal bootstrap enumerates every outcome of a single table and weights
the refitted estimate by the outcome's probability; the parametric
bootstrap simulates whole datasets instead.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .core import DrawOutcome, WeightVector, mix64, pmf, simulate_draws
from .data import Dataset, Table
from .exceptions import CapacityError, DomainError, FlatLikelihoodError
from .inference import SIMPLEX_FLOOR, fit_mle

__all__ = [
    "IDEAL",
    "PARAMETRIC",
    "Replicate",
    "BootstrapDistribution",
    "support_size",
    "enumerate_support",
    "ideal_bootstrap",
    "parametric_bootstrap",
]

IDEAL = "ideal"
PARAMETRIC = "parametric"
SUPPORT_CAP = 10**5


@dataclass(frozen=True)
class Replicate:
    w_star: WeightVector
    mass: float
    converged: bool = True
    boundary: bool = False
    outcome: tuple = None

    def to_dict(self):
        return {
            "w_star": None if self.w_star is None else self.w_star.tolist(),
            "mass": self.mass,
            "converged": self.converged,
            "boundary": self.boundary,
            "outcome": None if self.outcome is None else list(self.outcome),
        }


@dataclass(frozen=True)
class BootstrapDistribution:
    replicates: tuple = field(repr=False)
    kind: str
    se: np.ndarray
    mean: np.ndarray
    B: int = None
    n_failed: int = 0

    def weights_array(self):
        """Replicate estimates of converged replicates as a ``(R, K)`` array."""
        return np.array([r.w_star.w for r in self.replicates if r.converged])

    def masses(self):
        return np.array([r.mass for r in self.replicates if r.converged])

    def to_dict(self):
        return {
            "kind": self.kind,
            "B": self.B,
            "se": self.se,
            "mean": self.mean,
            "n_failed": self.n_failed,
            "replicates": list(self.replicates),
        }


def support_size(counts, n):
    """Number of draws ``x`` with ``sum(x) = n`` and ``0 <= x_i <= counts_i``."""
    poly = [1]
    for m in counts:
        nxt = [0] * min(len(poly) + m, n + 1)
        for i, c in enumerate(poly):
            if c:
                for j in range(i, min(i + m, n) + 1):
                    nxt[j] += c
        poly = nxt
    return poly[n] if n < len(poly) else 0


def enumerate_support(counts, n):
    """Feasible draws of ``n`` balls in lexicographic order."""
    counts = tuple(counts)
    suffix = [0] * (len(counts) + 1)
    for i in range(len(counts) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + counts[i]

    def rec(i, left):
        if i == len(counts) - 1:
            if left <= counts[i]:
                yield (left,)
            return
        for v in range(max(0, left - suffix[i + 1]), min(counts[i], left) + 1):
            for rest in rec(i + 1, left - v):
                yield (v,) + rest

    if n < 0 or n > suffix[0]:
        return
    yield from rec(0, n)


def _fit(dataset, floor):
    try:
        res = fit_mle(dataset, floor)
    except FlatLikelihoodError:
        return None, False, False
    return res.w_hat, res.converged, res.boundary_flag


def ideal_bootstrap(urn, w_hat, n, support_cap=SUPPORT_CAP, floor=SIMPLEX_FLOOR):
    """Exact distribution of the MLE over every outcome of one table.

    Outcomes with a monotone likelihood are kept, with the estimate on the
    simplex floor and ``boundary`` set.
    """
    if not isinstance(w_hat, WeightVector):
        w_hat = WeightVector(w_hat)
    if w_hat.K != urn.K:
        raise DomainError(f"weights have {w_hat.K} components, urn has {urn.K}")
    n = int(n)
    if not 0 < n < urn.total:
        raise FlatLikelihoodError(
            f"drawing {n} of {urn.total} balls leaves a single, uninformative outcome")
    size = support_size(urn.counts, n)
    if size > support_cap:
        raise CapacityError(
            f"support has {size} outcomes (cap {support_cap}); use parametric_bootstrap")
    replicates = []
    for x in enumerate_support(urn.counts, n):
        table = Table("x", urn, DrawOutcome(x))
        w_star, ok, boundary = _fit(Dataset((table,)), floor)
        replicates.append(Replicate(w_star, pmf(urn, w_hat, x), ok, boundary, x))
    good = [r for r in replicates if r.converged]
    W = np.array([r.w_star.w for r in good])
    mass = np.array([r.mass for r in good])
    mean = mass @ W
    se = np.sqrt(mass @ (W - mean) ** 2)
    return BootstrapDistribution(tuple(replicates), IDEAL, se, mean, None,
                                 len(replicates) - len(good))


def parametric_bootstrap(dataset, w_hat, B, seed, derive_seed=mix64, floor=SIMPLEX_FLOOR):
    """Monte Carlo bootstrap: simulate ``B`` datasets from ``w_hat`` and refit.

    Replicate ``b`` draws table ``t`` with seed
    ``derive_seed(derive_seed(seed, b), t)``, so replicate ``b`` does not
    depend on ``B`` and replicates can be computed in any order.  Replicates
    whose fit fails are kept with ``converged=False`` and left out of ``se``.
    """
    if not isinstance(w_hat, WeightVector):
        w_hat = WeightVector(w_hat)
    B = int(B)
    if B < 2:
        raise DomainError(f"need at least 2 bootstrap replicates, got B={B}")
    if w_hat.K != dataset.K:
        raise DomainError(f"weights have {w_hat.K} components, dataset has {dataset.K}")
    fits = {}
    replicates = []
    for b in range(B):
        rep_seed = derive_seed(seed, b)
        draws = tuple(
            tuple(simulate_draws(t.urn, w_hat, t.n, 1, derive_seed(rep_seed, i))[0].tolist())
            for i, t in enumerate(dataset.tables))
        if draws not in fits:
            tables = tuple(Table(t.table_id, t.urn, DrawOutcome(x))
                           for t, x in zip(dataset.tables, draws))
            fits[draws] = _fit(Dataset(tables, binding=dataset.binding), floor)
        w_star, ok, boundary = fits[draws]
        replicates.append(Replicate(w_star, 1.0 / B, ok, boundary,
                                    draws[0] if len(draws) == 1 else None))
    good = [r for r in replicates if r.converged]
    if good:
        W = np.array([r.w_star.w for r in good])
        mean = W.mean(axis=0)
        se = W.std(axis=0, ddof=1) if len(good) > 1 else np.zeros(dataset.K)
    else:
        mean = np.full(dataset.K, math.nan)
        se = np.full(dataset.K, math.nan)
    return BootstrapDistribution(tuple(replicates), PARAMETRIC, se, mean, B,
                                 B - len(good))
