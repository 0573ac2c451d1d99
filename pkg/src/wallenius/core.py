"""Multivariate Wallenius noncentral hypergeometric distribution.

Balls are drawn one at a time without replacement from an urn holding
``m_i`` balls of category ``i``; each remaining ball of category ``i`` is
picked with probability proportional to the category weight ``w_i``.  The
probability of ending with ``x_i`` balls of each category is

    P(x) = prod_i C(m_i, x_i) * int_0^1 prod_i (1 - t**(w_i / D))**x_i dt,
    D    = sum_i w_i * (m_i - x_i).

The integral is evaluated after the substitution ``t = u**k`` with ``k``
chosen so the integrand peaks at ``u = 1/2``, in log space, with
adaptive Gauss-Legendre quadrature.  :func:`pmf_oracle` computes the same
mass by dynamic programming over the sequential draws and serves as an
independent check.
"""

from dataclasses import dataclass
import math

import numba
import numpy as np

from .exceptions import CapacityError, DomainError
from .quadrature import (DEFAULT_ATOL, DEFAULT_MAX_LEVELS, DEFAULT_NODES, DEFAULT_RTOL,
                         gauss_legendre, make_integrator)

__all__ = [
    "WEIGHT_FLOOR",
    "UrnSpec",
    "WeightVector",
    "DrawOutcome",
    "LogDensity",
    "pmf",
    "log_pmf",
    "log_pmf_rows",
    "pmf_oracle",
    "log_likelihood",
    "log_likelihood_many",
    "simulate_draw",
    "simulate_draws",
    "mix64",
    "loglik_function",
]

#: Smallest admissible normalized weight component.
WEIGHT_FLOOR = 1e-9
#: Masses below this are reported through ``LogDensity.underflow_flag``.
UNDERFLOW_FLOOR = 1e-300
#: Default cap on the number of DP states in :func:`pmf_oracle`.
ORACLE_STATE_CAP = 10**6

_LN2 = math.log(2.0)
#: Integrand exponents above this get extra initial panel edges.
STEEP_EXPONENT = 4.0
_MASK64 = (1 << 64) - 1


def mix64(seed, index):
    """Derive a child seed from ``seed`` and an integer ``index``.

    SplitMix64 finalizer applied to ``seed + golden * (index + 1)`` modulo
    2**64.  Stable across platforms and releases.
    """
    z = (int(seed) + 0x9E3779B97F4A7C15 * (int(index) + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class WeightVector:
    """Positive category weights, stored normalized to sum to one.

    Weights are only identified up to scale, so ``WeightVector([2, 1])`` and
    ``WeightVector([4, 2])`` are equal.
    """

    __slots__ = ("_w",)

    def __init__(self, values):
        arr = np.array(values, dtype=float).ravel()
        if arr.size < 1:
            raise DomainError("weight vector must have at least one component")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise DomainError(f"weights must be finite and strictly positive, got {arr.tolist()}")
        arr = arr / arr.sum()
        if arr.min() < WEIGHT_FLOOR:
            raise DomainError(
                f"normalized weight {arr.min():.3g} is below the floor {WEIGHT_FLOOR:g}")
        arr.setflags(write=False)
        self._w = arr

    @property
    def w(self):
        return self._w

    @property
    def K(self):
        return self._w.size

    def __len__(self):
        return self._w.size

    def __iter__(self):
        return iter(self._w.tolist())

    def __getitem__(self, i):
        return float(self._w[i])

    def __array__(self, dtype=None, copy=None):
        return self._w if dtype is None else self._w.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, WeightVector):
            return NotImplemented
        return np.array_equal(self._w, other._w)

    def __hash__(self):
        return hash(self._w.tobytes())

    def __repr__(self):
        return f"WeightVector({self._w.tolist()})"

    def tolist(self):
        return self._w.tolist()

    def permuted(self, order):
        """Weights with components reordered as ``w[order]``."""
        return WeightVector(self._w[list(order)])


@dataclass(frozen=True)
class UrnSpec:
    """Ball counts per category and the category labels."""

    counts: tuple
    labels: tuple = None

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) < 1:
            raise DomainError("urn needs at least one category")
        if any(c < 0 for c in counts):
            raise DomainError(f"urn counts must be nonnegative, got {counts}")
        if sum(counts) < 1:
            raise DomainError("urn must hold at least one ball")
        labels = self.labels
        if labels is None:
            labels = tuple(f"c{i + 1}" for i in range(len(counts)))
        labels = tuple(str(s) for s in labels)
        if len(labels) != len(counts):
            raise DomainError(f"{len(labels)} labels for {len(counts)} categories")
        if len(set(labels)) != len(labels):
            raise DomainError(f"category labels must be unique, got {labels}")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "labels", labels)

    @property
    def K(self):
        return len(self.counts)

    @property
    def total(self):
        return sum(self.counts)


@dataclass(frozen=True)
class DrawOutcome:
    """Number of balls drawn from each category."""

    x: tuple

    def __post_init__(self):
        x = tuple(int(v) for v in self.x)
        if any(v < 0 for v in x):
            raise DomainError(f"draw counts must be nonnegative, got {x}")
        object.__setattr__(self, "x", x)

    @property
    def n(self):
        return sum(self.x)

    @property
    def K(self):
        return len(self.x)

    def feasible_for(self, urn):
        return self.K == urn.K and all(v <= m for v, m in zip(self.x, urn.counts))


@dataclass(frozen=True)
class LogDensity:
    """Natural-log mass or likelihood with an underflow indicator."""

    value: float
    underflow_flag: bool

    def __float__(self):
        return self.value


def _check_dims(urn, w, x):
    if w.K != urn.K:
        raise DomainError(f"weight vector has {w.K} components, urn has {urn.K}")
    if x is not None and x.K != urn.K:
        raise DomainError(f"draw has {x.K} components, urn has {urn.K}")


@numba.njit(cache=True)
def _log1mexp(y):
    """log(1 - exp(y)) for y < 0."""
    if y > -_LN2:
        return math.log(-math.expm1(y))
    return math.log1p(-math.exp(y))


@numba.njit(cache=True)
def _integrand(u, p):
    # p = [log k - shift, k - 1, K, c_1..c_K, x_1..x_K]
    K = int(p[2])
    lu = math.log(u)
    s = p[0] + p[1] * lu
    for i in range(K):
        xi = p[3 + K + i]
        if xi > 0.0:
            s += xi * _log1mexp(p[3 + i] * lu)
    return math.exp(s)


_integrate = make_integrator(_integrand)


@numba.njit(cache=True)
def _peak_exponent(a, x, n):
    """Substitution power putting the transformed integrand's peak at u = 1/2.

    Solves ``sum_i x_i c_i / (2**c_i - 1) = k - 1`` with ``c_i = k a_i``.  The
    left side minus ``k - 1`` is convex, decreasing in ``k`` and positive at
    ``k = 1``, so Newton's method from 1 climbs monotonically to the root.
    """
    k = 1.0
    for _ in range(50):
        h = 1.0 - k
        dh = -1.0
        for i in range(a.size):
            if x[i] == 0.0:
                continue
            c = k * a[i]
            if c < 1e-8:
                f = 1.0 / _LN2 - 0.5 * c
                df = -0.5
            else:
                # written in q = 2**-c so large c cannot overflow
                q = math.exp(-c * _LN2)
                one_q = -math.expm1(-c * _LN2)
                f = c * q / one_q
                df = q * (one_q - _LN2 * c) / (one_q * one_q)
            h += x[i] * f
            dh += x[i] * a[i] * df
        step = h / dh
        k -= step
        if not abs(step) > 1e-10 * k:
            break
    if not math.isfinite(k):
        return 1.0
    return min(max(k, 1.0), n / _LN2 + 2.0)


@numba.njit(cache=True)
def _log_pmf_row(m, x, w, nodes, weights, atol, rtol, max_levels):
    K = m.size
    n = 0.0
    D = 0.0
    for i in range(K):
        if x[i] > m[i] or x[i] < 0.0:
            return -np.inf
        n += x[i]
        D += w[i] * (m[i] - x[i])
    if n == 0.0 or D == 0.0:
        return 0.0
    log_binom = 0.0
    a = np.empty(K)
    for i in range(K):
        log_binom += math.lgamma(m[i] + 1.0) - math.lgamma(x[i] + 1.0) - math.lgamma(m[i] - x[i] + 1.0)
        a[i] = w[i] / D
    k = _peak_exponent(a, x, n)
    shift = math.log(k) - (k - 1.0) * _LN2
    params = np.empty(3 + 2 * K)
    params[1] = k - 1.0
    params[2] = K
    for i in range(K):
        c = k * a[i]
        params[3 + i] = c
        params[3 + K + i] = x[i]
        if x[i] > 0.0:
            shift += x[i] * _log1mexp(-c * _LN2)
    params[0] = math.log(k) - shift
    # a factor (1 - u**c)**x with large c rises from 0 and drops back to 1
    # over -log(u) ~ 1/c just below u = 1; edges graded geometrically in
    # -log(u) let the first pass resolve both the drop and its tail
    n_breaks = 3
    for i in range(K):
        c = params[3 + i]
        if x[i] > 0.0 and c > STEEP_EXPONENT:
            n_breaks += int(math.log2(c)) + 4
    breaks = np.empty(n_breaks)
    breaks[0] = 0.0
    breaks[1] = 0.5
    breaks[2] = 1.0
    j = 3
    for i in range(K):
        c = params[3 + i]
        if x[i] > 0.0 and c > STEEP_EXPONENT:
            s = _LN2 / (8.0 * c)
            while j < n_breaks:
                breaks[j] = math.exp(-s) if s < _LN2 else 0.5
                s *= 2.0
                j += 1
    breaks.sort()
    total, _ = _integrate(params, breaks, nodes, weights, atol, rtol, max_levels,
                          math.exp(min(max(shift, -700.0), 700.0)))
    if total <= 0.0:
        return -np.inf
    return log_binom + shift + math.log(total)


@numba.njit(cache=True)
def _log_pmf_batch(M, X, W, nodes, weights, atol, rtol, max_levels):
    out = np.empty(M.shape[0])
    for r in range(M.shape[0]):
        out[r] = _log_pmf_row(M[r], X[r], W[r], nodes, weights, atol, rtol, max_levels)
    return out


@numba.njit(cache=True)
def _loglik_points(M, X, mult, P, nodes, weights, atol, rtol, max_levels):
    out = np.empty(P.shape[0])
    for p in range(P.shape[0]):
        s = 0.0
        for r in range(M.shape[0]):
            v = _log_pmf_row(M[r], X[r], P[p], nodes, weights, atol, rtol, max_levels)
            if v == -np.inf:
                s = -np.inf
                break
            s += mult[r] * v
        out[p] = s
    return out


def _quad_args():
    nodes, weights = gauss_legendre(DEFAULT_NODES)
    return nodes, weights, DEFAULT_ATOL, DEFAULT_RTOL, DEFAULT_MAX_LEVELS


def log_pmf_rows(counts, x, w):
    """Vectorized log mass for rows of (counts, x, weights).

    The arrays broadcast to shape ``(B, K)``.  Weights need not be normalized
    but must be positive.  Infeasible rows (``x > counts``) give ``-inf``.
    """
    counts, x, w = np.broadcast_arrays(*(np.atleast_2d(np.asarray(v, dtype=np.float64))
                                         for v in (counts, x, w)))
    return _log_pmf_batch(np.ascontiguousarray(counts), np.ascontiguousarray(x),
                          np.ascontiguousarray(w), *_quad_args())


def _prepare(urn, w, x):
    if not isinstance(w, WeightVector):
        w = WeightVector(w)
    if not isinstance(x, DrawOutcome):
        x = DrawOutcome(x)
    _check_dims(urn, w, x)
    return w, x


def log_pmf(urn, w, x):
    """Natural log of :func:`pmf`; ``-inf`` outside the support."""
    w, x = _prepare(urn, w, x)
    return min(0.0, float(log_pmf_rows(urn.counts, x.x, w.w)[0]))


def pmf(urn, w, x):
    """Probability of drawing ``x`` from ``urn`` under weights ``w``.

    Returns exactly 0 for a draw exceeding the urn's stock in some category.
    Raises :class:`DomainError` on dimension mismatches.
    """
    return math.exp(log_pmf(urn, w, x))


def pmf_oracle(urn, w, x, state_cap=ORACLE_STATE_CAP):
    """Exact mass by dynamic programming over the sequence of draws.

    The state is the vector of balls already drawn per category; a draw from
    category ``i`` happens with probability ``w_i r_i / sum_j w_j r_j`` where
    ``r`` is the remaining stock.  Only states below ``x`` are visited.
    """
    w, x = _prepare(urn, w, x)
    n_states = math.prod(c + 1 for c in urn.counts)
    if n_states > state_cap:
        raise CapacityError(f"oracle needs {n_states} states, cap is {state_cap}")
    if not x.feasible_for(urn):
        return 0.0
    m = np.array(urn.counts)
    wt = w.w
    K = urn.K
    prob = np.zeros(tuple(v + 1 for v in x.x))
    prob[(0,) * K] = 1.0
    for d in np.ndindex(prob.shape):
        if not any(d):
            continue
        total = 0.0
        for i in range(K):
            if d[i] == 0:
                continue
            prev = list(d)
            prev[i] -= 1
            p_prev = prob[tuple(prev)]
            if p_prev == 0.0:
                continue
            remaining = m - np.array(prev)
            total += p_prev * wt[i] * remaining[i] / float(np.dot(wt, remaining))
        prob[d] = total
    return float(prob[tuple(x.x)])


def log_likelihood(dataset, w):
    """Sum of log masses of every table of ``dataset`` under shared weights ``w``.

    ``underflow_flag`` is set when some table's mass is below the underflow
    floor (or zero), in which case the value may be ``-inf``.
    """
    if not isinstance(w, WeightVector):
        w = WeightVector(w)
    counts, x, mult = dataset.distinct_tables()
    if w.K != counts.shape[1]:
        raise DomainError(f"weights have {w.K} components, dataset has {counts.shape[1]}")
    rows = log_pmf_rows(counts, x, w.w)
    value = float(log_likelihood_many(dataset, w.w[None, :])[0])
    return LogDensity(value, underflow_flag=bool(np.any(rows < math.log(UNDERFLOW_FLOOR))))


def log_likelihood_many(dataset, weights):
    """Log-likelihood of ``dataset`` at each row of ``weights`` (shape ``(P, K)``).

    Identical tables are evaluated once and weighted by their multiplicity.
    """
    weights = np.ascontiguousarray(np.atleast_2d(np.asarray(weights, dtype=np.float64)))
    counts, x, mult = dataset.distinct_tables()
    if weights.shape[1] != counts.shape[1]:
        raise DomainError(f"weights have {weights.shape[1]} components, dataset has {counts.shape[1]}")
    return _loglik_points(counts, x, mult, weights, *_quad_args())


def _draw_batch(rng, counts, w, n, size):
    remaining = np.tile(np.asarray(counts, dtype=float), (size, 1))
    drawn = np.zeros((size, len(counts)), dtype=np.int64)
    rows = np.arange(size)
    for _ in range(n):
        mass = remaining * w
        cum = np.cumsum(mass, axis=1)
        target = rng.random(size) * cum[:, -1]
        cat = (cum <= target[:, None]).sum(axis=1)
        # guard against landing on an exhausted category through rounding
        cat = np.minimum(cat, len(counts) - 1)
        bad = remaining[rows, cat] == 0
        if np.any(bad):
            cat[bad] = np.argmax(remaining[bad] > 0, axis=1)
        remaining[rows, cat] -= 1
        drawn[rows, cat] += 1
    return drawn


def simulate_draws(urn, w, n, size, seed):
    """``size`` independent draws of ``n`` balls, as an int array ``(size, K)``."""
    if not isinstance(w, WeightVector):
        w = WeightVector(w)
    _check_dims(urn, w, None)
    n = int(n)
    if n < 0 or n > urn.total:
        raise DomainError(f"cannot draw {n} balls from an urn of {urn.total}")
    rng = np.random.default_rng(int(seed) & _MASK64)
    return _draw_batch(rng, urn.counts, w.w, n, int(size))


def simulate_draw(urn, w, n, seed):
    """Sequential weighted draws without replacement; deterministic per ``seed``."""
    return DrawOutcome(tuple(simulate_draws(urn, w, n, 1, seed)[0].tolist()))


def loglik_function(dataset):
    """Fast closure ``f(w) -> float`` for repeated log-likelihood evaluation.

    ``w`` is a raw positive array (no normalization or floor checks).
    """
    counts, x, mult = dataset.distinct_tables()
    args = _quad_args()

    def f(w):
        pts = np.ascontiguousarray(np.asarray(w, dtype=np.float64).reshape(1, -1))
        return float(_loglik_points(counts, x, mult, pts, *args)[0])

    return f
