"""Posterior sampling of the weights by a simplex-walk Metropolis chain.

The chain moves in additive log-ratio coordinates ``z = log(w[:-1] / w[-1])``
with symmetric Gaussian steps.  The target is the likelihood times a
symmetric Dirichlet prior; in ``z`` coordinates the density picks up the
Jacobian ``prod_i w_i``, so the log target is

    loglik(w) + prior_concentration * sum_i log(w_i)

up to a constant.  Proposals with a component below the weight floor are
rejected.  The optional auto-tune adapts the step during burn-in only.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy.special import gammaln

from .core import WEIGHT_FLOOR, WeightVector, loglik_function
from .exceptions import DomainError, SampleSizeError
from .simplex import from_unconstrained, to_unconstrained

__all__ = [
    "SwmConfig",
    "Chain",
    "CredibleInterval",
    "ChainDiagnostics",
    "run_swm",
    "credible_intervals",
    "chain_diagnostics",
    "effective_sample_size",
]

DEFAULT_STEP = 0.15
TARGET_ACCEPT = 0.30
TUNE_BATCH = 100
STALL_WINDOW = 1000


@dataclass(frozen=True)
class SwmConfig:
    """Sampler settings.

    ``iterations`` counts retained draws; ``burn_in`` further draws are run
    first and discarded (default: 10% of ``iterations``).
    """

    iterations: int
    burn_in: int = None
    step_scale: float = DEFAULT_STEP
    seed: int = 0
    w0: WeightVector = None
    prior_concentration: float = 1.0
    autotune: bool = False

    def __post_init__(self):
        iterations = int(self.iterations)
        burn_in = iterations // 10 if self.burn_in is None else int(self.burn_in)
        if not iterations > burn_in >= 0:
            raise DomainError(f"need iterations > burn_in >= 0, got {iterations}, {burn_in}")
        if not self.step_scale > 0:
            raise DomainError(f"step_scale must be positive, got {self.step_scale}")
        if not self.prior_concentration > 0:
            raise DomainError(
                f"prior_concentration must be positive, got {self.prior_concentration}")
        w0 = self.w0
        if w0 is not None and not isinstance(w0, WeightVector):
            w0 = WeightVector(w0)
        object.__setattr__(self, "iterations", iterations)
        object.__setattr__(self, "burn_in", burn_in)
        object.__setattr__(self, "w0", w0)

    def to_dict(self):
        return {
            "iterations": self.iterations,
            "burn_in": self.burn_in,
            "step_scale": self.step_scale,
            "seed": self.seed,
            "w0": None if self.w0 is None else self.w0.tolist(),
            "prior_concentration": self.prior_concentration,
            "autotune": self.autotune,
        }


@dataclass(frozen=True)
class Chain:
    samples: np.ndarray = field(repr=False)
    log_post: np.ndarray = field(repr=False)
    accepted: np.ndarray = field(repr=False)
    accept_rate: float
    config: SwmConfig
    final_step_scale: float
    labels: tuple = None
    warnings: tuple = ()

    def __len__(self):
        return self.samples.shape[0]

    @property
    def K(self):
        return self.samples.shape[1]

    def to_dict(self):
        return {
            "n_samples": len(self),
            "accept_rate": self.accept_rate,
            "final_step_scale": self.final_step_scale,
            "config": self.config,
            "labels": list(self.labels) if self.labels else None,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class CredibleInterval:
    level: float
    lower: np.ndarray
    upper: np.ndarray
    posterior_mean: WeightVector

    def to_dict(self):
        return {
            "level": self.level,
            "lower": self.lower,
            "upper": self.upper,
            "posterior_mean": self.posterior_mean.tolist(),
        }


@dataclass(frozen=True)
class ChainDiagnostics:
    accept_rate: float
    accept_rate_recount: float
    lag1_autocorrelation: np.ndarray
    degenerate: np.ndarray
    ess: np.ndarray
    running_means: np.ndarray = field(repr=False)

    def to_dict(self, max_points=200):
        n = self.running_means.shape[0]
        stride = max(1, math.ceil(n / max_points))
        idx = np.unique(np.r_[np.arange(0, n, stride), n - 1])
        return {
            "accept_rate": self.accept_rate,
            "accept_rate_recount": self.accept_rate_recount,
            "lag1_autocorrelation": self.lag1_autocorrelation,
            "degenerate": self.degenerate,
            "ess": self.ess,
            "running_means": {"index": idx + 1, "values": self.running_means[idx]},
        }


def _log_dirichlet(w, alpha):
    K = w.size
    return (gammaln(K * alpha) - K * gammaln(alpha)
            + (alpha - 1.0) * float(np.sum(np.log(w))))


def run_swm(dataset, config, K=None, labels=None):
    """Run the sampler; ``dataset=None`` samples the prior (``K`` from ``w0`` or ``K``)."""
    if dataset is not None:
        if len(dataset) == 0:
            raise DomainError("dataset has no tables")
        K = dataset.K
        labels = dataset.labels
        loglik = loglik_function(dataset)
    else:
        if K is None:
            if config.w0 is None:
                raise DomainError("without data, give K or w0")
            K = config.w0.K
        loglik = None
    if K < 2:
        raise DomainError("sampling needs at least two categories")
    w0 = config.w0 if config.w0 is not None else WeightVector(np.ones(K))
    if w0.K != K:
        raise DomainError(f"w0 has {w0.K} components, model has {K}")

    alpha = float(config.prior_concentration)
    w = np.array(w0.w)
    ll = loglik(w) if loglik is not None else 0.0
    if not math.isfinite(ll):
        raise DomainError("log-likelihood is -inf at the starting point w0")
    z = to_unconstrained(w)
    log_target = ll + alpha * float(np.sum(np.log(w)))

    total = config.burn_in + config.iterations
    rng = np.random.default_rng(int(config.seed) & ((1 << 64) - 1))
    steps = rng.standard_normal((total, K - 1))
    log_u = np.log(rng.random(total))

    samples = np.empty((config.iterations, K))
    log_post = np.empty(config.iterations)
    accepted = np.zeros(config.iterations, dtype=bool)
    scale = float(config.step_scale)
    batch_accepts = 0
    for it in range(total):
        z_new = z + scale * steps[it]
        w_new = from_unconstrained(z_new)
        ok = False
        if w_new.min() >= WEIGHT_FLOOR:
            ll_new = loglik(w_new) if loglik is not None else 0.0
            if math.isfinite(ll_new):
                target_new = ll_new + alpha * float(np.sum(np.log(w_new)))
                if log_u[it] < target_new - log_target:
                    z, w, ll, log_target = z_new, w_new, ll_new, target_new
                    ok = True
        if it < config.burn_in:
            if config.autotune:
                batch_accepts += ok
                if (it + 1) % TUNE_BATCH == 0:
                    scale *= math.exp(batch_accepts / TUNE_BATCH - TARGET_ACCEPT)
                    batch_accepts = 0
            continue
        i = it - config.burn_in
        samples[i] = w
        log_post[i] = ll + _log_dirichlet(w, alpha)
        accepted[i] = ok

    notes = []
    head = accepted[:STALL_WINDOW]
    if head.size and not head.any():
        msg = f"no proposal accepted in the first {head.size} post-burn-in iterations"
        notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    for arr in (samples, log_post, accepted):
        arr.setflags(write=False)
    return Chain(samples, log_post, accepted, float(accepted.mean()), config, scale,
                 tuple(labels) if labels is not None else None, tuple(notes))


def credible_intervals(chain, level=0.95):
    """Equal-tailed per-component intervals from sorted-sample quantiles."""
    if not 0 < level < 1:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    samples = np.asarray(chain.samples)
    if samples.shape[0] < 100:
        raise SampleSizeError(f"need at least 100 samples, chain has {samples.shape[0]}")
    tail = (1.0 - level) / 2.0
    lower, upper = np.quantile(samples, [tail, 1.0 - tail], axis=0)
    return CredibleInterval(float(level), lower, upper, WeightVector(samples.mean(axis=0)))


def _autocorrelation(x):
    n = x.size
    xc = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n]
    return acov / acov[0]


def effective_sample_size(x):
    """Geyer's initial positive sequence estimate for one series.

    Sums autocorrelation pairs ``rho[2k] + rho[2k+1]`` while they stay
    positive.  A constant series returns 1.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2 or np.ptp(x) == 0:
        return 1.0
    rho = _autocorrelation(x)
    tau = -1.0
    for k in range(n // 2):
        pair = rho[2 * k] + rho[2 * k + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
    return float(n / tau)


def chain_diagnostics(chain):
    samples = np.asarray(chain.samples)
    n, K = samples.shape
    if n == 0:
        raise SampleSizeError("chain is empty")
    lag1 = np.ones(K)
    degenerate = np.zeros(K, dtype=bool)
    ess = np.empty(K)
    for k in range(K):
        col = samples[:, k]
        if n < 2 or np.ptp(col) == 0:
            degenerate[k] = True
            ess[k] = 1.0
            continue
        xc = col - col.mean()
        lag1[k] = float(np.dot(xc[:-1], xc[1:]) / np.dot(xc, xc))
        ess[k] = effective_sample_size(col)
    running = np.cumsum(samples, axis=0) / np.arange(1, n + 1)[:, None]
    recount = float(np.count_nonzero(chain.accepted) / n)
    return ChainDiagnostics(chain.accept_rate, recount, lag1, degenerate, ess, running)
