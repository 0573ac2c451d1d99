import warnings

import numpy as np
import pytest

from wallenius import (Dataset, DomainError, SampleSizeError, SwmConfig,
                       chain_diagnostics, credible_intervals, effective_sample_size, fit_mle,
                       log_likelihood, run_swm)
from wallenius.core import WEIGHT_FLOOR, loglik_function
from wallenius import swm
from wallenius.swm import Chain


def _constant_chain(w, n=200):
    samples = np.tile(np.asarray(w, dtype=float), (n, 1))
    config = SwmConfig(n, 0, w0=w)
    return Chain(samples, np.zeros(n), np.zeros(n, dtype=bool), 0.0, config, 0.15)


class TestConfig:
    def test_defaults(self):
        cfg = SwmConfig(1000)
        assert cfg.burn_in == 100 and cfg.step_scale == 0.15 and cfg.prior_concentration == 1.0

    @pytest.mark.parametrize("kwargs", [dict(iterations=10, burn_in=10),
                                        dict(iterations=10, burn_in=-1),
                                        dict(iterations=10, step_scale=0),
                                        dict(iterations=10, prior_concentration=-1)])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            SwmConfig(**kwargs)


class TestRun:
    def test_uninformative_data_gives_uniform_means(self):
        ds = Dataset.from_arrays([[3, 3, 3]] * 2, [[0, 0, 0]] * 2)
        chain = run_swm(ds, SwmConfig(100_000, 5_000, seed=3, autotune=True))
        np.testing.assert_allclose(chain.samples.mean(axis=0), 1 / 3, atol=0.02)

    def test_samples_normalized_and_floored(self, two_cat):
        chain = run_swm(two_cat, SwmConfig(2_000, 200, seed=1, step_scale=2.0))
        np.testing.assert_allclose(chain.samples.sum(axis=1), 1.0, atol=1e-12)
        assert chain.samples.min() >= WEIGHT_FLOOR
        assert chain.samples.shape == (2_000, 2)

    def test_reproducible(self, three_cat):
        cfg = SwmConfig(500, 50, seed=42, w0=[0.6, 0.3, 0.1])
        a, b = run_swm(three_cat, cfg), run_swm(three_cat, cfg)
        assert np.array_equal(a.samples, b.samples)
        assert np.array_equal(a.log_post, b.log_post)
        c = run_swm(three_cat, SwmConfig(500, 50, seed=43, w0=[0.6, 0.3, 0.1]))
        assert not np.array_equal(a.samples, c.samples)

    def test_accept_rate_bookkeeping(self, two_cat):
        chain = run_swm(two_cat, SwmConfig(3_000, 300, seed=5))
        assert chain.accept_rate == np.count_nonzero(chain.accepted) / len(chain)
        # a rejected move repeats the previous sample
        stay = ~chain.accepted[1:]
        assert np.array_equal(chain.samples[1:][stay], chain.samples[:-1][stay])

    def test_log_post_matches_target(self, two_cat):
        chain = run_swm(two_cat, SwmConfig(50, 5, seed=2, prior_concentration=2.0))
        from scipy.stats import dirichlet
        for w, lp in zip(chain.samples[::10], chain.log_post[::10]):
            expected = log_likelihood(two_cat, w).value + dirichlet.logpdf(w, [2.0, 2.0])
            assert lp == pytest.approx(expected, rel=1e-10)

    def test_normalized_proposals_leave_likelihood_unchanged(self, two_cat):
        f = loglik_function(two_cat)
        w = np.array([0.3, 0.7])
        assert f(w * 17.0) == pytest.approx(f(w), rel=1e-12)

    def test_prior_only(self):
        chain = run_swm(None, SwmConfig(300, 30, w0=[0.6, 0.3, 0.1]))
        assert chain.samples.shape == (300, 3)
        with pytest.raises(DomainError):
            run_swm(None, SwmConfig(300, 30))

    def test_invalid_start(self, two_cat, monkeypatch):
        # feasible tables have finite log mass at any admissible w, so force it
        monkeypatch.setattr(swm, "loglik_function", lambda ds: lambda w: -np.inf)
        with pytest.raises(DomainError, match="w0"):
            run_swm(two_cat, SwmConfig(100, 10))

    def test_stall_warning(self, three_cat):
        mle = fit_mle(three_cat)
        with pytest.warns(RuntimeWarning, match="no proposal accepted"):
            chain = run_swm(three_cat, SwmConfig(1_500, 10, seed=0, step_scale=1e4, w0=mle.w_hat))
        assert chain.warnings
        assert chain.accept_rate == 0.0

    def test_no_warning_when_mixing(self, two_cat):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            chain = run_swm(two_cat, SwmConfig(1_500, 100, seed=0))
        assert chain.warnings == ()

    def test_autotune_freezes_after_burn_in(self, two_cat):
        chain = run_swm(two_cat, SwmConfig(5_000, 2_000, seed=9, autotune=True, step_scale=0.01))
        assert chain.final_step_scale > 0.1
        assert 0.15 < chain.accept_rate < 0.5

    def test_posterior_mean_near_mle(self, three_cat):
        mle = fit_mle(three_cat)
        chain = run_swm(three_cat, SwmConfig(10_000, 2_000, seed=1, w0=mle.w_hat, autotune=True))
        mean = chain.samples.mean(axis=0)
        assert np.max(np.abs(mean - mle.w_hat.w)) <= 0.05


class TestCredible:
    def test_constant_chain(self):
        ci = credible_intervals(_constant_chain([0.2, 0.8]), 0.95)
        np.testing.assert_array_equal(ci.lower, [0.2, 0.8])
        np.testing.assert_array_equal(ci.upper, [0.2, 0.8])

    def test_uniform_prior_quantiles(self):
        chain = run_swm(None, SwmConfig(200_000, 20_000, seed=0, w0=[0.5, 0.5], autotune=True))
        ci = credible_intervals(chain, 0.95)
        np.testing.assert_allclose(ci.lower, 0.025, atol=0.01)
        np.testing.assert_allclose(ci.upper, 0.975, atol=0.01)
        inner = credible_intervals(chain, 0.5)
        assert np.all(ci.lower <= inner.lower) and np.all(inner.upper <= ci.upper)
        assert np.all(ci.lower <= ci.posterior_mean.w) and np.all(ci.posterior_mean.w <= ci.upper)

    def test_too_few_samples(self):
        with pytest.raises(SampleSizeError):
            credible_intervals(_constant_chain([0.5, 0.5], n=99))
        with pytest.raises(DomainError):
            credible_intervals(_constant_chain([0.5, 0.5]), 1.5)


class TestDiagnostics:
    def test_constant_chain(self):
        d = chain_diagnostics(_constant_chain([0.3, 0.7]))
        np.testing.assert_array_equal(d.lag1_autocorrelation, [1.0, 1.0])
        assert d.degenerate.all()

    def test_iid_chain_ess(self, rng):
        samples = rng.dirichlet([2, 3, 4], size=20_000)
        config = SwmConfig(20_000, 0)
        chain = Chain(samples, np.zeros(20_000), np.ones(20_000, dtype=bool), 1.0, config, 0.1)
        d = chain_diagnostics(chain)
        assert np.all(np.abs(d.ess / 20_000 - 1) <= 0.1)
        assert np.all(np.abs(d.lag1_autocorrelation) <= 0.03)

    def test_ar1_ess(self, rng):
        phi = 0.9
        x = np.empty(100_000)
        x[0] = 0.0
        e = rng.normal(size=x.size)
        for i in range(1, x.size):
            x[i] = phi * x[i - 1] + e[i]
        expected = x.size * (1 - phi) / (1 + phi)
        assert effective_sample_size(x) == pytest.approx(expected, rel=0.15)

    def test_recount_and_running_means(self, two_cat):
        chain = run_swm(two_cat, SwmConfig(1_000, 100, seed=4))
        d = chain_diagnostics(chain)
        assert d.accept_rate == d.accept_rate_recount
        np.testing.assert_allclose(d.running_means[-1], chain.samples.mean(axis=0))
        np.testing.assert_allclose(d.running_means[0], chain.samples[0])
