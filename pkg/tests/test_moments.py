"""Moment providers and the count-data estimation route: exact
factorial-moment identities, equality with the direct continuous build,
and small-total row exclusion."""

import numpy as np
import pytest

from compscore.core import CountDataset, sqrt_transform
from compscore.errors import ConfigError, InsufficientTotalsError
from compscore.fitting import build_workspace, fit_hybrid, solve
from compscore.moments import (
    EmpiricalMoments,
    FactorialMoments,
    _compositions,
    _falling,
    build_workspace_from_moments,
    fit_from_counts,
)
from compscore.samplers import (
    RngConfig,
    sample_model,
    sample_multinomial_counts,
)
from compscore.core import ModelSpec
from compscore.weights import WeightSpec


def test_falling_factorial_hand_values():
    x = np.array([5.0, 3.0, 1.0, 0.0])
    np.testing.assert_array_equal(_falling(x, 0), [1, 1, 1, 1])
    np.testing.assert_array_equal(_falling(x, 1), x)
    np.testing.assert_array_equal(_falling(x, 2), [20, 6, 0, 0])
    np.testing.assert_array_equal(_falling(x, 3), [60, 6, 0, 0])


def test_compositions_enumeration():
    assert sorted(_compositions(2, 2)) == [(0, 2), (1, 1), (2, 0)]
    assert list(_compositions(0, 3)) == [(0, 0, 0)]
    # weak compositions of t into k parts: C(t + k - 1, k - 1)
    assert len(list(_compositions(3, 3))) == 10


def test_factorial_moments_exact_binomial_expectation():
    """With rows enumerating the Binomial(2, 1/2) outcomes at their
    exact multiplicities, sample averages equal expectations, so the
    factorial estimates must hit the latent moments of u = (1/2, 1/2)
    exactly: E u1 = 1/2, E u1^2 = 1/4, and the expansion through the
    last coordinate must agree."""
    counts = CountDataset([[0, 2], [1, 1], [1, 1], [2, 0]])
    fac = FactorialMoments(counts)
    assert fac.monomial_mean((1, 0)) == pytest.approx(0.5)
    assert fac.monomial_mean((2, 0)) == pytest.approx(0.25)
    assert fac.monomial_mean((0, 1)) == pytest.approx(0.5)
    assert fac.monomial_mean((0, 2)) == pytest.approx(0.25)
    assert fac.monomial_mean((1, 1)) == pytest.approx(0.25)
    assert fac.monomial_mean((0, 0)) == pytest.approx(1.0)


def test_factorial_moments_are_unbiased():
    """Monte Carlo check on a fixed latent composition: the estimator
    averaged over many multinomial draws lands on the latent monomial
    within Monte Carlo error, at totals far too small for plug-in x/m
    moments to do so."""
    u = np.array([0.3, 0.5, 0.2])
    m = 6
    rng = np.random.default_rng(19)
    x = rng.multinomial(m, u, size=40_000)
    fac = FactorialMoments(CountDataset(x))
    for alpha, truth in (
        ((2, 0, 0), u[0] ** 2),
        ((1, 1, 0), u[0] * u[1]),
        ((2, 1, 0), u[0] ** 2 * u[1]),
        ((1, 0, 2), u[0] * u[2] ** 2),
    ):
        est = fac.monomial_mean(alpha)
        assert est == pytest.approx(truth, abs=0.01)
        # the plug-in moment is visibly biased at m = 6
        plug = np.mean(np.prod((x / m) ** np.array(alpha), axis=1))
        if sum(alpha) > 1:
            assert abs(plug - truth) > 3 * abs(est - truth)


def test_empirical_provider_equals_direct_build():
    """Routing the product-weight system through empirical monomial
    means must reproduce the direct continuous assembly to rounding."""
    rng = np.random.default_rng(20)
    u = rng.dirichlet(np.ones(3) * 0.8, size=500)
    shape = np.array([-0.5, 0.2, 0.0])
    ws_m = build_workspace_from_moments(EmpiricalMoments(u), shape=shape)
    ws_d = build_workspace(sqrt_transform(u), WeightSpec("product"), shape=shape)
    np.testing.assert_allclose(ws_m.gram, ws_d.gram, rtol=0, atol=1e-14)
    np.testing.assert_allclose(ws_m.linear_term, ws_d.linear_term, rtol=0, atol=1e-13)
    assert ws_m.z is None and ws_m.n == 500


def test_factorial_workspace_near_latent_one():
    spec = ModelSpec(
        family="truncated-gaussian",
        p=3,
        interaction=[[-26.3678, 5.9598], [5.9598, -35.8885]],
        estimate_linear=False,
    )
    rng = RngConfig(21)
    latent = sample_model(spec, 4000, rng.substream(0))
    counts = sample_multinomial_counts(latent, 1000, rng.substream(1))
    ws_lat = build_workspace_from_moments(EmpiricalMoments(latent.proportions))
    ws_fac = build_workspace_from_moments(FactorialMoments(counts))
    scale = np.abs(ws_lat.gram).max()
    assert np.abs(ws_fac.gram - ws_lat.gram).max() < 0.02 * scale
    dscale = np.abs(ws_lat.linear_term).max()
    assert np.abs(ws_fac.linear_term - ws_lat.linear_term).max() < 0.02 * dscale


def test_small_totals_excluded_per_degree():
    counts = CountDataset([[1, 0], [0, 1], [3, 2], [2, 2]])
    fac = FactorialMoments(counts)
    # degree 2 drops the two m = 1 rows: mean of x1(x1-1)/(m(m-1))
    est = fac.monomial_mean((2, 0))
    assert est == pytest.approx(0.5 * (6.0 / 20.0 + 2.0 / 12.0))
    assert fac.exclusions == {2: 2}
    # degree 1 keeps every row
    est1 = fac.monomial_mean((1, 0))
    assert est1 == pytest.approx(np.mean([1.0, 0.0, 0.6, 0.5]))
    assert 1 not in fac.exclusions


def test_insufficient_totals():
    counts = CountDataset([[1, 0], [0, 1]])
    fac = FactorialMoments(counts)
    with pytest.raises(InsufficientTotalsError) as err:
        fac.monomial_mean((2, 0))
    assert err.value.degree == 2


def test_provider_validation():
    fac = FactorialMoments(CountDataset([[2, 3]]))
    with pytest.raises(ConfigError, match="length"):
        fac.monomial_mean((1, 0, 0))
    emp = EmpiricalMoments(np.array([[0.5, 0.5]]))
    with pytest.raises(ConfigError, match="length"):
        emp.monomial_mean((1,))
    assert emp.requested() == []
    emp.monomial_mean((1, 0))
    assert emp.requested() == [(1, 0)]


def test_moment_workspace_validation():
    emp = EmpiricalMoments(np.array([[0.5, 0.5], [0.4, 0.6]]))
    with pytest.raises(ConfigError, match="shape vector length"):
        build_workspace_from_moments(emp, shape=[0.0])
    with pytest.raises(ConfigError, match="exceed -1"):
        build_workspace_from_moments(emp, shape=[-2.0, 0.0])
    ws = build_workspace_from_moments(emp)
    with pytest.raises(ConfigError, match="moments only"):
        solve(ws, with_se=True)


def test_fit_from_counts_matches_continuous_at_large_totals():
    """At huge totals x/m is essentially the latent composition, so the
    factorial route and the continuous product-weight fit agree."""
    spec = ModelSpec(
        family="truncated-gaussian",
        p=3,
        interaction=[[-26.3678, 5.9598], [5.9598, -35.8885]],
        estimate_linear=False,
    )
    rng = RngConfig(22)
    latent = sample_model(spec, 2000, rng.substream(0))
    counts = sample_multinomial_counts(latent, 200_000, rng.substream(1))
    fit_fac = fit_from_counts(counts, np.zeros(3))
    fit_cont = fit_hybrid(
        latent, np.zeros(3), WeightSpec("product"), with_se=False
    )
    np.testing.assert_allclose(fit_fac.estimates, fit_cont.estimates, rtol=0.05)
    assert fit_fac.standard_errors is None
    assert fit_fac.config["estimator"] == "factorial"
    assert fit_fac.config["moment_exclusions"] == {}


def test_fit_from_counts_accepts_raw_arrays():
    rng = np.random.default_rng(23)
    latent = rng.dirichlet(np.ones(3) * 2.0, size=300)
    x = np.array([rng.multinomial(500, row) for row in latent])
    fit = fit_from_counts(x, np.zeros(3))
    assert len(fit.labels) == 3  # a11, a22, a12
    assert np.all(np.isfinite(fit.estimates))
