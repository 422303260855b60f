"""Diagnostics: grid rounding, two-sample KS wrapper, and the
simulate-and-compare marginal report."""

import numpy as np
import pytest

from compscore.core import ContinuousDataset, ModelSpec
from compscore.diagnostics import (
    ks_compare,
    marginal_report,
    round_to_grid,
)
from compscore.errors import ConfigError
from compscore.samplers import RngConfig, sample_dirichlet


def test_round_to_grid_hand_values():
    # 0.0123 * 2000 = 24.6 rounds up to 25 counts
    assert round_to_grid(0.0123, 2000) == pytest.approx(0.0125)
    np.testing.assert_allclose(
        round_to_grid(np.array([0.0, 1.0, 0.2501]), 2000), [0.0, 1.0, 0.25]
    )


def test_round_to_grid_halves_away_from_zero():
    # 2.5 counts round to 3, where round-to-even would give 2
    assert round_to_grid(0.25, 10) == pytest.approx(0.3)
    assert np.round(0.25 * 10) == 2.0
    with pytest.raises(ConfigError):
        round_to_grid(0.5, 0)


def test_round_to_grid_support():
    rng = np.random.default_rng(1)
    u = rng.dirichlet(np.ones(4), size=100)
    snapped = round_to_grid(u, 50)
    counts = snapped * 50
    np.testing.assert_allclose(counts, np.round(counts), atol=1e-9)


def test_ks_compare_extremes():
    same = np.linspace(0.1, 0.9, 40)
    res = ks_compare(same, same)
    assert res.statistic == 0.0
    assert res.pvalue == pytest.approx(1.0)
    assert res.ties  # pooled sample duplicates every value
    apart = ks_compare(same, same + 10.0)
    assert apart.statistic == 1.0
    assert apart.pvalue < 1e-6
    assert not apart.ties
    with pytest.raises(ConfigError):
        ks_compare(same, np.array([]))


def test_marginal_report_self_model():
    """Data simulated from the fitted model itself should look like the
    model: large KS p-values, matching means and spreads."""
    spec = ModelSpec(family="dirichlet", p=3, shape=[1.0, 2.5, 0.0])
    observed = sample_dirichlet(spec, 2000, RngConfig(12))
    report = marginal_report(observed, spec, RngConfig(13), n_sim=20_000)
    assert report.n_observed == 2000 and report.n_simulated == 20_000
    assert report.grid_totals is None
    for cat in report.categories:
        assert cat.ks_pvalue > 1e-4
        assert not cat.degenerate
        assert not cat.ties  # continuous marginals
        assert cat.observed_mean == pytest.approx(cat.simulated_mean, abs=0.02)
        assert cat.observed_sd == pytest.approx(cat.simulated_sd, rel=0.15)


def test_marginal_report_grid_and_qq():
    spec = ModelSpec(family="dirichlet", p=3, shape=[2.0, 2.0, 2.0])
    observed = sample_dirichlet(spec, 500, RngConfig(14))
    report = marginal_report(
        observed, spec, RngConfig(15), n_sim=4000, grid_totals=100, qq_points=21
    )
    assert report.grid_totals == 100
    for cat in report.categories:
        assert cat.ties  # grid support forces ties
    for name in ("c1", "c2", "c3"):
        obs_q, sim_q = report.qq[name]
        assert obs_q.shape == (21,) and sim_q.shape == (21,)
        assert np.all(np.diff(obs_q) >= 0) and np.all(np.diff(sim_q) >= 0)
        # simulated quantiles live on the grid
        np.testing.assert_allclose(sim_q * 100, np.round(sim_q * 100), atol=1e-9)


def test_marginal_report_degenerate_category():
    rng = np.random.default_rng(16)
    u1 = rng.uniform(0.1, 0.4, size=50)
    observed = ContinuousDataset(np.column_stack([np.full(50, 0.5), u1, 0.5 - u1]))
    spec = ModelSpec(family="dirichlet", p=3, shape=[1.0, 1.0, 1.0])
    report = marginal_report(observed, spec, RngConfig(17), n_sim=2000)
    assert report.category("c1").degenerate
    assert not report.category("c2").degenerate
    with pytest.raises(KeyError):
        report.category("missing")


def test_marginal_report_dimension_check():
    observed = sample_dirichlet(np.zeros(3), 100, RngConfig(18))
    spec4 = ModelSpec(family="dirichlet", p=4, shape=np.zeros(4))
    with pytest.raises(ConfigError, match="number of categories"):
        marginal_report(observed, spec4, RngConfig(19), n_sim=100)


def test_report_serialization():
    spec = ModelSpec(family="dirichlet", p=3, shape=[0.5, 0.5, 0.5])
    observed = sample_dirichlet(spec, 300, RngConfig(20))
    report = marginal_report(observed, spec, RngConfig(21), n_sim=1000, qq_points=5)
    doc = report.to_dict()
    assert doc["n_observed"] == 300
    assert {c["name"] for c in doc["categories"]} == {"c1", "c2", "c3"}
    for c in doc["categories"]:
        for key in (
            "ks_statistic",
            "ks_pvalue",
            "ties",
            "observed_mean",
            "observed_sd",
            "simulated_mean",
            "simulated_sd",
            "degenerate",
        ):
            assert key in c
    assert len(doc["qq"]["c1"]["observed"]) == 5
