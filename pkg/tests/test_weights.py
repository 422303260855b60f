"""Weight functions: values, caps, boundary behavior."""

import numpy as np
import pytest

from compscore.errors import ConfigError
from compscore.weights import (
    KINDS,
    WeightSpec,
    below_cap,
    boundary_distance,
    cap_from_quantile,
    weight_value,
)


def test_hand_values():
    z = np.sqrt([0.5, 0.3, 0.2])
    assert weight_value(z, WeightSpec("product")) == pytest.approx(0.5 * 0.3 * 0.2)
    assert weight_value(z, WeightSpec("min")) == pytest.approx(0.2)
    assert weight_value(z, WeightSpec("capped-product", 0.1)) == pytest.approx(0.01)
    assert weight_value(z, WeightSpec("capped-min", 0.1)) == pytest.approx(0.01)
    # cap larger than the raw value leaves it alone
    assert weight_value(z, WeightSpec("capped-min", 0.8)) == pytest.approx(0.2)


def test_scalar_and_row_forms():
    z = np.sqrt(np.array([[0.5, 0.5], [0.9, 0.1]]))
    vals = weight_value(z, WeightSpec("min"))
    assert vals.shape == (2,)
    np.testing.assert_allclose(vals, [0.5, 0.1])
    assert isinstance(weight_value(z[0], WeightSpec("min")), float)


def test_uncapped_kinds_pin_cap_at_one():
    spec = WeightSpec("product", 0.5)
    assert spec.a_c == 1.0
    assert not spec.capped
    assert WeightSpec("capped-min", 0.5).capped


def test_invalid_specs():
    with pytest.raises(ConfigError, match="unknown weight kind"):
        WeightSpec("geometric")
    for bad in (0.0, -0.1, 1.5, np.nan):
        with pytest.raises(ConfigError):
            WeightSpec("capped-min", bad)


def test_family_flags():
    assert WeightSpec("product").product_family
    assert WeightSpec("capped-product", 0.1).product_family
    assert WeightSpec("min").min_family
    assert WeightSpec("capped-min", 0.1).min_family


def test_pointwise_orderings():
    """On the orthant each z_j^2 <= 1, so the product never exceeds the
    min, and capping never increases a weight."""
    rng = np.random.default_rng(21)
    for p in (2, 3, 6):
        u = rng.dirichlet(np.ones(p) * 0.7, size=200)
        z = np.sqrt(u)
        prod = weight_value(z, WeightSpec("product"))
        mn = weight_value(z, WeightSpec("min"))
        assert np.all(prod <= mn + 1e-15)
        for kind, capped in (("product", "capped-product"), ("min", "capped-min")):
            for a_c in (0.05, 0.3, 1.0):
                capped_vals = weight_value(z, WeightSpec(capped, a_c))
                assert np.all(capped_vals <= weight_value(z, WeightSpec(kind)) + 1e-15)
                assert np.all(capped_vals <= a_c * a_c + 1e-15)


def test_vanishes_on_boundary():
    pts = np.sqrt(
        np.array([[0.0, 0.4, 0.6], [0.5, 0.5, 0.0], [1.0, 0.0, 0.0]])
    )
    for kind in KINDS:
        spec = WeightSpec(kind, 0.3) if "capped" in kind else WeightSpec(kind)
        np.testing.assert_array_equal(weight_value(pts, spec), 0.0)


def test_below_cap_semantics():
    spec = WeightSpec("capped-min", 0.5)  # cap at 0.25
    z = np.sqrt(np.array([[0.1, 0.9], [0.25, 0.75], [0.4, 0.6], [0.0, 1.0]]))
    # ties go to the cap branch: 0.25 >= 0.25 counts as binding
    np.testing.assert_array_equal(below_cap(z, spec), [1.0, 0.0, 0.0, 1.0])
    assert below_cap(z[0], spec) == 1.0
    with pytest.raises(ConfigError, match="not applicable"):
        below_cap(z, WeightSpec("min"))


def test_boundary_distance_projection_oracle():
    """The distance formula equals the Euclidean distance from u to the
    nearest face of the simplex, computed by projecting onto the affine
    set {x : x_j = 0, sum x = 1} for every j."""
    rng = np.random.default_rng(9)
    for p in (2, 3, 4):
        u = rng.dirichlet(np.ones(p) * 3.0, size=20)
        claimed = boundary_distance(u)
        for i in range(u.shape[0]):
            dists = []
            for j in range(p):
                # minimize |x - u| s.t. x_j = 0, 1'x = 1 via KKT
                mask = np.ones(p, dtype=bool)
                mask[j] = False
                x = np.zeros(p)
                shift = (u[i, mask].sum() - 1.0) / (p - 1)
                x[mask] = u[i, mask] - shift
                x[j] = 0.0
                dists.append(np.linalg.norm(x - u[i]))
            np.testing.assert_allclose(claimed[i], min(dists), rtol=1e-12)
    assert boundary_distance([0.25, 0.25, 0.25, 0.25]) == pytest.approx(
        np.sqrt(4.0 / 3.0) * 0.25
    )


def test_cap_from_quantile():
    rng = np.random.default_rng(4)
    z = np.sqrt(rng.dirichlet(np.ones(3), size=500))
    for kind in ("capped-min", "capped-product"):
        a_c = cap_from_quantile(z, kind, quantile=0.9)
        base = "product" if "product" in kind else "min"
        vals = weight_value(z, WeightSpec(base))
        assert a_c == pytest.approx(min(1.0, np.sqrt(np.quantile(vals, 0.9))))
        frac_below = np.mean(vals < a_c * a_c)
        assert 0.85 <= frac_below <= 0.95
    with pytest.raises(ConfigError, match="quantile"):
        cap_from_quantile(z, "capped-min", quantile=1.0)
    # every row touching the boundary makes the quantile collapse
    zeros = np.sqrt(np.array([[0.0, 0.5, 0.5], [0.0, 0.2, 0.8]]))
    with pytest.raises(ConfigError, match="zero"):
        cap_from_quantile(zeros, "capped-product", quantile=0.5)
