"""Boundary-vanishing weight functions on the sphere orthant.

The squared weight h^2 multiplies every term of the score-matching
objective and must vanish where the density may blow up, i.e. on the
boundary of the orthant. Two shapes are supported, each optionally
capped at a ceiling a_c^2:

- product kind:  h^2(z) = prod_j z_j^2, capped at a_c^2
- min kind:      h^2(z) = min_j z_j^2, capped at a_c^2

Uncapped kinds are the capped ones with a_c = 1, where the cap can
never bind (the product is at most p^{-p/2} < 1 and the min is at most
1/p < 1 on the orthant).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "WeightSpec",
    "KINDS",
    "weight_value",
    "below_cap",
    "boundary_distance",
    "cap_from_quantile",
]

KIND_PRODUCT = "product"
KIND_CAPPED_PRODUCT = "capped-product"
KIND_MIN = "min"
KIND_CAPPED_MIN = "capped-min"
KINDS = (KIND_PRODUCT, KIND_CAPPED_PRODUCT, KIND_MIN, KIND_CAPPED_MIN)


@dataclass(frozen=True)
class WeightSpec:
    """Weight kind plus cap parameter a_c in (0, 1].

    Uncapped kinds ignore a_c and store 1.0.
    """

    kind: str
    a_c: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown weight kind {self.kind!r}")
        if not self.capped:
            object.__setattr__(self, "a_c", 1.0)
        a_c = float(self.a_c)
        if not (0.0 < a_c <= 1.0) or not np.isfinite(a_c):
            raise ConfigError(f"a_c must be in (0, 1], got {self.a_c}")
        object.__setattr__(self, "a_c", a_c)

    @property
    def capped(self):
        return self.kind in (KIND_CAPPED_PRODUCT, KIND_CAPPED_MIN)

    @property
    def product_family(self):
        return self.kind in (KIND_PRODUCT, KIND_CAPPED_PRODUCT)

    @property
    def min_family(self):
        return self.kind in (KIND_MIN, KIND_CAPPED_MIN)


def _rows(z):
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    return (z[None, :] if single else z), single


def weight_value(z, spec):
    """Evaluate h^2 at one point or row-wise.

    Returns a scalar for a 1-d input, else an (n,) array.
    """
    zz, single = _rows(z)
    u = zz * zz
    cap = spec.a_c * spec.a_c
    if spec.product_family:
        vals = np.minimum(u.prod(axis=1), cap)
    else:
        vals = np.minimum(u.min(axis=1), cap)
    return float(vals[0]) if single else vals


def below_cap(z, spec):
    """Indicator that the weight sits strictly below its cap.

    1 where the weight takes its smooth branch (the cap does not bind),
    0 where it is pinned at a_c^2. Only defined for capped kinds; the
    uncapped kinds raise ConfigError because there is no cap to test.
    Points on the boundary always return 1 (the weight is 0 < a_c^2).
    """
    if not spec.capped:
        raise ConfigError(f"cap indicator is not applicable to kind {spec.kind!r}")
    zz, single = _rows(z)
    u = zz * zz
    cap = spec.a_c * spec.a_c
    raw = u.prod(axis=1) if spec.product_family else u.min(axis=1)
    ind = (raw < cap).astype(float)
    return float(ind[0]) if single else ind


def boundary_distance(u):
    """Geodesic-equivalent distance from a composition to the simplex
    boundary, sqrt(p / (p - 1)) * min_j u_j.

    Accepts one composition or rows of them.
    """
    uu = np.asarray(u, dtype=float)
    single = uu.ndim == 1
    if single:
        uu = uu[None, :]
    p = uu.shape[1]
    vals = np.sqrt(p / (p - 1.0)) * uu.min(axis=1)
    return float(vals[0]) if single else vals


def cap_from_quantile(z, kind, quantile=0.90):
    """Heuristic cap choice: a_c^2 set at an empirical quantile of the
    uncapped weight values. Not part of the core method; offered as an
    explicitly opt-in convenience for data analysis.
    """
    if not (0.0 < quantile < 1.0):
        raise ConfigError(f"quantile must be in (0, 1), got {quantile}")
    base = KIND_PRODUCT if "product" in kind else KIND_MIN
    vals = weight_value(z, WeightSpec(base))
    vals = np.atleast_1d(vals)
    hsq = float(np.quantile(vals, quantile))
    if hsq <= 0.0:
        raise ConfigError("quantile of weight values is zero; cannot choose a cap")
    return min(1.0, float(np.sqrt(hsq)))
