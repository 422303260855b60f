"""Moment-route assembly of the score-matching system.

Under the uncapped product weight every entry of the quadratic system is
a polynomial in the proportions, so the whole system is a linear
functional of monomial means E[prod_j u_j^(alpha_j)]. Those means can be
supplied by any MomentProvider. Two providers are included:

- EmpiricalMoments averages monomials of observed proportions, which
  reproduces the direct continuous estimator exactly;
- FactorialMoments estimates the same monomial means from multinomial
  counts via scaled factorial moments, which is unbiased for the latent
  composition's moments and never forms per-row proportions. This makes
  small totals usable without the plug-in bias of x/m.

The monomial decomposition of each system entry is computed once per
dimension and cached; degrees never exceed p + 4.
"""

import logging
import math
from functools import lru_cache

import numpy as np

from .core import CountDataset, ModelSpec, index_map
from .errors import ConfigError, DataError, InsufficientTotalsError
from .fitting import EstimatorWorkspace, solve
from .weights import WeightSpec

__all__ = [
    "EmpiricalMoments",
    "FactorialMoments",
    "build_workspace_from_moments",
    "fit_from_counts",
]

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# tiny sparse polynomials over the p proportions


def _pmul(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            out[key] = out.get(key, 0.0) + ca * cb
    return out


def _padd(a, b):
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0.0) + c
    return {e: c for e, c in out.items() if c != 0.0}


def _pscale(a, s):
    return {e: c * s for e, c in a.items()}


def _unit(p, level, coef, power=1):
    exps = [0] * p
    exps[level] = power
    return {tuple(exps): coef}


def _pair(p, j, k, coef):
    exps = [0] * p
    exps[j] += 1
    exps[k] += 1
    return {tuple(exps): coef}


def _const(p, coef):
    return {tuple([0] * p): coef}


@lru_cache(maxsize=None)
def _system_polynomials(p):
    """Monomial decomposition of every entry of the product-weight
    system: gram (q x q), Laplacian term, weight-derivative term, and
    shape-coupling matrix (q x p)."""
    imap = index_map(p)
    q = imap.q
    hsq = {tuple([1] * p): 1.0}

    # gradient of each statistic as {column: monomial}, and nu = z' mu
    grads = []
    nus = []
    for l in imap.diag_levels:
        grads.append({int(l): _unit(p, l, 4.0)})
        nus.append(_unit(p, l, 4.0, power=2))
    for j, k in zip(imap.cross_j, imap.cross_k):
        grads.append({int(j): _unit(p, k, 4.0), int(k): _unit(p, j, 4.0)})
        nus.append(_pair(p, j, k, 8.0))
    for l in imap.linear_levels:
        grads.append({int(l): _const(p, 2.0)})
        nus.append(_unit(p, l, 2.0))

    gram = [[None] * q for _ in range(q)]
    for i in range(q):
        for j in range(i, q):
            dot = {}
            for c, gi in grads[i].items():
                gj = grads[j].get(c)
                if gj is not None:
                    dot = _padd(dot, _pmul(_unit(p, c, 1.0), _pmul(gi, gj)))
            dot = _padd(dot, _pscale(_pmul(nus[i], nus[j]), -1.0))
            entry = _pmul(hsq, dot)
            gram[i][j] = entry
            gram[j][i] = entry

    lam2 = 2.0 * p
    lam4 = 4.0 * (p + 2.0)
    lap = []
    wgrad = []
    for l in imap.diag_levels:
        lap.append(_padd(_unit(p, l, -lam4, power=2), _unit(p, l, 12.0)))
        wgrad.append(_padd(_unit(p, l, 4.0), _unit(p, l, -4.0 * p, power=2)))
    for j, k in zip(imap.cross_j, imap.cross_k):
        lap.append(
            _padd(
                _pair(p, j, k, -2.0 * lam4),
                _padd(_unit(p, j, 4.0), _unit(p, k, 4.0)),
            )
        )
        wgrad.append(
            _padd(
                _padd(_unit(p, j, 4.0), _unit(p, k, 4.0)),
                _pair(p, j, k, -8.0 * p),
            )
        )
    for l in imap.linear_levels:
        lap.append(_padd(_unit(p, l, -lam2), _const(p, 2.0)))
        wgrad.append(_padd(_const(p, 2.0), _unit(p, l, -2.0 * p)))

    lap_term = [_pmul(hsq, _pscale(v, -1.0)) for v in lap]
    wgrad_term = [_pmul(hsq, _pscale(v, -2.0)) for v in wgrad]

    shape_matrix = [
        [
            _pmul(hsq, _padd(grads[i].get(c, {}), _pscale(nus[i], -1.0)))
            for c in range(p)
        ]
        for i in range(q)
    ]
    return gram, lap_term, wgrad_term, shape_matrix


# ---------------------------------------------------------------------------
# providers


class EmpiricalMoments:
    """Monomial means averaged over observed proportion rows."""

    def __init__(self, proportions):
        u = np.asarray(proportions, dtype=float)
        if u.ndim != 2:
            raise DataError("proportions must be 2-d")
        self.u = u
        self.n, self.p = u.shape
        self._cache = {}

    def monomial_mean(self, alpha):
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.p:
            raise ConfigError("monomial exponent length does not match p")
        hit = self._cache.get(alpha)
        if hit is not None:
            return hit
        vals = np.ones(self.n)
        for j, a in enumerate(alpha):
            if a:
                vals = vals * self.u[:, j] ** a
        out = float(vals.mean())
        self._cache[alpha] = out
        return out

    def poly_mean(self, poly):
        return sum(c * self.monomial_mean(e) for e, c in poly.items())

    def requested(self):
        return sorted(self._cache)


def _falling(x, k):
    out = np.ones_like(x, dtype=float)
    for i in range(k):
        out = out * (x - i)
    return out


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


class FactorialMoments:
    """Unbiased latent monomial means from multinomial counts.

    E[prod_{j<p} x_j^(alpha_j) / m^(|alpha|)] equals the latent
    E[prod_{j<p} u_j^(alpha_j)]; powers of the last proportion are
    expanded through u_p = 1 - sum of the others. Rows whose total is
    below a requested degree are excluded from that moment only, with
    the exclusion count logged and tallied in ``exclusions``.
    """

    def __init__(self, counts):
        if not isinstance(counts, CountDataset):
            counts = CountDataset(counts)
        self.counts = counts
        self.n = counts.n
        self.p = counts.p
        self._cache = {}
        self._reduced_cache = {}
        self.exclusions = {}

    def monomial_mean(self, alpha):
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.p:
            raise ConfigError("monomial exponent length does not match p")
        hit = self._cache.get(alpha)
        if hit is not None:
            return hit
        last = alpha[-1]
        base = alpha[:-1]
        total = 0.0
        for t in range(last + 1):
            outer = math.comb(last, t) * (-1.0) ** t
            for combo in _compositions(t, self.p - 1):
                coef = outer * math.factorial(t)
                for c in combo:
                    coef /= math.factorial(c)
                gamma = tuple(b + c for b, c in zip(base, combo))
                total += coef * self._reduced_mean(gamma)
        self._cache[alpha] = total
        return total

    def _reduced_mean(self, gamma):
        hit = self._reduced_cache.get(gamma)
        if hit is not None:
            return hit
        degree = int(sum(gamma))
        if degree == 0:
            self._reduced_cache[gamma] = 1.0
            return 1.0
        x = self.counts.counts
        m = self.counts.totals
        eligible = m >= degree
        n_eligible = int(np.count_nonzero(eligible))
        if n_eligible == 0:
            raise InsufficientTotalsError(degree)
        excluded = self.n - n_eligible
        if excluded and degree not in self.exclusions:
            self.exclusions[degree] = excluded
            logger.info(
                "factorial moments of degree %d exclude %d row(s) with small totals",
                degree,
                excluded,
            )
        vals = np.ones(n_eligible)
        for j, g in enumerate(gamma):
            if g:
                vals = vals * _falling(x[eligible, j], int(g))
        vals = vals / _falling(m[eligible], degree)
        out = float(vals.mean())
        self._reduced_cache[gamma] = out
        return out

    def poly_mean(self, poly):
        return sum(c * self.monomial_mean(e) for e, c in poly.items())

    def requested(self):
        return sorted(self._cache)


# ---------------------------------------------------------------------------
# workspace from moments


def build_workspace_from_moments(provider, shape=None):
    """Assemble the product-weight system from monomial means alone.

    Only the uncapped product weight keeps every entry polynomial, so
    that is the only weight this route supports. The workspace carries
    no per-observation data (z is None), hence no standard errors.
    """
    p = provider.p
    imap = index_map(p)
    shape = np.zeros(p) if shape is None else np.asarray(shape, dtype=float).reshape(-1)
    if shape.shape[0] != p:
        raise ConfigError("shape vector length does not match p")
    if np.any(shape <= -1.0):
        raise ConfigError("every shape parameter must exceed -1")
    gram_p, lap_p, wgrad_p, shape_p = _system_polynomials(p)
    q = imap.q
    gram = np.empty((q, q))
    for i in range(q):
        for j in range(i, q):
            gram[i, j] = gram[j, i] = provider.poly_mean(gram_p[i][j])
    lap = np.array([provider.poly_mean(v) for v in lap_p])
    wgrad = np.array([provider.poly_mean(v) for v in wgrad_p])
    shape_matrix = np.array(
        [[provider.poly_mean(shape_p[i][c]) for c in range(p)] for i in range(q)]
    )
    return EstimatorWorkspace(
        imap=imap,
        weight=WeightSpec("product"),
        shape=shape,
        n=provider.n,
        gram=gram,
        laplacian_term=lap,
        weight_gradient_term=wgrad,
        shape_matrix=shape_matrix,
        z=None,
    )


def fit_from_counts(
    counts,
    shape,
    estimate_interaction=True,
    estimate_linear=False,
    ridge=0.0,
):
    """Count-data fit through factorial moments (product weight only).

    Unbiased in the latent composition even for small totals, unlike
    plugging x/m into the continuous estimator. No plug-in standard
    errors are available on this route.
    """
    if not isinstance(counts, CountDataset):
        counts = CountDataset(counts)
    provider = FactorialMoments(counts)
    spec = ModelSpec(
        family="hybrid",
        p=counts.p,
        shape=np.asarray(shape, dtype=float),
        estimate_interaction=estimate_interaction,
        estimate_linear=estimate_linear,
    )
    ws = build_workspace_from_moments(provider, shape=spec.shape)
    result = solve(ws, mask=spec.estimation_mask(ws.imap), ridge=ridge, with_se=False)
    result.config.update(
        {
            "family": "hybrid",
            "estimator": "factorial",
            "names": list(counts.names),
            "moment_exclusions": {str(k): int(v) for k, v in provider.exclusions.items()},
        }
    )
    return result
