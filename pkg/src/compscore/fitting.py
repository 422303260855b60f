"""Closed-form weighted score matching on the sphere orthant.

The estimating equations are quadratic: the parameter vector theta
(diagonal interactions, off-diagonal interactions, linear coefficients,
in index-map order) minimizes

    Psi(theta) = 0.5 * theta' W theta - theta' d

where W is a weighted Gram matrix of projected sufficient-statistic
gradients and d collects three linear terms: a Laplacian term, a term
from the derivative of the weight (only where the cap does not bind),
and a shape-coupling term from the fixed exponents. Everything is
assembled in one blocked pass over the data with compensated block
summation, so results are bit-reproducible for a given block size.

The same machinery covers the Dirichlet family, whose sufficient
statistics are logarithms; cancellation of the weight against 1/u leaves
polynomial integrands there too.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import ContinuousDataset, ModelSpec, index_map, sqrt_transform
from .errors import (
    ConfigError,
    DataError,
    SingularSystemError,
    UnidentifiableCategoryError,
)
from .weights import WeightSpec

__all__ = [
    "GradientTable",
    "EstimatorWorkspace",
    "FitResult",
    "gradient_table",
    "build_workspace",
    "gram_matrix",
    "laplacian_term",
    "weight_gradient_term",
    "shape_coupling",
    "solve",
    "standard_errors",
    "objective_value",
    "fit_hybrid",
    "fit_truncated_gaussian",
    "fit_dirichlet",
    "fit_dirichlet_moments",
]

BLOCK_ROWS = 8192


class _Kahan:
    """Compensated accumulator for block sums."""

    def __init__(self, shape):
        self.total = np.zeros(shape)
        self._comp = np.zeros(shape)

    def add(self, value):
        y = value - self._comp
        t = self.total + y
        self._comp = (t - self.total) - y
        self.total = t


def _blocks(n, size=BLOCK_ROWS):
    for start in range(0, n, size):
        yield start, min(start + size, n)


# ---------------------------------------------------------------------------
# per-block statistic tables


def _mu_nu(z, u, imap):
    """Gradient rows mu_i and radial components nu_i = z' mu_i for every
    sufficient statistic, for a block of observations."""
    nb = z.shape[0]
    k = imap.n_diag
    m = np.zeros((nb, imap.q, imap.p))
    rows_d = np.arange(k)
    rows_c = np.arange(k, k + imap.n_cross)
    rows_l = np.arange(k + imap.n_cross, imap.q)

    ud = u[:, :k]
    m[:, rows_d, imap.diag_levels] = 4.0 * z[:, :k] * ud
    uj = u[:, imap.cross_j]
    uk = u[:, imap.cross_k]
    m[:, rows_c, imap.cross_j] = 4.0 * z[:, imap.cross_j] * uk
    m[:, rows_c, imap.cross_k] = 4.0 * uj * z[:, imap.cross_k]
    m[:, rows_l, imap.linear_levels] = 2.0 * z[:, :k]

    nu = np.concatenate(
        [4.0 * ud * ud, 8.0 * uj * uk, 2.0 * ud], axis=1
    )
    return m, nu


def _laplacian_values(u, imap):
    """Sphere Laplacian of each sufficient statistic (block of rows)."""
    p = imap.p
    lam2 = 2.0 * p
    lam4 = 4.0 * (p + 2.0)
    ud = u[:, : imap.n_diag]
    uj = u[:, imap.cross_j]
    uk = u[:, imap.cross_k]
    return np.concatenate(
        [
            -lam4 * ud * ud + 12.0 * ud,
            -2.0 * lam4 * uj * uk + 4.0 * uj + 4.0 * uk,
            -lam2 * ud + 2.0,
        ],
        axis=1,
    )


def _wgrad_product_values(u, imap):
    """Per-observation weight-derivative integrand for product-kind
    weights, before the -2 * indicator * h^2 factor."""
    p = imap.p
    ud = u[:, : imap.n_diag]
    uj = u[:, imap.cross_j]
    uk = u[:, imap.cross_k]
    return np.concatenate(
        [
            4.0 * ud * (1.0 - p * ud),
            4.0 * uj + 4.0 * uk - 8.0 * p * uj * uk,
            2.0 * (1.0 - p * ud),
        ],
        axis=1,
    )


def _wgrad_min_values(u, imap, cap_sq):
    """Per-observation weight-derivative integrand for min-kind weights.

    The weight's gradient lives on the argmin coordinate only, so each
    statistic takes one of two values depending on whether the argmin
    hits its own level; rows where the cap binds contribute zero.
    Ties take the lowest index.
    """
    nb = u.shape[0]
    amin = np.argmin(u, axis=1)
    ua = u[np.arange(nb), amin]
    smooth = ua < cap_sq

    ud = u[:, : imap.n_diag]
    lev = imap.diag_levels[None, :]
    a_col = amin[:, None]
    ua_col = ua[:, None]

    quart = np.where(
        lev == a_col, 8.0 * ud * ud * (1.0 - ud), -8.0 * ud * ud * ua_col
    )
    uj = u[:, imap.cross_j]
    uk = u[:, imap.cross_k]
    cross = -16.0 * ua_col * uj * uk
    cross = np.where(imap.cross_j[None, :] == a_col, 8.0 * uj * uk - 16.0 * uj * uj * uk, cross)
    cross = np.where(imap.cross_k[None, :] == a_col, 8.0 * uj * uk - 16.0 * uj * uk * uk, cross)
    quad = np.where(lev == a_col, 4.0 * ud * (1.0 - ud), -4.0 * ud * ua_col)

    vals = np.concatenate([quart, cross, quad], axis=1)
    vals[~smooth] = 0.0
    return vals


def _shape_gram_values(u, imap):
    """G with G[b, i, c] = mu_i' (log-statistic gradient of category c)
    for a block, after cancelling the 1/z singularity."""
    nb = u.shape[0]
    k = imap.n_diag
    g = np.zeros((nb, imap.q, imap.p))
    rows_d = np.arange(k)
    rows_c = np.arange(k, k + imap.n_cross)
    rows_l = np.arange(k + imap.n_cross, imap.q)
    g[:, rows_d, imap.diag_levels] = 4.0 * u[:, :k]
    g[:, rows_c, imap.cross_j] = 4.0 * u[:, imap.cross_k]
    g[:, rows_c, imap.cross_k] = 4.0 * u[:, imap.cross_j]
    g[:, rows_l, imap.linear_levels] = 2.0
    return g


def _hsq(u, weight):
    cap = weight.a_c * weight.a_c
    if weight.product_family:
        return np.minimum(u.prod(axis=1), cap)
    return np.minimum(u.min(axis=1), cap)


def _wgrad_obs(u, imap, weight):
    """Per-observation weight-derivative term (block), signs included."""
    cap = weight.a_c * weight.a_c
    if weight.product_family:
        raw = u.prod(axis=1)
        factor = np.where(raw < cap, raw, 0.0)
        return -2.0 * factor[:, None] * _wgrad_product_values(u, imap)
    return -_wgrad_min_values(u, imap, cap)


# ---------------------------------------------------------------------------
# gradient table for a single observation


@dataclass
class GradientTable:
    """Closed-form gradients at one point of the sphere orthant.

    mu[i] is the ambient gradient of sufficient statistic i, nu[i] its
    radial component z' mu[i], and laplacian[i] the sphere Laplacian.
    log_mu[j] = e_j / z_j is the gradient of log z_j (infinite where
    z_j = 0; estimation paths always use the cancelled polynomial forms,
    this table is for inspection and tests), with log_nu = 1.
    """

    mu: np.ndarray
    nu: np.ndarray
    laplacian: np.ndarray
    log_mu: np.ndarray
    log_nu: np.ndarray


def gradient_table(z, imap=None):
    z = np.asarray(z, dtype=float).reshape(1, -1)
    imap = imap or index_map(z.shape[1])
    u = z * z
    mu, nu = _mu_nu(z, u, imap)
    lap = _laplacian_values(u, imap)
    with np.errstate(divide="ignore"):
        inv = np.where(z[0] > 0.0, 1.0 / np.where(z[0] > 0.0, z[0], 1.0), np.inf)
    log_mu = np.diag(inv)
    return GradientTable(
        mu=mu[0],
        nu=nu[0],
        laplacian=lap[0],
        log_mu=log_mu,
        log_nu=np.ones(imap.p),
    )


# ---------------------------------------------------------------------------
# workspace assembly


@dataclass
class EstimatorWorkspace:
    """Assembled quadratic system for one dataset and weight choice.

    gram is the (q, q) matrix W, and the linear term d splits into the
    Laplacian part, the weight-derivative part, and the shape-coupling
    part (shape_term = -shape_matrix @ (1 + 2 * shape)). z is retained
    for the plug-in covariance pass; moment-route workspaces set it to
    None and cannot produce standard errors.
    """

    imap: object
    weight: WeightSpec
    shape: np.ndarray
    n: int
    gram: np.ndarray
    laplacian_term: np.ndarray
    weight_gradient_term: np.ndarray
    shape_matrix: np.ndarray
    z: np.ndarray = None

    @property
    def shape_term(self):
        return -self.shape_matrix @ (1.0 + 2.0 * self.shape)

    @property
    def linear_term(self):
        return self.laplacian_term + self.weight_gradient_term + self.shape_term

    def objective(self, theta):
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape[0] != self.imap.q:
            raise ConfigError("theta length does not match the index map")
        return 0.5 * theta @ self.gram @ theta - theta @ self.linear_term


def build_workspace(z, weight, shape=None, imap=None):
    """One blocked pass over transformed rows z -> EstimatorWorkspace."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 2:
        raise DataError("z must be a 2-d array of transformed rows")
    n, p = z.shape
    imap = imap or index_map(p)
    if imap.p != p:
        raise ConfigError("index map does not match data dimension")
    shape = np.zeros(p) if shape is None else np.asarray(shape, dtype=float).reshape(-1)
    if shape.shape[0] != p:
        raise ConfigError("shape vector length does not match data dimension")
    if np.any(shape <= -1.0):
        raise ConfigError("every shape parameter must exceed -1")

    q = imap.q
    acc_gram = _Kahan((q, q))
    acc_lap = _Kahan(q)
    acc_wgrad = _Kahan(q)
    acc_shape = _Kahan((q, p))

    for start, stop in _blocks(n):
        zb = z[start:stop]
        ub = zb * zb
        hsq = _hsq(ub, weight)
        mu, nu = _mu_nu(zb, ub, imap)
        proj = mu - nu[:, :, None] * zb[:, None, :]
        pw = proj * np.sqrt(hsq)[:, None, None]
        acc_gram.add(np.tensordot(pw, pw, axes=([0, 2], [0, 2])))
        acc_lap.add(-(hsq[:, None] * _laplacian_values(ub, imap)).sum(axis=0))
        acc_wgrad.add(_wgrad_obs(ub, imap, weight).sum(axis=0))
        gv = _shape_gram_values(ub, imap) - nu[:, :, None]
        acc_shape.add((hsq[:, None, None] * gv).sum(axis=0))

    return EstimatorWorkspace(
        imap=imap,
        weight=weight,
        shape=shape,
        n=n,
        gram=acc_gram.total / n,
        laplacian_term=acc_lap.total / n,
        weight_gradient_term=acc_wgrad.total / n,
        shape_matrix=acc_shape.total / n,
        z=z,
    )


def gram_matrix(z, weight, imap=None):
    return build_workspace(z, weight, imap=imap).gram


def laplacian_term(z, weight, imap=None):
    return build_workspace(z, weight, imap=imap).laplacian_term


def weight_gradient_term(z, weight, imap=None):
    return build_workspace(z, weight, imap=imap).weight_gradient_term


def shape_coupling(z, weight, shape, imap=None):
    """Shape-coupling matrix V and the resulting linear term."""
    ws = build_workspace(z, weight, shape=shape, imap=imap)
    return ws.shape_matrix, ws.shape_term


# ---------------------------------------------------------------------------
# solving and covariance


@dataclass
class FitResult:
    """Estimates with labels, plus enough context to reuse them.

    cov_scaled is the plug-in covariance of sqrt(n) * (theta_hat -
    theta), so standard errors are sqrt(diag(cov_scaled) / n). It is
    None when the estimation route cannot provide one.
    """

    labels: list
    estimates: np.ndarray
    n: int
    condition_number: float
    objective: float
    ridge: float = 0.0
    cov_scaled: np.ndarray = None
    fixed: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def standard_errors(self):
        if self.cov_scaled is None:
            return None
        return np.sqrt(np.diag(self.cov_scaled) / self.n)

    @property
    def z_scores(self):
        se = self.standard_errors
        if se is None:
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(se > 0, self.estimates / se, np.nan)

    def __getitem__(self, label):
        return float(self.estimates[self.labels.index(label)])

    def se(self, label):
        se = self.standard_errors
        return None if se is None else float(se[self.labels.index(label)])

    def to_dict(self):
        out = {
            "labels": list(self.labels),
            "estimates": [float(v) for v in self.estimates],
            "n": int(self.n),
            "condition_number": float(self.condition_number),
            "objective": float(self.objective),
            "ridge": float(self.ridge),
            "fixed": {k: float(v) for k, v in self.fixed.items()},
            "config": self.config,
        }
        se = self.standard_errors
        out["standard_errors"] = None if se is None else [float(v) for v in se]
        if self.cov_scaled is not None:
            out["cov_scaled"] = [[float(v) for v in row] for row in self.cov_scaled]
        return out


def _solve_psd(mat, rhs, ridge, labels):
    """Eigendecomposition solve with singularity diagnostics."""
    qf = mat.shape[0]
    sys = mat + ridge * np.eye(qf) if ridge else mat
    evals, evecs = np.linalg.eigh(sys)
    lam_max = float(evals[-1])
    tol = qf * np.finfo(float).eps * max(lam_max, 0.0)
    if lam_max <= 0.0 or evals[0] <= tol:
        vec = np.abs(evecs[:, 0])
        order = np.argsort(vec)[::-1]
        culprits = [labels[i] for i in order[:3] if vec[i] >= 0.2 * vec[order[0]]]
        raise SingularSystemError(
            "quadratic-form matrix is numerically singular; "
            f"near-null combination loads on {', '.join(culprits)}"
            " (add a ridge or drop parameters)",
            null_labels=culprits,
        )
    theta = evecs @ ((evecs.T @ rhs) / evals)
    cond = lam_max / float(evals[0])
    return theta, evals, evecs, cond


def _normalize_mask(imap, mask):
    if mask is None:
        return np.ones(imap.q, dtype=bool)
    mask = np.asarray(mask, dtype=bool).reshape(-1)
    if mask.shape[0] != imap.q:
        raise ConfigError("mask length does not match the index map")
    if not mask.any():
        raise ConfigError("mask leaves no parameters to estimate")
    return mask


def solve(workspace, mask=None, fixed_values=None, ridge=0.0, with_se=True):
    """Minimize the quadratic objective over the unmasked parameters.

    Parameters held fixed (mask False) contribute W[free, fixed] @ value
    to the right-hand side; with all fixed values zero this is plain
    row/column deletion. ridge >= 0 adds ridge * I to the free block.
    """
    if ridge < 0:
        raise ConfigError("ridge must be nonnegative")
    imap = workspace.imap
    mask = _normalize_mask(imap, mask)
    free = np.flatnonzero(mask)
    fixed = np.flatnonzero(~mask)
    theta_full = np.zeros(imap.q)
    if fixed_values is not None:
        fv = np.asarray(fixed_values, dtype=float).reshape(-1)
        if fv.shape[0] != imap.q:
            raise ConfigError("fixed_values must be a full-length parameter vector")
        theta_full[fixed] = fv[fixed]

    d = workspace.linear_term
    wff = workspace.gram[np.ix_(free, free)]
    rhs = d[free]
    if fixed.size:
        rhs = rhs - workspace.gram[np.ix_(free, fixed)] @ theta_full[fixed]

    labels = [imap.labels[i] for i in free]
    theta_f, evals, evecs, cond = _solve_psd(wff, rhs, ridge, labels)
    theta_full[free] = theta_f

    cov = None
    if with_se:
        if workspace.z is None:
            raise ConfigError(
                "standard errors need per-observation data; this workspace "
                "was built from moments only (pass with_se=False)"
            )
        sigma0 = _error_moment(workspace, theta_full, mask)
        inv_w = evecs @ (evecs.T / evals[:, None])
        cov = inv_w @ sigma0 @ inv_w

    result = FitResult(
        labels=labels,
        estimates=theta_f,
        n=workspace.n,
        condition_number=cond,
        objective=workspace.objective(theta_full),
        ridge=float(ridge),
        cov_scaled=cov,
        fixed={imap.labels[i]: theta_full[i] for i in fixed},
        config={
            "weight_kind": workspace.weight.kind,
            "a_c": workspace.weight.a_c,
            "shape": [float(v) for v in workspace.shape],
        },
    )
    return result


def _error_moment(workspace, theta_full, mask):
    """Second pass: Sigma_0 = mean of (R(z) theta - r(z)) outer products
    over the free block."""
    imap = workspace.imap
    weight = workspace.weight
    z = workspace.z
    free = np.flatnonzero(mask)
    pi2 = 1.0 + 2.0 * workspace.shape
    acc = _Kahan((free.size, free.size))
    for start, stop in _blocks(workspace.n):
        zb = z[start:stop]
        ub = zb * zb
        hsq = _hsq(ub, weight)
        mu, nu = _mu_nu(zb, ub, imap)
        proj = mu - nu[:, :, None] * zb[:, None, :]
        g = np.einsum("bqp,q->bp", proj, theta_full)
        r_theta = hsq[:, None] * np.einsum("bqp,bp->bq", proj, g)
        lin = -hsq[:, None] * _laplacian_values(ub, imap)
        lin = lin + _wgrad_obs(ub, imap, weight)
        gv = _shape_gram_values(ub, imap) - nu[:, :, None]
        lin = lin - hsq[:, None] * np.einsum("bqp,p->bq", gv, pi2)
        resid = (r_theta - lin)[:, free]
        acc.add(resid.T @ resid)
    return acc.total / workspace.n


def standard_errors(workspace, result, mask=None):
    """Plug-in covariance of sqrt(n) * theta_hat for an existing fit."""
    if workspace.z is None:
        raise ConfigError(
            "standard errors need per-observation data; this workspace "
            "was built from moments only"
        )
    imap = workspace.imap
    mask = _normalize_mask(imap, mask)
    free = np.flatnonzero(mask)
    theta_full = np.zeros(imap.q)
    theta_full[free] = result.estimates
    for lab, val in result.fixed.items():
        theta_full[imap.index(lab)] = val
    sigma0 = _error_moment(workspace, theta_full, mask)
    wff = workspace.gram[np.ix_(free, free)]
    labels = [imap.labels[i] for i in free]
    _, evals, evecs, _ = _solve_psd(wff, np.zeros(free.size), result.ridge, labels)
    inv_w = evecs @ (evecs.T / evals[:, None])
    return inv_w @ sigma0 @ inv_w


def objective_value(workspace, theta):
    """Empirical score-matching objective at a full parameter vector."""
    return workspace.objective(theta)


# ---------------------------------------------------------------------------
# user-facing fits


def _as_dataset(data):
    return data if isinstance(data, ContinuousDataset) else ContinuousDataset(data)


def fit_hybrid(
    data,
    shape,
    weight,
    estimate_interaction=True,
    estimate_linear=False,
    ridge=0.0,
    with_se=True,
):
    """Fit interaction and linear parameters with fixed shape exponents.

    Parameters
    ----------
    data : ContinuousDataset or array_like
    shape : array_like (p,)
        Fixed exponents, each > -1 (zeros give the truncated Gaussian).
    weight : WeightSpec
    estimate_interaction, estimate_linear : bool or bool arrays
        Parameters not estimated are held at zero.
    """
    data = _as_dataset(data)
    imap = index_map(data.p)
    spec = ModelSpec(
        family="hybrid",
        p=data.p,
        shape=np.asarray(shape, dtype=float),
        estimate_interaction=estimate_interaction,
        estimate_linear=estimate_linear,
    )
    z = sqrt_transform(data)
    ws = build_workspace(z, weight, shape=spec.shape, imap=imap)
    result = solve(ws, mask=spec.estimation_mask(imap), ridge=ridge, with_se=with_se)
    result.config.update(
        {"family": "hybrid", "estimator": "continuous", "names": list(data.names)}
    )
    return result


def fit_truncated_gaussian(data, weight, estimate_linear=True, ridge=0.0, with_se=True):
    """Hybrid fit with all shape exponents at zero."""
    data = _as_dataset(data)
    result = fit_hybrid(
        data,
        np.zeros(data.p),
        weight,
        estimate_linear=estimate_linear,
        ridge=ridge,
        with_se=with_se,
    )
    result.config["family"] = "truncated-gaussian"
    return result


# ---------------------------------------------------------------------------
# Dirichlet family: log statistics, shape exponents estimated


def _loo_products(u):
    """Leave-one-out products along rows without dividing (zero-safe)."""
    nb, p = u.shape
    left = np.ones((nb, p))
    right = np.ones((nb, p))
    left[:, 1:] = np.cumprod(u[:, :-1], axis=1)
    right[:, :-1] = np.cumprod(u[:, ::-1], axis=1)[:, ::-1][:, 1:]
    return left * right


def _dirichlet_ratios(u, weight):
    """h^2 / u_j with the singular factors cancelled per branch."""
    cap = weight.a_c * weight.a_c
    nb, p = u.shape
    if weight.product_family:
        raw = u.prod(axis=1)
        loo = _loo_products(u)
        if not weight.capped:
            return loo
        bind = raw >= cap
        out = loo.copy()
        if np.any(bind):
            out[bind] = cap / u[bind]
        return out
    amin = np.argmin(u, axis=1)
    ua = u[np.arange(nb), amin]
    bind = ua >= cap
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(u > 0.0, ua[:, None] / u, 0.0)
    out[np.arange(nb), amin] = 1.0
    if np.any(bind):
        out[bind] = cap / u[bind]
    return out


def _dirichlet_wgrad_obs(u, weight, ratios):
    """Per-observation weight-derivative term for the log statistics."""
    cap = weight.a_c * weight.a_c
    nb, p = u.shape
    if weight.product_family:
        raw = u.prod(axis=1)
        hsq = np.minimum(raw, cap)
        smooth = (raw < cap).astype(float)
        return -2.0 * smooth[:, None] * (ratios - p * hsq[:, None])
    amin = np.argmin(u, axis=1)
    ua = u[np.arange(nb), amin]
    smooth = ua < cap
    vals = np.where(smooth[:, None], np.broadcast_to(2.0 * ua[:, None], u.shape), 0.0)
    vals[np.arange(nb), amin] = np.where(smooth, -2.0 * (1.0 - ua), 0.0)
    return vals


def fit_dirichlet(data, weight, ridge=0.0, with_se=True):
    """Estimate Dirichlet shape exponents by weighted score matching.

    Returns a FitResult on the shape scale (labels ``shape1 ..``), with
    the plug-in covariance already transformed to that scale.
    """
    data = _as_dataset(data)
    u = data.proportions
    n, p = u.shape
    dead = np.flatnonzero((u == 0.0).all(axis=0))
    if dead.size:
        raise UnidentifiableCategoryError(
            f"category {data.names[dead[0]]!r} is identically zero; "
            "its shape parameter is not identifiable"
        )

    acc_ratio = _Kahan(p)
    acc_hsq = _Kahan(())
    acc_lin = _Kahan(p)
    for start, stop in _blocks(n):
        ub = u[start:stop]
        hsq = _hsq(ub, weight)
        ratios = _dirichlet_ratios(ub, weight)
        acc_ratio.add(ratios.sum(axis=0))
        acc_hsq.add(hsq.sum())
        lin = (p - 2.0) * hsq[:, None] + ratios
        lin = lin + _dirichlet_wgrad_obs(ub, weight, ratios)
        acc_lin.add(lin.sum(axis=0))

    mean_ratio = acc_ratio.total / n
    mean_hsq = float(acc_hsq.total / n)
    gram = np.diag(mean_ratio) - mean_hsq * np.ones((p, p))
    d = acc_lin.total / n

    labels = [f"shape{j+1}" for j in range(p)]
    pi_hat, evals, evecs, cond = _solve_psd(gram, d, ridge, labels)
    beta_hat = 0.5 * (pi_hat - 1.0)

    cov = None
    if with_se:
        acc_sig = _Kahan((p, p))
        for start, stop in _blocks(n):
            ub = u[start:stop]
            hsq = _hsq(ub, weight)
            ratios = _dirichlet_ratios(ub, weight)
            r_pi = ratios * pi_hat[None, :] - np.outer(hsq, np.full(p, pi_hat.sum()))
            lin = (p - 2.0) * hsq[:, None] + ratios
            lin = lin + _dirichlet_wgrad_obs(ub, weight, ratios)
            resid = r_pi - lin
            acc_sig.add(resid.T @ resid)
        sigma0 = acc_sig.total / n
        inv_w = evecs @ (evecs.T / evals[:, None])
        cov = 0.25 * inv_w @ sigma0 @ inv_w  # delta method for (pi - 1) / 2

    objective = 0.5 * pi_hat @ gram @ pi_hat - pi_hat @ d
    return FitResult(
        labels=labels,
        estimates=beta_hat,
        n=n,
        condition_number=cond,
        objective=objective,
        ridge=float(ridge),
        cov_scaled=cov,
        config={
            "family": "dirichlet",
            "estimator": "dirichlet-score",
            "weight_kind": weight.kind,
            "a_c": weight.a_c,
            "names": list(data.names),
        },
    )


def fit_dirichlet_moments(data):
    """Baseline Dirichlet fit by marginal moment matching.

    The concentration is the average over categories of
    m_j (1 - m_j) / v_j - 1; shapes are concentration * m_j - 1.
    Used as a comparison baseline, not a score-matching route.
    """
    data = _as_dataset(data)
    u = data.proportions
    n, p = u.shape
    if n < 2:
        raise DataError("moment fit needs at least 2 rows")
    means = u.mean(axis=0)
    variances = u.var(axis=0, ddof=1)
    if np.any(means <= 0.0):
        j = int(np.argmax(means <= 0.0))
        raise UnidentifiableCategoryError(
            f"category {data.names[j]!r} has zero mean; moment fit undefined"
        )
    ok = variances > 0.0
    if not ok.any():
        raise DataError("all categories are degenerate; moment fit undefined")
    conc = means[ok] * (1.0 - means[ok]) / variances[ok] - 1.0
    alpha0 = float(conc.mean())
    if alpha0 <= 0.0:
        raise DataError("moment fit produced a nonpositive concentration")
    alpha = alpha0 * means
    labels = [f"shape{j+1}" for j in range(p)]
    return FitResult(
        labels=labels,
        estimates=alpha - 1.0,
        n=n,
        condition_number=1.0,
        objective=float("nan"),
        config={
            "family": "dirichlet",
            "estimator": "dirichlet-moment",
            "names": list(data.names),
        },
    )
