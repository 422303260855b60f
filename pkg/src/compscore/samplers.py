"""Samplers for the three model families and multinomial thinning.

All randomness flows from an RngConfig: a top-level seed plus a tuple of
substream indices fed to numpy's SeedSequence, so any component of a
larger run can be reproduced in isolation.

The truncated Gaussian is sampled by batch rejection from the matching
untruncated Gaussian. The general interaction model is sampled by
rejection from its Dirichlet base with an empirically updated envelope
constant: whenever a proposal's density ratio exceeds the current
envelope, the envelope is raised to 1.1 times that ratio and sampling
continues, after a fixed warm-up of discarded proposals. The envelope
trace is kept for diagnosis.
"""

from dataclasses import dataclass

import numpy as np

from .core import (
    ContinuousDataset,
    CountDataset,
    FAMILY_DIRICHLET,
    FAMILY_TRUNCATED_GAUSSIAN,
    ModelSpec,
)
from .errors import (
    DataError,
    EnvelopeFailureError,
    FamilyError,
    InfeasibleTruncationError,
)

__all__ = [
    "RngConfig",
    "RejectionStats",
    "sample_truncated_gaussian",
    "sample_dirichlet",
    "sample_hybrid",
    "sample_model",
    "sample_multinomial_counts",
]

# give up on a rejection sampler once this many proposals produced
# an acceptance rate below MIN_RATE
PATIENCE = 2_000_000
MIN_RATE = 1e-6


@dataclass(frozen=True)
class RngConfig:
    """Seed plus substream path. substream(i) derives an independent
    child stream deterministically.

    The path goes into SeedSequence's spawn_key, matching what repeated
    spawn() calls would produce. Appending the path to the entropy tuple
    instead would make substream(0) collide with its parent, because
    SeedSequence zero-pads short entropy.
    """

    seed: int
    key: tuple = ()

    def generator(self):
        ss = np.random.SeedSequence(
            int(self.seed), spawn_key=tuple(int(k) for k in self.key)
        )
        return np.random.default_rng(ss)

    def substream(self, index):
        return RngConfig(self.seed, tuple(self.key) + (int(index),))


@dataclass
class RejectionStats:
    """Bookkeeping for a rejection run. envelope_trace holds every value
    the envelope constant took, first to last."""

    attempted: int
    accepted: int
    envelope: float = 1.0
    envelope_updates: int = 0
    envelope_trace: list = None

    @property
    def acceptance_rate(self):
        return self.accepted / self.attempted if self.attempted else 0.0


def _next_batch(remaining, rate_guess):
    est = int(remaining / max(rate_guess, 1e-3) * 1.2) + 64
    return max(4096, min(est, 262_144))


def sample_truncated_gaussian(spec, n, rng):
    """Rejection sampling of the zero-shape interaction model.

    Draws the first p-1 coordinates from the matching Gaussian and keeps
    draws inside the simplex. Raises InfeasibleTruncationError when the
    acceptance region has numerically negligible mass.
    """
    if spec.family != FAMILY_TRUNCATED_GAUSSIAN:
        raise FamilyError("spec must be a truncated-Gaussian model")
    mu, sigma = spec.gaussian_moments()  # FamilyError unless negative definite
    chol = np.linalg.cholesky(sigma)
    gen = rng.generator()
    n = int(n)
    if n < 1:
        raise DataError("need at least one draw")

    rows = []
    filled = 0
    attempted = 0
    rate = 0.5
    while filled < n:
        batch = _next_batch(n - filled, rate)
        draw = gen.standard_normal((batch, spec.p - 1)) @ chol.T + mu
        keep = (draw >= 0.0).all(axis=1) & (draw.sum(axis=1) <= 1.0)
        got = draw[keep]
        if got.shape[0]:
            rows.append(got)
            filled += got.shape[0]
        attempted += batch
        rate = max(filled / attempted, 1e-8)
        if attempted >= PATIENCE and filled < attempted * MIN_RATE:
            raise InfeasibleTruncationError(
                f"acceptance rate {filled / attempted:.2e} after {attempted} "
                "proposals; truncation region has no usable mass"
            )
    r = np.vstack(rows)[:n]
    u = np.empty((n, spec.p))
    u[:, :-1] = r
    u[:, -1] = 1.0 - r.sum(axis=1)
    return ContinuousDataset(u)


def sample_dirichlet(spec_or_shape, n, rng):
    """Exact Dirichlet draws with parameters shape + 1."""
    if isinstance(spec_or_shape, ModelSpec):
        if spec_or_shape.family != FAMILY_DIRICHLET:
            raise FamilyError("spec must be a dirichlet model")
        shape = spec_or_shape.shape
    else:
        shape = np.asarray(spec_or_shape, dtype=float).reshape(-1)
        if np.any(shape <= -1.0):
            raise FamilyError("every shape parameter must exceed -1")
    n = int(n)
    if n < 1:
        raise DataError("need at least one draw")
    gen = rng.generator()
    u = gen.dirichlet(shape + 1.0, size=n)
    return ContinuousDataset(u)


def sample_hybrid(spec, n, rng, warmup=1000, safety=1.1, initial_envelope=1.0):
    """Envelope rejection from the Dirichlet base measure.

    Returns (dataset, RejectionStats). The envelope constant only ever
    grows; proposals during the warm-up update it but are never kept,
    which bounds the bias of an initially too-small envelope.
    """
    a_full = spec.full_interaction()
    b_full = spec.full_linear()
    alpha = spec.shape + 1.0
    n = int(n)
    if n < 1:
        raise DataError("need at least one draw")
    gen = rng.generator()

    env = float(initial_envelope)
    trace = [env]
    updates = 0
    kept = []
    kept_count = 0
    attempted = 0
    rate = 0.25
    while kept_count < n:
        batch = _next_batch(n - kept_count, rate)
        u_prop = gen.dirichlet(alpha, size=batch)
        coins = gen.uniform(size=batch)
        expo = np.einsum("bi,ij,bj->b", u_prop, a_full, u_prop) + u_prop @ b_full
        # overflow to inf is deliberate: an infinite ratio drives the
        # envelope to inf and the patience check below fails the run
        with np.errstate(over="ignore", invalid="ignore"):
            ratio = np.exp(expo)
        start = 0
        while start < batch:
            over = ratio[start:] > env
            stop = batch if not over.any() else start + int(np.argmax(over))
            if stop > start:
                seg = slice(start, stop)
                with np.errstate(invalid="ignore"):
                    acc = coins[seg] <= ratio[seg] / env
                past_warmup = np.arange(start, stop) + attempted >= warmup
                sel = u_prop[seg][acc & past_warmup]
                if sel.shape[0]:
                    kept.append(sel)
                    kept_count += sel.shape[0]
            if stop < batch:
                env = safety * float(ratio[stop])
                trace.append(env)
                updates += 1
            # stop == start retests the violator against the raised envelope
            start = stop
        attempted += batch
        effective = max(attempted - warmup, 1)
        rate = max(kept_count / effective, 1e-8)
        if effective >= PATIENCE and kept_count < effective * MIN_RATE:
            raise EnvelopeFailureError(
                f"acceptance rate {kept_count / effective:.2e} after "
                f"{attempted} proposals; envelope now {env:.3e}",
                trace=trace,
            )
    u = np.vstack(kept)[:n]
    stats = RejectionStats(
        attempted=attempted,
        accepted=n,
        envelope=env,
        envelope_updates=updates,
        envelope_trace=trace,
    )
    return ContinuousDataset(u), stats


def sample_model(spec, n, rng, return_stats=False):
    """Family dispatch. Stats are None except for the envelope sampler."""
    if spec.family == FAMILY_TRUNCATED_GAUSSIAN:
        data, stats = sample_truncated_gaussian(spec, n, rng), None
    elif spec.family == FAMILY_DIRICHLET:
        data, stats = sample_dirichlet(spec, n, rng), None
    else:
        data, stats = sample_hybrid(spec, n, rng)
    return (data, stats) if return_stats else data


def sample_multinomial_counts(latent, totals, rng):
    """Draw count rows x_i ~ Multinomial(m_i, u_i) from latent rows.

    Sequential conditional binomials, vectorized over rows. The caller
    keeps the latent dataset; nothing is lost by thinning.
    """
    u = latent.proportions
    n, p = u.shape
    m = np.broadcast_to(np.asarray(totals, dtype=np.int64), (n,)).copy()
    if np.any(m < 1):
        raise DataError("every total must be at least 1")
    gen = rng.generator()
    x = np.zeros((n, p), dtype=np.int64)
    rem_m = m.copy()
    rem_p = np.ones(n)
    for j in range(p - 1):
        safe = rem_p > 0.0
        pj = np.where(safe, u[:, j] / np.where(safe, rem_p, 1.0), 0.0)
        pj = np.clip(pj, 0.0, 1.0)
        x[:, j] = gen.binomial(rem_m, pj)
        rem_m = rem_m - x[:, j]
        rem_p = rem_p - u[:, j]
    x[:, p - 1] = rem_m
    return CountDataset(x, totals=m, names=latent.names)
