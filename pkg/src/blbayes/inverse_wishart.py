"""Gibbs samplers for the Inverse-Wishart covariance prior.

Two variants share the same conditionals:

* ``gibbs_augmented`` transforms the returns into view space with an
  augmented invertible P*, runs the sampler there (the mean conditional sees
  an identity pick matrix), and transforms the posterior back.
* ``gibbs_nonsquare`` keeps the investor's P untouched and samples the mean
  in asset space, where P enters the conditional directly.

A chain alternates one covariance draw (Inverse Wishart) with one mean draw
(multivariate normal); point estimates are post-burn arithmetic means.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, replace

import numpy as np

from .diagnostics import PosteriorSummary, summarize_mu_sigma
from .errors import ChainError, DimensionError, ValidationError
from .linalg import log_det_spd, require_spd, spd_inverse, symmetrize
from .sampling import RngStream, sample_inverse_wishart, sample_mvn
from .views import ViewSet, augment_to_invertible, build_transformed_hyperparams

log = logging.getLogger(__name__)

# Smallest view variance each variant tolerates before the covariance draws
# degrade; override with allow_small_omega=True at your own risk.
OMEGA_FLOOR_AUGMENTED = 1e-6
OMEGA_FLOOR_NONSQUARE = 1e-9
OMEGA_FLOOR_HARD = 1e-12


@dataclass(frozen=True)
class IwConfig:
    """Hyperparameters and chain controls for the Inverse-Wishart models."""

    nu: float
    sigma0: np.ndarray
    m: int
    iters: int
    burn: int
    seed: int
    stream_id: int = 0
    allow_small_omega: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sigma0", require_spd(self.sigma0, "Sigma0"))
        n = self.sigma0.shape[0]
        if self.nu <= n - 1:
            raise ValidationError("nu", f"must exceed n-1 = {n - 1}")
        if self.m < 1:
            raise ValidationError("m", "must be >= 1")
        if not 0 <= self.burn < self.iters:
            raise ValidationError("burn", "need 0 <= burn < iters")

    @classmethod
    def default_for(cls, hist_cov, m: int, iters: int, burn: int, seed: int,
                    nu: float | None = None, **kw) -> "IwConfig":
        """Defaults: nu = n + 2 (smallest integer with a finite prior mean)
        and Sigma0 = (nu - n - 1) * hist_cov, so the prior mean equals the
        historical sample covariance."""
        hist_cov = require_spd(hist_cov, "historical covariance")
        n = hist_cov.shape[0]
        if nu is None:
            nu = n + 2
        scale = max(nu - n - 1, 1e-8)
        return cls(nu=nu, sigma0=scale * hist_cov, m=m, iters=iters, burn=burn,
                   seed=seed, **kw)

    def with_seed(self, seed: int, stream_id: int = 0) -> "IwConfig":
        return replace(self, seed=seed, stream_id=stream_id)


def check_omega_floor(views: ViewSet, floor: float, allow_small: bool, variant: str):
    lo = float(views.omega_diag.min())
    if lo < OMEGA_FLOOR_HARD:
        raise ValidationError(
            "views.omega", f"entry {lo:.3e} is below the hard floor {OMEGA_FLOOR_HARD:.0e}"
        )
    if lo < floor:
        if not allow_small:
            raise ValidationError(
                "views.omega",
                f"entry {lo:.3e} is below the {variant} floor {floor:.0e}; "
                "set allow_small_omega to override",
            )
        log.warning(
            "%s: omega entry %.3e below the tested floor %.0e; proceeding on request",
            variant, lo, floor,
        )


def mu_conditional(rbar, sigma, q_eff, omega_eff, p_eff, m: int):
    """Mean and covariance of the mean-return conditional.

    ``cov = (m Sigma^-1 + P' Omega^-1 P)^-1`` and
    ``mean = cov (m Sigma^-1 rbar + P' Omega^-1 q)``. ``p_eff=None`` means
    the identity (view-space variant); ``omega_eff=None`` drops the view
    term entirely (the vague-views limit: mean -> rbar, cov -> Sigma/m).
    """
    rbar = np.asarray(rbar, dtype=float)
    n = rbar.size
    sigma_inv = spd_inverse(sigma, "mu conditional Sigma")
    if omega_eff is None:
        prior_prec = np.zeros((n, n))
        prior_vec = np.zeros(n)
    else:
        omega_inv = spd_inverse(omega_eff, "mu conditional Omega")
        q_eff = np.asarray(q_eff, dtype=float)
        if p_eff is None:
            if q_eff.shape != (n,):
                raise DimensionError("q_eff length must be n when P_eff is identity")
            prior_prec = omega_inv
            prior_vec = omega_inv @ q_eff
        else:
            p_eff = np.asarray(p_eff, dtype=float)
            prior_prec = p_eff.T @ omega_inv @ p_eff
            prior_vec = p_eff.T @ (omega_inv @ q_eff)
    return _mu_conditional_pre(rbar, sigma_inv, prior_prec, prior_vec, m)


def _mu_conditional_pre(rbar, sigma_inv, prior_prec, prior_vec, m: int):
    cov = spd_inverse(symmetrize(m * sigma_inv + prior_prec), "mu conditional precision")
    mean = cov @ (m * sigma_inv @ rbar + prior_vec)
    return mean, cov


def sigma_conditional(residual_scatter, nu: float, sigma0, m: int):
    """Inverse-Wishart parameters of the covariance conditional:
    ``(nu + m, Sigma0 + sum_i (r_i - mu)(r_i - mu)')``."""
    scatter = symmetrize(np.asarray(residual_scatter, dtype=float))
    return nu + m, np.asarray(sigma0, dtype=float) + scatter


class _TraceWriter:
    """Streams per-iteration chain state to CSV."""

    def __init__(self, path, n: int, mh: bool = False):
        self._fh = open(path, "w", newline="")
        self._w = csv.writer(self._fh)
        cols = ["iteration"] + [f"mu_{i}" for i in range(n)] + ["logdet_sigma"]
        if mh:
            cols.append("accepted")
        self._w.writerow(cols)

    def row(self, iteration: int, mu, logdet: float, accepted: int | None = None):
        cells = [str(iteration)] + [format(v, ".17g") for v in mu]
        cells.append(format(logdet, ".17g"))
        if accepted is not None:
            cells.append(str(accepted))
        self._w.writerow(cells)

    def close(self):
        self._fh.close()


def _run_iw_chain(returns, q_eff, omega_eff, p_eff, cfg: IwConfig, sigma0,
                  trace: _TraceWriter | None):
    """Shared chain body: covariance draw given the mean, mean draw given the
    covariance. Returns (mu_draws over all iterations, post-burn Sigma mean)."""
    returns = np.asarray(returns, dtype=float)
    m, n = returns.shape
    if m != cfg.m:
        raise ValidationError("m", f"config m={cfg.m} but current window has {m} rows")
    rbar = returns.mean(axis=0)
    omega_inv = spd_inverse(omega_eff, "Omega")
    if p_eff is None:
        prior_prec = omega_inv
        prior_vec = omega_inv @ q_eff
    else:
        prior_prec = p_eff.T @ omega_inv @ p_eff
        prior_vec = p_eff.T @ (omega_inv @ q_eff)

    rng = RngStream(cfg.seed, cfg.stream_id)
    mu = rbar.copy()
    mu_draws = np.empty((cfg.iters, n))
    sigma_sum = np.zeros((n, n))
    for t in range(cfg.iters):
        resid = returns - mu
        dof, scale = sigma_conditional(resid.T @ resid, cfg.nu, sigma0, m)
        sigma = sample_inverse_wishart(dof, scale, rng)
        sigma_inv = spd_inverse(sigma, "Sigma draw")
        mean, cov = _mu_conditional_pre(rbar, sigma_inv, prior_prec, prior_vec, m)
        mu = sample_mvn(mean, cov, rng)
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
            raise ChainError("non-finite draw in Inverse-Wishart chain", iteration=t)
        mu_draws[t] = mu
        if t >= cfg.burn:
            sigma_sum += sigma
        if trace is not None:
            trace.row(t, mu, log_det_spd(sigma))
    return mu_draws, sigma_sum / (cfg.iters - cfg.burn)


def gibbs_augmented(returns_current, views: ViewSet, monthly_mean_vectors,
                    cfg: IwConfig, trace_path=None) -> PosteriorSummary:
    """View-space sampler: augment P, transform the data and hyperparameters,
    run the chain with an identity pick matrix, and map the posterior back to
    asset space.

    ``cfg.sigma0`` is expressed in asset space and transformed covariantly
    (P* Sigma0 P*'), so the prior describes the same covariance either way.
    The trace, when requested, records the chain as sampled (view space).
    """
    check_omega_floor(views, OMEGA_FLOOR_AUGMENTED, cfg.allow_small_omega, "augmented")
    returns_current = np.asarray(returns_current, dtype=float)
    aug = augment_to_invertible(views.p)
    p_star = aug.p_star
    p_star_inv = np.linalg.inv(p_star)
    q_star, omega_star = build_transformed_hyperparams(
        aug, views.q, views.omega, monthly_mean_vectors
    )
    sigma0_star = symmetrize(p_star @ cfg.sigma0 @ p_star.T)
    transformed = returns_current @ p_star.T

    trace = _TraceWriter(trace_path, p_star.shape[0]) if trace_path else None
    try:
        mu_star_draws, sigma_star_mean = _run_iw_chain(
            transformed, q_star, omega_star, None, cfg, sigma0_star, trace
        )
    finally:
        if trace is not None:
            trace.close()

    mu_draws = mu_star_draws @ p_star_inv.T
    sigma_post = symmetrize(p_star_inv @ sigma_star_mean @ p_star_inv.T)
    return summarize_mu_sigma(mu_draws[cfg.burn:], sigma_post)


def gibbs_nonsquare(returns_current, views: ViewSet, cfg: IwConfig,
                    trace_path=None) -> PosteriorSummary:
    """Asset-space sampler with the investor's P unmodified."""
    check_omega_floor(views, OMEGA_FLOOR_NONSQUARE, cfg.allow_small_omega, "non-square")
    returns_current = np.asarray(returns_current, dtype=float)
    if returns_current.shape[1] != views.n:
        raise DimensionError("returns and views disagree on the number of assets")
    trace = _TraceWriter(trace_path, views.n) if trace_path else None
    try:
        mu_draws, sigma_mean = _run_iw_chain(
            returns_current, views.q, views.omega, views.p, cfg, cfg.sigma0, trace
        )
    finally:
        if trace is not None:
            trace.close()
    return summarize_mu_sigma(mu_draws[cfg.burn:], sigma_mean)
