"""The log-covariance-prior model.

The covariance is parameterized through ``alpha = vec_star(log Sigma)``. The
return likelihood, exactly ``exp(-m/2 * tr(A + S e^-A))`` with
``A = log Sigma`` and ``S`` the mean-centred scatter, is replaced by a
Gaussian in ``alpha`` obtained from a second-order Volterra expansion of the
matrix exponential around ``log S``: precision ``Q`` built from eigenvector
coefficient vectors ``f_ij`` and eigenvalue ratios ``xi_ij``. The prior puts
one normal on the diagonal block of ``alpha`` and another on the
off-diagonal block; integrating the two location parameters out under a flat
prior leaves the centering precision ``G``.

Sampling alternates a Metropolis-Hastings update of ``alpha`` (the Gaussian
approximation proposes, the exact density corrects), inverse-gamma updates
of the two prior variances, and the shared normal mean update.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .diagnostics import PosteriorSummary, summarize_mu_sigma
from .errors import (
    BasisError,
    ChainError,
    DimensionError,
    InsufficientDataError,
    ModelSizeError,
    ValidationError,
)
from .inverse_wishart import OMEGA_FLOOR_HARD, _mu_conditional_pre, _TraceWriter
from .linalg import (
    log_det_spd,
    matrix_exp_sym,
    require_spd,
    spd_inverse,
    symmetrize,
    vec_star,
    vec_star_bilinear,
    vec_star_dim,
    vec_star_inverse,
)
from .sampling import RngStream, sample_inverse_gamma, sample_mvn
from .views import ViewSet

log = logging.getLogger(__name__)

# Below this gap in log-eigenvalues the raw xi formula is 0/0; switch to the
# series of (2 sinh(h/2) / h)^2.
_XI_SERIES_THRESHOLD = 1e-8
# Keeps the inverse-gamma draws defined at the measure-zero corner where all
# alpha entries of a block coincide.
IG_SCALE_FLOOR = 1e-300


def xi_coefficient(d_i: float, d_j: float) -> float:
    """Eigenvalue-pair weight ``(d_i - d_j)^2 / (d_i d_j (log d_i - log d_j)^2)``.

    Equals ``g(h)^2`` for ``h = log(d_i/d_j)`` and ``g(h) = 2 sinh(h/2)/h``,
    which is the form used near ``d_i == d_j`` (limit value 1).
    """
    if d_i <= 0 or d_j <= 0:
        raise ValidationError("xi", "eigenvalues must be positive")
    h = np.log(d_i) - np.log(d_j)
    if abs(h) < _XI_SERIES_THRESHOLD:
        g = 1.0 + h * h / 24.0 + h**4 / 1920.0
        return float(g * g)
    diff = d_i - d_j
    return float(diff * diff / (d_i * d_j * h * h))


def build_f_vectors(eigvecs) -> np.ndarray:
    """Coefficient vectors ``f_ij`` with ``vec_star(A) @ f[i, j] == e_i' A e_j``
    for every symmetric ``A``.

    The slot of a diagonal entry ``A[k, k]`` carries ``e_i[k] e_j[k]``; the
    slot of ``A[k, l]`` (k < l) carries ``e_i[k] e_j[l] + e_i[l] e_j[k]``.
    Returns shape ``(n, n, d)`` (symmetric in the first two axes).
    """
    e = np.asarray(eigvecs, dtype=float)
    n = e.shape[0]
    gram_dev = np.abs(e.T @ e - np.eye(n)).max()
    if gram_dev > 1e-8:
        raise BasisError(f"eigenvector basis not orthonormal (Gram deviation {gram_dev:.3e})")
    d = vec_star_dim(n)
    f = np.empty((n, n, d))
    for i in range(n):
        for j in range(i, n):
            fij = vec_star_bilinear(np.outer(e[:, i], e[:, j]))
            f[i, j] = fij
            f[j, i] = fij
    return f


@dataclass(frozen=True)
class VolterraQuadratic:
    """The Gaussian approximation of the likelihood in alpha space:
    center ``lambda_vec = vec_star(log S)`` and precision ``q_matrix``."""

    lambda_vec: np.ndarray
    q_matrix: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    log_det_s: float


def build_Q(s_matrix, m: int) -> VolterraQuadratic:
    """Assemble the approximation precision

    ``Q = m/2 * sum_i f_ii f_ii' + m * sum_{i<j} xi_ij f_ij f_ij'``

    from the eigen-decomposition of the scatter matrix. Near-degenerate
    eigenvalue pairs go through the series limit of xi, never an error.
    """
    s_matrix = require_spd(s_matrix, "scatter matrix")
    if m < 1:
        raise ValidationError("m", "must be >= 1")
    n = s_matrix.shape[0]
    evals, evecs = np.linalg.eigh(s_matrix)
    f = build_f_vectors(evecs)
    rows = []
    weights = []
    for i in range(n):
        rows.append(f[i, i])
        weights.append(m / 2.0)
    for i in range(n):
        for j in range(i + 1, n):
            rows.append(f[i, j])
            weights.append(m * xi_coefficient(evals[i], evals[j]))
    stack = np.array(rows)
    terms = (stack * np.asarray(weights)[:, None]).T @ stack

    log_evals = np.log(evals)
    lambda_vec = vec_star((evecs * log_evals) @ evecs.T)
    return VolterraQuadratic(
        lambda_vec=lambda_vec,
        q_matrix=symmetrize(terms),
        eigvals=evals,
        eigvecs=evecs,
        log_det_s=float(log_evals.sum()),
    )


def volterra_log_density(alpha, s_matrix, m: int,
                         quad: VolterraQuadratic | None = None) -> float:
    """Log of the approximate return density as a function of alpha:

    ``-(mn/2) log(2 pi e) - (m/2) log det S - (alpha-lambda)' Q (alpha-lambda)/2``.

    At ``alpha = vec_star(log S)`` this equals the exact Gaussian
    log-likelihood evaluated at ``Sigma = S``.
    """
    if quad is None:
        quad = build_Q(s_matrix, m)
    alpha = np.asarray(alpha, dtype=float)
    n = quad.eigvals.size
    diff = alpha - quad.lambda_vec
    return float(
        -0.5 * m * n * np.log(2.0 * np.pi * np.e)
        - 0.5 * m * quad.log_det_s
        - 0.5 * diff @ quad.q_matrix @ diff
    )


def exact_log_target(alpha, s_matrix, m: int, g_matrix=None) -> float:
    """Unnormalized log of the exact alpha conditional:

    ``-(m/2) tr(A + S e^-A) - alpha' G alpha / 2`` with ``A`` the symmetric
    matrix whose stacking is alpha. ``g_matrix=None`` drops the prior term.
    """
    alpha = np.asarray(alpha, dtype=float)
    a = vec_star_inverse(alpha)
    s_matrix = np.asarray(s_matrix, dtype=float)
    w, v = np.linalg.eigh(a)
    exp_neg_a = (v * np.exp(-w)) @ v.T
    trace_term = float(w.sum() + np.sum(s_matrix * exp_neg_a))
    val = -0.5 * m * trace_term
    if g_matrix is not None:
        val -= 0.5 * float(alpha @ g_matrix @ alpha)
    return val


def approx_log_target(alpha, g_matrix, q_matrix, lambda_vec) -> float:
    """Unnormalized log of the Gaussian proposal target (approximate
    likelihood times the alpha prior)."""
    alpha = np.asarray(alpha, dtype=float)
    diff = alpha - np.asarray(lambda_vec, dtype=float)
    val = -0.5 * float(diff @ q_matrix @ diff)
    if g_matrix is not None:
        val -= 0.5 * float(alpha @ g_matrix @ alpha)
    return val


def mh_log_ratio(candidate, current, s_matrix, m: int, g_matrix, q_matrix,
                 lambda_vec) -> float:
    """Log acceptance ratio of the independence proposal:

    ``[exact(candidate) - exact(current)] + [approx(current) - approx(candidate)]``

    with both sides built from the current iteration's S, G, Q.
    """
    return (
        exact_log_target(candidate, s_matrix, m, g_matrix)
        - exact_log_target(current, s_matrix, m, g_matrix)
        + approx_log_target(current, g_matrix, q_matrix, lambda_vec)
        - approx_log_target(candidate, g_matrix, q_matrix, lambda_vec)
    )


@dataclass(frozen=True)
class StructuralDesign:
    """Block structure of the alpha prior: the first n stacked coordinates
    (the log-variance diagonal) share one variance, the remaining d-n (the
    off-diagonal couplings) share the other."""

    n: int
    sigma1_sq: float
    sigma2_sq: float

    def __post_init__(self):
        if self.n < 2:
            raise ModelSizeError("structural design needs n >= 2")
        if self.sigma1_sq <= 0 or self.sigma2_sq <= 0:
            raise ValidationError("sigma_sq", "block variances must be positive")

    @property
    def d(self) -> int:
        return vec_star_dim(self.n)

    @property
    def j_matrix(self) -> np.ndarray:
        j = np.zeros((self.d, 2))
        j[: self.n, 0] = 1.0
        j[self.n :, 1] = 1.0
        return j

    @property
    def delta_diag(self) -> np.ndarray:
        out = np.empty(self.d)
        out[: self.n] = self.sigma1_sq
        out[self.n :] = self.sigma2_sq
        return out


def build_G(design: StructuralDesign) -> np.ndarray:
    """Prior precision after integrating the block locations out:

    ``G = Delta^-1 - Delta^-1 J (J' Delta^-1 J)^-1 J' Delta^-1``.

    G annihilates the columns of J, i.e. adding a constant to either alpha
    block leaves the prior quadratic unchanged.
    """
    delta_inv = 1.0 / design.delta_diag
    j = design.j_matrix
    a = delta_inv[:, None] * j
    core = j.T @ a
    g = np.diag(delta_inv) - a @ np.linalg.solve(core, a.T)
    return symmetrize(g)


def sigma_sq_conditionals(alpha, n: int):
    """Inverse-gamma parameters of the two block-variance conditionals:

    shapes ``(n-3)/2`` and ``(d-n-3)/2``, scales half the within-block sums
    of squared deviations from the block mean. Scales are floored at
    ``IG_SCALE_FLOOR`` so the degenerate equal-entries corner stays
    sampleable. Shapes are positive only for n >= 4.
    """
    if n < 4:
        raise ModelSizeError(
            f"log-covariance prior needs n >= 4 (shape parameters (n-3)/2 and "
            f"(d-n-3)/2 must be positive; n={n} makes them improper)"
        )
    alpha = np.asarray(alpha, dtype=float)
    d = vec_star_dim(n)
    if alpha.shape != (d,):
        raise DimensionError(f"alpha must have length {d} for n={n}")
    diag, off = alpha[:n], alpha[n:]
    scale1 = 0.5 * float(np.sum((diag - diag.mean()) ** 2))
    scale2 = 0.5 * float(np.sum((off - off.mean()) ** 2))
    return (
        ((n - 3) / 2.0, max(scale1, IG_SCALE_FLOOR)),
        ((d - n - 3) / 2.0, max(scale2, IG_SCALE_FLOOR)),
    )


@dataclass(frozen=True)
class LogSigmaConfig:
    """Chain controls for the log-covariance sampler."""

    m: int
    iters: int
    burn: int
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError("m", "must be >= 1")
        if not 0 <= self.burn < self.iters:
            raise ValidationError("burn", "need 0 <= burn < iters")


@dataclass
class LogSigmaState:
    """One iteration's chain state."""

    alpha: np.ndarray
    sigma: np.ndarray
    sigma1_sq: float
    sigma2_sq: float
    mu: np.ndarray


def _scatter(returns, mu) -> np.ndarray:
    resid = returns - mu
    return symmetrize(resid.T @ resid / returns.shape[0])


def gibbs_log_sigma(returns_current, views: ViewSet, cfg: LogSigmaConfig,
                    trace_path=None) -> PosteriorSummary:
    """Metropolis-Hastings-within-Gibbs sampler for the log-covariance model.

    Per iteration: (1) propose alpha from N((Q+G)^-1 Q lambda, (Q+G)^-1) and
    accept with the exact/approximate density ratio, (2) rebuild Sigma from
    alpha when accepted, (3) draw the two block variances, (4) draw mu from
    the shared mean conditional with the investor's P, then (5) recompute the
    scatter, its eigen-quantities, Q and G for the next sweep.

    Needs n >= 4 (prior shape positivity) and m > n (SPD scatter). Reports
    burn and post-burn acceptance rates separately; occurrences of the
    inverse-gamma scale floor are counted in ``extra``.
    """
    returns_current = np.asarray(returns_current, dtype=float)
    if returns_current.ndim != 2:
        raise DimensionError("returns must be a 2-D (m, n) array")
    m, n = returns_current.shape
    if n < 4:
        raise ModelSizeError(
            f"log-covariance prior needs n >= 4 assets, got n={n}"
        )
    if m <= n:
        raise InsufficientDataError(
            f"need m > n for an SPD scatter matrix, got m={m}, n={n}"
        )
    if cfg.m != m:
        raise ValidationError("m", f"config m={cfg.m} but current window has {m} rows")
    if views.n != n:
        raise DimensionError("returns and views disagree on the number of assets")
    if float(views.omega_diag.min()) < OMEGA_FLOOR_HARD:
        raise ValidationError(
            "views.omega",
            f"entry {views.omega_diag.min():.3e} below the hard floor {OMEGA_FLOOR_HARD:.0e}",
        )

    rbar = returns_current.mean(axis=0)
    omega_inv = np.diag(1.0 / views.omega_diag)
    prior_prec = views.p.T @ omega_inv @ views.p
    prior_vec = views.p.T @ (omega_inv @ views.q)

    # Data-centred start: Sigma at the scatter of the sample mean, block
    # variances at the empirical variances of the matching alpha blocks.
    s_mat = require_spd(_scatter(returns_current, rbar), "initial scatter")
    quad = build_Q(s_mat, m)
    state = LogSigmaState(
        alpha=quad.lambda_vec.copy(),
        sigma=s_mat.copy(),
        sigma1_sq=max(float(np.var(quad.lambda_vec[:n])), 1e-12),
        sigma2_sq=max(float(np.var(quad.lambda_vec[n:])), 1e-12),
        mu=rbar.copy(),
    )
    g_mat = build_G(StructuralDesign(n, state.sigma1_sq, state.sigma2_sq))

    rng = RngStream(cfg.seed, cfg.stream_id)
    mu_draws = np.empty((cfg.iters, n))
    sigma_sum = np.zeros((n, n))
    accepts = np.zeros(cfg.iters, dtype=bool)
    floor_hits = 0

    trace = _TraceWriter(trace_path, n, mh=True) if trace_path else None
    try:
        for t in range(cfg.iters):
            prop_cov = spd_inverse(quad.q_matrix + g_mat, "MH proposal precision")
            alpha_star = prop_cov @ (quad.q_matrix @ quad.lambda_vec)
            candidate = sample_mvn(alpha_star, prop_cov, rng)
            log_rho = mh_log_ratio(
                candidate, state.alpha, s_mat, m, g_mat, quad.q_matrix, quad.lambda_vec
            )
            u = rng.generator.random()
            if np.log(u) < log_rho:
                state.alpha = candidate
                state.sigma = matrix_exp_sym(vec_star_inverse(candidate))
                accepts[t] = True

            (sh1, sc1), (sh2, sc2) = sigma_sq_conditionals(state.alpha, n)
            floor_hits += int(sc1 <= IG_SCALE_FLOOR) + int(sc2 <= IG_SCALE_FLOOR)
            state.sigma1_sq = sample_inverse_gamma(sh1, sc1, rng)
            state.sigma2_sq = sample_inverse_gamma(sh2, sc2, rng)

            sigma_inv = spd_inverse(state.sigma, "Sigma")
            mean, cov = _mu_conditional_pre(rbar, sigma_inv, prior_prec, prior_vec, m)
            state.mu = sample_mvn(mean, cov, rng)
            if not (np.all(np.isfinite(state.mu)) and np.all(np.isfinite(state.alpha))):
                raise ChainError("non-finite state in log-covariance chain", iteration=t)

            s_mat = require_spd(_scatter(returns_current, state.mu), "scatter matrix")
            quad = build_Q(s_mat, m)
            g_mat = build_G(StructuralDesign(n, state.sigma1_sq, state.sigma2_sq))

            mu_draws[t] = state.mu
            if t >= cfg.burn:
                sigma_sum += state.sigma
            if trace is not None:
                trace.row(t, state.mu, log_det_spd(state.sigma), int(accepts[t]))
    finally:
        if trace is not None:
            trace.close()

    post = slice(cfg.burn, cfg.iters)
    accept_post = float(accepts[post].mean())
    accept_burn = float(accepts[: cfg.burn].mean()) if cfg.burn else float("nan")
    return summarize_mu_sigma(
        mu_draws[post],
        sigma_sum / (cfg.iters - cfg.burn),
        accept_post=accept_post,
        accept_burn=accept_burn,
        extra={"ig_scale_floor_hits": floor_hits},
    )
