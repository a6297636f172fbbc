"""Reproducible random variates for the Gibbs and MH samplers.

Streams are keyed by ``(seed, stream_id)``: the same pair always replays the
same sequence, and distinct stream ids give statistically independent
sequences, so parallel tasks each own one stream (stream_id = task index).

The Inverse Wishart is parameterized by the density exponent
``det(X)^-(nu+n+1)/2 * exp(-tr(scale @ X^-1)/2)`` — i.e. ``nu`` is the
degrees of freedom that appears in the conjugate covariance posterior, and
``E[X] = scale / (nu - n - 1)`` when ``nu > n + 1``. Conventions for this
family vary between texts; this one is pinned here on purpose.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegreesOfFreedomError,
    DimensionError,
    NotPositiveDefiniteError,
    ParameterError,
)


@dataclass
class RngStream:
    """A named, replayable random stream."""

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError("seed must fit in 64 unsigned bits")
        if not 0 <= int(self.stream_id) < 2**64:
            raise ParameterError("stream_id must fit in 64 unsigned bits")
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream_id),))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen


def sample_mvn(mean, cov, rng: RngStream) -> np.ndarray:
    """One draw from N(mean, cov) via the Cholesky factor of ``cov``."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or mean.shape != (cov.shape[0],):
        raise DimensionError(
            f"sample_mvn: mean {mean.shape} does not match cov {cov.shape}"
        )
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("sample_mvn: covariance is not SPD") from exc
    z = rng.generator.standard_normal(mean.size)
    return mean + chol @ z


def _bartlett_factor(dof: float, n: int, rng: RngStream) -> np.ndarray:
    """Lower-triangular Bartlett factor: chi on the diagonal, normals below.

    Draw order is fixed (diagonal first, then the strictly-lower block) so a
    stream replays identically.
    """
    a = np.zeros((n, n))
    for i in range(n):
        a[i, i] = np.sqrt(rng.generator.chisquare(dof - i))
    if n > 1:
        idx = np.tril_indices(n, k=-1)
        a[idx] = rng.generator.standard_normal(len(idx[0]))
    return a


def sample_wishart(dof: float, scale, rng: RngStream) -> np.ndarray:
    """One draw from Wishart(dof, scale) via the Bartlett construction.

    Non-integer ``dof`` is allowed (it only enters through chi-square
    marginals); requires ``dof > n - 1``.
    """
    scale = np.asarray(scale, dtype=float)
    n = scale.shape[0]
    if dof <= n - 1:
        raise DegreesOfFreedomError(f"Wishart needs dof > n-1 = {n - 1}, got {dof}")
    try:
        chol = np.linalg.cholesky(scale)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("sample_wishart: scale is not SPD") from exc
    a = _bartlett_factor(dof, n, rng)
    m = chol @ a
    return m @ m.T


def sample_inverse_wishart(dof: float, scale, rng: RngStream) -> np.ndarray:
    """One draw from the Inverse Wishart with the density pinned above.

    Implemented as the inverse of a Wishart(dof, scale^-1) Bartlett draw,
    without forming scale^-1 explicitly: with ``scale = L L'`` and Bartlett
    factor ``A``, the draw is ``M M'`` for ``M' = A^-1 L'``.
    """
    from scipy.linalg import solve_triangular

    scale = np.asarray(scale, dtype=float)
    n = scale.shape[0]
    if dof <= n - 1:
        raise DegreesOfFreedomError(
            f"Inverse Wishart needs dof > n-1 = {n - 1}, got {dof}"
        )
    try:
        chol = np.linalg.cholesky(scale)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("sample_inverse_wishart: scale is not SPD") from exc
    a = _bartlett_factor(dof, n, rng)
    mt = solve_triangular(a, chol.T, lower=True)
    x = mt.T @ mt
    return 0.5 * (x + x.T)


def sample_inverse_gamma(shape: float, scale_param: float, rng: RngStream) -> float:
    """One draw with density proportional to ``x^-(shape+1) * exp(-scale/x)``.

    Mean is ``scale / (shape - 1)`` for ``shape > 1``.
    """
    if shape <= 0 or scale_param <= 0:
        raise ParameterError(
            f"inverse gamma needs positive parameters, got ({shape}, {scale_param})"
        )
    g = rng.generator.gamma(shape, 1.0)
    return float(scale_param / g)
