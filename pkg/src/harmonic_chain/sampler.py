"""Exact draws from the stationary Gaussian law of ``(a_1..a_N)``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import covariance as cov
from . import streams
from .errors import DomainError, NumericalError

# undamped odd separations come from the time-domain integral up to this site,
# beyond it from the Weber-Schafheitlin closed form
TIME_DOMAIN_SITES = 32
_JITTERS = (0.0, 1e-12, 1e-11, 1e-10)


def stationary_cov_matrix(N: int, nu: float = 0.0) -> cov.CovarianceWindow:
    """Assemble the window covariance and confirm it is positive semidefinite."""
    if N < 1:
        raise DomainError(f"window size must be >= 1, got {N}")
    if nu < 0:
        raise DomainError(f"nu must be >= 0, got {nu}")
    prov = np.empty((N, N), dtype=object)
    if nu > 0:
        mat = cov.cov_time_domain_matrix(N, nu)
        prov[:] = cov.TIME_DOMAIN
    else:
        mat = np.empty((N, N))
        td = cov.cov_time_domain_matrix(min(N, TIME_DOMAIN_SITES), 0.0)
        for m in range(1, N + 1):
            for n in range(m, N + 1):
                if (n - m) % 2 == 0:
                    v, p = cov.cov_even_closed(m, n), cov.CLOSED_FORM
                elif n <= TIME_DOMAIN_SITES:
                    v, p = td[m - 1, n - 1], cov.TIME_DOMAIN
                else:
                    v, p = cov.cov_weber_schafheitlin(m, n), cov.WEBER_SCHAFHEITLIN
                mat[m - 1, n - 1] = mat[n - 1, m - 1] = v
                prov[m - 1, n - 1] = prov[n - 1, m - 1] = p
    mat.setflags(write=False)
    window = cov.CovarianceWindow(N, float(nu), mat, prov)
    cholesky_root(mat)
    return window


def cholesky_root(matrix: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, adding diagonal jitter up to 1e-10 if needed."""
    eye = np.eye(matrix.shape[0])
    for eps in _JITTERS:
        try:
            return np.linalg.cholesky(matrix + eps * eye)
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(
        "covariance is not positive semidefinite even with 1e-10 jitter"
    )


@dataclass(frozen=True)
class StationarySampler:
    N: int
    nu: float
    covariance: cov.CovarianceWindow
    root: np.ndarray
    seed: int = 0

    def transform(self, xi: np.ndarray) -> np.ndarray:
        """Map standard normals (rows) to stationary draws (rows)."""
        return xi @ self.root.T


def build_sampler(N: int, nu: float = 0.0, seed: int = 0) -> StationarySampler:
    window = stationary_cov_matrix(N, nu)
    root = cholesky_root(window.matrix)
    root.setflags(write=False)
    return StationarySampler(N, float(nu), window, root, seed)


def sample_stationary(sampler: StationarySampler, count: int,
                      rng: np.random.Generator | None = None,
                      start: int = 0) -> np.ndarray:
    """``count`` independent draws as rows of a ``(count, N)`` array.

    Without ``rng``, draw ``k`` uses its own stream keyed by
    ``(sampler.seed, start + k)``, so any slice of draws can be regenerated
    independently.
    """
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    if rng is not None:
        xi = rng.standard_normal((count, sampler.N))
    else:
        xi = streams.normals(sampler.seed, range(start, start + count),
                             sampler.N, streams.STATIONARY_DRAW)
    return sampler.transform(xi)
