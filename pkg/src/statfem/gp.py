"""Gaussian process conditioning on noisy point observations.

One estimator covers every prior used in the package: a plain Matérn, the
finite-element induced prior, or the induced prior plus a discrepancy
kernel.  Conditioning is the standard update

    mean(x) = m(x) + K(x, X)^T (K(X, X) + noise_sd^2 I)^-1 (y - m(X)),
    cov(x, z) = K(x, z) - K(x, X)^T (K(X, X) + noise_sd^2 I)^-1 K(z, X),

with a single Cholesky factorization cached at fit time.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, solve_triangular
from sklearn.base import BaseEstimator

from ._validation import as_points, check_positive, warn_on_duplicates
from .fem import InducedPrior
from .kernels import Kernel

#: Standard-normal quantile for a central 95% credible interval.
CREDIBLE_95 = 1.959964


class GPRegressor(BaseEstimator):
    """Gaussian process regression with a fixed prior and known noise level.

    Parameters
    ----------
    kernel : Kernel
        Prior covariance function.
    mean : callable or None
        Prior mean; called on point arrays.  None means the zero function.
    noise_sd : float
        Observation noise standard deviation; must be positive (the
        noiseless limit is outside this model's contract).

    After :meth:`fit`, the posterior evaluators are immutable and safe for
    concurrent use.
    """

    def __init__(self, kernel: Kernel, mean=None, noise_sd: float = 1e-3):
        self.kernel = kernel
        self.mean = mean
        self.noise_sd = noise_sd

    def _mean_values(self, X: np.ndarray) -> np.ndarray:
        if self.mean is None:
            return np.zeros(X.shape[0])
        arg = X.ravel() if X.shape[1] == 1 else X
        return np.asarray(self.mean(arg), dtype=np.float64).reshape(X.shape[0])

    def fit(self, X, y) -> "GPRegressor":
        noise_sd = check_positive(self.noise_sd, "noise_sd")
        X = as_points(X, self.kernel.dim)
        y = np.asarray(y, dtype=np.float64).ravel()
        if y.size != X.shape[0]:
            raise ValueError(f"got {X.shape[0]} points but {y.size} observations")
        if y.size < 1:
            raise ValueError("need at least one observation")
        if not np.all(np.isfinite(y)):
            raise ValueError("observations contain non-finite values")
        warn_on_duplicates(X, "fit")

        G = self.kernel.pairwise(X, X)
        G[np.diag_indices_from(G)] += noise_sd**2
        try:
            self._cho = cho_factor(G, lower=True)
        except LinAlgError as exc:
            pivot = float(np.linalg.eigvalsh(0.5 * (G + G.T))[0])
            raise ValueError(
                "conditioning failed: Gram + noise_sd^2 I is not positive "
                f"definite (smallest pivot {pivot:.6e}); check that noise_sd "
                "is nonzero and the inputs are finite"
            ) from exc
        self.X_ = X
        self.y_ = y
        self.prior_mean_at_X_ = self._mean_values(X)
        self.weights_ = cho_solve(self._cho, y - self.prior_mean_at_X_)
        return self

    def predict(self, X, return_std: bool = False):
        """Posterior mean at ``X``; optionally the posterior standard deviation.

        The reported standard deviation clamps roundoff-negative variances
        to zero; :meth:`posterior_variance` exposes the raw values.
        """
        Xp = as_points(X, self.kernel.dim)
        cross = self.kernel.pairwise(Xp, self.X_)
        mean = self._mean_values(Xp) + cross @ self.weights_
        if not return_std:
            return mean
        std = np.sqrt(np.maximum(self.posterior_variance(X), 0.0))
        return mean, std

    def posterior_cov(self, X, Y=None) -> np.ndarray:
        """Posterior covariance matrix between ``X`` and ``Y`` (default X)."""
        Xp = as_points(X, self.kernel.dim)
        Yp = Xp if Y is None else as_points(Y, self.kernel.dim)
        L = self._cho[0]
        vx = solve_triangular(L, self.kernel.pairwise(self.X_, Xp), lower=True)
        vy = vx if Y is None else solve_triangular(
            L, self.kernel.pairwise(self.X_, Yp), lower=True)
        return self.kernel.pairwise(Xp, Yp) - vx.T @ vy

    def posterior_variance(self, X) -> np.ndarray:
        """Raw posterior variance on a grid; may dip below zero by roundoff."""
        Xp = as_points(X, self.kernel.dim)
        L = self._cho[0]
        v = solve_triangular(L, self.kernel.pairwise(self.X_, Xp), lower=True)
        prior = np.array([self.kernel(x, x) for x in Xp])
        return prior - np.sum(v * v, axis=0)

    def prior_variance(self, X) -> np.ndarray:
        Xp = as_points(X, self.kernel.dim)
        return np.array([self.kernel(x, x) for x in Xp])


def condition(prior_mean, prior_kernel: Kernel, X, y,
              noise_sd: float) -> GPRegressor:
    """Condition a GP prior on noisy observations; returns a fitted model."""
    return GPRegressor(kernel=prior_kernel, mean=prior_mean,
                       noise_sd=noise_sd).fit(X, y)


def condition_with_discrepancy(induced: InducedPrior, disc_mean,
                               disc_kernel: Kernel, X, y,
                               noise_sd: float) -> GPRegressor:
    """Condition the induced prior augmented by an additive discrepancy GP.

    Equivalent to :func:`condition` with prior mean ``m_u + m_d`` and
    kernel ``K_u + K_d``.
    """
    if disc_mean is None:
        mean = induced.mean
    else:
        def mean(x, _mu=induced.mean, _md=disc_mean):
            return np.asarray(_mu(x)) + np.asarray(_md(x))
    return condition(mean, induced.kernel + disc_kernel, X, y, noise_sd)
