"""Covariance kernels: the Matérn family, kernel algebra and Gram matrices.

All kernels are positive-semidefinite functions on ``R^d x R^d``.  Matérn
smoothness is restricted to half-integers ``nu = p + 1/2`` where the kernel
reduces to an exponential times a polynomial; this keeps evaluation exact
without a Bessel-function dependency.
"""

from __future__ import annotations

from math import factorial

import numpy as np
from scipy.spatial.distance import cdist

from ._validation import as_points, check_positive, warn_on_duplicates

#: Eigenvalue tolerance factor for positive-semidefiniteness checks: a Gram
#: matrix G passes if min eig(G) >= -PSD_TOL_FACTOR * max diag(G).
PSD_TOL_FACTOR = 1e-8


class Kernel:
    """Base class for positive-semidefinite covariance functions.

    Subclasses implement :meth:`pairwise`; scalar evaluation and the
    ``+`` operator come for free.  Instances are immutable and safe to
    share across threads.
    """

    dim: int = 1

    def pairwise(self, X, Y) -> np.ndarray:
        """Covariance matrix with entries ``k(X[i], Y[j])``."""
        raise NotImplementedError

    def __call__(self, x, y) -> float:
        x = as_points(x, self.dim)
        y = as_points(y, self.dim)
        return float(self.pairwise(x, y)[0, 0])

    def __add__(self, other: "Kernel") -> "SumKernel":
        return SumKernel(self, other)


class Matern(Kernel):
    """Matérn covariance with half-integer smoothness.

    For ``nu = p + 1/2`` the kernel is

        k(r) = variance * exp(-z) * (p!/(2p)!) * sum_i c_i (2z)^(p-i),
        z = sqrt(2 nu) r / lengthscale,  c_i = (p+i)! / (i! (p-i)!),

    which is the closed form of the usual Bessel-function expression.
    Non-half-integer ``nu`` is rejected.
    """

    def __init__(self, nu: float, lengthscale: float = 1.0, variance: float = 1.0,
                 dim: int = 1):
        p = nu - 0.5
        if not np.isfinite(nu) or nu <= 0 or abs(p - round(p)) > 1e-12:
            raise ValueError(
                f"unsupported Matérn smoothness nu={nu}: only half-integers "
                "(1/2, 3/2, 5/2, ...) have closed forms here"
            )
        self.nu = float(nu)
        self.lengthscale = check_positive(lengthscale, "lengthscale")
        self.variance = check_positive(variance, "variance")
        self.dim = int(dim)
        self._p = int(round(p))
        # polynomial coefficients of (2z)^(p-i), constant prefactor folded in
        scale = factorial(self._p) / factorial(2 * self._p)
        self._coeffs = np.array(
            [scale * factorial(self._p + i)
             / (factorial(i) * factorial(self._p - i))
             for i in range(self._p + 1)]
        )

    def __repr__(self):
        return (f"Matern(nu={self.nu}, lengthscale={self.lengthscale}, "
                f"variance={self.variance}, dim={self.dim})")

    def profile(self, r) -> np.ndarray:
        """Evaluate the kernel as a function of the distance ``r >= 0``."""
        r = np.asarray(r, dtype=np.float64)
        z = np.sqrt(2.0 * self.nu) * r / self.lengthscale
        two_z = 2.0 * z
        poly = np.zeros_like(z)
        for c in self._coeffs:  # Horner in (2z), highest power first
            poly = poly * two_z + c
        return self.variance * np.exp(-z) * poly

    def pairwise(self, X, Y) -> np.ndarray:
        X = as_points(X, self.dim)
        Y = as_points(Y, self.dim)
        return self.profile(cdist(X, Y))


class SumKernel(Kernel):
    """Pointwise sum of two kernels on the same domain."""

    def __init__(self, first: Kernel, second: Kernel):
        if first.dim != second.dim:
            raise ValueError(
                f"cannot sum kernels of dimension {first.dim} and {second.dim}"
            )
        self.first = first
        self.second = second
        self.dim = first.dim

    def __repr__(self):
        return f"SumKernel({self.first!r}, {self.second!r})"

    def pairwise(self, X, Y) -> np.ndarray:
        return self.first.pairwise(X, Y) + self.second.pairwise(X, Y)


class ZeroKernel(Kernel):
    """The identically-zero kernel (additive identity)."""

    def __init__(self, dim: int = 1):
        self.dim = int(dim)

    def __repr__(self):
        return f"ZeroKernel(dim={self.dim})"

    def pairwise(self, X, Y) -> np.ndarray:
        X = as_points(X, self.dim)
        Y = as_points(Y, self.dim)
        return np.zeros((X.shape[0], Y.shape[0]))


def gram(kernel: Kernel, X) -> np.ndarray:
    """Gram matrix of ``kernel`` on the points ``X``.

    Duplicate points trigger a warning (the matrix is then singular) but
    are not an error: conditioning remains valid once observation noise
    is added to the diagonal.
    """
    X = as_points(X, kernel.dim)
    warn_on_duplicates(X, "gram")
    return kernel.pairwise(X, X)


def min_eigenvalue(G: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    return float(np.linalg.eigvalsh(G)[0])


def is_psd(G: np.ndarray, tol_factor: float = PSD_TOL_FACTOR) -> bool:
    """Positive-semidefiniteness up to the package eigenvalue tolerance."""
    scale = float(np.max(np.diag(G))) if G.size else 0.0
    return min_eigenvalue(G) >= -tol_factor * max(scale, 1e-300)
