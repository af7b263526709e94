"""1D piecewise-linear finite elements and the PDE-induced Gaussian prior.

The operator is ``L u = -(a u')' + b u' + c u`` on (0, 1) with homogeneous
Dirichlet conditions.  Galerkin assembly uses hat functions on the interior
nodes; pushing a Gaussian source prior GP(m, K) through the discretised
inverse operator gives the induced prior with

    mean(x) = phi(x)^T A^{-1} mu,
    cov(x, y) = phi(x)^T A^{-1} M A^{-T} phi(y),

where ``A`` is the stiffness matrix, ``mu_i = int m phi_i`` and
``M_ij = int int phi_i(s) K(s, t) phi_j(t) ds dt`` (or its node-lumped
approximation).  For symmetric ``A`` this is the familiar A^{-1} M A^{-1}
sandwich; the transpose form keeps the covariance symmetric for advective
operators too.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ._validation import as_points, check_positive
from .kernels import Kernel

#: Gauss-Legendre points per element for stiffness/load assembly, and per
#: element pair (tensorised) for the exact kernel Gram.  Order 4 is exact
#: for the polynomial integrands of constant-coefficient operators.
QUAD_ORDER = 4

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(QUAD_ORDER)


class Mesh1D:
    """Interior nodes of a mesh on (0, 1) with hat-function basis.

    ``nodes`` are the strictly increasing interior nodes; the boundary
    nodes 0 and 1 carry no basis function (homogeneous Dirichlet).
    """

    def __init__(self, nodes):
        nodes = np.asarray(nodes, dtype=np.float64).ravel()
        if nodes.size == 0:
            raise ValueError("mesh needs at least one interior node")
        if np.any(nodes <= 0.0) or np.any(nodes >= 1.0):
            raise ValueError("interior nodes must lie strictly inside (0, 1)")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("interior nodes must be strictly increasing")
        self.nodes = nodes
        self.full = np.concatenate(([0.0], nodes, [1.0]))
        self.widths = np.diff(self.full)

    @classmethod
    def uniform(cls, n_fe: int) -> "Mesh1D":
        """Uniform mesh with ``n_fe`` interior nodes at i/(n_fe+1)."""
        if n_fe < 1:
            raise ValueError("n_fe must be >= 1")
        return cls(np.arange(1, n_fe + 1) / (n_fe + 1))

    @property
    def n_fe(self) -> int:
        return self.nodes.size

    @property
    def n_elements(self) -> int:
        return self.n_fe + 1

    def basis_integrals(self) -> np.ndarray:
        """Integrals ``int phi_i`` = half the width of the two elements at node i."""
        return 0.5 * (self.widths[:-1] + self.widths[1:])

    def element_quadrature(self, order: int = QUAD_ORDER):
        """Gauss-Legendre nodes/weights on every element, flattened.

        Returns ``(points, weights, element_index)`` each of length
        ``n_elements * order``.
        """
        g, w = np.polynomial.legendre.leggauss(order)
        left = self.full[:-1]
        h = self.widths
        pts = left[:, None] + 0.5 * h[:, None] * (g[None, :] + 1.0)
        wts = 0.5 * h[:, None] * w[None, :]
        elem = np.repeat(np.arange(self.n_elements), order)
        return pts.ravel(), wts.ravel(), elem

    def hat_matrix(self, x) -> sp.csr_matrix:
        """Sparse matrix H with ``H[q, i] = phi_i(x[q])``.

        Each evaluation point lies in one element, so rows have at most two
        nonzeros.  Boundary points produce all-zero rows.
        """
        x = np.asarray(x, dtype=np.float64).ravel()
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise ValueError("evaluation points must lie in [0, 1]")
        elem = np.clip(np.searchsorted(self.full, x, side="right") - 1,
                       0, self.n_elements - 1)
        h = self.widths[elem]
        left_val = (self.full[elem + 1] - x) / h
        right_val = (x - self.full[elem]) / h

        rows, cols, vals = [], [], []
        left_idx = elem - 1          # interior index of the element's left node
        mask = left_idx >= 0
        rows.append(np.nonzero(mask)[0])
        cols.append(left_idx[mask])
        vals.append(left_val[mask])
        right_idx = elem             # interior index of the element's right node
        mask = right_idx <= self.n_fe - 1
        rows.append(np.nonzero(mask)[0])
        cols.append(right_idx[mask])
        vals.append(right_val[mask])
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(x.size, self.n_fe),
        )

    def interpolant(self, coefficients) -> "PiecewiseLinear":
        return PiecewiseLinear(self, coefficients)


class PiecewiseLinear:
    """Hat-basis expansion ``sum_i c_i phi_i``; vanishes at 0 and 1."""

    def __init__(self, mesh: Mesh1D, coefficients):
        coefficients = np.asarray(coefficients, dtype=np.float64).ravel()
        if coefficients.size != mesh.n_fe:
            raise ValueError("coefficient count does not match mesh size")
        self.mesh = mesh
        self.coefficients = coefficients
        self._values = np.concatenate(([0.0], coefficients, [0.0]))

    def __call__(self, x):
        return np.interp(x, self.mesh.full, self._values)


class Operator1D:
    """Coefficients of ``L u = -(a u')' + b u' + c u`` on (0, 1).

    ``a``, ``b`` and ``c`` may be callables or constants.  Uniform
    ellipticity (a bounded away from zero) is checked on a sample grid at
    construction time.
    """

    _CHECK_GRID = np.linspace(0.0, 1.0, 257)[1:-1]

    def __init__(self, a=1.0, b=0.0, c=0.0):
        self.a = _as_coefficient(a)
        self.b = _as_coefficient(b)
        self.c = _as_coefficient(c)
        a_min = float(np.min(self.a(self._CHECK_GRID)))
        if not a_min > 0.0:
            raise ValueError(
                f"diffusion coefficient must be uniformly positive; sampled min {a_min}"
            )

    @classmethod
    def poisson(cls) -> "Operator1D":
        return cls(a=1.0, b=0.0, c=0.0)

    def max_reaction(self, grid=None) -> float:
        """Sampled maximum of c; the convergence theory assumes c <= 0."""
        grid = self._CHECK_GRID if grid is None else np.asarray(grid)
        return float(np.max(self.c(grid)))


def _as_coefficient(value) -> Callable[[np.ndarray], np.ndarray]:
    if callable(value):
        return lambda x: np.broadcast_to(
            np.asarray(value(x), dtype=np.float64), np.shape(x)).copy()
    const = float(value)
    return lambda x: np.full(np.shape(x), const)


def assemble_stiffness(op: Operator1D, mesh: Mesh1D) -> sp.csc_matrix:
    """Galerkin matrix ``A[i, j] = B(phi_j, phi_i)`` as a sparse tridiagonal.

    B(u, v) = int a u'v' + b u'v + c u v, integrated with per-element
    Gauss-Legendre quadrature (exact for constant coefficients).
    """
    n = mesh.n_fe
    h = mesh.widths
    left = mesh.full[:-1]
    xq = left[:, None] + 0.5 * h[:, None] * (_GL_NODES[None, :] + 1.0)
    wq = 0.5 * h[:, None] * _GL_WEIGHTS[None, :]
    aq, bq, cq = op.a(xq), op.b(xq), op.c(xq)

    # local hat values on each element: phi_L decreasing, phi_R increasing
    phi_r = (xq - left[:, None]) / h[:, None]
    phi_l = 1.0 - phi_r
    dl = -1.0 / h
    dr = 1.0 / h

    def local(trial_phi, trial_d, test_phi, test_d):
        return np.sum(
            wq * (aq * (trial_d * test_d)[:, None]
                  + bq * trial_d[:, None] * test_phi
                  + cq * trial_phi * test_phi),
            axis=1,
        )

    ll = local(phi_l, dl, phi_l, dl)
    lr = local(phi_r, dr, phi_l, dl)   # trial = right node, test = left node
    rl = local(phi_l, dl, phi_r, dr)
    rr = local(phi_r, dr, phi_r, dr)

    diag = np.zeros(n)
    upper = np.zeros(n - 1)  # A[i, i+1]
    lower = np.zeros(n - 1)  # A[i+1, i]
    # element e couples interior nodes e-1 (left) and e (right)
    diag += ll[1:]           # left node of elements 1..n
    diag += rr[:-1]          # right node of elements 0..n-1
    upper += lr[1:-1]        # trial right (j = e), test left (i = e-1)
    lower += rl[1:-1]
    return sp.diags([lower, diag, upper], offsets=[-1, 0, 1], format="csc")


def factorize(A: sp.csc_matrix):
    """LU factorization of the stiffness matrix, reused across solves."""
    try:
        lu = splu(A)
    except RuntimeError as exc:
        raise ValueError(
            "stiffness matrix is singular: the operator is not coercive on "
            "this mesh"
        ) from exc
    if not np.all(np.isfinite(lu.U.diagonal())) or np.any(lu.U.diagonal() == 0.0):
        raise ValueError(
            "stiffness matrix is singular: the operator is not coercive on "
            "this mesh"
        )
    return lu


def assemble_load(f, mesh: Mesh1D, order: int = QUAD_ORDER) -> np.ndarray:
    """Load vector with components ``int f phi_i`` via per-element quadrature."""
    xq, wq, elem = mesh.element_quadrature(order)
    fw = wq * np.asarray(f(xq), dtype=np.float64)
    H = mesh.hat_matrix(xq)
    return H.T @ fw


def fem_solve(op: Operator1D, mesh: Mesh1D, f) -> PiecewiseLinear:
    """Galerkin solution of ``L u = f`` with zero boundary values."""
    A = assemble_stiffness(op, mesh)
    lu = factorize(A)
    return mesh.interpolant(lu.solve(assemble_load(f, mesh)))


def assemble_kernel_gram(kernel: Kernel, mesh: Mesh1D, mode: str = "exact",
                         order: int = QUAD_ORDER) -> np.ndarray:
    """Basis-weighted kernel matrix ``M_ij = int int phi_i K phi_j``.

    ``mode="exact"`` uses a tensorised Gauss-Legendre rule over element
    pairs.  ``mode="lumped"`` treats the kernel as constant over each hat
    support: ``M_ij = (int phi_i) K(x_i, x_j) (int phi_j)``.  Both are
    congruences of positive-semidefinite matrices, hence PSD.
    """
    if kernel.dim != 1:
        raise ValueError("kernel dimension must be 1 for the 1D mesh")
    if mode == "lumped":
        w = mesh.basis_integrals()
        K = kernel.pairwise(mesh.nodes, mesh.nodes)
        return (w[:, None] * K) * w[None, :]
    if mode != "exact":
        raise ValueError(f"unknown kernel Gram mode {mode!r}")

    xq, wq, _ = mesh.element_quadrature(order)
    W = mesh.hat_matrix(xq).multiply(wq[:, None]).toarray()  # (n_q, n_fe)
    n_q = xq.size
    M = np.zeros((mesh.n_fe, mesh.n_fe))
    block = 1024
    Xq = xq[:, None]
    for start in range(0, n_q, block):
        stop = min(start + block, n_q)
        Kb = kernel.pairwise(Xq[start:stop], Xq)  # (b, n_q)
        M += W[start:stop].T @ (Kb @ W)
    return 0.5 * (M + M.T)


class InducedKernel(Kernel):
    """Covariance of the discretised induced prior, phi^T A^{-1} M A^{-T} phi.

    Holds the precomputed central matrix; evaluation per point pair costs
    O(1) thanks to the two-nonzero hat vectors.
    """

    def __init__(self, mesh: Mesh1D, central: np.ndarray):
        self.mesh = mesh
        self.central = central
        self.dim = 1

    def __repr__(self):
        return f"InducedKernel(n_fe={self.mesh.n_fe})"

    def pairwise(self, X, Y) -> np.ndarray:
        X = as_points(X, 1).ravel()
        Y = as_points(Y, 1).ravel()
        Hx = self.mesh.hat_matrix(X)
        Hy = self.mesh.hat_matrix(Y)
        # two sparse products: cost O((|X| + |Y|) n_fe), never O(n_fe^2)
        return Hx @ np.asarray(Hy @ self.central).T


class InducedPrior:
    """Mean and covariance of the PDE solution under a GP source prior.

    Assembles the stiffness matrix once, factorizes it, and caches both
    the mean coefficient vector and the central covariance matrix; the
    resulting evaluators are immutable and thread-safe.
    """

    def __init__(self, op: Operator1D, mesh: Mesh1D, kernel: Kernel,
                 mean=None, mode: str = "exact"):
        self.mesh = mesh
        self.mode = mode
        A = assemble_stiffness(op, mesh)
        lu = factorize(A)
        mu = np.zeros(mesh.n_fe) if mean is None else assemble_load(mean, mesh)
        self.mean_coefficients = lu.solve(mu)
        self._mean_fn = mesh.interpolant(self.mean_coefficients)
        M = assemble_kernel_gram(kernel, mesh, mode=mode)
        central = lu.solve(lu.solve(M).T)  # A^{-1} M A^{-T}
        self.kernel = InducedKernel(mesh, 0.5 * (central + central.T))

    def mean(self, x):
        return self._mean_fn(x)

    def cov(self, x, y) -> float:
        return self.kernel(x, y)
