"""Closed-form reference values for the 1D Poisson problem on (0, 1).

The Green's function of ``-u'' = f`` with zero boundary values is

    G(x, y) = x (1 - y)  for x <= y,    y (1 - x)  for x > y,

so the induced prior's mean and covariance have integral representations
that can be evaluated to high precision by composite Gauss-Legendre
quadrature with panels split at the kink lines.  These routines are the
independent oracle against which the finite element construction is
tested; they share no code with the fem module.
"""

from __future__ import annotations

import numpy as np

from .kernels import Kernel

#: Sub-panels per smooth segment and Gauss-Legendre order.  Each segment
#: between kink points is analytic, so the composite rule converges far
#: below the 1e-8 relative accuracy target (checked by refinement tests).
SUBDIVISIONS = 8
GL_ORDER = 10


def green_eval(x, y):
    """Green's function of the Poisson two-point boundary value problem."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(x < 0.0) or np.any(x > 1.0) or np.any(y < 0.0) or np.any(y > 1.0):
        raise ValueError("green_eval arguments must lie in [0, 1]")
    lo = np.minimum(x, y)
    hi = np.maximum(x, y)
    out = lo * (1.0 - hi)
    return out if out.ndim else float(out)


def _panel_rule(breaks, subdivisions: int = SUBDIVISIONS, order: int = GL_ORDER):
    """Composite Gauss-Legendre nodes/weights on [0, 1] split at ``breaks``."""
    g, w = np.polynomial.legendre.leggauss(order)
    edges = np.unique(np.concatenate(([0.0, 1.0], np.asarray(breaks, dtype=np.float64))))
    edges = edges[(edges >= 0.0) & (edges <= 1.0)]
    fine = np.concatenate(
        [np.linspace(a, b, subdivisions + 1)[:-1] for a, b in zip(edges[:-1], edges[1:])]
        + [edges[-1:]]
    )
    left, width = fine[:-1], np.diff(fine)
    nodes = (left[:, None] + 0.5 * width[:, None] * (g[None, :] + 1.0)).ravel()
    weights = (0.5 * width[:, None] * w[None, :]).ravel()
    return nodes, weights


def oracle_mu(m, x: float, subdivisions: int = SUBDIVISIONS,
              order: int = GL_ORDER) -> float:
    """Solution mean ``int G(x, s) m(s) ds`` of the Poisson problem."""
    s, w = _panel_rule([x], subdivisions, order)
    return float(np.sum(w * green_eval(np.full_like(s, x), s) * m(s)))


def oracle_Ku(kernel: Kernel, x: float, y: float,
              subdivisions: int = SUBDIVISIONS, order: int = GL_ORDER) -> float:
    """Induced covariance ``int int G(x, s) K(s, t) G(y, t) ds dt``.

    Iterated quadrature: the outer rule splits at the G-kinks {x, y}; the
    inner rule additionally splits at the current outer node so that the
    kernel's diagonal kink (Matérn nu = 1/2) never crosses a panel.
    """
    if kernel.dim != 1:
        raise ValueError("oracle requires a 1-dimensional kernel")
    s_nodes, s_weights = _panel_rule([x, y], subdivisions, order)
    gx = green_eval(np.full_like(s_nodes, x), s_nodes)
    inner = np.empty_like(s_nodes)
    for q, s in enumerate(s_nodes):
        t, wt = _panel_rule([y, s], subdivisions, order)
        gy = green_eval(np.full_like(t, y), t)
        inner[q] = np.sum(wt * kernel.pairwise([[s]], t[:, None])[0] * gy)
    return float(np.sum(s_weights * gx * inner))


def oracle_Ku_grid(kernel: Kernel, xs, ys=None, **kwargs) -> np.ndarray:
    """Matrix of oracle covariances, exploiting symmetry when ys is xs."""
    xs = np.asarray(xs, dtype=np.float64).ravel()
    if ys is None:
        out = np.empty((xs.size, xs.size))
        for i, x in enumerate(xs):
            for j in range(i, xs.size):
                out[i, j] = out[j, i] = oracle_Ku(kernel, x, xs[j], **kwargs)
        return out
    ys = np.asarray(ys, dtype=np.float64).ravel()
    return np.array([[oracle_Ku(kernel, x, y, **kwargs) for y in ys] for x in xs])
