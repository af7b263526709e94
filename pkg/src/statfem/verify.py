"""Built-in verification suites wrapped by the command-line ``verify``.

Each suite re-derives its expected values from an independent route (an
analytic solution, the Green's-function quadrature oracle, eigenvalue
checks, or direct evaluation of both sides of an inequality) and returns
a pass/fail result with the measured quantities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .experiments import prop6_randomized_trials, uniform_points
from .fem import InducedPrior, Mesh1D, Operator1D, fem_solve
from .gp import condition
from .kernels import Matern, gram, is_psd
from .oracle import oracle_Ku_grid

FE_RATE_BAND = (-2.3, -1.8)
ORACLE_EQUIV_REL_TOL = 1e-3
ORACLE_EQUIV_N_FE = (128, 256, 512)
BOUNDARY_ZERO_TOL = 1e-14


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def fe_convergence_suite() -> SuiteResult:
    """Sup-error rate of the Poisson solve against the sine eigenfunction."""
    op = Operator1D.poisson()
    sizes = np.array([64, 128, 256, 512, 1024])
    grid = np.linspace(0.0, 1.0, 2001)
    exact = np.sin(np.pi * grid) / np.pi**2
    errs = []
    for n_fe in sizes:
        u = fem_solve(op, Mesh1D.uniform(int(n_fe)), lambda x: np.sin(np.pi * x))
        errs.append(np.max(np.abs(u(grid) - exact)))
    slope = float(np.polyfit(np.log(sizes), np.log(errs), 1)[0])
    lo, hi = FE_RATE_BAND
    return SuiteResult(
        "fe-convergence", lo <= slope <= hi,
        f"sup-error log-log slope {slope:.3f} (required in [{lo}, {hi}])",
    )


def oracle_equivalence_suite(mode: str = "exact") -> SuiteResult:
    """Induced covariance against the Green's-function double quadrature.

    The tolerance is calibrated for the exact kernel Gram; running it with
    the lumped Gram is a deliberate fault injection and should fail.
    """
    kernel = Matern(0.5, 1.0, 1.0)
    pts = np.linspace(0.1, 0.9, 9)
    oracle_vals = oracle_Ku_grid(kernel, pts)
    scale = float(np.max(np.abs(oracle_vals)))
    op = Operator1D.poisson()
    errors = []
    for n_fe in ORACLE_EQUIV_N_FE:
        prior = InducedPrior(op, Mesh1D.uniform(n_fe), kernel, mode=mode)
        fe_vals = prior.kernel.pairwise(pts, pts)
        errors.append(float(np.max(np.abs(fe_vals - oracle_vals))))
    decreasing = all(b < a for a, b in zip(errors, errors[1:]))
    within = errors[-1] <= ORACLE_EQUIV_REL_TOL * scale
    detail = (f"mode={mode}, max|FE - oracle| over 9x9 grid at n_fe="
              f"{ORACLE_EQUIV_N_FE}: {[f'{e:.3e}' for e in errors]}, "
              f"limit {ORACLE_EQUIV_REL_TOL * scale:.3e}")
    return SuiteResult("oracle-equivalence", decreasing and within, detail)


def psd_suite(instances: int = 50, seed: int = 7) -> SuiteResult:
    """Gram matrices of Matérn, sum and induced kernels stay PSD."""
    rng = np.random.Generator(np.random.Philox(seed))
    supported = [0.5, 1.5, 2.5, 3.5]
    op = Operator1D.poisson()
    prior = InducedPrior(op, Mesh1D.uniform(64), Matern(0.5, 0.5, 2.0),
                         mode="exact")
    failures = 0
    for i in range(instances):
        n = int(rng.integers(2, 30))
        X = np.sort(rng.uniform(0.01, 0.99, size=n))
        k1 = Matern(rng.choice(supported), rng.uniform(0.2, 2.0),
                    rng.uniform(0.5, 150.0))
        kernels = [k1]
        if i % 3 == 1:
            kernels = [k1 + Matern(rng.choice(supported), 1.0, 1.0)]
        elif i % 3 == 2:
            kernels = [prior.kernel]
        if not is_psd(gram(kernels[0], X)):
            failures += 1
    return SuiteResult(
        "psd", failures == 0,
        f"{instances - failures}/{instances} random Gram matrices within "
        "eigenvalue tolerance",
    )


def boundary_zero_suite() -> SuiteResult:
    """Induced mean and covariance vanish on the boundary of (0, 1)."""
    op = Operator1D.poisson()
    prior = InducedPrior(op, Mesh1D.uniform(32), Matern(1.5, 0.5, 3.0),
                         mean=lambda x: np.sin(np.pi * x), mode="exact")
    rng = np.random.Generator(np.random.Philox(11))
    interior = rng.uniform(0.05, 0.95, size=16)
    worst = 0.0
    for y in interior:
        worst = max(worst, abs(prior.cov(0.0, y)), abs(prior.cov(y, 1.0)))
    worst = max(worst, abs(float(prior.mean(0.0))), abs(float(prior.mean(1.0))))
    return SuiteResult(
        "boundary-zero", worst <= BOUNDARY_ZERO_TOL,
        f"max boundary magnitude {worst:.3e} (limit {BOUNDARY_ZERO_TOL})",
    )


def prop6_suite(n_trials: int = 100, seed: int = 17) -> SuiteResult:
    """Kernel-perturbation inequality over randomized trials."""
    reports = prop6_randomized_trials(n_trials=n_trials, seed=seed)
    violations = [r for r in reports if not r.passed]
    return SuiteResult(
        "prop6-bound", not violations,
        f"{n_trials - len(violations)}/{n_trials} trials satisfied the bound",
    )


def variance_contraction_suite(seed: int = 23) -> SuiteResult:
    """Posterior variance never exceeds prior variance at tested points."""
    rng = np.random.Generator(np.random.Philox(seed))
    kernel = Matern(1.5, 0.7, 2.0)
    X = uniform_points(9)
    y = rng.normal(size=9)
    model = condition(None, kernel, X, y, 1e-2)
    grid = np.linspace(0.0, 1.0, 101)
    slack = model.posterior_variance(grid) - model.prior_variance(grid)
    worst = float(np.max(slack))
    return SuiteResult(
        "variance-contraction", worst <= 1e-10,
        f"max posterior-minus-prior variance {worst:.3e} (limit 1e-10)",
    )


def run_all(mode: str = "exact") -> list[SuiteResult]:
    return [
        fe_convergence_suite(),
        oracle_equivalence_suite(mode=mode),
        psd_suite(),
        boundary_zero_suite(),
        variance_contraction_suite(),
        prop6_suite(),
    ]
