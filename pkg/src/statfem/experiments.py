"""Convergence studies for the conditioned finite element prior.

The shipped experiment: the 1D Poisson problem with the two-mode sine
truth, a zero-mean Matérn source prior, uniformly placed observations
corrupted by Gaussian noise, and the L2 error of the posterior mean
averaged over noise realizations.  Fitted log-log slopes are compared to
the quasi-uniform theory rate n^(-1/2 + d/(4k)) with k = nu + d/2.

Everything is deterministic given the config seed: each (series, n,
realization) triple owns a counter-based Philox substream and reductions
run in realization order, so threaded and serial runs agree bit for bit.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._validation import check_positive
from .fem import InducedPrior, Mesh1D, Operator1D
from .gp import CREDIBLE_95, GPRegressor, condition
from .kernels import Kernel, Matern

RATES_CSV_HEADER = "nu,lengthscale,variance,n_fe,n,mean_l2,std_l2,theory_slope,fitted_slope"
POSTERIOR_CSV_HEADER = "x,mean,sd,truth,data_x,data_y"

#: Number of pre-asymptotic (smallest-n) rows excluded from slope fits.
SLOPE_FIT_DROP_SMALLEST = 2

#: Fixed composite quadrature for L2 errors: 512 panels, 4 Gauss points each.
L2_PANELS = 512
_L2_G, _L2_W = np.polynomial.legendre.leggauss(4)
_L2_EDGES = np.linspace(0.0, 1.0, L2_PANELS + 1)
_L2_NODES = (_L2_EDGES[:-1, None]
             + 0.5 * np.diff(_L2_EDGES)[:, None] * (_L2_G[None, :] + 1.0)).ravel()
_L2_WEIGHTS = (0.5 * np.diff(_L2_EDGES)[:, None] * _L2_W[None, :]).ravel()


# ---------------------------------------------------------------------------
# truth functions and operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruthPair:
    """A source term and the matching solution of the Poisson problem."""
    source: Callable[[np.ndarray], np.ndarray]
    solution: Callable[[np.ndarray], np.ndarray]


def _two_sine_source(x):
    return (np.pi**2 / 5.0) * np.sin(np.pi * x) \
        + (49.0 * np.pi**2 / 50.0) * np.sin(7.0 * np.pi * x)


def _two_sine_solution(x):
    return np.sin(np.pi * x) / 5.0 + np.sin(7.0 * np.pi * x) / 50.0


TRUTHS = {
    "two_sine": TruthPair(_two_sine_source, _two_sine_solution),
    "sine": TruthPair(lambda x: np.sin(np.pi * x),
                      lambda x: np.sin(np.pi * x) / np.pi**2),
}

OPERATORS = {"poisson": Operator1D.poisson}


# ---------------------------------------------------------------------------
# point sets, data simulation, error norm
# ---------------------------------------------------------------------------

def uniform_points(n: int) -> np.ndarray:
    """n uniformly placed interior points i/(n+1) on (0, 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.arange(1, n + 1) / (n + 1)


@dataclass(frozen=True)
class FillMetrics:
    """Fill distance, separation radius and their ratio for a 1D point set."""
    fill_distance: float
    separation: float
    mesh_ratio: float
    degenerate: bool = False


def fill_metrics(X) -> FillMetrics:
    """Exact fill metrics for sorted points in (0, 1).

    The fill distance is the largest of the two boundary gaps and half of
    each interior gap; the separation radius is half the minimum pairwise
    gap (undefined for a single point, reported as infinity).
    """
    X = np.asarray(X, dtype=np.float64).ravel()
    if X.size == 0 or np.any(X <= 0.0) or np.any(X >= 1.0):
        raise ValueError("point set must be nonempty and interior to (0, 1)")
    if np.any(np.diff(X) <= 0.0):
        raise ValueError("point set must be sorted and distinct")
    gaps = np.diff(X)
    interior = float(np.max(gaps) / 2.0) if gaps.size else 0.0
    h = max(float(X[0]), interior, float(1.0 - X[-1]))
    if gaps.size == 0:
        return FillMetrics(h, np.inf, np.nan, degenerate=True)
    q = float(np.min(gaps) / 2.0)
    return FillMetrics(h, q, h / q)


def make_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """Counter-based generator on a substream derived from (seed, spawn_key)."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=spawn_key)))


def simulate_data(u_t, X, noise_sd: float, rng: np.random.Generator) -> np.ndarray:
    """Noisy observations y_i = u_t(x_i) + noise_sd * z_i."""
    check_positive(noise_sd, "noise_sd")
    X = np.asarray(X, dtype=np.float64).ravel()
    return np.asarray(u_t(X), dtype=np.float64) + noise_sd * rng.standard_normal(X.size)


def l2_error(u_t, m_hat) -> float:
    """L2(0, 1) distance via the fixed 512-panel composite Gauss rule."""
    diff = np.asarray(u_t(_L2_NODES)) - np.asarray(m_hat(_L2_NODES))
    return float(np.sqrt(np.sum(_L2_WEIGHTS * diff * diff)))


def theory_slope(nu: float, d: int = 1) -> float:
    """Quasi-uniform posterior rate exponent -1/2 + d/(4k), k = nu + d/2."""
    return -0.5 + d / (4.0 * (nu + d / 2.0))


# ---------------------------------------------------------------------------
# experiment configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelConfig:
    nu: float
    lengthscale: float
    variance: float

    def build(self) -> Matern:
        return Matern(self.nu, self.lengthscale, self.variance)


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of a convergence experiment."""
    kernels: tuple[KernelConfig, ...]
    n_fe: tuple[int, ...]
    n_obs: tuple[int, ...]
    noise_sd: float
    realizations: int
    m_mode: str = "lumped"
    seed: int = 0
    operator: str = "poisson"
    truth: str = "two_sine"

    def __post_init__(self):
        if not self.kernels or not self.n_fe or not self.n_obs:
            raise ValueError("kernels, n_fe and n_obs must be nonempty")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        check_positive(self.noise_sd, "noise_sd")
        if self.m_mode not in ("exact", "lumped"):
            raise ValueError(f"m_mode must be 'exact' or 'lumped', got {self.m_mode!r}")
        if self.operator not in OPERATORS:
            raise ValueError(f"unknown operator {self.operator!r}")
        if self.truth not in TRUTHS:
            raise ValueError(f"unknown truth {self.truth!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kernels = tuple(
            KernelConfig(**{k: float(v) for k, v in entry.items()})
            for entry in data.get("kernels", ())
        )
        return cls(
            kernels=kernels,
            n_fe=tuple(int(v) for v in data.get("n_fe", ())),
            n_obs=tuple(int(v) for v in data.get("n_obs", ())),
            noise_sd=float(data["noise_sd"]),
            realizations=int(data["realizations"]),
            m_mode=str(data.get("m_mode", "lumped")),
            seed=int(data.get("seed", 0)),
            operator=str(data.get("operator", "poisson")),
            truth=str(data.get("truth", "two_sine")),
        )

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config root must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["kernels"] = [dataclasses.asdict(k) for k in self.kernels]
        out["n_fe"] = list(self.n_fe)
        out["n_obs"] = list(self.n_obs)
        return out


def demo_config(seed: int = 20260809, m_mode: str = "lumped") -> ExperimentConfig:
    """Desk-scale nu = 1/2 study row (well-chosen pair l = 1/2, s^2 = 120)."""
    return ExperimentConfig(
        kernels=(KernelConfig(nu=0.5, lengthscale=0.5, variance=120.0),),
        n_fe=(512,),
        n_obs=(3, 7, 15, 31, 63, 127, 255),
        noise_sd=1e-3,
        realizations=20,
        m_mode=m_mode,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# rate tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateRow:
    nu: float
    lengthscale: float
    variance: float
    n_fe: int
    n: int
    mean_l2: float
    std_l2: float


@dataclass
class RateSeries:
    nu: float
    lengthscale: float
    variance: float
    n_fe: int
    rows: list[RateRow] = field(default_factory=list)
    fitted_slope: float = np.nan
    theory_slope: float = np.nan


@dataclass
class RateTable:
    series: list[RateSeries] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def to_csv_text(self) -> str:
        lines = [RATES_CSV_HEADER]
        for s in self.series:
            for r in s.rows:
                lines.append(
                    f"{r.nu!r},{r.lengthscale!r},{r.variance!r},{r.n_fe},{r.n},"
                    f"{r.mean_l2!r},{r.std_l2!r},{s.theory_slope!r},{s.fitted_slope!r}"
                )
        return "\n".join(lines) + "\n"


def fit_series_slope(series: RateSeries, diagnostics: list[str]) -> None:
    """Least-squares log-log slope, excluding the pre-asymptotic small-n rows."""
    rows = sorted(series.rows, key=lambda r: r.n)
    drop = SLOPE_FIT_DROP_SMALLEST
    if len(rows) - drop < 2:
        drop = 0
        diagnostics.append(
            f"series nu={series.nu} n_fe={series.n_fe}: too few rows to exclude "
            "pre-asymptotic points; slope fitted on all rows"
        )
    rows = rows[drop:]
    if len(rows) < 2:
        diagnostics.append(
            f"series nu={series.nu} n_fe={series.n_fe}: not enough rows for a slope fit"
        )
        return
    ns = np.log([r.n for r in rows])
    errs = np.log([r.mean_l2 for r in rows])
    series.fitted_slope = float(np.polyfit(ns, errs, 1)[0])


# ---------------------------------------------------------------------------
# the convergence study
# ---------------------------------------------------------------------------

def matern_baseline(X, y, noise_sd: float, nu: float,
                    variance: float = 1.0, lengthscale: float = 1.0) -> GPRegressor:
    """Data-driven GP baseline: zero-mean Matérn of smoothness nu + 2.

    Models the system response directly, so it knows nothing of the
    boundary conditions.
    """
    return condition(None, Matern(nu + 2.0, lengthscale, variance), X, y, noise_sd)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rates: RateTable
    baseline_rates: RateTable

    def manifest(self, threads: int = 1) -> dict:
        return {
            "config": self.config.to_dict(),
            "slope_fit_drop_smallest": SLOPE_FIT_DROP_SMALLEST,
            "l2_quadrature_panels": L2_PANELS,
            "rng": "philox counter-based, substream per (series, n, realization)",
            "threads": threads,
            "diagnostics": list(self.rates.diagnostics),
            "baseline_diagnostics": list(self.baseline_rates.diagnostics),
        }


def run_convergence(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Run the configured study and fit per-series convergence slopes.

    For each (kernel, n_fe) series the induced prior is assembled once;
    each (n, realization) cell simulates data on its own substream,
    conditions both the induced prior and the Matérn baseline on the same
    observations, and records L2 errors against the true response.
    """
    op = OPERATORS[config.operator]()
    if op.max_reaction() > 0.0:
        raise ValueError("convergence theory requires a nonpositive reaction term")
    truth = TRUTHS[config.truth]
    rates = RateTable()
    baseline = RateTable()

    series_idx = 0
    for kc in config.kernels:
        for n_fe in config.n_fe:
            series = RateSeries(kc.nu, kc.lengthscale, kc.variance, n_fe,
                                theory_slope=theory_slope(kc.nu))
            bl_series = RateSeries(kc.nu + 2.0, 1.0, 1.0, n_fe,
                                   theory_slope=theory_slope(kc.nu + 2.0))
            try:
                prior = InducedPrior(op, Mesh1D.uniform(n_fe), kc.build(),
                                     mode=config.m_mode)
            except Exception as exc:  # noqa: BLE001 - recorded, row aborted
                rates.diagnostics.append(
                    f"series nu={kc.nu} n_fe={n_fe}: prior assembly failed: {exc}")
                series_idx += 1
                continue
            for n_idx, n in enumerate(config.n_obs):
                try:
                    row, bl_row = _run_cell(config, kc, prior, truth, n_fe, n,
                                            series_idx, n_idx, threads)
                except Exception as exc:  # noqa: BLE001 - recorded, row aborted
                    rates.diagnostics.append(
                        f"series nu={kc.nu} n_fe={n_fe} n={n}: {exc}")
                    continue
                series.rows.append(row)
                bl_series.rows.append(bl_row)
            fit_series_slope(series, rates.diagnostics)
            fit_series_slope(bl_series, baseline.diagnostics)
            rates.series.append(series)
            baseline.series.append(bl_series)
            series_idx += 1
    return ExperimentResult(config, rates, baseline)


def _run_cell(config, kc, prior, truth, n_fe, n, series_idx, n_idx, threads):
    X = uniform_points(n)

    def one(realization: int) -> tuple[float, float]:
        rng = make_rng(config.seed, series_idx, n_idx, realization)
        y = simulate_data(truth.solution, X, config.noise_sd, rng)
        model = condition(prior.mean, prior.kernel, X, y, config.noise_sd)
        err = l2_error(truth.solution, model.predict)
        bl = matern_baseline(X, y, config.noise_sd, kc.nu)
        bl_err = l2_error(truth.solution, bl.predict)
        return err, bl_err

    indices = range(config.realizations)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, indices))  # ordered reduction
    else:
        results = [one(r) for r in indices]
    errs = np.array([e for e, _ in results])
    bl_errs = np.array([b for _, b in results])
    ddof = 1 if config.realizations > 1 else 0
    row = RateRow(kc.nu, kc.lengthscale, kc.variance, n_fe, n,
                  float(np.mean(errs)), float(np.std(errs, ddof=ddof)))
    bl_row = RateRow(kc.nu + 2.0, 1.0, 1.0, n_fe, n,
                     float(np.mean(bl_errs)), float(np.std(bl_errs, ddof=ddof)))
    return row, bl_row


# ---------------------------------------------------------------------------
# posterior grid (for the posterior plot contract)
# ---------------------------------------------------------------------------

def posterior_grid_csv(config: ExperimentConfig, n: int = 7,
                       grid_size: int = 201) -> str:
    """CSV text with the posterior mean/sd, truth and data of one instance.

    Columns: x, mean, sd, truth, data_x, data_y; the data columns are only
    filled on the first n rows.
    """
    kc = config.kernels[0]
    op = OPERATORS[config.operator]()
    truth = TRUTHS[config.truth]
    prior = InducedPrior(op, Mesh1D.uniform(config.n_fe[0]), kc.build(),
                         mode=config.m_mode)
    X = uniform_points(n)
    rng = make_rng(config.seed, 10**6, 0)
    y = simulate_data(truth.solution, X, config.noise_sd, rng)
    model = condition(prior.mean, prior.kernel, X, y, config.noise_sd)
    grid = np.linspace(0.0, 1.0, grid_size)
    mean, sd = model.predict(grid, return_std=True)
    tvals = truth.solution(grid)
    lines = [POSTERIOR_CSV_HEADER]
    for i, x in enumerate(grid):
        data_x = repr(float(X[i])) if i < n else ""
        data_y = repr(float(y[i])) if i < n else ""
        vals = ",".join(repr(float(v)) for v in (x, mean[i], sd[i], tvals[i]))
        lines.append(f"{vals},{data_x},{data_y}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# perturbation bound for posterior-style means of nearby kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Prop6Report:
    """Both sides of the kernel-perturbation bound on the smoother means.

    With delta = sup |R1 - R2| and C = sup |R2| (both over the evaluation
    grid), the smoother means built from data vector Z must satisfy

        sup_x |m1(x) - m2(x)| <= ||Z||_2 (delta + C / sigma^2) delta n / sigma^2.
    """
    lhs: float
    rhs: float
    delta: float
    bound_const: float
    witness_x: float
    grid_size: int

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs


def prop6_check(R1: Kernel, R2: Kernel, X, Z, sigma: float,
                grid=None) -> Prop6Report:
    """Evaluate the perturbation bound for two kernels on a shared grid."""
    check_positive(sigma, "sigma")
    X = np.asarray(X, dtype=np.float64).ravel()
    Z = np.asarray(Z, dtype=np.float64).ravel()
    n = X.size
    if Z.size != n:
        raise ValueError("Z must have one entry per point in X")
    if grid is None:
        grid = np.linspace(0.0, 1.0, 1024)
    grid = np.asarray(grid, dtype=np.float64).ravel()

    G1 = R1.pairwise(grid, grid)
    G2 = R2.pairwise(grid, grid)
    delta = float(np.max(np.abs(G1 - G2)))
    bound_const = float(np.max(np.abs(G2)))

    def smoother_mean(R: Kernel) -> np.ndarray:
        K = R.pairwise(X, X) + sigma**2 * np.eye(n)
        return R.pairwise(grid, X) @ np.linalg.solve(K, Z)

    diff = np.abs(smoother_mean(R1) - smoother_mean(R2))
    i = int(np.argmax(diff))
    lhs = float(diff[i])
    rhs = float(np.linalg.norm(Z) * (delta + bound_const / sigma**2)
                * delta * n / sigma**2)
    return Prop6Report(lhs, rhs, delta, bound_const, float(grid[i]), grid.size)


def prop6_randomized_trials(n_trials: int = 100, seed: int = 0,
                            grid_size: int = 1024) -> list[Prop6Report]:
    """Randomized Matérn pairs, points and data vectors; returns all reports."""
    rng = make_rng(seed, 6)
    grid = np.linspace(0.0, 1.0, grid_size)
    supported = [0.5, 1.5, 2.5, 3.5]
    reports = []
    for _ in range(n_trials):
        k1 = Matern(rng.choice(supported), rng.uniform(0.25, 2.0),
                    rng.uniform(0.5, 2.0))
        k2 = Matern(rng.choice(supported), rng.uniform(0.25, 2.0),
                    rng.uniform(0.5, 2.0))
        n = int(rng.integers(2, 21))
        X = np.sort(rng.uniform(0.01, 0.99, size=n))
        Z = rng.normal(0.0, 1.0, size=n)
        sigma = 10.0 ** rng.uniform(-3, -1)
        reports.append(prop6_check(k1, k2, X, Z, sigma, grid))
    return reports
