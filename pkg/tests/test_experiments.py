"""Point sets, data simulation, error norms and the convergence runner."""

import json

import numpy as np
import pytest

import statfem.experiments as ex
from statfem.experiments import (
    ExperimentConfig,
    KernelConfig,
    demo_config,
    fill_metrics,
    l2_error,
    make_rng,
    matern_baseline,
    prop6_check,
    prop6_randomized_trials,
    run_convergence,
    simulate_data,
    theory_slope,
    uniform_points,
)
from statfem.fem import InducedPrior, Mesh1D, Operator1D
from statfem.kernels import Matern


def two_sine(x):
    return np.sin(np.pi * x) / 5 + np.sin(7 * np.pi * x) / 50


class TestPointSets:
    def test_single_point(self):
        np.testing.assert_array_equal(uniform_points(1), [0.5])

    def test_three_points(self):
        np.testing.assert_allclose(uniform_points(3), [0.25, 0.5, 0.75])

    def test_fill_distance_uniform(self):
        for n in [1, 3, 10, 100, 1000, 4096, 10000]:
            assert fill_metrics(uniform_points(n)).fill_distance == pytest.approx(
                1.0 / (n + 1), rel=1e-14)

    def test_fill_distance_brute_force(self):
        X = uniform_points(3)
        dense = np.linspace(0, 1, 100001)
        brute = np.max(np.min(np.abs(dense[:, None] - X[None, :]), axis=1))
        m = fill_metrics(X)
        assert m.fill_distance == pytest.approx(brute, abs=1e-4)
        assert m.fill_distance == 0.25

    def test_single_point_metrics_degenerate(self):
        m = fill_metrics([0.5])
        assert m.fill_distance == 0.5
        assert np.isinf(m.separation)
        assert m.degenerate

    def test_quasi_uniformity_constant_one(self):
        # h * n <= 1 for every uniform point count
        for n in [1, 2, 5, 17, 129, 1024]:
            assert fill_metrics(uniform_points(n)).fill_distance * n <= 1.0

    def test_mesh_ratio(self):
        m = fill_metrics([0.1, 0.3, 0.9])
        assert m.fill_distance == pytest.approx(0.3)
        assert m.separation == pytest.approx(0.1)
        assert m.mesh_ratio == pytest.approx(3.0)

    def test_invalid_sets_rejected(self):
        with pytest.raises(ValueError):
            fill_metrics([0.5, 0.2])
        with pytest.raises(ValueError):
            fill_metrics([0.0, 0.5])
        with pytest.raises(ValueError):
            uniform_points(0)


class TestSimulateData:
    def test_deterministic_given_seed(self):
        X = uniform_points(9)
        y1 = simulate_data(two_sine, X, 1e-3, make_rng(7, 1, 2))
        y2 = simulate_data(two_sine, X, 1e-3, make_rng(7, 1, 2))
        np.testing.assert_array_equal(y1, y2)

    def test_residual_moments(self):
        X = np.full(100000, 0.5)
        y = simulate_data(two_sine, X, 1e-3, make_rng(123, 0))
        z = (y - two_sine(X)) / 1e-3
        assert -0.02 <= np.mean(z) <= 0.02
        assert 0.98 <= np.var(z) <= 1.02

    def test_noise_sd_positive(self):
        with pytest.raises(ValueError):
            simulate_data(two_sine, uniform_points(3), 0.0, make_rng(0))


class TestL2Error:
    def test_identical_functions(self):
        assert l2_error(two_sine, two_sine) <= 1e-14

    def test_norm_of_two_mode_truth(self):
        # orthogonality of sine modes: (1/25 + 1/2500) / 2 = 0.0202
        got = l2_error(two_sine, lambda x: np.zeros_like(x))
        assert got == pytest.approx(np.sqrt(0.0202), rel=1e-10)
        assert got == pytest.approx(0.142127, abs=1e-6)

    def test_against_riemann_sum(self):
        f = lambda x: np.sin(3 * x) - 0.2 * x
        grid = (np.arange(10**6) + 0.5) / 10**6
        riemann = np.sqrt(np.mean((two_sine(grid) - f(grid)) ** 2))
        assert l2_error(two_sine, f) == pytest.approx(riemann, abs=1e-8)


class TestTheorySlope:
    def test_half(self):
        assert theory_slope(0.5) == pytest.approx(-0.25)

    def test_three_halves(self):
        assert theory_slope(1.5) == pytest.approx(-0.375)


class TestConfig:
    def test_json_roundtrip(self, tmp_path):
        cfg = demo_config(seed=5)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg.to_dict()))
        assert ExperimentConfig.from_json(path) == cfg

    def test_unknown_keys_rejected(self, tmp_path):
        data = demo_config().to_dict()
        data["n_obvs"] = [3]
        path = tmp_path / "config.json"
        path.write_text(json.dumps(data))
        with pytest.raises(ValueError, match="n_obvs"):
            ExperimentConfig.from_json(path)

    def test_field_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(kernels=(), n_fe=(8,), n_obs=(3,), noise_sd=1e-3,
                             realizations=1)
        with pytest.raises(ValueError):
            ExperimentConfig(kernels=(KernelConfig(0.5, 1, 1),), n_fe=(8,),
                             n_obs=(3,), noise_sd=1e-3, realizations=0)
        with pytest.raises(ValueError):
            ExperimentConfig(kernels=(KernelConfig(0.5, 1, 1),), n_fe=(8,),
                             n_obs=(3,), noise_sd=-1.0, realizations=1)
        with pytest.raises(ValueError, match="m_mode"):
            ExperimentConfig(kernels=(KernelConfig(0.5, 1, 1),), n_fe=(8,),
                             n_obs=(3,), noise_sd=1e-3, realizations=1,
                             m_mode="fast")


def small_config(**overrides):
    base = dict(
        kernels=(KernelConfig(0.5, 0.5, 120.0),),
        n_fe=(64,),
        n_obs=(3, 7, 15, 31),
        noise_sd=1e-3,
        realizations=3,
        m_mode="lumped",
        seed=99,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestRunConvergence:
    def test_deterministic_bytes(self):
        cfg = small_config()
        a = run_convergence(cfg).rates.to_csv_text()
        b = run_convergence(cfg).rates.to_csv_text()
        assert a == b

    def test_threaded_matches_serial(self):
        cfg = small_config()
        serial = run_convergence(cfg, threads=1)
        threaded = run_convergence(cfg, threads=3)
        assert serial.rates.to_csv_text() == threaded.rates.to_csv_text()
        assert (serial.baseline_rates.to_csv_text()
                == threaded.baseline_rates.to_csv_text())

    def test_csv_schema(self):
        text = run_convergence(small_config()).rates.to_csv_text()
        lines = text.strip().split("\n")
        assert lines[0] == ("nu,lengthscale,variance,n_fe,n,mean_l2,std_l2,"
                            "theory_slope,fitted_slope")
        assert len(lines) == 1 + 4
        first = lines[1].split(",")
        assert first[0] == "0.5" and first[3] == "64" and first[4] == "3"
        assert float(first[7]) == pytest.approx(-0.25)

    def test_theory_slopes_attached(self):
        cfg = small_config(kernels=(KernelConfig(0.5, 0.5, 120.0),
                                    KernelConfig(1.5, 0.5, 120.0)))
        res = run_convergence(cfg)
        assert res.rates.series[0].theory_slope == pytest.approx(-0.25)
        assert res.rates.series[1].theory_slope == pytest.approx(-0.375)

    def test_errors_nonnegative_and_decreasing_overall(self):
        res = run_convergence(small_config())
        rows = res.rates.series[0].rows
        means = [r.mean_l2 for r in rows]
        assert all(m > 0 for m in means)
        assert means[-1] < means[0]

    def test_doubling_mesh_does_not_hurt_at_large_n(self):
        # paired noise isolates the (monotone) FE contribution from the
        # statistical error
        from statfem.gp import condition

        truth = ex.TRUTHS["two_sine"]
        op = Operator1D.poisson()
        kern = Matern(0.5, 0.5, 120.0)
        priors = [InducedPrior(op, Mesh1D.uniform(n), kern, mode="lumped")
                  for n in (256, 512)]
        X = uniform_points(127)
        means = np.zeros(2)
        for r in range(10):
            y = simulate_data(truth.solution, X, 1e-3, make_rng(99, 0, r))
            for i, prior in enumerate(priors):
                model = condition(prior.mean, prior.kernel, X, y, 1e-3)
                means[i] += l2_error(truth.solution, model.predict)
        assert means[1] <= means[0] * 1.05

    def test_failed_cell_recorded_not_fatal(self, monkeypatch):
        calls = {"count": 0}
        original = ex.condition

        def flaky(*args, **kwargs):
            calls["count"] += 1
            if calls["count"] == 1:
                raise RuntimeError("injected failure")
            return original(*args, **kwargs)

        monkeypatch.setattr(ex, "condition", flaky)
        res = run_convergence(small_config())
        failures = [d for d in res.rates.diagnostics if "injected failure" in d]
        assert len(failures) == 1 and "n=3" in failures[0]
        assert len(res.rates.series[0].rows) == 3  # remaining cells survive

    def test_positive_reaction_rejected(self, monkeypatch):
        monkeypatch.setitem(ex.OPERATORS, "poisson",
                            lambda: Operator1D(a=1.0, b=0.0, c=1.0))
        with pytest.raises(ValueError, match="reaction"):
            run_convergence(small_config())


class TestBaseline:
    def test_zero_data_gives_zero_mean(self):
        X = uniform_points(5)
        model = matern_baseline(X, np.zeros(5), 1e-3, nu=0.5)
        np.testing.assert_array_equal(model.predict(np.linspace(0, 1, 11)), 0.0)

    def test_smoothness_bumped_by_two(self):
        model = matern_baseline(uniform_points(5), np.ones(5), 1e-3, nu=1.5)
        assert model.kernel.nu == 3.5
        assert model.kernel.lengthscale == 1.0 and model.kernel.variance == 1.0

    def test_does_not_vanish_at_boundary(self):
        X = uniform_points(7)
        y = two_sine(X) + 0.01
        model = matern_baseline(X, y, 1e-3, nu=0.5)
        assert abs(model.predict([0.0])[0]) > 1e-6

    def test_statfem_beats_baseline_at_small_n(self):
        cfg = small_config(n_fe=(512,), n_obs=(7,), realizations=10)
        res = run_convergence(cfg)
        assert (res.rates.series[0].rows[0].mean_l2
                <= res.baseline_rates.series[0].rows[0].mean_l2)


class TestProp6:
    def test_identical_kernels_both_sides_zero(self):
        k = Matern(1.5, 0.5, 2.0)
        X = uniform_points(6)
        Z = np.ones(6)
        report = prop6_check(k, k, X, Z, sigma=1e-2)
        assert report.delta == 0.0 and report.rhs == 0.0
        assert report.lhs <= 1e-12

    def test_fe_refinement_pair(self):
        op = Operator1D.poisson()
        kern = Matern(0.5, 0.5, 120.0)
        k1 = InducedPrior(op, Mesh1D.uniform(128), kern, mode="lumped").kernel
        k2 = InducedPrior(op, Mesh1D.uniform(256), kern, mode="lumped").kernel
        rng = make_rng(31, 0)
        X = np.sort(rng.uniform(0.05, 0.95, 12))
        Z = rng.normal(size=12)
        report = prop6_check(k1, k2, X, Z, sigma=1e-3)
        assert report.passed
        assert report.delta > 0.0

    def test_randomized_trials_all_pass(self):
        reports = prop6_randomized_trials(n_trials=30, seed=17)
        assert all(r.passed for r in reports)

    def test_report_contains_witness(self):
        k1, k2 = Matern(0.5, 0.4, 1.0), Matern(3.5, 1.2, 1.5)
        X = uniform_points(5)
        report = prop6_check(k1, k2, X, np.ones(5), sigma=1e-2)
        assert 0.0 <= report.witness_x <= 1.0
        assert report.grid_size == 1024


class TestHeuristicMeshCoupling:
    def test_coupled_mesh_recovers_fixed_mesh_slope(self):
        # n_fe = ceil(n^((2 - 1/(4k))/q)) with k = 1, q = 2 should match the
        # slope of a fixed fine mesh once both are past the FE-bias regime;
        # identical single-n configs pair the noise draws so the slope
        # difference isolates the mesh choice
        ns = (31, 63, 127, 255, 511, 1023)
        exponent = (2 - 1 / 4) / 2

        def mean_errors(n_fe_for):
            out = []
            for n in ns:
                cfg = ExperimentConfig(
                    kernels=(KernelConfig(0.5, 0.5, 120.0),),
                    n_fe=(n_fe_for(n),), n_obs=(n,),
                    noise_sd=1e-3, realizations=10, m_mode="lumped",
                    seed=20260809)
                out.append(run_convergence(cfg).rates.series[0].rows[0].mean_l2)
            return out

        coupled = mean_errors(lambda n: int(np.ceil(n**exponent)))
        fixed = mean_errors(lambda n: 1024)
        drop = 2  # same pre-asymptotic exclusion as the rate tables
        coupled_slope = np.polyfit(np.log(ns[drop:]), np.log(coupled[drop:]), 1)[0]
        fixed_slope = np.polyfit(np.log(ns[drop:]), np.log(fixed[drop:]), 1)[0]
        assert abs(coupled_slope - fixed_slope) <= 0.05


class TestPosteriorGridCsv:
    def test_schema_and_rows(self):
        text = ex.posterior_grid_csv(small_config(n_fe=(64,)), n=5, grid_size=33)
        lines = text.strip().split("\n")
        assert lines[0] == "x,mean,sd,truth,data_x,data_y"
        assert len(lines) == 34
        first = lines[1].split(",")
        assert float(first[0]) == 0.0 and float(first[2]) == 0.0  # sd(0) = 0
        assert lines[1].count(",") == 5
        assert lines[-1].endswith(",,")  # data columns exhausted
