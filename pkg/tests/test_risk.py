import math

import numpy as np
import pytest

from flrlab import (
    DesignSpec,
    EstimatorConfig,
    ModelConfig,
    ThetaClass,
    classifier_tv_proxy,
    delta56_study,
    mise_monte_carlo,
    pinsker_decomposition_draws,
    rate_regression,
    sample_theta,
    power_lambda_profile,
    tv_bound,
    two_sample_equivalence_test,
)
from flrlab.estimators import default_rho

SPEC = DesignSpec(kind="basis-expansion", alpha=2.0, grid_size=256)
TC = ThetaClass(beta=2.0, c_theta=1.0)


def seq_model(mode="boundary", sigma=1.0, n_grid=(100,)):
    return ModelConfig(kind="sequence", alpha=2.0, theta_class=TC, theta_mode=mode,
                       sigma=sigma, n_grid=n_grid)


def flr_model(mode="boundary", sigma=1.0, n_grid=(100,), spec=SPEC):
    return ModelConfig(kind="flr", alpha=2.0, theta_class=TC, theta_mode=mode,
                       sigma=sigma, n_grid=n_grid, design=spec)


class TestMiseMonteCarlo:
    def test_zero_estimator_exact(self):
        report = mise_monte_carlo(seq_model(), EstimatorConfig(kind="zero"), 10, 1)
        theta = sample_theta(TC, "boundary", power_lambda_profile(2.0), 1.0, 100, 0)
        assert report.mise[0] == pytest.approx(float(np.sum(theta**2)), rel=1e-12)
        assert report.stderr[0] <= 1e-12 * report.mise[0]

    def test_oracle_estimator_is_exactly_right(self):
        report = mise_monte_carlo(seq_model(), EstimatorConfig(kind="oracle"), 10, 1)
        assert report.mise[0] == 0.0

    def test_reps_floor(self):
        with pytest.raises(ValueError):
            mise_monte_carlo(seq_model(), EstimatorConfig(kind="zero"), 1, 1)

    def test_stderr_shrinks_with_reps(self):
        est = EstimatorConfig(kind="pinsker-oracle")
        small = mise_monte_carlo(seq_model(mode="random"), est, 400, 3)
        large = mise_monte_carlo(seq_model(mode="random"), est, 800, 3)
        ratio = small.stderr[0] / large.stderr[0]
        assert abs(ratio - math.sqrt(2.0)) <= 0.2 * math.sqrt(2.0)

    def test_threads_do_not_change_results(self):
        est = EstimatorConfig(kind="pinsker-oracle")
        a = mise_monte_carlo(seq_model(), est, 20, 5, threads=1)
        b = mise_monte_carlo(seq_model(), est, 20, 5, threads=4)
        assert np.array_equal(a.mise, b.mise)

    def test_seed_determinism(self):
        est = EstimatorConfig(kind="cutoff")
        a = mise_monte_carlo(flr_model(n_grid=(64,)), est, 5, 9)
        b = mise_monte_carlo(flr_model(n_grid=(64,)), est, 5, 9)
        assert np.array_equal(a.mise, b.mise) and np.array_equal(a.stderr, b.stderr)

    def test_flr_cutoff_matches_module_ops(self):
        # the shared-replication fast path reproduces the composed operations
        from flrlab import (
            cutoff_estimator,
            empirical_covariance,
            sample_design,
            select_cutoff,
            true_covariance,
        )
        from flrlab.equivalence import WnCoefficients
        from flrlab.risk import _make_rep_context, _render_theta
        from flrlab.streams import derive_rng

        model = flr_model(n_grid=(64,))
        est = EstimatorConfig(kind="cutoff")
        theta = sample_theta(TC, "boundary", power_lambda_profile(2.0), 1.0, 64, 0)
        ctx_val = _make_rep_context(model, est, 64, 11, 0)(theta)

        rng = derive_rng(11, "flr-n64", 0)
        m = 32
        sample = sample_design(SPEC, m, rng)
        emp = empirical_covariance(sample)
        noise = rng.standard_normal(m)
        k = select_cutoff(m, 2.0, 2.0)
        truth = true_covariance(SPEC, k)
        theta_grid = _render_theta(theta, SPEC)
        r = emp.rank
        drift = np.sqrt(m * emp.eigenvalues[:r]) * emp.eigen_coefficients(theta_grid, count=r)
        z = np.zeros(m)
        z[:r] = drift
        z += 1.0 * noise
        est_coeffs = cutoff_estimator(WnCoefficients(z=z, sigma=1.0), truth, k, m, emp_cov=emp)
        expected = float(np.sum((est_coeffs - theta[:k]) ** 2) + np.sum(theta[k:] ** 2))
        assert ctx_val == pytest.approx(expected, rel=1e-10)


class TestDeltaStudy:
    def test_forced_true_operator_gives_zero(self):
        report = delta56_study((64,), flr_model(), 3, 1, force_true_cov2=True)
        assert np.all(report.mean_sq == 0.0)

    def test_forced_true_estimate_gives_zero(self):
        report = delta56_study((64,), flr_model(), 3, 1, force_true_theta1=True)
        assert np.max(report.mean_sq) <= 1e-18

    def test_decreasing_trend(self):
        report = delta56_study((256, 1024), flr_model(sigma=0.5), 30, 7)
        assert report.mean_sq[1] < report.mean_sq[0]
        assert report.tv_bounds[1] < report.tv_bounds[0]


class TestTvBound:
    def test_zero(self):
        assert tv_bound(0.0, 1.0) == 0.0

    def test_saturates_at_two(self):
        assert tv_bound(1e9, 1.0) <= 2.0
        assert tv_bound(1e9, 1.0) >= 2.0 - 1e-6

    def test_closed_form_point(self):
        sigma = 1.3
        value = tv_bound(2.0 * sigma**2 * math.log(2.0), sigma)
        assert value == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_monotone(self):
        xs = np.linspace(0.0, 5.0, 50)
        vals = [tv_bound(x, 1.0) for x in xs]
        assert np.all(np.diff(vals) >= 0)

    def test_sigma_validation(self):
        with pytest.raises(ValueError):
            tv_bound(1.0, 0.0)


class TestRateRegression:
    def test_exact_inverse_law(self):
        ns = np.array([100, 200, 400, 800])
        slope, se = rate_regression(ns, 3.0 / ns)
        assert slope == pytest.approx(-1.0, abs=1e-12)
        assert se <= 1e-12

    def test_flat_series(self):
        slope, _ = rate_regression([10, 100, 1000], [2.0, 2.0, 2.0])
        assert slope == pytest.approx(0.0, abs=1e-12)

    def test_noisy_synthetic_rate(self):
        rng = np.random.default_rng(8)
        ns = np.array([2**k for k in range(8, 15)])
        mise = ns ** (-4.0 / 7.0) * (1.0 + 0.05 * rng.standard_normal(ns.size))
        slope, _ = rate_regression(ns, mise)
        assert abs(slope - (-4.0 / 7.0)) <= 0.05

    def test_needs_three_points(self):
        with pytest.raises(ValueError):
            rate_regression([10, 20], [1.0, 0.5])


class TestTwoSampleBattery:
    def test_identical_samples_have_zero_statistics(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((500, 4))
        report = two_sample_equivalence_test(a, a.copy())
        assert np.all(report.statistics == 0.0)
        assert report.rejection_rate == 0.0

    def test_same_law_calibration(self):
        rng = np.random.default_rng(2)
        k = 20
        a = rng.standard_normal((1500, k))
        b = rng.standard_normal((1500, k))
        report = two_sample_equivalence_test(a, b, level=0.05)
        assert report.rejection_rate <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / k)

    def test_shift_is_detected(self):
        rng = np.random.default_rng(3)
        rejections = 0
        for trial in range(20):
            a = rng.standard_normal((2000, 3))
            b = rng.standard_normal((2000, 3))
            b[:, 1] += 1.0
            report = two_sample_equivalence_test(a, b, level=0.05)
            rejections += int(report.rejected[1])
        assert rejections == 20

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            two_sample_equivalence_test(np.zeros((5, 2)), np.zeros((5, 3)))


class TestClassifierTvProxy:
    def test_bounded_by_tv_surrogate(self):
        # Gaussian pair shifted by a known drift: the plug-in classifier's
        # advantage stays below the closed-form bound
        rng = np.random.default_rng(4)
        sigma = 1.0
        for msd in (0.05, 0.5, 2.0):
            d = 8
            shift = np.zeros(d)
            shift[0] = math.sqrt(msd)
            a = sigma * rng.standard_normal((4000, d))
            b = shift + sigma * rng.standard_normal((4000, d))
            est, se = classifier_tv_proxy(a, b, seed=5)
            assert est <= tv_bound(msd, sigma) + 3 * se

    def test_identical_distributions_give_near_zero(self):
        rng = np.random.default_rng(6)
        a = rng.standard_normal((4000, 5))
        b = rng.standard_normal((4000, 5))
        est, se = classifier_tv_proxy(a, b, seed=7)
        assert est <= 3 * se + 0.05


class TestPinskerDecomposition:
    def test_realized_error_matches_conditional_decomposition(self):
        # bias + variance given the designs has the same mean as the realized
        # squared error; the cross term vanishes conditionally
        lhs, rhs = pinsker_decomposition_draws(SPEC, TC, 1.0, default_rho(2.0),
                                               n=200, reps=200, seed=3)
        diff = lhs - rhs
        assert abs(diff.mean()) <= 3.0 * diff.std(ddof=1) / math.sqrt(diff.size)
