import math

import numpy as np
import pytest

from flrlab import (
    DegenerateDesignError,
    DesignSpec,
    GridFunction,
    build_gram_transform,
    conditional_loglik,
    empirical_covariance,
    flr_to_whitenoise,
    fourier_basis,
    reduced_loglik,
    sample_basis_design,
    simulate_empirical_wn,
    simulate_flr_responses,
    synthesize,
    whitenoise_to_flr,
)
from flrlab.equivalence import render_coefficient_path
from flrlab.function_space import trapezoid_weights


def random_theta(grid_size, seed, count=12, scale=0.4):
    rng = np.random.default_rng(seed)
    basis = fourier_basis(count, grid_size)
    return synthesize(basis, scale * rng.standard_normal(count))


class TestGramTransform:
    def test_single_design_gives_plus_one(self):
        spec = DesignSpec(kind="basis-expansion", alpha=2.0, grid_size=256)
        s = sample_basis_design(spec, 1, 2)
        t = build_gram_transform(s, empirical_covariance(s))
        assert t.a.shape == (1, 1)
        assert t.a[0, 0] == pytest.approx(1.0, abs=1e-10)

    def test_orthogonality(self, sample25, cov25):
        t = build_gram_transform(sample25, cov25)
        assert np.max(np.abs(t.a.T @ t.a - np.eye(25))) <= 1e-8
        assert np.max(np.abs(t.a @ t.a.T - np.eye(25))) <= 1e-8

    def test_gram_diagonalization(self, sample25, cov25):
        t = build_gram_transform(sample25, cov25)
        qtq = t.q.T @ t.q
        off = qtq - np.diag(np.diag(qtq))
        assert np.max(np.abs(off)) <= 1e-8 * 25 * cov25.eigenvalues[0]
        assert np.max(np.abs(np.diag(qtq) - 25 * cov25.eigenvalues[:25])) \
            <= 1e-8 * 25 * cov25.eigenvalues[0]

    def test_determinant_is_plus_one(self, sample25, cov25):
        t = build_gram_transform(sample25, cov25)
        assert abs(np.linalg.det(t.a) - 1.0) <= 1e-6

    def test_rank_deficient_design_aborts(self):
        spec = DesignSpec(kind="basis-expansion", alpha=2.0, j_truncation=8, grid_size=256)
        s = sample_basis_design(spec, 12, 3)
        cov = empirical_covariance(s)
        with pytest.raises(DegenerateDesignError):
            build_gram_transform(s, cov)

    def test_requires_matching_operator(self, sample25, small_spec):
        other = empirical_covariance(sample_basis_design(small_spec, 25, 1))
        with pytest.raises(ValueError):
            build_gram_transform(sample25, other)


class TestTransformRoundtrip:
    def test_zero_maps_to_zero(self, sample25, cov25):
        t = build_gram_transform(sample25, cov25)
        assert np.all(flr_to_whitenoise(np.zeros(25), t).z == 0.0)

    def test_roundtrip(self, sample25, cov25):
        t = build_gram_transform(sample25, cov25)
        rng = np.random.default_rng(5)
        y = rng.standard_normal(25)
        back = whitenoise_to_flr(flr_to_whitenoise(y, t), t)
        assert np.max(np.abs(back - y)) <= 1e-10

    def test_unit_coefficient_maps_to_column(self, sample25, cov25):
        t = build_gram_transform(sample25, cov25)
        e3 = np.zeros(25)
        e3[3] = 1.0
        y = whitenoise_to_flr(e3, t)
        assert np.max(np.abs(y - t.a[:, 3])) == 0.0
        assert np.linalg.norm(y) == pytest.approx(1.0, abs=1e-10)

    def test_isometry(self, sample25, cov25):
        t = build_gram_transform(sample25, cov25)
        rng = np.random.default_rng(6)
        for _ in range(1000):
            z = rng.standard_normal(25)
            y = whitenoise_to_flr(z, t)
            assert abs(np.linalg.norm(y) / np.linalg.norm(z) - 1.0) <= 1e-10


class TestDirectSimulation:
    def test_noiseless_matches_transform_route(self, sample25, cov25):
        theta = random_theta(cov25.grid_size, 11)
        t = build_gram_transform(sample25, cov25)
        y = simulate_flr_responses(sample25, theta, 0.0, 1)
        z_transform = flr_to_whitenoise(y, t).z
        z_direct = simulate_empirical_wn(theta, sample25, cov25, 0.0, 2).z
        assert np.max(np.abs(z_transform - z_direct)) <= 1e-6

    def test_pure_noise_variance(self, small_spec):
        s = sample_basis_design(small_spec, 10, 14)
        cov = empirical_covariance(s)
        theta = GridFunction(np.zeros(small_spec.grid_size))
        draws = np.stack([
            simulate_empirical_wn(theta, s, cov, 2.0, 100 + i).z for i in range(10_000)
        ])
        v = draws.var(axis=0, ddof=1).mean()
        se = 4.0 * math.sqrt(2.0 / (draws.shape[0] - 1)) / math.sqrt(10)
        assert abs(v - 4.0) <= 3 * se

    def test_drift_vanishes_off_range(self, small_spec):
        # coefficients beyond the operator rank carry no signal
        s = sample_basis_design(small_spec, 10, 15)
        cov = empirical_covariance(s)
        theta = random_theta(small_spec.grid_size, 16)
        rng = np.random.default_rng(0)
        g = rng.standard_normal(small_spec.grid_size)
        w = trapezoid_weights(small_spec.grid_size)
        phi = cov.eigenfunctions.functions
        g = g - (phi * w) @ g @ phi
        g /= np.linalg.norm(g)
        from flrlab import sqrt_apply

        drift = sqrt_apply(cov, theta)
        assert abs(np.dot(w * g, drift.values)) <= 1e-10


class TestConditionalLikelihood:
    def test_zero_residual_value(self, small_spec):
        s = sample_basis_design(small_spec, 1, 21)
        theta = random_theta(small_spec.grid_size, 22)
        y = simulate_flr_responses(s, theta, 0.0, 1)
        sigma = 0.7
        assert conditional_loglik(y, s, theta, sigma) \
            == pytest.approx(-0.5 * math.log(2 * math.pi) - math.log(sigma), abs=1e-10)

    def test_sigma_doubling_with_zero_residual(self, sample25):
        theta = random_theta(1024, 23)
        y = simulate_flr_responses(sample25, theta, 0.0, 1)
        l1 = conditional_loglik(y, sample25, theta, 1.0)
        l2 = conditional_loglik(y, sample25, theta, 2.0)
        assert l1 - l2 == pytest.approx(25 * math.log(2.0), abs=1e-9)

    def test_sigma_must_be_positive(self, sample25):
        theta = random_theta(1024, 24)
        with pytest.raises(ValueError):
            conditional_loglik(np.zeros(25), sample25, theta, 0.0)

    def test_reduction_identity(self):
        # direct Gaussian density equals the rotated one on random instances
        rng = np.random.default_rng(31)
        for trial in range(100):
            n = int(rng.integers(3, 30))
            spec = DesignSpec(kind="basis-expansion", alpha=2.0, grid_size=512)
            s = sample_basis_design(spec, n, 2000 + trial)
            cov = empirical_covariance(s)
            t = build_gram_transform(s, cov)
            theta = random_theta(512, 3000 + trial)
            y = rng.standard_normal(n)
            sigma = float(rng.uniform(0.5, 2.0))
            direct = conditional_loglik(y, s, theta, sigma)
            reduced = reduced_loglik(y, t, cov, theta, sigma)
            assert abs(direct - reduced) <= 1e-8


class TestPathRendering:
    def test_starts_at_zero_and_is_finite(self, sample25, cov25):
        theta = random_theta(1024, 41)
        wn = simulate_empirical_wn(theta, sample25, cov25, 1.0, 5)
        path = render_coefficient_path(wn, cov25, seed=6)
        assert path.values[0] == 0.0
        assert np.all(np.isfinite(path.values))
