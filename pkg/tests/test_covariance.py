import math

import numpy as np
import pytest

from flrlab import (
    DesignSpec,
    GridFunction,
    eigen_gap_check,
    fourier_basis,
    hs_distance,
    inner_product,
    norm,
    sample_basis_design,
    sqrt_apply,
    true_covariance,
)
from flrlab.covariance import CovOperator, empirical_covariance
from flrlab.function_space import Basis, trapezoid_weights


def quadrature_apply(sample, f: GridFunction) -> np.ndarray:
    """Oracle: (1/n) sum_j X_j <X_j, f> straight from the sample values."""
    w = trapezoid_weights(sample.grid_size)
    coeffs = sample.values @ (w * f.values)
    return coeffs @ sample.values / sample.n


class TestEmpiricalCovariance:
    def test_rank_one(self):
        spec = DesignSpec(kind="basis-expansion", alpha=2.0, grid_size=256)
        s = sample_basis_design(spec, 1, 4)
        op = empirical_covariance(s)
        x = s.function(0)
        assert op.rank == 1
        assert op.eigenvalues[0] == pytest.approx(norm(x, 2) ** 2, rel=1e-10)
        phi = op.eigenfunctions.function(0)
        align = inner_product(phi, x) / norm(x, 2)
        assert abs(abs(align) - 1.0) <= 1e-10

    def test_eigen_residuals(self, sample25, cov25):
        lam1 = cov25.eigenvalues[0]
        for k in range(cov25.rank):
            phi = cov25.eigenfunctions.function(k)
            applied = quadrature_apply(sample25, phi)
            resid = applied - cov25.eigenvalues[k] * phi.values
            assert norm(GridFunction(resid), 2) <= 1e-8 * lam1

    def test_spectrum_tracks_truth(self):
        spec = DesignSpec(kind="basis-expansion", alpha=2.0, grid_size=256)
        s = sample_basis_design(spec, 2000, 8)
        op = empirical_covariance(s)
        for j in range(5):
            target = (j + 1.0) ** -2.0
            assert abs(op.eigenvalues[j] - target) <= 0.2 * target

    def test_empty_sample_rejected(self, small_spec):
        with pytest.raises(ValueError):
            sample_basis_design(small_spec, 0, 1)

    def test_routes_agree(self, small_spec):
        s = sample_basis_design(small_spec, 30, 17)
        dual = empirical_covariance(s, method="dual")
        grid = empirical_covariance(s, method="grid")
        coeff = empirical_covariance(s, method="coeff")
        r = dual.rank
        top = dual.eigenvalues[0]
        assert np.max(np.abs(dual.eigenvalues[:r] - grid.eigenvalues[:r])) <= 1e-8 * top
        assert np.max(np.abs(dual.eigenvalues[:r] - coeff.eigenvalues[:r])) <= 1e-8 * top

    def test_kernel_reconstruction(self, small_spec):
        # retained eigenpairs rebuild the kernel to numerical-rank accuracy
        s = sample_basis_design(small_spec, 20, 3)
        op = empirical_covariance(s)
        direct = (s.values.T @ s.values) / s.n
        rebuilt = op.kernel
        rel = np.linalg.norm(rebuilt - direct) / np.linalg.norm(direct)
        assert rel <= 1e-6

    def test_positivity(self, small_spec):
        s = sample_basis_design(small_spec, 15, 9)
        op = empirical_covariance(s)
        rng = np.random.default_rng(0)
        w = trapezoid_weights(small_spec.grid_size)
        fs = rng.standard_normal((1000, small_spec.grid_size))
        weighted = fs * w
        quad = np.einsum("id,de,ie->i", weighted, op.kernel, weighted)
        assert np.min(quad) >= -1e-10


class TestSqrtApply:
    def test_eigenfunction_scaling(self, cov25):
        for k in (0, 3, 10):
            phi = cov25.eigenfunctions.function(k)
            out = sqrt_apply(cov25, phi)
            expect = math.sqrt(cov25.eigenvalues[k]) * phi.values
            assert np.max(np.abs(out.values - expect)) <= 1e-8

    def test_annihilates_orthogonal_complement(self, cov25):
        rng = np.random.default_rng(2)
        f = rng.standard_normal(cov25.grid_size)
        w = trapezoid_weights(cov25.grid_size)
        phi = cov25.eigenfunctions.functions
        f = f - (phi * w) @ f @ phi          # project out the range
        out = sqrt_apply(cov25, GridFunction(f))
        assert norm(out, 2) <= 1e-8 * np.linalg.norm(f)

    def test_square_root_squares_to_operator(self, small_spec):
        s = sample_basis_design(small_spec, 12, 6)
        op = empirical_covariance(s, method="grid")
        rng = np.random.default_rng(3)
        for _ in range(100):
            f = GridFunction(rng.standard_normal(small_spec.grid_size))
            twice = sqrt_apply(op, sqrt_apply(op, f))
            direct = op.apply(f)
            denom = max(norm(direct, 2), 1e-12)
            assert norm(twice - direct, 2) / denom <= 1e-6


class TestHsDistance:
    def test_zero_on_equal(self, cov25):
        assert hs_distance(cov25, cov25) == 0.0

    def test_orthogonal_rank_ones(self):
        basis = fourier_basis(2, 256)
        u = CovOperator(eigenvalues=np.array([1.0]),
                        eigenfunctions=Basis(basis.functions[:1], kind="eigen"))
        v = CovOperator(eigenvalues=np.array([1.0]),
                        eigenfunctions=Basis(basis.functions[1:2], kind="eigen"))
        assert hs_distance(u, v) == pytest.approx(math.sqrt(2.0), abs=1e-6)

    def test_one_over_n_scaling(self):
        # E || emp - true ||_HS^2 halves four-fold when n quadruples
        spec = DesignSpec(kind="basis-expansion", alpha=2.0, j_truncation=64, grid_size=256)
        truth = true_covariance(spec, 64)
        sums = {}
        for n in (50, 200):
            acc = 0.0
            for rep in range(200):
                s = sample_basis_design(spec, n, 1000 * n + rep)
                acc += hs_distance(empirical_covariance(s), truth) ** 2
            sums[n] = acc / 200
        ratio = sums[50] / sums[200]
        assert 3.0 <= ratio <= 5.5

    def test_grid_mismatch(self, cov25):
        spec = DesignSpec(kind="basis-expansion", alpha=2.0, grid_size=256)
        other = empirical_covariance(sample_basis_design(spec, 5, 1))
        with pytest.raises(Exception):
            hs_distance(cov25, other)


class TestEigenGaps:
    def test_quadratic_decay_scaled_gaps(self):
        lam = np.arange(1, 30, dtype=float) ** -2.0
        basis = fourier_basis(29, 256)
        op = CovOperator(eigenvalues=lam, eigenfunctions=Basis(basis.functions, kind="eigen"))
        rep = eigen_gap_check(op, 2.0)
        # direct evaluation: j^3 (j^-2 - (j+1)^-2) = j(2j+1)/(j+1)^2, which
        # starts at 3/4 and increases toward 2
        js = np.arange(1, 29, dtype=float)
        expect = js * (2 * js + 1) / (js + 1) ** 2
        assert np.allclose(rep.scaled_gaps, expect, rtol=1e-12)
        assert rep.min_scaled_gap == pytest.approx(0.75, abs=1e-12)
        assert np.all(rep.scaled_gaps < 2.0)
        assert not rep.flagged

    def test_flat_spectrum_flagged(self):
        basis = fourier_basis(4, 256)
        op = CovOperator(eigenvalues=np.ones(4), eigenfunctions=Basis(basis.functions, kind="eigen"))
        assert eigen_gap_check(op, 2.0).flagged

    def test_power_decay_all_positive(self):
        for alpha in (2.0, 3.0):
            lam = np.arange(1, 20, dtype=float) ** -alpha
            basis = fourier_basis(19, 256)
            op = CovOperator(eigenvalues=lam, eigenfunctions=Basis(basis.functions, kind="eigen"))
            assert np.all(eigen_gap_check(op, alpha).scaled_gaps > 0)
