"""Covariance operators on L2([0,1]): construction, spectra, square roots.

The empirical operator of n designs has kernel (1/n) sum_j X_j(s) X_j(t) and
rank at most n. Its eigenpairs are computed through whichever of three exact
routes is cheapest:

* ``coeff``: the sample carries its generating coefficients in a known
  orthonormal basis, so the operator is a small J x J matrix there;
* ``dual``: the n x n matrix M_ij = <X_i, X_j>/n has the same nonzero
  spectrum, and eigenfunctions are recovered as normalized combinations
  of the X_j;
* ``grid``: direct quadrature-weighted eigendecomposition of the kernel.

Eigenfunction signs follow a fixed convention (largest-magnitude Fourier
coefficient positive), and for full-rank empirical operators the last
eigenfunction is flipped if needed so the change-of-basis matrix used by the
whitening transform has determinant +1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .function_space import (
    Basis,
    GridFunction,
    _cached_fourier_matrix,
    pairwise_inner,
    trapezoid_weights,
)

RANK_TOL = 1e-12          # eigenvalues below RANK_TOL * lambda_1 count as zero
SIGN_REFERENCE_COUNT = 64  # Fourier coefficients consulted by the sign convention


class CovOperator:
    """A positive self-adjoint operator given by sorted eigenpairs and a kernel."""

    def __init__(
        self,
        *,
        eigenvalues: np.ndarray,
        eigenfunctions: Basis,
        kernel: np.ndarray | None = None,
        kind: str = "custom",
        n_samples: int | None = None,
        coeff_basis: np.ndarray | None = None,
        coeff_vectors: np.ndarray | None = None,
    ):
        lam = np.asarray(eigenvalues, dtype=float)
        if lam.ndim != 1 or lam.size != eigenfunctions.count:
            raise ValueError("need one eigenvalue per eigenfunction")
        if lam.size > 1 and np.any(np.diff(lam) > 1e-12 * max(lam[0], 1.0)):
            raise ValueError("eigenvalues must be non-increasing")
        top = lam[0] if lam.size else 0.0
        if np.any(lam < -1e-10 * max(top, 1.0)):
            raise ValueError("operator is not positive semidefinite")
        lam = np.maximum(lam, 0.0)
        self.eigenvalues = lam
        self.eigenfunctions = eigenfunctions
        self.kind = kind
        self.n_samples = n_samples
        self._kernel = kernel
        self._coeff_basis = coeff_basis
        self._coeff_vectors = coeff_vectors

    @property
    def grid_size(self) -> int:
        return self.eigenfunctions.grid_size

    @property
    def rank(self) -> int:
        """Number of retained (numerically nonzero) eigenvalues."""
        if self.eigenvalues.size == 0:
            return 0
        return int(np.sum(self.eigenvalues > RANK_TOL * self.eigenvalues[0]))

    @property
    def kernel(self) -> np.ndarray:
        if self._kernel is None:
            phi = self.eigenfunctions.functions
            self._kernel = phi.T @ (self.eigenvalues[:, None] * phi)
        return self._kernel

    def eigen_coefficients(self, f: GridFunction, count: int | None = None) -> np.ndarray:
        """(<f, phi_1>, ..., <f, phi_K>) against the eigenfunctions."""
        k = self.eigenvalues.size if count is None else int(count)
        if k > self.eigenvalues.size:
            raise ValueError("not enough retained eigenpairs")
        w = trapezoid_weights(self.grid_size)
        return (self.eigenfunctions.functions[:k] * w) @ f.values

    def apply(self, f: GridFunction) -> GridFunction:
        """Operator applied to f; uses the kernel when one is stored exactly."""
        if f.grid_size != self.grid_size:
            raise DimensionError("function and operator live on different grids")
        if self._kernel is not None:
            w = trapezoid_weights(self.grid_size)
            return GridFunction(self._kernel @ (w * f.values))
        c = self.eigen_coefficients(f)
        return GridFunction((self.eigenvalues * c) @ self.eigenfunctions.functions)

    def coeff_matrix(self) -> np.ndarray | None:
        """Operator matrix in the attached coefficient basis, if any."""
        if self._coeff_vectors is None:
            return None
        u = self._coeff_vectors
        return u @ (self.eigenvalues[:, None] * u.T)


def _sorted_desc(values: np.ndarray, vectors: np.ndarray):
    order = np.argsort(values)[::-1]
    return values[order], vectors[:, order]


def _apply_sign_convention(funcs: np.ndarray, ref_coeffs: np.ndarray) -> np.ndarray:
    """Flip rows of ``funcs`` so each one's largest-magnitude reference
    coefficient (first such index on ties) is positive. Returns the flip signs."""
    idx = np.argmax(np.abs(ref_coeffs), axis=1)
    lead = ref_coeffs[np.arange(ref_coeffs.shape[0]), idx]
    signs = np.where(lead < 0.0, -1.0, 1.0)
    funcs *= signs[:, None]
    return signs


def _det_sign_orthogonal(a: np.ndarray) -> float:
    sign, _ = np.linalg.slogdet(a)
    return float(sign)


def _eigh_grid_kernel(kernel: np.ndarray, weights: np.ndarray, count: int):
    """Leading eigenpairs of a symmetric kernel under the quadrature metric."""
    sw = np.sqrt(weights)
    sym = sw[:, None] * kernel * sw[None, :]
    sym = 0.5 * (sym + sym.T)
    vals, vecs = np.linalg.eigh(sym)
    vals, vecs = _sorted_desc(vals, vecs)
    count = min(count, vals.size)
    funcs = (vecs[:, :count] / sw[:, None]).T
    return np.maximum(vals[:count], 0.0), funcs


def empirical_covariance(sample, *, method: str = "auto", dual_limit: int = 1200) -> CovOperator:
    """Empirical covariance operator of a design sample.

    Keeps only the numerically nonzero eigenpairs (at most min(n, rank of the
    sample span)); the operator's range equals the span of the designs.
    """
    if sample.n < 1:
        raise ValueError("empty sample")
    if method == "auto":
        if sample.coeffs is not None:
            method = "coeff"
        elif sample.n <= dual_limit:
            method = "dual"
        else:
            method = "grid"

    if method == "coeff":
        return _empirical_from_coeffs(sample)
    if method == "dual":
        return _empirical_dual(sample)
    if method == "grid":
        return _empirical_grid(sample)
    raise ValueError(f"unknown method {method!r}")


def _retain(lam: np.ndarray) -> int:
    if lam.size == 0 or lam[0] <= 0.0:
        return 0
    return int(np.sum(lam > RANK_TOL * lam[0]))


def _empirical_from_coeffs(sample) -> CovOperator:
    c = sample.coeffs           # (n, J), columns are coordinates in an ON basis
    basis = sample.basis_matrix
    n, j = c.shape
    m = (c.T @ c) / n
    vals, vecs = np.linalg.eigh(m)
    vals, vecs = _sorted_desc(vals, vecs)
    r = _retain(np.maximum(vals, 0.0))
    lam = np.maximum(vals[:r], 0.0)
    u = vecs[:, :r]             # (J, r) eigenvectors in coefficient space

    ref = u[: min(SIGN_REFERENCE_COUNT, j), :].T
    funcs = u.T @ basis
    signs = _apply_sign_convention(funcs, ref)
    u = u * signs[None, :]

    if r == n:
        # A = Q D^{-1} has columns proportional to C u_k; fix det = +1.
        q = c @ u
        a = q / np.sqrt(n * lam)[None, :]
        if _det_sign_orthogonal(a) < 0:
            funcs[-1] *= -1.0
            u[:, -1] *= -1.0

    return CovOperator(
        eigenvalues=lam,
        eigenfunctions=Basis(funcs, kind="eigen"),
        kind="empirical",
        n_samples=n,
        coeff_basis=basis,
        coeff_vectors=u,
    )


def _empirical_dual(sample) -> CovOperator:
    x = sample.values
    n, d = x.shape
    gram = pairwise_inner(x, x)
    m = gram / n
    vals, vecs = np.linalg.eigh(m)
    vals, vecs = _sorted_desc(vals, vecs)
    r = _retain(np.maximum(vals, 0.0))
    lam = np.maximum(vals[:r], 0.0)
    v = vecs[:, :r]
    funcs = (v.T @ x) / np.sqrt(n * lam)[:, None]

    ref_basis = _cached_fourier_matrix(min(SIGN_REFERENCE_COUNT, d // 2), d)
    ref = pairwise_inner(funcs, ref_basis)
    signs = _apply_sign_convention(funcs, ref)
    v = v * signs[None, :]

    if r == n and _det_sign_orthogonal(v) < 0:
        # v is exactly the orthogonal factor of the whitening transform.
        funcs[-1] *= -1.0
        v[:, -1] *= -1.0

    return CovOperator(
        eigenvalues=lam,
        eigenfunctions=Basis(funcs, kind="eigen"),
        kind="empirical",
        n_samples=n,
    )


def _empirical_grid(sample) -> CovOperator:
    x = sample.values
    n, d = x.shape
    kernel = (x.T @ x) / n
    w = trapezoid_weights(d)
    lam, funcs = _eigh_grid_kernel(kernel, w, min(n, d))
    r = _retain(lam)
    lam, funcs = lam[:r], funcs[:r]

    ref_basis = _cached_fourier_matrix(min(SIGN_REFERENCE_COUNT, d // 2), d)
    ref = pairwise_inner(funcs, ref_basis)
    _apply_sign_convention(funcs, ref)

    return CovOperator(
        eigenvalues=lam,
        eigenfunctions=Basis(funcs, kind="eigen"),
        kernel=kernel,
        kind="empirical",
        n_samples=n,
    )


def sqrt_apply(op: CovOperator, f: GridFunction) -> GridFunction:
    """Square root of the operator applied to f over the retained rank."""
    if f.grid_size != op.grid_size:
        raise DimensionError("function and operator live on different grids")
    c = op.eigen_coefficients(f)
    scaled = np.sqrt(op.eigenvalues) * c
    return GridFunction(scaled @ op.eigenfunctions.functions)


def hs_distance(a: CovOperator, b: CovOperator) -> float:
    """Hilbert-Schmidt distance of two operators on the same grid."""
    if a.grid_size != b.grid_size:
        raise DimensionError("operators live on different grids")
    ca, cb = a.coeff_matrix(), b.coeff_matrix()
    if ca is not None and cb is not None and a._coeff_basis is b._coeff_basis:
        ja, jb = ca.shape[0], cb.shape[0]
        j = max(ja, jb)
        pa = np.zeros((j, j)); pa[:ja, :ja] = ca
        pb = np.zeros((j, j)); pb[:jb, :jb] = cb
        return float(np.linalg.norm(pa - pb))
    w = trapezoid_weights(a.grid_size)
    diff = a.kernel - b.kernel
    return float(np.sqrt(np.einsum("i,ij,j->", w, diff * diff, w)))


@dataclass(frozen=True)
class GapReport:
    """Scaled spacings (lambda_j - lambda_{j+1}) * j^(alpha+1) over the spectrum."""

    scaled_gaps: np.ndarray
    min_scaled_gap: float
    argmin: int               # 1-based index of the worst spacing
    threshold: float | None
    flagged: bool


def eigen_gap_check(op: CovOperator, alpha: float, *, threshold: float | None = None) -> GapReport:
    """Diagnose the polynomial eigenvalue-spacing condition; never raises."""
    lam = op.eigenvalues[: op.rank]
    if lam.size < 2:
        gaps = np.array([])
        return GapReport(gaps, float("nan"), 0, threshold, flagged=lam.size < 2)
    ks = np.arange(1, lam.size, dtype=float)
    gaps = (lam[:-1] - lam[1:]) * ks ** (alpha + 1.0)
    worst = int(np.argmin(gaps))
    min_gap = float(gaps[worst])
    flagged = min_gap <= 0.0 or (threshold is not None and min_gap < threshold)
    return GapReport(gaps, min_gap, worst + 1, threshold, flagged)
