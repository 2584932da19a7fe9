"""Random design generators with known ground-truth covariance operators.

Two families are provided:

* basis-expansion designs X = sum_j j^(-alpha/2) G_j phi_j over a Fourier
  basis, with i.i.d. bounded coefficients G_j of unit variance, so the
  covariance eigenpairs are exactly (j^-alpha, phi_j);
* integrated Gaussian designs X(t) = int_0^t sigma_X(s) dW(s), discretized by
  left-point Ito cumulative sums, whose covariance kernel is
  int_0^min(s,t) sigma_X^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import SpecValidationError
from .function_space import (
    DEFAULT_GRID_SIZE,
    Basis,
    GridFunction,
    _cached_fourier_matrix,
    grid_nodes,
    pairwise_inner,
    trapezoid_weights,
)
from .streams import as_generator

DEFAULT_MAX_EXPANSION = 128

KIND_BASIS = "basis-expansion"
KIND_GAUSSIAN = "integrated-gaussian"


@dataclass(frozen=True)
class CoefficientLaw:
    """A centered, unit-variance law with compact support for the G_j."""

    name: str
    variance: float
    support_radius: float
    sampler: Callable[[np.random.Generator, tuple], np.ndarray]

    def validate(self) -> None:
        if not math.isfinite(self.support_radius) or self.support_radius <= 0:
            raise SpecValidationError("coefficient law must have compact support")
        if abs(self.variance - 1.0) > 1e-9:
            raise SpecValidationError(
                f"coefficient law must have unit variance, got {self.variance}"
            )


def uniform_coefficient_law() -> CoefficientLaw:
    """Uniform on [-sqrt3, sqrt3]: mean 0, variance 1, compact support."""
    r = math.sqrt(3.0)
    return CoefficientLaw(
        name="uniform",
        variance=1.0,
        support_radius=r,
        sampler=lambda rng, shape: rng.uniform(-r, r, size=shape),
    )


@dataclass(frozen=True)
class DesignSpec:
    """Configuration of a design distribution satisfying the tail and decay conditions."""

    kind: str = KIND_BASIS
    alpha: float = 2.0
    j_truncation: int | None = None          # basis-expansion; None = min(2n, 128)
    coefficient_law: CoefficientLaw = field(default_factory=uniform_coefficient_law)
    sigma_x: GridFunction | None = None      # integrated-gaussian diffusion
    grid_size: int = DEFAULT_GRID_SIZE

    def __post_init__(self):
        if self.kind not in (KIND_BASIS, KIND_GAUSSIAN):
            raise SpecValidationError(f"unknown design kind {self.kind!r}")
        if self.alpha < 2.0:
            raise SpecValidationError(f"eigenvalue decay exponent must be >= 2, got {self.alpha}")
        if self.kind == KIND_BASIS:
            self.coefficient_law.validate()
            if self.j_truncation is not None and self.j_truncation < 1:
                raise SpecValidationError("j_truncation must be >= 1")
        else:
            if abs(self.alpha - 2.0) > 1e-12:
                raise SpecValidationError("integrated-gaussian designs have decay exponent 2")
            sig = self.sigma_x if self.sigma_x is not None else None
            if sig is not None:
                if sig.grid_size != self.grid_size:
                    raise SpecValidationError("sigma_x must live on the spec grid")
                if np.any(sig.values <= 0.0):
                    raise SpecValidationError("sigma_x must be strictly positive")

    def resolved_truncation(self, n: int) -> int:
        """Expansion length: beyond rank n the extra modes are invisible to the
        empirical covariance, so min(2n, 128) is used unless set explicitly."""
        if self.j_truncation is not None:
            return self.j_truncation
        return min(2 * n, DEFAULT_MAX_EXPANSION)

    def sigma_x_values(self) -> np.ndarray:
        if self.sigma_x is None:
            return np.ones(self.grid_size)
        return self.sigma_x.values


class DesignSample:
    """n i.i.d. design functions on one shared grid.

    Basis-expansion samples keep their generating coefficient matrix; the
    grid values are materialized lazily, which keeps large Monte Carlo
    studies in coefficient space.
    """

    def __init__(
        self,
        *,
        n: int,
        grid_size: int,
        spec: DesignSpec,
        seed: int | None,
        values: np.ndarray | None = None,
        coeffs: np.ndarray | None = None,
        basis_matrix: np.ndarray | None = None,
    ):
        if values is None and coeffs is None:
            raise ValueError("need grid values or a coefficient representation")
        self.n = int(n)
        self.grid_size = int(grid_size)
        self.spec = spec
        self.seed = seed
        self._values = values
        self._coeffs = coeffs
        self._basis_matrix = basis_matrix

    @property
    def values(self) -> np.ndarray:
        """(n, D) matrix, one row per design function."""
        if self._values is None:
            self._values = self._coeffs @ self._basis_matrix
        return self._values

    @property
    def coeffs(self) -> np.ndarray | None:
        return self._coeffs

    @property
    def basis_matrix(self) -> np.ndarray | None:
        return self._basis_matrix

    def function(self, i: int) -> GridFunction:
        return GridFunction(self.values[i])

    def functions(self) -> list[GridFunction]:
        return [GridFunction(row) for row in self.values]

    def subset(self, indices) -> "DesignSample":
        idx = np.asarray(indices)
        return DesignSample(
            n=idx.size,
            grid_size=self.grid_size,
            spec=self.spec,
            seed=None,
            values=None if self._values is None else self._values[idx],
            coeffs=None if self._coeffs is None else self._coeffs[idx],
            basis_matrix=self._basis_matrix,
        )

    def mean_function(self) -> GridFunction:
        return GridFunction(self.values.mean(axis=0))


def sample_basis_design(spec: DesignSpec, n: int, seed) -> DesignSample:
    """Draw n basis-expansion designs; deterministic given the seed."""
    if spec.kind != KIND_BASIS:
        raise SpecValidationError("spec is not a basis-expansion design")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = as_generator(seed)
    j = spec.resolved_truncation(n)
    basis = _cached_fourier_matrix(j, spec.grid_size)
    g = spec.coefficient_law.sampler(rng, (n, j))
    scales = np.arange(1, j + 1, dtype=float) ** (-spec.alpha / 2.0)
    coeffs = g * scales
    return DesignSample(
        n=n,
        grid_size=spec.grid_size,
        spec=spec,
        seed=seed if isinstance(seed, (int, np.integer)) else None,
        coeffs=coeffs,
        basis_matrix=basis,
    )


def sample_gaussian_design(spec: DesignSpec, n: int, seed) -> DesignSample:
    """Draw n integrated Gaussian designs by left-point Ito discretization."""
    if spec.kind != KIND_GAUSSIAN:
        raise SpecValidationError("spec is not an integrated-gaussian design")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = as_generator(seed)
    d = spec.grid_size
    sig = spec.sigma_x_values()
    dt = 1.0 / (d - 1)
    dw = rng.standard_normal((n, d - 1)) * math.sqrt(dt)
    increments = dw * sig[:-1]
    values = np.zeros((n, d))
    np.cumsum(increments, axis=1, out=values[:, 1:])
    return DesignSample(
        n=n,
        grid_size=d,
        spec=spec,
        seed=seed if isinstance(seed, (int, np.integer)) else None,
        values=values,
    )


def sample_design(spec: DesignSpec, n: int, seed) -> DesignSample:
    if spec.kind == KIND_BASIS:
        return sample_basis_design(spec, n, seed)
    return sample_gaussian_design(spec, n, seed)


def true_covariance(spec: DesignSpec, count: int):
    """Ground-truth covariance operator with its leading ``count`` eigenpairs."""
    from .covariance import CovOperator  # local import to avoid a cycle

    if count < 1:
        raise ValueError("count must be >= 1")
    d = spec.grid_size
    if spec.kind == KIND_BASIS:
        j = spec.j_truncation if spec.j_truncation is not None else DEFAULT_MAX_EXPANSION
        if count > j:
            raise SpecValidationError(
                f"requested {count} eigenpairs but the expansion has {j} terms"
            )
        basis = _cached_fourier_matrix(j, d)
        lam = np.arange(1, count + 1, dtype=float) ** (-spec.alpha)
        coeff_vectors = np.eye(j)[:, :count]
        return CovOperator(
            eigenvalues=lam,
            eigenfunctions=Basis(basis[:count], kind="eigen"),
            kind="analytic-basis",
            coeff_basis=basis,
            coeff_vectors=coeff_vectors,
        )
    sig = spec.sigma_x_values()
    t = grid_nodes(d)
    if np.max(np.abs(sig - 1.0)) < 1e-12:
        # Brownian motion: kernel min(s,t), analytic eigenpairs.
        ks = np.arange(1, count + 1, dtype=float)
        lam = 1.0 / (math.pi**2 * (ks - 0.5) ** 2)
        funcs = math.sqrt(2.0) * np.sin(np.outer((ks - 0.5) * math.pi, t))
        kernel = np.minimum.outer(t, t)
        return CovOperator(
            eigenvalues=lam,
            eigenfunctions=Basis(funcs, kind="eigen"),
            kernel=kernel,
            kind="analytic-brownian",
        )
    # General diffusion: kernel int_0^min(s,t) sigma^2, eigen-solved on the grid.
    w = trapezoid_weights(d)
    cum = np.concatenate([[0.0], np.cumsum(sig[:-1] ** 2) / (d - 1)])
    kernel = np.minimum.outer(cum, cum)
    from .covariance import _eigh_grid_kernel

    lam, funcs = _eigh_grid_kernel(kernel, w, count)
    return CovOperator(
        eigenvalues=lam,
        eigenfunctions=Basis(funcs, kind="eigen"),
        kernel=kernel,
        kind="numeric-diffusion",
    )


@dataclass(frozen=True)
class ConditionXReport:
    """Diagnostics for the tail, centering and full-rank requirements."""

    n: int
    tail_x: np.ndarray
    tail_frequency: np.ndarray
    mean_norm: float
    mean_norm_scale: float     # estimated E||X|| / sqrt(n)
    gram_rank: int
    full_rank: bool
    truncation_limited: bool
    notes: str


def verify_condition_x(spec: DesignSpec, sample: DesignSample) -> ConditionXReport:
    """Report empirical tail frequencies, centering, and the Gram-matrix rank.

    Purely diagnostic: a finite truncation J < n necessarily caps the rank at
    J, which is flagged rather than raised.
    """
    if sample.n < 100:
        raise ValueError("diagnostics need n >= 100")
    w = trapezoid_weights(sample.grid_size)
    sq_norms = np.einsum("ij,j,ij->i", sample.values, w, sample.values)
    norms = np.sqrt(np.maximum(sq_norms, 0.0))
    xs = np.linspace(0.0, float(np.max(norms)) * 1.05 + 1e-12, 20)
    freq = np.array([np.mean(norms >= x) for x in xs])

    mean_vals = sample.values.mean(axis=0)
    mean_norm = float(np.sqrt(max(np.dot(w * mean_vals, mean_vals), 0.0)))
    scale = float(np.mean(norms)) / math.sqrt(sample.n)

    gram = pairwise_inner(sample.values, sample.values)
    eig = np.linalg.eigvalsh(gram)
    rank = int(np.sum(eig > 1e-10 * max(eig[-1], 0.0)))

    truncated = False
    notes = []
    if spec.kind == KIND_BASIS:
        j = sample.coeffs.shape[1] if sample.coeffs is not None else spec.resolved_truncation(sample.n)
        if j < sample.n:
            truncated = True
            notes.append(
                f"expansion truncated at J={j} < n={sample.n}: rank is capped at J by construction"
            )
    full = rank == sample.n
    if not full and not truncated:
        notes.append("sample Gram matrix is numerically rank deficient")
    return ConditionXReport(
        n=sample.n,
        tail_x=xs,
        tail_frequency=freq,
        mean_norm=mean_norm,
        mean_norm_scale=scale,
        gram_rank=rank,
        full_rank=full,
        truncation_limited=truncated,
        notes="; ".join(notes),
    )
