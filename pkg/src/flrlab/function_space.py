"""Grid-based L2([0,1]) arithmetic: inner products, norms, bases, projections.

Functions are sampled on a uniform grid of D nodes including both endpoints.
All integrals use the composite trapezoid rule, which is exact for
piecewise-linear data and, on this periodic-friendly grid, exact to machine
precision for products of Fourier modes below the Nyquist frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, ResolutionError

DEFAULT_GRID_SIZE = 1024


@lru_cache(maxsize=32)
def grid_nodes(grid_size: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, grid_size)
    t.flags.writeable = False
    return t


@lru_cache(maxsize=32)
def trapezoid_weights(grid_size: int) -> np.ndarray:
    """Composite trapezoid quadrature weights on the uniform grid."""
    if grid_size < 2:
        raise ResolutionError("grid needs at least 2 nodes")
    h = 1.0 / (grid_size - 1)
    w = np.full(grid_size, h)
    w[0] = w[-1] = h / 2.0
    w.flags.writeable = False
    return w


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(np.asarray(a, dtype=float))
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GridFunction:
    """A real function on [0,1] sampled at D equispaced nodes."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ResolutionError("a grid function needs a 1-d array of at least 2 values")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def grid_size(self) -> int:
        return self.values.size

    @property
    def t(self) -> np.ndarray:
        return grid_nodes(self.grid_size)

    def _check_same_grid(self, other: "GridFunction") -> None:
        if self.grid_size != other.grid_size:
            raise DimensionError(
                f"grid sizes differ: {self.grid_size} vs {other.grid_size}"
            )

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_same_grid(other)
        return GridFunction(self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_same_grid(other)
        return GridFunction(self.values - other.values)

    def __mul__(self, scalar: float) -> "GridFunction":
        return GridFunction(self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(-self.values)


def constant_function(value: float, grid_size: int = DEFAULT_GRID_SIZE) -> GridFunction:
    return GridFunction(np.full(grid_size, float(value)))


def from_callable(fn, grid_size: int = DEFAULT_GRID_SIZE) -> GridFunction:
    return GridFunction(np.asarray(fn(grid_nodes(grid_size)), dtype=float))


def inner_product(f: GridFunction, g: GridFunction) -> float:
    """Trapezoid approximation of the L2([0,1]) inner product of f and g."""
    f._check_same_grid(g)
    w = trapezoid_weights(f.grid_size)
    return float(np.dot(w * f.values, g.values))


def norm(f: GridFunction, p: float = 2.0) -> float:
    """L_p([0,1]) norm for p in {1, 2, inf}."""
    w = trapezoid_weights(f.grid_size)
    if p == 2:
        return float(math.sqrt(max(np.dot(w * f.values, f.values), 0.0)))
    if p == 1:
        return float(np.dot(w, np.abs(f.values)))
    if math.isinf(p):
        return float(np.max(np.abs(f.values)))
    raise ValueError(f"unsupported norm order p={p}; use 1, 2 or inf")


def pairwise_inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of inner products between rows of a and rows of b (same grid)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise DimensionError(f"grid sizes differ: {a.shape[1]} vs {b.shape[1]}")
    w = trapezoid_weights(a.shape[1])
    return (a * w) @ b.T


@dataclass(frozen=True)
class Basis:
    """A finite family of grid functions, one per row of ``functions``."""

    functions: np.ndarray  # shape (J, D)
    kind: str = "custom"   # fourier | eigen | custom

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.functions, dtype=float))
        if m.shape[0] < 1 or m.shape[1] < 2:
            raise ResolutionError("basis needs at least one function on >= 2 nodes")
        object.__setattr__(self, "functions", _freeze(m))
        if self.kind not in ("fourier", "eigen", "custom"):
            raise ValueError(f"unknown basis kind {self.kind!r}")

    @property
    def count(self) -> int:
        return self.functions.shape[0]

    @property
    def grid_size(self) -> int:
        return self.functions.shape[1]

    def function(self, k: int) -> GridFunction:
        """k is zero-based."""
        return GridFunction(self.functions[k])

    def __iter__(self):
        return (GridFunction(row) for row in self.functions)

    def gram(self) -> np.ndarray:
        return pairwise_inner(self.functions, self.functions)

    def max_gram_defect(self) -> float:
        return float(np.max(np.abs(self.gram() - np.eye(self.count))))


def fourier_basis(count: int, grid_size: int = DEFAULT_GRID_SIZE) -> Basis:
    """First ``count`` functions of {1, sqrt2 cos(2 pi t), sqrt2 sin(2 pi t), ...}.

    Requires grid_size >= 2 * count so every retained frequency stays safely
    below the Nyquist limit of the grid.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if grid_size < 2 * count:
        raise ResolutionError(
            f"grid of {grid_size} nodes cannot resolve {count} Fourier functions"
        )
    t = grid_nodes(grid_size)
    rows = np.empty((count, grid_size))
    rows[0] = 1.0
    root2 = math.sqrt(2.0)
    for j in range(1, count):
        m = (j + 1) // 2
        if j % 2 == 1:
            rows[j] = root2 * np.cos(2.0 * math.pi * m * t)
        else:
            rows[j] = root2 * np.sin(2.0 * math.pi * m * t)
    return Basis(rows, kind="fourier")


@lru_cache(maxsize=8)
def _cached_fourier_matrix(count: int, grid_size: int) -> np.ndarray:
    return fourier_basis(count, grid_size).functions


def project(f: GridFunction, basis: Basis, count: int | None = None) -> np.ndarray:
    """Coefficients (<f, phi_1>, ..., <f, phi_J>) of f against the basis."""
    j = basis.count if count is None else int(count)
    if j < 1 or j > basis.count:
        raise ValueError(f"cannot project on {j} functions of a basis with {basis.count}")
    if f.grid_size != basis.grid_size:
        raise DimensionError("function and basis live on different grids")
    w = trapezoid_weights(f.grid_size)
    return (basis.functions[:j] * w) @ f.values


def synthesize(basis: Basis, coefficients: np.ndarray) -> GridFunction:
    """Linear combination sum_k c_k phi_k as a grid function."""
    c = np.asarray(coefficients, dtype=float)
    if c.ndim != 1 or c.size > basis.count:
        raise ValueError("coefficient vector longer than the basis")
    return GridFunction(c @ basis.functions[: c.size])
