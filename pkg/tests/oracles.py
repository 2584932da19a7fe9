"""Independent reference computations used to freeze expected test values.

Everything here deliberately avoids the package's own solution paths: the
minimax oracle runs a constrained optimizer over prior profiles, and the
kernel eigen-solver diagonalizes the quadrature-symmetrized kernel directly.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize


def brute_force_linear_minimax(lambdas, beta, c_theta, sigma, n, restarts=8, seed=0):
    """Exact linear minimax risk on K coordinates over the smoothness ellipsoid.

    Maximizes the Bayes risk sum s_k tau_k^2 / (tau_k^2 + s_k) over prior
    variance profiles tau^2 on the ellipsoid boundary (the inner weight
    minimization is closed-form), using SLSQP with random restarts.
    """
    lam = np.asarray(lambdas, dtype=float)
    k = np.arange(1, lam.size + 1, dtype=float)
    b2 = 1.0 + k ** (2.0 * beta)
    s = sigma**2 / (n * lam)

    def neg_value(u):
        tau2 = c_theta * u / b2
        return -float(np.sum(s * tau2 / (tau2 + s)))

    rng = np.random.default_rng(seed)
    cons = ({"type": "eq", "fun": lambda u: np.sum(u) - 1.0},)
    bounds = [(0.0, 1.0)] * lam.size
    starts = [np.full(lam.size, 1.0 / lam.size)]
    starts += [rng.dirichlet(np.ones(lam.size)) for _ in range(restarts - 1)]
    best = -np.inf
    for u0 in starts:
        res = minimize(neg_value, u0, method="SLSQP", bounds=bounds, constraints=cons,
                       options={"maxiter": 500, "ftol": 1e-14})
        if res.success:
            best = max(best, -res.fun)
    return best


def eigh_quadrature_kernel(kernel: np.ndarray, weights: np.ndarray, count: int):
    """Leading eigenpairs of a symmetric kernel under the quadrature metric."""
    sw = np.sqrt(weights)
    sym = sw[:, None] * kernel * sw[None, :]
    vals, vecs = np.linalg.eigh(0.5 * (sym + sym.T))
    order = np.argsort(vals)[::-1][:count]
    return vals[order], (vecs[:, order] / sw[:, None]).T


def ols_slope(x, y):
    """Plain least-squares slope, independent of the package regression code."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    return float(np.dot(xc, y) / np.dot(xc, xc))
