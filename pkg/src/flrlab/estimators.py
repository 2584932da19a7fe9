"""Spectral-cutoff and Pinsker estimators for the inverse regression problem.

The target class is the ellipsoid sum_k (1 + k^(2 beta)) theta_k^2 <= C. The
Pinsker machinery consists of the oracle shrinkage level gamma_n (unique zero
of a piecewise-linear balance equation), the weights w_k = (1 - gamma b_k)_+
with b_k = (1 + k^(2 beta))^(1/2), the sharp risk constant a_n, a regression
plug-in estimator that never touches the true operator, and a data-driven
selector of gamma based on a training split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .covariance import CovOperator, empirical_covariance
from .equivalence import WnCoefficients
from .errors import SpecValidationError
from .function_space import GridFunction, pairwise_inner
from .streams import as_generator
from .whitenoise import SeqObservation

DEFAULT_COEFF_BUDGET = 64   # declared truncation length for coefficient sequences


@dataclass(frozen=True)
class ThetaClass:
    """Ellipsoid of target functions: sum (1 + k^(2 beta)) theta_k^2 <= c_theta."""

    beta: float
    c_theta: float

    def __post_init__(self):
        if self.beta <= 0.5:
            raise SpecValidationError("smoothness exponent must exceed 1/2")
        if self.c_theta <= 0:
            raise SpecValidationError("ellipsoid radius must be positive")

    def beta_k(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return np.sqrt(1.0 + k ** (2.0 * self.beta))

    def ellipsoid_sum(self, theta_coeffs) -> float:
        c = np.asarray(theta_coeffs, dtype=float)
        k = np.arange(1, c.size + 1, dtype=float)
        return float(np.sum((1.0 + k ** (2.0 * self.beta)) * c * c))

    def check_against_alpha(self, alpha: float, *, plug_in: bool = False) -> None:
        """Approximability vs ill-posedness: beta > (alpha+1)/2 always, and
        beta > alpha + 3/2 when the plug-in (unknown-design) route is used."""
        if self.beta <= (alpha + 1.0) / 2.0:
            raise SpecValidationError(
                f"need beta > (alpha+1)/2 = {(alpha + 1) / 2}, got beta={self.beta}"
            )
        if plug_in and self.beta <= alpha + 1.5:
            raise SpecValidationError(
                f"plug-in mode needs beta > alpha + 3/2 = {alpha + 1.5}, got beta={self.beta}"
            )


@dataclass(frozen=True)
class PinskerPlan:
    """Everything the shrinkage estimator needs for one fit."""

    gamma: float
    weights: np.ndarray
    sharp_risk: float
    rho: float
    split_m: int | None = None


def default_rho(alpha: float) -> float:
    """Midpoint of the admissible truncation-exponent interval."""
    lo = alpha / (2.0 * alpha + 3.0)
    return 0.5 * (lo + 0.5)


def validate_rho(rho: float, alpha: float | None = None) -> None:
    if not 0.0 < rho < 0.5:
        raise ValueError(f"rho must lie in (0, 1/2), got {rho}")
    if alpha is not None and rho <= alpha / (2.0 * alpha + 3.0):
        raise ValueError(
            f"rho must exceed alpha/(2 alpha + 3) = {alpha / (2 * alpha + 3):.4f}, got {rho}"
        )


def select_cutoff(m: int, alpha: float, beta: float, *, constant: float = 1.0) -> int:
    """Frequency cutoff ceil(c m^(1/(2 beta + alpha + 1))), at least 1; c defaults to 1."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return max(1, math.ceil(constant * m ** (1.0 / (2.0 * beta + alpha + 1.0))))


def cutoff_estimator(
    obs,
    cov: CovOperator | None,
    cutoff: int,
    m: int | None = None,
    *,
    emp_cov: CovOperator | None = None,
) -> np.ndarray:
    """Projection estimator on the first ``cutoff`` coordinates of the true eigenbasis.

    For a SeqObservation the coefficients are read off directly as
    y_k / sqrt(lambda_k). For white-noise coefficients in the empirical
    eigenbasis, the estimator rotates them through the overlap matrix
    <phi-hat_j, phi_k> and normalizes by the true eigenvalues, so ``cov``
    (true operator) and ``emp_cov`` are both required.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")

    if isinstance(obs, SeqObservation):
        if cutoff > obs.count:
            raise ValueError(f"cutoff {cutoff} exceeds the {obs.count} observed frequencies")
        lam = obs.lambdas[:cutoff]
        return obs.y[:cutoff] / np.sqrt(lam)

    if isinstance(obs, WnCoefficients):
        if cov is None or emp_cov is None:
            raise ValueError("coefficient observations need the true and empirical operators")
        if m is None:
            m = obs.n
        if cutoff > cov.eigenvalues.size:
            raise ValueError("cutoff exceeds the available true spectrum")
        lam = cov.eigenvalues[:cutoff]
        if np.any(lam <= 0.0):
            raise ValueError("true eigenvalues must be positive up to the cutoff")
        r = emp_cov.rank
        overlap = _eigen_overlap(emp_cov, cov, r, cutoff)   # (r, cutoff)
        weighted = np.sqrt(emp_cov.eigenvalues[:r])[:, None] * overlap
        raw = obs.z[:r] @ weighted
        return raw / (math.sqrt(m) * lam)

    raise TypeError(f"unsupported observation type {type(obs).__name__}")


def _eigen_overlap(emp_cov: CovOperator, cov: CovOperator, r: int, k: int) -> np.ndarray:
    """<phi-hat_j, phi_k> matrix; coefficient fast path when both operators share a basis."""
    u = emp_cov._coeff_vectors
    v = cov._coeff_vectors
    if u is not None and v is not None and emp_cov._coeff_basis is cov._coeff_basis:
        return u[:, :r].T @ v[:, :k]
    return pairwise_inner(emp_cov.eigenfunctions.functions[:r], cov.eigenfunctions.functions[:k])


def pinsker_weights(
    gamma: float,
    theta_class: ThetaClass,
    count: int,
    *,
    support_cap: int | None = None,
) -> np.ndarray:
    """w_k = (1 - gamma b_k)_+ for k = 1..count, optionally zeroed beyond a cap."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    k = np.arange(1, count + 1, dtype=float)
    w = np.clip(1.0 - gamma * theta_class.beta_k(k), 0.0, None)
    if support_cap is not None:
        w[int(support_cap):] = 0.0
    return w


LambdaLike = Callable[[np.ndarray], np.ndarray] | Sequence[float] | np.ndarray


def _as_lambda_fn(lambdas: LambdaLike):
    """Normalize eigenvalue input: callable k -> lambda_k, or a finite vector.

    A vector means the problem is truncated at its length; a callable means
    the full sequence is available on demand.
    """
    if callable(lambdas):
        return lambdas, None
    arr = np.asarray(lambdas, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("lambdas must be a 1-d sequence or a callable")
    if np.any(arr <= 0.0):
        raise ValueError("eigenvalues must be positive")

    def fn(ks: np.ndarray) -> np.ndarray:
        return arr[np.minimum(ks.astype(int), arr.size) - 1]

    return fn, arr.size


def power_lambda_profile(alpha: float) -> Callable[[np.ndarray], np.ndarray]:
    """The polynomially decaying spectrum k^(-alpha) as a callable profile."""
    return lambda ks: np.asarray(ks, dtype=float) ** (-alpha)


def _active_count(x: float, beta: float, k_cap: int | None) -> int:
    """Largest k with (1 + k^(2 beta))^(1/2) < 1/x; 0 when none."""
    if x <= 0.0:
        raise ValueError("x must be positive")
    inv2 = 1.0 / (x * x) - 1.0
    if inv2 <= 1.0:
        return 0
    k = int(math.floor(inv2 ** (1.0 / (2.0 * beta))))
    while (1.0 + (k + 1) ** (2.0 * beta)) < 1.0 / (x * x):
        k += 1
    while k >= 1 and (1.0 + k ** (2.0 * beta)) >= 1.0 / (x * x):
        k -= 1
    if k_cap is not None:
        k = min(k, k_cap)
    return k


def pinsker_gamma_oracle(
    lambdas: LambdaLike,
    theta_class: ThetaClass,
    sigma: float,
    n: int,
    tol: float = 1e-10,
) -> float:
    """Unique zero of Phi_1(x) - Phi_2(x).

    Phi_1(x) = sum lambda_k^-1 b_k (1 - x b_k)_+ is non-increasing with finitely
    many active terms for x > 0; Phi_2(x) = c_theta x n / sigma^2 is strictly
    increasing. Bisection brackets the root, then the zero is solved in closed
    form on the bracketed linear piece.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if sigma <= 0 or n < 1:
        raise ValueError("need sigma > 0 and n >= 1")
    lam_fn, k_cap = _as_lambda_fn(lambdas)
    beta = theta_class.beta
    slope2 = theta_class.c_theta * n / sigma**2

    def phi(x: float) -> float:
        kk = _active_count(x, beta, k_cap)
        if kk == 0:
            return -slope2 * x
        ks = np.arange(1, kk + 1, dtype=float)
        b = theta_class.beta_k(ks)
        lam = lam_fn(ks)
        return float(np.sum(b * (1.0 - x * b) / lam)) - slope2 * x

    lo, hi = 0.0, 1.0 / theta_class.beta_k(1)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if phi(mid) > 0.0:
            lo = mid
        else:
            hi = mid

    # Closed form on the active set of the bracket midpoint.
    mid = 0.5 * (lo + hi)
    kk = _active_count(mid, beta, k_cap)
    if kk >= 1:
        ks = np.arange(1, kk + 1, dtype=float)
        b = theta_class.beta_k(ks)
        lam = lam_fn(ks)
        num = float(np.sum(b / lam))
        den = float(np.sum(b * b / lam)) + slope2
        candidate = num / den
        if lo <= candidate <= hi and _active_count(candidate, beta, k_cap) == kk:
            mid = candidate
    if abs(phi(mid)) > tol:
        raise ArithmeticError(
            f"gamma solver left a residual {phi(mid):.3e} above tol {tol:.3e}"
        )
    return mid


def sharp_risk_constant(
    lambdas: LambdaLike,
    theta_class: ThetaClass,
    sigma: float,
    n: int,
    *,
    gamma: float | None = None,
) -> float:
    """a_n = (sigma^2/n) sum lambda_k^-1 (1 - gamma b_k)_+ at the oracle gamma."""
    if gamma is None:
        gamma = pinsker_gamma_oracle(lambdas, theta_class, sigma, n)
    if gamma >= 1.0 / theta_class.beta_k(1):
        return 0.0
    lam_fn, k_cap = _as_lambda_fn(lambdas)
    kk = _active_count(gamma, theta_class.beta, k_cap)
    if kk == 0:
        return 0.0
    ks = np.arange(1, kk + 1, dtype=float)
    b = theta_class.beta_k(ks)
    lam = lam_fn(ks)
    return float(sigma**2 / n * np.sum((1.0 - gamma * b) / lam))


def pinsker_sequence_estimator(obs: SeqObservation, weights: np.ndarray) -> np.ndarray:
    """Shrunk coefficients w_k y_k / sqrt(lambda_k) in the sequence model."""
    w = np.asarray(weights, dtype=float)
    k = min(w.size, obs.count)
    out = np.zeros(obs.count)
    out[:k] = w[:k] * obs.y[:k] / np.sqrt(obs.lambdas[:k])
    return out


@dataclass(frozen=True)
class PinskerFit:
    """Plug-in shrinkage fit: the estimate plus its empirical-basis pieces."""

    estimate: GridFunction
    coefficients: np.ndarray        # shrunk coefficients in the empirical eigenbasis
    weights: np.ndarray
    floored: np.ndarray             # where the eigenvalue floor n^-rho was active
    support_cap: int | None
    cap_binding: bool


def flr_pinsker_fit(
    sample,
    responses: np.ndarray,
    weights: np.ndarray,
    rho: float,
    *,
    alpha: float | None = None,
    cov: CovOperator | None = None,
    enforce_support_cap: bool = True,
) -> PinskerFit:
    """Weighted spectral estimator from regression data only.

    theta-hat = sum_j w_j [(1/n) sum_l Y_l <X_l, phi-hat_j>] phi-hat_j / lam_j,rho
    with lam_j,rho = max(lam-hat_j, n^-rho). The high-frequency support cap
    k <= n^(rho/alpha)/log n is enforced only down to the weight support it
    would otherwise truncate; when the raw cap binds this is flagged, since at
    moderate n it would zero out every weight.
    """
    validate_rho(rho, alpha)
    y = np.asarray(responses, dtype=float)
    if y.shape != (sample.n,):
        raise ValueError(f"expected {sample.n} responses, got {y.shape}")
    if cov is None:
        cov = empirical_covariance(sample)
    n = sample.n
    w = np.asarray(weights, dtype=float)

    support = int(np.max(np.nonzero(w > 0.0)[0]) + 1) if np.any(w > 0.0) else 0
    cap = None
    binding = False
    if enforce_support_cap and alpha is not None:
        raw_cap = int(math.floor(n ** (rho / alpha) / math.log(n))) if n > 1 else 0
        binding = raw_cap < support
        cap = max(raw_cap, support)

    r = cov.rank
    k = min(w.size, r)
    lam = cov.eigenvalues[:k]
    lam_floor = np.maximum(lam, float(n) ** (-rho))
    if sample.coeffs is not None and cov._coeff_vectors is not None:
        proj = (sample.coeffs @ cov._coeff_vectors[:, :k]).T @ y / n
    else:
        q = pairwise_inner(sample.values, cov.eigenfunctions.functions[:k])
        proj = q.T @ y / n
    wk = w[:k].copy()
    if cap is not None:
        wk[cap:] = 0.0
    coeffs = wk * proj / lam_floor
    estimate = GridFunction(coeffs @ cov.eigenfunctions.functions[:k])
    return PinskerFit(
        estimate=estimate,
        coefficients=coeffs,
        weights=wk,
        floored=lam < float(n) ** (-rho),
        support_cap=cap,
        cap_binding=binding,
    )


def flr_pinsker_estimator(sample, responses, weights, rho: float, **kwargs) -> GridFunction:
    """Convenience wrapper returning only the fitted grid function."""
    return flr_pinsker_fit(sample, responses, weights, rho, **kwargs).estimate


@dataclass(frozen=True)
class GammaSelection:
    """Data-driven shrinkage level with its truncation bracket."""

    gamma_hat: float
    gamma_tilde: float
    bound_low_exponent: float      # gamma in med{n^-beta/(3 beta+1), ., n^-beta/(2 beta+1)}
    bound_high_exponent: float
    split_m: int
    eigen_floor: float


def data_driven_gamma(
    sample,
    responses: np.ndarray,
    theta_class: ThetaClass,
    sigma: float,
    rho: float,
    tol: float = 1e-10,
    *,
    alpha: float | None = None,
) -> GammaSelection:
    """Split-sample selector of the shrinkage level.

    The estimation half keeps the first m = ceil(n (1 - 1/log n)) pairs; the
    training remainder yields empirical eigenvalues, floored at n^-rho, whose
    balance equation is solved for gamma-tilde. The final selector is the
    median of gamma-tilde and the two deterministic guard rails.
    """
    validate_rho(rho, alpha)
    n = sample.n
    if n < 8:
        raise ValueError("need n >= 8 so both split halves are nonempty")
    m = math.ceil(n * (1.0 - 1.0 / math.log(n)))
    m = min(max(m, 1), n - 1)
    train = sample.subset(np.arange(m, n))
    train_cov = empirical_covariance(train)

    floor = float(n) ** (-rho)
    lam_hat = train_cov.eigenvalues[: train_cov.rank]

    def floored(ks: np.ndarray) -> np.ndarray:
        ks = ks.astype(int)
        out = np.full(ks.shape, floor)
        inside = ks <= lam_hat.size
        out[inside] = np.maximum(lam_hat[ks[inside] - 1], floor)
        return out

    gamma_tilde = pinsker_gamma_oracle(floored, theta_class, sigma, n, tol)
    b = theta_class.beta
    rail_a = float(n) ** (-b / (3.0 * b + 1.0))
    rail_b = float(n) ** (-b / (2.0 * b + 1.0))
    gamma_hat = float(np.median([rail_a, gamma_tilde, rail_b]))
    return GammaSelection(
        gamma_hat=gamma_hat,
        gamma_tilde=gamma_tilde,
        bound_low_exponent=-b / (3.0 * b + 1.0),
        bound_high_exponent=-b / (2.0 * b + 1.0),
        split_m=m,
        eigen_floor=floor,
    )


def sample_theta(
    theta_class: ThetaClass,
    mode: str,
    lambdas: LambdaLike,
    sigma: float,
    n: int,
    seed=0,
    *,
    count: int = DEFAULT_COEFF_BUDGET,
    vertex_index: int | None = None,
) -> np.ndarray:
    """Test functions from the ellipsoid, as coefficient vectors of length ``count``.

    boundary: theta_k proportional to k^(-beta-1/2) / log(k+1), scaled onto the
    boundary. random: a random direction drawn inside the ellipsoid. vertex: all
    mass on one coordinate, on the boundary. least-favorable: the Pinsker prior
    variance profile at the oracle gamma, which saturates the constraint.
    """
    ks = np.arange(1, count + 1, dtype=float)
    b2 = 1.0 + ks ** (2.0 * theta_class.beta)
    if mode == "boundary":
        raw = ks ** (-theta_class.beta - 0.5) / np.log(ks + 1.0)
        scale = math.sqrt(theta_class.c_theta / float(np.sum(b2 * raw * raw)))
        return scale * raw
    if mode == "random":
        rng = as_generator(seed)
        direction = rng.standard_normal(count) / np.sqrt(b2)
        radius = math.sqrt(rng.uniform(0.0, 1.0))
        scale = radius * math.sqrt(theta_class.c_theta / float(np.sum(b2 * direction**2)))
        return scale * direction
    if mode == "vertex":
        k = 1 if vertex_index is None else int(vertex_index)
        if not 1 <= k <= count:
            raise ValueError(f"vertex index must lie in 1..{count}")
        theta = np.zeros(count)
        theta[k - 1] = math.sqrt(theta_class.c_theta / b2[k - 1])
        return theta
    if mode == "least-favorable":
        gamma = pinsker_gamma_oracle(lambdas, theta_class, sigma, n)
        lam_fn, k_cap = _as_lambda_fn(lambdas)
        lam = lam_fn(ks) if k_cap is None else np.concatenate(
            [lam_fn(ks[: min(count, k_cap)]), np.full(max(count - k_cap, 0), np.inf)]
        )
        profile = (sigma**2 / (n * lam)) * np.clip(1.0 / (gamma * np.sqrt(b2)) - 1.0, 0.0, None)
        return np.sqrt(profile)
    raise ValueError(f"unknown theta mode {mode!r}")


def pinsker_plan(
    lambdas: LambdaLike,
    theta_class: ThetaClass,
    sigma: float,
    n: int,
    rho: float,
    *,
    gamma: float | None = None,
    count: int | None = None,
    split_m: int | None = None,
) -> PinskerPlan:
    """Assemble gamma, weights, and the sharp constant into one plan."""
    if gamma is None:
        gamma = pinsker_gamma_oracle(lambdas, theta_class, sigma, n)
    if count is None:
        support = _active_count(gamma, theta_class.beta, None) if gamma > 0 else DEFAULT_COEFF_BUDGET
        count = max(support + 1, 8)
    weights = pinsker_weights(gamma, theta_class, count)
    a_n = sharp_risk_constant(lambdas, theta_class, sigma, n, gamma=gamma)
    return PinskerPlan(gamma=gamma, weights=weights, sharp_risk=a_n, rho=rho, split_m=split_m)
