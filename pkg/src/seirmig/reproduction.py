"""Next-generation matrices at the disease-free equilibrium, R0 and R_E.

Infected states are ordered ``(E_u, E_r, I_u, I_r)``. New infections enter
only the exposed classes, so ``K = -T @ inv(Sigma)`` has non-zero rows for
``E_u`` and ``E_r`` alone and R0 is the spectral radius of its 2x2 exposed
block. That block is lower triangular, so R0 is the larger of its diagonal
entries (urban and rural reproduction numbers).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibria import dfe_state
from .errors import DegenerateParameterError, DomainError, NumericError
from .model import ModelParameters

#: Convergence threshold of the power iteration (relative gap of the bounds).
POWER_TOL = 1e-14
POWER_MAX_ITER = 60


@dataclass(frozen=True)
class DfeWeights:
    """Susceptible fractions multiplying beta in the new-infection matrix."""

    p1: float
    p2: float

    def __post_init__(self):
        for name in ("p1", "p2"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v!r}")
            object.__setattr__(self, name, v)


UNIT_WEIGHTS = DfeWeights(1.0, 1.0)


@dataclass(frozen=True)
class NextGenDecomposition:
    t_matrix: np.ndarray
    sigma_matrix: np.ndarray
    sigma_inverse: np.ndarray
    #: full 4x4 product -T @ inv(Sigma)
    full_k: np.ndarray
    #: projection of ``full_k`` onto the exposed classes (E_u, E_r)
    k_matrix: np.ndarray
    ordering: tuple = ("E_u", "E_r", "I_u", "I_r")


@dataclass(frozen=True)
class R0Value:
    """Closed-form R0 with its urban and rural components.

    ``urban_dominant`` is False when the rural entry is the larger one, in
    which case the urban expression alone would understate R0.
    """

    value: float
    urban: float
    rural: float
    urban_dominant: bool

    def __float__(self):
        return self.value


def _check_denominators(params: ModelParameters):
    k, m, mu_c, gamma = params.k, params.m, params.mu_c, params.gamma
    if gamma + mu_c <= 0 or k + mu_c <= 0 or k + m + mu_c <= 0:
        raise DegenerateParameterError("transition matrix is singular")


def sigma_matrix(params: ModelParameters) -> np.ndarray:
    k, m, mu_c, gamma, p = params.k, params.m, params.mu_c, params.gamma, params.p
    return np.array([
        [-(k + m + mu_c), 0.0, 0.0, 0.0],
        [(1 - p) * m, -(k + mu_c), 0.0, 0.0],
        [k, 0.0, -(gamma + mu_c), 0.0],
        [0.0, k, 0.0, -(gamma + mu_c)],
    ])


def t_matrix(params: ModelParameters, weights: DfeWeights) -> np.ndarray:
    t = np.zeros((4, 4))
    t[0, 2] = weights.p1 * params.beta
    t[1, 3] = weights.p2 * params.beta
    return t


def sigma_inverse_closed_form(params: ModelParameters) -> np.ndarray:
    """Entry-wise inverse of the lower-triangular transition matrix."""
    _check_denominators(params)
    k, m, mu_c, gamma, p = params.k, params.m, params.mu_c, params.gamma, params.p
    a = -(k + m + mu_c)
    b = -(k + mu_c)
    g = -(gamma + mu_c)
    c = (1 - p) * m
    inv = np.zeros((4, 4))
    inv[0, 0] = 1 / a
    inv[1, 0] = -c / (a * b)
    inv[1, 1] = 1 / b
    inv[2, 0] = -k / (a * g)
    inv[2, 2] = 1 / g
    inv[3, 0] = k * c / (a * b * g)
    inv[3, 1] = -k / (b * g)
    inv[3, 3] = 1 / g
    return inv


def published_sigma_inverse(params: ModelParameters) -> np.ndarray:
    """The inverse exactly as printed in the source, including its slips.

    Two entries differ from the true inverse: ``[1, 0]`` lacks the factor
    ``m`` and has the wrong sign, ``[3, 0]`` has the wrong sign. Kept only for
    the discrepancy report.
    """
    _check_denominators(params)
    k, m, mu_c, gamma, p = params.k, params.m, params.mu_c, params.gamma, params.p
    inv = np.zeros((4, 4))
    inv[0, 0] = 1 / (-k - m - mu_c)
    inv[1, 0] = (1 - p) / ((-k - m - mu_c) * (-k - mu_c))
    inv[1, 1] = 1 / (-k - mu_c)
    inv[2, 0] = k / ((k + m + mu_c) * (-gamma - mu_c))
    inv[2, 2] = 1 / (-gamma - mu_c)
    inv[3, 0] = k * (1 - p) * m / ((-k - m - mu_c) * (-k - mu_c) * (gamma + mu_c))
    inv[3, 1] = k / ((k + mu_c) * (-gamma - mu_c))
    inv[3, 3] = 1 / (-gamma - mu_c)
    return inv


def next_generation(params: ModelParameters, weights: DfeWeights) -> NextGenDecomposition:
    """Build T, Sigma and K = -T inv(Sigma) numerically.

    ``inv(Sigma)`` comes from a linear solve, independent of
    :func:`sigma_inverse_closed_form`.
    """
    _check_denominators(params)
    t = t_matrix(params, weights)
    sigma = sigma_matrix(params)
    try:
        sigma_inv = np.linalg.solve(sigma, np.eye(4))
    except np.linalg.LinAlgError as exc:
        raise DegenerateParameterError(f"transition matrix is singular: {exc}") from exc
    full_k = -t @ sigma_inv
    k_matrix = full_k[:2, :2].copy()
    for arr in (t, sigma, sigma_inv, full_k, k_matrix):
        arr.setflags(write=False)
    return NextGenDecomposition(t, sigma, sigma_inv, full_k, k_matrix)


def _closed_form_2x2(a: np.ndarray) -> float:
    tr = a[0, 0] + a[1, 1]
    disc = (a[0, 0] - a[1, 1]) ** 2 + 4 * a[0, 1] * a[1, 0]
    if disc < 0:
        return float(np.sqrt(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]))
    return float(abs(tr) + np.sqrt(disc)) / 2


def spectral_radius(matrix) -> float:
    """Spectral radius of a non-negative matrix by power iteration.

    The iterate is ``A^(2^j) 1``, built by repeated squaring. Stops when the Collatz-Wielandt bounds ``min (Ax)_i/x_i`` and
    ``max (Ax)_i/x_i`` agree to :data:`POWER_TOL`. When they do not (nearly
    equal dominant eigenvalues make the iteration crawl), a 2x2 matrix falls
    back to its characteristic-polynomial root and larger ones to a dense
    eigensolver.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("spectral radius needs a square matrix")
    if not np.all(np.isfinite(a)):
        raise NumericError("matrix has non-finite entries")
    if not np.any(a):
        return 0.0
    if a.min() >= 0:
        ones = np.ones(a.shape[0])
        b = a / a.max()
        for _ in range(POWER_MAX_ITER):
            x = b @ ones
            if not np.any(x):
                return 0.0
            x /= x.max()
            y = a @ x
            # rows that vanish belong to classes no cycle feeds; the bounds
            # are taken over the remaining support
            support = x > 0
            ratios = y[support] / x[support]
            lo, hi = ratios.min(), ratios.max()
            if hi - lo <= POWER_TOL * hi:
                return float(hi)
            # squaring turns x into A^(2^j) 1, squaring the convergence ratio
            b = b @ b
            peak = b.max()
            if not peak > 0 or not np.isfinite(peak):
                break
            b /= peak
    if a.shape == (2, 2):
        return _closed_form_2x2(a)
    try:
        return float(np.max(np.abs(np.linalg.eigvals(a))))
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc


def _component_numbers(beta, p1, p2, k, gamma, mu_c, m):
    urban = beta * p1 * k / ((gamma + mu_c) * (k + m + mu_c))
    rural = beta * p2 * k / ((gamma + mu_c) * (k + mu_c))
    return urban, rural


def r0_closed_form(params: ModelParameters, weights: DfeWeights) -> R0Value:
    _check_denominators(params)
    urban, rural = _component_numbers(
        params.beta, weights.p1, weights.p2, params.k, params.gamma, params.mu_c, params.m
    )
    return R0Value(max(urban, rural), urban, rural, urban >= rural)


def r0_numeric(params: ModelParameters, weights: DfeWeights) -> float:
    return spectral_radius(next_generation(params, weights).k_matrix)


def dfe_weights_from_equilibrium(params: ModelParameters) -> DfeWeights:
    """Susceptible fractions S_u*/N* and S_r*/N* at the disease-free state."""
    e0 = dfe_state(params)
    n = e0.s_u + e0.s_r + e0.q_r
    if n <= 0:
        raise DegenerateParameterError("disease-free population is zero")
    return DfeWeights(min(1.0, e0.s_u / n), min(1.0, e0.s_r / n))


def modified_rates(params: ModelParameters, eff) -> tuple:
    """Incubation and recovery rates after the interventions in ``eff``."""
    k = params.k * (1 - eff.eps11) * (1 - eff.eps12)
    gamma = params.gamma * (1 + eff.eps21) * (1 + eff.eps22) * (1 + eff.eps31) * (1 + eff.eps32)
    return k, gamma


def effective_r0(params: ModelParameters, weights: DfeWeights, eff) -> float:
    """R0 with the incubation rate reduced and the recovery rate boosted.

    The extra ``1/N`` of the printed formula is taken as already contained in
    the susceptible fraction ``p1``, so zero efficacies give R0 exactly.
    """
    _check_denominators(params)
    k, gamma = modified_rates(params, eff)
    urban, rural = _component_numbers(
        params.beta, weights.p1, weights.p2, k, gamma, params.mu_c, params.m
    )
    return max(urban, rural)


def published_effective_r0(params: ModelParameters, weights: DfeWeights, eff, n: float) -> float:
    """The printed R_E formula taken literally, including its ``N (m + mu_c)`` factor."""
    k, gamma = modified_rates(params, eff)
    return params.beta * weights.p1 * k / (
        n * (params.m + params.mu_c) * (k + params.m + params.mu_c) * (gamma + params.mu_c)
    )
