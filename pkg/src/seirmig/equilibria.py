"""Equilibria of the model and their local stability.

The disease-free equilibrium has a closed form. Infected equilibria are found
numerically (damped Newton from a grid of starts) and then compared with the
published cubic for the rural infected level, which is kept as a cross-check
only: it does not follow from setting the right-hand side to zero.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateParameterError, NumericError, SingularityError
from .model import (
    COMPARTMENTS, DYNAMIC_N, E_R, E_U, I_R, I_U, Q_R, R_R, R_U, S_R, S_U,
    IncidenceMode, ModelParameters, StateVector, derivatives, rhs,
)

log = logging.getLogger(__name__)

#: Half-width of the band around zero where a real part counts as marginal.
MARGINAL_BAND = 1e-10
NEWTON_MAX_ITER = 200
#: Start levels for each infected coordinate, as fractions of b1/mu_c.
START_LEVELS = (1e-4, 1e-2, 1.0)


@dataclass(frozen=True)
class EquilibriumReport:
    state: StateVector
    residual_norm: float
    eigenvalues: tuple
    stability: str
    kind: str
    notes: tuple = ()

    def to_text(self, prefix: str = "") -> str:
        lines = [f"{prefix}kind = {self.kind}", f"{prefix}stability = {self.stability}"]
        for name, v in zip(COMPARTMENTS, self.state):
            lines.append(f"{prefix}{name} = {v!r}")
        lines.append(f"{prefix}residual_norm = {self.residual_norm!r}")
        lines.append(f"{prefix}max_real_eigenvalue = {max(e.real for e in self.eigenvalues)!r}")
        for i, note in enumerate(self.notes):
            lines.append(f"{prefix}note_{i} = {note}")
        return "\n".join(lines) + "\n"

    def eigenvalue_csv(self) -> str:
        rows = ["re,im"] + [f"{e.real!r},{e.imag!r}" for e in self.eigenvalues]
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class CubicCoefficients:
    a3: float
    a2: float
    a1: float
    a0: float

    @property
    def coefficients(self) -> tuple:
        return (self.a3, self.a2, self.a1, self.a0)

    @property
    def sign_changes(self) -> int:
        return descartes_sign_changes(self.coefficients)

    def positive_roots(self) -> list:
        return positive_real_roots(self.coefficients)


def descartes_sign_changes(coefficients) -> int:
    """Number of sign changes in the coefficient sequence, zeros skipped."""
    signs = [c > 0 for c in coefficients if c != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def positive_real_roots(coefficients) -> list:
    """Positive real roots of a polynomial (highest degree first), ascending."""
    c = list(coefficients)
    while c and c[0] == 0:
        c.pop(0)
    if len(c) < 2:
        return []
    roots = np.roots(c)
    scale = max(1.0, float(np.max(np.abs(roots)))) if len(roots) else 1.0
    found = []
    for r in roots:
        if abs(r.imag) > 1e-7 * max(abs(r), 1e-300) and abs(r.imag) > 1e-12 * scale:
            continue
        x = float(r.real)
        if x <= 0:
            continue
        # polish
        for _ in range(3):
            f = np.polyval(c, x)
            df = np.polyval(np.polyder(c), x)
            if df == 0:
                break
            step = f / df
            if not math.isfinite(step) or abs(step) > 0.5 * x:
                break
            x -= step
        found.append(x)
    return sorted(found)


def jacobian(state, params: ModelParameters, mode: IncidenceMode = DYNAMIC_N) -> np.ndarray:
    """Analytic 9x9 Jacobian of :func:`seirmig.model.rhs`.

    Under ``dynamic_n`` the dependence of N on every compartment is included.
    """
    y = np.asarray(list(state) if isinstance(state, StateVector) else state, dtype=float)
    rhs(y, params, mode)  # domain and singularity checks
    y = y.tolist()
    beta, mu_c, gamma, d1, k, m, p = (
        params.beta, params.mu_c, params.gamma, params.d1, params.k, params.m, params.p,
    )
    J = np.zeros((9, 9))
    fixed = mode.is_fixed
    n = mode.value if fixed else sum(y)

    def partials(si, ii):
        s, i = y[si], y[ii]
        if fixed:
            return beta * i / n, beta * s / n, 0.0
        if n == 0.0:
            return 0.0, 0.0, 0.0
        n2 = n * n
        n_minus_s = sum(v for j, v in enumerate(y) if j != si)
        n_minus_i = sum(v for j, v in enumerate(y) if j != ii)
        return beta * i * n_minus_s / n2, beta * s * n_minus_i / n2, -beta * s * i / n2

    for (si, ii, src, dst) in ((S_U, I_U, 0, 1), (S_R, I_R, 5, 6)):
        d_s, d_i, d_other = partials(si, ii)
        row = np.full(9, d_other)
        row[si] = d_s
        row[ii] = d_i
        J[src] -= row
        J[dst] += row

    J[S_U, S_U] -= mu_c + m
    J[E_U, E_U] -= k + mu_c + m
    J[I_U, E_U] += k
    J[I_U, I_U] -= gamma + mu_c
    J[R_U, I_U] += gamma
    J[R_U, R_U] -= mu_c
    J[Q_R, S_U] += p * m
    J[Q_R, E_U] += p * m
    J[Q_R, Q_R] -= d1
    J[S_R, S_U] += (1 - p) * m
    J[S_R, S_R] -= mu_c
    J[E_R, E_U] += (1 - p) * m
    J[E_R, E_R] -= k + mu_c
    J[I_R, E_R] += k
    J[I_R, I_R] -= gamma + mu_c
    J[R_R, I_R] += gamma
    J[R_R, R_R] -= mu_c
    return J


def eigenvalues(matrix) -> np.ndarray:
    """Eigenvalues of a dense matrix (LAPACK: balancing, Hessenberg, shifted QR)."""
    a = np.array(matrix, dtype=float, copy=True)
    try:
        w = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver did not converge for matrix:\n{np.array2string(a)}") from exc
    order = np.lexsort((w.imag, w.real))
    return w[order]


def stability_class(eigs) -> str:
    re = [complex(e).real for e in eigs]
    if all(r < -MARGINAL_BAND for r in re):
        return "locally_stable"
    if any(r > MARGINAL_BAND for r in re):
        return "unstable"
    return "marginal"


def classify_stability(state, matrix, residual_norm: float, kind: str, notes=()) -> EquilibriumReport:
    """Finish an equilibrium report from its Jacobian matrix."""
    eigs = eigenvalues(matrix)
    if not isinstance(state, StateVector):
        state = StateVector.from_array(state)
    return EquilibriumReport(
        state=state,
        residual_norm=float(residual_norm),
        eigenvalues=tuple(complex(e) for e in eigs),
        stability=stability_class(eigs),
        kind=kind,
        notes=tuple(notes),
    )


def residual_norm(state, params: ModelParameters, mode: IncidenceMode = DYNAMIC_N) -> float:
    return float(np.linalg.norm(rhs(state, params, mode)))


def dfe_state(params: ModelParameters) -> StateVector:
    b1, mu_c, m, p, d1 = params.b1, params.mu_c, params.m, params.p, params.d1
    if mu_c + m == 0 or mu_c == 0:
        raise DegenerateParameterError("mu_c + m and mu_c must be non-zero")
    if d1 == 0:
        raise DegenerateParameterError("d1 must be non-zero for a finite quarantine level")
    s_u = b1 / (mu_c + m)
    s_r = (1 - p) * b1 * m / (mu_c * (mu_c + m))
    q_r = p * b1 * m / (d1 * (mu_c + m))
    return StateVector(s_u=s_u, q_r=q_r, s_r=s_r)


def disease_free_equilibrium(params: ModelParameters, mode: IncidenceMode = DYNAMIC_N) -> EquilibriumReport:
    state = dfe_state(params)
    return classify_stability(
        state, jacobian(state, params, mode), residual_norm(state, params, mode), "disease_free"
    )


def infected_cubic(params: ModelParameters, e_u_star: float, s_u_star: float, n: float) -> CubicCoefficients:
    """Coefficients of the published cubic for the rural infected level.

    Transcribed term by term; ``n`` is the population used for N. The cubic is
    not implied by the equilibrium equations (see
    :func:`rural_balance_quadratic` for the exact relation).
    """
    beta, mu_c, gamma, k, m, p = params.beta, params.mu_c, params.gamma, params.k, params.m, params.p
    if k == 0:
        raise DegenerateParameterError("k must be non-zero")
    a3 = (gamma + mu_c) / k * n * beta ** 2
    a2 = -n * beta * ((k * (1 - p) * m * e_u_star * beta + mu_c * (gamma + mu_c) * n) / k)
    a1 = -(1 - p) * mu_c * m * e_u_star * n ** 2 * beta
    a0 = (1 - p) * m * s_u_star
    return CubicCoefficients(a3, a2, a1, a0)


def rural_balance_quadratic(params: ModelParameters, e_u_star: float, s_u_star: float, n: float) -> tuple:
    """Exact fixed-N relation for the rural infected level, highest degree first.

    Eliminating S_r and E_r from the rural equilibrium equations gives
    ``c*b*x^2 + (c*mu_c - b*(A + B))*x - A*mu_c = 0`` with ``b = beta/n``,
    ``c = (k+mu_c)(gamma+mu_c)/k``, ``A = (1-p)*m*E_u`` and ``B = (1-p)*m*S_u``.
    """
    beta, mu_c, gamma, k, m, p = params.beta, params.mu_c, params.gamma, params.k, params.m, params.p
    if k == 0:
        raise DegenerateParameterError("k must be non-zero")
    b = beta / n
    c = (k + mu_c) * (gamma + mu_c) / k
    a_in = (1 - p) * m * e_u_star
    b_in = (1 - p) * m * s_u_star
    return (c * b, c * mu_c - b * (a_in + b_in), -a_in * mu_c)


def _newton(x0, params, mode, tol):
    x = np.array(x0, dtype=float)
    f = np.array(derivatives(x.tolist(), params, mode))
    fn = float(np.linalg.norm(f))
    for _ in range(NEWTON_MAX_ITER):
        if fn < tol:
            return x, fn, True
        try:
            J = jacobian(x, params, mode)
            dx = np.linalg.solve(J, -f)
        except (np.linalg.LinAlgError, SingularityError):
            return x, fn, False
        if not np.all(np.isfinite(dx)):
            return x, fn, False
        lam = 1.0
        for _ in range(40):
            xt = x + lam * dx
            try:
                ft = np.array(derivatives(xt.tolist(), params, mode))
            except SingularityError:
                ft = None
            if ft is not None and np.all(np.isfinite(ft)):
                ftn = float(np.linalg.norm(ft))
                if ftn < fn:
                    break
            lam *= 0.5
        else:
            return x, fn, False
        if np.max(np.abs(lam * dx)) <= 1e-15 * max(1.0, float(np.max(np.abs(x)))):
            x, f, fn = xt, ft, ftn
            return x, fn, fn < tol
        x, f, fn = xt, ft, ftn
    return x, fn, fn < tol


@dataclass
class EquilibriumSearch:
    reports: list
    starts: int
    converged: int
    diagnostics: list = field(default_factory=list)


def multistart_grid(params: ModelParameters, mode: IncidenceMode = DYNAMIC_N) -> list:
    """Newton starting points, 3 levels per infected coordinate (81 combinations).

    Each combination is used twice: once with the remaining compartments at
    their disease-free values, once with them balanced against the infected
    levels (S from its own equation, R = gamma*I/mu_c, Q_r from its inflow).
    The second family is what reaches endemic states with strongly depleted
    susceptibles.
    """
    b1, beta, mu_c, gamma, d1, m, p = (
        params.b1, params.beta, params.mu_c, params.gamma, params.d1, params.m, params.p,
    )
    base = dfe_state(params).as_array()
    n0 = mode.value if mode.is_fixed else float(base.sum())
    top = b1 / mu_c
    levels = [f * top for f in START_LEVELS]
    starts = []
    for e_u, i_u, e_r, i_r in itertools.product(levels, repeat=4):
        x = base.copy()
        x[E_U], x[I_U], x[E_R], x[I_R] = e_u, i_u, e_r, i_r
        starts.append(x)
        z = x.copy()
        n = n0 if mode.is_fixed else n0 + e_u + i_u + e_r + i_r
        z[S_U] = b1 / (mu_c + m + beta * i_u / n)
        z[R_U] = gamma * i_u / mu_c
        z[Q_R] = p * m * (z[S_U] + e_u) / d1
        z[S_R] = (1 - p) * m * z[S_U] / (mu_c + beta * i_r / n)
        z[R_R] = gamma * i_r / mu_c
        starts.append(z)
    return starts


def cubic_cross_check(state: StateVector, params: ModelParameters, mode: IncidenceMode) -> list:
    """Notes comparing an equilibrium's I_r with the published cubic's roots."""
    n = mode.value if mode.is_fixed else sum(state)
    notes = []
    try:
        cubic = infected_cubic(params, state.e_u, state.s_u, n)
    except DegenerateParameterError as exc:
        return [f"cubic not evaluable: {exc}"]
    roots = cubic.positive_roots()
    i_r = state.i_r
    if any(abs(r - i_r) <= 1e-6 * max(abs(i_r), 1e-300) for r in roots):
        notes.append("cubic: I_r matches a positive root")
    else:
        shown = ", ".join(f"{r:.6g}" for r in roots) or "none"
        notes.append(f"cubic mismatch: I_r={i_r:.10g}, positive cubic roots: {shown}")
    return notes


def search_infected_equilibria(params: ModelParameters, mode: IncidenceMode = DYNAMIC_N) -> EquilibriumSearch:
    """Multistart damped Newton on rhs = 0, keeping non-negative infected fixed points."""
    tol_final = 1e-8 * params.b1
    search = EquilibriumSearch(reports=[], starts=0, converged=0)
    if params.beta == 0 or params.b1 == 0:
        search.diagnostics.append("no transmission or no births: only the disease-free state exists")
        return search
    scale = params.b1 / params.mu_c
    found = []
    for x0 in multistart_grid(params, mode):
        search.starts += 1
        x, fn, ok = _newton(x0, params, mode, 1e-3 * tol_final)
        if not ok:
            # accept a start that reached the reporting tolerance
            if not (fn < tol_final):
                continue
        search.converged += 1
        if x.min() < -1e-9 * scale:
            continue
        if max(x[I_U], x[I_R]) <= 1e-9 * scale:
            continue
        x = np.where(x < 0, 0.0, x)
        if any(np.max(np.abs(x - y)) <= 1e-6 * max(1.0, float(np.max(np.abs(y)))) for y in found):
            continue
        found.append(x)
    if search.converged == 0:
        search.diagnostics.append("Newton did not converge from any start")
    found.sort(key=lambda v: (v[I_U], v[I_R]))
    for x in found:
        state = StateVector.from_array(x)
        res = residual_norm(state, params, mode)
        if not res < tol_final:
            search.diagnostics.append(f"dropped candidate with residual {res!r}")
            continue
        notes = cubic_cross_check(state, params, mode)
        for note in notes:
            if note.startswith("cubic mismatch"):
                log.info(note)
        search.reports.append(
            classify_stability(state, jacobian(state, params, mode), res, "infected", notes)
        )
    return search


def infected_equilibria(params: ModelParameters, mode: IncidenceMode = DYNAMIC_N) -> list:
    return search_infected_equilibria(params, mode).reports


def published_infected_closed_form(params: ModelParameters, n: float) -> dict:
    """Infected-equilibrium expressions exactly as printed, for the discrepancy report.

    Several expressions are dimensionally inconsistent; values are reported,
    never used for computation. ``I_r`` takes the largest positive root of the
    published cubic (``nan`` when there is none).
    """
    b1, beta, mu_c, gamma, d1, k, m, p = (
        params.b1, params.beta, params.mu_c, params.gamma,
        params.d1, params.k, params.m, params.p,
    )
    out = {}
    with np.errstate(all="ignore"):
        s_u = (gamma + mu_c) * (n * (k + m + mu_c)) / (k * beta) if k * beta else math.nan
        i_u = n * (b1 * k * beta + (mu_c + m) * (gamma + mu_c) * (n * (mu_c + m + k))) / beta if beta else math.nan
        e_u = beta * s_u * i_u / (n * (mu_c + m + k))
        r_u = gamma * i_u / mu_c
        q_r = p * m * (s_u + e_u) / d1 if d1 else math.nan
        roots = infected_cubic(params, e_u, s_u, n).positive_roots() if k and math.isfinite(e_u) else []
        i_r = roots[-1] if roots else math.nan
        den = beta * i_r / n - mu_c
        s_r = (1 - p) * m * s_u / den if den else math.nan
        e_r = ((1 - p) * m * e_u + beta * s_r * i_r / n) / (mu_c + k)
        r_r = mu_c / (gamma * i_r) if gamma * i_r else math.nan
    out.update(s_u=s_u, e_u=e_u, i_u=i_u, r_u=r_u, q_r=q_r, s_r=s_r, e_r=e_r, i_r=i_r, r_r=r_r)
    return out
