"""State, parameters and right-hand side of the urban/rural migration SEIR model.

Compartment order (used everywhere as the array layout)::

    S_u, E_u, I_u, R_u, Q_r, S_r, E_r, I_r, R_r

Urban susceptibles and exposed emigrate at rate ``m``; a fraction ``p`` of the
migrants is intercepted in quarantine (``Q_r``) and removed at rate ``d1``, the
rest join the rural susceptible/exposed classes.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, SingularityError

COMPARTMENTS = ("s_u", "e_u", "i_u", "r_u", "q_r", "s_r", "e_r", "i_r", "r_r")
HEADER_NAMES = ("S_u", "E_u", "I_u", "R_u", "Q_r", "S_r", "E_r", "I_r", "R_r")
PARAMETER_NAMES = ("b1", "beta", "mu_c", "gamma", "d1", "k", "m", "p")

S_U, E_U, I_U, R_U, Q_R, S_R, E_R, I_R, R_R = range(9)
INFECTED = (E_U, E_R, I_U, I_R)

#: Quarantined fraction used when none is supplied. No published value exists.
DEFAULT_P = 0.5


@dataclass(frozen=True)
class StateVector:
    s_u: float = 0.0
    e_u: float = 0.0
    i_u: float = 0.0
    r_u: float = 0.0
    q_r: float = 0.0
    s_r: float = 0.0
    e_r: float = 0.0
    i_r: float = 0.0
    r_r: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = float(getattr(self, f.name))
            if not math.isfinite(v):
                raise DomainError(f"state component {f.name} is not finite: {v!r}")
            object.__setattr__(self, f.name, v)

    @classmethod
    def from_array(cls, values: Iterable[float]) -> "StateVector":
        values = [float(v) for v in values]
        if len(values) != 9:
            raise DomainError(f"expected 9 compartments, got {len(values)}")
        return cls(*values)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in COMPARTMENTS], dtype=float)

    def __iter__(self):
        return (getattr(self, name) for name in COMPARTMENTS)


@dataclass(frozen=True)
class ModelParameters:
    """Rate constants of the model.

    ``b1`` is an absolute birth flux (persons/time); every other rate is per
    capita (1/time) except ``p``, the dimensionless quarantined fraction.
    """

    b1: float
    beta: float
    mu_c: float
    gamma: float
    d1: float
    k: float
    m: float
    p: float = DEFAULT_P

    def __post_init__(self):
        for f in fields(self):
            v = float(getattr(self, f.name))
            if not math.isfinite(v):
                raise DomainError(f"parameter {f.name} is not finite: {v!r}")
            if v < 0:
                raise DomainError(f"parameter {f.name} must be non-negative, got {v!r}")
            object.__setattr__(self, f.name, v)
        if self.p > 1:
            raise DomainError(f"p must lie in [0, 1], got {self.p!r}")
        if self.mu_c <= 0:
            raise DomainError("mu_c must be strictly positive")

    def with_(self, **changes) -> "ModelParameters":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)


#: Baseline rates (low-transmission scenario) with the default quarantine split.
BASELINE_PARAMS = ModelParameters(
    b1=350.0, beta=0.00028, mu_c=0.0062, gamma=0.0714, d1=0.013, k=0.1961, m=0.000182
)

#: Initial condition used by the published stability runs.
BASELINE_INIT = StateVector(100, 85, 50, 20, 10, 100, 85, 50, 20)


@dataclass(frozen=True)
class IncidenceMode:
    """How the denominator N of the incidence terms beta*S*I/N is obtained.

    ``dynamic_n`` uses the live sum of all nine compartments; ``fixed_n``
    uses the constant ``value``.
    """

    kind: str = "dynamic_n"
    value: float | None = None

    def __post_init__(self):
        if self.kind == "dynamic_n":
            if self.value is not None:
                raise DomainError("dynamic_n takes no value")
        elif self.kind == "fixed_n":
            if self.value is None or not math.isfinite(self.value) or self.value <= 0:
                raise DomainError(f"fixed_n requires a positive finite value, got {self.value!r}")
            object.__setattr__(self, "value", float(self.value))
        else:
            raise DomainError(f"unknown incidence mode {self.kind!r}")

    @classmethod
    def dynamic(cls) -> "IncidenceMode":
        return cls("dynamic_n")

    @classmethod
    def fixed(cls, n: float) -> "IncidenceMode":
        return cls("fixed_n", n)

    @property
    def is_fixed(self) -> bool:
        return self.kind == "fixed_n"

    def population(self, y: Sequence[float]) -> float:
        if self.is_fixed:
            return self.value
        return math.fsum(y)

    def __str__(self):
        return self.kind if not self.is_fixed else f"fixed_n({self.value!r})"


DYNAMIC_N = IncidenceMode.dynamic()


def _as_floats(state) -> list[float]:
    if isinstance(state, StateVector):
        return list(state)
    y = np.asarray(state, dtype=float)
    if y.shape != (9,):
        raise DomainError(f"state must have 9 components, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise DomainError("state has non-finite components")
    return y.tolist()


def _incidence(beta: float, s: float, i: float, n: float) -> float:
    si = s * i
    if si == 0.0:
        return 0.0
    if n == 0.0:
        raise SingularityError("total population is zero while S*I > 0")
    return beta * s * i / n


def total_population(state) -> float:
    """Sum of the nine compartments."""
    return math.fsum(_as_floats(state))


def rhs(state, params: ModelParameters, mode: IncidenceMode = DYNAMIC_N) -> np.ndarray:
    """Time derivative of the nine compartments.

    The incidence ``beta*S*I/N`` is taken as 0 whenever ``S*I == 0``, which
    keeps the empty state evaluable.
    """
    return np.array(derivatives(_as_floats(state), params, mode))


def derivatives(y: Sequence[float], params: ModelParameters, mode: IncidenceMode) -> list:
    """Unchecked core of :func:`rhs` working on a plain float sequence."""
    s_u, e_u, i_u, r_u, q_r, s_r, e_r, i_r, r_r = y
    b1, beta, mu_c, gamma, d1, k, m, p = (
        params.b1, params.beta, params.mu_c, params.gamma,
        params.d1, params.k, params.m, params.p,
    )
    if mode.is_fixed:
        n = mode.value
    else:
        n = s_u + e_u + i_u + r_u + q_r + s_r + e_r + i_r + r_r
    inc_u = _incidence(beta, s_u, i_u, n)
    inc_r = _incidence(beta, s_r, i_r, n)
    return [
        b1 - inc_u - mu_c * s_u - m * s_u,
        inc_u - k * e_u - mu_c * e_u - m * e_u,
        k * e_u - gamma * i_u - mu_c * i_u,
        gamma * i_u - mu_c * r_u,
        p * m * (s_u + e_u) - d1 * q_r,
        (1 - p) * m * s_u - inc_r - mu_c * s_r,
        (1 - p) * m * e_u + inc_r - k * e_r - mu_c * e_r,
        k * e_r - gamma * i_r - mu_c * i_r,
        gamma * i_r - mu_c * r_r,
    ]


def boundary_inflow_check(state, params: ModelParameters, mode: IncidenceMode = DYNAMIC_N):
    """Derivative of every compartment that currently sits at zero.

    Returns ``[(name, derivative), ...]``. On the boundary of the non-negative
    orthant each reported value should be >= 0.
    """
    y = _as_floats(state)
    d = rhs(y, params, mode)
    return [(COMPARTMENTS[j], float(d[j])) for j in range(9) if y[j] == 0.0]
