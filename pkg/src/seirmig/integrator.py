"""Fixed-step RK4 and adaptive Dormand-Prince 5(4) integration of the model."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DomainError, PositivityError, StiffnessError
from .model import (
    DYNAMIC_N, HEADER_NAMES, IncidenceMode, ModelParameters, StateVector, derivatives, rhs,
)

#: Samples below this are reported as integrator failures.
NEGATIVE_HARD_LIMIT = -1e-6
#: Samples must stay above this for the positivity contract to hold.
NEGATIVE_SOFT_LIMIT = -1e-8


@dataclass(frozen=True)
class RK4Fixed:
    step: float

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise DomainError(f"step must be positive, got {self.step!r}")


@dataclass(frozen=True)
class RK45Adaptive:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_step: float = 1.0

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "max_step"):
            v = getattr(self, name)
            if not (v > 0):
                raise DomainError(f"{name} must be positive, got {v!r}")


Method = Union[RK4Fixed, RK45Adaptive]


@dataclass(frozen=True)
class IntegrationSpec:
    t0: float = 0.0
    t_end: float = 500.0
    method: Method = field(default_factory=RK45Adaptive)
    record_every: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.t0) and math.isfinite(self.t_end)):
            raise DomainError("t0 and t_end must be finite")
        if not self.t_end > self.t0:
            raise DomainError(f"t_end ({self.t_end}) must exceed t0 ({self.t0})")
        if not self.record_every > 0:
            raise DomainError("record_every must be positive")

    def sample_times(self) -> np.ndarray:
        span = self.t_end - self.t0
        n = int(math.floor(span / self.record_every + 1e-9))
        times = [self.t0 + i * self.record_every for i in range(n + 1)]
        # drop a grid point that would collide with t_end
        while times and times[-1] >= self.t_end - 1e-9 * self.record_every:
            times.pop()
        times.append(self.t_end)
        return np.array(times)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    params: ModelParameters
    mode: IncidenceMode
    spec: IntegrationSpec
    stats: dict

    def __len__(self):
        return len(self.times)

    def state_at(self, index: int) -> StateVector:
        return StateVector.from_array(self.states[index])

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def column(self, name: str) -> np.ndarray:
        return self.states[:, HEADER_NAMES.index(name)]

    def totals(self) -> np.ndarray:
        return self.states.sum(axis=1)

    def to_csv(self) -> str:
        lines = ["t," + ",".join(HEADER_NAMES)]
        for t, row in zip(self.times, self.states):
            lines.append(",".join(repr(float(v)) for v in (t, *row)))
        return "\n".join(lines) + "\n"


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# difference between 5th and embedded 4th order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _check_negative(y, t):
    lo = float(y.min())
    if lo < NEGATIVE_HARD_LIMIT:
        j = int(np.argmin(y))
        raise PositivityError(
            f"component {HEADER_NAMES[j]} reached {lo!r} at t={t!r}", t=t
        )


class _Sampler:
    """Linear interpolation of accepted steps onto the output grid."""

    def __init__(self, times):
        self.times = times
        self.out = np.empty((len(times), 9))
        self.i = 0

    def feed(self, t_a, y_a, t_b, y_b):
        times = self.times
        while self.i < len(times) and times[self.i] <= t_b:
            ts = times[self.i]
            if ts == t_b:
                self.out[self.i] = y_b
            elif ts == t_a:
                self.out[self.i] = y_a
            else:
                w = (ts - t_a) / (t_b - t_a)
                self.out[self.i] = y_a + w * (y_b - y_a)
            self.i += 1


def _rk4(f, y0, spec, method, sampler):
    span = spec.t_end - spec.t0
    ratio = span / method.step
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        n = int(math.ceil(ratio))
    t0, h = spec.t0, method.step
    y = y0
    t = t0
    sampler.feed(t0, y0, t0, y0)
    for i in range(1, n + 1):
        t_next = spec.t_end if i == n else t0 + i * h
        hh = t_next - t
        k1 = f(y)
        k2 = f(y + (hh / 2) * k1)
        k3 = f(y + (hh / 2) * k2)
        k4 = f(y + hh * k3)
        y_next = y + (hh / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        _check_negative(y_next, t_next)
        sampler.feed(t, y, t_next, y_next)
        t, y = t_next, y_next
    return {"accepted": n, "rejected": 0, "rhs_evals": 4 * n}


def _rk45(f, y0, spec, method, sampler):
    t0, t_end = spec.t0, spec.t_end
    span = t_end - t0
    h_min = 1e-12 * span
    h = min(span / 1000, method.max_step)
    atol, rtol = method.abs_tol, method.rel_tol
    safety, fac_min, fac_max = 0.9, 0.2, 5.0
    # PI controller exponents for a 4th-order error estimate
    alpha, beta_pi = 0.7 / 5, 0.4 / 5
    err_prev = 1.0
    accepted = rejected = evals = 0
    times = sampler.times

    t, y = t0, y0
    k1 = f(y)
    evals += 1
    sampler.feed(t0, y0, t0, y0)
    while t < t_end:
        # never step across a sample time; samples are then exact step ends
        target = times[sampler.i]
        h_step = h
        clipped = False
        if t + h_step >= target or target - (t + h_step) < h_min:
            h_step = target - t
            clipped = True
        ks = [k1]
        for s in range(1, 7):
            acc = y.copy()
            for a, kj in zip(_A[s], ks):
                if a != 0.0:
                    acc += (h_step * a) * kj
            ks.append(f(acc))
        evals += 6
        y_new = acc  # stage 7 argument is the 5th order solution (FSAL)
        err_vec = np.zeros_like(y)
        for e, kj in zip(_E, ks):
            if e != 0.0:
                err_vec += (h_step * e) * kj
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        if err <= 1.0:
            t_new = target if clipped else t + h_step
            _check_negative(y_new, t_new)
            sampler.feed(t, y, t_new, y_new)
            t, y = t_new, y_new
            k1 = ks[6]
            accepted += 1
            err_c = max(err, 1e-10)
            fac = safety * err_c ** -alpha * err_prev ** beta_pi
            fac = min(fac_max, max(fac_min, fac))
            err_prev = err_c
            h_next = h_step * fac
            if clipped and fac >= 1.0:
                h_next = max(h_next, h)
            h = min(h_next, method.max_step)
        else:
            rejected += 1
            h = h_step * max(fac_min, safety * err ** -alpha)
        if t < t_end and h < h_min:
            raise StiffnessError(f"step size underflow ({h!r}) at t={t!r}", t=t)
    return {"accepted": accepted, "rejected": rejected, "rhs_evals": evals}


def integrate(
    init,
    params: ModelParameters,
    mode: IncidenceMode = DYNAMIC_N,
    spec: IntegrationSpec | None = None,
) -> Trajectory:
    """Integrate from ``init`` and sample the solution every ``record_every``.

    Between accepted steps the output is linearly interpolated.
    """
    spec = spec or IntegrationSpec()
    if isinstance(init, StateVector):
        y0 = init.as_array()
    else:
        y0 = np.array(init, dtype=float)
        if y0.shape != (9,) or not np.all(np.isfinite(y0)):
            raise DomainError("initial state must have 9 finite components")
    if y0.min() < 0:
        raise DomainError("initial state must be non-negative")

    rhs(y0, params, mode)  # validates once

    def f(y):
        if not np.all(np.isfinite(y)):
            raise DomainError("integration produced non-finite values")
        return np.array(derivatives(y.tolist(), params, mode))

    sampler = _Sampler(spec.sample_times())
    if isinstance(spec.method, RK4Fixed):
        stats = _rk4(f, y0, spec, spec.method, sampler)
    else:
        stats = _rk45(f, y0, spec, spec.method, sampler)
    assert sampler.i == len(sampler.times)
    times = sampler.times
    states = sampler.out
    times.setflags(write=False)
    states.setflags(write=False)
    return Trajectory(times, states, params, mode, spec, stats)


def convergence_order(
    init,
    params: ModelParameters,
    mode: IncidenceMode = DYNAMIC_N,
    base_step: float = 1.0,
    t_end: float = 50.0,
) -> float:
    """Empirical order of RK4 from three successive step halvings.

    Uses the max-norm of differences of the end state:
    ``log2(|y_h - y_{h/2}| / |y_{h/2} - y_{h/4}|)``.
    """
    finals = []
    for h in (base_step, base_step / 2, base_step / 4):
        spec = IntegrationSpec(0.0, t_end, RK4Fixed(h), record_every=t_end)
        finals.append(integrate(init, params, mode, spec).final)
    d1 = np.max(np.abs(finals[0] - finals[1]))
    d2 = np.max(np.abs(finals[1] - finals[2]))
    return math.log2(d1 / d2)
