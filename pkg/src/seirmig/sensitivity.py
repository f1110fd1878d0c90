"""One-parameter sweeps: infected curves, their mean, mean-square error and a verdict.

For grid values ``v_1..v_V`` the infected total ``I(t, v) = I_u + I_r`` is
recorded per sample time; the mean curve and the spread around it

    E(t) = (1/V) * sum_n (I(t, v_n) - mean(t))**2

decide whether the parameter is sensitive on the interval. Sums use
``math.fsum`` so that reordering the grid leaves every output bit-identical.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SeirmigError, SweepError
from .integrator import IntegrationSpec, integrate
from .model import (
    BASELINE_INIT, BASELINE_PARAMS, DYNAMIC_N, I_R, I_U, PARAMETER_NAMES,
    IncidenceMode, ModelParameters, StateVector,
)
from .parallel import ordered_map

SENSITIVE = "sensitive"
INSENSITIVE = "insensitive"

DEFAULT_PEAK_THRESHOLD = 0.01
DEFAULT_TAIL_THRESHOLD = 1e-4

#: Cleaned sweep intervals, two per parameter: (lo, hi, step).
#: Source rows as printed, where they differ:
#:   b1     second interval has no step; the first row's step is reused
#:   beta   "0.00028 to 0.1", no step (summary table: "0.0028 to 0.1")
#:   k      "0.2to 2", no step (summary table: "0.05 to 2"); the summary
#:          table's lower end is used so the two intervals are contiguous
#:   mu_c   ".5 to 1", no step
#:   gamma  "0.0714 to 1", no step
#:   m      summary table gives "0.00182 to 1" for the second interval
#: p has no printed interval; [0, 1] in steps of 0.1 is supplied.
DEFAULT_INTERVALS = {
    "b1": ((345.0, 355.0, 1.0), (355.0, 365.0, 1.0)),
    "m": ((0.0, 0.00182, 0.0001), (0.00182, 0.1, 0.0001)),
    "beta": ((0.0, 0.00028, 0.0001), (0.00028, 0.1, 0.0001)),
    "k": ((0.0, 0.05, 0.01), (0.05, 2.0, 0.01)),
    "d1": ((0.0, 0.013, 0.001), (0.013, 0.5, 0.001)),
    "mu_c": ((0.1, 0.5, 0.001), (0.5, 1.0, 0.001)),
    "gamma": ((0.0, 0.0714, 0.001), (0.0714, 1.0, 0.001)),
    "p": ((0.0, 0.5, 0.1), (0.5, 1.0, 0.1)),
}

#: Verdicts of the published summary table, identical for both intervals.
REPORTED_VERDICTS = {
    "b1": INSENSITIVE, "m": INSENSITIVE, "beta": INSENSITIVE, "d1": INSENSITIVE,
    "k": SENSITIVE, "mu_c": SENSITIVE, "gamma": SENSITIVE,
}


def grid_values(lo: float, hi: float, step: float) -> list:
    """``lo, lo+step, ...`` up to and including ``hi``.

    Points are ``lo + i*step`` (no accumulated rounding); ``hi`` is appended
    when the step does not land on it.
    """
    if not (math.isfinite(lo) and math.isfinite(hi) and math.isfinite(step)):
        raise DomainError("sweep bounds and step must be finite")
    if not lo < hi:
        raise DomainError(f"sweep needs lo < hi, got [{lo!r}, {hi!r}]")
    if not step > 0:
        raise DomainError(f"sweep step must be positive, got {step!r}")
    n = int(math.floor((hi - lo) / step + 1e-9))
    values = [lo + i * step for i in range(n + 1)]
    while values and values[-1] >= hi - 1e-9 * step:
        values.pop()
    values.append(hi)
    return values


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    lo: float
    hi: float
    step: float
    base: ModelParameters = BASELINE_PARAMS
    init: StateVector = BASELINE_INIT
    integration: IntegrationSpec = field(default_factory=IntegrationSpec)
    mode: IncidenceMode = DYNAMIC_N
    #: explicit grid replacing lo/hi/step, e.g. a shuffled or repeated one
    values: tuple | None = None

    def __post_init__(self):
        if self.parameter not in PARAMETER_NAMES:
            raise DomainError(f"unknown sweep parameter {self.parameter!r}")
        if self.values is not None:
            vals = tuple(float(v) for v in self.values)
            if len(vals) < 2:
                raise DomainError("a sweep needs at least 2 grid values")
            if not all(math.isfinite(v) for v in vals):
                raise DomainError("sweep values must be finite")
            object.__setattr__(self, "values", vals)
        else:
            grid_values(self.lo, self.hi, self.step)

    def grid(self) -> list:
        if self.values is not None:
            return list(self.values)
        return grid_values(self.lo, self.hi, self.step)

    def params_for(self, value: float) -> ModelParameters:
        return self.base.with_(**{self.parameter: value})


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    values: tuple
    times: np.ndarray
    #: infected totals, shape (len(times), len(values))
    infected: np.ndarray
    urban: np.ndarray
    rural: np.ndarray
    mean: np.ndarray
    mse: np.ndarray


def _run_one(value, spec: SweepSpec):
    try:
        traj = integrate(spec.init, spec.params_for(value), spec.mode, spec.integration)
    except SeirmigError as exc:
        raise SweepError(f"{spec.parameter}={value!r}: {exc}", value=value) from exc
    return traj.times, traj.states[:, I_U].copy(), traj.states[:, I_R].copy()


def column_mean(x: np.ndarray) -> np.ndarray:
    """Row means, shifted by the row minimum.

    The shift keeps identical rows exact and, like ``fsum``, does not depend on
    column order.
    """
    v = x.shape[1]
    out = []
    for row in x.tolist():
        c = min(row)
        out.append(c + math.fsum(r - c for r in row) / v)
    return np.array(out)


def column_mse(x: np.ndarray, mean: np.ndarray) -> np.ndarray:
    v = x.shape[1]
    dev = (x - mean[:, None]) ** 2
    return np.array([math.fsum(row) / v for row in dev.tolist()])


def column_mse_moments(x: np.ndarray) -> np.ndarray:
    """``E[X^2] - E[X]^2`` with compensated sums; an independent route to the mse."""
    v = x.shape[1]
    out = []
    for row in x.tolist():
        m1 = math.fsum(row) / v
        m2 = math.fsum(r * r for r in row) / v
        out.append(max(0.0, m2 - m1 * m1))
    return np.array(out)


def run_sweep(spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Integrate once per grid value and reduce to mean and mse curves."""
    values = spec.grid()
    for v in values:
        try:
            spec.params_for(v)
        except DomainError as exc:
            raise SweepError(f"{spec.parameter}={v!r}: {exc}", value=v) from exc
    runs = ordered_map(functools.partial(_run_one, spec=spec), values, threads)
    times = runs[0][0]
    urban = np.column_stack([r[1] for r in runs])
    rural = np.column_stack([r[2] for r in runs])
    infected = urban + rural
    mean = column_mean(infected)
    mse = column_mse(infected, mean)
    return SweepResult(spec, tuple(values), times, infected, urban, rural, mean, mse)


def classify(
    result: SweepResult,
    peak_threshold: float = DEFAULT_PEAK_THRESHOLD,
    tail_threshold: float = DEFAULT_TAIL_THRESHOLD,
) -> str:
    """Sensitive if the spread is large at its peak or has not died out at the end.

    The peak is measured relative to ``max(1, max mean**2)``; the tail is the
    absolute mse at the last sample.
    """
    scale = max(1.0, float(np.max(result.mean)) ** 2)
    peak = float(np.max(result.mse)) / scale
    tail = float(result.mse[-1])
    return SENSITIVE if peak > peak_threshold or tail > tail_threshold else INSENSITIVE


def sweep_to_csv(result: SweepResult) -> str:
    header = ["t"] + [f"I@{v!r}" for v in result.values] + ["mean", "mse"]
    lines = [",".join(header)]
    for j, t in enumerate(result.times.tolist()):
        row = [t, *result.infected[j].tolist(), float(result.mean[j]), float(result.mse[j])]
        lines.append(",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def components_to_csv(result: SweepResult) -> str:
    """Urban and rural infected curves per grid value."""
    header = ["t"] + [f"I_u@{v!r}" for v in result.values] + [f"I_r@{v!r}" for v in result.values]
    lines = [",".join(header)]
    for j, t in enumerate(result.times.tolist()):
        row = [t, *result.urban[j].tolist(), *result.rural[j].tolist()]
        lines.append(",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def sweep_metadata(result: SweepResult, verdict: str, peak_threshold: float, tail_threshold: float) -> str:
    spec = result.spec
    scale = max(1.0, float(np.max(result.mean)) ** 2)
    pairs = [
        ("parameter", spec.parameter),
        ("lo", repr(spec.lo)),
        ("hi", repr(spec.hi)),
        ("step", repr(spec.step)),
        ("points", str(len(result.values))),
        ("incidence", str(spec.mode)),
        ("t0", repr(spec.integration.t0)),
        ("t_end", repr(spec.integration.t_end)),
        ("record_every", repr(spec.integration.record_every)),
        ("infected", "I_u+I_r"),
        ("peak_relative_mse", repr(float(np.max(result.mse)) / scale)),
        ("tail_mse", repr(float(result.mse[-1]))),
        ("peak_threshold", repr(peak_threshold)),
        ("tail_threshold", repr(tail_threshold)),
        ("classification", verdict),
    ]
    pairs += [(f"base.{k}", repr(v)) for k, v in spec.base.as_dict().items()]
    return "".join(f"{k} = {v}\n" for k, v in pairs)
