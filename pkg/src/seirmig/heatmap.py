"""R0 over a two-parameter grid, split into the R0 < 1 and R0 > 1 regions.

Two export formats:

long
    header ``x,y,r0,region``, one line per cell, x varying fastest.
matrix
    first line ``<y name>\\<x name>,x_1,...,x_nx``; then one line per y value:
    ``y_j,r0(x_1, y_j),...,r0(x_nx, y_j)``.

Numbers are written with ``repr``; degenerate cells have r0 ``nan`` and
region ``degenerate``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateParameterError, DomainError, GridError
from .model import BASELINE_PARAMS, PARAMETER_NAMES, ModelParameters
from .parallel import ordered_map
from .reproduction import DfeWeights, dfe_weights_from_equilibrium, next_generation, spectral_radius

DFE_STABLE = "dfe_stable"
ENDEMIC = "endemic"
DEGENERATE = "degenerate"
DEFAULT_COUNT = 101

#: Axis ranges per parameter, taken from the outer ends of the sweep intervals.
DEFAULT_AXIS_RANGES = {
    "b1": (345.0, 365.0),
    "m": (0.0, 0.1),
    "beta": (0.0, 0.1),
    "k": (0.0, 2.0),
    "d1": (0.0, 0.5),
    "mu_c": (0.1, 1.0),
    "gamma": (0.0, 1.0),
    "p": (0.0, 1.0),
}
#: Parameter pairs shown as heat plots.
DEFAULT_PAIRS = (("mu_c", "k"), ("beta", "m"), ("beta", "mu_c"))


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    count: int = DEFAULT_COUNT

    def __post_init__(self):
        if self.name not in PARAMETER_NAMES:
            raise DomainError(f"unknown grid parameter {self.name!r}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise DomainError(f"axis {self.name} needs finite lo < hi")
        if self.count < 2:
            raise DomainError(f"axis {self.name} needs at least 2 points")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class GridSpec:
    x: Axis
    y: Axis
    base: ModelParameters = BASELINE_PARAMS
    #: ``None`` recomputes the disease-free fractions in every cell
    weights: DfeWeights | None = None

    def __post_init__(self):
        if self.x.name == self.y.name:
            raise DomainError("grid axes must be different parameters")


@dataclass(frozen=True)
class HeatGrid:
    spec: GridSpec
    x: np.ndarray
    y: np.ndarray
    #: shape (len(y), len(x))
    r0: np.ndarray
    region: np.ndarray

    def region_counts(self) -> dict:
        names, counts = np.unique(self.region, return_counts=True)
        return {str(n): int(c) for n, c in zip(names, counts)}


def cell_r0(params: ModelParameters, weights: DfeWeights | None) -> float:
    w = dfe_weights_from_equilibrium(params) if weights is None else weights
    return spectral_radius(next_generation(params, w).k_matrix)


def _row(y_value: float, spec: GridSpec, xs) -> list:
    out = []
    for x_value in xs:
        try:
            params = spec.base.with_(**{spec.x.name: x_value, spec.y.name: y_value})
            out.append(cell_r0(params, spec.weights))
        except (DomainError, DegenerateParameterError):
            out.append(math.nan)
    return out


def region_of(r0: float) -> str:
    if math.isnan(r0):
        return DEGENERATE
    return DFE_STABLE if r0 < 1 else ENDEMIC


def compute_grid(spec: GridSpec, threads: int = 1) -> HeatGrid:
    xs = spec.x.values()
    ys = spec.y.values()
    rows = ordered_map(functools.partial(_row, spec=spec, xs=xs.tolist()), ys.tolist(), threads)
    r0 = np.array(rows, dtype=float)
    if np.all(np.isnan(r0)):
        raise GridError("every grid cell has degenerate parameters")
    region = np.vectorize(region_of, otypes=[object])(r0).astype(str)
    return HeatGrid(spec, xs, ys, r0, region)


def grid_to_long_csv(grid: HeatGrid) -> str:
    lines = ["x,y,r0,region"]
    for j, y in enumerate(grid.y.tolist()):
        for i, x in enumerate(grid.x.tolist()):
            lines.append(f"{x!r},{y!r},{float(grid.r0[j, i])!r},{grid.region[j, i]}")
    return "\n".join(lines) + "\n"


def grid_to_matrix_csv(grid: HeatGrid) -> str:
    head = f"{grid.spec.y.name}\\{grid.spec.x.name}," + ",".join(repr(x) for x in grid.x.tolist())
    lines = [head]
    for j, y in enumerate(grid.y.tolist()):
        lines.append(",".join([repr(y)] + [repr(float(v)) for v in grid.r0[j]]))
    return "\n".join(lines) + "\n"
