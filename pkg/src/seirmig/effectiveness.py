"""Comparative effectiveness of vaccination, antiviral and immunotherapy combinations.

Vaccination scales the incubation rate by ``(1 - eps11)(1 - eps12)``;
antivirals and immunotherapy scale the recovery rate by
``(1 + eps21)(1 + eps22)(1 + eps31)(1 + eps32)``. Each combination is scored
by the percentage reduction (PR) of R0 and ranked by PR, rank 1 being the
smallest reduction.
"""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

from .errors import DomainError, UndefinedReductionError
from .model import ModelParameters
from .reproduction import DfeWeights, effective_r0, modified_rates, r0_closed_form

EFFICACY_NAMES = ("eps11", "eps12", "eps21", "eps22", "eps31", "eps32")
CSV_HEADER = "id,eps11,eps12,eps21,eps22,eps31,eps32,r_e,pr_percent,ce_rank"


@dataclass(frozen=True)
class EfficacyCombination:
    eps11: float = 0.0
    eps12: float = 0.0
    eps21: float = 0.0
    eps22: float = 0.0
    eps31: float = 0.0
    eps32: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = float(getattr(self, f.name))
            if not (0.0 <= v < 1.0):
                raise DomainError(f"{f.name} must lie in [0, 1), got {v!r}")
            object.__setattr__(self, f.name, v)

    def values(self) -> tuple:
        return astuple(self)

    def dominated_by(self, other: "EfficacyCombination") -> bool:
        """True if ``other`` is at least as large everywhere and larger somewhere."""
        a, b = self.values(), other.values()
        return all(x <= y for x, y in zip(a, b)) and a != b


NO_INTERVENTION = EfficacyCombination()

# Rows of the combination table. Row 7 prints its eps21 as "06."; read as 0.6.
_BUILTIN = (
    (0, 0, 0, 0, 0, 0),
    (0, 0, 0.3, 0.3, 0.3, 0.3),
    (0, 0, 0.3, 0.6, 0.3, 0.6),
    (0, 0, 0.6, 0.6, 0.6, 0.6),
    (0, 0, 0.9, 0.6, 0.9, 0.6),
    (0.3, 0.3, 0.3, 0.3, 0.3, 0.3),
    (0.3, 0.3, 0.6, 0.3, 0.6, 0.3),
    (0.3, 0.3, 0.6, 0.6, 0.6, 0.6),
    (0.3, 0.3, 0.9, 0.6, 0.9, 0.6),
    (0.6, 0.6, 0.3, 0.3, 0.3, 0.3),
    (0.6, 0.6, 0.6, 0.3, 0.6, 0.3),
    (0.6, 0.6, 0.6, 0.6, 0.6, 0.6),
    (0.6, 0.6, 0.9, 0.6, 0.9, 0.6),
    (0.9, 0.9, 0.3, 0.3, 0.3, 0.3),
    (0.9, 0.9, 0.6, 0.3, 0.6, 0.3),
    (0.9, 0.9, 0.6, 0.6, 0.6, 0.6),
    (0.9, 0.9, 0.9, 0.6, 0.9, 0.6),
)

#: Reported percentage reductions and CE ranks for the builtin rows, kept as
#: reference data for the discrepancy report.
#: Percentages are kept as printed so their precision is known.
REPORTED_PR = ("0", "4.00", "6.82", "10.90", "15.35", "7.70", "10.50", "14.4", "18.7",
               "20.35", "22.75", "26.13", "29.83", "80.35", "81.00", "81.77", "82.68")
REPORTED_CE = (1, 2, 3, 4, 8, 4, 6, 7, 9, 10, 11, 12, 13, 14, 15, 16, 17)


def builtin_combinations() -> list:
    return [EfficacyCombination(*row) for row in _BUILTIN]


@dataclass(frozen=True)
class EffectivenessRow:
    id: int
    combination: EfficacyCombination
    r_e: float
    pr: float
    ce_rank: int

    def to_csv(self) -> str:
        cells = [str(self.id)]
        cells += [repr(v) for v in self.combination.values()]
        cells += [repr(self.r_e), repr(self.pr), str(self.ce_rank)]
        return ",".join(cells)


def percentage_reduction(r0: float, r_e: float) -> float:
    if r0 == 0:
        raise UndefinedReductionError("R0 is zero; percentage reduction is undefined")
    return 100.0 * (r0 - r_e) / r0


def effectiveness_table(
    params: ModelParameters, weights: DfeWeights, combos=None
) -> list:
    """Score every combination; ids are 1-based positions in ``combos``."""
    combos = builtin_combinations() if combos is None else list(combos)
    r0 = r0_closed_form(params, weights).value
    if r0 == 0:
        raise UndefinedReductionError("R0 is zero; percentage reduction is undefined")
    scored = []
    for i, combo in enumerate(combos, start=1):
        r_e = effective_r0(params, weights, combo)
        scored.append((i, combo, r_e, percentage_reduction(r0, r_e)))
    order = sorted(scored, key=lambda row: (row[3], row[0]))
    rank = {row[0]: pos for pos, row in enumerate(order, start=1)}
    return [EffectivenessRow(i, c, r_e, pr, rank[i]) for i, c, r_e, pr in scored]


def table_to_csv(rows) -> str:
    return "\n".join([CSV_HEADER] + [r.to_csv() for r in rows]) + "\n"


def parse_combinations(text: str) -> list:
    """Read combinations from delimited text, one row of six efficacies per line.

    A header line starting with ``eps11`` or ``id`` and blank or ``#`` lines
    are skipped. A leading id column is allowed and ignored, and so are the
    trailing result columns of :func:`table_to_csv` output.
    """
    combos = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#") or line.startswith(("eps11", "id")):
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) in (7, 10):
            cells = cells[1:7]
        if len(cells) != 6:
            raise DomainError(f"line {lineno}: expected 6 efficacies, got {len(cells)}")
        try:
            values = [float(c) for c in cells]
        except ValueError as exc:
            raise DomainError(f"line {lineno}: {exc}") from exc
        if not all(math.isfinite(v) for v in values):
            raise DomainError(f"line {lineno}: non-finite efficacy")
        combos.append(EfficacyCombination(*values))
    if not combos:
        raise DomainError("no combinations found")
    return combos


def intervened_params(params: ModelParameters, eff: EfficacyCombination) -> ModelParameters:
    """Parameters with the intervention applied to the dynamics as well.

    The model has one incubation and one recovery rate, so the urban and rural
    factors are applied jointly, matching how they enter R_E.
    """
    k, gamma = modified_rates(params, eff)
    return params.with_(k=k, gamma=gamma)
