from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from seirmig.effectiveness import (
    CSV_HEADER, EfficacyCombination, builtin_combinations, effectiveness_table, intervened_params,
    parse_combinations, percentage_reduction, table_to_csv,
)
from seirmig.errors import DomainError, UndefinedReductionError
from seirmig.model import BASELINE_PARAMS
from seirmig.reproduction import dfe_weights_from_equilibrium

from .oracles import exact_effective_r0

W0 = dfe_weights_from_equilibrium(BASELINE_PARAMS)
ROWS = effectiveness_table(BASELINE_PARAMS, W0)


def _exact_pr(eps):
    r0 = exact_effective_r0(BASELINE_PARAMS, Fraction(W0.p1), Fraction(W0.p2), (0,) * 6)
    re = exact_effective_r0(BASELINE_PARAMS, Fraction(W0.p1), Fraction(W0.p2), eps)
    return 100 * (r0 - re) / r0


def test_builtin_table_fields():
    combos = builtin_combinations()
    assert len(combos) == 17
    assert combos[0].values() == (0.0,) * 6
    assert combos[5].values() == (0.3,) * 6
    assert combos[6].values() == (0.3, 0.3, 0.6, 0.3, 0.6, 0.3)
    assert combos[16].values() == (0.9, 0.9, 0.9, 0.6, 0.9, 0.6)


def test_no_intervention_row():
    assert ROWS[0].pr == 0.0
    assert ROWS[0].ce_rank == 1


@pytest.mark.parametrize("row", [1, 5, 16])
def test_pr_matches_exact_arithmetic(row):
    eps = [Fraction(e) for e in builtin_combinations()[row].values()]
    assert ROWS[row].pr == pytest.approx(float(_exact_pr(eps)), rel=1e-12)


def test_antiviral_only_row_value():
    # recovery boosted by 1.3**4 shrinks R0 by (gamma+mu)/(1.3**4 gamma+mu)
    g, mu = BASELINE_PARAMS.gamma, BASELINE_PARAMS.mu_c
    assert ROWS[1].pr == pytest.approx(100 * (1 - (g + mu) / (1.3**4 * g + mu)), rel=1e-12)
    assert ROWS[1].pr == pytest.approx(63.07, abs=0.005)


def test_ranks_are_a_permutation():
    assert sorted(r.ce_rank for r in ROWS) == list(range(1, 18))
    by_rank = sorted(ROWS, key=lambda r: r.ce_rank)
    assert all(a.pr <= b.pr for a, b in zip(by_rank, by_rank[1:]))


def test_ties_rank_by_position():
    same = [EfficacyCombination(eps11=0.3)] * 3
    rows = effectiveness_table(BASELINE_PARAMS, W0, same)
    assert [r.ce_rank for r in rows] == [1, 2, 3]


eps = st.floats(0, 0.9)


@given(st.lists(eps, min_size=6, max_size=6), st.lists(st.floats(0, 0.05), min_size=6, max_size=6),
       st.integers(0, 5))
def test_dominance_increases_reduction(a, bump, j):
    b = [x + d for x, d in zip(a, bump)]
    b[j] += 0.01
    ca, cb = EfficacyCombination(*a), EfficacyCombination(*b)
    assert ca.dominated_by(cb)
    rows = effectiveness_table(BASELINE_PARAMS, W0, [ca, cb])
    assert rows[1].pr > rows[0].pr


def test_zero_r0_is_undefined():
    with pytest.raises(UndefinedReductionError):
        effectiveness_table(BASELINE_PARAMS.with_(beta=0.0), W0)
    with pytest.raises(UndefinedReductionError):
        percentage_reduction(0.0, 0.0)


def test_efficacy_domain():
    with pytest.raises(DomainError):
        EfficacyCombination(eps11=1.0)
    with pytest.raises(DomainError):
        EfficacyCombination(eps22=-0.1)


def test_csv_round_trip():
    text = table_to_csv(ROWS)
    assert text.splitlines()[0] == CSV_HEADER
    back = parse_combinations(text)
    assert back == builtin_combinations()


def test_parse_rejects_malformed():
    with pytest.raises(DomainError):
        parse_combinations("0.1,0.2\n")
    with pytest.raises(DomainError):
        parse_combinations("# nothing\n")
    with pytest.raises(DomainError):
        parse_combinations("0,0,0,0,0,nan\n")


def test_intervened_params_scale_rates():
    q = intervened_params(BASELINE_PARAMS, EfficacyCombination(0.5, 0, 0.1, 0, 0, 0))
    assert q.k == pytest.approx(BASELINE_PARAMS.k * 0.5)
    assert q.gamma == pytest.approx(BASELINE_PARAMS.gamma * 1.1)
    assert np.isclose(q.beta, BASELINE_PARAMS.beta)
