import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from seirmig.errors import DomainError, SingularityError
from seirmig.model import (
    BASELINE_INIT, BASELINE_PARAMS, DYNAMIC_N, IncidenceMode, ModelParameters, StateVector,
    boundary_inflow_check, rhs, total_population,
)

from .oracles import draw_params, exact_rhs

rates = st.floats(1e-4, 1.0)
states = st.lists(st.floats(0, 1e4), min_size=9, max_size=9)


def test_rhs_matches_exact_transcription():
    rng = np.random.default_rng(1)
    for _ in range(200):
        p = draw_params(rng)
        y = rng.uniform(0, 1000, size=9)
        for n in (None, float(y.sum()) * 1.3):
            mode = DYNAMIC_N if n is None else IncidenceMode.fixed(n)
            ref = np.array([float(v) for v in exact_rhs(y, p, n)])
            got = rhs(y, p, mode)
            assert np.allclose(got, ref, rtol=1e-12, atol=1e-12 * p.b1)


def test_zero_state_has_only_birth_inflow():
    d = rhs(np.zeros(9), BASELINE_PARAMS)
    assert d[0] == BASELINE_PARAMS.b1
    assert np.all(d[1:] == 0)


def test_zero_population_with_infection_is_singular():
    with pytest.raises(SingularityError):
        rhs([1, 0, 1, 0, -2, 0, 0, 0, 0], BASELINE_PARAMS)
    with pytest.raises(DomainError):
        IncidenceMode.fixed(0.0)


def test_baseline_derivative_at_initial_state():
    # hand-evaluated first component at the published initial condition
    y = BASELINE_INIT
    n = 520.0
    expected = 350 - 0.00028 * 100 * 50 / n - (0.0062 + 0.000182) * 100
    assert rhs(y, BASELINE_PARAMS)[0] == pytest.approx(expected, rel=1e-14)
    assert total_population(y) == n


@given(states, rates, rates, rates, rates, rates, rates, st.floats(0, 1))
def test_boundary_inflow_is_non_negative(y, beta, mu, g, d1, k, m, p):
    params = ModelParameters(b1=100.0, beta=beta, mu_c=mu, gamma=g, d1=d1, k=k, m=m, p=p)
    y = [0.0 if i % 2 else v for i, v in enumerate(y)]
    if sum(y) == 0:
        return
    for _, d in boundary_inflow_check(y, params):
        assert d >= 0


@given(states.filter(lambda y: sum(y) > 0))
def test_population_balance(y):
    # migration only moves people; Q_r leaves at d1 instead of mu_c
    p = BASELINE_PARAMS
    d = rhs(y, p)
    expected = p.b1 - p.mu_c * (sum(y) - y[4]) - p.d1 * y[4]
    assert math.isclose(math.fsum(d), expected, rel_tol=1e-9, abs_tol=1e-9 * (p.b1 + sum(y)))


@pytest.mark.parametrize("field,value", [("beta", -1.0), ("p", 1.5), ("mu_c", 0.0), ("k", math.nan)])
def test_parameter_validation(field, value):
    with pytest.raises(DomainError):
        BASELINE_PARAMS.with_(**{field: value})


def test_state_validation():
    with pytest.raises(DomainError):
        StateVector(s_u=math.inf)
    with pytest.raises(DomainError):
        StateVector.from_array([1, 2, 3])
    with pytest.raises(DomainError):
        rhs([1.0] * 8, BASELINE_PARAMS)


def test_incidence_mode_validation():
    with pytest.raises(DomainError):
        IncidenceMode("dynamic_n", 5.0)
    with pytest.raises(DomainError):
        IncidenceMode("other")
    assert str(IncidenceMode.fixed(2)) == "fixed_n(2.0)"
