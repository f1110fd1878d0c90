import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from seirmig.errors import DomainError, SweepError
from seirmig.integrator import IntegrationSpec, RK4Fixed, RK45Adaptive
from seirmig.model import IncidenceMode
from seirmig.sensitivity import (
    INSENSITIVE, SENSITIVE, SweepSpec, classify, column_mean, column_mse, column_mse_moments,
    components_to_csv, grid_values, run_sweep, sweep_to_csv,
)

SHORT = IntegrationSpec(0, 100, RK45Adaptive(1e-9, 1e-9, 5.0), 1)
FIXED = IncidenceMode.fixed(520.0)

matrices = arrays(np.float64, st.tuples(st.integers(1, 20), st.integers(2, 12)),
                  elements=st.floats(0, 1e4))


def test_grid_values():
    assert grid_values(0, 0.05, 0.01) == pytest.approx([0, 0.01, 0.02, 0.03, 0.04, 0.05])
    assert grid_values(345, 355, 1)[-1] == 355
    with pytest.raises(DomainError):
        grid_values(1, 0, 0.1)


def test_identical_values_give_zero_spread():
    spec = SweepSpec("beta", 0, 0, 1, values=(0.00028, 0.00028), integration=SHORT)
    assert np.all(run_sweep(spec).mse == 0.0)


def test_quarantine_exit_rate_does_not_move_infections():
    spec = SweepSpec("d1", 0.0, 0.5, 0.05, mode=FIXED,
                     integration=IntegrationSpec(0, 500, RK4Fixed(0.5), 1))
    result = run_sweep(spec)
    assert np.all(result.mse == 0.0)
    assert classify(result) == INSENSITIVE


@given(matrices, st.randoms())
def test_mean_and_mse_ignore_column_order(x, rnd):
    perm = list(range(x.shape[1]))
    rnd.shuffle(perm)
    y = x[:, perm]
    assert np.array_equal(column_mean(x), column_mean(y))
    assert np.array_equal(column_mse(x, column_mean(x)), column_mse(y, column_mean(y)))


@given(matrices)
def test_mse_matches_moment_form(x):
    mse = column_mse(x, column_mean(x))
    alt = column_mse_moments(x)
    scale = np.maximum(column_mean(x) ** 2, 1.0)
    assert np.all(np.abs(mse - alt) <= 1e-9 * scale)


@given(arrays(np.float64, st.integers(1, 10), elements=st.floats(-1e6, 1e6)), st.integers(2, 9))
def test_identical_columns_are_exact(col, v):
    x = np.repeat(col[:, None], v, axis=1)
    assert np.array_equal(column_mean(x), col)
    assert np.all(column_mse(x, column_mean(x)) == 0.0)


def test_incubation_rate_is_sensitive():
    spec = SweepSpec("k", 0.0, 0.05, 0.01, integration=IntegrationSpec(0, 500, RK45Adaptive(1e-9, 1e-9, 5.0), 1))
    assert classify(run_sweep(spec)) == SENSITIVE


def test_birth_flux_is_insensitive():
    spec = SweepSpec("b1", 345, 355, 1, integration=IntegrationSpec(0, 500, RK45Adaptive(1e-9, 1e-9, 5.0), 1))
    assert classify(run_sweep(spec)) == INSENSITIVE


def test_failing_value_is_named():
    spec = SweepSpec("p", 0, 0, 1, values=(0.5, 1.5), integration=SHORT)
    with pytest.raises(SweepError) as info:
        run_sweep(spec)
    assert info.value.value == 1.5


def test_output_layout():
    spec = SweepSpec("k", 0.1, 0.2, 0.1, integration=IntegrationSpec(0, 2, RK4Fixed(0.5), 1))
    result = run_sweep(spec)
    assert sweep_to_csv(result).splitlines()[0] == "t,I@0.1,I@0.2,mean,mse"
    assert components_to_csv(result).splitlines()[0] == "t,I_u@0.1,I_u@0.2,I_r@0.1,I_r@0.2"
    assert len(sweep_to_csv(result).splitlines()) == 4


def test_unknown_parameter():
    with pytest.raises(DomainError):
        SweepSpec("zeta", 0, 1, 0.1)
