import numpy as np
import pytest

from seirmig.errors import DomainError, PositivityError, StiffnessError
from seirmig.integrator import IntegrationSpec, RK4Fixed, RK45Adaptive, convergence_order, integrate
from seirmig.model import BASELINE_INIT, BASELINE_PARAMS, IncidenceMode, derivatives

from .oracles import rk4_step

FAST = BASELINE_PARAMS.with_(beta=0.5, k=0.5, gamma=0.3, mu_c=0.05, m=0.05, d1=0.2)


def test_rk4_matches_reference_stepper():
    mode = IncidenceMode.dynamic()
    f = lambda y: np.array(derivatives(y.tolist(), FAST, mode))  # noqa: E731
    y = BASELINE_INIT.as_array()
    for _ in range(40):
        y = rk4_step(f, y, 0.25)
    traj = integrate(BASELINE_INIT, FAST, mode, IntegrationSpec(0, 10, RK4Fixed(0.25), 10))
    assert np.allclose(traj.final, y, rtol=1e-13, atol=0)


@pytest.mark.parametrize("mode", [IncidenceMode.dynamic(), IncidenceMode.fixed(2000.0)])
def test_rk4_convergence_order(mode):
    order = convergence_order(BASELINE_INIT, FAST, mode, base_step=0.125, t_end=50.0)
    assert 3.8 <= order <= 4.2


def test_adaptive_agrees_with_fine_rk4():
    spec_a = IntegrationSpec(0, 100, RK45Adaptive(1e-12, 1e-12, 1.0), 10)
    spec_f = IntegrationSpec(0, 100, RK4Fixed(0.01), 10)
    a = integrate(BASELINE_INIT, FAST, spec=spec_a).states
    f = integrate(BASELINE_INIT, FAST, spec=spec_f).states
    assert np.max(np.abs(a - f) / np.maximum(np.abs(f), 1.0)) < 1e-6


def test_sample_grid_includes_end_time():
    spec = IntegrationSpec(0, 10.5, RK45Adaptive(), 2)
    assert list(spec.sample_times()) == [0, 2, 4, 6, 8, 10, 10.5]
    traj = integrate(BASELINE_INIT, BASELINE_PARAMS, spec=spec)
    assert np.array_equal(traj.states[0], BASELINE_INIT.as_array())
    assert not traj.states.flags.writeable


def test_csv_layout():
    traj = integrate(BASELINE_INIT, BASELINE_PARAMS, spec=IntegrationSpec(0, 2, RK4Fixed(0.5), 1))
    lines = traj.to_csv().splitlines()
    assert lines[0] == "t,S_u,E_u,I_u,R_u,Q_r,S_r,E_r,I_r,R_r"
    assert len(lines) == 4
    assert lines[1].split(",")[:2] == ["0.0", "100.0"]


def test_negative_overshoot_raises_with_time():
    spec = IntegrationSpec(0, 100, RK4Fixed(5.0), 5)
    with pytest.raises(PositivityError) as info:
        integrate(BASELINE_INIT, BASELINE_PARAMS.with_(beta=50.0), spec=spec)
    assert info.value.t == 5


def test_step_underflow_raises():
    with pytest.raises(StiffnessError) as info:
        integrate(BASELINE_INIT, BASELINE_PARAMS.with_(d1=1e15), spec=IntegrationSpec(0, 1, RK45Adaptive(), 1))
    assert info.value.t == 0


def test_invalid_inputs():
    with pytest.raises(DomainError):
        IntegrationSpec(5, 5)
    with pytest.raises(DomainError):
        RK4Fixed(0.0)
    with pytest.raises(DomainError):
        integrate([-1.0] + [0.0] * 8, BASELINE_PARAMS)
