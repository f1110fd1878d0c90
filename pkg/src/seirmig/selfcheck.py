"""Seeded property checks runnable from the command line.

Each check returns ``(name, passed, detail)``. The draws are a smaller
version of those in the test suite so the command finishes in seconds.
"""
from __future__ import annotations

import math

import numpy as np

from .effectiveness import EfficacyCombination, builtin_combinations, effectiveness_table
from .equilibria import dfe_state, eigenvalues, jacobian, residual_norm
from .integrator import IntegrationSpec, RK45Adaptive, integrate
from .model import BASELINE_PARAMS, ModelParameters, IncidenceMode, StateVector, derivatives
from .reproduction import dfe_weights_from_equilibrium, effective_r0, r0_closed_form, r0_numeric
from .sensitivity import column_mean, column_mse, column_mse_moments


def random_parameters(rng: np.random.Generator) -> ModelParameters:
    """Rates log-uniform in [1e-4, 1], ``b1`` in [1, 1000], ``p`` uniform."""
    r = 10.0 ** rng.uniform(-4, 0, size=7)
    return ModelParameters(
        b1=float(rng.uniform(1, 1000)), beta=r[0], mu_c=r[1], gamma=r[2],
        d1=r[3], k=r[4], m=r[5], p=float(rng.uniform()),
    )


def complex_step_jacobian(state, params, mode, h=1e-30) -> np.ndarray:
    """Jacobian by complex-step differentiation of the right-hand side."""
    y = [complex(v) for v in state]
    cols = []
    for j in range(9):
        z = list(y)
        z[j] += 1j * h
        cols.append([d.imag / h for d in derivatives(z, params, mode)])
    return np.array(cols).T


def check_dfe(rng, draws):
    worst = 0.0
    for _ in range(draws):
        p = random_parameters(rng)
        worst = max(worst, residual_norm(dfe_state(p), p) / p.b1)
    return "dfe_residual", worst < 1e-9, f"max |rhs|/b1 = {worst:.3g}"


def check_r0(rng, draws):
    worst = 0.0
    for _ in range(draws):
        p = random_parameters(rng)
        w = dfe_weights_from_equilibrium(p)
        c = r0_closed_form(p, w)
        if c.urban_dominant:
            worst = max(worst, abs(c.value - r0_numeric(p, w)) / (1 + c.value))
    return "r0_closed_vs_numeric", worst < 1e-10, f"max scaled difference = {worst:.3g}"


def check_threshold(rng, draws):
    bad = 0
    for i in range(draws):
        p = random_parameters(rng)
        w = dfe_weights_from_equilibrium(p)
        base = r0_numeric(p.with_(beta=1.0), w)
        target = rng.uniform(0.1, 0.9) if i % 2 == 0 else rng.uniform(1.1, 5.0)
        q = p.with_(beta=target / base)
        e0 = dfe_state(q)
        mode = IncidenceMode.fixed(e0.s_u + e0.s_r + e0.q_r)
        top = float(np.max(eigenvalues(jacobian(e0, q, mode)).real))
        if (target < 1) != (top < 0):
            bad += 1
    return "threshold_sign", bad == 0, f"{bad} of {draws} sign mismatches"


def check_jacobian(rng, draws):
    worst = 0.0
    for _ in range(draws):
        p = random_parameters(rng)
        x = rng.uniform(0, 1000, size=9)
        mode = IncidenceMode.dynamic() if rng.uniform() < 0.5 else IncidenceMode.fixed(float(x.sum()))
        ref = complex_step_jacobian(x, p, mode)
        got = jacobian(x, p, mode)
        err = np.abs(got - ref) / np.maximum(np.abs(ref), 1e-300)
        err[(ref == 0) & (got == 0)] = 0.0
        worst = max(worst, float(err.max()))
    return "jacobian_vs_complex_step", worst < 1e-6, f"max relative error = {worst:.3g}"


def check_effectiveness(rng, draws):
    w = dfe_weights_from_equilibrium(BASELINE_PARAMS)
    rows = effectiveness_table(BASELINE_PARAMS, w, builtin_combinations())
    ok = rows[0].pr == 0.0 and sorted(r.ce_rank for r in rows) == list(range(1, 18))
    for _ in range(draws):
        a = rng.uniform(0, 0.9, size=6)
        b = a + rng.uniform(0, 0.05, size=6)
        b[rng.integers(6)] += 0.01
        ca, cb = EfficacyCombination(*a), EfficacyCombination(*b)
        ok &= effective_r0(BASELINE_PARAMS, w, cb) < effective_r0(BASELINE_PARAMS, w, ca)
    return "effectiveness_invariants", bool(ok), "zero combo, rank permutation, dominance"


def check_mse(rng, draws):
    worst = 0.0
    invariant = True
    for _ in range(draws):
        x = rng.uniform(0, 100, size=(20, int(rng.integers(2, 12))))
        mean = column_mean(x)
        mse = column_mse(x, mean)
        alt = column_mse_moments(x)
        worst = max(worst, float(np.max(np.abs(mse - alt) / np.maximum(np.abs(mse), 1e-12))))
        perm = x[:, rng.permutation(x.shape[1])]
        invariant &= np.array_equal(column_mean(perm), mean) and np.array_equal(column_mse(perm, column_mean(perm)), mse)
    return "mse_identity_and_permutation", worst < 1e-9 and invariant, f"max relative gap = {worst:.3g}"


def check_positivity(rng, draws):
    spec = IntegrationSpec(0.0, 2000.0, RK45Adaptive(1e-9, 1e-9, 5.0), record_every=10.0)
    p = BASELINE_PARAMS
    low, worst_ratio = math.inf, 0.0
    for _ in range(draws):
        x0 = StateVector.from_array(rng.uniform(0, 1000, size=9))
        traj = integrate(x0, p, spec=spec)
        low = min(low, float(traj.states.min()))
        bound = max(sum(x0), p.b1 / min(p.mu_c, p.d1))
        worst_ratio = max(worst_ratio, float(traj.totals().max()) / bound)
    ok = low >= -1e-8 and worst_ratio <= 1 + 1e-6
    return "positivity_and_bound", ok, f"min component {low:.3g}, max N/bound {worst_ratio:.6f}"


def run_selfcheck(seed: int = 42, draws: int = 50) -> list:
    rng = np.random.default_rng(seed)
    checks = (check_dfe, check_r0, check_threshold, check_jacobian, check_effectiveness, check_mse)
    results = [c(rng, draws) for c in checks]
    results.append(check_positivity(rng, max(1, draws // 10)))
    return results


def selfcheck_text(results) -> str:
    return "".join(f"{name} = {'pass' if ok else 'fail'} ({detail})\n" for name, ok, detail in results)
