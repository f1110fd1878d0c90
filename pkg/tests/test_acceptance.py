"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line in ``RESULTS``; ``conftest.py`` prints
them at the end of the session. Run standalone with
``python3 -m pytest tests/test_acceptance.py -rA``.
"""
import filecmp
import time
from pathlib import Path

import numpy as np
import pytest

from seirmig.cli import COMMANDS, main
from seirmig.effectiveness import (
    EfficacyCombination, NO_INTERVENTION, builtin_combinations, effectiveness_table,
)
from seirmig.equilibria import (
    dfe_state, eigenvalues, infected_cubic, jacobian, residual_norm, search_infected_equilibria,
    stability_class,
)
from seirmig.integrator import IntegrationSpec, RK4Fixed, RK45Adaptive, convergence_order, integrate
from seirmig.model import BASELINE_INIT, BASELINE_PARAMS, DYNAMIC_N, IncidenceMode, rhs
from seirmig.reproduction import (
    dfe_weights_from_equilibrium, next_generation, r0_closed_form, r0_numeric, spectral_radius,
)
from seirmig.sensitivity import (
    INSENSITIVE, SweepSpec, classify, column_mean, column_mse, run_sweep,
)

from .make_golden import GOLDEN, default_config
from .oracles import draw_params, fd_jacobian

RESULTS = []


def record(number, ok, detail):
    RESULTS.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_01_r0_closed_form_vs_spectral_radius():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst, checked = 0.0, 0
    for _ in range(1000):
        p = draw_params(rng)
        w = dfe_weights_from_equilibrium(p)
        closed = r0_closed_form(p, w)
        if not closed.urban_dominant:
            continue
        numeric = spectral_radius(next_generation(p, w).k_matrix)
        worst = max(worst, abs(closed.value - numeric) / (1 + closed.value))
        checked += 1
    elapsed = time.perf_counter() - start
    record(1, worst < 1e-10 and elapsed < 5,
           f"{checked} urban-dominant draws, max |diff|/(1+r0) = {worst:.2e}, {elapsed:.2f} s")


def test_criterion_02_disease_free_residual():
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(200):
        p = draw_params(rng)
        worst = max(worst, float(np.linalg.norm(rhs(dfe_state(p), p))) / p.b1)
    record(2, worst < 1e-9, f"max ||rhs(E0)|| / b1 = {worst:.2e}")


def test_criterion_03_threshold_sign():
    rng = np.random.default_rng(103)
    wrong = []
    for i in range(100):
        p = draw_params(rng)
        w = dfe_weights_from_equilibrium(p)
        below = i < 50
        target = rng.uniform(0.05, 0.9) if below else rng.uniform(1.1, 10.0)
        q = p.with_(beta=target / r0_numeric(p.with_(beta=1.0), w))
        r0 = r0_numeric(q, w)
        e0 = dfe_state(q)
        mode = IncidenceMode.fixed(e0.s_u + e0.s_r + e0.q_r)
        cls = stability_class(eigenvalues(jacobian(e0, q, mode)))
        if (below and not (r0 < 0.9 and cls == "locally_stable")) or (
                not below and not (r0 > 1.1 and cls == "unstable")):
            wrong.append((i, r0, cls))
    record(3, not wrong, f"50 draws below 0.9 and 50 above 1.1, {len(wrong)} misclassified")


def test_criterion_04_positivity_and_bound():
    p = BASELINE_PARAMS
    rng = np.random.default_rng(104)
    spec = IntegrationSpec(0.0, 2000.0, RK45Adaptive(1e-9, 1e-9, 5.0), record_every=5.0)
    start = time.perf_counter()
    low, worst = np.inf, 0.0
    for _ in range(100):
        x0 = rng.uniform(0, 1000, size=9) * (rng.uniform(size=9) < 0.8)
        traj = integrate(x0, p, DYNAMIC_N, spec)
        low = min(low, float(traj.states.min()))
        bound = max(float(x0.sum()), p.b1 / min(p.mu_c, p.d1))
        worst = max(worst, float(traj.totals().max()) / bound)
    elapsed = time.perf_counter() - start
    record(4, low >= -1e-8 and worst <= 1 + 1e-6 and elapsed < 30,
           f"min component {low:.2e}, max N/bound {worst:.6f}, {elapsed:.1f} s")


def test_criterion_05_integrator_order_and_cross_check():
    order = convergence_order(BASELINE_INIT, BASELINE_PARAMS, DYNAMIC_N, base_step=0.5, t_end=200.0)
    tight = integrate(BASELINE_INIT, BASELINE_PARAMS,
                      spec=IntegrationSpec(0, 500, RK45Adaptive(1e-12, 1e-12, 1.0), 10)).states
    fine = integrate(BASELINE_INIT, BASELINE_PARAMS,
                     spec=IntegrationSpec(0, 500, RK4Fixed(0.05), 10)).states
    rel = float(np.max(np.abs(tight - fine) / np.maximum(np.abs(fine), 1.0)))
    record(5, 3.8 <= order <= 4.2 and rel < 1e-6,
           f"RK4 order {order:.3f}, adaptive vs RK4(h=0.05) max relative gap {rel:.2e}")


def test_criterion_06_jacobian_vs_finite_differences():
    rng = np.random.default_rng(106)
    worst = 0.0
    for i in range(100):
        p = draw_params(rng)
        y = rng.uniform(0, 1000, size=9)
        n = None if i % 2 else float(rng.uniform(0.5, 2.0) * y.sum())
        mode = DYNAMIC_N if n is None else IncidenceMode.fixed(n)
        ref = fd_jacobian(y, p, n)
        got = jacobian(y, p, mode)
        nz = ref != 0
        if np.any(got[~nz] != 0):
            worst = np.inf
            break
        worst = max(worst, float(np.max(np.abs(got[nz] - ref[nz]) / np.abs(ref[nz]))))
    record(6, worst < 1e-6, f"100 states, max relative entry error {worst:.2e}")


@pytest.mark.xfail(strict=True, reason=(
    "the published cubic is not implied by the equilibrium equations; the exact fixed-N "
    "relation for I_r is a quadratic, so every infected equilibrium logs a cubic mismatch"))
def test_criterion_07_descartes_and_cubic_roots():
    rng = np.random.default_rng(107)
    sign_bad, residual_bad, mismatch_draws, infected_draws = 0, 0, 0, 0
    draws = 500
    for _ in range(draws):
        p = draw_params(rng)
        e0 = dfe_state(p)
        n = e0.s_u + e0.s_r + e0.q_r
        mode = IncidenceMode.fixed(n)
        search = search_infected_equilibria(p, mode)
        points = [(e0.e_u, e0.s_u)] + [(r.state.e_u, r.state.s_u) for r in search.reports]
        for e_u, s_u in points:
            cubic = infected_cubic(p, e_u, s_u, n)
            if not len(cubic.positive_roots()) <= cubic.sign_changes <= 2:
                sign_bad += 1
        mismatch = False
        for rep in search.reports:
            if not residual_norm(rep.state, p, mode) < 1e-8 * p.b1:
                residual_bad += 1
            mismatch |= any(note.startswith("cubic mismatch") for note in rep.notes)
        infected_draws += bool(search.reports)
        mismatch_draws += mismatch
    rate = mismatch_draws / draws
    record(7, sign_bad == 0 and residual_bad == 0 and rate <= 0.05,
           f"{sign_bad} sign-count violations, {residual_bad} residual failures, "
           f"{infected_draws} draws with infected equilibria, "
           f"{mismatch_draws} with a logged cubic mismatch ({100 * rate:.1f}%, limit 5%)")


# The combination table as printed; row 7's "06." is read as 0.6.
PRINTED_COMBINATIONS = """
0 0 0 0 0 0
0 0 0.3 0.3 0.3 0.3
0 0 0.3 0.6 0.3 0.6
0 0 0.6 0.6 0.6 0.6
0 0 0.9 0.6 0.9 0.6
0.3 0.3 0.3 0.3 0.3 0.3
0.3 0.3 0.6 0.3 0.6 0.3
0.3 0.3 0.6 0.6 0.6 0.6
0.3 0.3 0.9 0.6 0.9 0.6
0.6 0.6 0.3 0.3 0.3 0.3
0.6 0.6 0.6 0.3 0.6 0.3
0.6 0.6 0.6 0.6 0.6 0.6
0.6 0.6 0.9 0.6 0.9 0.6
0.9 0.9 0.3 0.3 0.3 0.3
0.9 0.9 0.6 0.3 0.6 0.3
0.9 0.9 0.6 0.6 0.6 0.6
0.9 0.9 0.9 0.6 0.9 0.6
"""


def test_criterion_08_effectiveness_invariants():
    p = BASELINE_PARAMS
    w = dfe_weights_from_equilibrium(p)
    zero = effectiveness_table(p, w, [NO_INTERVENTION])[0].pr
    rng = np.random.default_rng(108)
    monotone = 0
    for _ in range(200):
        a = rng.uniform(0, 0.9, size=6)
        b = a + rng.uniform(0, 0.05, size=6)
        b[rng.integers(6)] += rng.uniform(1e-3, 0.05)
        rows = effectiveness_table(p, w, [EfficacyCombination(*a), EfficacyCombination(*b)])
        monotone += rows[1].pr > rows[0].pr
    ranks = sorted(r.ce_rank for r in effectiveness_table(p, w))
    printed = [tuple(float(v) for v in line.split()) for line in PRINTED_COMBINATIONS.strip().splitlines()]
    table_ok = [c.values() for c in builtin_combinations()] == printed
    record(8, zero == 0.0 and monotone == 200 and ranks == list(range(1, 18)) and table_ok,
           f"pr(zero) = {zero!r}, {monotone}/200 dominated pairs strictly ordered, "
           f"ranks permutation: {ranks == list(range(1, 18))}, table reproduced: {table_ok}")


def test_criterion_09_sensitivity_engine():
    base = IntegrationSpec(0, 500, RK45Adaptive(1e-9, 1e-9, 5.0), 1)
    twin = run_sweep(SweepSpec("k", 0, 0, 1, values=(0.1961, 0.1961), integration=base))
    # Q_r only reaches the infection terms through N, so N is held fixed here;
    # a fixed step keeps the infected columns bitwise equal (an adaptive step
    # would still see Q_r through its error norm)
    fixed = IncidenceMode.fixed(520.0)
    rk4 = IntegrationSpec(0, 500, RK4Fixed(0.5), 1)
    d1_runs = [run_sweep(SweepSpec("d1", lo, hi, (hi - lo) / 10, mode=fixed, integration=rk4))
               for lo, hi in ((0.0, 0.013), (0.013, 0.5))]
    rng = np.random.default_rng(109)
    x = d1_runs[1].infected + rng.uniform(0, 1, size=d1_runs[1].infected.shape)
    perm = x[:, rng.permutation(x.shape[1])]
    invariant = (np.array_equal(column_mean(x), column_mean(perm))
                 and np.array_equal(column_mse(x, column_mean(x)), column_mse(perm, column_mean(perm))))
    zero_twin = bool(np.all(twin.mse == 0.0))
    zero_d1 = all(bool(np.all(r.mse == 0.0)) for r in d1_runs)
    verdicts = [classify(r) for r in d1_runs]
    record(9, zero_twin and zero_d1 and invariant and verdicts == [INSENSITIVE] * 2,
           f"twin sweep mse == 0: {zero_twin}, d1 sweeps mse == 0: {zero_d1}, "
           f"permutation invariant: {invariant}, d1 verdicts: {', '.join(verdicts)}")


def _differences(left: Path, right: Path) -> list:
    cmp = filecmp.dircmp(left, right)
    bad = cmp.left_only + cmp.right_only
    _, mismatch, errors = filecmp.cmpfiles(left, right, cmp.common_files, shallow=False)
    return bad + mismatch + errors


def test_criterion_10_golden_files(tmp_path, capsys):
    problems = []
    for cmd in COMMANDS:
        for threads in (1, 2):
            out = tmp_path / f"{cmd}-{threads}"
            code = main([cmd, "--config", default_config(), "--out", str(out), "--threads", str(threads)])
            if code != 0:
                problems.append(f"{cmd} threads={threads} exited {code}")
                continue
            problems += [f"{cmd}/{name} threads={threads}" for name in _differences(GOLDEN / cmd, out)]
    capsys.readouterr()
    record(10, not problems,
           f"{len(COMMANDS)} commands x 2 thread counts vs pinned outputs, "
           f"{len(problems)} differences{': ' + ', '.join(problems) if problems else ''}")
