import math

import numpy as np
import pytest

from proxkl.oracle import BoxSet, SmoothOracle, make_quadratic, make_quartic
from proxkl.problems import lasso_instance
from proxkl.prox import NonsmoothKind, make_nonsmooth, subdiff_dist_l1
from proxkl.solver import (SolverConfig, Status, StepsizeOverflow, backtracking_step,
                           initial_gamma, solve, stationarity_residual)


def zero(n):
    return make_nonsmooth(NonsmoothKind.zero(), n)


def test_config_validation():
    for bad in ({"tau": 1.0}, {"delta": 0.0}, {"delta": 1.0}, {"gamma_min": 0.0},
                {"gamma_min": 10.0, "gamma_max": 1.0}, {"gamma_cap": 1e6},
                {"eps_tol": 0.0}, {"max_iter": 0}, {"gamma0_rule": "fixed"}):
        with pytest.raises(ValueError):
            SolverConfig(**bad)
    cfg = SolverConfig()
    assert (cfg.tau, cfg.delta, cfg.gamma_min, cfg.gamma_max) == (2.0, 1e-4, 1e-6, 1e6)
    assert (cfg.gamma_cap, cfg.eps_tol, cfg.max_iter, cfg.max_inner) == (1e14, 1e-8, 100_000, 60)


def test_initial_gamma_examples():
    cfg = SolverConfig()
    Q = 3.0 * np.eye(4)
    rng = np.random.default_rng(0)
    x0, x1 = rng.normal(size=(2, 4))
    assert initial_gamma(x0, Q @ x0, x1, Q @ x1, 1.0, cfg) == pytest.approx(3.0, rel=1e-14)
    assert initial_gamma(x1, Q @ x1, x1, Q @ x1, 0.7, cfg) == 0.7
    assert initial_gamma(None, None, x1, Q @ x1, 0.7, cfg) == 0.7
    big = 1e9 * np.eye(4)
    assert initial_gamma(x0, big @ x0, x1, big @ x1, 1.0, cfg) == 1e6
    # negative curvature falls back
    assert initial_gamma(x0, -x0, x1, -x1, 2.0, cfg) == 2.0
    # the floor raises the estimate before clamping
    assert initial_gamma(x0, Q @ x0, x1, Q @ x1, 1.0, cfg, floor=5.0) == 5.0


def test_backtracking_examples():
    f = make_quadratic([[1.0]], [0.0])
    cfg = SolverConfig(delta=0.9)
    y, gamma, i = backtracking_step(np.array([1.0]), 1.0, f, zero(1), cfg)
    assert (y[0], gamma, i) == (0.0, 1.0, 0)

    g = make_quartic(1.0, 1)
    cfg = SolverConfig(delta=0.1)
    y, gamma, i = backtracking_step(np.array([2.0]), 1.0, g, zero(1), cfg)
    assert (y[0], gamma, i) == (0.0, 4.0, 2)


def test_backtracking_fixed_point():
    spec, x_star = lasso_instance()
    f, phi = spec.build()
    gamma0 = 2.0 * f.lipschitz_hint
    x = x_star
    for _ in range(10000):
        y = phi.prox(x - f.grad(x) / gamma0, gamma0)
        if np.array_equal(y, x):
            break
        x = y
    assert np.array_equal(phi.prox(x - f.grad(x) / gamma0, gamma0), x)
    y, gamma, i = backtracking_step(x, gamma0, f, phi, SolverConfig())
    assert np.array_equal(y, x) and gamma == gamma0 and i == 0


def test_backtracking_overflow():
    # decrease test can never hold for a gradient that lies about f
    f = SmoothOracle(1, lambda x: float(x[0]), lambda x: -np.ones(1))
    with pytest.raises(StepsizeOverflow):
        backtracking_step(np.array([0.0]), 1.0, f, zero(1), SolverConfig(max_inner=5))
    with pytest.raises(StepsizeOverflow, match="gamma_cap"):
        backtracking_step(np.array([0.0]), 1.0, f, zero(1),
                          SolverConfig(gamma_max=10.0, gamma_cap=100.0))


def test_solve_one_dimensional_lasso():
    f = make_quadratic([[1.0]], [-2.0])    # (x - 2)^2 / 2 up to a constant
    phi = make_nonsmooth(NonsmoothKind.l1(1.0), 1)
    r = solve(f, phi, np.array([5.0]))
    assert r.status == Status.CONVERGED
    assert r.final_x[0] == pytest.approx(1.0, abs=1e-8)
    assert r.final_psi + 2.0 == pytest.approx(1.5, abs=1e-12)
    assert stationarity_residual(np.array([1.0]), f, phi) == 0.0
    assert subdiff_dist_l1(r.final_x, -f.grad(r.final_x), 1.0) <= 10 * 1e-8


def test_solve_box():
    f = make_quadratic([[1.0]], [3.0])
    phi = make_nonsmooth(NonsmoothKind.box_indicator(BoxSet([0.0], [1.0])), 1)
    r = solve(f, phi, np.array([0.5]))
    assert r.status == Status.CONVERGED
    assert r.final_x[0] == 0.0


def test_solve_invalid_start():
    f = make_quadratic([[1.0]], [3.0])
    phi = make_nonsmooth(NonsmoothKind.box_indicator(BoxSet([0.0], [1.0])), 1)
    r = solve(f, phi, np.array([2.0]))
    assert r.status == Status.INVALID_START
    assert r.trace == [] and r.status.is_error
    with pytest.raises(ValueError):
        solve(f, phi, np.zeros(3))


def test_solve_non_finite():
    f = SmoothOracle(1, lambda x: float(x[0]) if x[0] > -1 else math.nan, lambda x: np.ones(1))
    r = solve(f, zero(1), np.array([0.0]))
    assert r.status == Status.NON_FINITE_VALUE


def test_residual_zero_phi_is_gradient_norm():
    Q = np.diag([1.0, 2.0])
    f = make_quadratic(Q, [1.0, 1.0])
    x = np.array([0.3, -0.4])
    assert stationarity_residual(x, f, zero(2)) == pytest.approx(np.linalg.norm(Q @ x + 1.0))


def test_trace_structure():
    spec, _ = lasso_instance()
    f, phi = spec.build()
    cfg = SolverConfig()
    r = solve(f, phi, spec.x0, cfg)
    assert r.status == Status.CONVERGED
    assert r.final_residual <= cfg.eps_tol
    ks = [t.k for t in r.trace]
    assert ks == list(range(len(r.trace)))
    assert r.trace[-1].is_terminal and r.trace[-1].x_snapshot is not None
    psi = [t.psi for t in r.trace]
    assert all(b <= a for a, b in zip(psi, psi[1:]))
    for t in r.trace[:-1]:
        assert cfg.gamma_min <= t.gamma0 <= cfg.gamma_max
        assert t.gamma == t.gamma0 * cfg.tau**t.inner_iters
    # snapshots: every 10th iteration and the final 20 records
    snaps = [t.k for t in r.trace if t.x_snapshot is not None]
    K = len(r.trace)
    assert set(snaps) == {k for k in range(K) if k % 10 == 0 or k >= K - 20}
    # tracked psi agrees with a direct evaluation
    assert r.final_psi == pytest.approx(f.eval(r.final_x) + phi.eval(r.final_x),
                                        rel=1e-12)


def test_max_iterations_status():
    spec, _ = lasso_instance()
    f, phi = spec.build()
    r = solve(f, phi, spec.x0, SolverConfig(max_iter=5))
    assert r.status == Status.MAX_ITERATIONS
    assert r.iterations == 5


def test_spectral_rule_also_converges():
    spec, x_star = lasso_instance()
    f, phi = spec.build()
    r = solve(f, phi, spec.x0, SolverConfig(gamma0_rule="spectral"))
    assert r.status == Status.CONVERGED
    assert np.linalg.norm(r.final_x - x_star) < 1e-6
