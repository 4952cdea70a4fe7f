import math

import numpy as np
import pytest

from proxkl.analysis import (check_descent_certificate, check_subgrad_bound,
                             estimate_q_factor, estimate_r_factor, fit_geometric_envelope,
                             fit_kl_model, rate_report, snapshot_errors)
from proxkl.oracle import make_quadratic, make_quartic
from proxkl.problems import get_problem, lasso_instance
from proxkl.prox import NonsmoothKind, make_nonsmooth
from proxkl.solver import IterationRecord, SolverConfig, solve


def test_q_factor_examples():
    k = np.arange(40)
    assert estimate_q_factor(2.0**-k, 0.0, 10) == 0.5
    kk = np.arange(10, 60)
    assert estimate_q_factor(1.0 / kk, 0.0, 20) >= 0.9
    assert estimate_q_factor([3.0, 2.0, 1.0, 1.0, 1.0, 1.0], 1.0, 5) == 0.0


def test_q_factor_rejects():
    with pytest.raises(ValueError):
        estimate_q_factor([1.0, 2.0], 0.0, 5)
    with pytest.raises(ValueError):
        estimate_q_factor([2.0, 1.0], 0.0, 2)


def test_q_factor_scale_invariant():
    rng = np.random.default_rng(0)
    gaps = np.cumprod(rng.uniform(0.3, 0.9, 40))
    base = estimate_q_factor(gaps, 0.0, 20)
    for s in (1e-3, 7.0, 1e5):
        assert estimate_q_factor(s * gaps, 0.0, 20) == base


def test_r_factor_examples():
    k = np.arange(50)
    assert estimate_r_factor(3 * 0.8**k, 20) == pytest.approx(0.8, rel=1e-14)
    assert estimate_r_factor(np.zeros(10), 5) == 0.0
    e = 0.9**k * (1 + 0.1 * (-1.0) ** k)
    assert 0.88 <= estimate_r_factor(e, 10) <= 0.92
    with pytest.raises(ValueError):
        estimate_r_factor([1.0, 0.0, 0.5], 3)
    assert estimate_r_factor([0.5, 0.25, 0.0, 0.0], 4) == 0.5


def test_r_factor_constant_cancels():
    k = np.arange(30)
    for omega in (1e-6, 1.0, 42.0):
        assert estimate_r_factor(omega * 0.7**k, 25) == pytest.approx(0.7, rel=1e-13)


def test_geometric_envelope():
    k = np.arange(30)
    omega, mu, factor = fit_geometric_envelope(5 * 0.6**k, 30)
    assert omega == pytest.approx(5.0, rel=1e-9) and mu == pytest.approx(0.6, rel=1e-12)
    assert factor == pytest.approx(1.0, rel=1e-9)


def _record(k, psi, gamma, step):
    return IterationRecord(k, psi, gamma, 0, step, 0.0)


def test_descent_certificate_examples():
    good = [_record(0, 1.0, 2.0, 0.5), _record(1, 0.5, 0.0, 0.0)]
    assert check_descent_certificate(good, 0.5) == pytest.approx(0.5 - 0.125)
    bad = [_record(0, 1.0, 2.0, 0.5), _record(1, 1.0, 2.0, 0.1), _record(2, 0.0, 0.0, 0.0)]
    assert check_descent_certificate(bad, 0.5) < 0
    assert check_descent_certificate([], 0.5) == math.inf


def test_subgrad_bound_zero_phi_exact():
    f = make_quadratic(np.diag([1.0, 10.0]), [1.0, -1.0])
    phi = make_nonsmooth(NonsmoothKind.zero(), 2)
    r = solve(f, phi, np.array([3.0, 3.0]), SolverConfig(snapshot_every=1))
    assert check_subgrad_bound(r.trace, f, phi, f.lipschitz_hint) <= 1.0


def test_subgrad_bound_quadratic_l1():
    spec = get_problem("lasso_small")
    f, phi = spec.build()
    r = solve(f, phi, spec.x0, SolverConfig(snapshot_every=1))
    assert check_subgrad_bound(r.trace, f, phi, f.lipschitz_hint) <= 1.0


def test_subgrad_bound_underestimated_lipschitz():
    f = make_quartic(1.0, 4)
    phi = make_nonsmooth(NonsmoothKind.l1(0.1), 4)
    r = solve(f, phi, np.full(4, 3.0), SolverConfig(snapshot_every=1))
    assert check_subgrad_bound(r.trace, f, phi, 0.0) > 0


def test_subgrad_bound_needs_subdiff_dist():
    f = make_quadratic(np.eye(1), [0.0])
    phi = make_nonsmooth(NonsmoothKind.zero(), 1)
    phi = type(phi)(1, phi.eval, phi.prox)
    with pytest.raises(ValueError):
        check_subgrad_bound([], f, phi, 1.0)


def test_kl_fit_examples():
    k = np.arange(30)
    m = fit_kl_model(4.0**-k, 2.0**-k, 0.0)
    assert abs(m.kappa - 0.5) <= 0.02
    assert m.eta == 1.0
    m = fit_kl_model(4.0**-k[:15], np.ones(15), 0.0)
    assert m.kappa == 1.0
    with pytest.raises(ValueError):
        fit_kl_model([1.0, 0.5], [1.0, 1.0], 0.0)


def test_kl_fit_diagonal_quadratic():
    f = make_quadratic(np.diag([1.0, 4.0]), [0.0, 0.0])
    phi = make_nonsmooth(NonsmoothKind.zero(), 2)
    cfg = SolverConfig(gamma_min=5.0, gamma_max=5.0, eps_tol=1e-10)
    r = solve(f, phi, np.array([1.0, 1.0]), cfg)
    m = fit_kl_model([t.psi for t in r.trace], [t.residual for t in r.trace], 0.0)
    assert 0.45 <= m.kappa <= 0.55
    assert m.chi(0.0) == 0.0


def test_rate_report_on_lasso():
    spec, x_star = lasso_instance()
    f, phi = spec.build()
    r = solve(f, phi, spec.x0)
    rep = rate_report(r)
    assert 0 < rep.q_factor_psi < 1 and 0 < rep.r_factor_x < 1
    assert rep.to_dict()["tail_window"] == 30
    errs = snapshot_errors(r.trace, x_star)
    assert errs.size == 20
