"""Empirical convergence diagnostics on recorded traces.

The certificates here are observational: they check consequences of the
convergence theory (sufficient decrease, subgradient bounds, linear rates)
on a finished run, using observable surrogates for the unobservable
constants of the proofs.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class KLRateModel:
    """Fitted desingularization ``chi(t) = c * t**kappa`` valid for gaps up to ``eta``.

    Purely empirical; not a certified KL constant.
    """

    kappa: float
    c: float
    eta: float

    def chi(self, t):
        return self.c * np.asarray(t, dtype=float) ** self.kappa


@dataclass(frozen=True)
class RateReport:
    q_factor_psi: float
    r_factor_x: float
    tail_window: int
    psi_star_proxy: float
    x_star_proxy: np.ndarray

    def to_dict(self):
        return {
            "q_factor_psi": self.q_factor_psi,
            "r_factor_x": self.r_factor_x,
            "tail_window": self.tail_window,
            "psi_star_proxy": self.psi_star_proxy,
            "x_star_proxy": [float(v) for v in self.x_star_proxy],
        }


def estimate_q_factor(psi_values, psi_star, tail_window):
    """Median ratio of consecutive optimality gaps over the tail.

    Only ratios whose denominator gap exceeds ``1e-14 * (1 + |psi_star|)`` are
    used, and of those the last ``tail_window``.  Fewer than three usable
    ratios means finite termination and yields 0.
    """
    psi = np.asarray(psi_values, dtype=float)
    if tail_window < 3:
        raise ValueError("tail_window must be at least 3")
    if np.any(np.diff(psi) > 0):
        raise ValueError("psi_values must be nonincreasing")
    gaps = psi - psi_star
    floor = 1e-14 * (1.0 + abs(psi_star))
    valid = gaps[:-1] > floor
    ratios = gaps[1:][valid] / gaps[:-1][valid]
    ratios = ratios[-tail_window:]
    if ratios.size < 3:
        return 0.0
    return float(np.median(ratios))


def _tail_errors(errors, tail_window):
    e = np.asarray(errors, dtype=float)
    if tail_window < 3:
        raise ValueError("tail_window must be at least 3")
    if np.any(e < 0):
        raise ValueError("errors must be nonnegative")
    tail = e[-tail_window:]
    zero = np.flatnonzero(tail == 0)
    if zero.size and np.any(tail[zero[0]:] > 0):
        raise ValueError("a zero error is followed by a positive one")
    return tail


def estimate_r_factor(errors, tail_window):
    """Geometric-mean contraction ``(e_last / e_first) ** (1/m)`` over the tail.

    Trailing zeros (finite convergence) are skipped; an all-zero tail gives 0.
    """
    tail = _tail_errors(errors, tail_window)
    idx = np.flatnonzero(tail > 0)
    if idx.size < 2:
        return 0.0
    first, last = idx[0], idx[-1]
    return float((tail[last] / tail[first]) ** (1.0 / (last - first)))


def fit_geometric_envelope(errors, tail_window):
    """Least-squares fit of ``log e_k = log omega + k log mu`` over the tail.

    Returns ``(omega, mu, factor)`` where ``factor`` is the largest ratio
    ``e_k / (omega * mu**k)`` on the tail; ``k`` counts from the start of
    ``errors``.  A small factor means the envelope dominates the errors up to
    that constant.
    """
    e = np.asarray(errors, dtype=float)
    tail = _tail_errors(e, tail_window)
    k = np.arange(e.size - tail.size, e.size)
    pos = tail > 0
    if pos.sum() < 2:
        return 0.0, 0.0, 0.0
    slope, intercept = np.polyfit(k[pos], np.log(tail[pos]), 1)
    omega, mu = math.exp(intercept), math.exp(slope)
    factor = float(np.max(tail[pos] / (omega * mu ** k[pos])))
    return omega, mu, factor


def descent_margins(trace, delta):
    """Per-step slack ``psi_k - psi_{k+1} - delta * gamma_k / 2 * step_k**2``."""
    return np.array([
        a.psi - b.psi - delta * (a.gamma / 2.0) * a.step_norm**2
        for a, b in zip(trace[:-1], trace[1:])
    ])


def check_descent_certificate(trace, delta):
    """Worst sufficient-decrease margin over a trace; ``inf`` if no steps."""
    margins = descent_margins(trace, delta)
    return float(margins.min()) if margins.size else math.inf


def check_subgrad_bound(trace, f, phi, L_est):
    """Worst ratio ``dist(0, d psi(x^{k+1})) / ((gamma_bar + L_est) * step_k)``.

    ``gamma_bar`` is the largest recorded ``gamma_k``.  Only consecutive
    snapshot pairs with ``step_k >= 1e-14`` enter.  A value at most 1 is an
    empirical certificate of the subgradient bound.
    """
    if phi.subdiff_dist is None:
        raise ValueError(f"nonsmooth term {phi.name!r} provides no subdiff_dist")
    gammas = [r.gamma for r in trace if not r.is_terminal]
    if not gammas:
        return 0.0
    gamma_bar = max(gammas)
    worst = 0.0
    for a, b in zip(trace[:-1], trace[1:]):
        if a.x_snapshot is None or b.x_snapshot is None:
            continue
        if a.is_terminal or a.step_norm < 1e-14:
            continue
        x = b.x_snapshot
        dist = phi.subdiff_dist(x, -f.grad(x))
        worst = max(worst, dist / ((gamma_bar + L_est) * a.step_norm))
    return worst


def fit_kl_model(psi_values, residuals, psi_star):
    """Fit ``log residual = a + (1 - kappa) log gap`` by least squares.

    With ``chi(t) = c t**kappa`` the KL inequality reads
    ``dist >= gap**(1 - kappa) / (c kappa)``, hence ``c = 1 / (kappa e**a)``.
    """
    gaps = np.asarray(psi_values, dtype=float) - psi_star
    res = np.asarray(residuals, dtype=float)
    use = (gaps > 1e-12) & (res > 0) & np.isfinite(res)
    if use.sum() < 10:
        raise ValueError(f"need at least 10 usable samples, got {int(use.sum())}")
    slope, a = np.polyfit(np.log(gaps[use]), np.log(res[use]), 1)
    kappa = float(min(max(1.0 - slope, 1e-6), 1.0))
    c = 1.0 / (kappa * math.exp(a))
    return KLRateModel(kappa=kappa, c=c, eta=float(gaps[use].max()))


def snapshot_errors(trace, x_star):
    """``||x^k - x*||`` over the trailing run of consecutive snapshots."""
    xs = []
    for rec in reversed(trace):
        if rec.x_snapshot is None:
            break
        xs.append(rec.x_snapshot)
    xs.reverse()
    return np.array([np.linalg.norm(x - x_star) for x in xs])


def rate_report(report, tail_window=30, x_exclude=5):
    """Rates with the final iterate and value standing in for the limit.

    The last ``tail_window`` psi values are kept out of the Q-factor window,
    and the last ``x_exclude`` iterates out of the R-factor window, so the
    proxies do not measure themselves.
    """
    psi = np.array([r.psi for r in report.trace])
    psi_star = float(report.final_psi)
    q = estimate_q_factor(psi[:-tail_window], psi_star, tail_window) \
        if psi.size > tail_window else 0.0
    errors = snapshot_errors(report.trace, report.final_x)[:-x_exclude]
    window = min(tail_window, errors.size)
    r = estimate_r_factor(errors, window) if window >= 3 else 0.0
    return RateReport(q, r, tail_window, psi_star, np.array(report.final_x))
