"""Monotone proximal gradient method with backtracking on the prox parameter.

Each outer iteration picks a trial parameter ``gamma0`` in
``[gamma_min, gamma_max]`` and tries ``gamma = tau**i * gamma0`` for
``i = 0, 1, ...`` until the prox-gradient point ``y`` satisfies the sufficient
decrease test

    psi(y) <= psi(x) - delta * gamma / 2 * ||y - x||**2.

No Lipschitz constant of ``grad f`` is used anywhere.
"""

import math
import time
from collections import deque
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import List, Optional

import numpy as np


GAMMA0_RULES = ("safeguarded", "spectral")


class Status(str, Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    STEPSIZE_OVERFLOW = "StepsizeOverflow"
    NON_FINITE_VALUE = "NonFiniteValue"
    INVALID_START = "InvalidStart"

    @property
    def is_error(self):
        return self not in (Status.CONVERGED, Status.MAX_ITERATIONS)


class SolverError(RuntimeError):
    status = None


class StepsizeOverflow(SolverError):
    status = Status.STEPSIZE_OVERFLOW


class NonFiniteValue(SolverError):
    status = Status.NON_FINITE_VALUE


class InvalidStart(SolverError):
    status = Status.INVALID_START


@dataclass(frozen=True)
class SolverConfig:
    tau: float = 2.0
    delta: float = 1e-4
    gamma_min: float = 1e-6
    gamma_max: float = 1e6
    gamma_cap: float = 1e14
    eps_tol: float = 1e-8
    max_iter: int = 100_000
    max_inner: int = 60
    snapshot_every: int = 10
    gamma0_rule: str = "safeguarded"

    def __post_init__(self):
        if not self.tau > 1:
            raise ValueError("tau must exceed 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not self.gamma_min > 0:
            raise ValueError("gamma_min must be positive")
        if not self.gamma_min <= self.gamma_max:
            raise ValueError("gamma_min must not exceed gamma_max")
        if not self.gamma_max < self.gamma_cap:
            raise ValueError("gamma_cap must exceed gamma_max")
        if not self.eps_tol > 0:
            raise ValueError("eps_tol must be positive")
        if self.max_iter < 1 or self.max_inner < 1 or self.snapshot_every < 1:
            raise ValueError("max_iter, max_inner and snapshot_every must be positive")
        if self.gamma0_rule not in GAMMA0_RULES:
            raise ValueError(f"gamma0_rule must be one of {GAMMA0_RULES}")

    def to_dict(self):
        return asdict(self)


@dataclass
class IterationRecord:
    """One outer iteration, taken from ``x^k`` to ``x^{k+1}``.

    ``psi`` and ``residual`` describe ``x^k``; ``gamma``, ``inner_iters`` and
    ``step_norm`` describe the accepted step.  The last record of a trace is
    the terminal iterate: it has ``gamma == 0`` and no step.

    ``psi`` is ``psi(x^0)`` plus the accumulated accepted changes, each
    computed as a difference, so it is nonincreasing and resolves decreases
    well below ``ulp(psi)``.
    """

    k: int
    psi: float
    gamma: float
    inner_iters: int
    step_norm: float
    residual: float
    gamma0: float = 0.0
    x_snapshot: Optional[np.ndarray] = None

    @property
    def is_terminal(self):
        return self.gamma == 0.0


@dataclass
class SolveReport:
    status: Status
    final_x: np.ndarray
    final_psi: float
    trace: List[IterationRecord] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def iterations(self):
        return max(len(self.trace) - 1, 0)

    @property
    def final_residual(self):
        return self.trace[-1].residual if self.trace else math.inf


def _clamp(value, cfg):
    return min(max(value, cfg.gamma_min), cfg.gamma_max)


def initial_gamma(prev_x, prev_grad, cur_x, cur_grad, fallback, cfg, floor=None):
    """Spectral curvature estimate ``<s, y> / <s, s>`` clamped to the range.

    Returns ``fallback`` on the first iteration (``prev_x is None``), for a
    negligible step ``s`` or for nonpositive curvature ``<s, y>``.  A ``floor``
    bounds the estimate from below before clamping.
    """
    if prev_x is None or prev_grad is None:
        return _clamp(fallback, cfg)
    s = cur_x - prev_x
    if np.linalg.norm(s) <= 1e-14 * (1.0 + np.linalg.norm(cur_x)):
        return _clamp(fallback, cfg)
    sy = float(s @ (cur_grad - prev_grad))
    if not sy > 0:
        return _clamp(fallback, cfg)
    estimate = sy / float(s @ s)
    if floor is not None:
        estimate = max(estimate, floor)
    return _clamp(estimate, cfg)


def _psi(f, phi, x):
    return f.eval(x) + phi.eval(x)


def _backtrack(x, psi_x, grad_x, gamma0, f, phi, cfg):
    for i in range(cfg.max_inner + 1):
        gamma = gamma0 * cfg.tau**i
        if gamma > cfg.gamma_cap:
            raise StepsizeOverflow(
                f"trial parameter {gamma:.3e} exceeds gamma_cap {cfg.gamma_cap:.3e}")
        y = phi.prox(x - grad_x / gamma, gamma)
        if np.array_equal(y, x):
            # both sides of the decrease test equal psi(x)
            return y, gamma, i, psi_x
        # psi(y) - psi(x) without cancellation; same test as comparing values
        change = f.diff(x, y) + phi.diff(x, y)
        if math.isnan(change) or change == -math.inf:
            raise NonFiniteValue(f"psi(y) - psi(x) evaluated to {change} at inner step {i}")
        d = y - x
        if change <= -cfg.delta * (gamma / 2.0) * float(d @ d):
            return y, gamma, i, psi_x + change
    raise StepsizeOverflow(f"no acceptable step within max_inner={cfg.max_inner}")


def backtracking_step(x, gamma0, f, phi, cfg):
    """One outer iteration: returns ``(x_next, gamma_k, inner_iters)``.

    Raises ``StepsizeOverflow`` if the trial parameter passes ``gamma_cap`` or
    the inner loop passes ``max_inner``, and ``NonFiniteValue`` if psi becomes
    NaN or -inf.
    """
    x = np.asarray(x, dtype=float)
    psi_x = _psi(f, phi, x)
    if not math.isfinite(psi_x):
        raise NonFiniteValue(f"psi(x) = {psi_x}")
    y, gamma, i, _ = _backtrack(x, psi_x, f.grad(x), gamma0, f, phi, cfg)
    return y, gamma, i


def _residual(x, grad_x, phi, gamma_ref):
    return gamma_ref * float(np.linalg.norm(x - phi.prox(x - grad_x / gamma_ref, gamma_ref)))


def stationarity_residual(x, f, phi, gamma_ref=1.0):
    """Prox-gradient residual ``gamma_ref * ||x - prox(x - grad f(x)/gamma_ref)||``."""
    x = np.asarray(x, dtype=float)
    return _residual(x, f.grad(x), phi, gamma_ref)


def solve(f, phi, x0, cfg=None, gamma_ref=1.0):
    """Run the method from ``x0`` and return a ``SolveReport``.

    Stops with ``Converged`` once the stationarity residual drops to
    ``cfg.eps_tol``, with ``MaxIterations`` after ``cfg.max_iter`` outer
    iterations, or with the status of a ``SolverError``.  Iterates are
    snapshotted every ``cfg.snapshot_every`` iterations and for the last 20.

    The trial parameter is the spectral estimate; under the default
    ``"safeguarded"`` rule it is additionally kept above ``gamma_{k-1} / tau``,
    which avoids the erratic long steps of the pure ``"spectral"`` rule.
    """
    cfg = cfg or SolverConfig()
    start = time.perf_counter()
    x = np.array(x0, dtype=float).ravel()
    if x.size != f.dimension or x.size != phi.dimension:
        raise ValueError(
            f"x0 has length {x.size}; f and phi have dimensions "
            f"{f.dimension} and {phi.dimension}")

    trace = []
    recent = deque()

    def record(rec):
        trace.append(rec)
        recent.append(rec)
        if len(recent) > 20:
            old = recent.popleft()
            if old.k % cfg.snapshot_every != 0:
                old.x_snapshot = None

    def finish(status, x, psi, residual):
        record(IterationRecord(len(trace), psi, 0.0, 0, 0.0, residual,
                               x_snapshot=x.copy()))
        return SolveReport(status, x, psi, trace, time.perf_counter() - start)

    psi = _psi(f, phi, x) if math.isfinite(phi.eval(x)) else math.inf
    if not math.isfinite(psi):
        return SolveReport(Status.INVALID_START, x, psi, [], time.perf_counter() - start)
    g = f.grad(x)
    if not np.all(np.isfinite(g)):
        return finish(Status.NON_FINITE_VALUE, x, psi, math.nan)
    res = _residual(x, g, phi, gamma_ref)

    prev_x = prev_g = None
    fallback = 1.0
    for k in range(cfg.max_iter):
        if res <= cfg.eps_tol:
            return finish(Status.CONVERGED, x, psi, res)
        # the safeguard lets the curvature estimate fall by at most tau per iteration
        floor = fallback / cfg.tau if cfg.gamma0_rule == "safeguarded" and k else None
        gamma0 = initial_gamma(prev_x, prev_g, x, g, fallback, cfg, floor)
        try:
            x_new, gamma, inner, psi_new = _backtrack(x, psi, g, gamma0, f, phi, cfg)
        except SolverError as err:
            return finish(err.status, x, psi, res)
        g_new = f.grad(x_new)
        if not math.isfinite(psi_new) or not np.all(np.isfinite(g_new)):
            return finish(Status.NON_FINITE_VALUE, x, psi, res)
        step = float(np.linalg.norm(x_new - x))
        record(IterationRecord(k, psi, gamma, inner, step, res, gamma0, x.copy()))
        prev_x, prev_g = x, g
        x, g, psi = x_new, g_new, psi_new
        fallback = gamma
        res = _residual(x, g, phi, gamma_ref)

    status = Status.CONVERGED if res <= cfg.eps_tol else Status.MAX_ITERATIONS
    return finish(status, x, psi, res)
