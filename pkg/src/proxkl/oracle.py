"""Smooth and nonsmooth function oracles for ``psi = f + phi``.

Points are dense 1-D float arrays.  Oracles are immutable after construction
and can be shared between concurrent solver runs.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class SmoothOracle:
    """Continuously differentiable part ``f``.

    ``lipschitz_hint`` is the exact global Lipschitz constant of ``grad`` when
    one is known.  The solver never reads it; it only feeds diagnostics.

    ``eval_diff(x, y)``, when given, returns ``f(y) - f(x)`` computed without
    forming the two values, so that decreases far below ``ulp(f)`` stay
    resolvable near a minimizer.
    """

    dimension: int
    eval: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    lipschitz_hint: Optional[float] = None
    name: str = "smooth"
    eval_diff: Optional[Callable[[np.ndarray, np.ndarray], float]] = None

    def diff(self, x, y):
        if self.eval_diff is not None:
            return self.eval_diff(x, y)
        return self.eval(y) - self.eval(x)


@dataclass(frozen=True)
class NonsmoothOracle:
    """Lower semicontinuous part ``phi``.

    ``prox(z, gamma)`` returns a global minimizer of
    ``gamma/2 * ||y - z||**2 + phi(y)``.  ``subdiff_dist(x, v)`` is the
    Euclidean distance from ``v`` to the limiting subdifferential of ``phi``
    at ``x``; it is ``None`` when no closed form is available.
    """

    dimension: int
    eval: Callable[[np.ndarray], float]
    prox: Callable[[np.ndarray, float], np.ndarray]
    subdiff_dist: Optional[Callable[[np.ndarray, np.ndarray], float]] = None
    name: str = "nonsmooth"
    eval_diff: Optional[Callable[[np.ndarray, np.ndarray], float]] = None

    def diff(self, x, y):
        if self.eval_diff is not None:
            return self.eval_diff(x, y)
        return self.eval(y) - self.eval(x)


@dataclass(frozen=True)
class BoxSet:
    """Closed box ``{y : lower <= y <= upper}``; bounds may be infinite."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.array(self.lower, dtype=float).ravel()
        upper = np.array(self.upper, dtype=float).ravel()
        if lower.shape != upper.shape:
            raise ValueError(
                f"box bounds differ in length: {lower.size} vs {upper.size}")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ValueError("box bounds must not be NaN")
        if np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise ValueError("box bounds must satisfy lower < inf and upper > -inf")
        if np.any(lower > upper):
            raise ValueError("empty box: some lower bound exceeds its upper bound")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self):
        return self.lower.size

    def project(self, z):
        return np.minimum(np.maximum(z, self.lower), self.upper)

    def contains(self, z):
        return bool(np.all(z >= self.lower) and np.all(z <= self.upper))


def _as_point(x, n):
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"expected a point of shape ({n},), got {x.shape}")
    return x


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def largest_eigenvalue(M, rtol=1e-10, max_iter=100_000):
    """Largest eigenvalue of a symmetric PSD matrix by power iteration.

    The Rayleigh quotient is iterated until two successive estimates agree to
    ``rtol``.  The start vector is fixed, so the result is deterministic.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if not np.any(M):
        return 0.0
    v = np.linspace(1.0, 2.0, n)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(max_iter):
        w = M @ v
        new = float(v @ w)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            # start vector in the null space; restart along a coordinate axis
            v = np.zeros(n)
            v[int(np.argmax(np.abs(np.diag(M))))] = 1.0
            continue
        v = w / norm_w
        if abs(new - estimate) <= rtol * abs(new):
            # Rayleigh quotient of the final vector is never worse
            return max(new, float(v @ (M @ v)))
        estimate = new
    return estimate


def make_quadratic(Q, q):
    """``f(x) = 1/2 x'Qx + q'x`` with ``Q`` symmetric positive semidefinite."""
    Q = np.atleast_2d(np.array(Q, dtype=float))
    q = np.array(q, dtype=float).ravel()
    n = q.size
    if n < 1:
        raise ValueError("dimension must be at least 1")
    if Q.shape != (n, n):
        raise ValueError(f"Q has shape {Q.shape}, expected ({n}, {n})")
    if np.max(np.abs(Q - Q.T)) > 1e-12:
        raise ValueError("Q is not symmetric")
    Q = _frozen(Q)
    q = _frozen(q)

    def value(x):
        x = _as_point(x, n)
        return float(0.5 * (x @ (Q @ x)) + q @ x)

    def grad(x):
        x = _as_point(x, n)
        return Q @ x + q

    def diff(x, y):
        d = _as_point(y, n) - _as_point(x, n)
        return float(grad(x) @ d + 0.5 * (d @ (Q @ d)))

    return SmoothOracle(n, value, grad, largest_eigenvalue(Q), name="quadratic",
                        eval_diff=diff)


def make_quartic(scale, n):
    """``f(x) = scale/4 * ||x||**4``.

    The gradient ``scale * ||x||**2 * x`` is locally but not globally
    Lipschitz, so ``lipschitz_hint`` is absent.
    """
    scale = float(scale)
    n = int(n)
    if not scale > 0:
        raise ValueError("scale must be positive")
    if n < 1:
        raise ValueError("dimension must be at least 1")

    def value(x):
        x = _as_point(x, n)
        sq = float(x @ x)
        return 0.25 * scale * sq * sq

    def grad(x):
        x = _as_point(x, n)
        return (scale * float(x @ x)) * x

    def diff(x, y):
        x = _as_point(x, n)
        y = _as_point(y, n)
        # ||y||^2 - ||x||^2 = <y - x, y + x>
        dsq = float((y - x) @ (y + x))
        return 0.25 * scale * dsq * float(x @ x + y @ y)

    return SmoothOracle(n, value, grad, None, name="quartic", eval_diff=diff)


def make_alm_penalty(A, u, rho, C):
    """Augmented Lagrangian penalty ``rho/2 * dist(Ax + u, C)**2``.

    ``u`` plays the role of the scaled multiplier estimate and ``C`` is a box,
    so the projection is a componentwise clamp.
    """
    A = np.atleast_2d(np.array(A, dtype=float))
    u = np.array(u, dtype=float).ravel()
    rho = float(rho)
    if not isinstance(C, BoxSet):
        C = BoxSet(*C)
    m, n = A.shape
    if u.size != m:
        raise ValueError(f"u has length {u.size}, expected {m}")
    if C.dimension != m:
        raise ValueError(f"box has dimension {C.dimension}, expected {m}")
    if not rho > 0:
        raise ValueError("rho must be positive")
    A = _frozen(A)
    u = _frozen(u)

    def violation(x):
        z = A @ _as_point(x, n) + u
        return z - C.project(z)

    def value(x):
        r = violation(x)
        return float(0.5 * rho * (r @ r))

    def grad(x):
        return rho * (A.T @ violation(x))

    def diff(x, y):
        zx = A @ _as_point(x, n) + u
        zy = A @ _as_point(y, n) + u
        rx = zx - C.project(zx)
        ry = zy - C.project(zy)
        dz = A @ (_as_point(y, n) - _as_point(x, n))
        above = (zx > C.upper) & (zy > C.upper)
        below = (zx < C.lower) & (zy < C.lower)
        inside = (zx >= C.lower) & (zx <= C.upper) & (zy >= C.lower) & (zy <= C.upper)
        dr = np.where(above | below, dz, np.where(inside, 0.0, ry - rx))
        return float(0.5 * rho * (dr @ (rx + ry)))

    hint = rho * largest_eigenvalue(A.T @ A)
    return SmoothOracle(n, value, grad, hint, name="alm_penalty", eval_diff=diff)


def make_sum(*terms):
    """Sum of smooth oracles of equal dimension.

    The hint is the sum of the terms' hints, or absent if any term lacks one.
    """
    if not terms:
        raise ValueError("need at least one term")
    n = terms[0].dimension
    for t in terms:
        if t.dimension != n:
            raise ValueError("all terms must share one dimension")

    def value(x):
        return float(sum(t.eval(x) for t in terms))

    def grad(x):
        g = terms[0].grad(x)
        for t in terms[1:]:
            g = g + t.grad(x)
        return g

    def diff(x, y):
        return float(sum(t.diff(x, y) for t in terms))

    hints = [t.lipschitz_hint for t in terms]
    hint = None if any(h is None for h in hints) else float(sum(hints))
    name = "+".join(t.name for t in terms)
    return SmoothOracle(n, value, grad, hint, name=name, eval_diff=diff)


def finite_diff_check(oracle, points):
    """Max over points and coordinates of the relative gradient error.

    Each coordinate is compared with a central difference of step
    ``h = 1e-6 * (1 + |x_i|)``; the error is scaled by ``1 + |grad_i|``.
    """
    worst = 0.0
    for x in points:
        x = np.array(x, dtype=float)
        g = np.asarray(oracle.grad(x), dtype=float)
        for i in range(x.size):
            h = 1e-6 * (1.0 + abs(x[i]))
            xp = x.copy()
            xm = x.copy()
            xp[i] += h
            xm[i] -= h
            fd = (oracle.eval(xp) - oracle.eval(xm)) / (xp[i] - xm[i])
            worst = max(worst, abs(g[i] - fd) / (1.0 + abs(g[i])))
    return worst
