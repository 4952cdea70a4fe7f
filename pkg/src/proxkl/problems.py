"""Problem descriptions and the built-in problem registry.

A ``ProblemSpec`` is declarative: the smooth part is a tagged dict
(``quadratic``, ``quartic``, ``alm_penalty`` or ``sum`` of these) and the
nonsmooth part a ``NonsmoothKind``.  ``build()`` turns it into oracles.
Registry problems are generated from a seed with ``rng.Xoshiro256``.
"""

import hashlib
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .oracle import (BoxSet, make_alm_penalty, make_quadratic, make_quartic,
                     make_sum)
from .prox import NonsmoothKind, make_nonsmooth
from .rng import Xoshiro256


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    smooth: dict
    nonsmooth: NonsmoothKind
    x0: np.ndarray
    seed: Optional[int] = None

    @property
    def dimension(self):
        return int(np.asarray(self.x0).size)

    def build(self):
        """Return ``(f, phi)`` oracles."""
        f = build_smooth(self.smooth)
        phi = make_nonsmooth(self.nonsmooth, f.dimension)
        return f, phi

    def to_dict(self):
        return {
            "name": self.name,
            "seed": self.seed,
            "smooth": _smooth_to_json(self.smooth),
            "nonsmooth": nonsmooth_to_json(self.nonsmooth),
            "x0": _floats(self.x0),
        }

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _floats(a):
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


def _bounds_to_json(a):
    # JSON has no infinity; null marks an unbounded side
    return [None if not np.isfinite(v) else float(v) for v in a]


def bounds_from_json(values, fill):
    return np.array([fill if v is None else float(v) for v in values])


def _smooth_to_json(s):
    kind = s["type"]
    if kind == "quadratic":
        Q = np.asarray(s["Q"], dtype=float)
        return {"type": kind, "Q": [_floats(row) for row in Q], "q": _floats(s["q"])}
    if kind == "quartic":
        return {"type": kind, "scale": float(s["scale"]), "n": int(s["n"])}
    if kind == "alm_penalty":
        A = np.asarray(s["A"], dtype=float)
        return {"type": kind, "A": [_floats(row) for row in A], "u": _floats(s["u"]),
                "rho": float(s["rho"]), "lower": _bounds_to_json(s["lower"]),
                "upper": _bounds_to_json(s["upper"])}
    if kind == "sum":
        return {"type": kind, "terms": [_smooth_to_json(t) for t in s["terms"]]}
    raise ValueError(f"unknown smooth type {kind!r}")


def nonsmooth_to_json(kind):
    out = {"type": kind.tag}
    if kind.weight is not None:
        out["weight"] = kind.weight
    if kind.box is not None:
        out["lower"] = _bounds_to_json(kind.box.lower)
        out["upper"] = _bounds_to_json(kind.box.upper)
    return out


def build_smooth(s):
    kind = s["type"]
    if kind == "quadratic":
        return make_quadratic(s["Q"], s["q"])
    if kind == "quartic":
        return make_quartic(s["scale"], s["n"])
    if kind == "alm_penalty":
        lower = bounds_from_json(s["lower"], -np.inf)
        upper = bounds_from_json(s["upper"], np.inf)
        return make_alm_penalty(s["A"], s["u"], s["rho"], BoxSet(lower, upper))
    if kind == "sum":
        return make_sum(*(build_smooth(t) for t in s["terms"]))
    raise ValueError(f"unknown smooth type {kind!r}")


# --- instance generators -----------------------------------------------------

def _rotated_spectrum(rng, eigenvalues, reflections=3):
    """``U diag(eigenvalues) U'`` with ``U`` a product of Householder reflections."""
    n = len(eigenvalues)
    U = np.eye(n)
    for _ in range(reflections):
        v = rng.normal(n)
        U = U - 2.0 * np.outer(U @ v, v) / (v @ v)
    Q = U @ np.diag(eigenvalues) @ U.T
    return 0.5 * (Q + Q.T)


def lasso_instance(seed=1, n=50, nnz=20, lam=1.0):
    """Strongly convex LASSO with a planted solution.

    ``Q`` has spectrum ``logspace(0, 2, n)`` (condition number 100).  The
    solution ``x_star`` has ``nnz`` nonzeros and ``q`` is chosen so that
    ``-(Q x_star + q)`` is a subgradient of ``lam ||.||_1`` at ``x_star`` lying
    strictly inside ``[-lam, lam]`` off the support; strong convexity makes
    ``x_star`` the unique minimizer.
    """
    rng = Xoshiro256(seed)
    Q = _rotated_spectrum(rng, np.logspace(0.0, 2.0, n))
    support = np.argsort(rng.random(n), kind="stable")[:nnz]
    signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    magnitude = rng.uniform(1.0, 2.0, n)
    x_star = np.zeros(n)
    x_star[support] = signs[support] * magnitude[support]
    sub = rng.uniform(-0.9, 0.9, n)
    sub[support] = signs[support]
    q = -(Q @ x_star) - lam * sub
    spec = ProblemSpec("lasso_small", {"type": "quadratic", "Q": Q, "q": q},
                       NonsmoothKind.l1(lam), np.zeros(n), seed)
    return spec, x_star


def lasso_small(seed=1):
    return lasso_instance(seed)[0]


def l0_small(seed=2, n=20, lam=0.5):
    """Quadratic plus L0 with curvature below 0.45.

    Every accepted prox parameter then stays at most 1, and a fixed point of
    the hard-thresholding step at ``gamma <= 1`` is also one at ``gamma = 1``,
    so the unit-parameter residual used for termination can vanish.
    """
    rng = Xoshiro256(seed)
    Q = _rotated_spectrum(rng, np.linspace(0.05, 0.45, n))
    q = 0.5 * rng.normal(n)
    return ProblemSpec("l0_small", {"type": "quadratic", "Q": Q, "q": q},
                       NonsmoothKind.l0(lam), np.zeros(n), seed)


def box_qp(seed=3, n=20):
    rng = Xoshiro256(seed)
    Q = _rotated_spectrum(rng, np.logspace(0.0, 2.0, n))
    q = 5.0 * rng.normal(n)
    box = BoxSet(-np.ones(n), np.ones(n))
    return ProblemSpec("box_qp", {"type": "quadratic", "Q": Q, "q": q},
                       NonsmoothKind.box_indicator(box), np.zeros(n), seed)


def quartic_l1(seed=4, n=10, lam=0.5):
    """``||x||^4 / 4 + q'x + lam ||x||_1``: gradient not globally Lipschitz."""
    rng = Xoshiro256(seed)
    q = 3.0 * rng.normal(n)
    smooth = {"type": "sum", "terms": [
        {"type": "quartic", "scale": 1.0, "n": n},
        {"type": "quadratic", "Q": np.zeros((n, n)), "q": q},
    ]}
    return ProblemSpec("quartic_l1", smooth, NonsmoothKind.l1(lam),
                       np.full(n, 3.0), seed)


def alm_sub(seed=5, n=20, m=10, rho=10.0, lam=0.1):
    """Augmented Lagrangian subproblem for ``Ax in [-1, 1]^m``.

    The smooth part is the objective ``1/2 x'Qx + q'x`` (spectrum
    ``logspace(0, 1, n)``) plus the penalty ``rho/2 dist(Ax + u, C)**2``, with
    ``u`` standing in for the scaled multiplier estimate.
    """
    rng = Xoshiro256(seed)
    Q = _rotated_spectrum(rng, np.logspace(0.0, 1.0, n))
    q = rng.normal(n)
    A = rng.normal((m, n)) / np.sqrt(m)
    u = rng.uniform(-2.0, 2.0, m)
    smooth = {"type": "sum", "terms": [
        {"type": "quadratic", "Q": Q, "q": q},
        {"type": "alm_penalty", "A": A, "u": u, "rho": rho,
         "lower": -np.ones(m), "upper": np.ones(m)},
    ]}
    return ProblemSpec("alm_sub", smooth, NonsmoothKind.l1(lam), np.zeros(n), seed)


REGISTRY = {
    "lasso_small": lasso_small,
    "l0_small": l0_small,
    "box_qp": box_qp,
    "quartic_l1": quartic_l1,
    "alm_sub": alm_sub,
}


def get_problem(name, seed=None):
    try:
        builder = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; known: {sorted(REGISTRY)}") from None
    return builder() if seed is None else builder(seed)
