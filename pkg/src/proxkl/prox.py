"""Closed-form proximal maps and subdifferential distances.

Every map here returns a *global* minimizer of ``gamma/2 ||y - z||^2 + phi(y)``
and is separable, so no inner iterative solves are involved.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .oracle import BoxSet, NonsmoothOracle

TAGS = ("l1", "l0", "box", "zero")


@dataclass(frozen=True)
class NonsmoothKind:
    """Tag selecting a library term ``phi``.

    ``weight`` is the ``lambda`` of the L1/L0 terms; ``box`` is set for the
    box indicator.  Use the classmethod constructors.
    """

    tag: str
    weight: Optional[float] = None
    box: Optional[BoxSet] = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown nonsmooth kind {self.tag!r}")
        if self.tag in ("l1", "l0"):
            if self.weight is None or not float(self.weight) > 0:
                raise ValueError(f"{self.tag} weight must be positive")
            object.__setattr__(self, "weight", float(self.weight))
        if self.tag == "box" and self.box is None:
            raise ValueError("box kind needs a BoxSet")

    @classmethod
    def l1(cls, weight):
        return cls("l1", weight=weight)

    @classmethod
    def l0(cls, weight):
        return cls("l0", weight=weight)

    @classmethod
    def box_indicator(cls, box):
        return cls("box", box=box)

    @classmethod
    def zero(cls):
        return cls("zero")


def soft_threshold(z, t):
    """``sign(z) * max(|z| - t, 0)``, the prox of ``t * ||.||_1`` at unit scale."""
    z = np.asarray(z, dtype=float)
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def hard_threshold(z, lam, gamma):
    """Prox of ``lam * ||.||_0`` with parameter ``gamma``.

    Per coordinate the only candidates are ``y = 0`` (cost ``gamma z^2 / 2``)
    and ``y = z`` (cost ``lam``).  The costs are compared directly so the
    returned point is never worse than either candidate in floating point;
    exact ties go to 0.
    """
    z = np.asarray(z, dtype=float)
    keep = 0.5 * gamma * (z * z) > lam
    return np.where(keep, z, 0.0)


def project_box(z, C):
    """Componentwise clamp onto the box ``C``."""
    return C.project(np.asarray(z, dtype=float))


def subdiff_dist_l1(x, v, lam):
    """Distance from ``v`` to the subdifferential of ``lam * ||.||_1`` at ``x``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    d = np.where(x != 0, np.abs(v - lam * np.sign(x)),
                 np.maximum(np.abs(v) - lam, 0.0))
    return float(np.sqrt(d @ d))


def subdiff_dist_l0(x, v):
    """Distance from ``v`` to the limiting subdifferential of ``lam * ||.||_0``.

    Away from zero the term is locally constant (subdifferential ``{0}``); at
    zero the limiting subdifferential is the whole line.  Independent of lam.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    d = np.where(x != 0, np.abs(v), 0.0)
    return float(np.sqrt(d @ d))


def subdiff_dist_box(x, v, C):
    """Distance from ``v`` to the normal cone of the box ``C`` at ``x``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    at_lower = x == C.lower
    at_upper = x == C.upper
    # normal cone per coordinate: {0}, (-inf, 0], [0, inf) or the whole line
    d = np.abs(v)
    d = np.where(at_lower & ~at_upper, np.maximum(v, 0.0), d)
    d = np.where(at_upper & ~at_lower, np.maximum(-v, 0.0), d)
    d = np.where(at_lower & at_upper, 0.0, d)
    return float(np.sqrt(d @ d))


def _check_point(x, n):
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"expected a point of shape ({n},), got {x.shape}")
    return x


def make_nonsmooth(kind, dimension):
    """Bind a library term to the ``NonsmoothOracle`` interface."""
    n = int(dimension)
    if n < 1:
        raise ValueError("dimension must be at least 1")

    if kind.tag == "l1":
        lam = kind.weight

        def value(x):
            return float(lam * np.sum(np.abs(_check_point(x, n))))

        def prox(z, gamma):
            return soft_threshold(_check_point(z, n), lam / gamma)

        def dist(x, v):
            return subdiff_dist_l1(_check_point(x, n), v, lam)

        def diff(x, y):
            return float(lam * np.sum(np.abs(_check_point(y, n)) - np.abs(_check_point(x, n))))

        return NonsmoothOracle(n, value, prox, dist, name="l1", eval_diff=diff)

    if kind.tag == "l0":
        lam = kind.weight

        def value(x):
            return float(lam * np.count_nonzero(_check_point(x, n)))

        def prox(z, gamma):
            return hard_threshold(_check_point(z, n), lam, gamma)

        def dist(x, v):
            return subdiff_dist_l0(_check_point(x, n), v)

        def diff(x, y):
            change = np.count_nonzero(_check_point(y, n)) - np.count_nonzero(_check_point(x, n))
            return float(lam * change)

        return NonsmoothOracle(n, value, prox, dist, name="l0", eval_diff=diff)

    if kind.tag == "box":
        C = kind.box
        if C.dimension != n:
            raise ValueError(f"box has dimension {C.dimension}, expected {n}")

        def value(x):
            return 0.0 if C.contains(_check_point(x, n)) else float("inf")

        def prox(z, gamma):
            return project_box(_check_point(z, n), C)

        def dist(x, v):
            return subdiff_dist_box(_check_point(x, n), v, C)

        return NonsmoothOracle(n, value, prox, dist, name="box")

    def value(x):
        _check_point(x, n)
        return 0.0

    def prox(z, gamma):
        return np.array(_check_point(z, n), dtype=float, copy=True)

    def dist(x, v):
        _check_point(x, n)
        return float(np.linalg.norm(v))

    def diff(x, y):
        _check_point(x, n)
        _check_point(y, n)
        return 0.0

    return NonsmoothOracle(n, value, prox, dist, name="zero", eval_diff=diff)
