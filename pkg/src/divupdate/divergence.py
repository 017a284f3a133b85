"""Divergences between probability vectors on the same finite space."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import DimensionMismatch


def _pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return a, b


@dataclass(frozen=True)
class ConvexPotential:
    """A strictly convex scalar function and its derivative, used on [0, 1]."""

    eval: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"


QUADRATIC = ConvexPotential(lambda u: 0.5 * u * u, lambda u: u, name="quadratic")


def is_strictly_convex(phi: ConvexPotential, points: int = 101, margin: float = 1e-15) -> bool:
    """Midpoint test of strict convexity on every pair of a uniform grid of [0, 1]."""
    u = np.linspace(0.0, 1.0, points)
    lo, hi = np.triu_indices(points, k=1)
    a, b = u[lo], u[hi]
    mid = phi.eval(0.5 * (a + b))
    chord = 0.5 * (phi.eval(a) + phi.eval(b))
    return bool(np.all(mid < chord - margin))


def hellinger_sq(a, b) -> float:
    """Squared Hellinger distance ``1 - sum sqrt(a * b)``.

    Equals ``0.5 * sum (sqrt(a) - sqrt(b))**2`` for normalized inputs; see
    :func:`hellinger_sq_halfsquares` for that form.
    """
    a, b = _pair(a, b)
    # rounding can push an exact zero slightly negative
    return float(min(1.0, max(0.0, 1.0 - np.sum(np.sqrt(a * b)))))


def hellinger_sq_halfsquares(a, b) -> float:
    a, b = _pair(a, b)
    return float(0.5 * np.sum((np.sqrt(a) - np.sqrt(b)) ** 2))


def bregman(phi: ConvexPotential, a, b) -> float:
    a, b = _pair(a, b)
    return float(np.sum(phi.eval(a) - phi.eval(b) - (a - b) * phi.deriv(b)))


def quadratic_bregman(a, b) -> float:
    a, b = _pair(a, b)
    d = a - b
    return float(0.5 * np.dot(d, d))


def shannon_entropy(a) -> float:
    a = np.asarray(a, dtype=float)
    nz = a[a > 0]
    return float(-np.sum(nz * np.log(nz)))
