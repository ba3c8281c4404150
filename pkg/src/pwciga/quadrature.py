"""Gauss-Legendre rules and the degree-driven choice of point counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_POINTS = 10


@dataclass(frozen=True)
class QuadRule:
    """Gauss-Legendre points and weights on the reference interval [-1, 1]."""

    points: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.points.size


def _legendre(n, x):
    """P_n(x) and P_n'(x) by the three-term recurrence."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    if n == 0:
        return p0, np.zeros_like(x)
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def gauss_legendre(n: int) -> QuadRule:
    """n-point Gauss-Legendre rule, exact for polynomials of degree 2n - 1.

    Nodes are Newton-refined roots of the Legendre polynomial P_n, started
    from the Chebyshev-angle estimate ``cos(pi (i - 1/4) / (n + 1/2))``.
    """
    if not 1 <= n <= MAX_POINTS:
        raise ValueError(f"number of Gauss points must be in [1, {MAX_POINTS}], got {n}")
    if n == 1:
        return QuadRule(np.array([0.0]), np.array([2.0]))
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        pn, dpn = _legendre(n, x)
        dx = pn / dpn
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    _, dpn = _legendre(n, x)
    w = 2.0 / ((1.0 - x * x) * dpn * dpn)
    x = x[::-1].copy()
    w = w[::-1].copy()
    # enforce exact symmetry about 0
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    if n % 2:
        x[n // 2] = 0.0
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadRule(x, w)


def points_for_degree(d: int) -> int:
    """Smallest Gauss point count that integrates degree ``d`` exactly."""
    if d < 0:
        raise ValueError(f"polynomial degree must be non-negative, got {d}")
    return (d + 2) // 2


def map_to_interval(rule: QuadRule, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Affine image of ``rule`` on ``[lo, hi]``; weights carry the Jacobian."""
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    jac = 0.5 * (hi - lo)
    return lo + jac * (rule.points + 1.0), jac * rule.weights


def composite(rule: QuadRule, breaks) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights of ``rule`` replicated on every cell of ``breaks``.

    Returns arrays of shape ``(n_cells, rule.n)``.
    """
    breaks = np.asarray(breaks, dtype=float)
    lo = breaks[:-1, None]
    jac = 0.5 * np.diff(breaks)[:, None]
    if np.any(jac <= 0):
        raise ValueError("cell breaks must be strictly increasing")
    return lo + jac * (rule.points[None, :] + 1.0), jac * rule.weights[None, :]
