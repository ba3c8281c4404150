"""Scalar fields handed to the assembly routines.

A field is evaluated on tensor grids: it receives one coordinate array per
axis, shaped to broadcast against each other, and must return values that
broadcast to the full grid shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class Field:
    """A scalar field with optional hints for exact quadrature.

    Attributes:
        func: callable taking one broadcastable coordinate array per axis.
        degree: polynomial degree per axis, if the field is a polynomial
            (or piecewise polynomial between ``breaks``).
        breaks: per-axis arrays of points where the field is not smooth.
    """

    func: Callable
    degree: int | None = None
    breaks: Sequence[np.ndarray] | None = None

    def __call__(self, *coords):
        return self.func(*coords)

    def on_grid(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        """Values on the tensor grid spanned by the 1D point arrays ``axes``."""
        dim = len(axes)
        coords = []
        for d, pts in enumerate(axes):
            shape = [1] * dim
            shape[d] = pts.size
            coords.append(np.asarray(pts, dtype=float).reshape(shape))
        vals = np.asarray(self.func(*coords), dtype=float)
        return np.broadcast_to(vals, tuple(p.size for p in axes))

    def breaks_for(self, axis: int) -> np.ndarray:
        if self.breaks is None:
            return np.empty(0)
        return np.asarray(self.breaks[axis], dtype=float)


def as_field(f) -> Field:
    if isinstance(f, Field):
        return f
    if callable(f):
        return Field(f)
    c = float(f)
    return Field(lambda *xs: np.full((), c), degree=0)


def constant(c: float) -> Field:
    return Field(lambda *xs: np.full((), float(c)), degree=0)


def cubic_product(coeffs=None, dim: int = 3) -> Field:
    """Product of per-axis cubics ``a x^3 + b x^2 + c x + d``.

    ``coeffs`` is a sequence of ``(a, b, c, d)`` tuples, one per axis;
    all ones by default.
    """
    if coeffs is None:
        coeffs = [(1.0, 1.0, 1.0, 1.0)] * dim
    coeffs = [tuple(float(v) for v in c) for c in coeffs]

    def func(*xs):
        out = 1.0
        for (a, b, c, d), x in zip(coeffs, xs):
            out = out * (((a * x + b) * x + c) * x + d)
        return out

    return Field(func, degree=3)


def pixel_field(channel: np.ndarray, domain=((0.0, 1.0), (0.0, 1.0))) -> Field:
    """Piecewise-constant field from a 2D raster, axis 0 = columns (x), axis 1 = rows (y).

    Pixel ``(row, col)`` covers ``x in [col/W, (col+1)/W]`` and
    ``y in [row/H, (row+1)/H]`` on the unit square.
    """
    data = np.asarray(channel, dtype=float)
    h, w = data.shape
    (ax, bx), (ay, by) = domain
    xb = np.linspace(ax, bx, w + 1)
    yb = np.linspace(ay, by, h + 1)

    def func(x, y):
        col = np.clip(((x - ax) / (bx - ax) * w).astype(int), 0, w - 1)
        row = np.clip(((y - ay) / (by - ay) * h).astype(int), 0, h - 1)
        return data[row, col]

    return Field(func, degree=0, breaks=(xb, yb))
