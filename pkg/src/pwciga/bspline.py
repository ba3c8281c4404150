"""Clamped B-spline bases: construction, evaluation, derivatives and supports.

Basis functions are indexed from 0. On a clamped knot vector of degree ``p``
with ``N`` functions, the knot span containing ``x`` is the index ``s`` with
``knots[s] <= x < knots[s + 1]``; the ``p + 1`` functions ``s - p, ..., s``
are the only ones that can be nonzero there.

The right endpoint ``x = b`` is assigned to the last nonempty span, and at an
interior knot the span to the right of the knot is used, so derivative
values at interior knots are right limits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_DEGREE = 5


@dataclass(frozen=True)
class BasisSpec:
    """A 1D B-spline basis given by a degree and a clamped knot vector.

    Attributes:
        knots (ndarray): non-decreasing knot values; the first and last knot
            are repeated exactly ``degree + 1`` times, interior knots are simple.
        degree (int): polynomial degree ``p``.
    """

    knots: np.ndarray
    degree: int
    breaks: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        knots = np.array(self.knots, dtype=float)
        knots.setflags(write=False)
        p = int(self.degree)
        if not 0 <= p <= MAX_DEGREE:
            raise ValueError(f"degree must be in [0, {MAX_DEGREE}], got {p}")
        if knots.ndim != 1 or knots.size < 2 * (p + 1):
            raise ValueError("knot vector too short for the requested degree")
        if np.any(np.diff(knots) < 0):
            raise ValueError("knots must be non-decreasing")
        a, b = knots[0], knots[-1]
        if not a < b:
            raise ValueError("knot vector spans an empty interval")
        if np.count_nonzero(knots == a) != p + 1 or np.count_nonzero(knots == b) != p + 1:
            raise ValueError("knot vector must be clamped: end knots repeated exactly p+1 times")
        interior = knots[p + 1:-(p + 1)]
        if interior.size and np.any(np.diff(interior) == 0):
            raise ValueError("repeated interior knots are not supported")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "degree", p)
        breaks = np.unique(knots)
        breaks.setflags(write=False)
        object.__setattr__(self, "breaks", breaks)

    def __hash__(self):
        return hash((self.degree, self.knots.tobytes()))

    def __eq__(self, other):
        if not isinstance(other, BasisSpec):
            return NotImplemented
        return self.degree == other.degree and np.array_equal(self.knots, other.knots)

    @property
    def n(self) -> int:
        """Number of basis functions."""
        return self.knots.size - self.degree - 1

    @property
    def n_elems(self) -> int:
        return self.breaks.size - 1

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def to_text(self) -> str:
        """Whitespace-separated text: the degree followed by the knots."""
        return " ".join([str(self.degree)] + [repr(float(t)) for t in self.knots])

    @classmethod
    def from_text(cls, text: str) -> "BasisSpec":
        tokens = text.split()
        if not tokens:
            raise ValueError("empty knot vector text")
        return cls(np.array([float(t) for t in tokens[1:]]), int(tokens[0]))


def make_uniform_clamped(a: float, b: float, n_elems: int, p: int) -> BasisSpec:
    """Clamped knot vector with ``n_elems`` equal elements on ``[a, b]``."""
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if n_elems < 1:
        raise ValueError(f"need at least one element, got {n_elems}")
    if p < 0:
        raise ValueError(f"degree must be non-negative, got {p}")
    inner = np.linspace(a, b, n_elems + 1)
    knots = np.concatenate([np.full(p, a), inner, np.full(p, b)])
    return BasisSpec(knots, p)


def greville(spec: BasisSpec) -> np.ndarray:
    """Greville abscissae; a spline with these coefficients reproduces x."""
    p = spec.degree
    if p == 0:
        return 0.5 * (spec.knots[:-1] + spec.knots[1:])
    t = spec.knots
    return np.array([t[i + 1:i + p + 1].mean() for i in range(spec.n)])


def find_span(spec: BasisSpec, x) -> np.ndarray:
    """Knot span indices for the points ``x`` (array_like)."""
    x = np.asarray(x, dtype=float)
    a, b = spec.domain
    if np.any(x < a) or np.any(x > b) or np.any(np.isnan(x)):
        raise ValueError(f"evaluation point outside the domain [{a}, {b}]")
    span = np.searchsorted(spec.knots, x, side="right") - 1
    return np.clip(span, spec.degree, spec.n - 1)


def _basis_values(knots, p, span, x):
    # Cox-de Boor triangle, vectorized over points.
    m = x.shape[0]
    vals = np.zeros((m, p + 1))
    vals[:, 0] = 1.0
    left = np.zeros((m, p + 1))
    right = np.zeros((m, p + 1))
    for j in range(1, p + 1):
        left[:, j] = x - knots[span + 1 - j]
        right[:, j] = knots[span + j] - x
        saved = np.zeros(m)
        for r in range(j):
            temp = vals[:, r] / (right[:, r + 1] + left[:, j - r])
            vals[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        vals[:, j] = saved
    return vals


def _basis_derivatives(knots, p, span, x, nder):
    """All derivatives 0..nder of the p+1 local functions, shape (m, nder+1, p+1)."""
    m = x.shape[0]
    ndu = np.zeros((m, p + 1, p + 1))
    ndu[:, 0, 0] = 1.0
    left = np.zeros((m, p + 1))
    right = np.zeros((m, p + 1))
    for j in range(1, p + 1):
        left[:, j] = x - knots[span + 1 - j]
        right[:, j] = knots[span + j] - x
        saved = np.zeros(m)
        for r in range(j):
            # lower triangle holds knot differences, upper triangle basis values
            ndu[:, j, r] = right[:, r + 1] + left[:, j - r]
            temp = ndu[:, r, j - 1] / ndu[:, j, r]
            ndu[:, r, j] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        ndu[:, j, j] = saved

    ders = np.zeros((m, nder + 1, p + 1))
    ders[:, 0, :] = ndu[:, :, p]
    for r in range(p + 1):
        a = np.zeros((2, m, p + 1))
        s1, s2 = 0, 1
        a[s1, :, 0] = 1.0
        for k in range(1, nder + 1):
            d = np.zeros(m)
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, :, 0] = a[s1, :, 0] / ndu[:, pk + 1, rk]
                d = a[s2, :, 0] * ndu[:, rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, :, j] = (a[s1, :, j] - a[s1, :, j - 1]) / ndu[:, pk + 1, rk + j]
                d = d + a[s2, :, j] * ndu[:, rk + j, pk]
            if r <= pk:
                a[s2, :, k] = -a[s1, :, k - 1] / ndu[:, pk + 1, r]
                d = d + a[s2, :, k] * ndu[:, r, pk]
            ders[:, k, r] = d
            s1, s2 = s2, s1
    fac = p
    for k in range(1, nder + 1):
        ders[:, k, :] *= fac
        fac *= p - k
    return ders


def eval_nonzero(spec: BasisSpec, x: float) -> tuple[int, np.ndarray]:
    """Values of the ``p + 1`` basis functions that may be nonzero at ``x``.

    Returns:
        (first_index, values) with ``values[j] = B_{first_index + j}(x)``.
    """
    span = find_span(spec, [x])
    vals = _basis_values(spec.knots, spec.degree, span, np.array([float(x)]))
    return int(span[0]) - spec.degree, vals[0]


def eval_nonzero_deriv(spec: BasisSpec, x: float, order: int) -> tuple[int, np.ndarray]:
    """``order``-th derivatives of the local basis functions at ``x``."""
    if not 0 <= order <= spec.degree:
        raise ValueError(f"derivative order must be in [0, {spec.degree}], got {order}")
    if order == 0:
        return eval_nonzero(spec, x)
    span = find_span(spec, [x])
    ders = _basis_derivatives(spec.knots, spec.degree, span, np.array([float(x)]), order)
    return int(span[0]) - spec.degree, ders[0, order]


def basis_table(spec: BasisSpec, x, nder: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized local evaluation at many points.

    Returns:
        first (ndarray of int, shape (m,)): index of the first local function.
        values (ndarray, shape (m, nder + 1, p + 1)): derivatives ``0..nder``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if nder < 0:
        raise ValueError(f"derivative order must be non-negative, got {nder}")
    p = spec.degree
    span = find_span(spec, x)
    # derivatives above the degree vanish inside every span
    vals = np.zeros((x.size, nder + 1, p + 1))
    if nder == 0 or p == 0:
        vals[:, 0, :] = _basis_values(spec.knots, p, span, x)
    else:
        k = min(nder, p)
        vals[:, :k + 1, :] = _basis_derivatives(spec.knots, p, span, x, k)
    return span - p, vals


def collocation_matrix(spec: BasisSpec, x, order: int = 0) -> np.ndarray:
    """Dense matrix ``C[m, i] = B_i^{(order)}(x_m)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    first, vals = basis_table(spec, x, order)
    out = np.zeros((x.size, spec.n))
    rows = np.arange(x.size)
    for j in range(spec.degree + 1):
        out[rows, first + j] = vals[:, order, j]
    return out


def support(spec: BasisSpec, i: int) -> tuple[float, float]:
    """Closed interval outside which ``B_i`` vanishes."""
    if not 0 <= i < spec.n:
        raise IndexError(f"basis index {i} out of range [0, {spec.n})")
    return float(spec.knots[i]), float(spec.knots[i + spec.degree + 1])


def elements_of(spec: BasisSpec) -> np.ndarray:
    """Element boundaries as an ``(n_elems, 2)`` array."""
    return np.column_stack([spec.breaks[:-1], spec.breaks[1:]])
