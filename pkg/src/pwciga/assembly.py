"""Element-loop assembly of Galerkin and piece-wise constant (PWC)
Petrov-Galerkin systems on tensor-product B-spline spaces.

Integration runs over *cells*: the trial elements, further split at the
endpoints of PWC test intervals and at the breakpoints a field declares.
Every integrand is then polynomial on each cell, and Gauss rules of the
right size integrate it exactly.

Right-hand sides follow two loop structures. The Galerkin path walks over
cells, then over the ``(p+1)^dim`` local test functions, with the
quadrature sum innermost (vectorized over cells). The PWC path only sums
weighted field values per cell and never evaluates a test function.
"""

from __future__ import annotations

import itertools
import string
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .bspline import BasisSpec, basis_table, collocation_matrix
from .fields import Field, as_field
from .quadrature import QuadRule, composite, gauss_legendre, points_for_degree
from .solver import BandedMatrix
from .testspace import PwcTestSet, RowSummationPlan

MERGE_RTOL = 1e-13


# --------------------------------------------------------------------------
# work counters

@dataclass
class WorkCounters:
    """Exact tallies of work done inside assembly routines.

    Attributes:
        quad_points: quadrature points at which an integrand was evaluated.
        basis_evals: 1D test-function values computed.
        trial_evals: 1D trial-function values (or derivatives) computed.
    """

    quad_points: int = 0
    basis_evals: int = 0
    trial_evals: int = 0


_ACTIVE: list[WorkCounters] = []


@contextmanager
def count_work():
    """Collect :class:`WorkCounters` for the assembly calls made in the block."""
    c = WorkCounters()
    _ACTIVE.append(c)
    try:
        yield c
    finally:
        _ACTIVE.remove(c)


def _tally(quad_points=0, basis_evals=0, trial_evals=0):
    for c in _ACTIVE:
        c.quad_points += int(quad_points)
        c.basis_evals += int(basis_evals)
        c.trial_evals += int(trial_evals)


# --------------------------------------------------------------------------
# cells and per-axis tables

def _merge_breaks(lo, hi, *arrays):
    pts = np.concatenate([np.asarray(a, dtype=float).ravel() for a in arrays] + [[lo, hi]])
    pts = np.unique(pts[(pts >= lo) & (pts <= hi)])
    tol = MERGE_RTOL * max(1.0, abs(lo), abs(hi))
    keep = np.concatenate([[True], np.diff(pts) > tol])
    pts = pts[keep]
    pts[0], pts[-1] = lo, hi
    return pts


def _rule(rule, default_n):
    if rule is None:
        return gauss_legendre(default_n)
    if isinstance(rule, QuadRule):
        return rule
    return gauss_legendre(int(rule))


def _rules(rules, dim, default_ns):
    if isinstance(rules, (list, tuple)):
        if len(rules) != dim:
            raise ValueError(f"expected {dim} quadrature rules, got {len(rules)}")
        return [_rule(r, n) for r, n in zip(rules, default_ns)]
    return [_rule(rules, n) for n in default_ns]


@dataclass
class _Cells:
    breaks: np.ndarray
    points: np.ndarray   # (nc, q)
    weights: np.ndarray  # (nc, q)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def mids(self):
        return 0.5 * (self.breaks[:-1] + self.breaks[1:])


def _make_cells(breaks, rule):
    pts, w = composite(rule, breaks)
    return _Cells(breaks, pts, w)


def _trial_table(spec, cells, nder=0):
    """First local index per cell and ``(nc, q, nder+1, p+1)`` basis derivatives."""
    first, vals = basis_table(spec, cells.points.ravel(), nder)
    nc, q = cells.points.shape
    first = first.reshape(nc, q)[:, 0]
    # derivatives of every local function at the cell midpoint span
    mid_first, _ = basis_table(spec, cells.mids, 0)
    if np.any(mid_first != first):
        raise AssertionError("quadrature points of a cell fall in different knot spans")
    return first, vals.reshape(nc, q, nder + 1, spec.degree + 1)


def _membership(tests: PwcTestSet, cells: _Cells):
    """0/1 matrix ``P[i, c] = 1`` when cell ``c`` lies inside interval ``i``."""
    mids = cells.mids
    lo = tests.intervals[:, 0:1]
    hi = tests.intervals[:, 1:2]
    return ((mids[None, :] > lo) & (mids[None, :] < hi)).astype(float)


def _pwc_cells(trial_breaks, tests: PwcTestSet, rule, extra=()):
    lo = float(tests.intervals[:, 0].min())
    hi = float(tests.intervals[:, 1].max())
    breaks = _merge_breaks(lo, hi, trial_breaks, tests.intervals, *extra)
    return _make_cells(breaks, rule)


def _group_starts(first):
    """Start positions of runs of equal values in a non-decreasing array."""
    return np.flatnonzero(np.concatenate([[True], np.diff(first) != 0]))


def _reduce_cells(c, firsts):
    """Sum cell contributions that map to the same element, axis by axis."""
    out_firsts = []
    for d, f in enumerate(firsts):
        starts = _group_starts(f)
        if starts.size != f.size:
            c = np.add.reduceat(c, starts, axis=d)
        out_firsts.append(f[starts])
    return c, out_firsts


# --------------------------------------------------------------------------
# 1D matrices

def _check_rule(rule, degree, what):
    need = points_for_degree(degree)
    if rule.n < need:
        raise ValueError(f"{what}: {rule.n}-point rule is not exact for degree {degree}; "
                         f"need at least {need} points")


def galerkin_rect_1d(test: BasisSpec, trial: BasisSpec, rule=None,
                     test_der: int = 0, trial_der: int = 0) -> np.ndarray:
    """Dense ``A[m, j] = int test_m^(test_der) trial_j^(trial_der) dx``."""
    if test.domain != trial.domain:
        raise ValueError("test and trial spaces live on different intervals")
    deg = max(test.degree - test_der, 0) + max(trial.degree - trial_der, 0)
    rule = _rule(rule, points_for_degree(deg))
    _check_rule(rule, deg, "galerkin matrix")
    a, b = trial.domain
    cells = _make_cells(_merge_breaks(a, b, test.breaks, trial.breaks), rule)
    tf, tv = _trial_table(test, cells, test_der)
    bf, bv = _trial_table(trial, cells, trial_der)
    _tally(quad_points=cells.points.size,
           basis_evals=tv[..., test_der, :].size, trial_evals=bv[..., trial_der, :].size)
    local = np.einsum("cq,cqi,cqj->cij", cells.weights, tv[:, :, test_der, :], bv[:, :, trial_der, :])
    out = np.zeros((test.n, trial.n))
    pt, pb = test.degree + 1, trial.degree + 1
    for i in range(pt):
        for j in range(pb):
            np.add.at(out, (tf + i, bf + j), local[:, i, j])
    return out


def mass_1d_galerkin(spec: BasisSpec, rule=None) -> BandedMatrix:
    """Banded ``M[i, j] = int B_i B_j dx``; the rule must be exact for degree 2p."""
    rule = _rule(rule, points_for_degree(2 * spec.degree))
    _check_rule(rule, 2 * spec.degree, "mass_1d_galerkin")
    m = galerkin_rect_1d(spec, spec, rule)
    return BandedMatrix.from_dense(m, spec.degree, spec.degree)


def pwc_matrix_1d(trial: BasisSpec, tests: PwcTestSet, rule=None, trial_der: int = 0) -> np.ndarray:
    """Dense ``A[i, j] = int_{I_i} B_j^(trial_der) dx`` for any interval family."""
    a, b = trial.domain
    if tests.intervals.min() < a - MERGE_RTOL * max(1, abs(a)) or \
            tests.intervals.max() > b + MERGE_RTOL * max(1, abs(b)):
        raise ValueError("test intervals leave the trial domain")
    deg = max(trial.degree - trial_der, 0)
    rule = _rule(rule, points_for_degree(deg))
    _check_rule(rule, deg, "pwc matrix")
    cells = _pwc_cells(trial.breaks, tests, rule)
    bf, bv = _trial_table(trial, cells, trial_der)
    _tally(quad_points=cells.points.size, trial_evals=bv[..., trial_der, :].size)
    per_cell = np.einsum("cq,cqj->cj", cells.weights, bv[:, :, trial_der, :])
    v = np.zeros((cells.n, trial.n))
    for j in range(trial.degree + 1):
        v[np.arange(cells.n), bf + j] = per_cell[:, j]
    return _membership(tests, cells) @ v


def _aligned(trial: BasisSpec, tests: PwcTestSet) -> bool:
    a, b = trial.domain
    tol = 1e-12 * max(1.0, abs(a), abs(b))
    grid = tests.grid

    def on_grid(x):
        return np.abs(np.asarray(x)[:, None] - grid[None, :]).min(axis=1) <= tol

    refines = bool(np.all(on_grid(trial.breaks)))
    steps = np.diff(grid)
    uniform = abs(grid[0] - a) <= tol and abs(grid[-1] - b) <= tol and \
        np.ptp(steps) <= tol
    return refines or bool(uniform)


def mass_1d_pwc(trial: BasisSpec, tests: PwcTestSet, rule=None) -> BandedMatrix:
    """Banded ``M[i, j] = int_{I_i} B_j dx``, looping over cells inside each interval.

    Intervals count as element-aligned when the test set's grid refines the
    trial breaks or is a uniform partition of the domain.

    Raises:
        ValueError: on misaligned intervals, a count differing from the
            number of trial functions, or a rule not exact for degree p.
    """
    if not _aligned(trial, tests):
        raise ValueError("test interval endpoints are not element-aligned")
    if tests.n != trial.n:
        raise ValueError(f"{tests.n} test intervals for {trial.n} trial functions")
    rule = _rule(rule, points_for_degree(trial.degree))
    _check_rule(rule, trial.degree, "mass_1d_pwc")
    return BandedMatrix.from_dense(pwc_matrix_1d(trial, tests, rule))


def endpoint_trace(tests, spec: BasisSpec, side: int) -> np.ndarray:
    """Test-function values at the domain end ``side`` (0 = left, 1 = right).

    ``tests`` is a :class:`PwcTestSet` (indicator of intervals touching the
    end) or None for the B-spline test space of ``spec``.
    """
    a, b = spec.domain
    e = a if side == 0 else b
    if tests is None:
        return collocation_matrix(spec, [e])[0]
    iv = tests.intervals
    return ((iv[:, 0] <= e) & (iv[:, 1] >= e)).astype(float)


# --------------------------------------------------------------------------
# right-hand sides

def _grid_values(field: Field, cells_list):
    """Field values times tensor weights, shape (nc0, q0, nc1, q1, ...)."""
    vals = field.on_grid([c.points.ravel() for c in cells_list])
    for d, c in enumerate(cells_list):
        shape = [1] * len(cells_list)
        shape[d] = c.weights.size
        vals = vals * c.weights.ravel().reshape(shape)
    shape = []
    for c in cells_list:
        shape.extend(c.points.shape)
    return vals.reshape(shape)


def _einsum_spec(dim):
    cell = string.ascii_lowercase[:dim]
    quad = string.ascii_uppercase[:dim]
    grid = "".join(c + q for c, q in zip(cell, quad))
    tabs = ",".join(c + q for c, q in zip(cell, quad))
    return f"{grid},{tabs}->{cell}"


def _as_specs(specs):
    return [specs] if isinstance(specs, BasisSpec) else list(specs)


def _galerkin_from_values(fw, specs, cells_list):
    """Listing-order accumulation: local test functions outer, quadrature inner."""
    dim = len(specs)
    tables = []
    firsts = []
    for spec, cells in zip(specs, cells_list):
        f, v = _trial_table(spec, cells, 0)
        firsts.append(f)
        tables.append(v[:, :, 0, :])
        _tally(basis_evals=v[:, :, 0, :].size)
    sub = _einsum_spec(dim)
    out = np.zeros(tuple(s.n for s in specs))
    for local in itertools.product(*[range(s.degree + 1) for s in specs]):
        c = np.einsum(sub, fw, *[t[:, :, i] for t, i in zip(tables, local)], optimize=True)
        c, fs = _reduce_cells(c, firsts)
        out[np.ix_(*[f + i for f, i in zip(fs, local)])] += c
    return out


def rhs_galerkin(f, specs, rules=None) -> np.ndarray:
    """``L[i, j, ...] = int f * B_i B_j ... dx`` over the tensor-product space.

    ``rules`` may be one rule, one per axis, point counts, or None; by default
    the point count is exact for ``deg f + p`` when the field declares a
    degree and for ``2p`` otherwise.
    """
    field = as_field(f)
    specs = _as_specs(specs)
    dim = len(specs)
    if not 1 <= dim <= 3:
        raise ValueError(f"dimension must be 1, 2 or 3, got {dim}")
    defaults = [points_for_degree((field.degree if field.degree is not None else s.degree) + s.degree)
                for s in specs]
    rule_list = _rules(rules, dim, defaults)
    cells_list = []
    for d, (spec, rule) in enumerate(zip(specs, rule_list)):
        a, b = spec.domain
        cells_list.append(_make_cells(_merge_breaks(a, b, spec.breaks, field.breaks_for(d)), rule))
    fw = _grid_values(field, cells_list)
    _tally(quad_points=np.prod([c.points.size for c in cells_list]))
    return _galerkin_from_values(fw, specs, cells_list)


def _pwc_from_values(fw, tests_list, cells_list):
    dim = len(cells_list)
    # sum the quadrature axes: cell integrals
    c = fw.sum(axis=tuple(range(1, 2 * dim, 2)))
    for d, (tests, cells) in enumerate(zip(tests_list, cells_list)):
        if tests.n == cells.n and np.allclose(tests.intervals.ravel(),
                                              np.repeat(cells.breaks, 2)[1:-1]):
            continue
        c = np.moveaxis(np.tensordot(_membership(tests, cells), c, axes=([1], [d])), 0, d)
    return c


def rhs_pwc(f, tests, rules=None, domains=None) -> np.ndarray:
    """``L[i, j, ...] = int_{I_i x I_j x ...} f dx``; no test function is evaluated.

    ``tests`` is one :class:`PwcTestSet` per axis. Integration cells are the
    test intervals split at the field's declared breaks; by default the
    point count is exact for ``deg f`` when the field declares a degree.
    """
    field = as_field(f)
    tests_list = [tests] if isinstance(tests, PwcTestSet) else list(tests)
    dim = len(tests_list)
    if not 1 <= dim <= 3:
        raise ValueError(f"dimension must be 1, 2 or 3, got {dim}")
    default = points_for_degree(field.degree) if field.degree is not None else 3
    rule_list = _rules(rules, dim, [default] * dim)
    cells_list = [_pwc_cells(np.empty(0), t, r, (field.breaks_for(d),))
                  for d, (t, r) in enumerate(zip(tests_list, rule_list))]
    fw = _grid_values(field, cells_list)
    _tally(quad_points=np.prod([c.points.size for c in cells_list]))
    return _pwc_from_values(fw, tests_list, cells_list)


# --------------------------------------------------------------------------
# 2D operators

def _pairs_2d(specs, tests, rule, nder):
    """Cells, trial tables and (for B-spline tests) test tables on both axes."""
    axes = []
    for d, spec in enumerate(specs):
        a, b = spec.domain
        if tests is None:
            cells = _make_cells(spec.breaks, rule)
            owner = None
        else:
            cells = _pwc_cells(spec.breaks, tests[d], rule)
            memb = _membership(tests[d], cells)
            if np.any(memb.sum(axis=0) > 1):
                raise ValueError("2D PWC assembly needs pairwise disjoint test intervals")
            owner = np.where(memb.any(axis=0), memb.argmax(axis=0), -1)
        first, tab = _trial_table(spec, cells, nder)
        _tally(trial_evals=tab.size)
        if tests is None:
            _tally(basis_evals=tab.size)
        axes.append((cells, first, tab, owner))
    return axes


def _assemble_2d(specs, tests, rule, terms, nder):
    """Sparse 2D matrix from a sum of separable terms.

    ``terms`` holds ``(test_dx, test_dy, trial_dx, trial_dy, coef)`` tuples;
    for PWC tests the test derivatives must be zero.
    """
    (cx, fx, bx, ox), (cy, fy, by, oy) = _pairs_2d(specs, tests, rule, nder)
    nx, ny = specs[0].n, specs[1].n
    px, py = specs[0].degree + 1, specs[1].degree + 1
    _tally(quad_points=cx.points.size * cy.points.size)
    if tests is None:
        local = 0.0
        for tdx, tdy, bdx, bdy, coef in terms:
            local = local + coef * np.einsum(
                "aA,bB,aAi,bBj,aAk,bBl->abijkl", cx.weights, cy.weights,
                bx[:, :, tdx, :], by[:, :, tdy, :], bx[:, :, bdx, :], by[:, :, bdy, :],
                optimize=True)
        ntx, nty = nx, ny
        rx = fx[:, None] + np.arange(px)[None, :]
        ry = fy[:, None] + np.arange(py)[None, :]
        rows = (rx[:, None, :, None] * nty + ry[None, :, None, :])
        rows = np.broadcast_to(rows[:, :, :, :, None, None], local.shape)
    else:
        local = 0.0
        for tdx, tdy, bdx, bdy, coef in terms:
            if tdx or tdy:
                raise ValueError("indicator test functions have no derivatives")
            local = local + coef * np.einsum(
                "aA,bB,aAk,bBl->abkl", cx.weights, cy.weights,
                bx[:, :, bdx, :], by[:, :, bdy, :], optimize=True)
        keep = (ox[:, None] >= 0) & (oy[None, :] >= 0)
        local = np.where(keep[:, :, None, None], local, 0.0)
        ntx, nty = tests[0].n, tests[1].n
        rows = np.maximum(ox, 0)[:, None] * nty + np.maximum(oy, 0)[None, :]
        local = local[:, :, None, None, :, :]
        rows = np.broadcast_to(rows[:, :, None, None, None, None], local.shape)
    kx = fx[:, None] + np.arange(px)[None, :]
    ky = fy[:, None] + np.arange(py)[None, :]
    cols = kx[:, None, :, None] * ny + ky[None, :, None, :]
    cols = np.broadcast_to(cols[:, :, None, None, :, :], local.shape)
    mat = scipy.sparse.coo_matrix(
        (local.ravel(), (rows.ravel(), cols.ravel())), shape=(ntx * nty, nx * ny))
    return mat.tocsr()


SIDES = {"left": (0, 0), "right": (0, 1), "bottom": (1, 0), "top": (1, 1)}


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary condition type per side of the unit box: 'D' or 'N'."""

    left: str = "D"
    right: str = "D"
    bottom: str = "D"
    top: str = "D"

    def __post_init__(self):
        for side in SIDES:
            if getattr(self, side) not in ("D", "N"):
                raise ValueError(f"side {side}: condition must be 'D' or 'N'")

    def sides(self, kind):
        return [s for s in SIDES if getattr(self, s) == kind]

    @classmethod
    def parse(cls, text: str) -> "BoundarySpec":
        """Parse ``"all=D"``, ``"left=D,right=N,..."`` or a 4-letter ``"DDNN"``
        string (left, right, bottom, top)."""
        text = text.strip()
        if len(text) == 4 and set(text.upper()) <= {"D", "N"}:
            return cls(*text.upper())
        kw = {}
        for part in filter(None, (p.strip() for p in text.split(","))):
            if "=" not in part:
                raise ValueError(f"bad boundary clause {part!r}")
            key, val = (s.strip() for s in part.split("=", 1))
            val = val.upper()
            if key == "all":
                kw.update({s: val for s in SIDES})
            elif key in SIDES:
                kw[key] = val
            else:
                raise ValueError(f"unknown boundary side {key!r}")
        return cls(**kw)


def laplace_2d_weak(specs, rule=None):
    """``K[(i,j),(k,l)] = int grad(B_i B_j) . grad(B_k B_l)``, sparse CSR."""
    specs = list(specs)
    p = min(s.degree for s in specs)
    if p < 1:
        raise ValueError("the weak Laplacian needs p >= 1")
    rule = _rule(rule, points_for_degree(2 * max(s.degree for s in specs)))
    _check_rule(rule, 2 * max(s.degree for s in specs), "laplace_2d_weak")
    terms = [(1, 0, 1, 0, 1.0), (0, 1, 0, 1, 1.0)]
    return _assemble_2d(specs, None, rule, terms, 1)


def _mass_1d_dense(spec, tests, rule):
    if tests is None:
        return galerkin_rect_1d(spec, spec, rule)
    return pwc_matrix_1d(spec, tests, rule)


def laplace_2d_strong(specs, rule=None, boundary: BoundarySpec | None = None, tests=None):
    """``-int v Lap(u)`` plus the normal-flux term on Neumann sides.

    ``tests`` is None for B-spline tests, or a pair of :class:`PwcTestSet`.
    With B-spline tests and exact quadrature this equals
    :func:`laplace_2d_weak` on every row whose test function vanishes on the
    Dirichlet part of the boundary.
    """
    specs = list(specs)
    if min(s.degree for s in specs) < 2:
        raise ValueError("the strong-form Laplacian needs p >= 2")
    boundary = boundary or BoundarySpec()
    pmax = max(s.degree for s in specs)
    rule = _rule(rule, points_for_degree(2 * pmax))
    _check_rule(rule, 2 * pmax if tests is None else pmax, "laplace_2d_strong")
    terms = [(0, 0, 2, 0, -1.0), (0, 0, 0, 2, -1.0)]
    mat = _assemble_2d(specs, tests, rule, terms, 2)
    for side in boundary.sides("N"):
        mat = mat + _flux_term(specs, tests, rule, side)
    return mat.tocsr()


def _flux_term(specs, tests, rule, side):
    d, end = SIDES[side]
    o = 1 - d
    sign = -1.0 if end == 0 else 1.0
    spec_d = specs[d]
    a, b = spec_d.domain
    e = a if end == 0 else b
    t_d = endpoint_trace(None if tests is None else tests[d], spec_d, end)
    dB = collocation_matrix(spec_d, [e], order=1)[0]
    edge = sign * np.outer(t_d, dB)
    m_o = _mass_1d_dense(specs[o], None if tests is None else tests[o], rule)
    pieces = (edge, m_o) if d == 0 else (m_o, edge)
    return scipy.sparse.kron(scipy.sparse.csr_matrix(pieces[0]), scipy.sparse.csr_matrix(pieces[1]))


def _restrict_to_side(g: Field, d, e):
    def func(t):
        return g.func(np.full_like(t, e), t) if d == 0 else g.func(t, np.full_like(t, e))
    brk = None if g.breaks is None else (g.breaks_for(1 - d),)
    return Field(func, g.degree, brk)


def neumann_load(specs, g, boundary: BoundarySpec, tests=None, rule=None) -> np.ndarray:
    """Load from the flux data ``g`` on Neumann sides, tensor of shape (Nx, Ny)."""
    g = as_field(g)
    specs = list(specs)
    shape = tuple(s.n if tests is None else t.n for s, t in zip(specs, tests or (None, None)))
    out = np.zeros(shape)
    for side in boundary.sides("N"):
        d, end = SIDES[side]
        o = 1 - d
        a, b = specs[d].domain
        e = a if end == 0 else b
        g1 = _restrict_to_side(g, d, e)
        if tests is None:
            line = rhs_galerkin(g1, [specs[o]], rule)
            t_d = endpoint_trace(None, specs[d], end)
        else:
            line = rhs_pwc(g1, [tests[o]], rule)
            t_d = endpoint_trace(tests[d], specs[d], end)
        out += np.outer(t_d, line) if d == 0 else np.outer(line, t_d)
    return out


def dirichlet_rows(specs, boundary: BoundarySpec, tests=None) -> np.ndarray:
    """Flat row indices whose test function touches a Dirichlet side."""
    specs = list(specs)
    shape = tuple(s.n if tests is None else t.n for s, t in zip(specs, tests or (None, None)))
    mask = np.zeros(shape, dtype=bool)
    for side in boundary.sides("D"):
        d, end = SIDES[side]
        t_d = endpoint_trace(None if tests is None else tests[d], specs[d], end) != 0
        if d == 0:
            mask[t_d, :] = True
        else:
            mask[:, t_d] = True
    return np.flatnonzero(mask.ravel())


def apply_dirichlet(system, rhs, rows, values=None):
    """Set the listed rows to unit rows, with right-hand side 0 (or ``values``).

    Returns new ``(matrix, rhs)``; all other entries are left untouched.
    """
    rows = np.asarray(rows, dtype=int).ravel()
    b = np.array(rhs, dtype=float, copy=True)
    flat = b.reshape(-1)
    if scipy.sparse.issparse(system):
        a = scipy.sparse.lil_matrix(system, copy=True)
        for r in rows:
            a.rows[r] = [int(r)]
            a.data[r] = [1.0]
        a = a.tocsr()
    else:
        a = np.array(system, dtype=float, copy=True)
        a[rows, :] = 0.0
        a[rows, rows] = 1.0
    flat[rows] = 0.0 if values is None else np.asarray(values, dtype=float)
    return a, b


# --------------------------------------------------------------------------
# row summation and export

def sum_rows(rect, rhs, plan: RowSummationPlan):
    """Replace the system by sums of its rows over the plan's index sets."""
    n_rows = rect.shape[0]
    if n_rows != plan.refined_spec.n:
        raise ValueError(f"matrix has {n_rows} rows, plan expects {plan.refined_spec.n}")
    b = None if rhs is None else np.asarray(rhs, dtype=float)
    if b is not None and b.shape[0] != n_rows:
        raise ValueError("rhs length does not match the matrix")
    dense = not scipy.sparse.issparse(rect)
    a = np.asarray(rect, dtype=float) if dense else rect.tocsr()
    out_a = np.zeros((plan.n_sets, rect.shape[1]))
    out_b = None if b is None else np.zeros((plan.n_sets,) + b.shape[1:])
    for i, js in enumerate(plan.index_sets):
        for m in js:
            out_a[i] += a[m] if dense else a[m].toarray()[0]
            if b is not None:
                out_b[i] += b[m]
    return out_a, out_b


def write_coo(matrix, fh):
    """Write ``row col value`` triplets (0-based), one per line."""
    coo = scipy.sparse.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
        fh.write(f"{r} {c} {float(v)!r}\n")


def read_coo(fh, shape=None):
    data = np.loadtxt(fh, ndmin=2)
    if data.size == 0:
        return scipy.sparse.csr_matrix(shape or (0, 0))
    r, c, v = data[:, 0].astype(int), data[:, 1].astype(int), data[:, 2]
    if shape is None:
        shape = (r.max() + 1, c.max() + 1)
    return scipy.sparse.coo_matrix((v, (r, c)), shape=shape).tocsr()
