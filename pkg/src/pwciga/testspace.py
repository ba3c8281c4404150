"""Piece-wise constant test sets and the row-summation construction they
arise from.

A piece-wise constant test function is the indicator of an interval. Summing
consecutive rows of a system tested with B-splines on a refined mesh gives
test functions that equal 1 on a plateau and ramp smoothly to 0 over ``p``
refined elements on each side; the indicator of the plateau is what the
direct PWC assembly uses in their place.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .bspline import BasisSpec, collocation_matrix, greville, make_uniform_clamped

ALIGN_RTOL = 1e-12
PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class PwcTestSet:
    """Ordered intervals whose indicators are the test functions.

    Attributes:
        intervals (ndarray): shape ``(N, 2)``, rows ``(lo, hi)`` with lo < hi.
        grid (ndarray): sorted breakpoints every interval endpoint lies on.
    """

    intervals: np.ndarray
    grid: np.ndarray

    def __post_init__(self):
        iv = np.array(self.intervals, dtype=float).reshape(-1, 2)
        grid = np.unique(np.asarray(self.grid, dtype=float))
        if iv.shape[0] == 0:
            raise ValueError("a test set needs at least one interval")
        if np.any(iv[:, 0] >= iv[:, 1]):
            raise ValueError("every interval needs lo < hi")
        tol = ALIGN_RTOL * max(1.0, float(np.abs(grid).max()))
        dist = np.abs(iv.ravel()[:, None] - grid[None, :]).min(axis=1)
        if np.any(dist > tol):
            raise ValueError("interval endpoints are not aligned with the grid")
        iv.setflags(write=False)
        grid.setflags(write=False)
        object.__setattr__(self, "intervals", iv)
        object.__setattr__(self, "grid", grid)

    @property
    def n(self) -> int:
        return self.intervals.shape[0]

    def widths(self) -> np.ndarray:
        return self.intervals[:, 1] - self.intervals[:, 0]

    def is_disjoint(self) -> bool:
        order = np.argsort(self.intervals[:, 0], kind="stable")
        iv = self.intervals[order]
        return bool(np.all(iv[1:, 0] >= iv[:-1, 1]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("index,lo,hi\n")
        for i, (lo, hi) in enumerate(self.intervals):
            buf.write(f"{i},{float(lo)!r},{float(hi)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, grid=None) -> "PwcTestSet":
        rows = [line.split(",") for line in text.strip().splitlines()]
        if rows and rows[0][0].strip() == "index":
            rows = rows[1:]
        rows.sort(key=lambda r: int(r[0]))
        iv = np.array([[float(r[1]), float(r[2])] for r in rows])
        return cls(iv, iv.ravel() if grid is None else grid)


def default_pwc(trial: BasisSpec, family: str = "uniform") -> PwcTestSet:
    """One interval per trial function, covering the domain without overlap.

    ``family="uniform"`` splits ``[a, b]`` into ``N`` equal cells.
    ``family="greville"`` places the cell boundaries halfway between
    consecutive Greville abscissae.
    """
    a, b = trial.domain
    n = trial.n
    if family == "uniform":
        edges = np.linspace(a, b, n + 1)
    elif family == "greville":
        g = greville(trial)
        edges = np.concatenate([[a], 0.5 * (g[:-1] + g[1:]), [b]])
        # the grid refines the trial partition, so intervals stay element-aligned
        return PwcTestSet(np.column_stack([edges[:-1], edges[1:]]),
                          np.union1d(edges, trial.breaks))
    else:
        raise ValueError(f"unknown interval family {family!r}")
    return PwcTestSet(np.column_stack([edges[:-1], edges[1:]]), edges)


@dataclass(frozen=True)
class RowSummationPlan:
    """Which rows of a refined-test system are summed into each final row.

    Attributes:
        refined_spec (BasisSpec): the refined B-spline test space.
        index_sets (list of range): contiguous refined row ranges, one per
            final row.
        k (int): half-width of the summation window.
        rows (ndarray): the refined row each set is centred on.
    """

    refined_spec: BasisSpec
    index_sets: tuple
    k: int = 0
    rows: np.ndarray | None = None

    @property
    def n_sets(self) -> int:
        return len(self.index_sets)

    def set_for_row(self, r: int) -> range:
        """Window ``max(0, r-k) .. min(N*-1, r+k)`` around refined row ``r``."""
        nstar = self.refined_spec.n
        if not 0 <= r < nstar:
            raise IndexError(f"row {r} out of range [0, {nstar})")
        return range(max(0, r - self.k), min(nstar - 1, r + self.k) + 1)

    def matrix(self):
        """Sparse 0/1 matrix ``S`` with ``S[i, m] = 1`` iff ``m`` is in set ``i``."""
        rows, cols = [], []
        for i, js in enumerate(self.index_sets):
            rows.extend([i] * len(js))
            cols.extend(js)
        return scipy.sparse.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(self.n_sets, self.refined_spec.n))


def summation_plan(trial: BasisSpec, refine_factor: int, k: int) -> RowSummationPlan:
    """Refine the test mesh ``refine_factor`` times and sum windows of ``2k+1`` rows.

    ``N`` windows are kept, centred on refined rows
    ``r_i = round(i (N* - 1) / (N - 1))`` so the final system is square.
    """
    if refine_factor < 1:
        raise ValueError(f"refine_factor must be >= 1, got {refine_factor}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    a, b = trial.domain
    refined = make_uniform_clamped(a, b, refine_factor * trial.n_elems, trial.degree)
    n, nstar = trial.n, refined.n
    if n == 1:
        rows = np.array([(nstar - 1) // 2])
    else:
        rows = np.floor(np.arange(n) * (nstar - 1) / (n - 1) + 0.5).astype(int)
    plan = RowSummationPlan(refined, (), k, rows)
    sets = tuple(plan.set_for_row(int(r)) for r in rows)
    return RowSummationPlan(refined, sets, k, rows)


def eval_summed_test(plan: RowSummationPlan, set_index: int, x) -> np.ndarray:
    """Value of ``sum_{m in J_i} B*_m(x)`` on the refined test space."""
    if not 0 <= set_index < plan.n_sets:
        raise IndexError(f"set index {set_index} out of range [0, {plan.n_sets})")
    js = list(plan.index_sets[set_index])
    c = collocation_matrix(plan.refined_spec, x)
    out = c[:, js].sum(axis=1)
    return out if np.ndim(x) else out[0]


def plateau(plan: RowSummationPlan, set_index: int) -> tuple[float, float]:
    """Interval where the summed test function equals 1 (empty sets raise)."""
    js = plan.index_sets[set_index]
    s, e = js[0], js[-1]
    p = plan.refined_spec.degree
    t = plan.refined_spec.knots
    lo, hi = t[s + p], t[e + 1]
    if not lo < hi:
        raise ValueError(f"set {set_index} has fewer than p+1 functions; no plateau")
    return float(lo), float(hi)


def ramps(plan: RowSummationPlan, set_index: int) -> list[tuple[float, float]]:
    """Intervals where the summed test function lies strictly between 0 and 1."""
    js = plan.index_sets[set_index]
    s, e = js[0], js[-1]
    p = plan.refined_spec.degree
    t = plan.refined_spec.knots
    out = []
    if t[s] < t[s + p]:
        out.append((float(t[s]), float(t[s + p])))
    if t[e + 1] < t[e + p + 1]:
        out.append((float(t[e + 1]), float(t[e + p + 1])))
    return out


def plateau_tests(plan: RowSummationPlan) -> PwcTestSet:
    """The indicator test set the summed rows converge to."""
    iv = np.array([plateau(plan, i) for i in range(plan.n_sets)])
    return PwcTestSet(iv, plan.refined_spec.breaks)


@dataclass(frozen=True)
class WellposednessReport:
    min_abs_pivot: float
    ok: bool


def wellposedness_report(matrix) -> WellposednessReport:
    """LU with partial pivoting; ok when every pivot exceeds 1e-12 * max|entry|."""
    if scipy.sparse.issparse(matrix):
        a = matrix.toarray()
    elif hasattr(matrix, "to_dense"):
        a = matrix.to_dense()
    else:
        a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.abs(a).max(initial=0.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, _ = scipy.linalg.lu_factor(a, check_finite=True)
    piv = float(np.abs(np.diag(lu)).min())
    return WellposednessReport(piv, bool(scale > 0 and piv > PIVOT_RTOL * scale))
