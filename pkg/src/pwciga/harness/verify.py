"""Self-checks for the equivalences the method relies on.

Each suite returns a :class:`Report` with the measured norms; failures are
report contents, never exceptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import assembly
from ..bspline import make_uniform_clamped
from ..fields import cubic_product
from ..quadrature import gauss_legendre
from ..testspace import default_pwc, plateau_tests, summation_plan

SUITES = ("matrix_equality", "row_summation", "quadrature_reduction")


@dataclass
class Report:
    suite: str
    passed: bool
    measurements: dict = field(default_factory=dict)

    def lines(self):
        yield f"{self.suite}: {'PASS' if self.passed else 'FAIL'}"
        for k, v in self.measurements.items():
            yield f"  {k} = {v}"


def matrix_equality(n_elems: int = 8, p: int = 2, points: int = 3, tol: float = 1e-10) -> Report:
    """Weak and strong Laplace matrices on the zero-Dirichlet block."""
    s = make_uniform_clamped(0.0, 1.0, n_elems, p)
    rule = gauss_legendre(points)
    weak = assembly.laplace_2d_weak([s, s], rule).toarray()
    strong = assembly.laplace_2d_strong([s, s], rule).toarray()
    inner = np.arange(1, s.n - 1)
    idx = (inner[:, None] * s.n + inner[None, :]).ravel()
    wk = weak[np.ix_(idx, idx)]
    st = strong[np.ix_(idx, idx)]
    rel = float(np.abs(wk - st).max() / np.abs(wk).max())
    return Report("matrix_equality", rel <= tol, {"max_rel_discrepancy": rel, "tolerance": tol})


def row_summation_discrepancies(n_elems=4, p=2, factors=(2, 4, 8)):
    """``max|A_summed - A_pwc|`` for the 1D mass system at each refinement factor."""
    trial = make_uniform_clamped(0.0, 1.0, n_elems, p)
    out = []
    for r in factors:
        plan = summation_plan(trial, r, p * r)
        rect = assembly.galerkin_rect_1d(plan.refined_spec, trial)
        summed, _ = assembly.sum_rows(rect, None, plan)
        limit = assembly.pwc_matrix_1d(trial, plateau_tests(plan))
        out.append(float(np.abs(summed - limit).max()))
    return out


def row_summation(lo: float = 0.4, hi: float = 0.6) -> Report:
    d = row_summation_discrepancies()
    ratios = [d[i + 1] / d[i] for i in range(len(d) - 1)]
    ok = all(lo <= r <= hi for r in ratios)
    return Report("row_summation", ok, {"discrepancies": d, "ratios": ratios, "band": (lo, hi)})


def quadrature_reduction(n_elems: int = 16, p: int = 2, tol: float = 1e-13) -> Report:
    """Tri-cubic right-hand sides: reduced rules against over-integrated references."""
    s = make_uniform_clamped(0.0, 1.0, n_elems, p)
    specs = [s] * 3
    tests = [default_pwc(s)] * 3
    f = cubic_product()
    pwc = assembly.rhs_pwc(f, tests, gauss_legendre(2))
    pwc_ref = assembly.rhs_pwc(f, tests, gauss_legendre(4))
    gal = assembly.rhs_galerkin(f, specs, gauss_legendre(3))
    gal_ref = assembly.rhs_galerkin(f, specs, gauss_legendre(5))
    e_pwc = float(np.abs(pwc - pwc_ref).max())
    e_gal = float(np.abs(gal - gal_ref).max())
    return Report("quadrature_reduction", e_pwc <= tol and e_gal <= tol,
                  {"pwc_max_diff": e_pwc, "galerkin_max_diff": e_gal, "tolerance": tol})


def verify_equivalence(level: str) -> list[Report]:
    """Run one suite, or every suite for ``level="all"``."""
    table = {"matrix_equality": matrix_equality, "row_summation": row_summation,
             "quadrature_reduction": quadrature_reduction}
    if level == "all":
        return [table[s]() for s in SUITES]
    if level not in table:
        raise ValueError(f"unknown suite {level!r}")
    return [table[level]()]
