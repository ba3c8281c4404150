"""Serial benchmarks of right-hand-side generation and factorization.

Timings are medians over repeated runs. The work counters cover the
right-hand-side generation only and are exact, so they are identical from
run to run.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from ..assembly import BoundarySpec, count_work
from ..fields import cubic_product, constant
from ..problems import ProblemConfig, laplace_system, mass_factors, projection_rhs
from ..solver import dense_solve

COLUMNS = ("case", "nx", "ny", "nz", "p", "method", "nrdof",
           "gen_seconds", "factor_seconds", "quad_points", "basis_evals")
REPEATS = 3


@dataclass(frozen=True)
class BenchRecord:
    case: str
    nx: int
    ny: int
    nz: int
    p: int
    method: str
    nrdof: int
    gen_seconds: float
    factor_seconds: float
    quad_points: int
    basis_evals: int

    def row(self):
        return [asdict(self)[c] for c in COLUMNS]


def nrdof(elems, p: int) -> int:
    """Number of degrees of freedom, the product of ``n_axis + p``."""
    return math.prod(int(n) + p for n in elems)


def _median_time(fn, repeats):
    times, out = [], None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times)), out


def _pad(elems):
    """Per-axis element counts with 0 for absent axes."""
    return tuple((list(elems) + [0, 0])[:3])


def placeholder_record(case, elems, p, method):
    """Record with NaN timings: a failed or skipped run; nrdof is still exact."""
    nx, ny, nz = _pad(elems)
    return BenchRecord(case, nx, ny, nz, p, method, nrdof(elems, p), math.nan, math.nan, 0, 0)


def bench_one_projection(elems, p, method, rhs="poly3", repeats=REPEATS) -> BenchRecord:
    cfg = ProblemConfig.uniform(elems, p, method)
    f = cubic_product(dim=cfg.dim) if rhs == "poly3" else constant(1.0)
    gen, _ = _median_time(lambda: projection_rhs(cfg, f), repeats)
    with count_work() as work:
        projection_rhs(cfg, f)
    fac, _ = _median_time(lambda: mass_factors(cfg), repeats)
    nx, ny, nz = _pad(elems)
    return BenchRecord("projection", nx, ny, nz, p, method, nrdof(elems, p),
                       gen, fac, work.quad_points, work.basis_evals)


def bench_one_laplace(elems, p, method, repeats=REPEATS) -> BenchRecord:
    if len(elems) != 2:
        raise ValueError("the Laplace benchmark is two-dimensional")
    cfg = ProblemConfig.uniform(elems, p, method, boundary=BoundarySpec.parse("DDNN"))
    f = cubic_product(dim=2)
    gen, (mat, rhs) = _median_time(lambda: laplace_system(cfg, f), repeats)
    with count_work() as work:
        laplace_system(cfg, f)
    fac, _ = _median_time(lambda: dense_solve(mat, rhs), repeats)
    return BenchRecord("laplace", elems[0], elems[1], 0, p, method, nrdof(elems, p),
                       gen, fac, work.quad_points, work.basis_evals)


def bench_projection(sizes, p_list, methods=("galerkin", "pwc"), rhs="poly3",
                     repeats=REPEATS, on_error=None) -> list[BenchRecord]:
    """One record per (size, p, method); failures become NaN-timed records."""
    out = []
    for elems in sizes:
        for p in p_list:
            for m in methods:
                try:
                    out.append(bench_one_projection(elems, p, m, rhs, repeats))
                except (MemoryError, ValueError) as exc:
                    if on_error:
                        on_error(elems, p, m, exc)
                    out.append(placeholder_record("projection", elems, p, m))
    return out


def bench_laplace(sizes, p_list, methods=("galerkin", "pwc"), repeats=REPEATS,
                  on_error=None) -> list[BenchRecord]:
    out = []
    for elems in sizes:
        for p in p_list:
            for m in methods:
                try:
                    out.append(bench_one_laplace(elems, p, m, repeats))
                except (MemoryError, ValueError) as exc:
                    if on_error:
                        on_error(elems, p, m, exc)
                    out.append(placeholder_record("laplace", elems, p, m))
    return out


def to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def predicted_rhs_work(elems, p, method, field_degree=3):
    """Analytic counters for the uniform-mesh projection RHS."""
    if method == "galerkin":
        q = (field_degree + p + 2) // 2
        return {"quad_points": math.prod(n * q for n in elems),
                "basis_evals": sum(n * q * (p + 1) for n in elems)}
    q = (field_degree + 2) // 2
    return {"quad_points": math.prod((n + p) * q for n in elems), "basis_evals": 0}
