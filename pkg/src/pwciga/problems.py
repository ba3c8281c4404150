"""Drivers: L2 projection, 2D Laplace with mixed boundary conditions,
explicit heat dynamics and bitmap projection, each in Galerkin or PWC mode.
"""

from __future__ import annotations

import io
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import assembly
from .assembly import BoundarySpec
from .bspline import BasisSpec, basis_table, collocation_matrix, make_uniform_clamped
from .fields import as_field, pixel_field
from .quadrature import composite, gauss_legendre, points_for_degree
from .solver import BandedMatrix, adi_solve, dense_solve, factor_banded
from .testspace import default_pwc

METHODS = ("galerkin", "pwc")


@dataclass(frozen=True)
class ProblemConfig:
    """Discretization and problem parameters shared by the drivers.

    ``quad`` is a Gauss point count used on every axis, or None for the
    smallest exact count. ``family`` picks the PWC interval family. The
    drivers use Greville-centred intervals: the equal-width family gives
    1D mass matrices whose condition number grows exponentially in the
    element count for p >= 2 (about 3e9 at 128 quadratic elements).
    """

    specs: tuple
    method: str = "galerkin"
    quad: int | None = None
    boundary: BoundarySpec = field(default_factory=BoundarySpec)
    dt: float = 1e-5
    steps: int = 0
    family: str = "greville"

    def __post_init__(self):
        specs = tuple(self.specs) if not isinstance(self.specs, BasisSpec) else (self.specs,)
        object.__setattr__(self, "specs", specs)
        if not 1 <= len(specs) <= 3:
            raise ValueError(f"dimension must be 1, 2 or 3, got {len(specs)}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.dt < 0:
            raise ValueError("dt must be non-negative")

    @property
    def dim(self) -> int:
        return len(self.specs)

    @classmethod
    def uniform(cls, elems, degree: int, method: str = "galerkin", **kw) -> "ProblemConfig":
        """Unit box with ``elems[d]`` equal elements along axis ``d``."""
        elems = [elems] if np.isscalar(elems) else list(elems)
        specs = tuple(make_uniform_clamped(0.0, 1.0, int(n), degree) for n in elems)
        return cls(specs, method, **kw)

    def tests(self):
        return [default_pwc(s, self.family) for s in self.specs]

    def rules(self):
        return None if self.quad is None else gauss_legendre(self.quad)


@dataclass(frozen=True)
class FieldSample:
    """Solution values at a set of points, ``points`` of shape ``(m, dim)``."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field sample contains non-finite values")

    def to_csv(self) -> str:
        buf = io.StringIO()
        dim = self.points.shape[1]
        buf.write(",".join("xyz"[:dim]) + ",value\n")
        for pt, v in zip(self.points, self.values):
            buf.write(",".join(repr(float(c)) for c in pt) + f",{float(v)!r}\n")
        return buf.getvalue()


# --------------------------------------------------------------------------
# evaluation and errors

def evaluate_grid(coeffs, specs, axes) -> np.ndarray:
    """``u_h`` on the tensor grid spanned by the 1D point arrays ``axes``."""
    u = np.asarray(coeffs, dtype=float)
    specs = list(specs)
    for d, (spec, pts) in enumerate(zip(specs, axes)):
        c = collocation_matrix(spec, np.asarray(pts, dtype=float))
        u = np.moveaxis(np.tensordot(c, u, axes=([1], [d])), 0, d)
    return u


def evaluate(coeffs, specs, points) -> FieldSample:
    """``u_h(x) = sum u_I prod_d B_{I_d}(x_d)`` from the nonzero local functions."""
    u = np.asarray(coeffs, dtype=float)
    specs = list(specs)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != len(specs):
        pts = pts.reshape(-1, len(specs))
    tabs = [basis_table(s, pts[:, d]) for d, s in enumerate(specs)]
    vals = np.zeros(pts.shape[0])
    for local in np.ndindex(*[s.degree + 1 for s in specs]):
        idx = tuple(first + i for (first, _), i in zip(tabs, local))
        w = np.ones(pts.shape[0])
        for (_, v), i in zip(tabs, local):
            w = w * v[:, 0, i]
        vals += w * u[idx]
    return FieldSample(pts, vals)


def l2_error(coeffs, specs, exact, rule=None, relative: bool = False) -> float:
    """``sqrt(int (u_h - exact)^2)`` by composite Gauss over trial elements,
    split further at any breaks the exact field declares."""
    exact = as_field(exact)
    specs = list(specs)
    p = max(s.degree for s in specs)
    rule = rule if rule is not None else gauss_legendre(points_for_degree(2 * p) + 1)
    axes, wts = [], []
    for d, s in enumerate(specs):
        a, b = s.domain
        brk = assembly._merge_breaks(a, b, s.breaks, exact.breaks_for(d))
        pts, w = composite(rule, brk)
        axes.append(pts.ravel())
        wts.append(w.ravel())
    diff2 = (evaluate_grid(coeffs, specs, axes) - exact.on_grid(axes)) ** 2
    ref2 = exact.on_grid(axes) ** 2
    for d, w in enumerate(wts):
        diff2 = np.tensordot(w, diff2, axes=([0], [0]))
        ref2 = np.tensordot(w, ref2, axes=([0], [0]))
    err = float(np.sqrt(diff2))
    if relative:
        return err / float(np.sqrt(ref2)) if ref2 > 0 else err
    return err


# --------------------------------------------------------------------------
# projection

def mass_factors(cfg: ProblemConfig):
    rule = cfg.rules()
    if cfg.method == "galerkin":
        return [factor_banded(assembly.mass_1d_galerkin(s, rule)) for s in cfg.specs]
    return [factor_banded(assembly.mass_1d_pwc(s, t, rule)) for s, t in zip(cfg.specs, cfg.tests())]


def projection_rhs(cfg: ProblemConfig, f) -> np.ndarray:
    rule = cfg.rules()
    if cfg.method == "galerkin":
        return assembly.rhs_galerkin(f, cfg.specs, rule)
    return assembly.rhs_pwc(f, cfg.tests(), rule)


def l2_project(cfg: ProblemConfig, f) -> np.ndarray:
    """Trial coefficients of the projection of ``f``; one banded 1D solve per axis."""
    return adi_solve(mass_factors(cfg), projection_rhs(cfg, f))


# --------------------------------------------------------------------------
# Laplace

def _boundary_line(spec: BasisSpec, data, lo_val, hi_val):
    """Coefficients along one side: ends interpolate, the rest is L2-projected."""
    n = spec.n
    c = np.zeros(n)
    c[0], c[-1] = lo_val, hi_val
    if n <= 2:
        return c
    m = assembly.galerkin_rect_1d(spec, spec)
    r = assembly.rhs_galerkin(data, [spec])
    rhs = r[1:-1] - m[1:-1, [0, -1]] @ c[[0, -1]]
    c[1:-1] = np.linalg.solve(m[1:-1, 1:-1], rhs)
    return c


def dirichlet_coefficients(specs, boundary: BoundarySpec, data) -> np.ndarray:
    """Coefficient tensor whose Dirichlet-side entries reproduce ``data``."""
    data = as_field(data)
    sx, sy = specs
    out = np.zeros((sx.n, sy.n))
    for side in boundary.sides("D"):
        d, end = assembly.SIDES[side]
        spec_d, spec_o = (sx, sy) if d == 0 else (sy, sx)
        e = spec_d.domain[end]
        line = assembly._restrict_to_side(data, d, e)
        a, b = spec_o.domain
        lo, hi = np.broadcast_to(line.func(np.array([a, b])), (2,))
        vals = _boundary_line(spec_o, line, lo, hi)
        k = 0 if end == 0 else -1
        if d == 0:
            out[k, :] = vals
        else:
            out[:, k] = vals
    return out


def laplace_system(cfg: ProblemConfig, f, g=None, dirichlet=None):
    """Assembled ``(matrix, rhs)`` for ``-Lap u = f`` with flux ``g`` on Neumann
    sides and value ``dirichlet`` on Dirichlet sides (both default to 0)."""
    if cfg.dim != 2:
        raise ValueError("the Laplace driver is two-dimensional")
    if not cfg.boundary.sides("D"):
        raise ValueError("all-Neumann problems have a nullspace; mark at least one side 'D'")
    specs = list(cfg.specs)
    rule = cfg.rules()
    if cfg.method == "galerkin":
        mat = assembly.laplace_2d_weak(specs, rule)
        rhs = assembly.rhs_galerkin(f, specs, rule)
        tests = None
    else:
        tests = cfg.tests()
        mat = assembly.laplace_2d_strong(specs, rule, cfg.boundary, tests)
        rhs = assembly.rhs_pwc(f, tests, rule)
    if g is not None:
        rhs = rhs + assembly.neumann_load(specs, g, cfg.boundary, tests, rule)
    rows = assembly.dirichlet_rows(specs, cfg.boundary, tests)
    values = None
    if dirichlet is not None:
        values = dirichlet_coefficients(specs, cfg.boundary, dirichlet).ravel()[rows]
    return assembly.apply_dirichlet(mat, rhs.ravel(), rows, values)


def laplace_solve(cfg: ProblemConfig, f, g=None, dirichlet=None) -> np.ndarray:
    """Coefficients ``(Nx, Ny)`` of the 2D Laplace solution."""
    mat, rhs = laplace_system(cfg, f, g, dirichlet)
    sol = dense_solve(mat, rhs)
    return sol.reshape(cfg.specs[0].n, cfg.specs[1].n)


# --------------------------------------------------------------------------
# explicit dynamics

def stability_hint(cfg: ProblemConfig) -> float:
    """Heuristic step bound ``h^2 / (2 dim p^2)`` on the finest axis."""
    h = min((s.domain[1] - s.domain[0]) / s.n_elems for s in cfg.specs)
    p = max(s.degree for s in cfg.specs)
    return h * h / (2 * cfg.dim * max(p, 1) ** 2)


@dataclass
class HeatOperator:
    """Per-axis pieces of the explicit Euler step for ``u_t = Lap u + f`` with
    zero Dirichlet data; unknowns are the interior coefficients.

    ``mass_rows[d]`` and ``lap_rows[d]`` map full coefficient vectors to the
    interior test rows; ``factors[d]`` factor the interior mass block once.
    """

    cfg: ProblemConfig
    factors: list
    mass_rows: list
    lap_rows: list


def heat_operator(cfg: ProblemConfig) -> HeatOperator:
    if cfg.method == "pwc" and min(s.degree for s in cfg.specs) < 2:
        raise ValueError("PWC dynamics evaluates second derivatives; needs p >= 2")
    if min(s.n for s in cfg.specs) < 3:
        raise ValueError("need at least one interior coefficient per axis")
    rule = cfg.rules()
    factors, mass_rows, lap_rows = [], [], []
    for d, s in enumerate(cfg.specs):
        if cfg.method == "galerkin":
            m = assembly.galerkin_rect_1d(s, s, rule)
            dd = assembly.galerkin_rect_1d(s, s, rule, 0, 2)
        else:
            t = cfg.tests()[d]
            m = assembly.pwc_matrix_1d(s, t, rule)
            dd = assembly.pwc_matrix_1d(s, t, rule, trial_der=2)
        factors.append(factor_banded(BandedMatrix.from_dense(m[1:-1, 1:-1])))
        mass_rows.append(m[1:-1, :])
        lap_rows.append(dd[1:-1, :])
    return HeatOperator(cfg, factors, mass_rows, lap_rows)


def _apply(mats, u):
    for d, m in enumerate(mats):
        u = np.moveaxis(np.tensordot(m, u, axes=([1], [d])), 0, d)
    return u


def _interior(u):
    return u[tuple(slice(1, -1) for _ in range(u.ndim))]


def _embed(interior):
    out = np.zeros(tuple(n + 2 for n in interior.shape))
    out[tuple(slice(1, -1) for _ in range(interior.ndim))] = interior
    return out


def _load(cfg, f):
    if cfg.method == "galerkin":
        return _interior(assembly.rhs_galerkin(f, cfg.specs, cfg.rules()))
    return _interior(assembly.rhs_pwc(f, cfg.tests(), cfg.rules()))


def explicit_step(cfg: ProblemConfig, op: HeatOperator, u_t, f_t=None) -> np.ndarray:
    """One step ``(v, u_{t+1}) = (v, u_t + Dt Lap u_t + Dt f)``, substitution only."""
    u = np.asarray(u_t, dtype=float)
    rhs = _apply(op.mass_rows, u)
    if cfg.dt:
        lap = 0.0
        for d in range(cfg.dim):
            mats = [op.lap_rows[k] if k == d else op.mass_rows[k] for k in range(cfg.dim)]
            lap = lap + _apply(mats, u)
        rhs = rhs + cfg.dt * lap
        if f_t is not None:
            rhs = rhs + cfg.dt * _load(cfg, f_t)
    return _embed(adi_solve(op.factors, rhs))


def project_interior(cfg: ProblemConfig, op: HeatOperator, f) -> np.ndarray:
    """Projection of ``f`` with boundary coefficients pinned to zero."""
    return _embed(adi_solve(op.factors, _load(cfg, f)))


@dataclass
class HeatRun:
    coeffs: np.ndarray
    step_seconds: list
    snapshots: list


def run_heat(cfg: ProblemConfig, u0, f=None, snapshot_every: int = 0, on_snapshot=None) -> HeatRun:
    """March ``cfg.steps`` explicit steps from the projection of ``u0``.

    The first entry of ``step_seconds`` includes building and factoring the
    operator, which later steps reuse.
    """
    if cfg.dt > stability_hint(cfg):
        warnings.warn(f"dt={cfg.dt:g} exceeds the heuristic stability bound "
                      f"{stability_hint(cfg):.3g}", RuntimeWarning, stacklevel=2)
    times, snaps = [], []
    t0 = time.perf_counter()
    op = heat_operator(cfg)
    u = project_interior(cfg, op, u0)
    setup = time.perf_counter() - t0
    for k in range(cfg.steps):
        t0 = time.perf_counter()
        u = explicit_step(cfg, op, u, f)
        times.append(time.perf_counter() - t0 + (setup if k == 0 else 0.0))
        if snapshot_every and (k + 1) % snapshot_every == 0:
            snaps.append(u.copy())
            if on_snapshot is not None:
                on_snapshot(k + 1, u)
    return HeatRun(u, times, snaps)


# --------------------------------------------------------------------------
# bitmaps

def bitmap_project(image, cfg: ProblemConfig):
    """Project each RGB channel of ``image`` (``(H, W, 3)``, 0..255) onto the
    trial space on the unit square.

    Returns the re-rendered image (values at pixel centres, rounded and
    clamped to [0, 255]) and the per-channel relative L2 errors.
    """
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3 or img.shape[0] == 0 or img.shape[1] == 0:
        raise ValueError(f"expected a nonempty (H, W, 3) raster, got shape {img.shape}")
    if cfg.dim != 2:
        raise ValueError("bitmap projection is two-dimensional")
    h, w, _ = img.shape
    xc = (np.arange(w) + 0.5) / w
    yc = (np.arange(h) + 0.5) / h
    out = np.zeros(img.shape, dtype=np.uint8)
    errs = []
    factors = mass_factors(cfg)
    for ch in range(3):
        fld = pixel_field(img[:, :, ch])
        coeffs = adi_solve(factors, projection_rhs(cfg, fld))
        vals = evaluate_grid(coeffs, cfg.specs, [xc, yc]).T
        out[:, :, ch] = np.clip(np.rint(vals), 0, 255).astype(np.uint8)
        errs.append(l2_error(coeffs, cfg.specs, fld, gauss_legendre(points_for_degree(2 * max(
            s.degree for s in cfg.specs))), relative=True))
    return out, np.array(errs)


def sample_grid(coeffs, specs, n: int = 33) -> FieldSample:
    """Values on an ``n``-per-axis uniform grid over the 2D domain."""
    axes = [np.linspace(*s.domain, n) for s in specs]
    vals = evaluate_grid(coeffs, specs, axes)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(specs))
    return FieldSample(mesh, vals.ravel())
