"""Command-line entry point ``pwciga``.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings

import numpy as np

from .. import assembly
from ..assembly import BoundarySpec
from ..fields import Field, constant, cubic_product, pixel_field
from ..problems import (ProblemConfig, bitmap_project, evaluate_grid, l2_error, l2_project,
                        laplace_solve, laplace_system, run_heat, sample_grid, stability_hint)
from . import bench, verify
from .ppm import PpmError, PpmImage, bundled_image_path, read_ppm, write_ppm

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _int_list(text, what):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated integers, got {text!r}")
    if not vals or any(v < 1 for v in vals):
        raise UsageError(f"{what}: values must be positive integers")
    return vals


def _elems(text, dim):
    vals = _int_list(text, "--elems")
    if len(vals) == 1:
        vals = vals * dim
    if len(vals) != dim:
        raise UsageError(f"--elems needs 1 or {dim} values, got {len(vals)}")
    return vals


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _sin_product():
    return Field(lambda *xs: np.prod([np.sin(np.pi * x) for x in np.broadcast_arrays(*xs)], axis=0))


# --------------------------------------------------------------------------

def cmd_project(args):
    elems = _elems(args.elems, args.dim)
    cfg = ProblemConfig.uniform(elems, args.degree, args.method, quad=args.quad,
                                family=args.family)
    if args.rhs == "poly3":
        f = cubic_product(dim=args.dim)
    elif args.rhs == "const":
        f = constant(1.0)
    else:
        if args.dim != 2 or not args.rhs_file:
            raise UsageError("--rhs file needs --dim 2 and --rhs-file IMAGE.ppm")
        img = read_ppm(args.rhs_file).pixels.astype(float)
        f = pixel_field(img.mean(axis=2))
    coeffs = l2_project(cfg, f)
    err = l2_error(coeffs, cfg.specs, f)
    print(f"l2_error={err:.6e}", file=sys.stderr)
    _write_text(args.out, sample_grid(coeffs, cfg.specs, args.samples).to_csv())
    return EXIT_OK


def _manufactured_flux():
    """Outward normal derivative of sin(pi x) sin(pi y) on the unit square."""
    def g(x, y):
        out = np.zeros(np.broadcast(x, y).shape)
        px, py = np.pi * np.cos(np.pi * x) * np.sin(np.pi * y), np.pi * np.sin(np.pi * x) * np.cos(np.pi * y)
        out = out + np.where(np.isclose(x, 0.0), -px, 0.0) + np.where(np.isclose(x, 1.0), px, 0.0)
        out = out + np.where(np.isclose(y, 0.0), -py, 0.0) + np.where(np.isclose(y, 1.0), py, 0.0)
        return out
    return Field(g)


def cmd_laplace(args):
    elems = _elems(args.elems, 2)
    bc = BoundarySpec.parse(args.bc)
    cfg = ProblemConfig.uniform(elems, args.degree, args.method, quad=args.quad, boundary=bc,
                                family=args.family)
    exact = _sin_product()
    f = Field(lambda x, y: 2 * np.pi ** 2 * exact(x, y))
    g = _manufactured_flux() if bc.sides("N") else None
    if args.matrix_out:
        mat, _ = laplace_system(cfg, f, g)
        with open(args.matrix_out, "w") as fh:
            assembly.write_coo(mat, fh)
    coeffs = laplace_solve(cfg, f, g)
    print(f"l2_error={l2_error(coeffs, cfg.specs, exact):.6e}", file=sys.stderr)
    _write_text(args.out, sample_grid(coeffs, cfg.specs, args.samples).to_csv())
    return EXIT_OK


def cmd_dynamics(args):
    elems = _elems(args.elems, 2)
    if args.dt <= 0 or args.steps < 0:
        raise UsageError("--dt must be positive and --steps non-negative")
    cfg = ProblemConfig.uniform(elems, args.degree, args.method, dt=args.dt, steps=args.steps,
                                family=args.family)
    if args.dt > stability_hint(cfg):
        print(f"warning: dt={args.dt:g} exceeds the heuristic stability bound "
              f"{stability_hint(cfg):.3g}", file=sys.stderr)
    u0 = _sin_product()
    axes = [np.linspace(0, 1, args.frame_size)] * 2
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)

    def snap(k, u):
        vals = evaluate_grid(u, cfg.specs, axes).T[::-1]
        write_ppm(PpmImage.gray(255.0 * np.clip(vals, 0.0, 1.0)),
                  os.path.join(args.out_dir, f"frame_{k:06d}.ppm"))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        run = run_heat(cfg, u0, snapshot_every=args.snapshot_every if args.out_dir else 0,
                       on_snapshot=snap if args.out_dir else None)
    t = args.dt * args.steps
    exact = Field(lambda x, y: np.exp(-2 * np.pi ** 2 * t) * u0(x, y))
    grid = [np.linspace(0, 1, 101)] * 2
    err = float(np.abs(evaluate_grid(run.coeffs, cfg.specs, grid) - exact.on_grid(grid)).max())
    print(f"max_error={err:.6e}", file=sys.stderr)
    if run.step_seconds:
        later = np.median(run.step_seconds[1:]) if len(run.step_seconds) > 1 else float("nan")
        print(f"first_step_seconds={run.step_seconds[0]:.3e} later_step_seconds={later:.3e}",
              file=sys.stderr)
    return EXIT_OK


def cmd_bitmap(args):
    path = args.input or bundled_image_path()
    img = read_ppm(path)
    cfg = ProblemConfig.uniform((args.elems, args.elems), args.degree, args.method,
                                family=args.family)
    out, errs = bitmap_project(img.pixels, cfg)
    if args.out:
        write_ppm(PpmImage(out), args.out)
    lines = "channel,error\n" + "".join(f"{c},{float(e)!r}\n" for c, e in zip("RGB", errs))
    _write_text(args.err_csv, lines)
    return EXIT_OK


def cmd_bench(args):
    sizes = _int_list(args.sizes, "--sizes")
    degrees = _int_list(args.degrees, "--degrees")
    dim = args.dim or (3 if args.case == "projection" else 2)
    cap = args.max_size or (64 if dim == 3 else 256)

    def report(elems, p, m, exc):
        print(f"failed: {args.case} {elems} p={p} {m}: {exc}", file=sys.stderr)

    records = []
    for n in sizes:
        elems = [n] * dim
        if n > cap:
            records.extend(bench.placeholder_record(args.case, elems, p, m)
                           for p in degrees for m in ("galerkin", "pwc"))
            continue
        if args.case == "projection":
            records.extend(bench.bench_projection([elems], degrees, repeats=args.repeats, on_error=report))
        else:
            records.extend(bench.bench_laplace([elems], degrees, repeats=args.repeats, on_error=report))
    _write_text(args.out, bench.to_csv(records))
    return EXIT_OK


def cmd_verify(args):
    reports = verify.verify_equivalence(args.suite)
    for r in reports:
        for line in r.lines():
            print(line)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# --------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="pwciga", description="Isogeometric L2 projection, "
                                 "Laplace and heat solvers with Galerkin or piece-wise constant tests.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--degree", type=int, default=2)
        p.add_argument("--method", choices=("galerkin", "pwc"), default="pwc")
        p.add_argument("--family", choices=("greville", "uniform"), default="greville",
                       help="PWC test interval family")

    p = sub.add_parser("project", help="L2 projection of a field")
    p.add_argument("--dim", type=int, choices=(1, 2, 3), default=2)
    p.add_argument("--elems", default="16")
    common(p)
    p.add_argument("--rhs", choices=("poly3", "const", "file"), default="poly3")
    p.add_argument("--rhs-file")
    p.add_argument("--quad", type=int)
    p.add_argument("--samples", type=int, default=17)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("laplace", help="2D Laplace with a manufactured solution")
    p.add_argument("--elems", default="16,16")
    common(p)
    p.add_argument("--bc", default="all=D")
    p.add_argument("--quad", type=int)
    p.add_argument("--samples", type=int, default=33)
    p.add_argument("--matrix-out")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_laplace)

    p = sub.add_parser("dynamics", help="explicit Euler heat equation")
    p.add_argument("--elems", default="32,32")
    common(p)
    p.add_argument("--dt", type=float, default=1e-5)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--snapshot-every", type=int, default=100)
    p.add_argument("--frame-size", type=int, default=64)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("bitmap", help="project an RGB image")
    p.add_argument("--in", dest="input")
    p.add_argument("--elems", type=int, default=32)
    common(p)
    p.add_argument("--out")
    p.add_argument("--err-csv", default="-")
    p.set_defaults(func=cmd_bitmap)

    p = sub.add_parser("bench", help="timing and work-count benchmarks")
    p.add_argument("--case", choices=("projection", "laplace"), default="projection")
    p.add_argument("--sizes", default="8,16,32")
    p.add_argument("--degrees", default="2")
    p.add_argument("--dim", type=int, choices=(1, 2, 3))
    p.add_argument("--max-size", type=int)
    p.add_argument("--repeats", type=int, default=bench.REPEATS)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="equivalence self-checks")
    p.add_argument("--suite", choices=verify.SUITES + ("all",), default="all")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, PpmError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
