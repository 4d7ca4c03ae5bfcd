"""Command line front end: ``hslab <command> [options]``.

Commands
--------
solve      run one minimization, write report/minimizer/profile/theorem files
verify     check a field file against the theorem and the proof chain
rearrange  symmetric-decreasing rearrangement of a field file
majorize   decide f < g for two field files
potential  Riesz potential of a field file
laplacian  fractional power |xi|^sigma of a field file
sweep      solve over a list of q (or s) values and tabulate S_q

Options may also come from a TOML file given with ``--config``; flat keys with
the same names as the long options (``max_iters``, ``q_list`` ...). Command
line flags win over the file.

Exit status: 0 success, 1 a check failed, 2 invalid input, 3 no convergence.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .core import (
    Field,
    FieldFormatError,
    gaussian,
    load_field,
    make_exponents,
    make_grid,
    radial_profile,
    save_field,
)
from .fracops import fractional_power, make_plan, riesz_potential
from .rearrange import majorizes, sd_rearrangement
from .solver import SolverOptions, fixed_point_minimize, gradient_flow_minimize
from .verify import proof_chain_check, verify_theorem

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 1, 2, 3

DEFAULTS = {
    "n": 1,
    "s": 0.3,
    "q": 3.0,
    "grid": 4096,
    "L": 60.0,
    "method": "gradient_flow",
    "tol": None,
    "max_iters": 5000,
    "init": "gaussian",
    "out": "hslab_out",
    "jobs": 1,
    "seed": 0,
    "allow_critical": False,
    "q_list": None,
    "s_list": None,
    "alpha": None,
    "sigma": None,
}
METHODS = ("gradient_flow", "fixed_point")

SOLVE_REPORT = "solve_report.json"
MINIMIZER = "minimizer.field"
PROFILE = "profile.csv"
THEOREM_REPORT = "theorem_report.json"
VERIFY_REPORT = "verify_report.json"
SUMMARY = "summary.csv"


class ConfigError(ValueError):
    pass


def _float_list(text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def resolve(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        opts.update(load_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            opts[key] = val
    opts["q_list"] = _float_list(opts["q_list"])
    opts["s_list"] = _float_list(opts["s_list"])
    return opts


def make_init(spec: str, grid, seed: int) -> Field:
    """Initial field from a spec string.

    ``gaussian`` (width L/8), ``offset:X`` (same Gaussian shifted by X along
    the first axis), ``twobump`` (two unequal off-center bumps), ``random``
    (seeded sum of positive Gaussians), ``file:PATH``.
    """
    L = grid.half_width
    kind, _, arg = spec.partition(":")
    if kind == "gaussian":
        return gaussian(grid, L / 8)
    if kind == "offset":
        center = np.zeros(grid.ndim)
        center[0] = float(arg)
        return gaussian(grid, L / 8, center=center)
    if kind == "twobump":
        c1 = np.full(grid.ndim, 0.0)
        c1[0] = 0.3 * L
        c2 = np.full(grid.ndim, 0.0)
        c2[0] = -0.2 * L
        return Field(grid, gaussian(grid, L / 10, c1).values + 0.5 * gaussian(grid, L / 20, c2).values)
    if kind == "random":
        rng = np.random.default_rng(seed)
        vals = np.zeros(grid.shape)
        for _ in range(4):
            c = rng.uniform(-0.4 * L, 0.4 * L, size=grid.ndim)
            vals += rng.uniform(0.2, 1.0) * gaussian(grid, rng.uniform(0.05, 0.2) * L, c).values
        return Field(grid, vals)
    if kind == "file":
        u = load_field(arg)
        if u.grid != grid:
            raise ConfigError(f"init file grid {u.grid} does not match {grid}")
        return u
    raise ConfigError(f"unknown init spec {spec!r}")


def _setup(opts: dict):
    if opts["method"] not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}")
    cfg = make_exponents(opts["n"], opts["s"], opts["q"], allow_critical=bool(opts["allow_critical"]))
    grid = make_grid(opts["n"], opts["grid"], opts["L"])
    solver_opts = SolverOptions(max_iters=int(opts["max_iters"]))
    if opts["tol"] is not None:
        if opts["method"] == "gradient_flow":
            solver_opts.tol_q = float(opts["tol"])
        else:
            solver_opts.tol_u = float(opts["tol"])
    solver_opts.validate()
    return cfg, grid, solver_opts


def _solve(cfg, grid, solver_opts, method, init):
    plan = make_plan(grid)
    fn = gradient_flow_minimize if method == "gradient_flow" else fixed_point_minimize
    return fn(init, cfg, plan, solver_opts)


def write_profile_csv(u: Field, path):
    prof = radial_profile(u)
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "u_mean"])
        for r, m in zip(prof.centers[prof.nonempty], prof.bin_means[prof.nonempty]):
            w.writerow([repr(float(r)), repr(float(m))])


def _write_json(doc, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _fail(msg: str, code: int = EXIT_INVALID) -> int:
    print(f"hslab: error: {msg}", file=sys.stderr)
    return code


def cmd_solve(opts: dict) -> int:
    try:
        cfg, grid, solver_opts = _setup(opts)
        init = make_init(opts["init"], grid, int(opts["seed"]))
    except (ValueError, OSError) as exc:
        return _fail(str(exc))
    report = _solve(cfg, grid, solver_opts, opts["method"], init)
    out = opts["out"]
    os.makedirs(out, exist_ok=True)
    save_field(report.minimizer, os.path.join(out, MINIMIZER))
    report.write_json(os.path.join(out, SOLVE_REPORT), minimizer_path=MINIMIZER)
    write_profile_csv(report.minimizer, os.path.join(out, PROFILE))
    _write_json(verify_theorem(report.minimizer).to_dict(), os.path.join(out, THEOREM_REPORT))
    print(f"S_q ~ {report.s_q_estimate!r} ({report.method}, {report.iterations} iterations, "
          f"converged={report.converged}, residual={report.residual:.3e})")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_verify(field_path: str, opts: dict) -> int:
    try:
        u = load_field(field_path)
    except (OSError, FieldFormatError) as exc:
        return _fail(f"cannot read field: {exc}")
    try:
        cfg = make_exponents(u.grid.ndim, opts["s"], opts["q"], allow_critical=bool(opts["allow_critical"]))
    except ValueError as exc:
        return _fail(str(exc))
    theorem = verify_theorem(u)
    chain = proof_chain_check(u, cfg, make_plan(u.grid))
    os.makedirs(opts["out"], exist_ok=True)
    _write_json({"theorem": theorem.to_dict(), "proof_chain": chain.to_dict()},
                os.path.join(opts["out"], VERIFY_REPORT))
    ok = theorem.passed and chain.all_ok
    if not theorem.symmetry_ok:
        print(f"symmetry check failed: residual {theorem.symmetry_residual:.3e}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _load_or_fail(path):
    try:
        return load_field(path), None
    except (OSError, FieldFormatError) as exc:
        return None, _fail(f"cannot read field: {exc}")


def cmd_rearrange(src: str, dst: str, take_abs: bool) -> int:
    f, err = _load_or_fail(src)
    if err is not None:
        return err
    if take_abs:
        f = f.abs()
    try:
        save_field(sd_rearrangement(f), dst)
    except ValueError as exc:
        return _fail(f"{exc} (use --abs)")
    return EXIT_OK


def cmd_majorize(f_path: str, g_path: str, out: str | None) -> int:
    f, err = _load_or_fail(f_path)
    if err is not None:
        return err
    g, err = _load_or_fail(g_path)
    if err is not None:
        return err
    try:
        rep = majorizes(f, g)
    except ValueError as exc:
        return _fail(str(exc))
    doc = rep.to_dict()
    if out:
        _write_json(doc, out)
    print(json.dumps(doc))
    return EXIT_OK if rep.holds else EXIT_CHECK_FAILED


def cmd_potential(src: str, dst: str, alpha: float | None) -> int:
    f, err = _load_or_fail(src)
    if err is not None:
        return err
    if alpha is None:
        return _fail("--alpha is required")
    try:
        save_field(riesz_potential(f, alpha, make_plan(f.grid)), dst)
    except ValueError as exc:
        return _fail(str(exc))
    return EXIT_OK


def cmd_laplacian(src: str, dst: str, sigma: float | None) -> int:
    f, err = _load_or_fail(src)
    if err is not None:
        return err
    if sigma is None:
        return _fail("--sigma is required")
    try:
        save_field(fractional_power(f, sigma, make_plan(f.grid)), dst)
    except ValueError as exc:
        return _fail(str(exc))
    return EXIT_OK


def _sweep_point(job):
    opts, point_dir = job
    cfg, grid, solver_opts = _setup(opts)
    init = make_init(opts["init"], grid, int(opts["seed"]))
    report = _solve(cfg, grid, solver_opts, opts["method"], init)
    os.makedirs(point_dir, exist_ok=True)
    save_field(report.minimizer, os.path.join(point_dir, MINIMIZER))
    report.write_json(os.path.join(point_dir, SOLVE_REPORT), minimizer_path=MINIMIZER)
    return {
        "n": cfg.n, "s": cfg.s, "q": cfg.q, "beta": cfg.beta,
        "S_q": report.s_q_estimate, "residual": report.residual, "converged": report.converged,
    }


def cmd_sweep(opts: dict) -> int:
    q_list, s_list = opts["q_list"], opts["s_list"]
    if (q_list is None) == (s_list is None):
        return _fail("give exactly one of --q-list / --s-list")
    values = q_list if q_list is not None else s_list
    if not values:
        return _fail("parameter list is empty")
    key = "q" if q_list is not None else "s"
    points = []
    try:
        for v in values:
            p = dict(opts)
            p[key] = v
            _setup(p)
            make_init(p["init"], make_grid(p["n"], p["grid"], p["L"]), int(p["seed"]))
            points.append(p)
    except (ValueError, OSError) as exc:
        return _fail(f"invalid sweep point {key}={v}: {exc}")
    points.sort(key=lambda p: (p["n"], p["s"], p["q"]))
    out = opts["out"]
    jobs = [(p, os.path.join(out, f"point_{i:03d}")) for i, p in enumerate(points)]
    os.makedirs(out, exist_ok=True)
    if int(opts["jobs"]) > 1:
        with ProcessPoolExecutor(max_workers=int(opts["jobs"])) as ex:
            rows = list(ex.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    cols = ["n", "s", "q", "beta", "S_q", "residual", "converged"]
    with open(os.path.join(out, SUMMARY), "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in cols])
    return EXIT_OK if all(r["converged"] for r in rows) else EXIT_NOT_CONVERGED


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML file with flat option keys")
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--grid", type=int, help="cells per axis (power of two)")
    p.add_argument("--L", type=float, help="box half-width")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--init", help="gaussian | offset:X | twobump | random | file:PATH")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--allow-critical", dest="allow_critical", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hslab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="minimize the quotient once")
    _common(p)

    p = sub.add_parser("verify", help="check a field file")
    p.add_argument("field")
    _common(p)

    p = sub.add_parser("rearrange", help="symmetric-decreasing rearrangement")
    p.add_argument("field")
    p.add_argument("output")
    p.add_argument("--abs", action="store_true", help="rearrange |f| instead of rejecting negative values")

    p = sub.add_parser("majorize", help="decide f < g")
    p.add_argument("f")
    p.add_argument("g")
    p.add_argument("--out")

    p = sub.add_parser("potential", help="Riesz potential of order alpha")
    p.add_argument("field")
    p.add_argument("output")
    p.add_argument("--alpha", type=float)

    p = sub.add_parser("laplacian", help="apply |xi|^sigma")
    p.add_argument("field")
    p.add_argument("output")
    p.add_argument("--sigma", type=float)

    p = sub.add_parser("sweep", help="tabulate S_q over a parameter list")
    _common(p)
    p.add_argument("--q-list", dest="q_list", help="comma separated q values")
    p.add_argument("--s-list", dest="s_list", help="comma separated s values")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cmd = args.command
    if cmd == "rearrange":
        return cmd_rearrange(args.field, args.output, args.abs)
    if cmd == "majorize":
        return cmd_majorize(args.f, args.g, args.out)
    if cmd == "potential":
        return cmd_potential(args.field, args.output, args.alpha)
    if cmd == "laplacian":
        return cmd_laplacian(args.field, args.output, args.sigma)
    try:
        opts = resolve(args)
    except ConfigError as exc:
        return _fail(str(exc))
    if cmd == "solve":
        return cmd_solve(opts)
    if cmd == "verify":
        return cmd_verify(args.field, opts)
    return cmd_sweep(opts)


if __name__ == "__main__":
    sys.exit(main())
