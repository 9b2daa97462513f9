"""Command-line entry point.

Subcommands: ``solve-stokes``, ``solve-ns``, ``verify-ops``, ``norms``,
``scaling``.  Runs are configured by an INI file (key-value with nested
sections), emit a deterministic JSON report plus CSV tables, and use the
exit codes 0 (ok), 2 (config error), 3 (solver divergence), 4 (verification
failure).
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, besov, datagen, io, verify
from . import navier_stokes as nsmod
from . import stokes as stk
from .core import BesovIndex, BoundaryField, VectorField, make_grid
from .errors import ConfigError, HalfStokesError, PicardDivergenceError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_VERIFY = 4


def _parse_config(path: str) -> dict:
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"config file {path!r} not found")
    cfg = {section: dict(cp[section]) for section in cp.sections()}
    if "grid" not in cfg:
        raise ConfigError("config needs a [grid] section")
    return cfg


def _build_grid(cfg: dict):
    g = cfg["grid"]
    try:
        return make_grid(n=int(g.get("n", 2)), L=float(g.get("l", 2 * np.pi)),
                         N_tan=int(g.get("n_tan", 32)),
                         X=float(g.get("x", 2 * np.pi)),
                         N_vert=int(g.get("n_vert", 33)),
                         grading=float(g.get("grading", 1.0)),
                         T=float(g.get("t", 1.0)),
                         N_time=int(g.get("n_time", 32)))
    except (ValueError, HalfStokesError) as exc:
        raise ConfigError(f"bad grid: {exc}") from exc


def _build_index(cfg: dict, n: int) -> BesovIndex:
    sec = cfg.get("index", {})
    alpha = float(sec.get("alpha", 1.0))
    try:
        if sec.get("critical", "true").lower() in ("1", "true", "yes"):
            idx = BesovIndex.critical_index(alpha, n)
        else:
            idx = BesovIndex(alpha=alpha, q=float(sec["q"]), n=n)
        if "beta" in sec and "p" in sec:
            idx = BesovIndex(alpha=idx.alpha, q=idx.q, n=n,
                             beta=float(sec["beta"]), p=float(sec["p"]))
        return idx
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad index: {exc}") from exc


def _build_data(cfg: dict, grid, seed: int):
    sec = cfg.get("data", {})
    family = sec.get("family", "stream_compatible")
    amp = float(sec.get("amplitude", 1.0))
    if family == "zero":
        h = VectorField(grid, np.zeros((grid.n,) + grid.tan_shape
                                       + (grid.N_vert,)),
                        domain="half", time_dependent=False)
        g = BoundaryField(grid, np.zeros((grid.n,) + grid.tan_shape
                                         + (grid.N_time,)))
        return h, g, None
    if family == "stream_compatible":
        h0 = datagen.stream_mode_initial_data(grid, k1=int(sec.get("k1", 1)),
                                              m=int(sec.get("m", 2)),
                                              amplitude=1.0)
        g0 = datagen.compatible_boundary_data(grid, h0)
        h = VectorField(grid, amp * h0.data, domain="half",
                        time_dependent=False)
        g = BoundaryField(grid, amp * g0.data)
        return h, g, None
    if family == "forced_mms":
        mms = datagen.ForcedManufactured(k1=int(sec.get("k1", 2)),
                                         amplitude=amp)
        return mms.initial_data(grid), mms.boundary_data(grid), mms.stress(grid)
    if family == "harmonic_gradient":
        _, h, g = datagen.harmonic_gradient_solution(grid,
                                                     k1=int(sec.get("k1", 2)),
                                                     amplitude=amp)
        return h, g, None
    if family == "random_band":
        rng = np.random.default_rng(seed)
        h0 = datagen.random_divfree_initial(grid, rng)
        g0 = datagen.compatible_boundary_data(grid, h0)
        h = VectorField(grid, amp * h0.data, domain="half",
                        time_dependent=False)
        g = BoundaryField(grid, amp * g0.data)
        return h, g, None
    raise ConfigError(f"unknown data family {family!r}")


def _common_setup(args):
    cfg = _parse_config(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.threads:
        os.environ.setdefault("OMP_NUM_THREADS", str(args.threads))
    grid = _build_grid(cfg)
    index = _build_index(cfg, grid.n)
    report = io.base_report(cfg)
    report["seed"] = args.seed
    report["tolerance_scale"] = args.tolerance_scale
    return cfg, grid, index, out_dir, report


def _fail(report, out_dir, code, message):
    report["error"] = {"code": code, "message": message}
    io.write_report(report, out_dir / "report.json")
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_solve_stokes(args) -> int:
    cfg, grid, index, out_dir, report = _common_setup(args)
    h, g, F = _build_data(cfg, grid, args.seed)
    sol = stk.solve_stokes(h, g, F, index=index, with_norms=True)
    report["diagnostics"] = {k: v for k, v in sol.diagnostics.items()
                             if k != "norms"}
    report["norms"] = sol.diagnostics.get("norms", {})
    io.save_field(sol.u, out_dir / "velocity")
    io.export_csv_slice(sol.u, out_dir / "velocity_wall.csv",
                        vertical_index=0)
    io.write_report(report, out_dir / "report.json")
    print(f"solve-stokes ok: residuals div={report['diagnostics']['div_residual']:.3e} "
          f"boundary={report['diagnostics']['boundary_residual']:.3e}")
    return EXIT_OK


def cmd_solve_ns(args) -> int:
    cfg, grid, index, out_dir, report = _common_setup(args)
    h, g, _ = _build_data(cfg, grid, args.seed)
    sec = cfg.get("picard", {})
    max_iter = int(sec.get("max_iter", 50))
    tol = float(sec.get("tol", 1e-8)) * args.tolerance_scale
    try:
        u, trace = nsmod.picard_solve(h, g, index, max_iter=max_iter, tol=tol)
    except PicardDivergenceError as exc:
        report["trace"] = exc.trace.as_dict() if exc.trace else []
        return _fail(report, out_dir, EXIT_DIVERGED, f"diverged: {exc}")
    report["trace"] = trace.as_dict()
    io.save_field(u, out_dir / "velocity")
    io.write_report(report, out_dir / "report.json")
    ratios = trace.ratios()
    print(f"solve-ns ok: steps={len(trace.steps)} "
          f"last_ratio={ratios[-1] if ratios else float('nan'):.4f}")
    return EXIT_OK


def cmd_verify_ops(args) -> int:
    cfg, grid, index, out_dir, report = _common_setup(args)
    sec = cfg.get("verify", {})
    samples = int(sec.get("samples", 20))
    refinements = int(sec.get("refinements", 1))
    names = [s.strip() for s in sec.get(
        "targets", ",".join(verify.ratio_targets(index))).split(",") if s.strip()]
    study = verify.operator_ratio_study(names, index, grid, samples=samples,
                                        refinements=refinements,
                                        seed=args.seed)
    report["ratio_studies"] = [
        {"target": k, "max_ratios": [lv["max_ratio"] for lv in v["levels"]],
         "drift": v["drift"]}
        for k, v in study.items()]
    io.write_report(report, out_dir / "report.json")
    limit = 0.25 * args.tolerance_scale
    bad = [k for k, v in study.items() if not v["drift"] < limit]
    for row in report["ratio_studies"]:
        print(f"{row['target']:24s} max={row['max_ratios']} "
              f"drift={row['drift']:.3f}")
    if bad:
        return _fail(report, out_dir, EXIT_VERIFY,
                     f"ratio drift beyond {limit:.2f}: {bad}")
    return EXIT_OK


def cmd_norms(args) -> int:
    cfg, grid, index, out_dir, report = _common_setup(args)
    field = io.load_field(args.field)
    sec = cfg.get("norms", {})
    kind = sec.get("kind", "aniso")
    s = float(sec.get("s", index.alpha))
    q = float(sec.get("q", index.q))
    if kind == "aniso":
        value = besov.aniso_norm(field, s, q)
    elif kind == "lp":
        value = besov.lp_norm(field, s, q)
    elif kind == "lq":
        value = besov.field_lq(field, q)
    elif kind == "lq_time_lp_space":
        value = besov.lq_time_lp_space(field, s, q)
    else:
        return _fail(report, out_dir, EXIT_CONFIG, f"unknown norm kind {kind!r}")
    report["norms"] = {kind: value, "s": s, "q": q}
    io.write_report(report, out_dir / "report.json")
    print(f"{kind} norm = {value!r}")
    return EXIT_OK


def cmd_scaling(args) -> int:
    cfg, grid, index, out_dir, report = _common_setup(args)
    h, g, _ = _build_data(cfg, grid, args.seed)
    sec = cfg.get("scaling", {})
    lambdas = [float(s) for s in sec.get("lambdas", "0.5,2.0").split(",")]
    study = verify.scaling_invariance_check(h, g, index, lambdas)
    report["ratio_studies"] = [study]
    io.write_report(report, out_dir / "report.json")
    limit = 0.03 * args.tolerance_scale
    worst = max(row["M0_deviation"] for row in study["rows"])
    for row in study["rows"]:
        print(f"lambda={row['lambda']}: M0 deviation {row['M0_deviation']:.4f}")
    if not worst <= limit:
        return _fail(report, out_dir, EXIT_VERIFY,
                     f"M0 deviation {worst:.4f} beyond {limit:.3f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="halfstokes",
        description="Half-space Stokes / Navier-Stokes solves and estimate "
                    "verification")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "solve-stokes": cmd_solve_stokes,
        "solve-ns": cmd_solve_ns,
        "verify-ops": cmd_verify_ops,
        "norms": cmd_norms,
        "scaling": cmd_scaling,
    }
    for name, func in commands.items():
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="INI configuration file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=0)
        p.add_argument("--tolerance-scale", type=float, default=1.0,
                       dest="tolerance_scale")
        if name == "norms":
            p.add_argument("--field", required=True,
                           help="snapshot prefix (without .bin/.json)")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PicardDivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except HalfStokesError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
