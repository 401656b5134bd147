"""Command-line runner: ``python -m balancedg --example 1 --cells 50``."""
import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .config import load_config
from .diagnostics import balance_error, component_labels, convergence_table, l1_error
from .errors import DomainError, PositivityFault, RunError
from .output import write_csv, write_grid, write_summary
from .scenarios import build_example

EXIT_OK, EXIT_USAGE, EXIT_FAULT = 0, 2, 3
SCHEMES = ("wb-hllc", "nonwb-hllc", "wb-lf")


def _on_off(text):
    low = text.lower()
    if low not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return low == "on"


def _mesh_list(text):
    try:
        cells = [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad mesh list {text!r}") from None
    if len(cells) < 2:
        raise argparse.ArgumentTypeError("give at least two meshes, e.g. 8,16,32")
    return cells


def _key_value(text):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError("expected key=value")
    from .config import _auto
    return key.strip(), _auto(value.strip())


def make_parser():
    p = argparse.ArgumentParser(
        prog="balancedg",
        description="Well-balanced positivity-preserving DG solver for the Euler equations "
                    "with gravity. Runs one of the eight benchmark setups.")
    p.add_argument("--example", type=int, help="benchmark number 1..8")
    p.add_argument("--config", type=Path, help="run file with key = value lines")
    p.add_argument("--cells", type=int, help="cells per direction")
    p.add_argument("--nx", type=int, help="cells in x (2D)")
    p.add_argument("--ny", type=int, help="cells in y (2D)")
    p.add_argument("--degree", type=int, help="polynomial degree k (0..3)")
    p.add_argument("--cfl", type=float, help="CFL number")
    p.add_argument("--tend", type=float, help="final time")
    p.add_argument("--scheme", choices=SCHEMES, help="flux and source treatment")
    p.add_argument("--eos", help="ideal:GAMMA or stiffened:GAMMA,PINF")
    p.add_argument("--limiter", type=_on_off, metavar="{on,off}", help="positivity limiter")
    p.add_argument("--trouble-cells", type=_on_off, metavar="{on,off}",
                   help="TVB trouble-cell limiter")
    p.add_argument("--tvb-m", type=float, help="TVB constant M")
    p.add_argument("--set", type=_key_value, action="append", default=[], metavar="KEY=VALUE",
                   help="extra example parameter (amplitude, perturbed, eta, dim, rho_c)")
    p.add_argument("--convergence", type=_mesh_list, metavar="N1,N2,...",
                   help="run a mesh sequence against the exact solution")
    p.add_argument("--out", help="output directory (BALANCEDG_OUT overrides)")
    p.add_argument("--samples", type=int, help="output samples per cell and direction")
    p.add_argument("--threads", type=int,
                   help="accepted for interface compatibility; kernels run serially")
    p.add_argument("--seed", type=int, help="seed recorded with the run")
    return p


def _gather(args):
    opts, extras = load_config(args.config) if args.config else ({}, {})
    cli = {
        "example": args.example, "cells": args.cells, "nx": args.nx, "ny": args.ny,
        "degree": args.degree, "cfl": args.cfl, "end_time": args.tend, "scheme": args.scheme,
        "eos": args.eos, "pp_limiter": args.limiter, "trouble_cells": args.trouble_cells,
        "tvb_m": args.tvb_m, "convergence": args.convergence, "out": args.out,
        "samples": args.samples, "threads": args.threads, "seed": args.seed,
    }
    opts.update({k: v for k, v in cli.items() if v is not None})
    extras.update(dict(args.set))
    env = os.environ.get("BALANCEDG_OUT")
    if env:
        opts["out"] = env
    return opts, extras


def _overrides(opts, extras):
    o = {k: opts[k] for k in ("degree", "cfl", "end_time", "scheme", "eos", "pp_limiter",
                              "trouble_cells", "tvb_m") if k in opts}
    if "nx" in opts or "ny" in opts:
        base = opts.get("cells")
        nx, ny = opts.get("nx", base), opts.get("ny", base)
        if nx is None or ny is None:
            raise DomainError("give both --nx and --ny (or --cells)")
        o["cells"] = (nx, ny)
    elif "cells" in opts:
        o["cells"] = opts["cells"]
    o.update(extras)
    return o


def _print_rows(rows, stream):
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        if isinstance(v, float):
            v = f"{v:.6e}"
        elif isinstance(v, np.ndarray):
            v = "  ".join(f"{x:.3e}" for x in v)
        print(f"  {k:<{width}}  {v}", file=stream)


def _report_rows(report):
    return [("steps", report.steps), ("restarts", report.restarts),
            ("final time", report.final_time), ("min density", report.min_density),
            ("min pressure", report.min_pressure), ("dt min", report.dt_min),
            ("dt max", report.dt_max), ("mass drift", report.mass_drift),
            ("wall time [s]", report.wall_time)]


def _report_dict(report):
    return {"steps": report.steps, "restarts": report.restarts, "final_time": report.final_time,
            "min_density": report.min_density, "min_pressure": report.min_pressure,
            "dt_min": report.dt_min, "dt_max": report.dt_max, "mass_drift": report.mass_drift,
            "wall_time": report.wall_time}


def run_cli(argv=None, stream=None):
    stream = stream or sys.stdout
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        opts, extras = _gather(args)
        if "example" not in opts:
            parser.error("give --example N or a config file with run.example")
        if opts.get("threads") is not None and opts["threads"] < 1:
            raise DomainError("--threads must be at least 1")
        if opts.get("samples") is not None and opts["samples"] < 1:
            raise DomainError("--samples must be at least 1")
        cfg = build_example(opts["example"], _overrides(opts, extras))
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if opts.get("seed") is not None:
        np.random.seed(opts["seed"])
    out = Path(opts["out"]) if opts.get("out") else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    summary = {"example": opts["example"], "name": cfg.name, "dim": cfg.dim,
               "cells": list(cfg.cells), "degree": cfg.degree, "scheme": cfg.scheme,
               "eos": repr(cfg.eos), "cfl": cfg.cfl, "end_time": cfg.end_time,
               "pp_limiter": cfg.pp_limiter, "trouble_cells": cfg.trouble_cells,
               "seed": opts.get("seed")}
    labels = component_labels(cfg.dim)
    print(f"example {opts['example']}: {cfg.name}", file=stream)
    try:
        if "convergence" in opts:
            table = convergence_table(cfg, opts["convergence"])
            print(table.format(), file=stream)
            summary.update(status="ok", convergence={
                "cells": table.cells, "components": list(labels),
                "errors": table.errors, "orders": table.orders,
                "runs": [_report_dict(r) for r in table.reports]})
        else:
            sim = cfg.build()
            coef, report = sim.run()
            rows = _report_rows(report)
            summary.update(status="ok", **_report_dict(report))
            if cfg.equilibrium_run:
                err = balance_error(sim, coef)
                rows.append(("l1 distance to equilibrium (" + ", ".join(labels) + ")", err))
                summary["l1_equilibrium"] = dict(zip(labels, err))
            if cfg.exact is not None:
                t = report.final_time
                err = l1_error(sim.field(coef), lambda *c: cfg.exact(t, *c))
                rows.append(("l1 error vs exact (" + ", ".join(labels) + ")", err))
                summary["l1_exact"] = dict(zip(labels, err))
            _print_rows(rows, stream)
            if out is not None:
                fld = sim.field(coef)
                write_csv(out / "solution.csv", fld, cfg.eos, opts.get("samples"))
                if cfg.dim == 2:
                    for q in ("rho", "p"):
                        write_grid(out / f"{q}.grid", fld, cfg.eos, q, opts.get("samples"))
    except (RunError, PositivityFault) as exc:
        print(f"fault: {exc}", file=stream)
        summary["status"] = "fault"
        summary["message"] = str(exc)
        report = getattr(exc, "report", None)
        if report is not None:
            summary.update(_report_dict(report))
            _print_rows(_report_rows(report), stream)
        if out is not None:
            write_summary(out / "summary.json", summary)
        return EXIT_FAULT
    if out is not None:
        write_summary(out / "summary.json", summary)
        print(f"outputs written to {out}", file=stream)
    return EXIT_OK


def main():
    sys.exit(run_cli())
