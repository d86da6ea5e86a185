"""Command line front end.

Subcommands: ``check`` (structure report), ``inspect`` (flux/Lagrangian
samples and growth constants), ``cost`` (cost-function table), ``simulate``
(trajectory + metadata), ``verify`` (theorem checks, exit 1 on failure),
``sweep`` (parameter grid).  Outputs are deterministic for a fixed config
and seed.  Exit codes: 0 ok, 1 verification failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .models import ModelError, check_assumptions, model_from_id
from .lagrangian import (
    FluxObjects,
    QuadratureError,
    flux_a,
    growth_constants,
    h_and_recession,
    potential,
    verify_growth_bound,
)
from .transport import cost_table
from .experiments import (
    ConfigError,
    format_float,
    load_config,
    simulate,
    sweep,
    verify,
)

USAGE_ERROR = 2
VERIFY_ERROR = 1


def _parse_grid(raw: str) -> np.ndarray:
    parts = raw.split(":")
    if len(parts) != 3:
        raise ValueError("grid syntax is start:stop:step")
    a, b, h = (float(p) for p in parts)
    n = int(round((b - a) / h))
    return a + h * np.arange(n + 1)


def _cmd_check(args) -> int:
    model = model_from_id(args.model, s=args.s)
    report = check_assumptions(model)
    text = report.to_json()
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return 0


def _cmd_inspect(args) -> int:
    model = model_from_id(args.model, s=args.s)
    flux = FluxObjects(model)
    rr = [0.0, 0.5, 1.0, 2.0, 10.0, 100.0]
    phi_samples = [{"r": r, "potential": potential(flux, r)} for r in rr]
    za = [(0.5, 1.0), (1.0, 1.0), (1.0, 10.0), (2.0, -3.0)]
    flux_samples = []
    for z, xi in za:
        h, h0 = h_and_recession(flux, z, xi)
        flux_samples.append({"z": z, "xi": xi,
                             "a": float(np.asarray(flux_a(flux, z, xi))),
                             "h": h, "h0": h0})
    c0, d0 = growth_constants(flux, args.c0)
    worst = verify_growth_bound(flux, (c0, d0), n_samples=args.samples,
                                seed=args.seed)
    payload = {
        "model": model.id,
        "s": model.s,
        "potential_samples": phi_samples,
        "flux_samples": flux_samples,
        "growth_constants": {"C0": c0, "D0": d0, "r_tilde": d0 / c0},
        "lower_bound_worst_violation": worst,
        "samples": args.samples,
        "seed": args.seed,
    }
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_cost(args) -> int:
    model = model_from_id(args.model, s=args.s)
    grid = _parse_grid(args.grid)
    table = cost_table(model, grid)
    lines = []
    for row in table.to_csv_rows():
        if isinstance(row[0], str):
            lines.append(",".join(row))
        else:
            v, k, cls, pbar, res = row
            lines.append(",".join([format_float(v), format_float(k), cls,
                                   format_float(pbar), format_float(res)]))
    text = "\n".join(lines) + "\n"
    if args.output:
        out = Path(args.output)
        out.write_text(text)
        sidecar = {
            "model": table.model_id,
            "s": table.s,
            "n_samples": len(table.samples),
            "n_finite": int(np.sum(table.finite_mask())),
            "diagnostics": table.diagnostics,
        }
        if table.closed_form is not None:
            finite = table.finite_mask()
            vals = table.values()
            cf = np.array(table.closed_form)
            sidecar["closed_form_max_abs_error"] = float(
                np.max(np.abs(vals[finite] - cf[finite]))) if finite.any() else 0.0
        out.with_suffix(out.suffix + ".json").write_text(
            json.dumps(sidecar, indent=2, default=float) + "\n")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.output_dir) if args.output_dir else None
    res = simulate(cfg, out)
    print(json.dumps(res, indent=2))
    return 0


def _cmd_verify(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.output_dir) if args.output_dir else None
    results, ok = verify(cfg, out)
    for name in ("edges", "jumps", "super", "sub", "contraction"):
        if name in results:
            status = "PASS" if results[name]["pass"] else "FAIL"
            print(f"{name:12s} {status}")
    print(f"{'overall':12s} {'PASS' if ok else 'FAIL'}")
    return 0 if ok else VERIFY_ERROR


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.output_dir) if args.output_dir else None
    results = sweep(cfg, out)
    failed = [r for r in results if r.get("pass") is False]
    for r in results:
        tail = "" if "pass" not in r else (" PASS" if r["pass"] else " FAIL")
        print(f"{r['id']} value={r['value']}{tail}")
    return VERIFY_ERROR if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="saturex",
                                description="flux-saturated diffusion toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("check", help="structure-assumption report (JSON)")
    pc.add_argument("model")
    pc.add_argument("--s", type=float, default=1.0)
    pc.add_argument("--output")
    pc.set_defaults(fn=_cmd_check)

    pi = sub.add_parser("inspect", help="flux/Lagrangian samples and growth constants")
    pi.add_argument("model")
    pi.add_argument("--s", type=float, default=1.0)
    pi.add_argument("--c0", type=float, default=0.5)
    pi.add_argument("--samples", type=int, default=200)
    pi.add_argument("--seed", type=int, default=0)
    pi.set_defaults(fn=_cmd_inspect)

    pk = sub.add_parser("cost", help="cost-function table (CSV)")
    pk.add_argument("model")
    pk.add_argument("--grid", required=True, help="start:stop:step")
    pk.add_argument("--s", type=float, default=1.0)
    pk.add_argument("--output", help="CSV path; JSON sidecar written next to it")
    pk.set_defaults(fn=_cmd_cost)

    ps = sub.add_parser("simulate", help="run a config and dump the trajectory")
    ps.add_argument("config")
    ps.add_argument("--output-dir")
    ps.set_defaults(fn=_cmd_simulate)

    pv = sub.add_parser("verify", help="run a config and check the theorems")
    pv.add_argument("config")
    pv.add_argument("--output-dir")
    pv.set_defaults(fn=_cmd_verify)

    pw = sub.add_parser("sweep", help="parameter grid of simulate/verify")
    pw.add_argument("config")
    pw.add_argument("--output-dir")
    pw.set_defaults(fn=_cmd_sweep)

    return p


def _merge_grid_value(argv):
    """Fold '--grid -1.5:1.5:0.1' into '--grid=...' so the leading dash of a
    negative start point is not read as an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--grid":
            try:
                out.append(f"--grid={next(it)}")
                continue
            except StopIteration:
                pass
        out.append(tok)
    return out


def run_cli(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    argv = _merge_grid_value(list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ModelError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except QuadratureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VERIFY_ERROR


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
