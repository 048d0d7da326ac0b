"""Command line interface: ``masslet {analytic,simulate,validate,convergence,sweep}``.

Configuration precedence is ``--override`` flags > ``--config`` file >
``--seed-scenario`` > built-in defaults.  Every command that reads a config
writes the fully resolved one (``config.ini``) next to its outputs.

Exit codes: 0 success, 1 validation failure, 2 usage or configuration
error, 3 numerical instability.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import diagnostics as dg
from .analytic import Regime, debroglie_quantities, eval_field, phases
from .solver import ConfigError, InstabilityError, RunOutput, run
from .validation import SUITES, Check, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_UNSTABLE = 0, 1, 2, 3
MAX_SWEEP_POINTS = 10_000


class UsageError(Exception):
    pass


def _num(x) -> str:
    x = float(x)
    return repr(x) if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))


def _json_num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _write_csv(path: Path, header, rows, preamble=()) -> None:
    buf = io.StringIO()
    for line in preamble:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _load(args) -> cfgmod.Config:
    cfg = cfgmod.defaults()
    if args.seed_scenario:
        cfg = cfgmod.merge(cfg, cfgmod.SEEDS[args.seed_scenario])
    if args.config:
        cfg = cfgmod.merge(cfg, cfgmod.read_file(args.config))
    return cfgmod.apply_overrides(cfg, args.override or [])


def _out_dir(args, cfg: cfgmod.Config) -> Path:
    out = Path(args.out) if args.out else Path(cfg["output"]["directory"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_values(spec: str) -> list[float]:
    """``a,b,c`` or ``start:stop:count`` (inclusive linspace)."""
    spec = spec.strip()
    try:
        if ":" in spec:
            a, b, n = spec.split(":")
            count = int(n)
            if count < 1:
                raise ValueError
            return [float(v) for v in np.linspace(float(a), float(b), count)]
        return [float(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot read value list {spec!r}") from None


# ---------------------------------------------------------------- analytic

def cmd_analytic(args) -> int:
    cfg = _load(args)
    res = cfgmod.resolve(cfg)
    sol = res.reference
    if sol is None:
        raise ConfigError("analytic needs [init] mode analytic_bradyon, analytic_tachyon or surfer")
    times = _parse_values(args.times)
    x = res.config.grid.x if args.positions is None else np.array(_parse_values(args.positions))
    rows = []
    for t in times:
        u = eval_field(sol, t, x)
        if sol.regime is Regime.SURFER:
            o = sol.orientation
            S = sol.omega_lab * (t - o * x / sol.c + o * sol.x_init / sol.c) + sol.phi
            Phi = np.zeros_like(x)
        else:
            S, Phi = phases(sol, t, x)
        carrier, envelope = sol.B * np.cos(S), sol.B * np.cos(Phi)
        for row in zip(np.full_like(x, t), x, u, S, Phi, carrier, envelope):
            rows.append([float(v) for v in row])
    header = [f"regime = {sol.regime.value}", f"omega = {_num(sol.omega_lab)}",
              f"k = {_num(sol.k_lab)}", f"gamma = {_num(sol.gamma)}", f"A = {_num(sol.A)}",
              f"phi = {_num(sol.phi)}", f"clock_pulsation = {_num(sol.clock_pulsation)}",
              f"c = {_num(sol.c)}", f"speed = {_num(sol.speed)}", f"x_init = {_num(sol.x_init)}"]
    if sol.regime is not Regime.SURFER:
        dq = debroglie_quantities(sol)
        header += [f"{k} = {_num(v)}" for k, v in dq._asdict().items()]
    out = _out_dir(args, res.values)
    _write_csv(out / "analytic.csv", ["t", "x", "u", "S", "Phi", "carrier", "envelope"],
               rows, header)
    (out / "config.ini").write_text(res.text, encoding="utf-8")
    print(f"wrote {len(rows)} rows to {out / 'analytic.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------- simulate

def _write_run(out: Path, res: cfgmod.Resolved, output: RunOutput) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(res.text, encoding="utf-8")
    _write_csv(out / "trajectory.csv", ["t", "x_p", "vx_p", "z_p", "N", "Ma"],
               zip(output.t, output.x_unwrapped, output.vx_p, output.z_p, output.N, output.Ma))
    with open(out / "snapshots.ndjson", "w", encoding="utf-8") as fh:
        for snap in output.snapshots:
            rec = {"t": _json_num(snap.t), "u": [_json_num(v) for v in snap.u],
                   "v": [_json_num(v) for v in snap.v]}
            fh.write(json.dumps(rec, allow_nan=False) + "\n")
    _write_csv(out / "diagnostics.csv", list(dg.FIELDS),
               ([float(getattr(r, f)) for f in dg.FIELDS] for r in output.diagnostics))


def _summary(output: RunOutput) -> dict:
    N = np.abs(output.N)
    out = {"status": output.status, "steps": int(len(output.t)),
           "max_abs_N": float(N.max()) if N.size else 0.0}
    if output.reference is not None and output.status == "ok":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            tr = dg.transparency_residual(output)
        out["N_normalized"], out["velocity_drift"] = tr
    else:
        out["N_normalized"] = out["velocity_drift"] = math.nan
    if output.diagnostics:
        out["E_drift"], out["P_drift"] = dg.relative_drift(output)
    else:
        out["E_drift"] = out["P_drift"] = math.nan
    return out


def _simulate(res: cfgmod.Resolved, out: Path) -> tuple[int, dict]:
    try:
        output = run(res.config, res.init, res.reference)
        code = EXIT_OK
    except InstabilityError as exc:
        output = exc.output
        code = EXIT_UNSTABLE
        print(f"instability: {exc}", file=sys.stderr)
    _write_run(out, res, output)
    return code, _summary(output)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    res = cfgmod.resolve(cfg)
    out = _out_dir(args, res.values)
    code, summary = _simulate(res, out)
    print(f"{summary['status']}: {summary['steps']} samples, max|N| = "
          f"{summary['max_abs_N']:.6g}, energy drift = {summary['E_drift']:.3g}, "
          f"momentum drift = {summary['P_drift']:.3g} -> {out}")
    return code


# ---------------------------------------------------------------- validate

def _format_check(c: Check) -> str:
    if c.relation == "~":
        rule = f"|x - {c.target:g}| <= {c.threshold:g}"
    else:
        rule = f"{c.relation} {c.threshold:g}"
    return f"{'PASS' if c.passed else 'FAIL'}  {c.suite:<13} {c.name:<38} {c.value:<12.4g} {rule}"


def cmd_validate(args) -> int:
    names = args.scenario or list(SUITES)
    for name in names:
        if name not in SUITES:
            raise UsageError(f"unknown scenario {name!r}; known: {', '.join(SUITES)}")
    checks: list[Check] = []
    for name in names:
        try:
            rows = run_suite(name, args.nodes, args.seed)
        except InstabilityError as exc:
            rows = [Check(name, f"run completed ({exc})", math.nan, 0.0, "<")]
        for c in rows:
            print(_format_check(c))
        checks.extend(rows)
    passed = sum(c.passed for c in checks)
    print(f"summary: {passed}/{len(checks)} checks passed")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "validation.csv",
                   ["scenario", "check", "value", "relation", "threshold", "target", "status"],
                   ([c.suite, c.name, float(c.value), c.relation, float(c.threshold),
                     float(c.target), "PASS" if c.passed else "FAIL"] for c in checks))
    return EXIT_OK if passed == len(checks) else EXIT_FAIL


# ---------------------------------------------------------------- convergence

def cmd_convergence(args) -> int:
    cfg = _load(args)
    res = cfgmod.resolve(cfg)
    if res.reference is None or res.reference.regime is Regime.SURFER:
        raise ConfigError("convergence needs bradyon or tachyon initial data")
    if args.levels < 3:
        raise UsageError("--levels must be >= 3")
    base = res.config.with_(output_stride=0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        study = dg.convergence_study(base, res.reference, args.levels)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    rows = []
    for r in (study.spatial, study.temporal):
        for i, (h, e) in enumerate(zip(r.h, r.errors)):
            rows.append([r.kind, r.metric, i, float(h), float(e)])
    out = _out_dir(args, res.values)
    orders = [f"{r.kind}_order = {'none' if r.order is None else _num(r.order)}"
              for r in (study.spatial, study.temporal)]
    _write_csv(out / "convergence.csv", ["kind", "metric", "level", "h", "error"], rows, orders)
    (out / "config.ini").write_text(res.text, encoding="utf-8")
    for line in orders:
        print(line)
    return EXIT_OK


# ---------------------------------------------------------------- sweep

def _sweep_point(task):
    values, directory = task
    res = cfgmod.resolve(values)
    code, summary = _simulate(res, Path(directory))
    return code, summary


def cmd_sweep(args) -> int:
    base = _load(args)
    if not args.axis:
        raise UsageError("sweep needs at least one --axis section.key=values")
    known = set(cfgmod.numeric_keys())
    axes = []
    for item in args.axis:
        key, sep, spec = item.partition("=")
        key = key.strip()
        if not sep:
            raise UsageError(f"axis {item!r} is not of the form section.key=values")
        if key not in known:
            raise UsageError(f"cannot sweep {key!r}: not a numeric config key")
        if key in (k for k, _ in axes):
            raise UsageError(f"axis {key!r} given twice")
        axes.append((key, _parse_values(spec)))
    total = math.prod(len(v) for _, v in axes)
    if total > MAX_SWEEP_POINTS:
        raise UsageError(f"sweep has {total} points, more than {MAX_SWEEP_POINTS}")
    points = sorted(itertools.product(*(v for _, v in axes)))
    out = _out_dir(args, base)
    width = max(4, len(str(total - 1)))
    tasks, names = [], []
    for i, point in enumerate(points):
        layer = [f"{k}={_num(v)}" for (k, _), v in zip(axes, point)]
        values = cfgmod.apply_overrides(base, layer)
        cfgmod.resolve(values)  # fail before any run
        name = f"point_{i:0{width}d}"
        names.append(name)
        tasks.append((values, str(out / name)))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    metrics = ["status", "max_abs_N", "N_normalized", "velocity_drift", "E_drift", "P_drift"]
    rows = []
    for name, point, (code, summary) in zip(names, points, results):
        rows.append([name, *[float(v) for v in point], code,
                     *[summary[m] if m == "status" else float(summary[m]) for m in metrics]])
    _write_csv(out / "index.csv", ["point", *[k for k, _ in axes], "exit_code", *metrics], rows)
    print(f"{len(points)} runs, index at {out / 'index.csv'}")
    worst = max(code for code, _ in results)
    return worst


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file")
    common.add_argument("--out", help="output directory (default: [output] directory)")
    common.add_argument("--seed-scenario", choices=sorted(cfgmod.SEEDS),
                        help="start from a built-in parameter set")
    common.add_argument("--override", action="append", metavar="SECTION.KEY=VALUE",
                        help="override one config entry (repeatable)")

    parser = argparse.ArgumentParser(prog="masslet",
                                     description="Bead on a vibrating string: closed-form "
                                                 "transparency solutions and simulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", parents=[common], help="tabulate a closed-form solution")
    p.add_argument("--times", default="0", help="comma list or start:stop:count")
    p.add_argument("--positions", help="comma list or start:stop:count (default: grid nodes)")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("simulate", parents=[common], help="integrate one run")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", parents=[common], help="run named check suites")
    p.add_argument("scenario", nargs="*", help=f"any of {', '.join(SUITES)} (default: all)")
    p.add_argument("--nodes", type=int, help="grid resolution for the runs (default 4096)")
    p.add_argument("--seed", type=int, default=0, help="random seed for sampled identities")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("convergence", parents=[common], help="spatial and temporal orders")
    p.add_argument("--levels", type=int, default=4)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("sweep", parents=[common], help="Cartesian parameter sweep")
    p.add_argument("--axis", action="append", metavar="SECTION.KEY=VALUES",
                   help="values as a,b,c or start:stop:count (repeatable)")
    p.add_argument("--jobs", type=int, default=1, help="concurrent runs")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InstabilityError as exc:
        print(f"instability: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE


if __name__ == "__main__":
    sys.exit(main())
