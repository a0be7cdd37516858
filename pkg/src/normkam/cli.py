"""Command-line entry point: diophantine / normalform / oscillator / demo.

Every run writes its primary artifact atomically plus a sibling
``<out>.manifest.json`` recording hashed inputs, settings, versions and
wall time.  Exit codes: 0 on success (domain findings such as a detected
obstruction or a small divisor are results, reported in the artifact,
still 0), 1 on usage errors, 2 on domain errors that prevent a result.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .diophantine import DiophantineParams, check_condition
from .errors import NormkamError, ObstructionDetected, SmallDivisor
from .ioutils import parallel_map, write_csv, write_json, write_manifest
from .normalform import (
    KamSchedule,
    KamTolerances,
    ReversibleCylinderMap,
    conjugated_rotation,
    kam_iterate,
)
from .oscillator import (
    OscillatorProblem,
    PolarState,
    analytic_twist,
    boundedness_sweep,
    fit_twist,
    rotation_number,
)
from .series import FourierTaylorSeries, make_series


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def _parse_range(spec, what="range"):
    """'lo:hi:count' -> (lo, hi, count)."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise NormkamError(f"{what} must look like lo:hi:count, got {spec!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1 or hi <= lo:
        raise NormkamError(f"bad {what} {spec!r}")
    return lo, hi, count


def _load_toml(path):
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _load_problem(path):
    return OscillatorProblem.from_dict(_load_toml(path))


def _series_obj(s):
    return s.to_json_obj()


def _map_obj(M):
    return {"gamma0": M.gamma0, "f": _series_obj(M.f), "g": _series_obj(M.g)}


def _load_map(path):
    with open(path) as fh:
        obj = json.load(fh)
    return ReversibleCylinderMap(
        float(obj["gamma0"]),
        FourierTaylorSeries.from_json_obj(obj["f"]),
        FourierTaylorSeries.from_json_obj(obj["g"]),
    )


def _tolerances(args, cfg):
    tcfg = cfg.get("tolerances", {})
    return KamTolerances(
        residual_tol=(args.tol_residual if args.tol_residual is not None
                      else tcfg.get("residual_tol", 1e-10)),
        mean_tol=(args.tol_mean if args.tol_mean is not None
                  else tcfg.get("mean_tol", 1e-9)),
        reversibility_tol=tcfg.get("reversibility_tol", 1e-10),
    )


# -- subcommand bodies ------------------------------------------------------


def _cmd_diophantine_check(args, cfg):
    params = DiophantineParams(
        omega=tuple(args.omega),
        gamma0=args.gamma0,
        c0=args.c0,
        sigma=args.sigma,
        scan_cutoff=args.kmax,
        norm=args.norm,
    )
    report = check_condition(params)
    obj = report.to_json_obj()
    if args.out:
        write_json(args.out, obj)
        return [args.out], obj
    print(json.dumps(obj))
    return [], obj


def _reduce_and_report(M, schedule, dioph, tol, out, extra_inputs_note=None):
    findings = []
    try:
        result = kam_iterate(M, schedule, dioph, tol)
    except SmallDivisor as exc:
        findings.append({"kind": "small_divisor", "mode": list(exc.mode),
                         "divisor": exc.divisor, "bound": exc.bound})
        report = {"findings": findings, "steps": [], "stop_reason": "small_divisor"}
        write_json(out, report)
        return report
    steps = [r.to_json_obj() for r in result.reports]
    report = {
        "stop_reason": result.stop_reason,
        "steps": steps,
        "measured_decay": list(result.measured_decay),
        "schedule_decay": list(result.schedule_decay),
        "decay_exponent": result.decay_exponent(),
        "obstruction": (None if result.obstruction is None else {
            "step": result.obstruction.step,
            "order": result.obstruction.order,
            "value": result.obstruction.value,
            "mean_norm": result.obstruction.mean_norm,
        }),
        "final_map": _map_obj(result.final_map),
        "transform": {"u": _series_obj(result.transform.u),
                      "v": _series_obj(result.transform.v)},
    }
    if extra_inputs_note:
        report["note"] = extra_inputs_note
    write_json(out, report)
    return report


def _cmd_normalform_reduce(args, cfg):
    M = _load_map(args.map)
    sched_cfg = _load_toml(args.schedule)
    s = sched_cfg.get("schedule", {})
    schedule = KamSchedule(
        alpha=int(s.get("alpha", 1)),
        t0=float(s.get("t0", 0.1)),
        rho0=float(s.get("rho0", 0.6)),
        d0=float(s.get("d0", 0.5)),
        n_max=int(s.get("n_max", 3)),
    )
    dcfg = sched_cfg.get("dioph", {})
    dioph = DiophantineParams(
        omega=M.f.freq,
        gamma0=M.gamma0,
        c0=float(dcfg.get("c0", 0.38)),
        sigma=float(dcfg.get("sigma", 1.0)),
        scan_cutoff=int(dcfg.get("kmax", M.f.cutoff)),
    )
    tol = _tolerances(args, {**cfg, "tolerances": {**cfg.get("tolerances", {}),
                                                   **sched_cfg.get("tolerances", {})}})
    report = _reduce_and_report(M, schedule, dioph, tol, args.out)
    print(f"stop_reason={report['stop_reason']} steps={len(report['steps'])}")
    return [args.out], report


_DEMO_EPS = 1e-3
_DEMO_ORDER_MAX = 24
_DEMO_CUTOFF = 32


def _demo_map(plant_delta=0.0):
    """Golden-mean synthetic: rotation conjugated by an odd/even generator
    of order 3 and size eps; optionally plant a theta-independent r^3 term."""
    gamma0 = 2.0 * math.pi * (math.sqrt(5.0) - 1.0) / 2.0
    eps = _DEMO_EPS
    u = make_series((1.0,), {(3, 1): -0.5j * eps, (3, -1): 0.5j * eps},
                    _DEMO_ORDER_MAX, _DEMO_CUTOFF)
    v = make_series((1.0,), {(3, 1): 0.5 * eps, (3, -1): 0.5 * eps},
                    _DEMO_ORDER_MAX, _DEMO_CUTOFF)
    M = conjugated_rotation(gamma0, u, v)
    if plant_delta:
        plant = make_series((1.0,), {(3, 0): plant_delta}, _DEMO_ORDER_MAX, _DEMO_CUTOFF)
        M = ReversibleCylinderMap(gamma0, M.f + plant, M.g)
    return M


def _cmd_demo(args, cfg):
    name = args.name
    out_dir = args.out or "demo_out"
    os.makedirs(out_dir, exist_ok=True)
    delta = 1e-4 if name == "obstruction" else 0.0
    M = _demo_map(plant_delta=delta)
    map_path = os.path.join(out_dir, "map.json")
    write_json(map_path, _map_obj(M))
    schedule = KamSchedule(alpha=1, t0=0.1, rho0=0.6, d0=0.5, n_max=args.steps)
    dioph = DiophantineParams(omega=(1.0,), gamma0=M.gamma0, c0=0.38, sigma=1.0,
                              scan_cutoff=_DEMO_CUTOFF)
    tol = _tolerances(args, cfg)
    report_path = os.path.join(out_dir, "report.json")
    report = _reduce_and_report(M, schedule, dioph, tol, report_path)
    decay_path = os.path.join(out_dir, "decay.csv")
    rows = []
    measured = report.get("measured_decay", [])
    sched_d = report.get("schedule_decay", [])
    s_seq = [schedule.s(n) for n in range(len(measured))]
    for n, d in enumerate(measured):
        rows.append((n, s_seq[n], d, sched_d[n] if n < len(sched_d) else ""))
    write_csv(decay_path, ("step", "s", "d", "schedule_d"), rows)
    print(f"{'step':>4} {'s':>4} {'residual-norm':>14} {'schedule-d':>12}")
    for n, s_n, d, sd in rows:
        print(f"{n:>4} {s_n:>4} {d:>14.6e} {sd if sd == '' else format(sd, '>12.4e')}")
    if report.get("obstruction"):
        ob = report["obstruction"]
        print(f"obstruction at step {ob['step']}: order {ob['order']}, "
              f"value {ob['value']:.6e}")
    return [report_path, map_path, decay_path], report


def _cmd_oscillator_twist(args, cfg):
    problem = _load_problem(args.problem)
    lo, hi, count = _parse_range(args.lam, "--lambda")
    rep = fit_twist(problem, (lo, hi), samples=count, phases=args.phases,
                    tol=args.ode_tol, use_transforms=not args.raw)
    g0, g1 = analytic_twist(problem)
    header = ("lambda", "phase", "t_advance", "r_return", "t_return",
              "varsigma_advance", "gamma0_analytic", "gamma1_analytic")
    rows = [r + (g0, g1) for r in rep.rows]
    write_csv(args.out, header, rows)
    summary = {
        "gamma0_hat": rep.gamma0_hat, "gamma1_hat": rep.gamma1_hat,
        "gamma0_analytic": g0, "gamma1_analytic": g1,
        "residual_rms": rep.residual_rms, "max_residual": rep.max_residual,
        "samples": count, "phases": args.phases, "raw": bool(args.raw),
    }
    fit_path = os.path.splitext(args.out)[0] + "_fit.json"
    write_json(fit_path, summary)
    print(f"gamma0_hat={rep.gamma0_hat:.9f} gamma1_hat={rep.gamma1_hat:.6f} "
          f"(analytic {g1:.6f})")
    return [args.out, fit_path], summary


def _cmd_oscillator_sweep(args, cfg):
    if args.probe != "boundedness":
        raise NormkamError(f"unknown probe {args.probe!r}")
    problem = _load_problem(args.problem)
    lo, hi, count = _parse_range(args.amplitudes, "--amplitudes")
    amps = np.linspace(lo, hi, count)
    reports = boundedness_sweep(problem, amps, args.tmax,
                                bound_factor=args.bound_factor,
                                tol=args.ode_tol, engine=args.engine)
    header = ("amplitude", "sup_norm", "ratio", "escaped", "t_escape", "t_final")
    rows = [(r.initial_norm, r.sup_norm, r.sup_norm / r.initial_norm, r.escaped,
             "" if r.t_escape is None else r.t_escape, r.t_final) for r in reports]
    write_csv(args.out, header, rows)
    n_esc = sum(r.escaped for r in reports)
    print(f"{len(reports)} orbits, {n_esc} escaped, "
          f"max ratio {max(r.sup_norm / r.initial_norm for r in reports):.4f}")
    return [args.out], rows


def _cmd_oscillator_rotation(args, cfg):
    problem = _load_problem(args.problem)
    lo, hi, count = _parse_range(args.lam, "--lambda")
    lams = np.linspace(lo, hi, count)

    def one(lam):
        state = PolarState(r=float(lam), theta=0.0, t=args.phase)
        return rotation_number(problem, state, args.iterates, tol=args.ode_tol)

    rots = parallel_map(one, lams, threads=args.threads)
    rows = list(zip((float(x) for x in lams), (args.phase,) * len(lams), rots))
    write_csv(args.out, ("lambda", "phase", "rotation"), rows)
    print(f"{len(rows)} rotation numbers written")
    return [args.out], rows


# -- main -------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--config", default=None, help="TOML file with defaults")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled test points")
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("NORMKAM_THREADS", "1")))
    p.add_argument("--tol-residual", dest="tol_residual", type=float, default=None)
    p.add_argument("--tol-mean", dest="tol_mean", type=float, default=None)


def build_parser():
    parser = _Parser(prog="normkam", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("diophantine", parents=[], help="arithmetic condition scans")
    dsub = d.add_subparsers(dest="subcommand", required=True)
    dc = dsub.add_parser("check")
    dc.add_argument("--omega", type=float, action="append", required=True,
                    help="frequency component (repeatable)")
    dc.add_argument("--gamma0", type=float, required=True)
    dc.add_argument("--c0", type=float, required=True)
    dc.add_argument("--sigma", type=float, required=True)
    dc.add_argument("--kmax", type=int, required=True)
    dc.add_argument("--norm", choices=("inf", "l1"), default="inf")
    dc.add_argument("--out", default=None)
    _add_common(dc)
    dc.set_defaults(fn=_cmd_diophantine_check, inputs=lambda a: [a.config])

    n = sub.add_parser("normalform", help="KAM reduction toward the linear form")
    nsub = n.add_subparsers(dest="subcommand", required=True)
    nr = nsub.add_parser("reduce")
    nr.add_argument("--map", required=True, help="map JSON (gamma0, f, g)")
    nr.add_argument("--schedule", required=True, help="schedule TOML")
    nr.add_argument("--out", required=True, help="report JSON path")
    _add_common(nr)
    nr.set_defaults(fn=_cmd_normalform_reduce,
                    inputs=lambda a: [a.map, a.schedule, a.config])

    o = sub.add_parser("oscillator", help="resonant oscillator toolkit")
    osub = o.add_subparsers(dest="subcommand", required=True)
    ot = osub.add_parser("twist")
    ot.add_argument("--problem", required=True, help="problem TOML")
    ot.add_argument("--lambda", dest="lam", required=True, help="lo:hi:count")
    ot.add_argument("--phases", type=int, default=8)
    ot.add_argument("--raw", action="store_true", help="fit raw t-advance (cross check)")
    ot.add_argument("--ode-tol", dest="ode_tol", type=float, default=1e-11)
    ot.add_argument("--out", required=True, help="twist CSV path")
    _add_common(ot)
    ot.set_defaults(fn=_cmd_oscillator_twist, inputs=lambda a: [a.problem, a.config])

    osw = osub.add_parser("sweep")
    osw.add_argument("--probe", required=True, choices=("boundedness",))
    osw.add_argument("--problem", required=True)
    osw.add_argument("--amplitudes", required=True, help="lo:hi:count")
    osw.add_argument("--tmax", type=float, default=1e5)
    osw.add_argument("--bound-factor", dest="bound_factor", type=float, default=2.0)
    osw.add_argument("--engine", choices=("auto", "jax", "scipy"), default="auto")
    osw.add_argument("--ode-tol", dest="ode_tol", type=float, default=1e-9)
    osw.add_argument("--out", required=True)
    _add_common(osw)
    osw.set_defaults(fn=_cmd_oscillator_sweep, inputs=lambda a: [a.problem, a.config])

    orn = osub.add_parser("rotation")
    orn.add_argument("--problem", required=True)
    orn.add_argument("--lambda", dest="lam", required=True, help="lo:hi:count")
    orn.add_argument("--iterates", type=int, default=256)
    orn.add_argument("--phase", type=float, default=0.0)
    orn.add_argument("--ode-tol", dest="ode_tol", type=float, default=1e-10)
    orn.add_argument("--out", required=True)
    _add_common(orn)
    orn.set_defaults(fn=_cmd_oscillator_rotation, inputs=lambda a: [a.problem, a.config])

    dm = sub.add_parser("demo", help="end-to-end synthetic runs")
    dm.add_argument("name", choices=("linearizable", "obstruction"))
    dm.add_argument("--out", default=None, help="output directory")
    dm.add_argument("--steps", type=int, default=3)
    _add_common(dm)
    dm.set_defaults(fn=_cmd_demo, inputs=lambda a: [a.config])

    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = {}
    if getattr(args, "config", None):
        cfg = _load_toml(args.config)
    t_start = time.time()
    try:
        outputs, _ = args.fn(args, cfg)
    except ObstructionDetected as exc:
        # findings are results; reduce/demo embed them, anything else reports here
        print(json.dumps({"finding": "obstruction", "order": exc.order,
                          "value": exc.value}))
        return 0
    except (NormkamError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    if outputs:
        settings = {
            "seed": getattr(args, "seed", 0),
            "threads": getattr(args, "threads", 1),
            "tol_residual": getattr(args, "tol_residual", None),
            "tol_mean": getattr(args, "tol_mean", None),
        }
        primary = outputs[0]
        write_manifest(primary, ["normkam"] + argv,
                       args.inputs(args), outputs, settings, t_start)
    return 0


if __name__ == "__main__":
    sys.exit(main())
