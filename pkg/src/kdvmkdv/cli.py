"""Command-line entry point: derive | solve | verify | simulate | sweep.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 no-solution
domain, 4 numerical failure.  Options follow the precedence flags > config
file > defaults; the config file is a flat "key = value" text format with
'#' comments.  All floating output uses 17 significant digits so records
round-trip exactly.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import sim, waves
from .ansatz import PdeParams, derive_system
from .solver import (
    SIGN_PAIRS,
    DegenerateEquation,
    NoRealSolution,
    back_substitute_exact,
    residuals_numeric,
    solve_closed_form,
    solve_numeric,
)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_NO_SOLUTION = 3
EXIT_NUMERICAL = 4

VELOCITY_REL_TOL = 1e-3
MASS_DRIFT_TOL = 1e-9
QUAD_DRIFT_TOL = 1e-8
CONSTRAINT_TOL = 1e-7


def _fmt(x: float) -> str:
    val = float(x)
    if val == 0.0:
        val = 0.0  # collapse negative zero
    return "%.17g" % (val,)


def _positive_int(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer, got %r" % (text,))
    if val < 1:
        raise argparse.ArgumentTypeError("expected a positive integer, got %d" % (val,))
    return val


def _read_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError("bad config line (expected key = value): %r" % (raw,))
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


def _opt(args, filecfg: dict[str, str], name: str, default, conv=float):
    """Precedence: command-line flag > config file > default."""
    val = getattr(args, name.replace("-", "_"), None)
    if val is not None:
        return val
    if name in filecfg:
        return conv(filecfg[name])
    return default


def _exact_or_none(text: str) -> Fraction | None:
    try:
        return Fraction(Decimal(text))
    except (InvalidOperation, ValueError):
        return None


class _Params:
    """Parameter set retaining both float values and exact rationals."""

    def __init__(self, a: str, b: str, d: str, m: str):
        self.text = {"a": a, "b": b, "d": d, "m": m}
        self.floats = PdeParams(a=float(a), b=float(b), d=float(d), m=float(m))
        exact = {k: _exact_or_none(v) for k, v in self.text.items()}
        self.exact = exact if all(v is not None for v in exact.values()) else None


def _params_from(args, filecfg) -> _Params:
    return _Params(
        a=str(_opt(args, filecfg, "a", "0", str)),
        b=str(_opt(args, filecfg, "b", "1", str)),
        d=str(_opt(args, filecfg, "d", "1", str)),
        m=str(_opt(args, filecfg, "m", "0.5", str)),
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_derive(args) -> int:
    filecfg = _read_config(args.config)
    timedep = bool(_opt(args, filecfg, "timedep", False, lambda s: s.lower() == "true"))
    system = derive_system(args.order, timedep=timedep)
    body = system.text()
    if system.time_constant:
        body += "\n# time-constant coefficients: %s" % (", ".join(system.time_constant),)
    print(body)
    if args.output:
        out = Path(args.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(body + "\n")
    return EXIT_OK


def _family_record(fam) -> str:
    return (
        "family class=%s sign_A=%+d sign_B=%+d A=%s B=%s D=%s v=%s"
        % (fam.class_label, fam.sign_A, fam.sign_B, _fmt(fam.A), _fmt(fam.B), _fmt(fam.D), _fmt(fam.v))
    )


def cmd_solve(args) -> int:
    filecfg = _read_config(args.config)
    params = _params_from(args, filecfg)
    try:
        fams = solve_closed_form(params.floats)
    except (NoRealSolution, DegenerateEquation) as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return EXIT_NO_SOLUTION
    for fam in fams:
        print(_family_record(fam))
    if getattr(args, "numeric", False):
        roots = solve_numeric(derive_system(1), params.floats, seeds=32)
        targets = [np.array([f.A, f.B, f.D, f.v]) for f in fams]
        for root in roots:
            matched = any(np.linalg.norm(root - t) < 1e-7 for t in targets)
            tag = "matches-closed-form" if matched else "outside paper classes"
            print(
                "root A=%s B=%s D=%s v=%s tag=%s"
                % (_fmt(root[0]), _fmt(root[1]), _fmt(root[2]), _fmt(root[3]), tag)
            )
    return EXIT_OK


def _parse_perturb(spec: str) -> dict[str, Fraction]:
    out = {}
    for piece in spec.split(","):
        name, _, delta = piece.partition("=")
        val = _exact_or_none(delta)
        if not name or val is None:
            raise argparse.ArgumentTypeError("bad perturbation %r (expected name=+delta)" % (piece,))
        out[name.strip()] = val
    return out


def cmd_verify(args) -> int:
    filecfg = _read_config(args.config)
    params = _params_from(args, filecfg)
    system = derive_system(1)
    if args.show_system:
        print(system.text())
    perturb = args.perturb or None

    failures = 0
    # symbolic identity: the closed forms annihilate the system for any a,b,d,m
    for sa, sb in SIGN_PAIRS:
        residuals = back_substitute_exact(system, params=None, sign_A=sa, sign_B=sb, perturb=perturb)
        bad = [(mono, r) for mono, r in zip(system.monomials, residuals) if not r.is_zero]
        tag = "signs(%+d,%+d)" % (sa, sb)
        if bad:
            failures += 1
            print("FAIL symbolic %s: nonzero residuals:" % (tag,))
            for mono, r in bad:
                print("  equation[%s]: %s" % (mono.text(), r.text()))
        else:
            print("PASS symbolic %s: all equations reduce to the zero polynomial" % (tag,))

    try:
        fams = solve_closed_form(params.floats)
    except (NoRealSolution, DegenerateEquation) as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return EXIT_NO_SOLUTION

    for fam in fams:
        label = "family %s sign_A=%+d sign_B=%+d" % (fam.class_label, fam.sign_A, fam.sign_B)
        if params.exact is not None:
            residuals = back_substitute_exact(
                system, params=params.exact, sign_A=fam.sign_A, sign_B=fam.sign_B, perturb=perturb
            )
            bad = [(mono, r) for mono, r in zip(system.monomials, residuals) if not r.is_zero]
            if bad:
                failures += 1
                print("FAIL exact %s:" % (label,))
                for mono, r in bad:
                    print("  equation[%s]: %s" % (mono.text(), r.text()))
            else:
                print("PASS exact %s" % (label,))
        else:
            worst = max(abs(r) for r in residuals_numeric(fam, system))
            if worst > 1e-12:
                failures += 1
                print("FAIL numeric-substitution %s: max residual %s" % (label, _fmt(worst)))
            else:
                print("PASS numeric-substitution %s: max residual %s" % (label, _fmt(worst)))
        if not perturb:
            res = sim.spectral_residual(fam, N=256)
            if res > 1e-8:
                failures += 1
                print("FAIL pde-residual %s: L-inf %s" % (label, _fmt(res)))
            else:
                print("PASS pde-residual %s: L-inf %s" % (label, _fmt(res)))

    if args.timedep:
        f = waves.parse_coefficient(args.f)
        t_ref = args.t_ref
        C = fams[0].v
        v0 = C if args.v0 is None else args.v0
        law = waves.VelocityLaw.time_dependent(C, f, v0=v0, t_ref=t_ref)
        ts = np.linspace(t_ref, t_ref + 4.0, 50)
        rc = np.max(np.abs(waves.constraint_residual(law, ts, form="constraint")))
        rp = np.max(np.abs(waves.constraint_residual(law, ts, form="paper")))
        status = "PASS" if rc < CONSTRAINT_TOL else "FAIL"
        if rc >= CONSTRAINT_TOL:
            failures += 1
        print("%s velocity-constraint: max |v + t*dv/dt - C*h| = %s (quadrature law)" % (status, _fmt(rc)))
        print("REPORT velocity-paper-form: max |v + t*dv/dt - C*h| = %s (reported, not asserted)" % (_fmt(rp),))

    return EXIT_VERIFY_FAIL if failures else EXIT_OK


def _run_simulation(params: _Params, args, filecfg) -> tuple[int, list[str]]:
    lines: list[str] = []
    p = params.floats
    N = int(_opt(args, filecfg, "N", 256, int))
    dt = float(_opt(args, filecfg, "dt", 1e-4))
    T = float(_opt(args, filecfg, "T", 1.0))
    periods = int(_opt(args, filecfg, "periods", 1, int))
    window = _opt(args, filecfg, "window-length", None)
    fspec = str(_opt(args, filecfg, "f", "unit", str))
    f = waves.parse_coefficient(fspec)
    timedep = not isinstance(f, waves.UnitCoefficient)
    t_ref = float(_opt(args, filecfg, "t-ref", 1.0))
    t0 = float(_opt(args, filecfg, "t0", t_ref if timedep else 0.0))

    fams = solve_closed_form(p)
    fam = next(
        fam for fam in fams if (fam.sign_A, fam.sign_B) == (args.sign_a, args.sign_b)
    )
    if timedep:
        v0 = fam.v if args.v0 is None else float(args.v0)
        law = waves.VelocityLaw.time_dependent(fam.v, f, v0=v0, t_ref=t_ref)
    else:
        law = waves.VelocityLaw.constant(fam.v)

    cfg = sim.SimConfig(
        p=p, N=N, dt=dt, T=T, periods=periods, f=f, t0=t0,
        window_length=float(window) if window is not None else None,
    )
    state0 = sim.init_from_family(cfg, fam, law)
    report = sim.stability_report(cfg, state0.field())
    states = sim.run(cfg, state0)
    dm, dq = sim.conservation_drift(states)
    ts, ps = sim.track_positions(states, cfg)

    outdir = Path(args.outdir)
    rundir = sim.write_snapshots(states, cfg, outdir)

    if timedep:
        t_nonzero = ts[1:]
        p_abs = waves.wave_position(law, t0) + ps[1:]
        v_meas = p_abs / t_nonzero
        v_pred = np.array([waves.velocity_at(law, float(t)) for t in t_nonzero])
        vel_err = float(np.max(np.abs(v_meas - v_pred) / np.maximum(np.abs(v_pred), 1e-30)))
        rows = zip(t_nonzero, v_meas, v_pred)
        measured, fit_resid = float(v_meas[-1]), float("nan")
    else:
        measured, fit_resid = sim.measure_velocity(states, cfg)
        v_pred = np.full(ts[1:].shape, fam.v)
        with np.errstate(invalid="ignore"):
            v_avg = ps[1:] / (ts[1:] - ts[0])
        vel_err = abs(measured - fam.v) / max(abs(fam.v), 1e-30)
        rows = zip(ts[1:], v_avg, v_pred)

    vel_path = rundir / "velocity.csv"
    vel_lines = ["t,v_measured,v_predicted"]
    for t, vm, vp in rows:
        vel_lines.append("%s,%s,%s" % (_fmt(t), _fmt(vm), _fmt(vp)))
    vel_path.write_text("\n".join(vel_lines) + "\n")

    ok = vel_err < VELOCITY_REL_TOL and dm < MASS_DRIFT_TOL and dq < QUAD_DRIFT_TOL
    summary = [
        "run = %s" % (rundir.name,),
        "family = %s" % (fam.class_label,),
        "v_predicted = %s" % (_fmt(fam.v if not timedep else waves.velocity_at(law, float(ts[-1]))),),
        "v_measured = %s" % (_fmt(measured),),
        "velocity_rel_error = %s" % (_fmt(vel_err),),
        "fit_residual = %s" % (_fmt(fit_resid),),
        "mass_drift = %s" % (_fmt(dm),),
        "quad_drift = %s" % (_fmt(dq),),
        "advective_cfl = %s" % (_fmt(report["advective_cfl"]),),
        "linear_rotation = %s" % (_fmt(report["linear_rotation"]),),
        "status = %s" % ("ok" if ok else "velocity-or-drift-out-of-bounds",),
    ]
    (rundir / "summary.txt").write_text("\n".join(summary) + "\n")
    lines.extend(summary)
    return (EXIT_OK if ok else EXIT_VERIFY_FAIL), lines


def cmd_simulate(args) -> int:
    filecfg = _read_config(args.config)
    params = _params_from(args, filecfg)
    if float(params.floats.m) == 1.0 and _opt(args, filecfg, "window-length", None) is None:
        print(
            "error: m=1 is the non-periodic limit; use --m 0.999999 or pass --window-length "
            "for a wide-domain windowed run",
            file=sys.stderr,
        )
        return EXIT_USAGE
    try:
        code, lines = _run_simulation(params, args, filecfg)
    except (NoRealSolution, DegenerateEquation) as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return EXIT_NO_SOLUTION
    except (sim.SimulationBlowUp, sim.StabilityError) as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return EXIT_NUMERICAL
    for line in lines:
        print(line)
    return code


def cmd_sweep(args) -> int:
    filecfg = _read_config(args.config)
    values = [v.strip() for v in args.sweep_values.split(",") if v.strip()]
    if not values:
        print("error: empty sweep value list", file=sys.stderr)
        return EXIT_USAGE

    def one(value: str) -> tuple[str, int, list[str]]:
        sub_args = argparse.Namespace(**vars(args))
        setattr(sub_args, args.sweep_param.replace("-", "_"), value)
        params = _params_from(sub_args, filecfg)
        try:
            code, lines = _run_simulation(params, sub_args, filecfg)
        except (NoRealSolution, DegenerateEquation) as exc:
            return value, EXIT_NO_SOLUTION, ["error: %s" % (exc,)]
        except (sim.SimulationBlowUp, sim.StabilityError) as exc:
            return value, EXIT_NUMERICAL, ["error: %s" % (exc,)]
        return value, code, lines

    worst = EXIT_OK
    with ThreadPoolExecutor(max_workers=min(4, len(values))) as pool:
        for value, code, lines in pool.map(one, values):
            print("--- %s = %s ---" % (args.sweep_param, value))
            for line in lines:
                print(line)
            worst = max(worst, code)
    return worst


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_param_flags(sub):
    sub.add_argument("-a", type=str, default=None, help="quadratic nonlinearity coefficient")
    sub.add_argument("-b", type=str, default=None, help="cubic nonlinearity coefficient")
    sub.add_argument("-d", type=str, default=None, help="dispersion coefficient")
    sub.add_argument("-m", type=str, default=None, help="elliptic parameter in (0, 1]")
    sub.add_argument("--config", type=str, default=None, help="flat key=value config file")


def _add_sim_flags(sub):
    sub.add_argument("--N", type=int, default=None, help="grid points (power of two)")
    sub.add_argument("--dt", type=float, default=None, help="time step")
    sub.add_argument("--T", type=float, default=None, help="final time")
    sub.add_argument("--periods", type=int, default=None, help="elliptic periods in the domain")
    sub.add_argument("--window-length", type=float, default=None, help="explicit domain for m=1 runs")
    sub.add_argument("--f", type=str, default=None, help="time coefficient: unit|exp:R|poly:c0,c1,..|tab:t:f,..")
    sub.add_argument("--t0", type=float, default=None, help="start time")
    sub.add_argument("--t-ref", type=float, default=None, help="reference time of the velocity law")
    sub.add_argument("--v0", type=float, default=None, help="velocity at t_ref")
    sub.add_argument("--sign-a", type=int, choices=(1, -1), default=1, help="sign of the cn amplitude")
    sub.add_argument("--sign-b", type=int, choices=(1, -1), default=1, help="sign of the dn amplitude")
    sub.add_argument("--outdir", type=str, default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdvmkdv",
        description="Jacobi-elliptic solitary waves of the combined KdV-mKdV equation",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_derive = subs.add_parser("derive", help="derive the algebraic system for an ansatz order")
    p_derive.add_argument("--order", type=_positive_int, required=True)
    p_derive.add_argument("--timedep", action="store_true", default=None)
    p_derive.add_argument("--output", type=str, default=None, help="also save the system to a file")
    p_derive.add_argument("--config", type=str, default=None)
    p_derive.set_defaults(func=cmd_derive)

    p_solve = subs.add_parser("solve", help="emit the four closed-form families")
    _add_param_flags(p_solve)
    p_solve.add_argument(
        "--numeric", action="store_true",
        help="also run the multi-start root search and tag roots against the closed forms",
    )
    p_solve.set_defaults(func=cmd_solve)

    p_verify = subs.add_parser("verify", help="exact and numeric verification of the closed forms")
    _add_param_flags(p_verify)
    p_verify.add_argument("--perturb", type=_parse_perturb, default=None, help="e.g. v=+0.1")
    p_verify.add_argument("--show-system", action="store_true")
    p_verify.add_argument("--timedep", action="store_true")
    p_verify.add_argument("--f", type=str, default="exp:1")
    p_verify.add_argument("--v0", type=float, default=None)
    p_verify.add_argument("--t-ref", type=float, default=1.0)
    p_verify.set_defaults(func=cmd_verify)

    p_simulate = subs.add_parser("simulate", help="pseudo-spectral run comparing measured speed")
    _add_param_flags(p_simulate)
    _add_sim_flags(p_simulate)
    p_simulate.set_defaults(func=cmd_simulate)

    p_sweep = subs.add_parser("sweep", help="simulate across a parameter sweep")
    _add_param_flags(p_sweep)
    _add_sim_flags(p_sweep)
    p_sweep.add_argument("--sweep-param", type=str, required=True, choices=("a", "b", "d", "m"))
    p_sweep.add_argument("--sweep-values", type=str, required=True, help="comma-separated values")
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (waves.CoefficientSingularity,) as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
