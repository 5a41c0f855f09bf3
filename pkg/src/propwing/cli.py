"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 convergence/solver failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import cases, llt, optimizer, polar, slipstream
from .errors import CaseError, ConvergenceError, PropwingError, SolverError, ValidationError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4


def _install_rng_guard():
    """Make any RNG call raise: backs the --seedless-deterministic flag."""

    def _blow_up(*_args, **_kwargs):
        raise RuntimeError("RNG use is forbidden under --seedless-deterministic")

    import random

    for name in ("random", "uniform", "gauss", "randint", "choice", "shuffle", "sample"):
        setattr(random, name, _blow_up)
    for name in ("random", "rand", "randn", "randint", "uniform", "normal", "choice", "shuffle", "permutation", "seed", "default_rng"):
        if hasattr(np.random, name):
            setattr(np.random, name, _blow_up)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="propwing",
        description="Propeller-slipstream-aware wing analysis and optimization",
    )
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    parser.add_argument(
        "--seedless-deterministic",
        action="store_true",
        help="assert that no random number generator is used",
    )
    top = parser.add_subparsers(dest="group", required=True)

    g_polar = top.add_parser("polar", help="aerofoil polar operations")
    sp = g_polar.add_subparsers(dest="command", required=True)
    p = sp.add_parser("fit", help="fit the best-linear-fit lift model")
    p.add_argument("--polar", required=True, help="polar CSV (alpha_deg,cl,cd)")
    p.add_argument("--reynolds", type=float, required=True)
    p.add_argument("--window", nargs=2, type=float, default=(-2.5, 10.0), metavar=("LO", "HI"))

    g_prop = top.add_parser("prop", help="propeller model operations")
    sp = g_prop.add_subparsers(dest="command", required=True)
    p = sp.add_parser("ct-sweep", help="thrust-coefficient sweep over advance ratio")
    p.add_argument("--geometry", required=True)
    p.add_argument("--section-polar", required=True)
    p.add_argument("--section-reynolds", type=float, default=0.0)
    p.add_argument("--rpm", type=float, required=True)
    p.add_argument("--v-min", type=float, required=True)
    p.add_argument("--v-max", type=float, required=True)
    p.add_argument("--points", type=int, default=15)
    p.add_argument("--rho", type=float, default=1.225)
    p = sp.add_parser("slipstream", help="generate a slipstream profile from blade geometry")
    p.add_argument("--geometry", required=True)
    p.add_argument("--section-polar", required=True)
    p.add_argument("--section-reynolds", type=float, default=0.0)
    p.add_argument("--rpm", type=float, required=True)
    p.add_argument("--v-inf", type=float, required=True)
    p.add_argument("--rho", type=float, default=1.225)
    p.add_argument("--prop-y", type=float, required=True, help="propeller axis span position, m")
    p.add_argument("--rotation", choices=("up_inboard", "up_outboard"), default="up_inboard")
    p.add_argument("--station-x", type=float, default=1.0, help="diameters downstream")

    g_llt = top.add_parser("llt", help="lifting-line solves")
    sp = g_llt.add_subparsers(dest="command", required=True)
    p = sp.add_parser("solve", help="solve the control wing of a case")
    p.add_argument("--case", required=True)
    p.add_argument("--alpha", type=float, default=None, help="override angle of attack, deg")
    p.add_argument("--no-slipstream", action="store_true")
    p = sp.add_parser("sweep", help="polar sweep of the control wing, with/without propeller")
    p.add_argument("--case", required=True)
    p.add_argument("--alpha-min", type=float, default=-6.0)
    p.add_argument("--alpha-max", type=float, default=6.0)
    p.add_argument("--step", type=float, default=0.5)

    p = top.add_parser("optimize", help="run one optimization case (summary + history only)")
    p.add_argument("--case", required=True)

    g_case = top.add_parser("case", help="full case runs with artifact bundles")
    sp = g_case.add_subparsers(dest="command", required=True)
    p = sp.add_parser("run", help="run one case end to end")
    p.add_argument("--case", required=True)
    p = sp.add_parser("run-all", help="run every bundled case (or all cases in a directory)")
    p.add_argument("--cases-dir", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seedless_deterministic:
        _install_rng_guard()
    say = (lambda *_a: None) if args.quiet else print
    out_dir = Path(args.out)
    try:
        return _dispatch(args, out_dir, say)
    except CaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc.cause)
    except PropwingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (ConvergenceError, SolverError)):
        return EXIT_CONVERGENCE
    if isinstance(exc, ValidationError):
        return EXIT_VALIDATION
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_VALIDATION


def _dispatch(args, out_dir: Path, say) -> int:
    if args.group == "polar":
        foil = polar.load_polar(args.polar, name=Path(args.polar).stem, reynolds=args.reynolds)
        model = polar.fit_blf(foil, tuple(args.window))
        say(f"a0 = {model.a0:.6g} per rad ({model.a0 * np.pi / 180.0:.6g} per deg)")
        say(f"alpha0 = {np.degrees(model.alpha0):.6g} deg")
        say(f"window = [{model.fit_window_deg[0]}, {model.fit_window_deg[1]}] deg")
        return EXIT_OK

    if args.group == "prop" and args.command == "ct-sweep":
        v_range = np.linspace(args.v_min, args.v_max, args.points)
        arts = cases.run_ct_sweep(
            args.geometry,
            args.section_polar,
            rpm=args.rpm,
            v_range=v_range,
            out_dir=out_dir,
            rho=args.rho,
            section_reynolds=args.section_reynolds,
        )
        say(f"wrote {arts['ct_sweep_csv']}")
        return EXIT_OK

    if args.group == "prop" and args.command == "slipstream":
        section = polar.load_polar(
            args.section_polar, name=Path(args.section_polar).stem, reynolds=args.section_reynolds
        )
        geom = slipstream.load_propeller(args.geometry, section_polar=section)
        op = slipstream.PropOperatingPoint(v_inf=args.v_inf, n_rps=args.rpm / 60.0, rho=args.rho)
        bem = slipstream.run_bem(geom, op)
        profile = slipstream.slipstream_from_bem(
            bem, geom, op, prop_y_center=args.prop_y,
            rotation_sense=args.rotation, station_x=args.station_x,
        )
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "slipstream.csv"
        slipstream.save_slipstream(path, profile)
        say(f"thrust = {bem.thrust:.4g} N, torque = {bem.torque:.4g} N m")
        say(f"wrote {path}")
        return EXIT_OK

    if args.group == "llt":
        config = cases.load_case(args.case)
        control, foil, slip, cond = cases.build_environment(config)
        if args.command == "solve":
            if args.alpha is not None:
                cond = llt.FlightCondition(
                    v_inf=cond.v_inf, rho=cond.rho,
                    alpha_geo=np.radians(args.alpha), reynolds_ref=cond.reynolds_ref,
                )
            if args.no_slipstream:
                slip = None
            sol = llt.solve(control, foil, slip, cond, config.settings)
            out = out_dir / config.name
            out.mkdir(parents=True, exist_ok=True)
            llt.export_spanwise_csv(out / "spanwise.csv", sol)
            say(
                f"CL = {sol.CL:.5f}  CDi = {sol.CDi:.5f}  Cf = {sol.Cf:.5f}  "
                f"CD = {sol.CD:.5f}  CL/CD = {sol.endurance:.4f}"
            )
            say(f"wrote {out / 'spanwise.csv'}")
            return EXIT_OK
        alphas = np.radians(np.arange(args.alpha_min, args.alpha_max + 1e-9, args.step))
        arts = cases.run_polar_sweep(config, alphas, out_dir)
        say(f"wrote {arts['polar_sweep_csv']}")
        return EXIT_OK

    if args.group == "optimize":
        config = cases.load_case(args.case)
        report = cases.run_case(config, out_dir)
        _say_report(report, say)
        return EXIT_OK if report.converged else EXIT_CONVERGENCE

    if args.group == "case" and args.command == "run":
        config = cases.load_case(args.case)
        report = cases.run_case(config, out_dir)
        _say_report(report, say)
        return EXIT_OK if report.converged else EXIT_CONVERGENCE

    if args.group == "case" and args.command == "run-all":
        paths = (
            sorted(Path(args.cases_dir).glob("*.cfg"))
            if args.cases_dir
            else cases.bundled_case_paths()
        )
        if not paths:
            raise ValidationError("no case files found")
        worst = EXIT_OK
        for path in paths:
            config = cases.load_case(path)
            report = cases.run_case(config, out_dir)
            _say_report(report, say)
            if not report.converged:
                worst = EXIT_CONVERGENCE
        return worst

    raise ValidationError("unhandled command")  # pragma: no cover


def _say_report(report, say) -> None:
    d = report.deltas
    say(
        f"[{report.name}] converged={report.converged} "
        f"CL {report.control_metrics['CL']:.4f}->{report.opt_metrics['CL']:.4f}  "
        f"CD {report.control_metrics['CD']:.5f}->{report.opt_metrics['CD']:.5f}  "
        f"dCD {d.d_cd_counts:.1f} counts ({d.d_cd_pct:.1f}%)  "
        f"d(CL/CD) {d.d_endurance_pct:.1f}%"
    )


if __name__ == "__main__":
    sys.exit(main())
