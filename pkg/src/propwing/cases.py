"""Case runner: configured control wings, optimization runs, and artifacts.

A case file is flat ``key = value`` text with ``[section]`` headers (angles
in degrees, lengths in meters). Eight ready-made cases covering the fixed-CL,
banded-CL and modified-control-wing studies ship with the package data.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import llt, optimizer, planform, polar, slipstream, svgplot
from .errors import CaseError, ValidationError
from .fmt import fnum

DATA_DIR = Path(__file__).resolve().parent / "data"
CASES_DIR = DATA_DIR / "cases"


@dataclass
class CaseConfig:
    name: str
    provenance: str
    # control wing
    span: float
    area: float
    chord_root: float
    chord_tip: float
    washout: float  # radians
    alpha_geo: float  # radians
    # environment
    polar_path: Path
    reynolds: float
    blf_window_deg: tuple[float, float]
    v_inf: float
    rho: float
    slipstream_path: Path | None = None
    prop_geometry_path: Path | None = None
    prop_section_polar_path: Path | None = None
    prop_section_reynolds: float = 0.0
    prop_rpm: float = 0.0
    prop_y_frac: float = 0.30
    rotation_sense: str = "up_inboard"
    station_x: float = 1.0
    # solver + optimization
    settings: llt.LLTSettings = field(default_factory=llt.LLTSettings)
    spec: optimizer.OptimisationSpec | None = None
    reference: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.prop_y_frac < 1.0:
            raise ValidationError("prop_y_frac must lie in (0, 1)")


@dataclass
class CaseReport:
    name: str
    control_metrics: dict[str, float]
    opt_metrics: dict[str, float]
    deltas: optimizer.DeltaMetrics
    converged: bool
    artifacts: dict[str, Path]
    result: optimizer.OptimisationResult


def _floats(text: str) -> list[float]:
    return [float(p) for p in text.replace(",", " ").split()]


def load_case(path) -> CaseConfig:
    """Parse a case file; referenced data paths resolve relative to it."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"case file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.read(path, encoding="utf-8")
    base = path.parent

    def _path(section, key):
        if not cp.has_option(section, key):
            return None
        return (base / cp.get(section, key)).resolve()

    ctrl = cp["control"]
    env = cp["environment"]
    opt = cp["optimization"]

    mode_name = opt.get("cl_mode", "fixed").strip()
    if mode_name == "fixed":
        cl_mode = optimizer.FixedCl(target=opt.getfloat("cl_target"))
    elif mode_name == "band":
        cl_mode = optimizer.BandCl(
            center=opt.getfloat("cl_center"), frac=opt.getfloat("cl_band_frac")
        )
    else:
        raise ValidationError(f"unknown cl_mode {mode_name!r}")

    t_lo, t_hi = _floats(opt.get("twist_bounds_deg", "-8, 8"))
    c_lo, c_hi = _floats(opt.get("chord_bounds_m", "0.05, 0.60"))
    area = ctrl.getfloat("area_m2")
    spec = optimizer.OptimisationSpec(
        cost=opt.get("cost").strip(),
        cl_mode=cl_mode,
        twist_bounds=(np.radians(t_lo), np.radians(t_hi)),
        chord_bounds=(c_lo, c_hi),
        fixed_area=area,
        fixed_root_tip=(ctrl.getfloat("chord_root_m"), ctrl.getfloat("chord_tip_m")),
        max_outer_iters=opt.getint("max_outer_iters", 30),
        tolerance=opt.getfloat("tolerance", 1e-7),
    )
    lltsec = cp["llt"] if cp.has_section("llt") else {}
    settings = llt.LLTSettings(
        n_collocation=int(lltsec.get("n_collocation", 320)),
        n_modes=int(lltsec.get("n_modes", 48)),
    )
    window = _floats(env.get("blf_window_deg", "-2.5, 10"))
    reference = {}
    if cp.has_section("reference"):
        reference = {k: float(v) for k, v in cp["reference"].items()}
    return CaseConfig(
        name=cp["case"].get("name", path.stem),
        provenance=cp["case"].get("provenance", "unspecified"),
        span=ctrl.getfloat("span_m"),
        area=area,
        chord_root=ctrl.getfloat("chord_root_m"),
        chord_tip=ctrl.getfloat("chord_tip_m"),
        washout=np.radians(ctrl.getfloat("washout_deg", 0.0)),
        alpha_geo=np.radians(ctrl.getfloat("alpha_geo_deg")),
        polar_path=_path("environment", "polar"),
        reynolds=env.getfloat("reynolds", 0.0),
        blf_window_deg=(window[0], window[1]),
        v_inf=env.getfloat("v_inf_mps"),
        rho=env.getfloat("rho_kgpm3"),
        slipstream_path=_path("environment", "slipstream"),
        prop_geometry_path=_path("environment", "prop_geometry"),
        prop_section_polar_path=_path("environment", "prop_section_polar"),
        prop_section_reynolds=env.getfloat("prop_section_reynolds", 0.0),
        prop_rpm=env.getfloat("prop_rpm", 0.0),
        prop_y_frac=env.getfloat("prop_y_frac", 0.30),
        rotation_sense=env.get("rotation_sense", "up_inboard"),
        station_x=env.getfloat("station_x_diameters", 1.0),
        settings=settings,
        spec=spec,
        reference=reference,
    )


def build_environment(config: CaseConfig):
    """-> (control planform, polar with BLF, slipstream profile, condition)."""
    if config.polar_path is None or not Path(config.polar_path).exists():
        raise FileNotFoundError(f"polar file not found: {config.polar_path}")
    foil = polar.load_polar(config.polar_path, name=config.polar_path.stem, reynolds=config.reynolds)
    foil = foil.fitted(config.blf_window_deg)

    control = planform.control_wing(
        span=config.span,
        area=config.area,
        chord_root=config.chord_root,
        chord_tip=config.chord_tip,
        washout=config.washout,
        alpha_geo=config.alpha_geo,
    )
    if config.slipstream_path is not None:
        if not Path(config.slipstream_path).exists():
            raise FileNotFoundError(f"slipstream file not found: {config.slipstream_path}")
        slip = slipstream.load_slipstream(config.slipstream_path)
    elif config.prop_geometry_path is not None:
        slip = _slipstream_from_geometry(config, control.semi_span)
    else:
        slip = None
    cond = llt.FlightCondition(
        v_inf=config.v_inf,
        rho=config.rho,
        alpha_geo=config.alpha_geo,
        reynolds_ref=config.reynolds,
    )
    return control, foil, slip, cond


def _slipstream_from_geometry(config: CaseConfig, semi_span: float):
    if config.prop_section_polar_path is None:
        raise ValidationError("prop_geometry requires prop_section_polar")
    section = polar.load_polar(
        config.prop_section_polar_path,
        name=config.prop_section_polar_path.stem,
        reynolds=config.prop_section_reynolds,
    )
    geom = slipstream.load_propeller(config.prop_geometry_path, section_polar=section)
    op = slipstream.PropOperatingPoint(
        v_inf=config.v_inf, n_rps=config.prop_rpm / 60.0, rho=config.rho
    )
    bem = slipstream.run_bem(geom, op)
    return slipstream.slipstream_from_bem(
        bem,
        geom,
        op,
        prop_y_center=config.prop_y_frac * semi_span,
        rotation_sense=config.rotation_sense,
        station_x=config.station_x,
        semi_span=semi_span,
    )


def _metrics(sol: llt.LLTSolution) -> dict[str, float]:
    return {
        "CL": sol.CL,
        "CDi": sol.CDi,
        "Cf": sol.Cf,
        "CD": sol.CD,
        "endurance": sol.endurance,
    }


def run_case(config: CaseConfig, out_dir) -> CaseReport:
    """Solve the control wing, optimize, and write the artifact bundle.

    All computation happens before any file is written, so a failing stage
    leaves no partial outputs.
    """
    try:
        control, foil, slip, cond = build_environment(config)
    except Exception as exc:
        raise CaseError(config.name, "environment", exc) from exc

    try:
        env = optimizer.Environment(polar=foil, slip=slip, cond=cond, settings=config.settings)
        result = optimizer.optimize(control, config.spec, env)
    except Exception as exc:
        raise CaseError(config.name, "optimize", exc) from exc

    try:
        sweep_alphas = np.radians(np.arange(-6.0, 6.001, 1.0))
        sweep_rows = llt.wing_polar_sweep(
            result.planform_opt, foil, slip, cond, sweep_alphas, config.settings
        )
    except Exception as exc:
        raise CaseError(config.name, "sweep", exc) from exc

    try:
        out = Path(out_dir) / config.name
        out.mkdir(parents=True, exist_ok=True)
        artifacts = _write_artifacts(config, control, result, sweep_rows, cond, out)
    except Exception as exc:
        raise CaseError(config.name, "report", exc) from exc

    return CaseReport(
        name=config.name,
        control_metrics=_metrics(result.control_sol),
        opt_metrics=_metrics(result.sol_opt),
        deltas=result.deltas,
        converged=result.converged,
        artifacts=artifacts,
        result=result,
    )


def _write_artifacts(config, control, result, sweep_rows, cond, out: Path) -> dict[str, Path]:
    artifacts = {}

    p = out / "planform_opt.csv"
    planform.export_planform_csv(p, result.planform_opt)
    artifacts["planform_opt_csv"] = p
    p = out / "planform_control.csv"
    planform.export_planform_csv(p, control)
    artifacts["planform_control_csv"] = p

    snap = planform.snapshot(result.planform_opt)
    p = out / "planform.svg"
    svgplot.planform_plot(p, snap.y, snap.chord, f"{config.name}: optimized planform")
    artifacts["planform_svg"] = p

    ctrl_sol, opt_sol = result.control_sol, result.sol_opt
    norm = cond.v_inf * control.semi_span
    p = out / "circulation.csv"
    lines = ["y_m,gamma_control_m2ps,gamma_control_norm,gamma_opt_m2ps,gamma_opt_norm"]
    for i in range(ctrl_sol.y.size):
        lines.append(
            f"{fnum(ctrl_sol.y[i])},{fnum(ctrl_sol.gamma[i])},{fnum(ctrl_sol.gamma[i] / norm)},"
            f"{fnum(opt_sol.gamma[i])},{fnum(opt_sol.gamma[i] / norm)}"
        )
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    artifacts["circulation_csv"] = p

    p = out / "circulation.svg"
    svgplot.line_plot(
        p,
        [
            ("control", ctrl_sol.y, ctrl_sol.gamma / norm),
            ("optimized", opt_sol.y, opt_sol.gamma / norm),
        ],
        f"{config.name}: circulation",
        "y (m)",
        "gamma / (V s)",
    )
    artifacts["circulation_svg"] = p

    p = out / "history.csv"
    optimizer.export_history_csv(p, result.history)
    artifacts["history_csv"] = p

    p = out / "sweep_opt.csv"
    llt.export_sweep_csv(p, sweep_rows)
    artifacts["sweep_csv"] = p

    p = out / "report.txt"
    p.write_text(_report_text(config, result), encoding="utf-8")
    artifacts["report"] = p
    return artifacts


def _report_text(config: CaseConfig, result: optimizer.OptimisationResult) -> str:
    d = result.deltas
    lines = [
        "# propwing case report",
        f"# data provenance: {config.provenance}",
        "# reference.* values are the published results for this configuration;",
        "# computed values use the bundled sample data and differ accordingly.",
        f"case = {config.name}",
        f"converged = {str(result.converged).lower()}",
        f"cost = {config.spec.cost}",
        f"alpha_geo_deg = {fnum(np.degrees(config.alpha_geo))}",
        f"n_evals = {result.n_evals}",
    ]
    for tag, sol in (("control", result.control_sol), ("opt", result.sol_opt)):
        for key, val in _metrics(sol).items():
            lines.append(f"{tag}.{key} = {fnum(val)}")
    lines += [
        f"delta.cdi_counts = {fnum(d.d_cdi_counts)}",
        f"delta.cdi_pct = {fnum(d.d_cdi_pct)}",
        f"delta.cf_counts = {fnum(d.d_cf_counts)}",
        f"delta.cf_pct = {fnum(d.d_cf_pct)}",
        f"delta.cd_counts = {fnum(d.d_cd_counts)}",
        f"delta.cd_pct = {fnum(d.d_cd_pct)}",
        f"delta.cl_counts = {fnum(d.d_cl_counts)}",
        f"delta.cl_pct = {fnum(d.d_cl_pct)}",
        f"delta.endurance_pct = {fnum(d.d_endurance_pct)}",
    ]
    for key in sorted(config.reference):
        lines.append(f"reference.{key} = {fnum(config.reference[key])}")
    return "\n".join(lines) + "\n"


def run_polar_sweep(config: CaseConfig, alpha_range, out_dir) -> dict[str, Path]:
    """Sweep the control wing with and without the propeller, side by side."""
    alphas = np.atleast_1d(np.asarray(alpha_range, dtype=float))
    if alphas.size == 0:
        raise ValidationError("empty alpha range")
    try:
        control, foil, slip, cond = build_environment(config)
        rows_off = llt.wing_polar_sweep(control, foil, None, cond, alphas, config.settings)
        rows_on = (
            llt.wing_polar_sweep(control, foil, slip, cond, alphas, config.settings)
            if slip is not None
            else rows_off
        )
    except CaseError:
        raise
    except Exception as exc:
        raise CaseError(config.name, "sweep", exc) from exc

    out = Path(out_dir) / config.name
    out.mkdir(parents=True, exist_ok=True)
    p = out / "polar_sweep.csv"
    lines = ["alpha_deg,CL_off,CDi_off,Cf_off,CD_off,CL_on,CDi_on,Cf_on,CD_on"]
    for i in range(alphas.size):
        a = np.degrees(alphas[i])
        lines.append(
            f"{fnum(a)},{fnum(rows_off[i][1])},{fnum(rows_off[i][2])},"
            f"{fnum(rows_off[i][3])},{fnum(rows_off[i][4])},"
            f"{fnum(rows_on[i][1])},{fnum(rows_on[i][2])},"
            f"{fnum(rows_on[i][3])},{fnum(rows_on[i][4])}"
        )
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    svg = out / "polar_sweep.svg"
    svgplot.line_plot(
        svg,
        [
            ("prop off", np.degrees(alphas), rows_off[:, 1]),
            ("prop on", np.degrees(alphas), rows_on[:, 1]),
        ],
        f"{config.name}: lift curve",
        "alpha (deg)",
        "CL",
    )
    return {"polar_sweep_csv": p, "polar_sweep_svg": svg}


def run_ct_sweep(
    geom_path,
    section_polar_path,
    rpm: float,
    v_range,
    out_dir,
    rho: float = 1.225,
    section_reynolds: float = 0.0,
) -> dict[str, Path]:
    """BEM advance-ratio sweep; writes a `J,CT` CSV and a line plot."""
    section = polar.load_polar(
        section_polar_path, name=Path(section_polar_path).stem, reynolds=section_reynolds
    )
    geom = slipstream.load_propeller(geom_path, section_polar=section)
    v_values = np.atleast_1d(np.asarray(v_range, dtype=float))
    if v_values.size == 0:
        raise ValidationError("empty velocity range")
    rows = []
    for v in v_values:
        op = slipstream.PropOperatingPoint(v_inf=float(v), n_rps=rpm / 60.0, rho=rho)
        bem = slipstream.run_bem(geom, op)
        rows.append((slipstream.advance_ratio(op, geom), slipstream.thrust_coefficient(bem.thrust, op, geom)))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    p = out / "ct_sweep.csv"
    lines = ["J,CT"] + [f"{fnum(j)},{fnum(ct)}" for j, ct in rows]
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    svg = out / "ct_sweep.svg"
    arr = np.array(rows)
    svgplot.line_plot(svg, [("CT", arr[:, 0], arr[:, 1])], "thrust coefficient", "J", "CT")
    return {"ct_sweep_csv": p, "ct_sweep_svg": svg}


def bundled_case_paths() -> list[Path]:
    """The eight shipped case files, in order."""
    return sorted(CASES_DIR.glob("w*.cfg"))
