"""Regenerate the bundled propeller geometry and slipstream sample data.

Deterministic: running this twice produces byte-identical files. The
slipstream is produced by the package's own blade-element model, sampled one
diameter downstream, edge-tapered and resampled so the wing solver sees a
continuous profile.
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from propwing import llt, planform, polar, slipstream  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "src" / "propwing" / "data"

# wing/bundle operating point
V_INF = 15.0
RHO = 1.112  # ~1000 m ASL
PROP_RPM = 8000.0
PROP_Y_FRAC = 0.30
SEMI_SPAN = 0.80
MIX_WIDTH_U = 1.05  # Gaussian jet width at one diameter, in disc radii
MIX_WIDTH_W = 0.95
MIX_CUT = 2.1  # profile support, in disc radii


def write_prop_file(path, diameter, hub_radius, n_blades, r, chord, twist_deg, comment):
    lines = [
        f"# {comment}",
        f"# diameter_m={repr(float(diameter))}",
        f"# hub_radius_m={repr(float(hub_radius))}",
        f"# n_blades={n_blades}",
        "r_m,chord_m,twist_deg",
    ]
    for ri, ci, ti in zip(r, chord, twist_deg):
        lines.append(f"{repr(float(ri))},{repr(float(ci))},{repr(float(ti))}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def make_da4002_style():
    # 9-inch two-blade constant-chord prop; pitch reduced versus the
    # commercial 6.75-in value so classical momentum balance stays physical
    # down to J = 0.2 (see data/README.md)
    diameter = 0.2286
    radius = diameter / 2.0
    pitch = 0.085
    r = np.linspace(0.25 * radius, 0.95 * radius, 15)
    chord = np.full_like(r, 0.011)
    twist = np.degrees(np.arctan(pitch / (2.0 * np.pi * r)))
    write_prop_file(
        DATA / "prop_9in_sample.csv",
        diameter,
        0.125 * radius,
        2,
        r,
        chord,
        twist,
        "9x3.3-style two-blade sample propeller (constant chord, smooth twist)",
    )


def make_cruise_prop():
    # 13x8-style two-blade prop driving the bundled wing slipstream; sized so
    # the climb-power jet carries the momentum implied by the published
    # operating-point shift
    diameter = 0.33
    radius = diameter / 2.0
    pitch = 0.2032
    r = np.linspace(0.18 * radius, 0.93 * radius, 16)
    x = r / radius
    chord = 0.019 + 0.044 * x * (1.0 - x)  # peak ~0.030 m near mid-blade
    twist = np.degrees(np.arctan(pitch / (2.0 * np.pi * r)))
    write_prop_file(
        DATA / "prop_13x8_sample.csv",
        diameter,
        0.022,
        2,
        r,
        chord,
        twist,
        "13x8-style two-blade sample propeller",
    )


def make_slipstream(rpm=PROP_RPM, write=True):
    section = polar.load_polar(DATA / "section_lowre.csv", name="section_lowre", reynolds=5e4)
    geom = slipstream.load_propeller(DATA / "prop_13x8_sample.csv", section_polar=section)
    op = slipstream.PropOperatingPoint(v_inf=V_INF, n_rps=rpm / 60.0, rho=RHO)
    bem = slipstream.run_bem(geom, op)
    print(
        f"BEM rpm={rpm:.0f}: J={slipstream.advance_ratio(op, geom):.3f} thrust={bem.thrust:.3f} N "
        f"CT={slipstream.thrust_coefficient(bem.thrust, op, geom):.4f} "
        f"a=[{bem.a_axial.min():.3f},{bem.a_axial.max():.3f}] "
        f"a'=[{bem.a_tangential.min():.4f},{bem.a_tangential.max():.4f}]"
    )
    raw = slipstream.slipstream_from_bem(
        bem,
        geom,
        op,
        prop_y_center=PROP_Y_FRAC * SEMI_SPAN,
        rotation_sense="up_inboard",
        station_x=1.0,
        semi_span=SEMI_SPAN,
    )
    # Developed-jet model: a measured profile one diameter downstream is mixed
    # and continuous, so remap the raw disc induction onto smooth Gaussian
    # lobes, conserving the axial-velocity line integral. The smooth profile
    # keeps the Fourier solution resolution-independent.
    yc = PROP_Y_FRAC * SEMI_SPAN
    radius = geom.diameter / 2.0
    yf = np.linspace(yc - radius, yc + radius, 401)
    uf, wf = slipstream.sample_slipstream(raw, yf)

    sig_u = MIX_WIDTH_U * radius
    sig_w = MIX_WIDTH_W * radius
    cut = MIX_CUT * radius
    y = np.linspace(yc - cut, yc + cut, 81)
    d = y - yc
    g_u = np.exp(-((d / sig_u) ** 2)) - np.exp(-((cut / sig_u) ** 2))
    g_u = np.maximum(g_u, 0.0)
    # integral match on a dense grid of the same support
    dd = np.linspace(-cut, cut, 801)
    gg = np.maximum(np.exp(-((dd / sig_u) ** 2)) - np.exp(-((cut / sig_u) ** 2)), 0.0)
    U = np.trapz(uf, yf) / np.trapz(gg, dd)
    u = U * g_u

    g_w = np.sqrt(2.0) * (d / sig_w) * np.exp(0.5 - (d / sig_w) ** 2)
    g_w = g_w - np.linspace(g_w[0], g_w[-1], y.size)
    gg_w = np.sqrt(2.0) * (dd / sig_w) * np.exp(0.5 - (dd / sig_w) ** 2)
    W = np.trapz(np.abs(wf), yf) / np.trapz(np.abs(gg_w), dd)
    w = W * g_w

    u[0] = u[-1] = 0.0
    w[0] = w[-1] = 0.0
    u = np.round(u, 6)
    w = np.round(w, 6)
    profile = slipstream.SlipstreamProfile(
        y_stations=np.round(y, 6), u_axial=u, w_down=w, station_x=1.0
    )
    print(f"jet fit: U={U:.3f} m/s, W={W:.3f} m/s (peaks u={u.max():.2f}, w={w.max():.2f})")
    if write:
        slipstream.save_slipstream(DATA / "slipstream_1d.csv", profile)
        print(f"wrote {DATA / 'slipstream_1d.csv'}")
    return profile


def baseline_check(profile):
    foil = polar.load_polar(DATA / "e423_re300k.csv", name="e423", reynolds=3e5).fitted((-2.5, 10.0))
    wing = planform.control_wing(
        span=1.60, area=0.479, chord_root=0.3970257, chord_tip=0.2017243,
        washout=0.0, alpha_geo=0.0,
    )
    cond0 = llt.FlightCondition(v_inf=V_INF, rho=RHO, alpha_geo=0.0)
    a_off = llt.alpha_for_cl(wing, foil, None, cond0, 0.7)
    a_on = llt.alpha_for_cl(wing, foil, profile, cond0, 0.7)
    print(f"alpha(CL=0.7) off = {np.degrees(a_off):+.3f} deg, on = {np.degrees(a_on):+.3f} deg")
    for tag, slip, alpha in (("off", None, a_off), ("on", profile, a_on)):
        cond = llt.FlightCondition(v_inf=V_INF, rho=RHO, alpha_geo=alpha)
        sol = llt.solve(wing, foil, slip, cond)
        print(
            f"W0 {tag}: alpha={np.degrees(alpha):+.3f} CL={sol.CL:.4f} CDi={sol.CDi:.5f} "
            f"Cf={sol.Cf:.5f} CD={sol.CD:.5f} L/D={sol.endurance:.3f}"
        )
        if tag == "on":
            for res in ((160, 24), (320, 48)):
                s = llt.solve(wing, foil, slip, cond, llt.LLTSettings(*res))
                print(f"   res {res}: CL={s.CL:.6f} CDi={s.CDi:.6f} Cf={s.Cf:.6f}")


if __name__ == "__main__":
    make_da4002_style()
    make_cruise_prop()
    if len(sys.argv) > 1 and sys.argv[1] == "scan":
        for rpm in (7000.0, 7500.0, 8000.0, 8500.0, 9000.0):
            profile = make_slipstream(rpm, write=False)
            baseline_check(profile)
    else:
        profile = make_slipstream()
        baseline_check(profile)
