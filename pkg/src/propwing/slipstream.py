"""Propeller slipstream at the wing plane, from files or a blade-element model.

The blade-element-momentum (BEM) solver stands in for a field CFD solution
of the actuator disc: it exposes the same axial/downwash interface at the
wing quarter-chord plane, with a Prandtl tip-loss factor and momentum-theory
development of the disc induction downstream.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ParseError, ValidationError
from .fmt import fnum
from .polar import AerofoilPolar, cd_of_cl, cl_of_alpha

SOUND_SPEED = 340.0  # m/s, tip-Mach warning threshold basis
TIP_MACH_WARN = 0.6

BEM_RELAXATION = 0.3
BEM_TOLERANCE = 1e-8
BEM_MAX_ITERS = 500
_F_FLOOR = 1e-3  # tip-loss factor floor; keeps the momentum balance finite at the tip


@dataclass(frozen=True)
class SlipstreamProfile:
    """Axial and downwash velocity increments along the wing span.

    ``w_down`` is positive downward. Outside the station extent both
    components are identically zero.
    """

    y_stations: np.ndarray  # m, wing frame (root = 0), strictly increasing
    u_axial: np.ndarray  # m/s added to the free stream
    w_down: np.ndarray  # m/s, positive down
    station_x: float = 1.0  # sampling plane, propeller diameters downstream

    def __post_init__(self):
        object.__setattr__(self, "y_stations", np.asarray(self.y_stations, dtype=float))
        object.__setattr__(self, "u_axial", np.asarray(self.u_axial, dtype=float))
        object.__setattr__(self, "w_down", np.asarray(self.w_down, dtype=float))
        n = self.y_stations.size
        if self.u_axial.size != n or self.w_down.size != n:
            raise ValidationError("slipstream arrays must have equal length")
        if n < 2:
            raise ValidationError("slipstream needs at least 2 stations for interpolation")
        if np.any(np.diff(self.y_stations) <= 0.0):
            raise ValidationError("slipstream y stations must be strictly increasing")

    def extent(self) -> tuple[float, float]:
        """Span range with non-zero velocities (full extent if all zero)."""
        live = (np.abs(self.u_axial) > 0.0) | (np.abs(self.w_down) > 0.0)
        if not np.any(live):
            return (0.0, 0.0)
        y = self.y_stations[live]
        return (float(y.min()), float(y.max()))


def sample_slipstream(profile: SlipstreamProfile, y):
    """(u, w) at spanwise position(s) ``y``: linear inside, exact zero outside."""
    yq = np.asarray(y, dtype=float)
    u = np.interp(yq, profile.y_stations, profile.u_axial, left=0.0, right=0.0)
    w = np.interp(yq, profile.y_stations, profile.w_down, left=0.0, right=0.0)
    if np.isscalar(y):
        return float(u), float(w)
    return u, w


def load_slipstream(source) -> SlipstreamProfile:
    """Load a `y_m,u_axial_mps,w_down_mps` CSV (``#`` comments allowed)."""
    lines = _read_lines(source)
    rows = []
    header_seen = False
    station_x = 1.0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if "station_x_diameters=" in line:
                station_x = float(line.split("=", 1)[1])
            continue
        if not header_seen:
            cols = [c.strip() for c in line.split(",")]
            if cols != ["y_m", "u_axial_mps", "w_down_mps"]:
                raise ParseError(f"expected header 'y_m,u_axial_mps,w_down_mps', got {line!r}", lineno)
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 3 or any(p.strip() == "" for p in parts):
            raise ParseError(f"expected 3 values, got {line!r}", lineno)
        try:
            rows.append(tuple(float(p) for p in parts))
        except ValueError:
            raise ParseError(f"non-numeric value in {line!r}", lineno) from None
    if not header_seen:
        raise ParseError("missing 'y_m,u_axial_mps,w_down_mps' header")
    if len(rows) < 2:
        raise ValidationError(f"slipstream needs at least 2 stations, got {len(rows)}")
    data = np.array(rows, dtype=float)
    return SlipstreamProfile(
        y_stations=data[:, 0], u_axial=data[:, 1], w_down=data[:, 2], station_x=station_x
    )


def save_slipstream(path, profile: SlipstreamProfile) -> None:
    """Write a profile in the load_slipstream format (round-trips exactly)."""
    lines = [
        f"# station_x_diameters={fnum(profile.station_x)}",
        "y_m,u_axial_mps,w_down_mps",
    ]
    for y, u, w in zip(profile.y_stations, profile.u_axial, profile.w_down):
        lines.append(f"{fnum(y)},{fnum(u)},{fnum(w)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_lines(source) -> list[str]:
    if hasattr(source, "read"):
        payload = source.read()
        if isinstance(payload, bytes):
            payload = payload.decode("utf-8")
        return payload.splitlines()
    with io.open(source, "r", encoding="utf-8") as fh:
        return fh.read().splitlines()


@dataclass(frozen=True)
class PropellerGeometry:
    """Blade geometry with per-station (or shared) section polars."""

    diameter: float
    hub_radius: float
    n_blades: int
    r_stations: np.ndarray  # m, strictly increasing in (hub_radius, diameter/2]
    chord_r: np.ndarray  # m
    twist_r: np.ndarray  # radians
    section_polar: AerofoilPolar | tuple[AerofoilPolar, ...] = None

    def __post_init__(self):
        object.__setattr__(self, "r_stations", np.asarray(self.r_stations, dtype=float))
        object.__setattr__(self, "chord_r", np.asarray(self.chord_r, dtype=float))
        object.__setattr__(self, "twist_r", np.asarray(self.twist_r, dtype=float))
        if not 0.0 <= self.hub_radius < self.diameter / 2.0:
            raise ValidationError("hub_radius must lie in [0, diameter/2)")
        r = self.r_stations
        if r.size != self.chord_r.size or r.size != self.twist_r.size:
            raise ValidationError("r, chord, twist arrays must have equal length")
        if np.any(np.diff(r) <= 0.0):
            raise ValidationError("r stations must be strictly increasing")
        if r[0] <= self.hub_radius or r[-1] > self.diameter / 2.0 + 1e-12:
            raise ValidationError("r stations must lie within (hub_radius, diameter/2]")
        if np.any(self.chord_r <= 0.0):
            raise ValidationError("blade chord must be positive")
        if self.n_blades < 1:
            raise ValidationError("need at least one blade")

    def polar_at(self, i: int) -> AerofoilPolar:
        if isinstance(self.section_polar, tuple):
            return self.section_polar[i]
        return self.section_polar


@dataclass(frozen=True)
class PropOperatingPoint:
    v_inf: float  # m/s
    n_rps: float  # revolutions per second
    rho: float  # kg/m^3

    def __post_init__(self):
        if not self.n_rps > 0.0:
            raise ValidationError("rotation rate must be positive")
        if not self.rho > 0.0:
            raise ValidationError("density must be positive")
        if self.v_inf < 0.0:
            raise ValidationError("free-stream speed must be non-negative")


def advance_ratio(op: PropOperatingPoint, geom: PropellerGeometry) -> float:
    """J = V_inf / (n D)."""
    return op.v_inf / (op.n_rps * geom.diameter)


def thrust_coefficient(thrust: float, op: PropOperatingPoint, geom: PropellerGeometry) -> float:
    """CT = T / (rho n^2 D^4)."""
    return thrust / (op.rho * op.n_rps**2 * geom.diameter**4)


@dataclass(frozen=True)
class BemSolution:
    """Converged blade-element-momentum solution on the geometry's stations."""

    thrust: float  # N
    torque: float  # N*m
    a_axial: np.ndarray
    a_tangential: np.ndarray
    r_stations: np.ndarray
    alpha_r: np.ndarray  # section angle of attack, radians
    iterations: int


def run_bem(geom: PropellerGeometry, op: PropOperatingPoint) -> BemSolution:
    """Classical BEM with Prandtl tip loss and relaxed fixed-point iteration.

    Raises ConvergenceError if any station fails to converge within the
    iteration budget or if the converged induction factors leave the
    physical actuator-disc range [-0.5, 1.0).
    """
    if geom.r_stations.size < 8:
        raise ValidationError("BEM needs at least 8 radial stations")
    if geom.section_polar is None:
        raise ValidationError("BEM needs a section polar")
    _warn_tip_mach(geom, op)

    omega = 2.0 * np.pi * op.n_rps
    radius = geom.diameter / 2.0
    n_st = geom.r_stations.size
    a = np.zeros(n_st)
    ap = np.zeros(n_st)
    alpha_out = np.zeros(n_st)
    dT = np.zeros(n_st)
    dQ = np.zeros(n_st)
    iters_max = 0

    for i in range(n_st):
        r = geom.r_stations[i]
        c = geom.chord_r[i]
        beta = geom.twist_r[i]
        polar = geom.polar_at(i)
        sigma = geom.n_blades * c / (2.0 * np.pi * r)
        ai, api = 0.0, 0.0
        residual = np.inf
        converged = False
        for it in range(BEM_MAX_ITERS):
            v_ax = op.v_inf * (1.0 + ai)
            v_tan = omega * r * (1.0 - api)
            phi = np.arctan2(v_ax, v_tan)
            alpha = beta - phi
            cl = cl_of_alpha(polar, alpha, mode="tabulated")
            cd = cd_of_cl(polar, cl)
            cn = cl * np.cos(phi) - cd * np.sin(phi)
            ct = cl * np.sin(phi) + cd * np.cos(phi)
            f_tip = (geom.n_blades / 2.0) * (radius - r) / max(r * abs(np.sin(phi)), 1e-12)
            F = max(_F_FLOOR, (2.0 / np.pi) * np.arccos(np.exp(-max(f_tip, 0.0))))
            s2 = max(np.sin(phi) ** 2, 1e-12)
            sc = np.sin(phi) * np.cos(phi)
            k_a = sigma * cn / (4.0 * F * s2)
            k_t = sigma * ct / (4.0 * F * sc) if abs(sc) > 1e-12 else 0.0
            a_new = k_a / (1.0 - k_a) if k_a < 0.9 else 9.0  # diverging; let range check fail
            ap_new = k_t / (1.0 + k_t)
            residual = max(abs(a_new - ai), abs(ap_new - api))
            if residual < BEM_TOLERANCE:
                ai, api = a_new, ap_new
                alpha_out[i] = alpha
                converged = True
                iters_max = max(iters_max, it + 1)
                break
            ai += BEM_RELAXATION * (a_new - ai)
            api += BEM_RELAXATION * (ap_new - api)
        if not converged:
            raise ConvergenceError(
                f"BEM did not converge at r={r:.4f} m after {BEM_MAX_ITERS} iterations",
                residual=float(residual),
            )
        if not (-0.5 <= ai < 1.0) or not (-0.5 <= api < 1.0):
            raise ConvergenceError(
                f"BEM induction outside physical range at r={r:.4f} m: a={ai:.3f}, a'={api:.3f}",
                residual=float(residual),
            )
        a[i], ap[i] = ai, api
        w2 = (op.v_inf * (1.0 + ai)) ** 2 + (omega * r * (1.0 - api)) ** 2
        phi = np.arctan2(op.v_inf * (1.0 + ai), omega * r * (1.0 - api))
        cl = cl_of_alpha(polar, beta - phi, mode="tabulated")
        cd = cd_of_cl(polar, cl)
        cn = cl * np.cos(phi) - cd * np.sin(phi)
        ctg = cl * np.sin(phi) + cd * np.cos(phi)
        dT[i] = 0.5 * op.rho * w2 * geom.n_blades * c * cn
        dQ[i] = 0.5 * op.rho * w2 * geom.n_blades * c * ctg * r

    thrust = float(np.trapz(dT, geom.r_stations))
    torque = float(np.trapz(dQ, geom.r_stations))
    return BemSolution(
        thrust=thrust,
        torque=torque,
        a_axial=a,
        a_tangential=ap,
        r_stations=geom.r_stations.copy(),
        alpha_r=alpha_out,
        iterations=iters_max,
    )


def _warn_tip_mach(geom: PropellerGeometry, op: PropOperatingPoint) -> None:
    tip_speed = np.hypot(op.v_inf, 2.0 * np.pi * op.n_rps * geom.diameter / 2.0)
    mach = tip_speed / SOUND_SPEED
    if mach > TIP_MACH_WARN:
        warnings.warn(
            f"tip Mach {mach:.2f} exceeds {TIP_MACH_WARN}; incompressible model degrades",
            stacklevel=3,
        )


def development_factor(station_x: float) -> float:
    """Disc-induction growth with downstream distance (diameters).

    Momentum theory doubles the disc induction in the developed slipstream;
    the factor ramps linearly from 1 at the disc to 2 at one diameter.
    """
    return 1.0 + min(max(station_x, 0.0), 1.0)


def slipstream_from_bem(
    bem: BemSolution,
    geom: PropellerGeometry,
    op: PropOperatingPoint,
    prop_y_center: float,
    rotation_sense: str = "up_inboard",
    station_x: float = 1.0,
    semi_span: float | None = None,
) -> SlipstreamProfile:
    """Map disc induction to the wing plane along the horizontal disc diameter.

    Axial increment is ``f_dev * a * V_inf``; the swirl velocity ``a' omega r``
    is vertical where the wing crosses the disc, giving upwash on one side of
    the propeller axis and downwash on the other according to
    ``rotation_sense``. Slipstream contraction is neglected.
    """
    if rotation_sense not in ("up_inboard", "up_outboard"):
        raise ValidationError(f"unknown rotation_sense {rotation_sense!r}")
    radius = geom.diameter / 2.0
    if semi_span is not None:
        if prop_y_center - radius < -semi_span or prop_y_center + radius > semi_span:
            raise ValidationError(
                f"disc projection [{prop_y_center - radius:.3f}, {prop_y_center + radius:.3f}] m "
                f"extends outside the wing span (semi-span {semi_span} m)"
            )
    f_dev = development_factor(station_x)
    omega = 2.0 * np.pi * op.n_rps
    r = bem.r_stations
    u_r = f_dev * bem.a_axial * op.v_inf
    w_r = f_dev * bem.a_tangential * omega * r
    # stations mirrored about the propeller axis; swirl flips sign across it
    outboard_sign = 1.0 if prop_y_center >= 0.0 else -1.0
    if rotation_sense == "up_outboard":
        outboard_sign = -outboard_sign
    y = np.concatenate([prop_y_center - r[::-1], [prop_y_center], prop_y_center + r])
    u = np.concatenate([u_r[::-1], [u_r[0]], u_r])
    w = np.concatenate([-outboard_sign * w_r[::-1], [0.0], outboard_sign * w_r])
    return SlipstreamProfile(y_stations=y, u_axial=u, w_down=w, station_x=station_x)


def load_propeller(source, section_polar: AerofoilPolar) -> PropellerGeometry:
    """Load blade geometry CSV: `r_m,chord_m,twist_deg` plus metadata lines
    `# diameter_m=`, `# hub_radius_m=`, `# n_blades=`."""
    lines = _read_lines(source)
    meta = {}
    rows = []
    header_seen = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if "=" in body:
                key, val = body.split("=", 1)
                meta[key.strip()] = val.strip()
            continue
        if not header_seen:
            cols = [c.strip() for c in line.split(",")]
            if cols != ["r_m", "chord_m", "twist_deg"]:
                raise ParseError(f"expected header 'r_m,chord_m,twist_deg', got {line!r}", lineno)
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"expected 3 values, got {line!r}", lineno)
        try:
            rows.append(tuple(float(p) for p in parts))
        except ValueError:
            raise ParseError(f"non-numeric value in {line!r}", lineno) from None
    for key in ("diameter_m", "hub_radius_m", "n_blades"):
        if key not in meta:
            raise ValidationError(f"propeller file missing metadata line '# {key}='")
    data = np.array(rows, dtype=float)
    if data.size == 0:
        raise ValidationError("propeller file has no blade stations")
    return PropellerGeometry(
        diameter=float(meta["diameter_m"]),
        hub_radius=float(meta["hub_radius_m"]),
        n_blades=int(meta["n_blades"]),
        r_stations=data[:, 0],
        chord_r=data[:, 1],
        twist_r=np.radians(data[:, 2]),
        section_polar=section_polar,
    )
