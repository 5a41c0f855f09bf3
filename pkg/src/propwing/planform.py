"""Wing geometry: cubic-Bezier chord/twist distributions over the semi-span.

The wing is symmetric about the root; chord and twist are each described by
four control values over the normalized semi-span coordinate t in [0, 1].
The mean of the four control values times the span gives the exact area,
which the optimizer exploits as a linear equality constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .fmt import fnum

_BINOM3 = np.array([1.0, 3.0, 3.0, 1.0])


def bezier3(ctrl, t):
    """Cubic Bezier scalar evaluation B(t) = sum C(3,k) t^k (1-t)^(3-k) ctrl[k]."""
    t = np.asarray(t, dtype=float)
    c = np.asarray(ctrl, dtype=float)
    k = np.arange(4)
    basis = _BINOM3 * t[..., None] ** k * (1.0 - t[..., None]) ** (3 - k)
    return basis @ c


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise ValidationError("normalized span coordinate t must lie in [0, 1]")
    return t


@dataclass(frozen=True)
class WingPlanform:
    """Symmetric wing with Bezier chord (m) and twist (rad) distributions.

    ``alpha_geo`` is the wing's design mounting angle; the solver takes the
    operating angle from the flight condition, so this field is metadata,
    as is ``sweep_le`` (lifting-line aerodynamics assume no sweep).
    """

    semi_span: float
    chord_ctrl: tuple[float, float, float, float]
    twist_ctrl: tuple[float, float, float, float]
    sweep_le: float = 0.0
    alpha_geo: float = 0.0

    def __post_init__(self):
        if not self.semi_span > 0.0:
            raise ValidationError("semi_span must be positive")
        if len(self.chord_ctrl) != 4 or len(self.twist_ctrl) != 4:
            raise ValidationError("chord_ctrl and twist_ctrl need exactly 4 control values")
        # positivity: Bezier hull bound, then a 64-point sample as a backstop
        if min(self.chord_ctrl) <= 0.0:
            c = self.chord_at(np.linspace(0.0, 1.0, 64))
            if np.any(c <= 0.0):
                raise ValidationError("chord distribution must be positive over the semi-span")

    def chord_at(self, t):
        return bezier3(self.chord_ctrl, _check_t(t))

    def twist_at(self, t):
        return bezier3(self.twist_ctrl, _check_t(t))

    def area(self) -> float:
        # exact for a cubic Bezier: integral over [0,1] is the control mean
        return 2.0 * self.semi_span * float(np.mean(self.chord_ctrl))

    def aspect_ratio(self) -> float:
        return (2.0 * self.semi_span) ** 2 / self.area()

    def with_controls(self, chord_ctrl=None, twist_ctrl=None) -> "WingPlanform":
        return replace(
            self,
            chord_ctrl=tuple(chord_ctrl) if chord_ctrl is not None else self.chord_ctrl,
            twist_ctrl=tuple(twist_ctrl) if twist_ctrl is not None else self.twist_ctrl,
        )


@dataclass(frozen=True)
class SampledPlanform:
    """Planform backed by sampled stations (piecewise-linear chord/twist).

    Provides the same evaluation interface as WingPlanform so a wing
    re-loaded from an exported CSV can be solved directly.
    """

    semi_span: float
    t_stations: np.ndarray
    chord: np.ndarray
    twist: np.ndarray
    alpha_geo: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "t_stations", np.asarray(self.t_stations, dtype=float))
        object.__setattr__(self, "chord", np.asarray(self.chord, dtype=float))
        object.__setattr__(self, "twist", np.asarray(self.twist, dtype=float))
        if np.any(np.diff(self.t_stations) <= 0.0):
            raise ValidationError("t stations must be strictly increasing")
        if np.any(self.chord <= 0.0):
            raise ValidationError("sampled chord must be positive")

    def chord_at(self, t):
        return np.interp(_check_t(t), self.t_stations, self.chord)

    def twist_at(self, t):
        return np.interp(_check_t(t), self.t_stations, self.twist)

    def area(self) -> float:
        return 2.0 * self.semi_span * float(np.trapz(self.chord, self.t_stations))

    def aspect_ratio(self) -> float:
        return (2.0 * self.semi_span) ** 2 / self.area()


@dataclass(frozen=True)
class GeometrySnapshot:
    """Sampled geometry with integral properties for export and reporting."""

    y: np.ndarray
    chord: np.ndarray
    twist: np.ndarray
    area: float
    aspect_ratio: float
    mac: float


def eval_chord(planform, t):
    """Chord (m) at normalized semi-span position t in [0, 1]."""
    return planform.chord_at(t)


def eval_twist(planform, t):
    """Twist (rad) at normalized semi-span position t in [0, 1]."""
    return planform.twist_at(t)


def wing_area(planform) -> float:
    """Wing reference area (m^2) for both semi-spans."""
    return planform.area()


def snapshot(planform, n_stations: int = 101) -> GeometrySnapshot:
    """Sample one semi-span at ``n_stations`` and compute integral properties."""
    t = np.linspace(0.0, 1.0, n_stations)
    chord = planform.chord_at(t)
    area = planform.area()
    # MAC = (2/S) * integral of c^2 over the semi-span; Gauss quadrature is
    # exact for the degree-6 integrand of a cubic Bezier chord.
    xg, wg = np.polynomial.legendre.leggauss(8)
    tg = 0.5 * (xg + 1.0)
    cg = planform.chord_at(tg)
    mac = (2.0 / area) * planform.semi_span * 0.5 * float(np.sum(wg * cg**2))
    return GeometrySnapshot(
        y=t * planform.semi_span,
        chord=chord,
        twist=planform.twist_at(t),
        area=area,
        aspect_ratio=planform.aspect_ratio(),
        mac=mac,
    )


def elevate_linear(v_root: float, v_tip: float) -> tuple[float, float, float, float]:
    """Degree-elevate a linear distribution to cubic Bezier control values."""
    return (
        v_root,
        v_root + (v_tip - v_root) / 3.0,
        v_root + 2.0 * (v_tip - v_root) / 3.0,
        v_tip,
    )


def control_wing(
    span: float,
    area: float,
    chord_root: float,
    chord_tip: float,
    washout: float = 0.0,
    alpha_geo: float = 0.0,
    sweep_le: float = 0.0,
    area_rtol: float = 1e-6,
) -> WingPlanform:
    """Build a trapezoidal control wing with linear washout.

    ``washout`` is the tip twist in radians (root twist is zero); the linear
    chord and twist laws are reproduced exactly by degree elevation.
    Raises ValidationError when the stated area is inconsistent with the
    trapezoid implied by the root/tip chords.
    """
    semi_span = span / 2.0
    trapezoid_area = span * 0.5 * (chord_root + chord_tip)
    if abs(trapezoid_area - area) > area_rtol * area:
        raise ValidationError(
            f"area {area} m^2 inconsistent with trapezoid of chords "
            f"({chord_root}, {chord_tip}) over span {span}: {trapezoid_area:.6g} m^2"
        )
    return WingPlanform(
        semi_span=semi_span,
        chord_ctrl=elevate_linear(chord_root, chord_tip),
        twist_ctrl=elevate_linear(0.0, washout),
        sweep_le=sweep_le,
        alpha_geo=alpha_geo,
    )


def export_planform_csv(path, planform, n_stations: int = 101) -> None:
    """Write `y_m,chord_m,twist_deg` stations plus area/AR metadata lines."""
    snap = snapshot(planform, n_stations)
    lines = [
        f"# area_m2={fnum(snap.area)}",
        f"# AR={fnum(snap.aspect_ratio)}",
        f"# semi_span_m={fnum(planform.semi_span)}",
        f"# alpha_geo_deg={fnum(np.degrees(planform.alpha_geo))}",
        "y_m,chord_m,twist_deg",
    ]
    for y, c, tw in zip(snap.y, snap.chord, np.degrees(snap.twist)):
        lines.append(f"{fnum(y)},{fnum(c)},{fnum(tw)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_planform_csv(path) -> SampledPlanform:
    """Re-load an exported planform as a sampled (piecewise-linear) wing."""
    semi_span = None
    alpha_geo = 0.0
    rows = []
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "semi_span_m=" in line:
                    semi_span = float(line.split("=", 1)[1])
                elif "alpha_geo_deg=" in line:
                    alpha_geo = np.radians(float(line.split("=", 1)[1]))
                continue
            if not header_seen:
                header_seen = True
                continue
            y, c, tw = (float(p) for p in line.split(","))
            rows.append((y, c, tw))
    if semi_span is None or not rows:
        raise ValidationError(f"planform CSV {path} is missing stations or metadata")
    data = np.array(rows, dtype=float)
    return SampledPlanform(
        semi_span=semi_span,
        t_stations=data[:, 0] / semi_span,
        chord=data[:, 1],
        twist=np.radians(data[:, 2]),
        alpha_geo=alpha_geo,
    )
