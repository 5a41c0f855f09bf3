"""Propwash-modified lifting-line solver.

Circulation is expanded in a Fourier sine series over the spanwise angle and
matched to the sectional lift at cosine-spaced collocation stations. The
propeller slipstream enters the local incidence (swirl), the local stream
magnitude in the circulation match, and the dynamic pressure of the profile
drag integral; the induced-downwash kernel is the classical one, so with a
linear (best-linear-fit) lift model the system stays linear and is solved
directly in the least-squares sense.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SolverError, ValidationError
from .fmt import fnum
from .polar import AerofoilPolar, cd_of_cl
from .slipstream import SlipstreamProfile, sample_slipstream


@dataclass(frozen=True)
class FlightCondition:
    v_inf: float  # m/s
    rho: float  # kg/m^3
    alpha_geo: float  # radians; operating angle used by the solver
    reynolds_ref: float = 0.0  # metadata

    def __post_init__(self):
        if not self.v_inf > 0.0:
            raise ValidationError("free-stream speed must be positive")
        if not self.rho > 0.0:
            raise ValidationError("density must be positive")


@dataclass(frozen=True)
class LLTSettings:
    n_collocation: int = 320
    n_modes: int = 48

    def __post_init__(self):
        if self.n_modes > self.n_collocation:
            raise ValidationError("n_modes must not exceed n_collocation")
        if self.n_modes < 1:
            raise ValidationError("need at least one Fourier mode")


@dataclass(frozen=True)
class LLTSolution:
    """Spanwise distributions and integral coefficients of one solve."""

    theta: np.ndarray  # collocation angles in (0, pi)
    y: np.ndarray  # m, left tip to right tip
    A_n: np.ndarray  # Fourier coefficients, modes 1..N
    gamma: np.ndarray  # circulation, m^2/s
    alpha_eff: np.ndarray
    alpha_downwash: np.ndarray
    alpha_prop: np.ndarray
    cl_span: np.ndarray
    cd_span: np.ndarray
    chord_span: np.ndarray
    twist_span: np.ndarray
    v_local: np.ndarray  # |local stream|, m/s
    CL: float
    CDi: float
    Cf: float
    CD: float
    endurance: float  # CL/CD
    residual: float  # rms circulation-match mismatch, units of A_n
    n_below_fit_window: int
    cl_tip: tuple[float, float]
    v_tip: tuple[float, float]
    chord_tip: tuple[float, float]


class _Workspace:
    """Environment-fixed precomputation shared across repeated solves."""

    def __init__(self, semi_span, polar, slip, cond, settings):
        if polar.blf is None:
            raise ValidationError("polar has no BLF; the solver uses the linear lift model")
        if slip is not None:
            lo, hi = slip.extent()
            if lo < -semi_span - 1e-12 or hi > semi_span + 1e-12:
                raise ValidationError(
                    f"slipstream extent [{lo:.3f}, {hi:.3f}] m exceeds the wing span "
                    f"(semi-span {semi_span} m)"
                )
        self.semi_span = semi_span
        self.polar = polar
        self.slip = slip
        self.cond = cond
        self.settings = settings

        K, N = settings.n_collocation, settings.n_modes
        self.theta = np.pi * (np.arange(K) + 0.5) / K
        self.y = -semi_span * np.cos(self.theta)
        self.t = np.minimum(np.abs(self.y) / semi_span, 1.0)
        self.modes = np.arange(1, N + 1)
        self.sin_nt = np.sin(self.theta[:, None] * self.modes[None, :])  # (K, N)
        self.kernel = self.sin_nt * (self.modes[None, :] / np.sin(self.theta)[:, None])
        # tip limits of sin(n theta)/sin(theta): n at theta=0, n(-1)^(n+1) at pi
        self.tip_rows = (
            self.modes.astype(float) * self.modes,
            self.modes.astype(float) * self.modes * (-1.0) ** (self.modes + 1),
        )
        if slip is not None:
            self.u, self.w = sample_slipstream(slip, self.y)
            self.u_tip, self.w_tip = sample_slipstream(slip, np.array([-semi_span, semi_span]))
        else:
            self.u = np.zeros(K)
            self.w = np.zeros(K)
            self.u_tip = np.zeros(2)
            self.w_tip = np.zeros(2)
        self.v_local = np.hypot(cond.v_inf + self.u, self.w)
        self.alpha_prop = np.arctan2(self.w, cond.v_inf + self.u)
        self.v_tip_local = np.hypot(cond.v_inf + self.u_tip, self.w_tip)
        self.alpha_prop_tip = np.arctan2(self.w_tip, cond.v_inf + self.u_tip)
        self.span = 2.0 * semi_span
        # trapezoid weights over [-s, nodes, +s]: w_full includes the tips
        y_q = np.concatenate([[-semi_span], self.y, [semi_span]])
        w_full = np.zeros(K + 2)
        w_full[1:-1] = 0.5 * (y_q[2:] - y_q[:-2])
        w_full[0] = 0.5 * (y_q[1] - y_q[0])
        w_full[-1] = 0.5 * (y_q[-1] - y_q[-2])
        self.quad_w_full = w_full
        self.quad_w_inner = w_full[1:-1]
        self.du = self.v_local - cond.v_inf

    def solve(self, chord_at, twist_at, alpha_geo, area) -> LLTSolution:
        chord = chord_at(self.t)
        twist = twist_at(self.t)
        return self.solve_arrays(
            chord, twist, float(chord_at(1.0)), float(twist_at(1.0)), alpha_geo, area
        )

    def solve_arrays(self, chord, twist, chord_tip, twist_tip, alpha_geo, area) -> LLTSolution:
        cond = self.cond
        blf = self.polar.blf
        c_norm = 2.0 * self.span * cond.v_inf  # Gamma = c_norm * sum A_n sin(n theta)
        mu = (0.5 * blf.a0) * self.v_local * chord
        M = c_norm * self.sin_nt + mu[:, None] * self.kernel
        rhs = mu * (alpha_geo + twist - self.alpha_prop - blf.alpha0)
        try:
            A = np.linalg.solve(M.T @ M, M.T @ rhs)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular collocation system: {exc}") from None
        residual = float(np.linalg.norm(M @ A - rhs) / (c_norm * np.sqrt(len(rhs))))

        gamma = c_norm * (self.sin_nt @ A)
        alpha_dw = self.kernel @ A
        alpha_eff = (alpha_geo - blf.alpha0) + twist - self.alpha_prop - alpha_dw
        cl = blf.a0 * alpha_eff
        alpha_eff = alpha_eff + blf.alpha0
        cd = cd_of_cl(self.polar, cl)

        aspect_ratio = self.span**2 / area
        CL = float(np.pi * aspect_ratio * A[0])
        if self.slip is not None:
            # extra lift carried by the higher local stream inside the slipstream
            CL += 2.0 * float(self.quad_w_inner @ (self.du * gamma)) / (cond.v_inf**2 * area)
        CDi = float(np.pi * aspect_ratio * np.sum(self.modes * A**2))

        cl_tip = []
        for side in (0, 1):
            a_dw_tip = float(self.tip_rows[side] @ A)
            cl_tip.append(
                float(blf.cl(alpha_geo + twist_tip - self.alpha_prop_tip[side] - a_dw_tip))
            )
        cd_tip = cd_of_cl(self.polar, np.array(cl_tip))
        integrand = self.v_local**2 * cd * chord
        Cf = (
            float(self.quad_w_inner @ integrand)
            + self.quad_w_full[0] * self.v_tip_local[0] ** 2 * cd_tip[0] * chord_tip
            + self.quad_w_full[-1] * self.v_tip_local[1] ** 2 * cd_tip[1] * chord_tip
        ) / (cond.v_inf**2 * area)
        CD = CDi + Cf
        return LLTSolution(
            theta=self.theta,
            y=self.y,
            A_n=A,
            gamma=gamma,
            alpha_eff=alpha_eff,
            alpha_downwash=alpha_dw,
            alpha_prop=self.alpha_prop,
            cl_span=cl,
            cd_span=cd,
            chord_span=chord,
            twist_span=twist,
            v_local=self.v_local,
            CL=CL,
            CDi=CDi,
            Cf=Cf,
            CD=CD,
            endurance=CL / CD if CD != 0.0 else 0.0,
            residual=residual,
            n_below_fit_window=int(np.sum(np.degrees(alpha_eff) < blf.fit_window_deg[0])),
            cl_tip=(cl_tip[0], cl_tip[1]),
            v_tip=(float(self.v_tip_local[0]), float(self.v_tip_local[1])),
            chord_tip=(chord_tip, chord_tip),
        )


def solve(
    planform,
    polar: AerofoilPolar,
    slip: SlipstreamProfile | None,
    cond: FlightCondition,
    settings: LLTSettings = LLTSettings(),
) -> LLTSolution:
    """Solve the lifting-line problem for one planform and flight condition.

    The operating angle of attack is ``cond.alpha_geo``. Sections whose
    effective incidence falls below the BLF window edge are counted and
    flagged with a warning (tip-stall risk on the pressure side), not
    treated as an error.
    """
    ws = _Workspace(planform.semi_span, polar, slip, cond, settings)
    sol = ws.solve(planform.chord_at, planform.twist_at, cond.alpha_geo, planform.area())
    if sol.n_below_fit_window > 0:
        warnings.warn(
            f"{sol.n_below_fit_window} stations below the BLF window "
            f"(alpha_eff < {polar.blf.fit_window_deg[0]} deg): possible pressure-side stall",
            stacklevel=2,
        )
    return sol


def _profile_drag(sol, semi_span, area, polar, cond) -> float:
    cd_tip = cd_of_cl(polar, np.array(sol.cl_tip))
    y_q = np.concatenate([[-semi_span], sol.y, [semi_span]])
    integrand = np.concatenate(
        [
            [sol.v_tip[0] ** 2 * cd_tip[0] * sol.chord_tip[0]],
            sol.v_local**2 * sol.cd_span * sol.chord_span,
            [sol.v_tip[1] ** 2 * cd_tip[1] * sol.chord_tip[1]],
        ]
    )
    return float(np.trapz(integrand, y_q) / (cond.v_inf**2 * area))


def profile_drag(sol: LLTSolution, planform, polar: AerofoilPolar, cond: FlightCondition) -> float:
    """Cf: sectional drag integrated with local dynamic pressure and chord."""
    return _profile_drag(sol, planform.semi_span, planform.area(), polar, cond)


def induced_drag(sol: LLTSolution, planform, cond: FlightCondition) -> float:
    """CDi from the circulation and its self-induced downwash.

    The spanwise integral of gamma times the self-induced downwash reduces
    exactly to pi AR sum(n A_n^2) for the Fourier series, which this uses
    (the trapezoidal quadrature of the same integrand agrees to quadrature
    accuracy; see tests).
    """
    modes = np.arange(1, sol.A_n.size + 1)
    return float(np.pi * planform.aspect_ratio() * np.sum(modes * sol.A_n**2))


def wing_polar_sweep(planform, polar, slip, cond, alpha_range, settings=LLTSettings()):
    """Solve over a grid of operating angles; rows of (alpha, CL, CDi, Cf, CD).

    ``alpha_range`` is an iterable of angles in radians; errors from an
    individual solve propagate annotated with the failing angle.
    """
    alphas = np.atleast_1d(np.asarray(alpha_range, dtype=float))
    if alphas.size == 0:
        raise ValidationError("empty alpha range")
    ws = _Workspace(planform.semi_span, polar, slip, cond, settings)
    area = planform.area()
    rows = np.zeros((alphas.size, 5))
    for i, a in enumerate(alphas):
        try:
            sol = ws.solve(planform.chord_at, planform.twist_at, a, area)
        except Exception as exc:
            raise SolverError(f"sweep failed at alpha={np.degrees(a):.3f} deg: {exc}") from exc
        rows[i] = (a, sol.CL, sol.CDi, sol.Cf, sol.CD)
    return rows


def alpha_for_cl(planform, polar, slip, cond, cl_target, settings=LLTSettings()):
    """Operating angle at which the wing produces ``cl_target``.

    With the linear lift model CL is exactly affine in the angle of attack,
    so two solves determine it.
    """
    ws = _Workspace(planform.semi_span, polar, slip, cond, settings)
    area = planform.area()
    a0, a1 = 0.0, np.radians(2.0)
    cl0 = ws.solve(planform.chord_at, planform.twist_at, a0, area).CL
    cl1 = ws.solve(planform.chord_at, planform.twist_at, a1, area).CL
    slope = (cl1 - cl0) / (a1 - a0)
    if abs(slope) < 1e-12:
        raise SolverError("lift curve has zero slope; cannot trim to target CL")
    return a0 + (cl_target - cl0) / slope


def export_spanwise_csv(path, sol: LLTSolution) -> None:
    """Write the spanwise solution: y, chord, twist, alpha_eff, cl, cd, gamma."""
    lines = ["y_m,chord_m,twist_deg,alpha_eff_deg,cl,cd,gamma_m2ps"]
    for i in range(sol.y.size):
        lines.append(
            f"{fnum(sol.y[i])},{fnum(sol.chord_span[i])},{fnum(np.degrees(sol.twist_span[i]))},"
            f"{fnum(np.degrees(sol.alpha_eff[i]))},{fnum(sol.cl_span[i])},"
            f"{fnum(sol.cd_span[i])},{fnum(sol.gamma[i])}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def export_sweep_csv(path, rows) -> None:
    """Write a polar sweep: alpha_deg, CL, CDi, Cf, CD."""
    lines = ["alpha_deg,CL,CDi,Cf,CD"]
    for a, cl, cdi, cf, cd in rows:
        lines.append(f"{fnum(np.degrees(a))},{fnum(cl)},{fnum(cdi)},{fnum(cf)},{fnum(cd)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
