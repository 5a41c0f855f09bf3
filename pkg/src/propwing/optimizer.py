"""Constrained planform optimization over Bezier chord/twist control values.

A derivative-free coordinate pattern search runs inside an augmented
Lagrangian outer loop: area (and CL in fixed mode) are equalities, the CL
band gives two one-sided inequalities, and box bounds are enforced by
projection. Chord endpoints stay pinned to the control wing, leaving six
free values (two interior chord controls, four twist controls). The search
is fully deterministic: no randomness, fixed candidate ordering, earlier
candidate kept on cost ties.

Table-lookup section drag makes the objective only piecewise-smooth, which
is why the search is derivative-free rather than gradient-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError, ValidationError
from .fmt import fnum
from .llt import LLTSettings, LLTSolution, _Workspace
from .planform import WingPlanform

G_ACCEL = 9.80665  # m/s^2

COSTS = ("induced_drag", "total_drag", "endurance")


@dataclass(frozen=True)
class FixedCl:
    """Hold CL at ``target`` (equality constraint)."""

    target: float

    def __post_init__(self):
        if not self.target > 0.0:
            raise ValidationError("CL target must be positive")


@dataclass(frozen=True)
class BandCl:
    """Allow CL to float within ``center*(1 +/- frac)``."""

    center: float
    frac: float

    def __post_init__(self):
        if not self.center > 0.0:
            raise ValidationError("CL band center must be positive")
        # frac = 0 degenerates to the fixed-CL equality and is allowed
        if not 0.0 <= self.frac <= 1.0:
            raise ValidationError("CL band fraction must lie in [0, 1]")

    @property
    def lo(self) -> float:
        return self.center * (1.0 - self.frac)

    @property
    def hi(self) -> float:
        return self.center * (1.0 + self.frac)


@dataclass(frozen=True)
class OptimisationSpec:
    cost: str
    cl_mode: FixedCl | BandCl
    twist_bounds: tuple[float, float] = (np.radians(-8.0), np.radians(8.0))  # radians
    chord_bounds: tuple[float, float] = (0.05, 0.60)  # m
    fixed_area: float = 0.0
    fixed_root_tip: tuple[float, float] = (0.0, 0.0)
    max_outer_iters: int = 30
    tolerance: float = 1e-7

    def __post_init__(self):
        if self.cost not in COSTS:
            raise ValidationError(f"cost must be one of {COSTS}, got {self.cost!r}")
        if not self.twist_bounds[0] < self.twist_bounds[1]:
            raise ValidationError("twist bounds must be ordered")
        if not 0.0 < self.chord_bounds[0] < self.chord_bounds[1]:
            raise ValidationError("chord bounds must be ordered and positive")


@dataclass(frozen=True)
class Environment:
    """Everything the objective needs besides the planform."""

    polar: object
    slip: object | None
    cond: object
    settings: LLTSettings = LLTSettings()


@dataclass(frozen=True)
class DeltaMetrics:
    """Changes versus the control wing; positive numbers are favourable.

    Drag deltas are control minus optimized, lift/endurance deltas are
    optimized minus control. One drag count is 1e-4.
    """

    d_cdi_counts: float
    d_cdi_pct: float
    d_cf_counts: float
    d_cf_pct: float
    d_cd_counts: float
    d_cd_pct: float
    d_cl_counts: float
    d_cl_pct: float
    d_endurance_pct: float


@dataclass
class OptimisationResult:
    planform_opt: WingPlanform
    sol_opt: LLTSolution
    control_sol: LLTSolution
    deltas: DeltaMetrics
    history: list[dict] = field(default_factory=list)
    converged: bool = True
    n_evals: int = 0


@dataclass(frozen=True)
class BatterySpec:
    e_star: float  # J/kg
    eta_total: float
    m_battery: float  # kg
    m_total: float  # kg

    def __post_init__(self):
        if not (self.m_battery > 0.0 and self.m_total > 0.0):
            raise ValidationError("masses must be positive")
        if self.m_battery > self.m_total:
            raise ValidationError("battery mass cannot exceed total mass")
        if not 0.0 < self.eta_total <= 1.0:
            raise ValidationError("total efficiency must lie in (0, 1]")


def endurance_range(sol: LLTSolution, battery: BatterySpec) -> float:
    """Range (m) of a battery-powered aircraft: linear in the endurance factor."""
    return (
        battery.e_star
        * battery.eta_total
        * (1.0 / G_ACCEL)
        * sol.endurance
        * (battery.m_battery / battery.m_total)
    )


def delta_metrics(control_sol: LLTSolution, opt_sol: LLTSolution) -> DeltaMetrics:
    """Improvement metrics of ``opt_sol`` over ``control_sol``."""
    d_cdi = control_sol.CDi - opt_sol.CDi
    d_cf = control_sol.Cf - opt_sol.Cf
    d_cd = control_sol.CD - opt_sol.CD
    d_cl = opt_sol.CL - control_sol.CL
    d_end = opt_sol.endurance - control_sol.endurance
    return DeltaMetrics(
        d_cdi_counts=1e4 * d_cdi,
        d_cdi_pct=100.0 * d_cdi / control_sol.CDi,
        d_cf_counts=1e4 * d_cf,
        d_cf_pct=100.0 * d_cf / control_sol.Cf,
        d_cd_counts=1e4 * d_cd,
        d_cd_pct=100.0 * d_cd / control_sol.CD,
        d_cl_counts=1e4 * d_cl,
        d_cl_pct=100.0 * d_cl / control_sol.CL,
        d_endurance_pct=100.0 * d_end / control_sol.endurance,
    )


class _Objective:
    """Cached candidate evaluation on the six normalized control values."""

    def __init__(self, control: WingPlanform, spec: OptimisationSpec, env: Environment):
        self.control = control
        self.spec = spec
        self.ws = _Workspace(control.semi_span, env.polar, env.slip, env.cond, env.settings)
        self.area_target = spec.fixed_area
        self.alpha_geo = env.cond.alpha_geo
        c_lo, c_hi = spec.chord_bounds
        t_lo, t_hi = spec.twist_bounds
        self.lo = np.array([c_lo, c_lo, t_lo, t_lo, t_lo, t_lo])
        self.hi = np.array([c_hi, c_hi, t_hi, t_hi, t_hi, t_hi])
        self.cache: dict[bytes, tuple] = {}
        self.n_evals = 0
        # Bernstein design matrix on the fixed collocation grid: distributions
        # are a single small matmul per candidate
        t = self.ws.t[:, None]
        k = np.arange(4)
        comb = np.array([1.0, 3.0, 3.0, 1.0])
        self.bernstein = comb * t**k * (1.0 - t) ** (3 - k)

    def to_x(self, planform: WingPlanform) -> np.ndarray:
        raw = np.array(
            [planform.chord_ctrl[1], planform.chord_ctrl[2], *planform.twist_ctrl], dtype=float
        )
        return (raw - self.lo) / (self.hi - self.lo)

    def to_planform(self, x: np.ndarray) -> WingPlanform:
        raw = self.lo + np.asarray(x, dtype=float) * (self.hi - self.lo)
        root, tip = self.spec.fixed_root_tip
        return self.control.with_controls(
            chord_ctrl=(root, raw[0], raw[1], tip), twist_ctrl=tuple(raw[2:])
        )

    def evaluate(self, x: np.ndarray) -> tuple:
        """-> (raw cost, CL, CDi, Cf, CD, area) with memoization."""
        key = np.asarray(x, dtype=float).tobytes()
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        sol, area = self._solve(x)
        cost = _raw_cost(self.spec.cost, sol)
        out = (cost, sol.CL, sol.CDi, sol.Cf, sol.CD, area)
        self.cache[key] = out
        self.n_evals += 1
        return out

    def _solve(self, x) -> tuple[LLTSolution, float]:
        raw = self.lo + np.asarray(x, dtype=float) * (self.hi - self.lo)
        root, tip = self.spec.fixed_root_tip
        chord_ctrl = np.array([root, raw[0], raw[1], tip])
        twist_ctrl = raw[2:]
        area = 2.0 * self.control.semi_span * float(np.mean(chord_ctrl))
        try:
            sol = self.ws.solve_arrays(
                self.bernstein @ chord_ctrl,
                self.bernstein @ twist_ctrl,
                tip,
                float(twist_ctrl[3]),
                self.alpha_geo,
                area,
            )
        except Exception as exc:
            raise SolverError(f"objective evaluation failed at controls {x}: {exc}") from exc
        return sol, area

    def solution(self, x: np.ndarray) -> LLTSolution:
        return self._solve(x)[0]


def _raw_cost(cost: str, sol) -> float:
    if cost == "induced_drag":
        return sol.CDi
    if cost == "total_drag":
        return sol.CD
    return -sol.endurance


def _constraints(spec: OptimisationSpec, cl: float, area: float):
    """(equalities, inequalities<=0) in consistent, roughly unit scaling."""
    eq = [(area - spec.fixed_area) / spec.fixed_area]
    ineq = []
    mode = spec.cl_mode
    if isinstance(mode, FixedCl):
        eq.append(cl - mode.target)
    elif mode.frac == 0.0:
        eq.append(cl - mode.center)
    else:
        ineq.append(mode.lo - cl)
        ineq.append(cl - mode.hi)
    return np.array(eq), np.array(ineq)


def _violation(eq: np.ndarray, ineq: np.ndarray) -> float:
    v = float(np.max(np.abs(eq))) if eq.size else 0.0
    if ineq.size:
        v = max(v, float(np.max(np.maximum(ineq, 0.0))))
    return v


def _pattern_search(fun, x0, step0, step_tol, max_evals=40000):
    """Coordinate search with halving steps; deterministic best-of-poll moves.

    An accepted move is extended along its axis with doubling strides while
    it keeps improving, which walks constraint valleys far faster than
    repeated full polls. Ties keep the earlier candidate.
    """
    x = np.array(x0, dtype=float)
    fx = fun(x)
    step = step0
    evals = 0
    while step >= step_tol and evals < max_evals:
        best_f, best_x, best_dir = fx, None, None
        for i in range(x.size):
            for sgn in (1.0, -1.0):
                cand = x.copy()
                cand[i] = min(1.0, max(0.0, cand[i] + sgn * step))
                if cand[i] == x[i]:
                    continue
                fc = fun(cand)
                evals += 1
                if fc < best_f:  # strict improvement; ties keep the earlier point
                    best_f, best_x, best_dir = fc, cand, (i, sgn)
        if best_x is None:
            step *= 0.5
            continue
        x, fx = best_x, best_f
        i, sgn = best_dir
        stride = 2.0 * step
        while evals < max_evals:
            cand = x.copy()
            cand[i] = min(1.0, max(0.0, cand[i] + sgn * stride))
            if cand[i] == x[i]:
                break
            fc = fun(cand)
            evals += 1
            if fc < fx:
                x, fx = cand, fc
                stride *= 2.0
            else:
                break
    return x, fx, step


def optimize(control: WingPlanform, spec: OptimisationSpec, env: Environment) -> OptimisationResult:
    """Minimize the selected cost over the free control values.

    The control wing must already satisfy the geometric constraints (area and
    root/tip chords) and lie inside the box bounds; it is the first candidate,
    so a feasible control wing can never be beaten by a worse "optimum".
    """
    root, tip = spec.fixed_root_tip
    if abs(control.chord_ctrl[0] - root) > 1e-12 or abs(control.chord_ctrl[3] - tip) > 1e-12:
        raise ValidationError("control wing root/tip chords do not match the optimization spec")
    if abs(control.area() - spec.fixed_area) > 1e-9 * spec.fixed_area:
        raise ValidationError(
            f"control wing area {control.area():.6g} != fixed area {spec.fixed_area:.6g}"
        )
    obj = _Objective(control, spec, env)
    x0 = obj.to_x(control)
    if np.any(x0 < -1e-12) or np.any(x0 > 1.0 + 1e-12):
        raise ValidationError("control wing control values lie outside the box bounds")
    x0 = np.clip(x0, 0.0, 1.0)

    control_eval = obj.evaluate(x0)
    control_sol = obj.solution(x0)
    f_scale = max(abs(control_eval[0]), 1e-12)
    tol = spec.tolerance
    step_tol = max(tol, 1e-9)

    lam_eq = None
    lam_in = None
    mu = 10.0
    x = x0.copy()
    v_prev = np.inf
    history: list[dict] = []
    best = None  # (cost, x) among feasible candidates
    converged = False
    step_restart = 0.25

    def make_aug():
        def aug(xc):
            cost, cl, _, _, _, area = obj.evaluate(xc)
            eq, ineq = _constraints(spec, cl, area)
            val = cost / f_scale
            val += float(lam_eq @ eq) + 0.5 * mu * float(eq @ eq)
            if ineq.size:
                shifted = np.maximum(0.0, lam_in + mu * ineq)
                val += float(np.sum(shifted**2 - lam_in**2)) / (2.0 * mu)
            return val

        return aug

    for outer in range(spec.max_outer_iters):
        cost0, cl0, _, _, _, area0 = obj.evaluate(x)
        eq0, in0 = _constraints(spec, cl0, area0)
        if lam_eq is None:
            lam_eq = np.zeros(eq0.size)
            lam_in = np.zeros(in0.size)
        aug = make_aug()
        aug_start = aug(x)
        # inner precision tightens as the multipliers converge
        inner_tol = max(step_tol, 1e-2 * 10.0 ** (-outer))
        x, aug_end, final_step = _pattern_search(aug, x, step_restart, inner_tol)
        cost, cl, cdi, cf, cd, area = obj.evaluate(x)
        eq, ineq = _constraints(spec, cl, area)
        viol = _violation(eq, ineq)
        history.append(
            {
                "iter": outer,
                "cost": cost,
                "cl": cl,
                "cdi": cdi,
                "cf": cf,
                "cd": cd,
                "violation": viol,
                "aug_start": aug_start,
                "aug_end": aug_end,
                "mu": mu,
            }
        )
        if viol < tol and (best is None or cost < best[0]):
            best = (cost, x.copy())
        if viol < tol and final_step <= step_tol:
            converged = True
            break
        if viol <= max(0.5 * v_prev, tol):
            lam_eq = lam_eq + mu * eq
            if ineq.size:
                lam_in = np.maximum(0.0, lam_in + mu * ineq)
            v_prev = viol
        else:
            mu = min(mu * 4.0, 1e9)
        step_restart = float(min(0.02, max(64.0 * step_tol, final_step * 16.0)))

    x_final = best[1] if best is not None else x
    x_final = _feasibility_polish(obj, spec, x_final)
    cost_f, cl_f, _, _, _, area_f = obj.evaluate(x_final)
    eq_f, in_f = _constraints(spec, cl_f, area_f)
    feasible_final = _violation(eq_f, in_f) < tol

    # the control wing is always a candidate: never report a worse feasible cost
    eq_c, in_c = _constraints(spec, control_eval[1], control_eval[5])
    control_feasible = _violation(eq_c, in_c) < tol
    if control_feasible and (not feasible_final or control_eval[0] < cost_f - 1e-12):
        x_final, cost_f = x0, control_eval[0]
        feasible_final = True

    planform_opt = obj.to_planform(x_final)
    sol_opt = obj.solution(x_final)
    return OptimisationResult(
        planform_opt=planform_opt,
        sol_opt=sol_opt,
        control_sol=control_sol,
        deltas=delta_metrics(control_sol, sol_opt),
        history=history,
        converged=bool(converged and feasible_final),
        n_evals=obj.n_evals,
    )


def _feasibility_polish(obj: _Objective, spec: OptimisationSpec, x: np.ndarray) -> np.ndarray:
    """Exact projection onto the area and CL constraints.

    Area is linear in the chord controls and CL is affine in any twist
    control at fixed chord, so both residuals can be zeroed to machine
    precision with uniform shifts, provided the box allows it.
    """
    x = x.copy()
    # area: shift the two interior chord controls equally
    planform = obj.to_planform(x)
    ctrl_sum_needed = 2.0 * spec.fixed_area / planform.semi_span  # sum of 4 chord controls
    root, tip = spec.fixed_root_tip
    needed = ctrl_sum_needed - root - tip
    c_lo, c_hi = spec.chord_bounds
    span_c = c_hi - c_lo
    current = (x[0] + x[1]) * span_c + 2.0 * c_lo
    shift = (needed - current) / (2.0 * span_c)
    x[0] = min(1.0, max(0.0, x[0] + shift))
    x[1] = min(1.0, max(0.0, x[1] + shift))

    # CL: uniform twist shift, using the exact affine response
    mode = spec.cl_mode
    _, cl, _, _, _, _ = obj.evaluate(x)
    if isinstance(mode, FixedCl) or mode.frac == 0.0:
        target = mode.target if isinstance(mode, FixedCl) else mode.center
    elif cl < mode.lo:
        target = mode.lo
    elif cl > mode.hi:
        target = mode.hi
    else:
        return x
    t_lo, t_hi = spec.twist_bounds
    span_t = t_hi - t_lo
    probe = 1e-3  # normalized twist probe for the affine slope
    xp = x.copy()
    xp[2:] = np.clip(xp[2:] + probe, 0.0, 1.0)
    if np.allclose(xp[2:], x[2:]):
        return x
    _, cl_p, _, _, _, _ = obj.evaluate(xp)
    dcl = cl_p - cl
    if abs(dcl) < 1e-15:
        return x
    shift_t = probe * (target - cl) / dcl
    x_new = x.copy()
    x_new[2:] = x[2:] + shift_t
    if np.any(x_new[2:] < 0.0) or np.any(x_new[2:] > 1.0):
        return x  # bound-limited; leave to the reported violation
    return x_new


def export_history_csv(path, history) -> None:
    """Write the outer-iteration history: iter, cost, cl, cdi, cf, cd, violation."""
    lines = ["iter,cost,cl,cdi,cf,cd,violation"]
    for row in history:
        lines.append(
            f"{row['iter']},{fnum(row['cost'])},{fnum(row['cl'])},{fnum(row['cdi'])},"
            f"{fnum(row['cf'])},{fnum(row['cd'])},{fnum(row['violation'])}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
