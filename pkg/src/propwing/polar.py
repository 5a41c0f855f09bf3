"""Tabulated aerofoil polars: ingestion, best-linear-fit lift, cl/cd queries.

Angles are stored in radians internally; all file I/O is in degrees.
A polar is immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace

import numpy as np

from .errors import FitError, ParseError, ValidationError

DEFAULT_BLF_WINDOW_DEG = (-2.5, 10.0)


@dataclass(frozen=True)
class LinearLiftModel:
    """Best linear fit (BLF) of the lift curve: cl = a0 * (alpha - alpha0)."""

    a0: float  # lift-curve slope, per radian
    alpha0: float  # zero-lift angle, radians
    fit_window_deg: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.fit_window_deg
        if not lo < hi:
            raise ValidationError(f"fit window must be ordered, got [{lo}, {hi}]")
        if not self.a0 > 0.0:
            raise FitError(f"lift-curve slope must be positive, got {self.a0}")
        if not np.isfinite(self.alpha0):
            raise FitError("zero-lift angle is not finite")

    def cl(self, alpha):
        """Lift coefficient at angle of attack ``alpha`` (radians)."""
        return self.a0 * (np.asarray(alpha, dtype=float) - self.alpha0)


@dataclass(frozen=True)
class AerofoilPolar:
    """Tabulated cl/cd versus angle of attack at a single Reynolds number."""

    name: str
    reynolds: float
    alpha: np.ndarray  # radians, strictly increasing
    cl: np.ndarray
    cd: np.ndarray
    blf: LinearLiftModel | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=float))
        object.__setattr__(self, "cl", np.asarray(self.cl, dtype=float))
        object.__setattr__(self, "cd", np.asarray(self.cd, dtype=float))
        n = self.alpha.size
        if self.cl.size != n or self.cd.size != n:
            raise ValidationError("alpha, cl, cd arrays must have equal length")
        if n < 4:
            raise ValidationError(f"polar needs at least 4 rows, got {n}")
        if np.any(np.diff(self.alpha) <= 0.0):
            raise ValidationError("alpha values must be strictly increasing (duplicates rejected)")
        if np.any(self.cd <= 0.0):
            raise ValidationError("all cd values must be positive")
        # cl->cd lookup runs along the largest strictly-increasing cl branch
        # that contains the drag-bucket minimum; computed once, reused per query.
        lo, hi = _bucket_branch(self.cl, self.cd)
        object.__setattr__(self, "_branch", (lo, hi))
        object.__setattr__(self, "_k_lo", _end_curvature(self.cl[lo:hi], self.cd[lo:hi], "low"))
        object.__setattr__(self, "_k_hi", _end_curvature(self.cl[lo:hi], self.cd[lo:hi], "high"))

    @property
    def alpha_deg(self) -> np.ndarray:
        return np.degrees(self.alpha)

    def with_blf(self, model: LinearLiftModel) -> "AerofoilPolar":
        return replace(self, blf=model)

    def fitted(self, window_deg: tuple[float, float] = DEFAULT_BLF_WINDOW_DEG) -> "AerofoilPolar":
        """Return a copy carrying the BLF fitted over ``window_deg``."""
        return self.with_blf(fit_blf(self, window_deg))


def _bucket_branch(cl: np.ndarray, cd: np.ndarray) -> tuple[int, int]:
    """Index range [lo, hi) of the monotone-cl branch holding the cd minimum."""
    n = cl.size
    runs = []
    start = 0
    for i in range(1, n):
        if cl[i] <= cl[i - 1]:
            runs.append((start, i))
            start = i
    runs.append((start, n))
    i_min = int(np.argmin(cd))
    candidates = [r for r in runs if r[0] <= i_min < r[1]]
    if not candidates:
        candidates = runs
    lo, hi = max(candidates, key=lambda r: r[1] - r[0])
    if hi - lo < 2:
        raise ValidationError("polar has no monotone-cl branch around the drag bucket")
    return lo, hi


def _end_curvature(cl: np.ndarray, cd: np.ndarray, end: str) -> float:
    """Quadratic off-branch growth coefficient from the last two panel slopes."""
    if cl.size < 3:
        return 0.0
    if end == "high":
        c3, c2, c1 = cl[-1], cl[-2], cl[-3]
        d3, d2, d1 = cd[-1], cd[-2], cd[-3]
    else:
        c3, c2, c1 = cl[0], cl[1], cl[2]
        d3, d2, d1 = cd[0], cd[1], cd[2]
    s_end = (d3 - d2) / (c3 - c2)
    s_prev = (d2 - d1) / (c2 - c1)
    return max(0.0, (s_end - s_prev) / (c3 - c1))


def load_polar(source, name: str, reynolds: float) -> AerofoilPolar:
    """Load a polar from CSV (``alpha_deg,cl,cd`` header, ``#`` comments).

    ``source`` may be a path or an open text/binary stream. The rows are
    sorted by angle of attack; duplicate angles raise ValidationError.
    """
    lines = _read_lines(source)
    rows = []
    header_seen = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            cols = [c.strip() for c in line.split(",")]
            if cols != ["alpha_deg", "cl", "cd"]:
                raise ParseError(f"expected header 'alpha_deg,cl,cd', got {line!r}", lineno)
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"expected 3 comma-separated values, got {line!r}", lineno)
        try:
            rows.append(tuple(float(p) for p in parts))
        except ValueError:
            raise ParseError(f"non-numeric value in {line!r}", lineno) from None
    if not header_seen:
        raise ParseError("missing 'alpha_deg,cl,cd' header")
    if len(rows) < 4:
        raise ValidationError(f"polar needs at least 4 rows, got {len(rows)}")
    data = np.array(sorted(rows, key=lambda r: r[0]), dtype=float)
    return AerofoilPolar(
        name=name,
        reynolds=float(reynolds),
        alpha=np.radians(data[:, 0]),
        cl=data[:, 1],
        cd=data[:, 2],
    )


def _read_lines(source) -> list[str]:
    if hasattr(source, "read"):
        payload = source.read()
        if isinstance(payload, bytes):
            payload = payload.decode("utf-8")
        return payload.splitlines()
    with io.open(source, "r", encoding="utf-8") as fh:
        return fh.read().splitlines()


def fit_blf(polar: AerofoilPolar, window_deg: tuple[float, float] = DEFAULT_BLF_WINDOW_DEG) -> LinearLiftModel:
    """Least-squares line through (alpha, cl) samples inside ``window_deg``."""
    lo, hi = float(window_deg[0]), float(window_deg[1])
    if not lo < hi:
        raise ValidationError(f"fit window must be ordered, got [{lo}, {hi}]")
    a_deg = polar.alpha_deg
    eps = 1e-9
    if lo < a_deg[0] - eps or hi > a_deg[-1] + eps:
        raise ValidationError(
            f"fit window [{lo}, {hi}] deg outside data range [{a_deg[0]:.3g}, {a_deg[-1]:.3g}] deg"
        )
    mask = (a_deg >= lo - eps) & (a_deg <= hi + eps)
    if int(mask.sum()) < 3:
        raise FitError(f"need at least 3 samples inside [{lo}, {hi}] deg, got {int(mask.sum())}")
    slope_deg, intercept = np.polyfit(a_deg[mask], polar.cl[mask], 1)
    if slope_deg <= 0.0:
        raise FitError(f"degenerate lift curve: fitted slope {slope_deg:.3e} per deg is not positive")
    a0 = slope_deg * 180.0 / np.pi
    alpha0 = np.radians(-intercept / slope_deg)
    return LinearLiftModel(a0=float(a0), alpha0=float(alpha0), fit_window_deg=(lo, hi))


def cl_of_alpha(polar: AerofoilPolar, alpha, mode: str = "blf"):
    """Lift coefficient at ``alpha`` (radians).

    ``blf`` mode evaluates the fitted line; ``tabulated`` mode interpolates
    the table piecewise-linearly and extrapolates with the end-panel slope.
    """
    a = np.asarray(alpha, dtype=float)
    if mode == "blf":
        if polar.blf is None:
            raise ValidationError("polar has no BLF; call fit_blf first")
        out = polar.blf.cl(a)
    elif mode == "tabulated":
        out = np.interp(a, polar.alpha, polar.cl)
        s_lo = (polar.cl[1] - polar.cl[0]) / (polar.alpha[1] - polar.alpha[0])
        s_hi = (polar.cl[-1] - polar.cl[-2]) / (polar.alpha[-1] - polar.alpha[-2])
        out = np.where(a < polar.alpha[0], polar.cl[0] + s_lo * (a - polar.alpha[0]), out)
        out = np.where(a > polar.alpha[-1], polar.cl[-1] + s_hi * (a - polar.alpha[-1]), out)
    else:
        raise ValidationError(f"unknown cl mode {mode!r}")
    return float(out) if np.isscalar(alpha) else out


def cd_of_cl(polar: AerofoilPolar, cl_query):
    """Profile drag coefficient interpolated against cl on the bucket branch.

    Beyond the branch ends the drag grows quadratically in (cl - cl_end),
    so queries off the bucket never return less drag than the nearest
    tabulated point.
    """
    lo, hi = polar._branch
    cl_b = polar.cl[lo:hi]
    cd_b = polar.cd[lo:hi]
    q = np.asarray(cl_query, dtype=float)
    out = np.interp(q, cl_b, cd_b)
    d_lo = q - cl_b[0]
    d_hi = q - cl_b[-1]
    out = np.where(d_lo < 0.0, cd_b[0] + polar._k_lo * d_lo**2, out)
    out = np.where(d_hi > 0.0, cd_b[-1] + polar._k_hi * d_hi**2, out)
    return float(out) if np.isscalar(cl_query) else out
