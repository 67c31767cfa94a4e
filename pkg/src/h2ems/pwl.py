"""Continuous piecewise-linear approximation of device curves.

Fits K-segment continuous PWL functions to sampled nonlinear curves by
exhaustive search over breakpoint combinations on a uniform sample grid,
with an ordinary least-squares solve per candidate. Curves whose domain
starts at zero are constrained through the origin, matching the physical
zero-in/zero-out behavior of the storage devices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

import numpy as np


class PwlError(ValueError):
    """Invalid curve definition or evaluation outside the fitted domain."""


@dataclass(frozen=True)
class FitReport:
    """Fit quality over the sampling grid.

    ``max_rel_error`` is the largest absolute deviation relative to the
    curve's full-scale value max|y| (pointwise ratios are ill-posed next to
    the origin where both curve and fit vanish).
    """

    max_abs_error: float
    max_rel_error: float
    sse: float
    sample_count: int

    def __post_init__(self):
        if min(self.max_abs_error, self.max_rel_error, self.sse) < 0:
            raise PwlError("fit errors must be nonnegative")


@dataclass(frozen=True)
class PwlCurve:
    """Continuous piecewise-linear function y = a_k x + b_k on segment k.

    ``breakpoints_x`` holds the K+1 segment edges in strictly ascending
    order; segment k covers [breakpoints_x[k], breakpoints_x[k+1]] and a
    boundary point belongs to the left segment.
    """

    breakpoints_x: tuple[float, ...]
    slopes: tuple[float, ...]
    intercepts: tuple[float, ...]
    axis_units: str = ""

    def __post_init__(self):
        bp = np.asarray(self.breakpoints_x, dtype=float)
        if len(bp) < 2:
            raise PwlError("need at least one segment")
        if not (len(self.slopes) == len(self.intercepts) == len(bp) - 1):
            raise PwlError("slopes/intercepts must have one entry per segment")
        if np.any(np.diff(bp) <= 0):
            raise PwlError("breakpoints must be strictly ascending")
        for k in range(len(self.slopes) - 1):
            x = bp[k + 1]
            left = self.slopes[k] * x + self.intercepts[k]
            right = self.slopes[k + 1] * x + self.intercepts[k + 1]
            if abs(left - right) > 1e-9 * max(1.0, abs(left)):
                raise PwlError(f"discontinuity at breakpoint {x}: {left} vs {right}")
        if bp[0] == 0.0 and abs(self.intercepts[0]) > 1e-12:
            raise PwlError("curve with domain starting at 0 must pass through origin")

    @property
    def n_segments(self) -> int:
        return len(self.slopes)

    @property
    def x_min(self) -> float:
        return self.breakpoints_x[0]

    @property
    def x_max(self) -> float:
        return self.breakpoints_x[-1]

    def breakpoint_values(self) -> tuple[float, ...]:
        """Curve values at every breakpoint."""
        ys = [self.slopes[0] * self.breakpoints_x[0] + self.intercepts[0]]
        for k in range(self.n_segments):
            ys.append(self.slopes[k] * self.breakpoints_x[k + 1] + self.intercepts[k])
        return tuple(ys)

    def scaled(self, sx: float, sy: float, axis_units: str = "") -> "PwlCurve":
        """Rescale both axes (e.g. cell curve to stack curve): x' = sx*x,
        y' = sy*y gives slopes a*sy/sx and intercepts b*sy."""
        if sx <= 0 or sy <= 0:
            raise PwlError("scale factors must be positive")
        return PwlCurve(
            breakpoints_x=tuple(x * sx for x in self.breakpoints_x),
            slopes=tuple(a * sy / sx for a in self.slopes),
            intercepts=tuple(b * sy for b in self.intercepts),
            axis_units=axis_units or self.axis_units,
        )

    def to_dict(self) -> dict:
        return {
            "breakpoints_x": list(self.breakpoints_x),
            "slopes": list(self.slopes),
            "intercepts": list(self.intercepts),
            "axis_units": self.axis_units,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PwlCurve":
        return cls(
            breakpoints_x=tuple(d["breakpoints_x"]),
            slopes=tuple(d["slopes"]),
            intercepts=tuple(d["intercepts"]),
            axis_units=d.get("axis_units", ""),
        )


def eval_pwl(curve: PwlCurve, x: float) -> float:
    """Evaluate the curve at ``x``; boundary points use the left segment."""
    bp = curve.breakpoints_x
    slack = 1e-9 * max(1.0, abs(bp[0]), abs(bp[-1]))
    if x < bp[0] - slack or x > bp[-1] + slack:
        raise PwlError(f"x = {x} outside curve domain [{bp[0]}, {bp[-1]}]")
    x = min(max(x, bp[0]), bp[-1])
    k = int(np.searchsorted(bp, x, side="left")) - 1
    k = min(max(k, 0), curve.n_segments - 1)
    return curve.slopes[k] * x + curve.intercepts[k]


def fit_pwl(curve: Callable[[float], float], k_segments: int,
            domain: tuple[float, float], grid_size: int = 200,
            axis_units: str = "") -> tuple[PwlCurve, FitReport]:
    """Fit a continuous K-segment PWL curve minimizing SSE on a uniform grid.

    Breakpoints are restricted to grid points and found by exhaustive search
    over all interior combinations (practical for K <= 4); each candidate is
    scored by an exact least-squares solve over a hinge basis, which builds
    continuity in by construction. A domain starting at zero pins the fit
    through the origin.
    """
    lo, hi = float(domain[0]), float(domain[1])
    if hi <= lo:
        raise PwlError("empty fitting domain")
    if k_segments < 1:
        raise PwlError("k_segments must be >= 1")
    if grid_size < 10 * k_segments:
        raise PwlError(f"grid_size {grid_size} too small for {k_segments} segments "
                       f"(need >= {10 * k_segments})")

    xs_raw = np.linspace(lo, hi, grid_size)
    ys_raw = np.array([float(curve(x)) for x in xs_raw])
    through_origin = (lo == 0.0)

    # Normalize both axes to O(1) so the candidate scoring is well
    # conditioned regardless of the physical units (hydrogen rates are
    # ~1e-6 while powers are ~1e3).
    x_scale = max(abs(lo), abs(hi))
    y_scale = float(np.max(np.abs(ys_raw))) or 1.0
    xs = xs_raw / x_scale
    ys = ys_raw / y_scale

    n_interior = grid_size - 2
    if k_segments - 1 > n_interior:
        raise PwlError("more segments than interior grid points")

    # Hinge basis: y ~ [1?] + c0*x + sum_j c_j*(x - xs[j])_+ ; precompute all
    # pairwise dot products once so each candidate costs a tiny dense solve.
    base_cols = [xs] if through_origin else [np.ones_like(xs), xs]
    hinges = np.maximum(0.0, xs[None, :] - xs[1:-1, None])  # (n_interior, grid)

    base = np.stack(base_cols)                       # (nb, grid)
    nb = base.shape[0]
    g_bb = base @ base.T
    g_bh = base @ hinges.T                           # (nb, n_interior)
    g_hh = hinges @ hinges.T                         # (n_interior, n_interior)
    r_b = base @ ys
    r_h = hinges @ ys
    yy = float(ys @ ys)

    combos = np.array(list(combinations(range(n_interior), k_segments - 1)),
                      dtype=np.intp)
    if combos.size == 0:
        combos = np.zeros((1, 0), dtype=np.intp)

    best_sse = np.inf
    best_combo = None
    best_theta = None
    dim = nb + k_segments - 1
    chunk = max(1, int(2_000_000 / max(1, dim * dim)))
    for start in range(0, len(combos), chunk):
        sel = combos[start:start + chunk]            # (c, K-1)
        c = len(sel)
        M = np.empty((c, dim, dim))
        M[:, :nb, :nb] = g_bb
        M[:, :nb, nb:] = g_bh[:, sel].transpose(1, 0, 2)
        M[:, nb:, :nb] = M[:, :nb, nb:].transpose(0, 2, 1)
        M[:, nb:, nb:] = g_hh[sel[:, :, None], sel[:, None, :]]
        rhs = np.empty((c, dim))
        rhs[:, :nb] = r_b
        rhs[:, nb:] = r_h[sel]
        # Tiny Tikhonov floor keeps near-degenerate candidates (hinge just
        # before the domain end) solvable; the winner is re-solved exactly.
        M += np.eye(dim) * 1e-12
        theta = np.linalg.solve(M, rhs[..., None])[..., 0]
        sse = yy - np.einsum("ij,ij->i", theta, rhs)
        idx = int(np.argmin(sse))
        if sse[idx] < best_sse:
            best_sse = float(sse[idx])
            best_combo = sel[idx]

    # Exact least squares on the winning breakpoint set.
    cols = list(base_cols) + [hinges[j] for j in best_combo]
    theta, *_ = np.linalg.lstsq(np.column_stack(cols), ys, rcond=None)

    interior = [float(xs_raw[1 + j]) for j in best_combo]
    bps = [lo] + interior + [hi]
    if through_origin:
        const = 0.0
        slope_deltas = theta
    else:
        const = float(theta[0]) * y_scale
        slope_deltas = theta[1:]
    slopes = np.cumsum(slope_deltas) * (y_scale / x_scale)
    intercepts = [const]
    for k in range(k_segments - 1):
        x_k = bps[k + 1]
        intercepts.append(intercepts[-1] + (slopes[k] - slopes[k + 1]) * x_k)

    fitted = PwlCurve(tuple(bps), tuple(float(a) for a in slopes),
                      tuple(float(b) for b in intercepts), axis_units)
    pred = np.array([eval_pwl(fitted, x) for x in xs_raw])
    err = np.abs(pred - ys_raw)
    scale = float(np.max(np.abs(ys_raw)))
    report = FitReport(
        max_abs_error=float(np.max(err)),
        max_rel_error=float(np.max(err) / scale) if scale > 0 else 0.0,
        sse=float(np.sum((pred - ys_raw) ** 2)),
        sample_count=grid_size,
    )
    return fitted, report
