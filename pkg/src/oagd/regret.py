"""Comparator oracles and the performance accounting.

The oracles here exist only for measurement; the online loop never sees
them. Per round they produce

    y*_t(x)  = argmin_y g_t(x, y)                      (inner_oracle)
    x*_t     = argmin_{x in X} f_t(x, y*_t(x))          (outer_oracle)

from closed forms when the round exposes them and high-accuracy numerical
solves otherwise. On top of the comparator series the report aggregates the
dynamic and static regrets, the windowed-gradient local regret, the outer
and inner path lengths P_p / Y_p with their static variants, and a sampled
lower bound on the worst-case inner-map variation H_T.
"""
from __future__ import annotations

import itertools
import warnings as _warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import FeasibleSet, project
from .errors import NonConvexFlag
from .hypergrad import (
    HypergradientHistory,
    WeightWindow,
    hypergradient,
    windowed_hypergradient,
)
from .inner import gd_to_tolerance, pgd_to_stationarity

INNER_ORACLE_TOL = 1e-12
OUTER_ORACLE_TOL = 1e-10


def inner_oracle(round_fns, x, tol: float = INNER_ORACLE_TOL,
                 y0: Optional[np.ndarray] = None) -> np.ndarray:
    """y*_t(x): closed form when available, else gradient descent from y0
    until the inner gradient norm falls below tol."""
    if round_fns.closed_form_y_star is not None:
        return np.asarray(round_fns.closed_form_y_star(x), dtype=float)
    if y0 is None:
        raise ValueError("y0 is required when the round has no closed-form inner solution")
    return gd_to_tolerance(round_fns, np.asarray(x, dtype=float), y0, tol=tol)


def _composed_handles(round_fns, inner_tol, y_hint):
    """Value and gradient of phi(x) = f(x, y*(x)) sharing one inner solve
    per distinct x (the solve is warm started from the previous one)."""
    state = {"key": None, "y": y_hint}

    def solve(x):
        key = x.tobytes()
        if state["key"] != key:
            state["y"] = inner_oracle(round_fns, x, tol=inner_tol, y0=state["y"])
            state["key"] = key
        return state["y"]

    def value(x):
        return float(round_fns.f(x, solve(x)))

    def grad(x):
        return hypergradient(round_fns, x, solve(x))

    return value, grad


def outer_oracle(round_fns, fset: FeasibleSet, tol: float = OUTER_ORACLE_TOL,
                 inner_tol: float = INNER_ORACLE_TOL,
                 x0: Optional[np.ndarray] = None,
                 y0: Optional[np.ndarray] = None,
                 convex: bool = True) -> np.ndarray:
    """x*_t: closed form when available, else projected gradient descent on
    the composed objective using exact hypergradients.

    With convex=False the numerical result is only a stationary point; a
    NonConvexFlag warning marks it as local.
    """
    if round_fns.closed_form_x_star is not None:
        return np.asarray(round_fns.closed_form_x_star(), dtype=float)
    if x0 is None:
        raise ValueError("x0 is required when the round has no closed-form comparator")
    if not convex:
        _warnings.warn(NonConvexFlag(
            "composed objective not known to be convex; returning a local stationary point"
        ))
    value, grad = _composed_handles(round_fns, inner_tol, y_hint=y0)
    return pgd_to_stationarity(value, grad, fset, np.asarray(x0, dtype=float), tol=tol)


@dataclass
class ComparatorSeries:
    """Per-round comparators plus the optional static comparator block.

    grad_norm holds ||hypergradient at (x*_t, y*_t(x*_t))||, the quantity
    whose sum certifies near-stationary comparator sequences. provenance is
    "closed_form", "numerical(tol=...)" or "mixed".
    """

    x_star: np.ndarray
    y_star: np.ndarray
    f_star: np.ndarray
    grad_norm: np.ndarray
    provenance: str
    x_static: Optional[np.ndarray] = None
    y_static: Optional[np.ndarray] = None
    f_static: Optional[np.ndarray] = None

    @property
    def T(self) -> int:
        return self.x_star.shape[0]

    def sliced(self, T: int) -> "ComparatorSeries":
        """View of the first T rounds (static block carried over)."""
        if T >= self.T:
            return self
        return ComparatorSeries(
            x_star=self.x_star[:T], y_star=self.y_star[:T],
            f_star=self.f_star[:T], grad_norm=self.grad_norm[:T],
            provenance=self.provenance, x_static=self.x_static,
            y_static=None if self.y_static is None else self.y_static[:T],
            f_static=None if self.f_static is None else self.f_static[:T],
        )


def _stream_dims(stream) -> tuple[int, int]:
    d1 = getattr(stream, "d1", None)
    d2 = getattr(stream, "d2", None)
    if d1 is None or d2 is None:
        raise ValueError("stream does not expose d1/d2; pass dimensions explicitly")
    return int(d1), int(d2)


def comparator_series(stream, fset: FeasibleSet, T: Optional[int] = None,
                      tol: float = OUTER_ORACLE_TOL,
                      inner_tol: float = INNER_ORACLE_TOL,
                      convex: bool = True,
                      include_static: bool = True) -> ComparatorSeries:
    """Solve every round's comparator pair, plus the static comparator.

    Numerical rounds warm start from the previous round's solution. The
    static x is the closed form when the stream provides one, otherwise a
    projected-gradient solve on the time-averaged composed objective
    initialized at the mean of the per-round comparators.
    """
    d1, d2 = _stream_dims(stream)
    if T is None:
        T = len(stream)
    if not convex:
        _warnings.warn(NonConvexFlag(
            "nonconvex composed objective: comparators are local stationary points"
        ))
    x_star = np.empty((T, d1))
    y_star = np.empty((T, d2))
    f_star = np.empty(T)
    grad_norm = np.empty(T)
    closed = numerical = False
    x_prev = project(fset, np.zeros(d1))
    y_prev = np.zeros(d2)
    for t in range(T):
        rnd = stream[t]
        if rnd.closed_form_x_star is not None:
            xs = np.asarray(rnd.closed_form_x_star(), dtype=float)
            closed = True
        else:
            xs = outer_oracle(rnd, fset, tol=tol, inner_tol=inner_tol,
                              x0=x_prev, y0=y_prev, convex=True)
            numerical = True
        ys = inner_oracle(rnd, xs, tol=inner_tol, y0=y_prev)
        x_star[t] = xs
        y_star[t] = ys
        f_star[t] = rnd.f(xs, ys)
        grad_norm[t] = np.linalg.norm(hypergradient(rnd, xs, ys))
        x_prev, y_prev = xs, ys
    if closed and numerical:
        provenance = "mixed"
    elif closed:
        provenance = "closed_form"
    else:
        provenance = f"numerical(tol={tol:g})"
    series = ComparatorSeries(
        x_star=x_star, y_star=y_star, f_star=f_star,
        grad_norm=grad_norm, provenance=provenance,
    )
    if include_static:
        attach_static(series, stream, fset, T=T, tol=tol, inner_tol=inner_tol)
    return series


def attach_static(series: ComparatorSeries, stream, fset: FeasibleSet,
                  T: Optional[int] = None, tol: float = OUTER_ORACLE_TOL,
                  inner_tol: float = INNER_ORACLE_TOL) -> ComparatorSeries:
    """Fill the static comparator block of an existing series in place."""
    if T is None:
        T = series.T
    d2 = series.y_star.shape[1]
    closed_static = getattr(stream, "closed_form_static_comparator", None)
    if closed_static is not None:
        x_bar = np.asarray(closed_static(), dtype=float)
    else:
        hints = series.y_star.copy()

        def value(x):
            total = 0.0
            for t in range(T):
                hints[t] = inner_oracle(stream[t], x, tol=inner_tol, y0=hints[t])
                total += float(stream[t].f(x, hints[t]))
            return total / T

        def grad(x):
            acc = np.zeros_like(x)
            for t in range(T):
                hints[t] = inner_oracle(stream[t], x, tol=inner_tol, y0=hints[t])
                acc += hypergradient(stream[t], x, hints[t])
            return acc / T

        x_bar = pgd_to_stationarity(
            value, grad, fset, series.x_star.mean(axis=0), tol=tol
        )
    y_static = np.empty((T, d2))
    f_static = np.empty(T)
    y_prev = np.zeros(d2)
    for t in range(T):
        y_prev = inner_oracle(stream[t], x_bar, tol=inner_tol, y0=y_prev)
        y_static[t] = y_prev
        f_static[t] = stream[t].f(x_bar, y_prev)
    series.x_static = x_bar
    series.y_static = y_static
    series.f_static = f_static
    return series


def path_lengths(series: ComparatorSeries, p: int) -> tuple[float, float, float]:
    """(P_p, Y_p, Ybar_p): p-th power variation of the outer comparators,
    the inner comparators along them, and the inner comparators at the
    static x. Series of length 1 have zero variation; Ybar is nan when the
    static block is absent."""
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    P = float(np.sum(_step_norms(series.x_star) ** p))
    Y = float(np.sum(_step_norms(series.y_star) ** p))
    if series.y_static is None:
        Ybar = float("nan")
    else:
        Ybar = float(np.sum(_step_norms(series.y_static) ** p))
    return P, Y, Ybar


def _step_norms(arr: np.ndarray) -> np.ndarray:
    if arr.shape[0] < 2:
        return np.zeros(0)
    return np.linalg.norm(np.diff(arr, axis=0), axis=1)


def _cumulative_variation(arr: np.ndarray, p: int) -> np.ndarray:
    out = np.zeros(arr.shape[0])
    steps = _step_norms(arr) ** p
    out[1:] = np.cumsum(steps)
    return out


def kronecker_points(n: int, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """n low-discrepancy points in the box [lower, upper] from the additive
    golden-ratio-family recurrence."""
    d = lower.shape[0]
    g = 1.5
    for _ in range(64):
        g = (1.0 + g) ** (1.0 / (d + 1))
    alpha = g ** -(1.0 + np.arange(d))
    k = np.arange(1, n + 1)[:, None]
    frac = np.mod(0.5 + k * alpha[None, :], 1.0)
    return lower[None, :] + frac * (upper - lower)[None, :]


def _sample_points(fset: FeasibleSet, d1: int, n: int,
                   trace_x: Optional[np.ndarray] = None) -> np.ndarray:
    if fset.kind == "box":
        lower, upper = fset.lower, fset.upper
    elif fset.kind == "ball":
        lower = fset.center - fset.radius
        upper = fset.center + fset.radius
    else:
        if trace_x is None or trace_x.shape[0] == 0:
            lower, upper = -np.ones(d1), np.ones(d1)
        else:
            lower = trace_x.min(axis=0) - 1.0
            upper = trace_x.max(axis=0) + 1.0
    pts = kronecker_points(n, lower, upper)
    if fset.kind == "box" and 2**d1 <= n:
        corners = np.array(list(itertools.product(*zip(fset.lower, fset.upper))))
        pts = np.vstack([pts, corners])
    if fset.kind == "ball":
        pts = np.array([project(fset, p) for p in pts])
    return pts


def h_estimate(stream, fset: FeasibleSet, T: Optional[int] = None,
               n_samples: int = 128, inner_tol: float = INNER_ORACLE_TOL,
               trace_x: Optional[np.ndarray] = None) -> float:
    """Sampled lower bound on H_T = sum_t sup_x ||y*_{t-1}(x) - y*_t(x)||^2.

    The supremum is taken over a finite point cloud (quasi-random points
    plus box corners when affordable; for unbounded sets the cloud covers
    the visited x range padded by 1), so the value underestimates the true
    supremum.
    """
    d1, d2 = _stream_dims(stream)
    if T is None:
        T = len(stream)
    if T < 2:
        return 0.0
    pts = _sample_points(fset, d1, n_samples, trace_x=trace_x)
    prev = np.empty((pts.shape[0], d2))
    cur = np.empty((pts.shape[0], d2))
    for j, p in enumerate(pts):
        prev[j] = inner_oracle(stream[0], p, tol=inner_tol, y0=np.zeros(d2))
    total = 0.0
    for t in range(1, T):
        rnd = stream[t]
        for j, p in enumerate(pts):
            cur[j] = inner_oracle(rnd, p, tol=inner_tol, y0=prev[j])
        total += float(np.max(np.sum((cur - prev) ** 2, axis=1)))
        prev, cur = cur, prev
    return total


def local_regret_series(trace, stream, window: WeightWindow,
                        inner_tol: float = INNER_ORACLE_TOL) -> np.ndarray:
    """Cumulative sum of ||windowed hypergradient at (x_t, y*_t(x_t))||^2,
    the windowed gradient evaluated at the exact inner response to the
    played x_t."""
    T = trace.T
    fast = getattr(stream, "windowed_hypergrad", None)
    vals = np.empty(T)
    y_prev = np.zeros(trace.d2)
    for t in range(1, T + 1):
        x_t = trace.x[t - 1]
        y_prev = inner_oracle(stream[t - 1], x_t, tol=inner_tol, y0=y_prev)
        if fast is not None:
            hg = fast(t, window, x_t, y_prev)
        else:
            hist = HypergradientHistory.from_stream(stream, t, window.w)
            hg = windowed_hypergradient(hist, window, x_t, y_prev)
        vals[t - 1] = float(np.sum(hg**2))
    return np.cumsum(vals)


@dataclass
class RegretReport:
    """Everything the experiment runner serializes about one trace.

    bd/bs/bl are cumulative series (bs is None when the static comparator
    was skipped); p2_series / y2_series are the cumulative squared path
    lengths used for per-round reporting; h_T is a sampled lower bound.
    """

    bd_regret: np.ndarray
    bs_regret: Optional[np.ndarray]
    bl_regret: Optional[np.ndarray]
    p1: float
    p2: float
    y1: float
    y2: float
    ybar1: float
    ybar2: float
    h_T: float
    comparator_grad_sum: float
    f_star_sum: float
    p2_series: np.ndarray
    y2_series: np.ndarray
    x_static: Optional[np.ndarray]
    provenance: str


def compute_report(trace, stream, fset: FeasibleSet, window: WeightWindow,
                   tol: float = OUTER_ORACLE_TOL,
                   inner_tol: float = INNER_ORACLE_TOL,
                   h_samples: int = 128,
                   comparators: Optional[ComparatorSeries] = None,
                   convex: bool = True,
                   include_static: bool = True,
                   include_local: bool = True,
                   include_h: bool = True) -> RegretReport:
    """Aggregate all metrics for a finished trace.

    A precomputed ComparatorSeries may be shared across traces of the same
    stream (window sweeps); its static block is attached on demand.
    """
    T = trace.T
    if comparators is None:
        comparators = comparator_series(
            stream, fset, T=T, tol=tol, inner_tol=inner_tol,
            convex=convex, include_static=include_static,
        )
    if include_static and comparators.f_static is None:
        attach_static(comparators, stream, fset, T=T, tol=tol, inner_tol=inner_tol)
    if comparators.T < T:
        raise ValueError("comparator series shorter than the trace")
    comparators = comparators.sliced(T)
    bd = np.cumsum(trace.f_value - comparators.f_star)
    bs = np.cumsum(trace.f_value - comparators.f_static) if include_static else None
    bl = local_regret_series(trace, stream, window, inner_tol=inner_tol) if include_local else None
    p1, y1, ybar1 = path_lengths(comparators, 1)
    p2, y2, ybar2 = path_lengths(comparators, 2)
    h = (
        h_estimate(stream, fset, T=T, n_samples=h_samples,
                   inner_tol=inner_tol, trace_x=trace.x)
        if include_h else float("nan")
    )
    return RegretReport(
        bd_regret=bd,
        bs_regret=bs,
        bl_regret=bl,
        p1=p1, p2=p2, y1=y1, y2=y2, ybar1=ybar1, ybar2=ybar2,
        h_T=h,
        comparator_grad_sum=float(np.sum(comparators.grad_norm)),
        f_star_sum=float(np.sum(comparators.f_star)),
        p2_series=_cumulative_variation(comparators.x_star, 2),
        y2_series=_cumulative_variation(comparators.y_star, 2),
        x_static=comparators.x_static,
        provenance=comparators.provenance,
    )
