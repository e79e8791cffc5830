"""Inexact hypergradients and their time-averaged windowed form.

The single-round hypergradient at a pair (x, y) is

    grad_x f(x, y) + M grad_y f(x, y),    M solving  jac_xy_g + M hess_yy_g = 0,

i.e. M = -jac_xy_g(x,y) hess_yy_g(x,y)^{-1}. At y = y*(x) this equals the
exact gradient of the composed objective phi(x) = f(x, y*(x)) by the implicit
function theorem; away from y*(x) the error is bounded by M_f ||y - y*(x)||.

The windowed form averages the last w rounds' hypergradients, every term
evaluated at the same current pair and carrying its own round's curvature:

    (1/W) sum_{i=0}^{w-1} u_i * hg_{t-i}(x, y),    rounds t-i <= 0 contribute 0,

with weights 1 = u_0 >= u_1 >= ... > 0 and W = sum u_i fixed independent of t
(zero-padded rounds keep their weight in W).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .core import RoundFunctions
from .errors import FactorizationFailure

#: residual tolerance of the M solve, relative to 1 + ||jac||_max
SOLVE_RESIDUAL_RTOL = 1e-10


def solve_M(hess_yy: np.ndarray, jac_xy: np.ndarray) -> np.ndarray:
    """Solve jac_xy + M hess_yy = 0 for the (d1, d2) sensitivity matrix M.

    One Cholesky factorization of the symmetric positive definite Hessian,
    then d1 triangular solves. Raises FactorizationFailure when the Hessian
    is not numerically positive definite (a violated strong-convexity
    assumption) or the solve residual is out of tolerance.
    """
    hess_yy = np.asarray(hess_yy, dtype=float)
    jac_xy = np.atleast_2d(np.asarray(jac_xy, dtype=float))
    if hess_yy.shape[0] != hess_yy.shape[1]:
        raise FactorizationFailure(f"inner Hessian must be square, got {hess_yy.shape}")
    if jac_xy.shape[1] != hess_yy.shape[0]:
        raise FactorizationFailure(
            f"cross-Jacobian shape {jac_xy.shape} incompatible with Hessian {hess_yy.shape}"
        )
    try:
        factor = cho_factor(hess_yy, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise FactorizationFailure(f"inner Hessian not positive definite: {exc}") from exc
    M = -cho_solve(factor, jac_xy.T, check_finite=False).T

    scale = 1.0 + float(np.max(np.abs(jac_xy)))
    residual = float(np.max(np.abs(jac_xy + M @ hess_yy)))
    if not np.isfinite(residual) or residual > SOLVE_RESIDUAL_RTOL * scale:
        raise FactorizationFailure(
            f"linear-system residual {residual:.3e} exceeds {SOLVE_RESIDUAL_RTOL:.1e}*(1+||jac||)"
        )
    return M


def hypergradient(round_fns: RoundFunctions, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Single-round inexact hypergradient grad_x f + M grad_y f at (x, y)."""
    M = solve_M(round_fns.hess_yy_g(x, y), round_fns.jac_xy_g(x, y))
    gx = np.atleast_1d(np.asarray(round_fns.grad_x_f(x, y), dtype=float))
    gy = np.asarray(round_fns.grad_y_f(x, y), dtype=float)
    return gx + M @ gy


@dataclass(frozen=True)
class WeightWindow:
    """Averaging window: size w, weights u (u_0 = 1, decreasing, positive),
    normalizer W = sum(u)."""

    w: int
    u: np.ndarray
    W: float

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if self.w < 1 or u.shape != (self.w,):
            raise ValueError("weights must be a length-w vector with w >= 1")
        if u[0] != 1.0:
            raise ValueError("u_0 must equal 1")
        if np.any(u <= 0) or np.any(np.diff(u) > 0):
            raise ValueError("weights must be positive and non-increasing")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "W", float(u.sum()))


def make_weights(kind: str, w: int, gamma: Optional[float] = None) -> WeightWindow:
    """Build a WeightWindow.

    kind "uniform": u_i = 1, W = w. kind "exponential": u_i = gamma^i with
    gamma in (0, 1), W = (1 - gamma^w)/(1 - gamma).
    """
    if w < 1:
        raise ValueError("window size w must be >= 1")
    if kind == "uniform":
        return WeightWindow(w=w, u=np.ones(w), W=float(w))
    if kind == "exponential":
        if gamma is None or not (0.0 < gamma < 1.0):
            raise ValueError("exponential weights require gamma in (0, 1)")
        u = gamma ** np.arange(w, dtype=float)
        return WeightWindow(w=w, u=u, W=float(u.sum()))
    raise ValueError(f"unknown weight kind {kind!r}")


@dataclass
class HypergradientHistory:
    """The last w round handles, newest first.

    Stores function handles rather than stale gradients: every term is
    re-evaluated at the current iterate when the window is averaged. Rounds
    with index <= 0 are simply absent and contribute zero.
    """

    t: int
    rounds: Sequence[RoundFunctions]

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("round index must be >= 1")
        if len(self.rounds) > self.t:
            raise ValueError("history cannot hold more rounds than have elapsed")

    @staticmethod
    def from_stream(stream: Sequence[RoundFunctions], t: int, w: int) -> "HypergradientHistory":
        """History for round t (1-based) with window size w: rounds t, t-1, ..."""
        lo = max(0, t - w)
        return HypergradientHistory(t=t, rounds=[stream[s] for s in range(t - 1, lo - 1, -1)])


def windowed_hypergradient(
    history: HypergradientHistory,
    window: WeightWindow,
    x: np.ndarray,
    y: np.ndarray,
) -> np.ndarray:
    """Weighted average (1/W) sum_i u_i hg_{t-i}(x, y) over the window.

    Each term computes its own M from its own round's curvature at the
    shared current pair (x, y). Missing (zero-padded) rounds contribute a
    zero vector but their weight stays in W.
    """
    if len(history.rounds) > window.w:
        raise ValueError("history longer than the window")
    x = np.asarray(x, dtype=float)
    acc = np.zeros(x.shape[0] if x.ndim else 1)
    for i, rnd in enumerate(history.rounds):
        try:
            acc = acc + window.u[i] * hypergradient(rnd, x, y)
        except FactorizationFailure as exc:
            raise FactorizationFailure(str(exc), round_index=history.t - i) from exc
    return acc / window.W
