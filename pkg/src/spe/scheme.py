"""Time integrator for the viscous regularization of the short pulse equation.

The mixed problem solved on the truncated half-line [0, L] is

    du/dt + 3 u^2 du/dx = S(u) + eps * d2u/dx2,   u(t,0) = g(t),  u(t,L) = 0,

where S(u) is the nonlocal source built from the running primitive
P(t,x) = int_0^x u dy.  Two structural corrections keep the truncated system
on the zero-mean manifold that the half-line theory lives on:

* the source is applied in its zero-mean gauge S = P - <P>, with <P> the
  domain average of P.  This is the zero-mean-sector inverse derivative; the
  raw cumulative primitive drags in the exponentially growing Goursat branch
  of d/dx(du/dt) = u, which on any truncated domain swamps the solution long
  before t = 1.  On the zero-mean manifold the gauge is invisible in the L2
  balance because int u * <P> dx = <P> * int u dx = 0.
* after every sourced step the solution is re-projected to exact zero
  trapezoidal mean by subtracting a multiple of a fixed interior weight;
  mass conservation holds structurally instead of accumulating truncation
  drift.  (Runs with the source disabled solve the plain conservation law,
  which exchanges mass through the boundary and is not projected.)

Advection uses first-order left-biased upwinding on the conservative flux
u^3 (the characteristic speed 3u^2 is never negative, so information always
enters from the boundary side).  Diffusion is integrated implicitly
(backward Euler, tridiagonal solve) in the default IMEX mode and explicitly
in the fully-explicit mode.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from .errors import BlowUpError, DataValidationError
from .fields import Field, Grid, lp_norm, mean
from .nonlocal_source import cumulative_primitive

__all__ = [
    "BoundaryData",
    "SolverConfig",
    "State",
    "Trajectory",
    "mollify_data",
    "stable_dt",
    "upwind_flux_divergence",
    "step",
    "run",
]

#: floor on the characteristic speed in the CFL condition
SPEED_FLOOR = 1e-12


@dataclass(frozen=True)
class BoundaryData:
    """Boundary datum g(t) with its declared sup bound.

    Every evaluation is range-checked against ``sup_bound``; a boundary datum
    that escapes its declared bound aborts the run rather than silently
    feeding unbounded data into the scheme.
    """

    g: object  # callable t -> float
    sup_bound: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.sup_bound) or self.sup_bound < 0.0:
            raise ValueError("sup_bound must be finite and nonnegative")

    def __call__(self, t: float) -> float:
        val = float(self.g(t))
        if abs(val) > self.sup_bound * (1.0 + 1e-12) + 1e-300:
            raise DataValidationError(
                [f"boundary datum |g({t:.6g})| = {abs(val):.6g} exceeds its "
                 f"declared sup bound {self.sup_bound:.6g}"]
            )
        return val

    @classmethod
    def zero(cls) -> "BoundaryData":
        return cls(g=lambda t: 0.0, sup_bound=0.0)


@dataclass(frozen=True)
class SolverConfig:
    """Discretization parameters for one run."""

    eps: float
    grid: Grid
    final_time: float
    cfl_safety: float = 0.9
    scheme: str = "imex"
    snapshot_times: tuple = ()
    include_source: bool = True

    def __post_init__(self) -> None:
        if self.eps < 0.0 or not np.isfinite(self.eps):
            raise ValueError("viscosity eps must be finite and >= 0")
        if self.scheme not in ("imex", "explicit"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.eps == 0.0 and self.scheme != "explicit":
            raise ValueError("eps = 0 is only supported with the explicit scheme")
        if not (0.0 < self.cfl_safety <= 1.0):
            raise ValueError("cfl_safety must lie in (0, 1]")
        if not (self.final_time > 0.0 and np.isfinite(self.final_time)):
            raise ValueError("final_time must be positive and finite")
        snaps = tuple(float(s) for s in self.snapshot_times)
        if any(s < 0.0 or s > self.final_time + 1e-12 for s in snaps):
            raise ValueError("snapshot times must lie in [0, final_time]")
        object.__setattr__(self, "snapshot_times", snaps)


@dataclass(frozen=True)
class State:
    """One time level: the solution, its synchronized primitive, and the
    one-sided boundary gradient du/dx(t,0)."""

    t: float
    u: Field
    P: Field
    boundary_gradient: float


@dataclass(frozen=True)
class Trajectory:
    """Completed run: snapshots plus the per-step boundary series.

    ``boundary_series`` has one row (t, g(t), du/dx(t,0)) per accepted step,
    preceded by the t=0 row.  ``grad_sq_series`` carries the spatial L2 norm
    squared of du/dx at the same times; the time integrals in the L2 balance
    need per-step resolution, which snapshots alone cannot provide.
    """

    config: SolverConfig
    g: BoundaryData
    initial: State
    snapshots: tuple
    boundary_series: np.ndarray = field(repr=False)
    grad_sq_series: np.ndarray = field(repr=False)
    step_log: np.ndarray = field(repr=False)
    verdict: str = "completed"

    @property
    def final(self) -> State:
        return self.snapshots[-1]


@functools.lru_cache(maxsize=32)
def _projection_weight(grid: Grid) -> np.ndarray:
    # interior weight with unit trapezoidal integral; vanishes at both
    # boundary nodes so Dirichlet values survive the projection untouched
    x = grid.nodes
    w = np.sin(np.pi * x / grid.length) ** 2
    w /= grid.dx * (0.5 * w[0] + w[1:-1].sum() + 0.5 * w[-1])
    w.setflags(write=False)
    return w


def _trapz(values: np.ndarray, dx: float) -> float:
    return float(dx * (0.5 * values[0] + values[1:-1].sum() + 0.5 * values[-1]))


def _one_sided_gradient(values: np.ndarray, dx: float) -> float:
    # second-order three-point formula at x=0
    return float((-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx))


def _grad_sq(values: np.ndarray, dx: float) -> float:
    # centered differences interiorly, one-sided three-point at both ends
    gr = np.empty_like(values)
    gr[1:-1] = (values[2:] - values[:-2]) / (2.0 * dx)
    gr[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx)
    gr[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * dx)
    return _trapz(gr * gr, dx)


def mollify_data(
    u0: Field, g: BoundaryData, width: float
) -> tuple[Field, BoundaryData]:
    """Smooth both data with a compactly supported polynomial kernel.

    The kernel (1 - (r/width)^2)^3 is sampled on the grid and normalized to
    unit discrete mass, so smoothing is a convex combination and cannot
    increase the sup, L2 or L4 norms.  The smoothed initial datum is then
    re-projected to exact zero trapezoidal mean by subtracting a multiple of
    the fixed interior weight (the derivative-of-primitive correction: the
    weight has unit integral by telescoping, so the projection cancels the
    mean exactly and is the identity on already-zero-mean data).

    width = 0 returns both arguments unchanged apart from the (then trivial)
    re-projection.
    """
    if width < 0.0:
        raise ValueError("mollification width must be >= 0")
    grid = u0.grid
    dx = grid.dx
    if width < dx:
        smoothed = np.array(u0.values, dtype=float)
    else:
        half = int(np.floor(width / dx))
        r = np.arange(-half, half + 1) * dx
        kernel = (1.0 - (r / width) ** 2) ** 3
        kernel /= kernel.sum()
        smoothed = np.convolve(u0.values, kernel, mode="same")

    w = _projection_weight(grid)
    smoothed = smoothed - _trapz(smoothed, dx) * w
    u_out = Field(grid, smoothed)

    if width < dx:
        return u_out, g

    inner = g.g
    half = int(np.floor(width / dx))
    offsets = np.arange(-half, half + 1) * dx
    base_kernel = (1.0 - (offsets / width) ** 2) ** 3

    def smoothed_g(t: float) -> float:
        ts = t + offsets
        keep = ts >= 0.0
        k = base_kernel[keep]
        vals = np.array([inner(s) for s in ts[keep]])
        return float((k * vals).sum() / k.sum())

    return u_out, BoundaryData(g=smoothed_g, sup_bound=g.sup_bound)


def stable_dt(state: State, config: SolverConfig) -> float:
    """CFL-limited time step, capped at the time remaining to final_time.

    Advective limit dx / max(3u^2, floor); the explicit scheme adds the
    diffusive limit dx^2 / (2 eps).  Both carry the cfl_safety factor.
    """
    dx = config.grid.dx
    speed = max(3.0 * float(np.max(state.u.values ** 2)), SPEED_FLOOR)
    dt = config.cfl_safety * dx / speed
    if config.scheme == "explicit" and config.eps > 0.0:
        dt = min(dt, config.cfl_safety * dx * dx / (2.0 * config.eps))
    remaining = config.final_time - state.t
    return float(min(dt, remaining))


def upwind_flux_divergence(u: Field) -> Field:
    """Left-biased divergence of the flux u^3: (f_i - f_{i-1}) / dx.

    Valid because f'(u) = 3u^2 >= 0: characteristics never move leftward.
    Node 0 carries the Dirichlet datum and is excluded (set to 0).
    """
    dx = u.grid.dx
    f = u.values**3
    div = np.zeros_like(f)
    div[1:] = (f[1:] - f[:-1]) / dx
    return Field(u.grid, div)


def _implicit_diffusion(
    ustar: np.ndarray, r: float, left_value: float, right_value: float
) -> np.ndarray:
    """Backward-Euler diffusion solve (I - r*D2) u = ustar on interior nodes.

    Dirichlet values enter the right-hand side; the tridiagonal system is
    symmetric with diagonal 1 + 2r and off-diagonals -r.
    """
    m = ustar.shape[0] - 2
    ab = np.zeros((3, m))
    ab[0, 1:] = -r
    ab[1, :] = 1.0 + 2.0 * r
    ab[2, :-1] = -r
    rhs = ustar[1:-1].copy()
    rhs[0] += r * left_value
    rhs[-1] += r * right_value
    out = np.empty_like(ustar)
    out[1:-1] = solve_banded((1, 1), ab, rhs)
    out[0] = left_value
    out[-1] = right_value
    return out


def step(
    state: State,
    config: SolverConfig,
    g: BoundaryData,
    *,
    dt: float | None = None,
    enable_advection: bool = True,
    enable_source: bool | None = None,
) -> State:
    """Advance one time level.

    IMEX: explicit upwind advection and explicit gauged source, implicit
    backward-Euler diffusion, Dirichlet enforcement u(0) = g(t+dt) and
    u(L) = 0, zero-mean re-projection, then P is recomputed from the new u
    and the boundary gradient refreshed with the one-sided three-point
    formula.  The fully-explicit scheme treats diffusion by forward Euler
    under its own CFL limit.

    The keyword switches exist for scheme verification (pure-advection and
    pure-diffusion sub-problems); production runs leave them at defaults.
    """
    if state.t >= config.final_time:
        raise ValueError("state is already at or beyond final_time")
    if enable_source is None:
        enable_source = config.include_source
    grid = config.grid
    dx = grid.dx
    if dt is None:
        dt = stable_dt(state, config)

    u = state.u.values
    with np.errstate(over="ignore", invalid="ignore"):
        rhs = np.zeros_like(u)
        if enable_advection:
            f = u**3
            rhs[1:] -= (f[1:] - f[:-1]) / dx
        if enable_source:
            P = state.P.values
            rhs += P - _trapz(P, dx) / grid.length
        ustar = u + dt * rhs

        g_new = g(state.t + dt)
        if config.scheme == "imex" and config.eps > 0.0:
            r = config.eps * dt / (dx * dx)
            unew = _implicit_diffusion(ustar, r, g_new, 0.0)
        else:
            if config.eps > 0.0:
                lap = np.zeros_like(u)
                lap[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (dx * dx)
                ustar = ustar + config.eps * dt * lap
            unew = ustar
            unew[0] = g_new
            unew[-1] = 0.0

        if enable_source:
            # zero-mean re-projection: mass conservation of the sourced
            # problem is structural, not left to truncation-error drift.
            # The source-free conservation law exchanges mass through the
            # boundary and must not be projected.
            unew = unew - _trapz(unew, dx) * _projection_weight(grid)
            unew[0] = g_new
            unew[-1] = 0.0

    t_new = state.t + dt
    if not np.isfinite(unew).all():
        raise BlowUpError(t_new)

    u_field = Field(grid, unew)
    return State(
        t=t_new,
        u=u_field,
        P=cumulative_primitive(u_field),
        boundary_gradient=_one_sided_gradient(unew, dx),
    )


def _ramped(g: BoundaryData, u0_left: float, ramp_width: float) -> BoundaryData:
    inner = g.g

    def ramped_g(t: float) -> float:
        if t >= ramp_width:
            return float(inner(t))
        lam = t / ramp_width
        return float((1.0 - lam) * u0_left + lam * inner(t))

    bound = max(g.sup_bound, abs(u0_left))
    return BoundaryData(g=ramped_g, sup_bound=bound)


def run(
    u0: Field,
    g: BoundaryData,
    config: SolverConfig,
    *,
    require_zero_mean: bool = True,
    strict_compat: bool = False,
    compat_tol: float = 1e-8,
    ramp_width: float = 0.0,
) -> Trajectory:
    """Integrate from u0 to final_time, recording snapshots and boundary data.

    Admissibility: the initial datum must have zero trapezoidal mean within
    1e-10 * ||u0||_L1 (set ``require_zero_mean=False`` only for deliberately
    non-conforming shock-validation data).  A mismatch u0(0) != g(0) is
    surfaced as a warning, or an error under ``strict_compat``; with
    ``ramp_width`` > 0 the boundary datum is ramped from u0(0) over that
    initial interval instead.

    Steps are shortened to land exactly on each requested snapshot time, so
    snapshots carry no interpolation error.  Snapshots always include t=0 and
    final_time.
    """
    if u0.grid != config.grid:
        raise DataValidationError(["initial datum lives on a different grid"])
    l1 = lp_norm(u0, 1)
    if require_zero_mean and abs(mean(u0)) > 1e-10 * max(l1, 1e-300):
        raise DataValidationError(
            [f"nonzero mean violates the zero-mean requirement on the initial "
             f"datum: mean = {mean(u0):.3e}, allowed {1e-10 * l1:.3e}"]
        )
    g0 = g(0.0)
    u0_left = float(u0.values[0])
    if abs(u0_left - g0) > compat_tol:
        msg = (f"initial/boundary compatibility mismatch: u0(0) = {u0_left:.6g} "
               f"but g(0) = {g0:.6g}")
        if strict_compat:
            raise DataValidationError([msg])
        warnings.warn(msg, stacklevel=2)
        if ramp_width > 0.0:
            g = _ramped(g, u0_left, ramp_width)

    snap_times = sorted(set((0.0, float(config.final_time), *config.snapshot_times)))
    config = replace(config, snapshot_times=tuple(snap_times))

    dx = config.grid.dx
    state = State(
        t=0.0,
        u=u0,
        P=cumulative_primitive(u0),
        boundary_gradient=_one_sided_gradient(u0.values, dx),
    )
    initial = state
    snapshots = [state]
    series = [(0.0, g0, state.boundary_gradient)]
    grad_sq = [_grad_sq(u0.values, dx)]
    dts = []
    next_snap = 1  # snap_times[0] == 0.0 already recorded

    while state.t < config.final_time - 1e-12:
        dt = stable_dt(state, config)
        if next_snap < len(snap_times):
            gap = snap_times[next_snap] - state.t
            if gap > 1e-14:
                dt = min(dt, gap)
        state = step(state, config, g, dt=dt)
        dts.append(dt)
        series.append((state.t, g(state.t), state.boundary_gradient))
        grad_sq.append(_grad_sq(state.u.values, dx))
        while next_snap < len(snap_times) and state.t >= snap_times[next_snap] - 1e-12:
            snapshots.append(state)
            next_snap += 1

    return Trajectory(
        config=config,
        g=g,
        initial=initial,
        snapshots=tuple(snapshots),
        boundary_series=np.asarray(series),
        grad_sq_series=np.asarray(grad_sq),
        step_log=np.asarray(dts),
    )
