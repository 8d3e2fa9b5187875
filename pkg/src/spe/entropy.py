"""Kruzhkov entropy pairs and the weak entropy inequality with boundary trace.

For each constant c the pair is eta(u) = |u - c|, q(u) = sgn(u - c)(u^3 - c^3).
A bounded solution is admissible when, for every nonnegative compactly
supported test function phi,

    II (|u-c| phi_t + sgn(u-c)(u^3-c^3) phi_x) dt dx
      + II sgn(u-c) P phi dt dx
      + I  sgn(g-c) ((trace)^3 - c^3) phi(t,0) dt
      + I  |u0-c| phi(0,x) dx   >=  0,

with the trace taken at the first interior node (the Dirichlet node itself
carries g and says nothing about the interior limit).  The checker evaluates
the left-hand side by space-time trapezoidal quadrature over the snapshot
grid and reports it as the residual; admissibility means residual >= -tol
with tol scaled by the quadrature resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scheme import Trajectory

__all__ = [
    "EntropyPair",
    "kruzhkov_flux",
    "BumpProfile",
    "TestFunction",
    "make_bump_family",
    "TraceRecord",
    "extract_trace",
    "entropy_residual",
    "entropy_tolerance",
]


def kruzhkov_flux(u, c):
    """sgn(u - c) * (u^3 - c^3), with sgn(0) = 0.  Works on scalars and arrays."""
    return np.sign(u - c) * (u**3 - c**3)


@dataclass(frozen=True)
class EntropyPair:
    """Kruzhkov entropy/flux pair for the constant c."""

    c: float

    def eta(self, u):
        return np.abs(u - self.c)

    def q(self, u):
        return kruzhkov_flux(u, self.c)


@dataclass(frozen=True)
class BumpProfile:
    """One axis factor of a separable test function.

    Interior profiles are (1 - z^2)^3 with z = -1..1 across the support, so
    they vanish with two derivatives at both ends.  Edge profiles take their
    maximum at the lower end of the support (used for tiles touching t=0 or
    x=0, where the inequality's initial/boundary terms must be activated).
    """

    lo: float
    hi: float
    edge_at_lo: bool = False

    def __post_init__(self) -> None:
        if not self.hi > self.lo:
            raise ValueError("profile support must have positive length")

    def value(self, s):
        s = np.asarray(s, dtype=float)
        if self.edge_at_lo:
            z = (s - self.lo) / (self.hi - self.lo)
        else:
            z = (2.0 * s - (self.lo + self.hi)) / (self.hi - self.lo)
        inside = (z > -1.0) & (z < 1.0) if not self.edge_at_lo else (z >= 0.0) & (z < 1.0)
        out = np.zeros_like(z)
        zi = z[inside]
        out[inside] = (1.0 - zi**2) ** 3
        return out

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        if self.edge_at_lo:
            z = (s - self.lo) / (self.hi - self.lo)
            scale = 1.0 / (self.hi - self.lo)
            inside = (z >= 0.0) & (z < 1.0)
        else:
            z = (2.0 * s - (self.lo + self.hi)) / (self.hi - self.lo)
            scale = 2.0 / (self.hi - self.lo)
            inside = (z > -1.0) & (z < 1.0)
        out = np.zeros_like(z)
        zi = z[inside]
        out[inside] = -6.0 * zi * (1.0 - zi**2) ** 2 * scale
        return out


@dataclass(frozen=True)
class TestFunction:
    """Separable nonnegative bump phi(t, x) = pt(t) * px(x)."""

    pt: BumpProfile
    px: BumpProfile

    @property
    def t_support(self) -> tuple:
        return (self.pt.lo, self.pt.hi)

    @property
    def x_support(self) -> tuple:
        return (self.px.lo, self.px.hi)

    def phi(self, t, x):
        return np.outer(self.pt.value(t), self.px.value(x))

    def dphi_dt(self, t, x):
        return np.outer(self.pt.derivative(t), self.px.value(x))

    def dphi_dx(self, t, x):
        return np.outer(self.pt.value(t), self.px.derivative(x))


def _axis_profiles(lo: float, hi: float, count: int) -> list:
    width = (hi - lo) / count
    profiles = []
    for j in range(count):
        a = lo + j * width
        edge = count >= 2 and j == 0 and abs(lo) < 1e-300
        profiles.append(BumpProfile(lo=a, hi=a + width, edge_at_lo=edge))
    return profiles


def make_bump_family(
    t_range: tuple, x_range: tuple, counts: tuple
) -> list:
    """kt*kx tensor bumps tiling [t0,t1] x [x0,x1].

    With two or more tiles along an axis that starts at 0, the first tile
    uses an edge profile (maximum on the axis), so the family activates the
    initial-datum and boundary-trace terms of the inequality.  A single tile
    is a plain interior bump peaking at the rectangle center.
    """
    kt, kx = counts
    if kt < 1 or kx < 1:
        raise ValueError("counts must be >= 1")
    return [
        TestFunction(pt=p_t, px=p_x)
        for p_t in _axis_profiles(t_range[0], t_range[1], kt)
        for p_x in _axis_profiles(x_range[0], x_range[1], kx)
    ]


@dataclass(frozen=True)
class TraceRecord:
    """Numerical boundary trace u(t, x_1) sampled at snapshot times."""

    times: np.ndarray
    u_trace: np.ndarray

    def __post_init__(self) -> None:
        if len(self.times) != len(self.u_trace):
            raise ValueError("times and trace values must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trace times must be strictly increasing")


def extract_trace(traj: Trajectory) -> TraceRecord:
    """Boundary trace taken at the first interior node x_1 = dx.

    For viscous runs this equals g(t) + dx * du/dx(t,0) + O(dx^2); the
    Dirichlet node itself is pinned to g and carries no interior information.
    """
    times = np.array([s.t for s in traj.snapshots])
    vals = np.array([float(s.u.values[1]) for s in traj.snapshots])
    return TraceRecord(times=times, u_trace=vals)


def entropy_tolerance(phi: TestFunction, traj: Trajectory) -> float:
    """Quadrature tolerance 10 * (dx + dt_snap) * scale(phi).

    scale(phi) is the largest of sup|phi|, sup|phi_t|, sup|phi_x| over the
    snapshot-grid quadrature points.  The constant 10 is validated against
    the exact moving-shock solution of the source-free cubic conservation
    law (see the acceptance suite).
    """
    times = np.array([s.t for s in traj.snapshots])
    xs = traj.config.grid.nodes
    dt_snap = float(np.max(np.diff(times)))
    dx = traj.config.grid.dx
    scale = max(
        float(np.max(np.abs(phi.phi(times, xs)))),
        float(np.max(np.abs(phi.dphi_dt(times, xs)))),
        float(np.max(np.abs(phi.dphi_dx(times, xs)))),
    )
    return 10.0 * (dx + dt_snap) * scale


def entropy_residual(
    traj: Trajectory,
    pair: EntropyPair,
    phi: TestFunction,
    trace: TraceRecord,
) -> float:
    """Space-time quadrature of the inequality's left-hand side.

    Nonnegative (up to quadrature tolerance) for admissible solutions.  The
    nonlocal term is dropped when the trajectory was computed with the
    source disabled (shock-validation runs solve the pure conservation law,
    whose inequality has no source term).
    """
    grid = traj.config.grid
    T = traj.config.final_time
    tol = 1e-9
    if not (
        -tol <= phi.t_support[0]
        and phi.t_support[1] <= T + tol
        and -tol <= phi.x_support[0]
        and phi.x_support[1] <= grid.length + tol
    ):
        raise ValueError("test function support exceeds the computed domain")

    times = np.array([s.t for s in traj.snapshots])
    if len(trace.times) != len(times) or not np.allclose(
        trace.times, times, atol=1e-10
    ):
        raise ValueError("trace record does not match the trajectory snapshots")
    xs = grid.nodes
    U = np.stack([s.u.values for s in traj.snapshots])
    c = pair.c

    # trapezoid weights in t (general spacing) and x (uniform)
    wt = np.zeros_like(times)
    dt = np.diff(times)
    wt[:-1] += 0.5 * dt
    wt[1:] += 0.5 * dt
    wx = np.full_like(xs, grid.dx)
    wx[0] *= 0.5
    wx[-1] *= 0.5
    W = np.outer(wt, wx)

    sgn = np.sign(U - c)
    interior = np.sum(
        W * (np.abs(U - c) * phi.dphi_dt(times, xs)
             + sgn * (U**3 - c**3) * phi.dphi_dx(times, xs))
    )

    source = 0.0
    if traj.config.include_source:
        P = np.stack([s.P.values for s in traj.snapshots])
        source = np.sum(W * sgn * P * phi.phi(times, xs))

    g_vals = np.array([traj.g(t) for t in times])
    phi_t0 = phi.phi(times, np.array([0.0]))[:, 0]
    boundary = np.sum(
        wt * np.sign(g_vals - c) * (trace.u_trace**3 - c**3) * phi_t0
    )

    u0 = traj.initial.u.values
    phi_0x = phi.phi(np.array([0.0]), xs)[0]
    initial = np.sum(wx * np.abs(u0 - c) * phi_0x)

    return float(interior + source + boundary + initial)
