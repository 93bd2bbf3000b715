"""IMEX time integration of the density-suppressed motility system

    u_t = Lap(gamma(v) u) + alpha u F(w)
    v_t = D Lap(v) + u - v
    w_t = Lap(w) - u F(w)

with no-flux boundaries.  The nonlinear cross-diffusion term is advanced
explicitly in conservative product form (Lap applied to the product
gamma(v)*u), the stiff linear diffusion of v and w implicitly through the
screened-Poisson solver.  Under the step-size guards the update is a convex
combination plus non-negative reaction, which yields discrete positivity,
the nutrient maximum principle, and exact conservation of
integral(u) + alpha*integral(w) up to round-off and logged clamping.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from . import helmholtz
from .grid import Field, Grid, _laplacian_values, integrate, make_field
from .kinetics import IntakeSpec, MotilitySpec

__all__ = [
    "State",
    "SolverConfig",
    "Forcing",
    "RunStats",
    "RunResult",
    "SimulationAbort",
    "NonFiniteFieldError",
    "BlowUpError",
    "init_state",
    "stable_dt",
    "step",
    "reference_stable_dt",
    "reference_step",
    "run",
]

log = logging.getLogger(__name__)

# Fraction of the initial nutrient mass above which per-step clamping is
# suspicious and logged as a warning.
CLAMP_WARN_FRACTION = 1e-8


class SimulationAbort(RuntimeError):
    """Base class for run-terminating numerical failures."""

    def __init__(self, message: str, state: "State | None" = None):
        super().__init__(message)
        self.state = state


class NonFiniteFieldError(SimulationAbort):
    """A step produced NaN or Inf values."""


class BlowUpError(SimulationAbort):
    """The solution grew beyond the overflow guard (numerical blow-up),
    as opposed to producing non-finite values."""


@dataclass(frozen=True)
class State:
    """Time-stamped solution triple: cell density u >= 0, signal v > 0,
    nutrient w >= 0, all on the same grid."""

    t: float
    u: Field
    v: Field
    w: Field

    @property
    def grid(self) -> Grid:
        return self.u.grid


@dataclass(frozen=True)
class Forcing:
    """Optional source terms (manufactured-solution support).  Each entry is
    a callable of (coordinate arrays..., t) returning values broadcastable
    to the grid shape."""

    su: object = None
    sv: object = None
    sw: object = None


@dataclass(frozen=True)
class SolverConfig:
    """Physical constants, kinetics, and integrator settings for one run."""

    D: float
    alpha: float
    motility: MotilitySpec
    intake: IntakeSpec
    t_end: float
    cfl_safety: float = 0.4
    dt_max: float = math.inf
    overflow_guard: float = 1e12
    helmholtz_backend: str = "spectral"
    helmholtz_tol: float = helmholtz.DEFAULT_TOL
    record_every: float | None = None
    forcing: Forcing | None = None

    def __post_init__(self):
        if self.D <= 0.0:
            raise ValueError("D must be positive")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if not (0.0 < self.cfl_safety < 1.0):
            raise ValueError("cfl_safety must lie in (0, 1)")
        if self.t_end < 0.0:
            raise ValueError("t_end must be non-negative")
        if self.dt_max <= 0.0:
            raise ValueError("dt_max must be positive")
        if self.overflow_guard <= 0.0:
            raise ValueError("overflow_guard must be positive")
        if self.record_every is not None and self.record_every <= 0.0:
            raise ValueError("record_every must be positive")


def init_state(grid: Grid, u0, v0, w0) -> State:
    """Validate initial data and build the t = 0 state.

    Requires u0 >= 0 and not identically zero, v0 strictly positive, and
    w0 >= 0 (values may be arrays, scalars, or Fields on ``grid``).
    """
    u = u0 if isinstance(u0, Field) and u0.grid == grid else make_field(grid, getattr(u0, "values", u0))
    v = v0 if isinstance(v0, Field) and v0.grid == grid else make_field(grid, getattr(v0, "values", v0))
    w = w0 if isinstance(w0, Field) and w0.grid == grid else make_field(grid, getattr(w0, "values", w0))
    if float(u.values.min()) < 0.0:
        raise ValueError("u0 must be non-negative")
    if integrate(u) <= 0.0:
        raise ValueError("u0 must not be identically zero")
    if float(v.values.min()) <= 0.0:
        raise ValueError("v0 must be strictly positive everywhere")
    if float(w.values.min()) < 0.0:
        raise ValueError("w0 must be non-negative")
    return State(0.0, u, v, w)


def _diffusion_rate(grid: Grid) -> float:
    """Sum over axes of 1/h^2 (the explicit-diffusion stability factor);
    equals dim/h^2 on square cells."""
    return sum(1.0 / (h * h) for h in grid.h)


def stable_dt(s: State, c: SolverConfig) -> float:
    """Step-size guard for the IMEX scheme.

    cfl_safety times the smallest of: the explicit cross-diffusion limit
    h^2/(2 dim max gamma(v)), the nutrient-positivity reaction limit
    1/(max u * L_F), the growth limit 1/(alpha max F(w)), and dt_max.
    """
    gamma_max = c.motility.max_over(s.v.values)
    diff_guard = 1.0 / (2.0 * _diffusion_rate(s.grid) * gamma_max)

    u_max = float(s.u.values.max())
    w_max = float(s.w.values.max())
    lf = c.intake.lipschitz_bound(w_max)
    react_guard = 1.0 / (u_max * lf) if u_max * lf > 0.0 else math.inf

    f_max = c.intake.max_over(s.w.values)
    growth_guard = 1.0 / (c.alpha * f_max) if f_max > 0.0 else math.inf

    return c.cfl_safety * min(diff_guard, react_guard, growth_guard, c.dt_max)


def _eval_forcing(fn, grid: Grid, t: float):
    if fn is None:
        return None
    return np.broadcast_to(np.asarray(fn(*grid.meshgrid(), t), dtype=np.float64),
                           grid.shape)


def _clamp_negative(arr: np.ndarray, cell_volume: float) -> tuple[np.ndarray, float]:
    """Clamp negative cells to zero, returning the mass added by clamping."""
    mn = arr.min()
    if mn >= 0.0:
        return arr, 0.0
    clamped = -float(arr[arr < 0.0].sum()) * cell_volume
    return np.maximum(arr, 0.0), clamped


def _check_finite(state_in: State, t_new: float, **fields) -> None:
    for name, arr in fields.items():
        if not np.all(np.isfinite(arr)):
            raise NonFiniteFieldError(
                f"non-finite values in {name} at t = {t_new:.6g}", state_in
            )


def step(s: State, c: SolverConfig, dt: float) -> tuple[State, float]:
    """One IMEX step of size dt (caller guarantees dt <= stable_dt).

    Order of operations, everything read from the incoming state:
      1. implicit diffusion of w,
      2. the shared reaction field r = u F(w_diffused), computed once,
      3. explicit conservative update of u,
      4. nutrient consumption with negative-cell clamping,
      5. backward-Euler update of v via the screened-Poisson solve.

    Returns the new state and the (non-negative) mass added by clamping.
    """
    grid = s.grid
    u, v, w = s.u.values, s.v.values, s.w.values
    be, tol = c.helmholtz_backend, c.helmholtz_tol
    cell_volume = grid.cell_volume
    clamp_mass = 0.0

    w_diff = helmholtz.solve_values(w, grid, dt, be, tol)
    # Round-off from the solve may leave dust below zero; remove it before
    # the intake evaluation and account for it like any other clamp.
    w_diff, clamped = _clamp_negative(w_diff, cell_volume)
    clamp_mass += clamped

    r = u * c.intake.value(w_diff)

    du = _laplacian_values(c.motility.value(v) * u, grid.h) + c.alpha * r
    w_new = w_diff - dt * r
    v_rhs = v + dt * u

    if c.forcing is not None:
        su = _eval_forcing(c.forcing.su, grid, s.t)
        sv = _eval_forcing(c.forcing.sv, grid, s.t)
        sw = _eval_forcing(c.forcing.sw, grid, s.t)
        if su is not None:
            du = du + su
        if sw is not None:
            w_new = w_new + dt * sw
        if sv is not None:
            v_rhs = v_rhs + dt * sv

    u_new = u + dt * du
    w_new, clamped = _clamp_negative(w_new, cell_volume)
    clamp_mass += clamped
    v_new = helmholtz.solve_values(v_rhs / (1.0 + dt), grid,
                                   dt * c.D / (1.0 + dt), be, tol)

    t_new = s.t + dt
    _check_finite(s, t_new, u=u_new, v=v_new, w=w_new)
    return (
        State(t_new, Field(grid, u_new), Field(grid, v_new), Field(grid, w_new)),
        clamp_mass,
    )


def reference_stable_dt(s: State, c: SolverConfig) -> float:
    """Guard for the fully explicit reference scheme: additionally limited
    by the explicit diffusion of v (rate D) and w (rate 1)."""
    rate = _diffusion_rate(s.grid)
    return min(
        stable_dt(s, c),
        c.cfl_safety / (2.0 * rate * c.D),
        c.cfl_safety / (2.0 * rate),
    )


def reference_step(s: State, c: SolverConfig, dt: float) -> tuple[State, float]:
    """Forward Euler on all three equations with the same spatial operators;
    cross-validation oracle for the IMEX scheme."""
    grid = s.grid
    u, v, w = s.u.values, s.v.values, s.w.values

    r = u * c.intake.value(w)
    du = _laplacian_values(c.motility.value(v) * u, grid.h) + c.alpha * r
    dv = c.D * _laplacian_values(v, grid.h) + u - v
    dw = _laplacian_values(w, grid.h) - r

    if c.forcing is not None:
        su = _eval_forcing(c.forcing.su, grid, s.t)
        sv = _eval_forcing(c.forcing.sv, grid, s.t)
        sw = _eval_forcing(c.forcing.sw, grid, s.t)
        if su is not None:
            du = du + su
        if sv is not None:
            dv = dv + sv
        if sw is not None:
            dw = dw + sw

    u_new = u + dt * du
    v_new = v + dt * dv
    w_new, clamp_mass = _clamp_negative(w + dt * dw, grid.cell_volume)

    t_new = s.t + dt
    _check_finite(s, t_new, u=u_new, v=v_new, w=w_new)
    return (
        State(t_new, Field(grid, u_new), Field(grid, v_new), Field(grid, w_new)),
        clamp_mass,
    )


@dataclass
class RunStats:
    """Per-run bookkeeping collected by ``run``."""

    steps: int = 0
    clamp_mass: float = 0.0
    clamp_warnings: int = 0
    min_mass_u_delta: float = math.inf   # most negative per-step change of integral(u)
    wall_seconds: float = 0.0


@dataclass(frozen=True)
class RunResult:
    state: State
    stats: RunStats


def run(s0: State, c: SolverConfig, sink=None, stepper=step,
        dt_fn=None) -> RunResult:
    """Advance from s0 to t_end with adaptive steps (last step truncated).

    ``sink``, when given, is called as sink(prev_state, state, dt, clamp_total)
    at t = 0 (with prev_state None), at every crossing of ``record_every``,
    and at t_end.  ``stepper``/``dt_fn`` default to the IMEX scheme and its
    guard; pass ``reference_step``/``reference_stable_dt`` for the explicit
    oracle.
    """
    if dt_fn is None:
        dt_fn = stable_dt if stepper is step else reference_stable_dt
    t_start = time.perf_counter()
    stats = RunStats()
    s = s0
    mass_u = integrate(s.u)
    w0_mass = integrate(s.w)
    clamp_warn_level = CLAMP_WARN_FRACTION * w0_mass if w0_mass > 0 else CLAMP_WARN_FRACTION

    every = c.record_every
    if sink is not None:
        sink(None, s, 0.0, 0.0)
    next_record = every if every is not None else math.inf
    last_emit_t = 0.0

    t_tol = 1e-12 * max(1.0, c.t_end)
    while c.t_end - s.t > t_tol:
        dt = min(dt_fn(s, c), c.t_end - s.t)
        prev = s
        s, clamp = stepper(prev, c, dt)
        stats.steps += 1
        stats.clamp_mass += clamp
        if clamp > clamp_warn_level:
            stats.clamp_warnings += 1
            log.warning("step %d (t=%.6g): clamped nutrient mass %.3e",
                        stats.steps, s.t, clamp)

        mass_u_new = integrate(s.u)
        stats.min_mass_u_delta = min(stats.min_mass_u_delta, mass_u_new - mass_u)
        mass_u = mass_u_new

        if float(np.abs(s.u.values).max()) > c.overflow_guard:
            stats.wall_seconds = time.perf_counter() - t_start
            raise BlowUpError(
                f"numerical blow-up: max |u| exceeded {c.overflow_guard:g} "
                f"at t = {s.t:.6g}", s
            )

        if sink is not None and s.t >= next_record - 1e-9 * (every or 1.0):
            sink(prev, s, dt, stats.clamp_mass)
            last_emit_t = s.t
            while next_record <= s.t + 1e-9 * (every or 1.0):
                next_record += every

        if sink is not None and c.t_end - s.t <= t_tol and last_emit_t < s.t:
            sink(prev, s, dt, stats.clamp_mass)
            last_emit_t = s.t

    stats.wall_seconds = time.perf_counter() - t_start
    if stats.steps == 0:
        stats.min_mass_u_delta = 0.0
    return RunResult(state=s, stats=stats)
