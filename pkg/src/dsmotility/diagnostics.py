"""Monitored functionals and bound certificates for simulation trajectories.

Per snapshot this module records masses, extrema and norms of the solution
triple, the smoothed density g solving (I - D*Lap) g = u, the energy of g,
and two kinds of structural checks:

* the comparison certificate  v <= (g + C3) / (1 - gamma(C1)/D), built from
  a constant C1 with gamma(C1) = D/2, C2 = C1 * gamma(v_floor) with v_floor
  the running minimum of v, and C3 = max(C2/D, max(v0 - g0 - Gamma(v0)))
  where Gamma(s) is the scaled antiderivative of gamma from C1;
* residuals of two exact identities of the smoothed density: its pointwise
  evolution law (residual_identity6) and its energy balance
  (residual_identity21), both of which must shrink at first order in dt.

The record layout doubles as the CSV schema for run outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields as dataclass_fields

import numpy as np

from . import helmholtz
from .grid import Field, grad_sq_integral, integrate, norm_lp
from .kinetics import IntakeSpec, MotilitySpec, find_c1
from .stepper import SolverConfig, State

__all__ = [
    "DiagnosticsRecord",
    "CertificateParams",
    "DiagnosticsCollector",
    "compute_g",
    "check_v_certificate",
    "certificate_params",
    "residual_identity6",
    "residual_identity21",
    "equilibrium_value",
    "equilibrium_distance",
    "record_field_names",
    "records_to_csv",
    "write_records_csv",
]


def compute_g(s: State, D: float, backend: str = "spectral",
              tol: float = helmholtz.DEFAULT_TOL) -> Field:
    """Smoothed cell density: solve (I - D*Lap) g = u."""
    return Field(s.grid, helmholtz.solve_values(s.u.values, s.grid, D, backend, tol))


@dataclass(frozen=True)
class CertificateParams:
    """Explicit constants of the discrete comparison bound for v."""

    c1: float
    gamma_c1: float
    c2: float
    c3: float
    denominator: float      # 1 - gamma(c1)/D

    def __post_init__(self):
        if self.denominator <= 0.0:
            raise ValueError(
                f"certificate denominator 1 - gamma(c1)/D = {self.denominator:g} "
                "is not positive; c1 selection failed its contract"
            )


def certificate_params(motility: MotilitySpec, D: float, v_floor: float,
                       initial_excess: float) -> CertificateParams:
    """Assemble the certificate constants.

    ``v_floor`` is the running minimum of v over the trajectory so far;
    ``initial_excess`` is max over cells of v0 - g0 - Gamma(v0) (clipped
    below at zero implicitly through the max with c2/D).
    """
    c1 = find_c1(motility, D)
    gamma_c1 = float(motility.value(c1))
    c2 = c1 * float(motility.value(v_floor))
    c3 = max(c2 / D, initial_excess)
    return CertificateParams(
        c1=c1, gamma_c1=gamma_c1, c2=c2, c3=c3,
        denominator=1.0 - gamma_c1 / D,
    )


def initial_certificate_excess(s0: State, g0: Field, motility: MotilitySpec,
                               D: float) -> float:
    """max over cells of v0 - g0 - Gamma(v0), the start-up constant of the
    comparison bound."""
    c1 = find_c1(motility, D)
    v0 = s0.v.values.ravel()
    gamma_of_v0 = np.array([motility.antiderivative(float(x), c1, D) for x in v0])
    excess = v0 - g0.values.ravel() - gamma_of_v0
    return float(excess.max())


def check_v_certificate(s: State, g: Field, p: CertificateParams) -> float:
    """Slack of the bound v <= (g + C3)/denominator: min over cells of
    bound - v.  Non-negative slack (up to discretization slop) certifies
    the bound at this snapshot."""
    bound = (g.values + p.c3) / p.denominator
    return float((bound - s.v.values).min())


def _solve_d(values: np.ndarray, grid, D: float, backend: str, tol: float) -> np.ndarray:
    return helmholtz.solve_values(values, grid, D, backend, tol)


def residual_identity6(s_prev: State, s_cur: State, g_prev: Field, g_cur: Field,
                       dt: float, D: float, alpha: float,
                       motility: MotilitySpec, intake: IntakeSpec,
                       backend: str = "spectral",
                       tol: float = helmholtz.DEFAULT_TOL) -> float:
    """L2 norm of the discrete residual of the smoothed-density evolution law

        g_t + (1/D) gamma(v) u
          = (1/D) (I - D Lap)^{-1}[gamma(v) u] + alpha (I - D Lap)^{-1}[u F(w)]

    with a forward difference in time, everything else evaluated at the
    earlier state.  First-order in dt on smooth runs; vanishes at spatially
    homogeneous equilibria.
    """
    grid = s_prev.grid
    u, v, w = s_prev.u.values, s_prev.v.values, s_prev.w.values
    gu = motility.value(v) * u
    r = (g_cur.values - g_prev.values) / dt
    r = r + gu / D
    r = r - _solve_d(gu, grid, D, backend, tol) / D
    r = r - alpha * _solve_d(u * intake.value(w), grid, D, backend, tol)
    return norm_lp(Field(grid, r), 2)


def g_energy(g: Field, D: float) -> float:
    """E = (1/2)(integral g^2 + D integral |grad g|^2)."""
    return 0.5 * (integrate(Field(g.grid, g.values * g.values))
                  + D * grad_sq_integral(g))


def residual_identity21(s_prev: State, s_cur: State, g_prev: Field, g_cur: Field,
                        dt: float, D: float, alpha: float,
                        motility: MotilitySpec, intake: IntakeSpec) -> float:
    """Absolute residual of the energy balance of the smoothed density

        d/dt E(g) + (1/D) int gamma(v) u^2
          = (1/D) int gamma(v) u g + alpha int u F(w) g

    with E = (1/2)(int g^2 + D int |grad g|^2) and a forward difference for
    the time derivative."""
    grid = s_prev.grid
    u, v, w = s_prev.u.values, s_prev.v.values, s_prev.w.values
    g0 = g_prev.values
    gam = motility.value(v)
    de = (g_energy(g_cur, D) - g_energy(g_prev, D)) / dt
    dissip = integrate(Field(grid, gam * u * u)) / D
    src1 = integrate(Field(grid, gam * u * g0)) / D
    src2 = alpha * integrate(Field(grid, u * intake.value(w) * g0))
    return abs(de + dissip - src1 - src2)


def equilibrium_value(mass_u0: float, mass_w0: float, alpha: float,
                      volume: float) -> float:
    """Homogeneous equilibrium density (mass_u0 + alpha*mass_w0)/|Omega|."""
    return (mass_u0 + alpha * mass_w0) / volume


def equilibrium_distance(s: State, alpha: float, mass_u0: float,
                         mass_w0: float) -> tuple[float, float, float]:
    """Sup-norm distances (|u - u*|, |v - u*|, |w|) from the homogeneous
    equilibrium (u*, u*, 0) implied by the conserved initial masses."""
    u_star = equilibrium_value(mass_u0, mass_w0, alpha, s.grid.volume)
    du = float(np.abs(s.u.values - u_star).max())
    dv = float(np.abs(s.v.values - u_star).max())
    dw = float(np.abs(s.w.values).max())
    return du, dv, dw


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One snapshot of every monitored functional (also the CSV row schema)."""

    t: float
    mass_u: float
    mass_w: float
    total: float                 # mass_u + alpha * mass_w
    min_u: float
    max_u: float
    min_v: float
    max_v: float
    min_w: float
    max_w: float
    u_l2: float
    u_linf: float
    gradv_sq: float              # integral |grad v|^2
    g_l2_sq: float               # integral g^2
    g_grad_sq: float             # D * integral |grad g|^2
    cert_slack: float
    window_u_sq: float           # trailing-window integral of int u^2
    window_dissipation: float    # trailing-window integral of int gamma(v) u^2
    clamp_mass: float
    residual_id6: float          # nan at t = 0 (needs a consecutive pair)
    residual_id21: float


def record_field_names() -> list[str]:
    return [f.name for f in dataclass_fields(DiagnosticsRecord)]


def records_to_csv(records) -> str:
    lines = [",".join(record_field_names())]
    for rec in records:
        lines.append(",".join(
            f"{getattr(rec, name):.17g}" for name in record_field_names()
        ))
    return "\n".join(lines) + "\n"


def write_records_csv(path, records) -> None:
    with open(path, "w") as fh:
        fh.write(records_to_csv(records))


def _trailing_integral(samples: list[tuple[float, float]], t: float,
                       tau: float) -> float:
    """Trapezoidal integral of the sampled series over [t - tau, t]."""
    lo = t - tau
    total = 0.0
    for (t0, a0), (t1, a1) in zip(samples, samples[1:]):
        if t1 <= lo:
            continue
        if t0 < lo:
            # partial first interval, linear interpolation at the cut
            frac = (lo - t0) / (t1 - t0)
            a0 = a0 + frac * (a1 - a0)
            t0 = lo
        total += 0.5 * (a0 + a1) * (t1 - t0)
    return total


class DiagnosticsCollector:
    """Stateful sink for ``stepper.run``: builds a DiagnosticsRecord per
    snapshot, tracking the running v floor, the trailing-window
    accumulators, and the certificate constants.

    Mutated only by the single trajectory that owns it.
    """

    def __init__(self, config: SolverConfig, window: float | None = None):
        self.config = config
        if window is None:
            window = min(1.0, config.t_end / 2.0) if config.t_end > 0 else 1.0
        self.window = window
        self.records: list[DiagnosticsRecord] = []
        self.v_floor = math.inf
        self.mass_u0 = None
        self.mass_w0 = None
        self._initial_excess = None
        self._u_sq_samples: list[tuple[float, float]] = []
        self._dissip_samples: list[tuple[float, float]] = []

    def __call__(self, prev, cur, dt, clamp_total):
        self.snapshot(prev, cur, dt, clamp_total)

    @property
    def certificate(self) -> CertificateParams:
        return certificate_params(self.config.motility, self.config.D,
                                  self.v_floor, self._initial_excess)

    def equilibrium_distance(self, s: State) -> tuple[float, float, float]:
        return equilibrium_distance(s, self.config.alpha, self.mass_u0, self.mass_w0)

    def snapshot(self, prev, cur: State, dt: float, clamp_total: float) -> DiagnosticsRecord:
        cfg = self.config
        grid = cur.grid
        u, v, w = cur.u, cur.v, cur.w

        g = compute_g(cur, cfg.D, cfg.helmholtz_backend, cfg.helmholtz_tol)
        if self._initial_excess is None:
            self._initial_excess = initial_certificate_excess(cur, g, cfg.motility, cfg.D)
            self.mass_u0 = integrate(u)
            self.mass_w0 = integrate(w)
        self.v_floor = min(self.v_floor, float(v.values.min()))

        gam = cfg.motility.value(v.values)
        int_u_sq = integrate(Field(grid, u.values * u.values))
        int_dissip = integrate(Field(grid, gam * u.values * u.values))
        self._u_sq_samples.append((cur.t, int_u_sq))
        self._dissip_samples.append((cur.t, int_dissip))

        if prev is not None:
            g_prev = compute_g(prev, cfg.D, cfg.helmholtz_backend, cfg.helmholtz_tol)
            r6 = residual_identity6(prev, cur, g_prev, g, dt, cfg.D, cfg.alpha,
                                    cfg.motility, cfg.intake,
                                    cfg.helmholtz_backend, cfg.helmholtz_tol)
            r21 = residual_identity21(prev, cur, g_prev, g, dt, cfg.D, cfg.alpha,
                                      cfg.motility, cfg.intake)
        else:
            r6 = math.nan
            r21 = math.nan

        mass_u = integrate(u)
        mass_w = integrate(w)
        rec = DiagnosticsRecord(
            t=cur.t,
            mass_u=mass_u,
            mass_w=mass_w,
            total=mass_u + cfg.alpha * mass_w,
            min_u=float(u.values.min()),
            max_u=float(u.values.max()),
            min_v=float(v.values.min()),
            max_v=float(v.values.max()),
            min_w=float(w.values.min()),
            max_w=float(w.values.max()),
            u_l2=norm_lp(u, 2),
            u_linf=norm_lp(u, np.inf),
            gradv_sq=grad_sq_integral(v),
            g_l2_sq=integrate(Field(grid, g.values * g.values)),
            g_grad_sq=cfg.D * grad_sq_integral(g),
            cert_slack=check_v_certificate(cur, g, self.certificate),
            window_u_sq=_trailing_integral(self._u_sq_samples, cur.t, self.window),
            window_dissipation=_trailing_integral(self._dissip_samples, cur.t, self.window),
            clamp_mass=clamp_total,
            residual_id6=r6,
            residual_id21=r21,
        )
        self.records.append(rec)
        return rec
