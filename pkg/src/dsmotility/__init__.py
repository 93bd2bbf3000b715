"""Simulator and bound-certification harness for reaction-diffusion systems
with density-suppressed motility:

    u_t = Lap(gamma(v) u) + alpha u F(w)
    v_t = D Lap(v) + u - v
    w_t = Lap(w) - u F(w)

on 1D/2D boxes with no-flux boundaries.  The package integrates the system
with a positivity-preserving IMEX scheme and numerically certifies the
structural bounds the system obeys: mass conservation, the maximum principle
for the nutrient, the positivity floor of the signal, and the comparison
bound of the signal against the smoothed cell density.
"""

from . import diagnostics, grid, helmholtz, kinetics, scenarios, stepper

__all__ = ["grid", "kinetics", "helmholtz", "stepper", "diagnostics", "scenarios"]

__version__ = "0.1.0"
