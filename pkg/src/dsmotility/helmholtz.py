"""Screened-Poisson solves (I - kappa*Lap) g = f under no-flux boundaries.

This operator is the workhorse of the whole package: it smooths the cell
density into the auxiliary comparison field and performs every implicit
diffusion half-step.  Two backends:

* ``spectral`` diagonalizes the cell-centered Neumann stencil in the DCT-II
  basis (exact up to round-off on uniform grids),
* ``cg`` is a matrix-free Jacobi-preconditioned conjugate gradient, kept as
  the portable cross-check.

Both inherit the structural properties of the continuous inverse operator:
mean preservation, positivity preservation, the comparison principle, and
the max principle; the test-suite pins all four.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from .grid import Field, Grid, _laplacian_values, laplacian

__all__ = [
    "HelmholtzProblem",
    "SolverConvergenceError",
    "solve",
    "solve_field",
    "solve_values",
    "apply_operator",
    "solve_spectral",
    "solve_cg",
]

DEFAULT_TOL = 1e-12


class SolverConvergenceError(RuntimeError):
    """CG failed to reach the requested residual within the iteration cap."""

    def __init__(self, iterations: int, rel_residual: float, tol: float):
        self.iterations = iterations
        self.rel_residual = rel_residual
        self.tol = tol
        super().__init__(
            f"CG did not converge: rel residual {rel_residual:.3e} > tol {tol:.3e} "
            f"after {iterations} iterations"
        )


@dataclass(frozen=True)
class HelmholtzProblem:
    """One solve of (I - kappa*Lap) g = f.

    kappa >= 0 (kappa = 0 degenerates to the identity); the operator is
    symmetric positive definite, so both backends are well posed.
    """

    grid: Grid
    kappa: float
    f: Field
    backend: str = "spectral"
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.kappa < 0.0:
            raise ValueError("kappa must be non-negative")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.backend not in ("spectral", "cg"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.f.grid is not self.grid and self.f.grid != self.grid:
            raise ValueError("right-hand side lives on a different grid")


@lru_cache(maxsize=32)
def _axis_eigenvalues(n: int, h: float) -> np.ndarray:
    """Neumann-stencil eigenvalues per DCT-II mode along one axis."""
    k = np.arange(n)
    lam = -(4.0 / (h * h)) * np.sin(k * np.pi / (2 * n)) ** 2
    lam.flags.writeable = False
    return lam


@lru_cache(maxsize=32)
def _eigenvalue_sum(n: tuple[int, ...], h: tuple[float, ...]) -> np.ndarray:
    if len(n) == 1:
        lam = _axis_eigenvalues(n[0], h[0]).copy()
    else:
        lam = (_axis_eigenvalues(n[0], h[0])[:, None]
               + _axis_eigenvalues(n[1], h[1])[None, :])
    lam.flags.writeable = False
    return lam


def apply_operator(grid: Grid, kappa: float, g: Field) -> Field:
    """Forward operator g - kappa*Lap(g), used for residual checks."""
    if kappa == 0.0:
        return g
    return Field(grid, g.values - kappa * laplacian(g).values)


def _solve_spectral_values(a: np.ndarray, grid: Grid, kappa: float) -> np.ndarray:
    lam = _eigenvalue_sum(grid.n, grid.h)
    fhat = scipy.fft.dctn(a, type=2, norm="ortho")
    fhat /= 1.0 - kappa * lam
    return scipy.fft.idctn(fhat, type=2, norm="ortho")


def solve_spectral(p: HelmholtzProblem) -> Field:
    """Exact solve by DCT-II diagonalization of the Neumann stencil."""
    if p.kappa == 0.0:
        return p.f
    return Field(p.grid, _solve_spectral_values(p.f.values, p.grid, p.kappa))


def _operator_diagonal(grid: Grid, kappa: float) -> np.ndarray:
    diag = np.ones(grid.shape)
    for ax in range(grid.dim):
        row = np.full(grid.n[ax], 2.0)
        row[0] = row[-1] = 1.0
        shape = [1] * grid.dim
        shape[ax] = grid.n[ax]
        diag = diag + (kappa / grid.h[ax] ** 2) * row.reshape(shape)
    return diag


def solve_cg(p: HelmholtzProblem) -> Field:
    """Matrix-free Jacobi-preconditioned CG with initial guess f."""
    if p.kappa == 0.0:
        return p.f
    grid, kappa = p.grid, p.kappa
    b = p.f.values
    inv_diag = 1.0 / _operator_diagonal(grid, kappa)

    def op(x):
        return x - kappa * _laplacian_values(x, grid.h)

    b_norm = float(np.sqrt(np.vdot(b, b).real))
    if b_norm == 0.0:
        return Field(grid, np.zeros_like(b))

    x = b.copy()
    r = b - op(x)
    z = inv_diag * r
    d = z.copy()
    rz = float(np.vdot(r, z).real)
    max_iter = 10 * grid.ncells
    for it in range(1, max_iter + 1):
        ad = op(d)
        alpha = rz / float(np.vdot(d, ad).real)
        x += alpha * d
        r -= alpha * ad
        res = float(np.sqrt(np.vdot(r, r).real))
        if res <= p.tol * b_norm:
            return Field(grid, x)
        z = inv_diag * r
        rz_new = float(np.vdot(r, z).real)
        d = z + (rz_new / rz) * d
        rz = rz_new
    raise SolverConvergenceError(max_iter, res / b_norm, p.tol)


def solve(p: HelmholtzProblem) -> Field:
    """Solve the problem with its configured backend."""
    if p.backend == "spectral":
        return solve_spectral(p)
    return solve_cg(p)


def solve_field(f: Field, kappa: float, backend: str = "spectral",
                tol: float = DEFAULT_TOL) -> Field:
    """Convenience wrapper: solve (I - kappa*Lap) g = f on f's grid."""
    return solve(HelmholtzProblem(f.grid, kappa, f, backend=backend, tol=tol))


def solve_values(a: np.ndarray, grid: Grid, kappa: float,
                 backend: str = "spectral", tol: float = DEFAULT_TOL) -> np.ndarray:
    """Array-level solve used by the time stepper's inner loop."""
    if kappa == 0.0:
        return a
    if backend == "spectral":
        return _solve_spectral_values(a, grid, kappa)
    return solve_cg(HelmholtzProblem(grid, kappa, Field(grid, a), "cg", tol)).values
