"""Uniform cell-centered grids with homogeneous-Neumann difference operators.

The domain is an interval [0, L] or a rectangle [0, Lx] x [0, Ly] split into
n uniform cells per axis; unknowns live at cell centers x_i = (i + 1/2) h.
No-flux boundaries are realized with mirror ghost cells (ghost value equals
the adjacent interior value), which makes the discrete Laplacian exactly
conservative: the cell sum of ``laplacian(f)`` telescopes to the boundary
fluxes, which are zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "make_grid",
    "make_field",
    "constant_field",
    "laplacian",
    "integrate",
    "grad_sq_integral",
    "norm_lp",
    "min_val",
    "max_val",
    "neumann_eigenvalue",
    "write_snapshot",
    "read_snapshot",
]


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered mesh of an interval (dim=1) or rectangle (dim=2).

    Attributes
    ----------
    dim : 1 or 2
    n : cells per axis
    L : physical extent per axis
    h : spacing per axis, h = L / n
    """

    dim: int
    n: tuple[int, ...]
    L: tuple[float, ...]
    h: tuple[float, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def ncells(self) -> int:
        return int(np.prod(self.n))

    @property
    def volume(self) -> float:
        """|Omega|, the measure of the domain."""
        return float(np.prod(self.L))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    def axis_centers(self, axis: int) -> np.ndarray:
        """Cell-center coordinates along one axis."""
        return (np.arange(self.n[axis]) + 0.5) * self.h[axis]

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays broadcastable to ``shape`` (x, and y when 2D)."""
        if self.dim == 1:
            return (self.axis_centers(0),)
        x = self.axis_centers(0)[:, None]
        y = self.axis_centers(1)[None, :]
        return x, y


@dataclass(frozen=True)
class Field:
    """One real value per grid cell.  Values are read-only after construction."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values.flags.writeable = False


def make_grid(dim, n, L) -> Grid:
    """Build a uniform cell-centered grid.

    ``n`` and ``L`` are scalars for dim=1 and length-2 sequences for dim=2
    (scalars are broadcast to both axes).
    """
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    n_t = tuple(int(v) for v in (np.atleast_1d(n)))
    L_t = tuple(float(v) for v in (np.atleast_1d(L)))
    if len(n_t) == 1:
        n_t = n_t * dim
    if len(L_t) == 1:
        L_t = L_t * dim
    if len(n_t) != dim or len(L_t) != dim:
        raise ValueError(f"need {dim} entries for n and L, got n={n}, L={L}")
    if any(v < 3 for v in n_t):
        raise ValueError(f"need at least 3 cells per axis, got n={n_t}")
    if any(v <= 0.0 for v in L_t):
        raise ValueError(f"extents must be positive, got L={L_t}")
    h_t = tuple(Li / ni for ni, Li in zip(n_t, L_t))
    return Grid(dim=dim, n=n_t, L=L_t, h=h_t)


def make_field(grid: Grid, values) -> Field:
    """Wrap values (array or scalar) into a validated Field on ``grid``."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(grid.shape, float(arr))
    if arr.shape != grid.shape:
        raise ValueError(f"values shape {arr.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field values must be finite")
    return Field(grid, np.ascontiguousarray(arr))


def constant_field(grid: Grid, value: float) -> Field:
    return make_field(grid, float(value))


def _laplacian_values(a: np.ndarray, h: tuple[float, ...]) -> np.ndarray:
    # Flux form: zero flux through boundary faces, so the cell sum telescopes
    # to round-off.
    out = np.zeros_like(a)
    for ax in range(a.ndim):
        q = np.diff(a, axis=ax) / (h[ax] * h[ax])
        head = [slice(None)] * a.ndim
        tail = [slice(None)] * a.ndim
        head[ax] = slice(None, -1)
        tail[ax] = slice(1, None)
        out[tuple(head)] += q
        out[tuple(tail)] -= q
    return out


def laplacian(f: Field) -> Field:
    """Second-order Neumann Laplacian (mirror ghost cells)."""
    return Field(f.grid, _laplacian_values(f.values, f.grid.h))


def integrate(f: Field) -> float:
    """Midpoint quadrature: cell sum times cell volume (exact for linears)."""
    return float(f.values.sum()) * f.grid.cell_volume


def grad_sq_integral(f: Field) -> float:
    """Integral of |grad f|^2 over interior faces; zero iff f is constant."""
    g = f.grid
    total = 0.0
    for ax in range(g.dim):
        d = np.diff(f.values, axis=ax) / g.h[ax]
        total += float((d * d).sum())
    return total * g.cell_volume


def norm_lp(f: Field, p) -> float:
    """L^p norm with the midpoint quadrature; p = inf gives max |f|."""
    if p == np.inf or p == "inf":
        return float(np.max(np.abs(f.values)))
    p = float(p)
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    return float((np.abs(f.values) ** p).sum() * f.grid.cell_volume) ** (1.0 / p)


def min_val(f: Field) -> float:
    return float(f.values.min())


def max_val(f: Field) -> float:
    return float(f.values.max())


def neumann_eigenvalue(grid: Grid, k, axis: int = 0) -> float:
    """Eigenvalue of the discrete Neumann Laplacian for the cosine mode
    cos(k pi x / L) sampled at cell centers along ``axis``:
    lambda_k = -(4/h^2) sin^2(k pi h / (2 L)).
    """
    h = grid.h[axis]
    L = grid.L[axis]
    s = np.sin(k * np.pi * h / (2.0 * L))
    return float(-(4.0 / (h * h)) * s * s)


# ---------------------------------------------------------------------------
# Snapshot file format: plain text, one header line then one value per line
# in row-major order, 17 significant digits (lossless double round-trip).
# ---------------------------------------------------------------------------

_SNAPSHOT_NAMES = ("u", "v", "w", "g")


def write_snapshot(path, f: Field, t: float, name: str) -> None:
    """Write a field snapshot; ``name`` must be one of u, v, w, g."""
    if name not in _SNAPSHOT_NAMES:
        raise ValueError(f"snapshot name must be one of {_SNAPSHOT_NAMES}, got {name!r}")
    g = f.grid
    parts = [f"# t={t:.17g}", f"dim={g.dim}", f"nx={g.n[0]}"]
    if g.dim == 2:
        parts.append(f"ny={g.n[1]}")
    parts.append(f"Lx={g.L[0]:.17g}")
    if g.dim == 2:
        parts.append(f"Ly={g.L[1]:.17g}")
    parts.append(f"name={name}")
    lines = [" ".join(parts)]
    lines.extend(f"{v:.17g}" for v in f.values.ravel(order="C"))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_snapshot(path) -> tuple[Field, float, str]:
    """Read a snapshot file back; returns (field, t, name)."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing snapshot header line")
        meta = {}
        for tok in header.lstrip("#").split():
            key, _, val = tok.partition("=")
            meta[key] = val
        try:
            t = float(meta["t"])
            dim = int(meta["dim"])
            name = meta["name"]
        except KeyError as exc:
            raise ValueError(f"{path}: header missing key {exc}") from exc
        if dim == 1:
            grid = make_grid(1, int(meta["nx"]), float(meta["Lx"]))
        else:
            grid = make_grid(
                2,
                (int(meta["nx"]), int(meta["ny"])),
                (float(meta["Lx"]), float(meta["Ly"])),
            )
        values = np.loadtxt(fh, dtype=np.float64, ndmin=1)
    if values.size != grid.ncells:
        raise ValueError(
            f"{path}: expected {grid.ncells} values, found {values.size}"
        )
    return make_field(grid, values.reshape(grid.shape, order="C")), t, name
