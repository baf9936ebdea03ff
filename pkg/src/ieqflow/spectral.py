"""Periodic uniform grids, nodal scalar fields, and spectral operators.

Differential operators act through the real FFT, so derivatives of grid
functions are exact up to round-off and the discrete integration-by-parts
identities hold (Parseval). Grids are uniform with periodic topology in
one or two dimensions.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "laplacian",
    "inv_neg_laplacian",
    "gradient",
    "apply_symbol",
    "inner",
    "norm_l2",
    "norm_l2_spectral",
    "seminorm_h1",
    "norm_linf",
    "mean",
    "subtract_mean",
    "save_field",
    "load_field",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid covering [0, L_1) x ... with N_i nodes per axis.

    Nodes sit at x_i = i * h with h = L / N; the point at x = L is the
    periodic image of x = 0 and is not stored.
    """

    shape: tuple[int, ...]
    lengths: tuple[float, ...]

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        lengths = tuple(float(ell) for ell in self.lengths)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "lengths", lengths)
        if len(shape) not in (1, 2):
            raise ValueError(f"grid must be 1D or 2D, got {len(shape)} axes")
        if len(lengths) != len(shape):
            raise ValueError("shape and lengths must have the same number of axes")
        for n in shape:
            if n < 4 or n % 2 != 0:
                raise ValueError(f"points per axis must be even and >= 4, got {n}")
        for ell in lengths:
            if not math.isfinite(ell) or ell <= 0:
                raise ValueError(f"axis extent must be positive and finite, got {ell}")

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(ell / n for ell, n in zip(self.lengths, self.shape))

    @property
    def num_points(self) -> int:
        return int(np.prod(self.shape))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def cell_volume(self) -> float:
        return self.volume / self.num_points

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Nodal coordinate arrays, meshgrid-expanded to the grid shape in 2D."""
        axes = [np.arange(n) * h for n, h in zip(self.shape, self.spacing)]
        if self.dim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))


@dataclass(frozen=True)
class Field:
    """Immutable real scalar field sampled at the nodes of a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.shape != self.grid.shape:
            raise ValueError(
                f"values shape {vals.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "Field":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "Field":
        """Sample ``fn(x)`` (1D) or ``fn(x, y)`` (2D) at the grid nodes."""
        return cls(grid, fn(*grid.coordinates()))


# --- cached spectral tables (keyed by the immutable Grid) ---------------------


@functools.lru_cache(maxsize=64)
def _k_squared(grid: Grid) -> np.ndarray:
    """|k|^2 on the real-FFT coefficient layout, k = 2*pi*m/L per axis."""
    if grid.dim == 1:
        (n,) = grid.shape
        (h,) = grid.spacing
        k = 2.0 * np.pi * np.fft.rfftfreq(n, d=h)
        k2 = k * k
    else:
        n1, n2 = grid.shape
        h1, h2 = grid.spacing
        k1 = 2.0 * np.pi * np.fft.fftfreq(n1, d=h1)
        k2nd = 2.0 * np.pi * np.fft.rfftfreq(n2, d=h2)
        k2 = k1[:, None] ** 2 + k2nd[None, :] ** 2
    k2.setflags(write=False)
    return k2


@functools.lru_cache(maxsize=64)
def _inv_k_squared(grid: Grid) -> np.ndarray:
    """1/|k|^2 with the zero mode annihilated."""
    k2 = _k_squared(grid)
    inv = np.zeros_like(k2)
    nonzero = k2 > 0
    inv[nonzero] = 1.0 / k2[nonzero]
    inv.setflags(write=False)
    return inv


@functools.lru_cache(maxsize=64)
def _mode_multiplicity(grid: Grid) -> np.ndarray:
    """Number of full-spectrum modes represented by each rfft bin (1 or 2)."""
    ncols = grid.shape[-1] // 2 + 1
    w = np.full(ncols, 2.0)
    w[0] = 1.0
    w[-1] = 1.0  # Nyquist column is self-conjugate for even N
    if grid.dim == 1:
        out = w
    else:
        out = np.broadcast_to(w, (grid.shape[0], ncols)).copy()
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=64)
def _gradient_wavenumbers(grid: Grid) -> tuple[np.ndarray, ...]:
    """Per-axis wavenumbers for first derivatives; Nyquist modes are zeroed."""
    if grid.dim == 1:
        (n,) = grid.shape
        (h,) = grid.spacing
        k = 2.0 * np.pi * np.fft.rfftfreq(n, d=h)
        k = k.copy()
        k[-1] = 0.0
        k.setflags(write=False)
        return (k,)
    n1, n2 = grid.shape
    h1, h2 = grid.spacing
    k1 = 2.0 * np.pi * np.fft.fftfreq(n1, d=h1)
    k1[n1 // 2] = 0.0
    k2 = 2.0 * np.pi * np.fft.rfftfreq(n2, d=h2)
    k2[-1] = 0.0
    kx = np.broadcast_to(k1[:, None], (n1, n2 // 2 + 1)).copy()
    ky = np.broadcast_to(k2[None, :], (n1, n2 // 2 + 1)).copy()
    kx.setflags(write=False)
    ky.setflags(write=False)
    return (kx, ky)


# --- operators ----------------------------------------------------------------


def _irfftn(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    return np.fft.irfftn(coeffs, s=grid.shape, axes=tuple(range(grid.dim)))


def apply_symbol(u: Field, symbol: np.ndarray) -> Field:
    """Multiply the spectral coefficients of ``u`` by a real symbol array."""
    coeffs = np.fft.rfftn(u.values)
    return Field(u.grid, _irfftn(symbol * coeffs, u.grid))


def laplacian(u: Field) -> Field:
    """Periodic spectral Laplacian; the output has zero mean by construction."""
    return apply_symbol(u, -_k_squared(u.grid))


def inv_neg_laplacian(u: Field) -> Field:
    """Unique mean-zero solution v of -lap(v) = u for mean-zero u.

    Raises ValueError when |mean(u)| exceeds 1e-10 * ||u||_inf.
    """
    tol = 1e-10 * norm_linf(u)
    if abs(mean(u)) > tol:
        raise ValueError(
            f"inv_neg_laplacian requires a mean-zero field, got mean {mean(u):.3e}"
        )
    return apply_symbol(u, _inv_k_squared(u.grid))


def gradient(u: Field) -> tuple[Field, ...]:
    """Nodal spectral gradient along each axis (odd derivative: Nyquist dropped).

    Note ``seminorm_h1`` is computed from the full spectrum including Nyquist
    modes; the nodal gradient here is intended for sup-norm diagnostics.
    """
    coeffs = np.fft.rfftn(u.values)
    out = []
    for k in _gradient_wavenumbers(u.grid):
        out.append(Field(u.grid, _irfftn(1j * k * coeffs, u.grid)))
    return tuple(out)


# --- inner products and norms ---------------------------------------------------


def _require_same_grid(u: Field, v: Field) -> None:
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")


def inner(u: Field, v: Field) -> float:
    """Discrete L^2 inner product (rectangle rule, exact for periodic trapezoid)."""
    _require_same_grid(u, v)
    return u.grid.cell_volume * float(np.dot(u.values.ravel(), v.values.ravel()))


def norm_l2(u: Field) -> float:
    return math.sqrt(max(inner(u, u), 0.0))


def _spectral_moment(u: Field, weight) -> float:
    coeffs = np.fft.rfftn(u.values)
    power = coeffs.real**2 + coeffs.imag**2
    total = float(np.sum(_mode_multiplicity(u.grid) * weight * power))
    return u.grid.cell_volume / u.grid.num_points * total


def norm_l2_spectral(u: Field) -> float:
    """L^2 norm evaluated from the spectral coefficients (Parseval)."""
    return math.sqrt(max(_spectral_moment(u, 1.0), 0.0))


def seminorm_h1(u: Field) -> float:
    """||grad u||_{L^2} evaluated spectrally with the full |k|^2 weight."""
    return math.sqrt(max(_spectral_moment(u, _k_squared(u.grid)), 0.0))


def norm_linf(u: Field) -> float:
    return float(np.max(np.abs(u.values)))


def mean(u: Field) -> float:
    return float(u.values.mean())


def subtract_mean(u: Field) -> Field:
    return Field(u.grid, u.values - u.values.mean())


# --- snapshot I/O ---------------------------------------------------------------


def save_field(u: Field, path) -> None:
    """Write a nodal snapshot as CSV.

    1D: two columns ``x,value``. 2D: a ``# grid N1 N2 L1 L2`` header line
    followed by the row-major value matrix, one grid row per line.
    """
    lines = []
    if u.grid.dim == 1:
        (x,) = u.grid.coordinates()
        lines.append("x,value")
        for xi, vi in zip(x, u.values):
            lines.append(f"{float(xi)!r},{float(vi)!r}")
    else:
        n1, n2 = u.grid.shape
        l1, l2 = u.grid.lengths
        lines.append(f"# grid {n1} {n2} {l1!r} {l2!r}")
        for row in u.values:
            lines.append(",".join(repr(float(v)) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_field(path) -> Field:
    """Read a snapshot written by :func:`save_field`.

    The 1D format carries no explicit extent; it is reconstructed from the
    node spacing, so the grid length round-trips only to floating precision.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty snapshot")
    if lines[0].startswith("# grid"):
        parts = lines[0].split()
        n1, n2 = int(parts[2]), int(parts[3])
        l1, l2 = float(parts[4]), float(parts[5])
        rows = [[float(tok) for tok in line.split(",")] for line in lines[1:]]
        values = np.asarray(rows)
        if values.shape != (n1, n2):
            raise ValueError(f"{path}: matrix shape {values.shape} != header ({n1}, {n2})")
        return Field(Grid((n1, n2), (l1, l2)), values)
    if lines[0] != "x,value":
        raise ValueError(f"{path}: unrecognized snapshot header {lines[0]!r}")
    data = np.array([[float(tok) for tok in line.split(",")] for line in lines[1:]])
    x, values = data[:, 0], data[:, 1]
    n = len(x)
    spacing = x[1] - x[0]
    return Field(Grid((n,), (n * spacing,)), values)

