"""Shared test utilities: dense operator assembly and random fields."""

from __future__ import annotations

import numpy as np

from ieqflow import Field, Grid


def dense_matrix(apply_fn, grid: Grid) -> np.ndarray:
    """Assemble the matrix of a linear field operator column by column."""
    n = grid.num_points
    mat = np.zeros((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        mat[:, j] = apply_fn(Field(grid, e.reshape(grid.shape))).values.ravel()
    return mat


def random_field(grid: Grid, rng: np.random.Generator, scale: float = 1.0, offset: float = 0.0) -> Field:
    return Field(grid, offset + scale * rng.standard_normal(grid.shape))


def random_mean_zero_field(grid: Grid, rng: np.random.Generator, scale: float = 1.0) -> Field:
    vals = scale * rng.standard_normal(grid.shape)
    return Field(grid, vals - vals.mean())


def smooth_field(grid: Grid, amplitude: float = 0.1, mean_value: float = 0.3) -> Field:
    """Low-mode deterministic field, handy as a well-resolved initial state."""
    coords = grid.coordinates()
    vals = np.zeros(grid.shape)
    for axis, x in enumerate(coords):
        k = 2.0 * np.pi / grid.lengths[axis]
        vals = vals + np.cos(k * x) + 0.3 * np.sin(2.0 * k * x + 0.4)
    return Field(grid, mean_value + amplitude * vals)
