"""Initial-condition generators for simulations and studies."""

from __future__ import annotations

import numpy as np

from .spectral import Field, Grid

__all__ = ["cosine_sum", "tanh_profile", "seeded_noise", "make_initial_condition"]

IC_KINDS = ("cosine-sum", "tanh-profile", "seeded-noise")


def cosine_sum(grid: Grid, amplitude: float, mean_value: float) -> Field:
    """Fixed low-mode cosine combination; smooth and deterministic.

    Intended for temporal refinement studies, where the initial data must be
    well resolved so the spatial error is negligible and shared across runs.
    """
    if grid.dim == 1:
        (x,) = grid.coordinates()
        (ell,) = grid.lengths
        kx = 2.0 * np.pi * x / ell
        profile = np.cos(kx) + 0.4 * np.cos(2.0 * kx + 0.7) + 0.2 * np.cos(3.0 * kx + 1.3)
    else:
        x, y = grid.coordinates()
        l1, l2 = grid.lengths
        kx = 2.0 * np.pi * x / l1
        ky = 2.0 * np.pi * y / l2
        profile = (
            np.cos(kx) * np.cos(ky)
            + 0.4 * np.cos(2.0 * kx + 0.7) * np.cos(ky + 0.4)
            + 0.2 * np.cos(kx + 1.1) * np.cos(3.0 * ky)
        )
    return Field(grid, mean_value + amplitude * profile)


def tanh_profile(grid: Grid, epsilon: float, amplitude: float = 1.0, mean_value: float = 0.0) -> Field:
    """Equilibrium-like interface profile of width ~ sqrt(2) * epsilon.

    1D: a slab occupying the middle half of the domain. 2D: a disk of radius
    L1/4 centered in the domain. The profile spans [-1, 1] before scaling by
    ``amplitude`` and shifting by ``mean_value``.
    """
    width = np.sqrt(2.0) * epsilon
    if grid.dim == 1:
        (x,) = grid.coordinates()
        (ell,) = grid.lengths
        profile = np.tanh((ell / 4.0 - np.abs(x - ell / 2.0)) / width)
    else:
        x, y = grid.coordinates()
        l1, l2 = grid.lengths
        r = np.sqrt((x - l1 / 2.0) ** 2 + (y - l2 / 2.0) ** 2)
        profile = np.tanh((l1 / 4.0 - r) / width)
    return Field(grid, mean_value + amplitude * profile)


def seeded_noise(grid: Grid, amplitude: float, mean_value: float, seed: int) -> Field:
    """Uniform random perturbation in [-amplitude, amplitude] about ``mean_value``.

    Reproducible for a fixed seed; the usual start for phase-separation demos.
    """
    rng = np.random.default_rng(int(seed))
    return Field(grid, mean_value + amplitude * rng.uniform(-1.0, 1.0, grid.shape))


def make_initial_condition(
    kind: str,
    grid: Grid,
    amplitude: float,
    mean_value: float,
    seed: int | None = None,
    epsilon: float | None = None,
) -> Field:
    if kind == "cosine-sum":
        return cosine_sum(grid, amplitude, mean_value)
    if kind == "tanh-profile":
        if epsilon is None:
            raise ValueError("tanh-profile needs the interface width epsilon")
        return tanh_profile(grid, epsilon, amplitude, mean_value)
    if kind == "seeded-noise":
        if seed is None:
            raise ValueError("seeded-noise needs a seed")
        return seeded_noise(grid, amplitude, mean_value, seed)
    raise ValueError(f"unknown initial-condition kind {kind!r}; expected one of {IC_KINDS}")
