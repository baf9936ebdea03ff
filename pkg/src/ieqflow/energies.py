"""Discrete energies of the original and quadratized systems, plus per-step reports."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potentials import PotentialSpec, eval_F
from .spectral import Field, norm_l2, seminorm_h1

__all__ = ["StepReport", "energy_modified", "energy_original", "energy_step_tolerance"]


def energy_modified(phi: Field, U: Field, epsilon: float) -> float:
    """Quadratized energy  integral( eps^2/2 |grad phi|^2 + U^2 )."""
    return 0.5 * epsilon**2 * seminorm_h1(phi) ** 2 + norm_l2(U) ** 2


def energy_original(phi: Field, potential: PotentialSpec, epsilon: float) -> float:
    """Free energy  integral( eps^2/2 |grad phi|^2 + F(phi) ).

    Equals the quadratized energy minus B * |domain| whenever U is consistent,
    i.e. U = sqrt(F(phi) + B) pointwise.
    """
    bulk = phi.grid.cell_volume * float(np.sum(eval_F(potential, phi.values)))
    return 0.5 * epsilon**2 * seminorm_h1(phi) ** 2 + bulk


def energy_step_tolerance(prev_energy: float, pcg_residual: float, w_norm: float) -> float:
    """Allowed single-step energy increase: round-off plus linear-solve slack."""
    return max(1e-10 * abs(prev_energy), 100.0 * pcg_residual * w_norm)


@dataclass(frozen=True)
class StepReport:
    """Diagnostics recorded by every time step.

    ``dissipation_defect`` is the absolute residual of the discrete energy
    identity of the step (the sum of all gradient/U bookkeeping terms plus
    the dissipation term, which vanishes in exact arithmetic). ``w_field``
    holds the chemical potential reconstructed after the solve.
    """

    energy_modified: float
    energy_original: float
    mass: float
    pcg_iterations: int
    pcg_residual: float
    dissipation_defect: float
    max_abs_phi: float
    w_field: Field
