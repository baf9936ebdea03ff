"""Linearly implicit, unconditionally energy stable Allen-Cahn time step.

One step advances (phi, U) through the quadratized system

    (phi1 - phi0)/dt + M(-eps^2 lap(phi1) + H0 U1) = 0,
    U1 = U0 + H0 (phi1 - phi0)/2,

with H0 = H(phi0) frozen. Eliminating U1 yields one symmetric positive
definite equation on the full space,

    [ 1/(M dt) - eps^2 lap + q ] phi1 = phi0/(M dt) - H0 U0 + q phi0,
    q = H0^2 / 2,

solved matrix-free by conjugate gradients with the constant-coefficient
spectral preconditioner obtained by replacing q with max(q). Mass is not
conserved by this flow; it is reported for monitoring only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energies import StepReport, energy_modified, energy_original
from .krylov import PcgConfig, SolverFailure, pcg
from .potentials import PotentialSpec, eval_H, initial_U
from .spectral import (
    Field,
    _k_squared,
    apply_symbol,
    laplacian,
    mean,
    norm_l2,
    seminorm_h1,
)

__all__ = ["AcConfig", "AcState", "ac_init", "ac_apply_operator", "ac_step"]


@dataclass(frozen=True)
class AcConfig:
    """Mobility M, interface width eps, step size dt, potential, solver knobs."""

    mobility: float
    epsilon: float
    dt: float
    potential: PotentialSpec
    pcg: PcgConfig = field(default_factory=PcgConfig)

    def __post_init__(self):
        for name in ("mobility", "epsilon", "dt"):
            val = float(getattr(self, name))
            if not np.isfinite(val) or val <= 0:
                raise ValueError(f"{name} must be positive and finite, got {val}")
            object.__setattr__(self, name, val)


@dataclass(frozen=True)
class AcState:
    phi: Field
    U: Field
    t: float

    def __post_init__(self):
        if self.phi.grid != self.U.grid:
            raise ValueError("phi and U must share a grid")


def ac_init(phi0: Field, cfg: AcConfig) -> AcState:
    """Initial state with the consistent auxiliary variable U = sqrt(F(phi0) + B)."""
    return AcState(phi=phi0, U=Field(phi0.grid, initial_U(cfg.potential, phi0.values)), t=0.0)


def ac_apply_operator(v: Field, Hn: Field, cfg: AcConfig) -> Field:
    """One-step operator v/(M dt) - eps^2 lap(v) + q v with q = Hn^2/2.

    Symmetric and positive definite on the full space: (Lv, v) is at least
    ||v||^2 / (M dt).
    """
    symbol = 1.0 / (cfg.mobility * cfg.dt) + cfg.epsilon**2 * _k_squared(v.grid)
    spectral_part = apply_symbol(v, symbol)
    qv = 0.5 * Hn.values * Hn.values * v.values
    return Field(v.grid, spectral_part.values + qv)


def ac_step(state: AcState, cfg: AcConfig) -> tuple[AcState, StepReport]:
    """Advance one step; returns the new state and its diagnostics."""
    grid = state.phi.grid
    dt, eps, M = cfg.dt, cfg.epsilon, cfg.mobility
    phi0 = state.phi.values
    U0 = state.U.values

    hn = np.asarray(eval_H(cfg.potential, phi0))
    q = 0.5 * hn * hn
    b = Field(grid, phi0 / (M * dt) - hn * U0 + q * phi0)

    hn_field = Field(grid, hn)
    cbar = float(np.max(q))
    k2 = _k_squared(grid)
    pinv_symbol = 1.0 / (1.0 / (M * dt) + eps**2 * k2 + cbar)

    def apply_A(v: Field) -> Field:
        return ac_apply_operator(v, hn_field, cfg)

    def apply_Pinv(r: Field) -> Field:
        return apply_symbol(r, pinv_symbol)

    result = pcg(apply_A, apply_Pinv, b, state.phi, cfg.pcg)
    if not result.converged:
        raise SolverFailure(
            f"conjugate gradient stalled at t={state.t:.6g}: "
            f"{result.iterations} iterations, residual {result.final_residual:.3e}"
        )

    phi1_field = result.solution
    phi1 = phi1_field.values
    U1 = U0 + 0.5 * hn * (phi1 - phi0)
    U1_field = Field(grid, U1)
    new_state = AcState(phi=phi1_field, U=U1_field, t=state.t + dt)

    # chemical potential of the new state, -eps^2 lap(phi1) + H0 U1
    w1 = Field(grid, eps**2 * (-laplacian(phi1_field).values) + hn * U1)

    dphi = Field(grid, phi1 - phi0)
    grad_terms = 0.5 * eps**2 * (
        seminorm_h1(phi1_field) ** 2 - seminorm_h1(state.phi) ** 2 + seminorm_h1(dphi) ** 2
    )
    dU = Field(grid, U1 - U0)
    u_terms = norm_l2(U1_field) ** 2 - norm_l2(state.U) ** 2 + norm_l2(dU) ** 2
    defect = abs(grad_terms + u_terms + norm_l2(dphi) ** 2 / (M * dt))

    report = StepReport(
        energy_modified=energy_modified(phi1_field, U1_field, eps),
        energy_original=energy_original(phi1_field, cfg.potential, eps),
        mass=mean(phi1_field) * grid.volume,
        pcg_iterations=result.iterations,
        pcg_residual=result.final_residual,
        dissipation_defect=defect,
        max_abs_phi=float(np.max(np.abs(phi1))),
        w_field=w1,
    )
    return new_state, report
