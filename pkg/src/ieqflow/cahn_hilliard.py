"""Linearly implicit, unconditionally energy stable Cahn-Hilliard time step.

One step advances (phi, U) through the quadratized system

    (phi1 - phi0)/dt = M lap(w1),
    w1 = -eps^2 lap(phi1) + H0 U1,
    U1 = U0 + H0 (phi1 - phi0)/2,

with H0 = H(phi0) frozen over the step. Eliminating w1 and U1 leaves one
linear equation for phi1,

    (I + dt M eps^2 lap^2 - dt M lap(q .)) phi1 = phi0 + dt M lap(g),
    q = H0^2 / 2,   g = H0 U0 - q phi0,

whose mean is conserved. Splitting phi1 = c + v with c = mean(phi0) and
premultiplying the mean-zero part by inv(-lap) gives a symmetric positive
definite system

    [ inv(-lap) + dt M eps^2 (-lap) + dt M P(q .) ] v = b,

with P the mean-removal projection, solved matrix-free by conjugate
gradients with the constant-coefficient spectral preconditioner obtained by
replacing q with max(q).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energies import StepReport, energy_modified, energy_original
from .krylov import PcgConfig, PcgResult, SolverFailure, pcg
from .potentials import PotentialSpec, eval_H, initial_U
from .spectral import (
    Field,
    _inv_k_squared,
    _k_squared,
    apply_symbol,
    laplacian,
    mean,
    norm_l2,
    seminorm_h1,
    subtract_mean,
)

__all__ = ["ChConfig", "ChState", "ch_init", "ch_apply_operator", "ch_step", "ch_energy_modified"]


@dataclass(frozen=True)
class ChConfig:
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
class ChState:
    """Solver state: order parameter phi, auxiliary variable U, current time."""

    phi: Field
    U: Field
    t: float

    def __post_init__(self):
        if self.phi.grid != self.U.grid:
            raise ValueError("phi and U must share a grid")


def ch_init(phi0: Field, cfg: ChConfig) -> ChState:
    """Initial state with the consistent auxiliary variable U = sqrt(F(phi0) + B)."""
    return ChState(phi=phi0, U=Field(phi0.grid, initial_U(cfg.potential, phi0.values)), t=0.0)


def ch_apply_operator(v: Field, Hn: Field, cfg: ChConfig) -> Field:
    """Symmetrized one-step operator on the mean-zero subspace.

    Applies inv(-lap) v + dt M eps^2 (-lap v) + dt M (q v - mean(q v)) with
    q = Hn^2 / 2. Symmetric positive definite in the discrete L^2 inner
    product for mean-zero v.
    """
    _require_mean_zero(v)
    grid = v.grid
    dtm = cfg.dt * cfg.mobility
    symbol = _inv_k_squared(grid) + dtm * cfg.epsilon**2 * _k_squared(grid)
    spectral_part = apply_symbol(v, symbol)
    qv = 0.5 * Hn.values * Hn.values * v.values
    return Field(grid, spectral_part.values + dtm * (qv - qv.mean()))


def ch_step(state: ChState, cfg: ChConfig) -> tuple[ChState, StepReport]:
    """Advance one step; returns the new state and its diagnostics.

    The mean of phi is conserved by construction. Raises
    :class:`SolverFailure` if the inner conjugate-gradient solve does not
    converge.
    """
    grid = state.phi.grid
    dt, eps, M = cfg.dt, cfg.epsilon, cfg.mobility
    dtm = dt * M
    phi0 = state.phi.values
    U0 = state.U.values

    hn = np.asarray(eval_H(cfg.potential, phi0))
    q = 0.5 * hn * hn
    c = phi0.mean()
    phi0_hat = phi0 - c

    # rhs of the symmetrized mean-zero system: inv(-lap) phi0_hat - dt M P(s),
    # s = H0 U0 - q (phi0 - c)
    s = hn * U0 - q * phi0_hat
    lifted = apply_symbol(Field(grid, phi0_hat), _inv_k_squared(grid))
    b = Field(grid, lifted.values - dtm * (s - s.mean()))

    hn_field = Field(grid, hn)
    cbar = float(np.max(q))
    pinv_symbol = _preconditioner_symbol(grid, dtm, eps, cbar)

    def apply_A(v: Field) -> Field:
        return ch_apply_operator(v, hn_field, cfg)

    def apply_Pinv(r: Field) -> Field:
        return apply_symbol(r, pinv_symbol)

    x0 = Field(grid, phi0_hat - phi0_hat.mean())
    result = pcg(apply_A, apply_Pinv, b, x0, cfg.pcg)
    if not result.converged:
        raise SolverFailure(
            f"conjugate gradient stalled at t={state.t:.6g}: "
            f"{result.iterations} iterations, residual {result.final_residual:.3e}"
        )

    phi1 = c + (result.solution.values - result.solution.values.mean())
    g = hn * U0 - q * phi0
    phi1_field = Field(grid, phi1)
    w1 = Field(grid, eps**2 * (-laplacian(phi1_field).values) + q * phi1 + g)
    U1 = U0 + 0.5 * hn * (phi1 - phi0)
    new_state = ChState(phi=phi1_field, U=Field(grid, U1), t=state.t + dt)

    report = _build_report(state, new_state, w1, result, cfg, dissipation=dtm * seminorm_h1(w1) ** 2)
    return new_state, report


def ch_energy_modified(state: ChState, cfg: ChConfig) -> float:
    return energy_modified(state.phi, state.U, cfg.epsilon)


def _build_report(
    old: ChState,
    new: ChState,
    w1: Field,
    result: PcgResult,
    cfg: ChConfig,
    dissipation: float,
) -> StepReport:
    grid = new.phi.grid
    dphi = Field(grid, new.phi.values - old.phi.values)
    grad_terms = 0.5 * cfg.epsilon**2 * (
        seminorm_h1(new.phi) ** 2 - seminorm_h1(old.phi) ** 2 + seminorm_h1(dphi) ** 2
    )
    dU = Field(grid, new.U.values - old.U.values)
    u_terms = norm_l2(new.U) ** 2 - norm_l2(old.U) ** 2 + norm_l2(dU) ** 2
    defect = abs(grad_terms + u_terms + dissipation)
    return StepReport(
        energy_modified=energy_modified(new.phi, new.U, cfg.epsilon),
        energy_original=energy_original(new.phi, cfg.potential, cfg.epsilon),
        mass=mean(new.phi) * grid.volume,
        pcg_iterations=result.iterations,
        pcg_residual=result.final_residual,
        dissipation_defect=defect,
        max_abs_phi=float(np.max(np.abs(new.phi.values))),
        w_field=w1,
    )


def _preconditioner_symbol(grid, dtm: float, eps: float, cbar: float) -> np.ndarray:
    """Inverse symbol of inv(-lap) + dtm eps^2 (-lap) + dtm cbar, zero mode dropped."""
    k2 = _k_squared(grid)
    inv_k2 = _inv_k_squared(grid)
    diag = inv_k2 + dtm * eps**2 * k2 + dtm * cbar
    out = np.zeros_like(diag)
    nonzero = k2 > 0
    out[nonzero] = 1.0 / diag[nonzero]
    return out


def _require_mean_zero(v: Field) -> None:
    scale = float(np.max(np.abs(v.values)))
    if abs(float(v.values.mean())) > 1e-10 * scale:
        raise ValueError("operator is defined on mean-zero fields only")
