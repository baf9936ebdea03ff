"""Matrix-free preconditioned conjugate gradient over field operators.

The operator and preconditioner are callbacks mapping :class:`Field` to
:class:`Field`; both must be symmetric positive definite in the discrete
L^2 inner product on the subspace containing the right-hand side and the
initial guess. Convergence is declared on the preconditioned residual norm
sqrt(r' P^{-1} r), relative to its initial value, with an absolute floor
for nearly-zero right-hand sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .spectral import Field, inner

__all__ = ["PcgConfig", "PcgResult", "SolverFailure", "pcg"]


class SolverFailure(RuntimeError):
    """A linear solve broke down or failed to reach its tolerance."""


@dataclass(frozen=True)
class PcgConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_iters: int = 500

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class PcgResult:
    """Outcome of one solve.

    ``final_residual`` and ``residual_history`` are preconditioned residual
    norms; the history starts with the initial residual, so ``iterations``
    equals ``len(residual_history) - 1``.
    """

    solution: Field
    iterations: int
    final_residual: float
    converged: bool
    residual_history: tuple[float, ...]


def pcg(
    apply_A: Callable[[Field], Field],
    apply_Pinv: Callable[[Field], Field],
    rhs: Field,
    x0: Field,
    cfg: PcgConfig,
) -> PcgResult:
    """Solve A x = rhs with preconditioned conjugate gradients.

    Returns an explicit non-converged result when ``max_iters`` is exhausted;
    raises :class:`SolverFailure` when the iteration produces non-finite
    numbers or the operator reveals itself as not positive definite.
    """
    x = x0
    r = Field(rhs.grid, rhs.values - apply_A(x).values)
    z = apply_Pinv(r)
    rz = inner(r, z)
    _require_finite(rz, "initial residual")
    res0 = math.sqrt(max(rz, 0.0))
    history = [res0]
    threshold = max(cfg.rel_tol * res0, cfg.abs_tol)
    if res0 <= cfg.abs_tol:
        return PcgResult(x, 0, res0, True, tuple(history))

    p = z
    for iteration in range(1, cfg.max_iters + 1):
        Ap = apply_A(p)
        pAp = inner(p, Ap)
        _require_finite(pAp, "curvature p'Ap")
        if pAp <= 0:
            raise SolverFailure(
                f"operator is not positive definite: p'Ap = {pAp:.3e} at iteration {iteration}"
            )
        alpha = rz / pAp
        x = Field(x.grid, x.values + alpha * p.values)
        r = Field(r.grid, r.values - alpha * Ap.values)
        z = apply_Pinv(r)
        rz_new = inner(r, z)
        _require_finite(rz_new, "preconditioned residual")
        res = math.sqrt(max(rz_new, 0.0))
        history.append(res)
        if res <= threshold:
            return PcgResult(x, iteration, res, True, tuple(history))
        beta = rz_new / rz
        p = Field(p.grid, z.values + beta * p.values)
        rz = rz_new

    return PcgResult(x, cfg.max_iters, history[-1], False, tuple(history))


def _require_finite(value: float, label: str) -> None:
    if not math.isfinite(value):
        raise SolverFailure(f"numerical failure: {label} is not finite")
