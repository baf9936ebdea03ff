"""Error norms, reference trajectories, temporal-order estimation, and
sampled Lipschitz checks of the quadratized slope."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import allen_cahn, cahn_hilliard
from .potentials import PotentialSpec, eval_H, lipschitz_bound_H
from .spectral import Field, Grid, gradient, norm_l2, norm_linf, seminorm_h1

__all__ = [
    "ErrorNorms",
    "error_norms",
    "TrajectoryPoint",
    "run_reference",
    "RateFit",
    "fit_rate",
    "ConvergenceReport",
    "convergence_study",
    "LipschitzCheck",
    "check_lipschitz_H",
    "gradient_slope_ratio",
    "calibrate_gradient_lipschitz",
    "random_smooth_field",
]

SCHEMES = ("cahn-hilliard", "allen-cahn")


def _scheme_functions(scheme: str):
    if scheme == "cahn-hilliard":
        return cahn_hilliard.ch_init, cahn_hilliard.ch_step
    if scheme == "allen-cahn":
        return allen_cahn.ac_init, allen_cahn.ac_step
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


@dataclass(frozen=True)
class ErrorNorms:
    l2: float
    h1: float
    linf: float


def error_norms(a: Field, b: Field) -> ErrorNorms:
    """Norms of a - b; h1 is the full norm sqrt(l2^2 + |grad|^2)."""
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    diff = Field(a.grid, a.values - b.values)
    l2 = norm_l2(diff)
    h1 = math.sqrt(l2**2 + seminorm_h1(diff) ** 2)
    return ErrorNorms(l2=l2, h1=h1, linf=norm_linf(diff))


# --- reference trajectories -------------------------------------------------------


@dataclass(frozen=True)
class TrajectoryPoint:
    """State recorded at one checkpoint; w is the chemical potential of the
    step that arrived here (None at t = 0)."""

    t: float
    phi: Field
    U: Field
    w: Field | None


def _integer_quotient(value: float, unit: float, what: str) -> int:
    ratio = value / unit
    n = round(ratio)
    if n < 0 or abs(ratio - n) > 1e-9 * max(1.0, abs(ratio)):
        raise ValueError(f"{what}: {value} is not an integer multiple of {unit}")
    return n


def run_reference(
    scheme: str,
    phi0: Field,
    cfg,
    T: float,
    dt_ref: float,
    checkpoint_times: Sequence[float],
) -> list[TrajectoryPoint]:
    """March with step dt_ref and record states at the requested times.

    Every checkpoint time (and T) must be an integer multiple of dt_ref.
    Deterministic: same inputs give bit-identical trajectories.
    """
    init, step = _scheme_functions(scheme)
    if dt_ref <= 0:
        raise ValueError("dt_ref must be positive")
    _integer_quotient(T, dt_ref, "final time")
    checkpoint_steps = {}
    for tc in checkpoint_times:
        if tc < 0 or tc > T * (1 + 1e-12):
            raise ValueError(f"checkpoint time {tc} outside [0, T]")
        checkpoint_steps[_integer_quotient(tc, dt_ref, "checkpoint time")] = tc

    cfg_ref = dataclasses.replace(cfg, dt=dt_ref)
    state = init(phi0, cfg_ref)
    points = []
    if 0 in checkpoint_steps:
        points.append(TrajectoryPoint(t=0.0, phi=state.phi, U=state.U, w=None))
    last = max(checkpoint_steps) if checkpoint_steps else 0
    for n in range(1, last + 1):
        state, report = step(state, cfg_ref)
        if n in checkpoint_steps:
            points.append(
                TrajectoryPoint(t=checkpoint_steps[n], phi=state.phi, U=state.U, w=report.w_field)
            )
    return points


# --- convergence studies -----------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    rate: float
    r_squared: float


def fit_rate(dts: Sequence[float], errors: Sequence[float]) -> RateFit:
    """Least-squares slope of log(error) against log(dt), with fit quality."""
    x = np.log(np.asarray(dts, dtype=float))
    y = np.asarray(errors, dtype=float)
    if np.any(y <= 0):
        raise ValueError("errors must be positive for a log-log fit")
    y = np.log(y)
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = y - y.mean()
    ss_tot = float(np.dot(total, total))
    r_squared = 1.0 if ss_tot == 0 else 1.0 - float(np.dot(residual, residual)) / ss_tot
    return RateFit(rate=float(slope), r_squared=r_squared)


@dataclass(frozen=True)
class ConvergenceReport:
    """Temporal refinement table against a fine-step reference.

    ``errors_w_integrated`` is the accumulated dt * sum_n ||e_w||_H1^2
    aggregate (conserved-flow studies only; None otherwise); its rate is
    fitted on the square root, the discrete L^2-in-time H^1 error norm, so
    every reported rate measures a first-order quantity. Error columns that
    vanish identically carry no rate entry.
    """

    scheme: str
    dts: tuple[float, ...]
    errors_phi_l2: tuple[float, ...]
    errors_phi_h1: tuple[float, ...]
    errors_U_l2: tuple[float, ...]
    errors_combined: tuple[float, ...]
    errors_w_integrated: tuple[float, ...] | None
    rates: dict[str, RateFit]


def convergence_study(
    scheme: str,
    phi0: Field,
    cfg,
    T: float,
    dts: Sequence[float],
    dt_ref: float,
) -> ConvergenceReport:
    """Errors at t = T for a halving sequence of steps, versus a dt_ref run.

    The reference uses the same grid, so the shared spatial error cancels and
    the table isolates the temporal error of the stepping.
    """
    dts = tuple(float(dt) for dt in dts)
    if len(dts) < 2:
        raise ValueError("need at least two step sizes")
    for a, b in zip(dts, dts[1:]):
        if abs(a / b - 2.0) > 1e-9:
            raise ValueError(f"step sizes must halve: {a} -> {b}")
    if dt_ref > min(dts) / 8 * (1 + 1e-12):
        raise ValueError(f"dt_ref={dt_ref} must be at most min(dts)/8 = {min(dts)/8}")
    for dt in dts:
        _integer_quotient(T, dt, "final time")
        _integer_quotient(dt, dt_ref, "coarse step")

    init, step = _scheme_functions(scheme)
    unit = min(dts)
    n_checkpoints = _integer_quotient(T, unit, "final time")
    checkpoint_times = [m * unit for m in range(1, n_checkpoints + 1)]
    reference = run_reference(scheme, phi0, cfg, T, dt_ref, checkpoint_times)
    ref_by_index = {m + 1: pt for m, pt in enumerate(reference)}

    track_w = scheme == "cahn-hilliard"
    e_phi_l2, e_phi_h1, e_U_l2, e_comb, e_w_acc = [], [], [], [], []
    for dt in dts:
        cfg_dt = dataclasses.replace(cfg, dt=dt)
        stride = _integer_quotient(dt, unit, "coarse step")
        n_steps = _integer_quotient(T, dt, "final time")
        state = init(phi0, cfg_dt)
        w_acc = 0.0
        for n in range(1, n_steps + 1):
            state, report = step(state, cfg_dt)
            if track_w:
                ref_w = ref_by_index[n * stride].w
                ew = error_norms(ref_w, report.w_field)
                w_acc += dt * ew.h1**2
        ref_final = ref_by_index[n_checkpoints]
        ephi = error_norms(ref_final.phi, state.phi)
        eU = error_norms(ref_final.U, state.U)
        e_phi_l2.append(ephi.l2)
        e_phi_h1.append(ephi.h1)
        e_U_l2.append(eU.l2)
        e_comb.append(math.sqrt(ephi.h1**2 + eU.l2**2))
        if track_w:
            e_w_acc.append(w_acc)

    # columns that vanish identically (e.g. U under the zero potential, which
    # both runs keep constant) admit no log-log fit and get no rate entry
    candidates = {
        "phi_l2": e_phi_l2,
        "phi_h1": e_phi_h1,
        "U_l2": e_U_l2,
        "combined": e_comb,
    }
    if track_w:
        candidates["w_time_h1"] = [math.sqrt(v) for v in e_w_acc]
    rates = {name: fit_rate(dts, errs) for name, errs in candidates.items() if min(errs) > 0}
    return ConvergenceReport(
        scheme=scheme,
        dts=dts,
        errors_phi_l2=tuple(e_phi_l2),
        errors_phi_h1=tuple(e_phi_h1),
        errors_U_l2=tuple(e_U_l2),
        errors_combined=tuple(e_comb),
        errors_w_integrated=tuple(e_w_acc) if track_w else None,
        rates=rates,
    )


# --- sampled Lipschitz checks -------------------------------------------------------


@dataclass(frozen=True)
class LipschitzCheck:
    max_observed_slope: float
    bound: float
    passed: bool


def check_lipschitz_H(
    spec: PotentialSpec, c0: float, samples: int = 10_000, rng_seed: int = 0
) -> LipschitzCheck:
    """Sample |H(x) - H(y)| / |x - y| on [-c0, c0]^2 against the closed-form bound.

    Pairs closer than 1e-12 are skipped.
    """
    if samples < 1000:
        raise ValueError("use at least 1000 sample pairs")
    rng = np.random.default_rng(rng_seed)
    x = rng.uniform(-c0, c0, samples)
    y = rng.uniform(-c0, c0, samples)
    keep = np.abs(x - y) >= 1e-12
    x, y = x[keep], y[keep]
    slopes = np.abs(np.asarray(eval_H(spec, x)) - np.asarray(eval_H(spec, y))) / np.abs(x - y)
    max_slope = float(slopes.max()) if slopes.size else 0.0
    bound = lipschitz_bound_H(spec, c0)
    return LipschitzCheck(max_observed_slope=max_slope, bound=bound, passed=max_slope <= bound)


def gradient_slope_ratio(spec: PotentialSpec, a: Field, b: Field) -> float:
    """||grad(H(a) - H(b))|| over (||a - b|| + ||grad(a - b)||) for two fields."""
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    dH = Field(a.grid, np.asarray(eval_H(spec, a.values)) - np.asarray(eval_H(spec, b.values)))
    diff = Field(a.grid, a.values - b.values)
    denom = norm_l2(diff) + seminorm_h1(diff)
    if denom == 0:
        return 0.0
    return seminorm_h1(dH) / denom


def random_smooth_field(grid: Grid, sup_bound: float, rng: np.random.Generator) -> Field:
    """Random low-mode field scaled so both |u| and |grad u| stay below sup_bound."""
    coords = grid.coordinates()
    vals = np.zeros(grid.shape)
    for _ in range(4):
        amp = rng.uniform(-1.0, 1.0)
        phases = rng.uniform(0.0, 2.0 * np.pi, grid.dim)
        modes = rng.integers(1, 4, grid.dim)
        term = amp
        for axis in range(grid.dim):
            k = 2.0 * np.pi * modes[axis] / grid.lengths[axis]
            term = term * np.cos(k * coords[axis] + phases[axis])
        vals = vals + term
    u = Field(grid, vals)
    grad_sup = max(norm_linf(g) for g in gradient(u))
    scale = sup_bound / max(norm_linf(u), grad_sup, 1e-12)
    return Field(grid, rng.uniform(0.2, 1.0) * scale * vals)


def calibrate_gradient_lipschitz(
    spec: PotentialSpec,
    grid: Grid,
    sup_bound: float,
    pairs: int = 50,
    rng_seed: int = 0,
) -> float:
    """Largest sampled gradient-slope ratio over random smooth bounded field pairs.

    Serves as an empirical stand-in for the field-level Lipschitz constant of
    H under sup-norm bounds on the inputs and their gradients.
    """
    rng = np.random.default_rng(rng_seed)
    worst = 0.0
    for _ in range(pairs):
        a = random_smooth_field(grid, sup_bound, rng)
        b = random_smooth_field(grid, sup_bound, rng)
        worst = max(worst, gradient_slope_ratio(spec, a, b))
    return worst
