"""Bulk free-energy densities and their quadratized square-root slope.

Each potential provides the energy density F, its derivative f = F', the
shifted square root U(x) = sqrt(F(x) + B), and the slope H = f / sqrt(F + B)
that drives the linear semi-implicit schemes. The shift B must exceed a
lower bound A with F > -A, which keeps F + B >= B - A > 0 everywhere and H
finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DOUBLE_WELL",
    "FLORY_HUGGINS",
    "ZERO",
    "PotentialSpec",
    "double_well",
    "double_well_signed_root",
    "flory_huggins",
    "zero_potential",
    "eval_F",
    "eval_f",
    "eval_f_prime",
    "eval_H",
    "initial_U",
    "lipschitz_bound_H",
]

DOUBLE_WELL = "double-well"
FLORY_HUGGINS = "flory-huggins"
ZERO = "zero"

_KINDS = (DOUBLE_WELL, FLORY_HUGGINS, ZERO)


@dataclass(frozen=True)
class PotentialSpec:
    """Parameters of one bulk potential.

    ``lower_bound`` is the constant A with F(x) > -A for all x; ``shift`` is
    the constant B > A under the square root. The double-well density is
    nonnegative, so A = 0 is admissible there. ``theta`` and ``sigma`` only
    apply to the logarithmic mixing potential: ``theta`` is the interaction
    strength and ``sigma`` the knot below/above which the density continues
    as its second-order Taylor quadratic (a C^2 extension to the whole line).

    The special configuration ``double-well`` with ``shift == 0`` selects the
    signed square root U = (x^2 - 1)/2 with slope H = 2x. It exists for
    cross-checking only; the default shifted form avoids the vanishing
    denominator at the wells.
    """

    kind: str
    theta: float = 2.0
    sigma: float = 0.01
    lower_bound: float = 0.0
    shift: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}; expected one of {_KINDS}")
        for name in ("theta", "sigma", "lower_bound", "shift"):
            val = float(getattr(self, name))
            if not np.isfinite(val):
                raise ValueError(f"potential parameter {name} must be finite")
            object.__setattr__(self, name, val)
        if self.kind == FLORY_HUGGINS:
            if self.theta <= 0:
                raise ValueError(f"theta must be positive, got {self.theta}")
            if not 0 < self.sigma < 0.5:
                raise ValueError(f"sigma must lie in (0, 1/2), got {self.sigma}")
        if self.lower_bound < 0:
            raise ValueError(f"lower bound A must be nonnegative, got {self.lower_bound}")
        if not self.signed_root and self.shift <= self.lower_bound:
            raise ValueError(
                f"shift B={self.shift} must exceed lower bound A={self.lower_bound} "
                "so that F + B stays positive"
            )

    @property
    def signed_root(self) -> bool:
        """True for the unshifted double-well cross-check mode (B = 0)."""
        return self.kind == DOUBLE_WELL and self.shift == 0.0


def double_well(shift: float = 1.0) -> PotentialSpec:
    """Quartic double-well density F(x) = (x^2 - 1)^2 / 4, minima at x = +-1."""
    return PotentialSpec(DOUBLE_WELL, lower_bound=0.0, shift=shift)


def double_well_signed_root() -> PotentialSpec:
    """Unshifted double-well with the signed root U = (x^2 - 1)/2, H = 2x."""
    return PotentialSpec(DOUBLE_WELL, lower_bound=0.0, shift=0.0)


def flory_huggins(
    theta: float = 2.0,
    sigma: float = 0.01,
    lower_bound: float = 1.0,
    shift: float | None = None,
) -> PotentialSpec:
    """Regularized logarithmic mixing density on the whole line.

    Inside [sigma, 1 - sigma]: x ln x + (1 - x) ln(1 - x) + theta (x - x^2);
    outside, the second-order Taylor quadratic about the nearest knot.
    """
    if shift is None:
        shift = lower_bound + 1.0
    return PotentialSpec(
        FLORY_HUGGINS, theta=theta, sigma=sigma, lower_bound=lower_bound, shift=shift
    )


def zero_potential(shift: float = 1.0) -> PotentialSpec:
    """F = 0 identically; the schemes degenerate to their linear parts."""
    return PotentialSpec(ZERO, lower_bound=0.0, shift=shift)


# --- evaluation -----------------------------------------------------------------


def _coerce(x):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("potential evaluated at non-finite input")
    return arr


def _scalar_like(x, out: np.ndarray):
    return out if out.ndim else float(out)


def _fh_knot_data(spec: PotentialSpec):
    theta, s = spec.theta, spec.sigma
    knots = {}
    for t in (s, 1.0 - s):
        F = t * np.log(t) + (1.0 - t) * np.log1p(-t) + theta * (t - t * t)
        f = np.log(t) - np.log1p(-t) + theta * (1.0 - 2.0 * t)
        fp = 1.0 / t + 1.0 / (1.0 - t) - 2.0 * theta
        knots[t] = (F, f, fp)
    return knots[s], knots[1.0 - s]


def _fh_branches(spec: PotentialSpec, arr: np.ndarray):
    s = spec.sigma
    xm = np.clip(arr, s, 1.0 - s)
    left_mask = arr < s
    right_mask = arr > 1.0 - s
    return xm, left_mask, right_mask


def eval_F(spec: PotentialSpec, x):
    """Energy density F(x)."""
    arr = _coerce(x)
    if spec.kind == ZERO:
        out = np.zeros_like(arr)
    elif spec.kind == DOUBLE_WELL:
        out = 0.25 * (arr * arr - 1.0) ** 2
    else:
        theta = spec.theta
        xm, left, right = _fh_branches(spec, arr)
        out = xm * np.log(xm) + (1.0 - xm) * np.log1p(-xm) + theta * (xm - xm * xm)
        (Fl, fl, fpl), (Fr, fr, fpr) = _fh_knot_data(spec)
        dl = arr - spec.sigma
        dr = arr - (1.0 - spec.sigma)
        out = np.where(left, Fl + fl * dl + 0.5 * fpl * dl * dl, out)
        out = np.where(right, Fr + fr * dr + 0.5 * fpr * dr * dr, out)
    return _scalar_like(x, out)


def eval_f(spec: PotentialSpec, x):
    """Derivative f(x) = F'(x)."""
    arr = _coerce(x)
    if spec.kind == ZERO:
        out = np.zeros_like(arr)
    elif spec.kind == DOUBLE_WELL:
        out = arr * (arr * arr - 1.0)
    else:
        theta = spec.theta
        xm, left, right = _fh_branches(spec, arr)
        out = np.log(xm) - np.log1p(-xm) + theta * (1.0 - 2.0 * xm)
        (_, fl, fpl), (_, fr, fpr) = _fh_knot_data(spec)
        out = np.where(left, fl + fpl * (arr - spec.sigma), out)
        out = np.where(right, fr + fpr * (arr - (1.0 - spec.sigma)), out)
    return _scalar_like(x, out)


def eval_f_prime(spec: PotentialSpec, x):
    """Second derivative F''(x); constant on the quadratic extensions."""
    arr = _coerce(x)
    if spec.kind == ZERO:
        out = np.zeros_like(arr)
    elif spec.kind == DOUBLE_WELL:
        out = 3.0 * arr * arr - 1.0
    else:
        theta = spec.theta
        xm, _, _ = _fh_branches(spec, arr)
        out = 1.0 / xm + 1.0 / (1.0 - xm) - 2.0 * theta
    return _scalar_like(x, out)


def initial_U(spec: PotentialSpec, x):
    """Quadratized variable U(x) = sqrt(F(x) + B) (signed form when B = 0)."""
    arr = _coerce(x)
    if spec.signed_root:
        out = 0.5 * (arr * arr - 1.0)
    else:
        out = np.sqrt(np.asarray(eval_F(spec, arr)) + spec.shift)
    return _scalar_like(x, out)


def eval_H(spec: PotentialSpec, x):
    """Slope H(x) = f(x) / sqrt(F(x) + B), so that f = H * U.

    Bounded for every real x because the denominator never drops below
    sqrt(B - A).
    """
    arr = _coerce(x)
    if spec.signed_root:
        out = 2.0 * arr
    elif spec.kind == ZERO:
        out = np.zeros_like(arr)
    else:
        out = np.asarray(eval_f(spec, arr)) / np.sqrt(np.asarray(eval_F(spec, arr)) + spec.shift)
    return _scalar_like(x, out)


def lipschitz_bound_H(spec: PotentialSpec, c0: float) -> float:
    """Closed-form Lipschitz constant of H on [-c0, c0].

    With C1 an upper bound for |F|, |f|, |f'| and sqrt(F + B) on the doubled
    interval [-2 c0, 2 c0], the slope of H between any two points of
    [-c0, c0] is at most C1^2 / (2 (B - A)^{3/2}) + C1^2 / (B - A). C1 is
    estimated by a dense scan of the doubled interval.
    """
    c0 = float(c0)
    if not np.isfinite(c0) or c0 <= 0:
        raise ValueError(f"c0 must be positive, got {c0}")
    if spec.signed_root:
        return 2.0  # H(x) = 2x has exact global Lipschitz constant 2
    xs = np.linspace(-2.0 * c0, 2.0 * c0, 16385)
    F = np.asarray(eval_F(spec, xs))
    f = np.asarray(eval_f(spec, xs))
    fp = np.asarray(eval_f_prime(spec, xs))
    c1 = max(
        float(np.max(np.abs(F))),
        float(np.max(np.abs(f))),
        float(np.max(np.abs(fp))),
        float(np.max(np.sqrt(F + spec.shift))),
    )
    gap = spec.shift - spec.lower_bound
    return c1 * c1 / (2.0 * gap**1.5) + c1 * c1 / gap
