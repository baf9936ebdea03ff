import numpy as np
import pytest

from ieqflow import (
    AcConfig,
    ChConfig,
    Field,
    Grid,
    check_lipschitz_H,
    ch_init,
    ch_step,
    convergence_study,
    cosine_sum,
    double_well,
    error_norms,
    fit_rate,
    flory_huggins,
    run_reference,
    zero_potential,
)
from ieqflow.diagnostics import (
    calibrate_gradient_lipschitz,
    gradient_slope_ratio,
    random_smooth_field,
)
from helpers import random_field, smooth_field


@pytest.fixture
def grid():
    return Grid((32,), (2.0 * np.pi,))


def test_error_norms_zero_for_identical(grid):
    u = smooth_field(grid)
    e = error_norms(u, u)
    assert e.l2 == 0.0 and e.h1 == 0.0 and e.linf == 0.0


def test_error_norms_cosine_case():
    g = Grid((64,), (1.0,))
    a = Field.from_function(g, lambda x: np.cos(2 * np.pi * x))
    b = Field.constant(g, 0.0)
    e = error_norms(a, b)
    assert e.l2 == pytest.approx(np.sqrt(0.5), rel=1e-12)
    assert e.h1 == pytest.approx(np.sqrt(0.5 + 2 * np.pi**2), rel=1e-12)
    assert e.linf == pytest.approx(1.0, rel=1e-12)


def test_error_norms_triangle_inequality(grid):
    rng = np.random.default_rng(30)
    for _ in range(10):
        a, b, c = (random_field(grid, rng) for _ in range(3))
        for attr in ("l2", "h1", "linf"):
            ab = getattr(error_norms(a, b), attr)
            ac = getattr(error_norms(a, c), attr)
            cb = getattr(error_norms(c, b), attr)
            assert ab <= ac + cb + 1e-12


def test_fit_rate_recovers_exact_slope():
    dts = [0.4, 0.2, 0.1, 0.05]
    errors = [0.7 * dt**1.37 for dt in dts]
    fit = fit_rate(dts, errors)
    assert fit.rate == pytest.approx(1.37, abs=1e-10)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_rate_flags_poor_fits():
    dts = [0.4, 0.2, 0.1, 0.05]
    errors = [1.0, 0.01, 0.5, 0.3]  # no power law
    fit = fit_rate(dts, errors)
    assert fit.r_squared < 0.98


def test_fit_rate_rejects_nonpositive_errors():
    with pytest.raises(ValueError):
        fit_rate([0.2, 0.1], [1.0, 0.0])


def test_run_reference_zero_potential_closed_form(grid):
    cfg = ChConfig(mobility=1.0, epsilon=0.6, dt=1.0, potential=zero_potential())
    phi0 = smooth_field(grid, 0.2, 0.3)
    dt_ref, T = 0.05, 1.0
    points = run_reference("cahn-hilliard", phi0, cfg, T, dt_ref, [T])
    n = round(T / dt_ref)
    k = 2 * np.pi * np.fft.rfftfreq(grid.shape[0], d=grid.spacing[0])
    coeffs = np.fft.rfft(phi0.values) / (1.0 + dt_ref * cfg.epsilon**2 * k**4) ** n
    expected = np.fft.irfft(coeffs, grid.shape[0])
    assert np.max(np.abs(points[-1].phi.values - expected)) <= 1e-9


def test_run_reference_with_coarse_dt_reproduces_coarse_run(grid):
    cfg = ChConfig(mobility=1.0, epsilon=0.5, dt=0.1, potential=double_well())
    phi0 = smooth_field(grid, 0.15, 0.25)
    points = run_reference("cahn-hilliard", phi0, cfg, 0.5, 0.1, [0.5])
    state = ch_init(phi0, cfg)
    for _ in range(5):
        state, _ = ch_step(state, cfg)
    assert np.array_equal(points[-1].phi.values, state.phi.values)
    assert np.array_equal(points[-1].U.values, state.U.values)


def test_run_reference_deterministic(grid):
    cfg = AcConfig(mobility=1.0, epsilon=0.5, dt=0.1, potential=double_well())
    phi0 = smooth_field(grid, 0.15, 0.25)
    a = run_reference("allen-cahn", phi0, cfg, 0.4, 0.02, [0.2, 0.4])
    b = run_reference("allen-cahn", phi0, cfg, 0.4, 0.02, [0.2, 0.4])
    for pa, pb in zip(a, b):
        assert pa.phi.values.tobytes() == pb.phi.values.tobytes()
        assert pa.U.values.tobytes() == pb.U.values.tobytes()
        assert pa.w.values.tobytes() == pb.w.values.tobytes()


def test_run_reference_checkpoint_validation(grid):
    cfg = ChConfig(mobility=1.0, epsilon=0.5, dt=0.1, potential=double_well())
    phi0 = smooth_field(grid)
    with pytest.raises(ValueError, match="integer multiple"):
        run_reference("cahn-hilliard", phi0, cfg, 1.0, 0.3, [0.5])
    with pytest.raises(ValueError, match="outside"):
        run_reference("cahn-hilliard", phi0, cfg, 1.0, 0.1, [1.5])
    with pytest.raises(ValueError, match="unknown scheme"):
        run_reference("heat", phi0, cfg, 1.0, 0.1, [1.0])


def test_convergence_study_zero_potential_first_order(grid):
    # rational one-step approximation of the linear semigroup is O(dt);
    # steps chosen with lambda * dt < 0.3 so the fit sits in the asymptotic range
    cfg = ChConfig(mobility=1.0, epsilon=0.6, dt=1.0, potential=zero_potential())
    phi0 = smooth_field(grid, 0.3, 0.2)
    report = convergence_study(
        "cahn-hilliard", phi0, cfg, 0.4, [0.05, 0.025, 0.0125, 0.00625], 0.00625 / 8
    )
    assert 0.9 <= report.rates["combined"].rate <= 1.1
    assert report.rates["combined"].r_squared >= 0.98
    assert report.errors_w_integrated is not None
    assert all(a > b for a, b in zip(report.errors_combined, report.errors_combined[1:]))


def test_convergence_study_allen_cahn_has_no_w_column(grid):
    cfg = AcConfig(mobility=1.0, epsilon=0.5, dt=1.0, potential=double_well())
    phi0 = cosine_sum(grid, 0.1, 0.3)
    report = convergence_study("allen-cahn", phi0, cfg, 0.4, [0.1, 0.05], 0.05 / 8)
    assert report.errors_w_integrated is None
    assert "w_time_h1" not in report.rates


def test_convergence_study_validation(grid):
    cfg = ChConfig(mobility=1.0, epsilon=0.5, dt=1.0, potential=zero_potential())
    phi0 = smooth_field(grid)
    with pytest.raises(ValueError, match="halve"):
        convergence_study("cahn-hilliard", phi0, cfg, 0.8, [0.2, 0.05], 0.001)
    with pytest.raises(ValueError, match="at most"):
        convergence_study("cahn-hilliard", phi0, cfg, 0.8, [0.2, 0.1], 0.05)
    with pytest.raises(ValueError, match="at least two"):
        convergence_study("cahn-hilliard", phi0, cfg, 0.8, [0.2], 0.001)


def test_check_lipschitz_zero_potential():
    result = check_lipschitz_H(zero_potential(), 1.0, samples=2000, rng_seed=1)
    assert result.max_observed_slope == 0.0
    assert result.passed


@pytest.mark.parametrize("c0", [1.0, 2.0])
def test_check_lipschitz_double_well(c0):
    result = check_lipschitz_H(double_well(), c0, samples=10_000, rng_seed=2)
    assert result.passed
    assert result.max_observed_slope > 0


def test_check_lipschitz_flory_huggins():
    result = check_lipschitz_H(flory_huggins(), 2.0, samples=10_000, rng_seed=3)
    assert result.passed


def test_check_lipschitz_slope_grows_with_c0():
    slopes = {
        c0: check_lipschitz_H(double_well(), c0, samples=10_000, rng_seed=4).max_observed_slope
        for c0 in (1.0, 2.0)
    }
    assert slopes[2.0] >= slopes[1.0]


def test_check_lipschitz_requires_enough_samples():
    with pytest.raises(ValueError):
        check_lipschitz_H(double_well(), 1.0, samples=10)


def test_gradient_lipschitz_field_ratio_bounded(grid):
    # calibrate on one sample set; production draws must stay within 1.5x
    spec = double_well()
    calibrated = calibrate_gradient_lipschitz(spec, grid, sup_bound=1.0, pairs=60, rng_seed=5)
    assert calibrated > 0
    rng = np.random.default_rng(99)
    for _ in range(40):
        a = random_smooth_field(grid, 1.0, rng)
        b = random_smooth_field(grid, 1.0, rng)
        assert gradient_slope_ratio(spec, a, b) <= 1.5 * calibrated
