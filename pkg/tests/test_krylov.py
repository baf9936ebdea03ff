import numpy as np
import pytest

from ieqflow import Field, Grid, PcgConfig, SolverFailure, inner, norm_l2, pcg
from ieqflow.spectral import _k_squared, apply_symbol
from helpers import dense_matrix, random_field


@pytest.fixture
def grid():
    return Grid((16,), (2.0 * np.pi,))


def identity_op(v):
    return v


def test_config_validation():
    with pytest.raises(ValueError):
        PcgConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        PcgConfig(abs_tol=-1.0)
    with pytest.raises(ValueError):
        PcgConfig(max_iters=0)


def test_identity_converges_in_one_iteration(grid):
    rng = np.random.default_rng(0)
    rhs = random_field(grid, rng)
    result = pcg(identity_op, identity_op, rhs, Field.constant(grid, 0.0), PcgConfig())
    assert result.converged
    assert result.iterations == 1
    assert np.max(np.abs(result.solution.values - rhs.values)) <= 1e-13


def test_perfect_preconditioner_converges_in_one_iteration(grid):
    # diagonal spectral operator 1 + dt |k|^4 with its exact inverse as P
    dt = 0.01
    symbol = 1.0 + dt * _k_squared(grid) ** 2

    def apply_A(v):
        return apply_symbol(v, symbol)

    def apply_Pinv(v):
        return apply_symbol(v, 1.0 / symbol)

    rng = np.random.default_rng(1)
    rhs = random_field(grid, rng)
    result = pcg(apply_A, apply_Pinv, rhs, Field.constant(grid, 0.0), PcgConfig())
    assert result.converged
    assert result.iterations == 1
    exact = apply_symbol(rhs, 1.0 / symbol)
    assert np.max(np.abs(result.solution.values - exact.values)) <= 1e-12


def test_matches_dense_direct_solve(grid):
    # generic well-conditioned SPD operator with a Jacobi preconditioner
    rng = np.random.default_rng(2)
    n = grid.num_points
    m = rng.standard_normal((n, n))
    spd = m @ m.T / n + 4.0 * np.eye(n)

    def apply_A(v):
        return Field(grid, spd @ v.values)

    diag = np.diag(spd)

    def apply_Pinv(v):
        return Field(grid, v.values / diag)

    rhs = random_field(grid, rng)
    result = pcg(apply_A, apply_Pinv, rhs, Field.constant(grid, 0.0), PcgConfig(rel_tol=1e-12))
    direct = np.linalg.solve(spd, rhs.values)
    rel = np.linalg.norm(result.solution.values - direct) / np.linalg.norm(direct)
    assert result.converged
    assert rel <= 1e-8


def test_residual_history_monotone(grid):
    symbol = 1.0 + 0.1 * _k_squared(grid)

    def apply_A(v):
        return Field(v.grid, apply_symbol(v, symbol).values + 0.5 * np.cos(v.grid.coordinates()[0]) ** 2 * v.values)

    def apply_Pinv(v):
        return apply_symbol(v, 1.0 / (symbol + 0.5))

    rng = np.random.default_rng(3)
    rhs = random_field(grid, rng)
    result = pcg(apply_A, apply_Pinv, rhs, Field.constant(grid, 0.0), PcgConfig(rel_tol=1e-12))
    assert result.converged
    hist = result.residual_history
    assert all(b <= a * (1 + 1e-12) for a, b in zip(hist, hist[1:]))


def test_solution_independent_of_initial_guess(grid):
    symbol = 1.0 + 0.1 * _k_squared(grid) ** 2

    def apply_A(v):
        return apply_symbol(v, symbol)

    def apply_Pinv(v):
        return v

    rng = np.random.default_rng(4)
    rhs = random_field(grid, rng)
    cfg = PcgConfig(rel_tol=1e-11)
    res_a = pcg(apply_A, apply_Pinv, rhs, Field.constant(grid, 0.0), cfg)
    res_b = pcg(apply_A, apply_Pinv, rhs, random_field(grid, rng, scale=5.0), cfg)
    diff = norm_l2(Field(grid, res_a.solution.values - res_b.solution.values))
    assert diff <= 10 * cfg.rel_tol * norm_l2(res_a.solution)


def test_nonconvergence_is_explicit_not_silent(grid):
    rng = np.random.default_rng(5)
    n = grid.num_points
    m = rng.standard_normal((n, n))
    spd = m @ m.T + 1e-3 * np.eye(n)  # ill-conditioned

    def apply_A(v):
        return Field(grid, spd @ v.values)

    rhs = random_field(grid, rng)
    result = pcg(apply_A, identity_op, rhs, Field.constant(grid, 0.0), PcgConfig(rel_tol=1e-14, max_iters=2))
    assert not result.converged
    assert result.iterations == 2
    assert len(result.residual_history) == 3


def test_numerical_failure_raises(grid):
    def apply_A(v):
        with np.errstate(over="ignore"):
            return Field(grid, v.values * 1e300)

    rng = np.random.default_rng(6)
    rhs = random_field(grid, rng, scale=1e50)
    with pytest.raises((SolverFailure, ValueError)):
        pcg(apply_A, identity_op, rhs, Field.constant(grid, 0.0), PcgConfig())


def test_indefinite_operator_raises(grid):
    def apply_A(v):
        return Field(grid, -v.values)

    rng = np.random.default_rng(7)
    rhs = random_field(grid, rng)
    with pytest.raises(SolverFailure, match="not positive definite"):
        pcg(apply_A, identity_op, rhs, Field.constant(grid, 0.0), PcgConfig())


def test_zero_rhs_returns_immediately(grid):
    result = pcg(identity_op, identity_op, Field.constant(grid, 0.0), Field.constant(grid, 0.0), PcgConfig())
    assert result.converged
    assert result.iterations == 0
    assert norm_l2(result.solution) == 0.0


def test_operator_symmetry_assumption_documented(grid):
    # the dense matrix of a spectral symbol operator is symmetric, the
    # setting pcg is specified for
    symbol = 1.0 + _k_squared(grid)
    mat = dense_matrix(lambda v: apply_symbol(v, symbol), grid)
    assert np.max(np.abs(mat - mat.T)) <= 1e-12
