"""Energy-stable quadratized time stepping for Cahn-Hilliard and Allen-Cahn
equations on periodic grids, with the diagnostics to verify stability, mass
conservation, solver well-posedness, and first-order temporal accuracy."""

from .allen_cahn import AcConfig, AcState, ac_apply_operator, ac_init, ac_step
from .cahn_hilliard import ChConfig, ChState, ch_apply_operator, ch_energy_modified, ch_init, ch_step
from .config import ConfigError, IcParams, RunConfig, TimeParams, load_run_config, parse_run_config
from .diagnostics import (
    ConvergenceReport,
    ErrorNorms,
    LipschitzCheck,
    RateFit,
    TrajectoryPoint,
    check_lipschitz_H,
    convergence_study,
    error_norms,
    fit_rate,
    run_reference,
)
from .energies import StepReport, energy_modified, energy_original, energy_step_tolerance
from .initial_conditions import cosine_sum, make_initial_condition, seeded_noise, tanh_profile
from .krylov import PcgConfig, PcgResult, SolverFailure, pcg
from .potentials import (
    PotentialSpec,
    double_well,
    double_well_signed_root,
    eval_F,
    eval_H,
    eval_f,
    eval_f_prime,
    flory_huggins,
    initial_U,
    lipschitz_bound_H,
    zero_potential,
)
from .spectral import (
    Field,
    Grid,
    gradient,
    inner,
    inv_neg_laplacian,
    laplacian,
    load_field,
    mean,
    norm_l2,
    norm_l2_spectral,
    norm_linf,
    save_field,
    seminorm_h1,
    subtract_mean,
)

__version__ = "0.1.0"
