"""Pathwise Itô calculus for finite-variation Lévy processes and barrier pricing."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, LevyItoError, NumericalError, QuadratureError, StabilityError
from .ito_engine import (
    decomposition_check,
    generator_apply,
    ito_residual_study,
    ito_rhs,
    jump_terms,
    martingale_part,
    occupation_time,
)
from .levy_core import (
    LevyMeasureSpec,
    LevyModel,
    SamplePath,
    check_assumption_ac,
    check_finite_variation,
    model_from_mapping,
    read_model_config,
    read_path_csv,
    sample_jump_size,
    simulate_path,
    tail_intensity,
    truncation_bias_bound,
    write_path_csv,
)
from .mc_pricer import (
    MCEstimate,
    first_passage_time,
    martingale_diagnostic,
    martingale_drift,
    price_barrier_curve,
    price_barrier_mc,
    risk_neutral_model,
)
from .pide_solver import PIDEParams, PIDESolution, interpolate_price, solve_pide
from .weakfn import (
    WeakFunction,
    integration_by_parts_check,
    key_bound_check,
    mollifier_kernel,
    mollify,
    mollify_derivative,
    parse_function_spec,
)
