"""Discrete-time Merton portfolio laboratory."""

from .analytic import (
    StationarityReport,
    continuous_merton_utility,
    merton_strategy,
    normal_cdf,
    positivity_probability,
    script_g,
    script_g_derivatives,
    script_g_star,
    second_moment,
)
from .errors import (
    ConfigError,
    DegenerateError,
    InputError,
    InputShapeError,
    ModelError,
    QuadratureError,
    StepSizeError,
)
from .market import (
    Discretization,
    MarketParams,
    NoisePath,
    Strategy,
    WealthPath,
    check_self_financing,
    simulate_path,
    simulate_stock,
    wealth_product_form,
)
from .montecarlo import (
    Estimate,
    McConfig,
    estimate_expected_utility,
    estimate_phi_moment,
    estimate_positivity,
    noise_stream,
    simulate_terminal,
)
from .optimizer import OptimizationResult, maximize_script_g, mc_dominance_check
from .quadrature import RemainderFit, StepExpectation, g_exact, ito_order_fit, ito_remainder, step_expectation_phi
from .utility import UtilitySpec, phi, utility

__version__ = "0.1.0"
