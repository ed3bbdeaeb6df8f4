"""Codebook synthesis for large intelligent reflecting surfaces."""

from .array_model import (
    AnglePair,
    Codeword,
    EffectiveDirection,
    IrsGeometry,
    direction_cosines,
    end_to_end_path_loss,
    gain_pattern,
    response,
    steering_vector,
)
from .baselines import QuadraticProfileConfig, linear_codeword, quadratic_codeword
from .codebook import Codebook, CodebookError, DesignOptions, generate_codebook
from .discrete import (
    BinaryAssignment,
    BnbConfig,
    PhaseAlphabet,
    build_discrete_program,
    enumerate_oracle,
    solve_exact_bnb,
)
from .evalsim import LinkBudget, MonteCarloConfig, pattern_metrics, power_tradeoff_curve, required_power
from .grid import BetaGrid, SampleSet, build_grid, sample_interval
from .io import SchemaError, load_codebook, save_codebook
from .sca import DesignError, DesignReport, ScaConfig, sca_design

__version__ = "0.1.0"
