"""Unbiased parameter estimation for Bayesian inverse problems.

Stochastic approximation driven by coupled MCMC chains, randomized over the
discretization level and the iteration budget so that the averaged
single-term estimates are free of iteration and discretization bias.
"""

from .api import UmsaEstimator
from .estimator import (
    EstimateRecord,
    UmsaConfig,
    averaged_estimate,
    single_term_estimate,
    write_records_csv,
)
from .kernels import (
    ChainState,
    CoupledState,
    PcnParams,
    coupled_mh_step,
    couple_reflection_maximal,
    couple_synchronous,
    mh_step,
    pcn_propose,
)
from .laws import (
    CostLedger,
    IterationLaw,
    LevelLaw,
    SeedPlan,
    StepSchedule,
    iterations,
    level_step_cost,
    sample_categorical,
)
from .models import EllipticModel, Model, SirModel, Trajectory
from .msa import MsaConfig, MsaRun, ReprojectionSettings, reproject, run_coupled_msa, run_msa

__version__ = "0.1.0"

__all__ = [
    "UmsaEstimator",
    "EstimateRecord",
    "UmsaConfig",
    "averaged_estimate",
    "single_term_estimate",
    "write_records_csv",
    "ChainState",
    "CoupledState",
    "PcnParams",
    "coupled_mh_step",
    "couple_reflection_maximal",
    "couple_synchronous",
    "mh_step",
    "pcn_propose",
    "CostLedger",
    "IterationLaw",
    "LevelLaw",
    "SeedPlan",
    "StepSchedule",
    "iterations",
    "level_step_cost",
    "sample_categorical",
    "EllipticModel",
    "Model",
    "SirModel",
    "Trajectory",
    "MsaConfig",
    "MsaRun",
    "ReprojectionSettings",
    "reproject",
    "run_coupled_msa",
    "run_msa",
]
