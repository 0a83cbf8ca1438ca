"""Sampling-based model predictive control with deformed-exponential cost transforms.

MPPI (exponential weights) and CEM (elite indicator) are recovered as the
r -> 1 and r -> infinity limits of the Tsallis transform.
"""
from .mpc import MpcConfig, TrialRecord, TrialSetSummary, run_mpc_trial, run_trial_set
from .policies import GaussianPolicy, GmmPolicy, SteinPolicy
from .rollout import NoiseConfig
from .transforms import Cem, EliteFraction, EliteThreshold, Mppi, Tsallis

__all__ = [
    "MpcConfig", "TrialRecord", "TrialSetSummary", "run_mpc_trial", "run_trial_set",
    "GaussianPolicy", "GmmPolicy", "SteinPolicy", "NoiseConfig",
    "Tsallis", "Mppi", "Cem", "EliteFraction", "EliteThreshold",
]
