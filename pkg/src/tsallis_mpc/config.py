"""Experiment configuration files: schema, validation and object builders."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .analysis import make_transform
from .mpc import MpcConfig
from .policies import GaussianPolicy, GmmPolicy, SteinPolicy
from .rollout import NoiseConfig
from .systems import SystemModel, make_system
from .systems.single_stage import SingleStageObjective
from .transforms import CostTransform


class ConfigError(ValueError):
    """Invalid configuration; the message lists offending field paths."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TransformParams(_Strict):
    r: Optional[float] = None
    elite_fraction: Optional[float] = None
    gamma: Optional[float] = None
    inv_lambda: Optional[float] = None
    lam: Optional[float] = None
    smoothing_alpha: Optional[float] = None

    def as_dict(self) -> dict:
        return {k: v for k, v in self.model_dump().items() if v is not None}


class GaussianParams(_Strict):
    kind: Literal["gaussian"] = "gaussian"
    std: float = Field(gt=0)
    variance_mode: Literal["fixed", "adaptive"] = "fixed"
    variance_floor: float = Field(1e-6, gt=0)


class GmmParams(_Strict):
    kind: Literal["gmm"]
    n_components: int = Field(4, ge=1)
    std: float = Field(gt=0)
    spread: float = Field(0.0, ge=0)
    em_iters: int = Field(5, ge=1)
    variance_mode: Literal["fixed", "adaptive"] = "adaptive"
    variance_floor: float = Field(1e-6, gt=0)


class SteinParams(_Strict):
    kind: Literal["stein"]
    n_particles: int = Field(8, ge=1)
    rollout_sigma: float = Field(gt=0)
    bandwidth_multiplier: float = Field(1.0, gt=0)
    step_size: float = Field(0.5, gt=0)
    spread: float = Field(0.0, ge=0)


PolicyParams = Annotated[Union[GaussianParams, GmmParams, SteinParams], Field(discriminator="kind")]


class MpcParams(_Strict):
    horizon: int = Field(ge=1)
    n_steps: Optional[int] = Field(None, ge=1)  # defaults to the task's episode length
    iters: int = Field(1, ge=1)
    warmup_iters: int = Field(1, ge=1)
    n_samples: int = Field(ge=2)
    n_state_samples: int = Field(1, ge=1)
    sigma_eps: Optional[float] = Field(None, ge=0)  # defaults to the task's system noise
    smoothing_alpha: float = Field(0.0, ge=0, lt=1)

    @model_validator(mode="after")
    def _warmup(self):
        if self.warmup_iters < self.iters:
            raise ValueError("warmup_iters must be >= iters")
        return self


class SeedParams(_Strict):
    trial_seed: int = Field(0, ge=0)
    n_trials: int = Field(1, ge=1)
    field_seed: int = Field(0, ge=0)
    policy_seed: int = Field(0, ge=0)  # mixture / particle initial spread


class SingleStageParams(_Strict):
    n_seeds: int = Field(1024, ge=2)
    n_samples: int = Field(64, ge=1)
    noise_scale: float = Field(0.1, ge=0)
    variant: Literal["erf", "erfc"] = "erf"


class OutputParams(_Strict):
    dir: str = "results"


class ExperimentConfig(_Strict):
    task: Literal["planar", "quadcopter", "single_stage"]
    method: Literal["tsallis", "mppi", "cem"]
    transform: TransformParams
    policy: Optional[PolicyParams] = None
    mpc: Optional[MpcParams] = None
    seeds: SeedParams = SeedParams()
    single_stage: SingleStageParams = SingleStageParams()
    output: OutputParams = OutputParams()

    @model_validator(mode="after")
    def _consistent(self):
        try:
            make_transform(self.method, self.transform.as_dict())
        except ValueError as e:
            raise ValueError(f"transform: {e}") from e
        if self.task != "single_stage":
            if self.policy is None:
                raise ValueError("policy is required for MPC tasks")
            if self.mpc is None:
                raise ValueError("mpc is required for MPC tasks")
            if isinstance(self.policy, SteinParams) and self.mpc.n_samples % self.policy.n_particles:
                raise ValueError("mpc.n_samples must be a multiple of policy.n_particles")
        return self

    def with_transform(self, params: dict) -> "ExperimentConfig":
        return self.model_copy(update={"transform": TransformParams(**params)})


def _format_errors(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{loc}: {e['msg']}")
    return "; ".join(lines)


def parse_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_format_errors(e)) from None


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError("<root>: config must be a JSON object")
    return parse_config(data)


def config_hash(cfg: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON form (seeds included)."""
    blob = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# --------------------------------------------------------------------------- builders

def build_transform(cfg: ExperimentConfig) -> CostTransform:
    return make_transform(cfg.method, cfg.transform.as_dict())


def build_system(cfg: ExperimentConfig) -> SystemModel:
    return make_system(cfg.task, field_seed=cfg.seeds.field_seed)


def build_objective(cfg: ExperimentConfig) -> SingleStageObjective:
    return SingleStageObjective(noise_scale=cfg.single_stage.noise_scale, variant=cfg.single_stage.variant)


def build_policy(cfg: ExperimentConfig, model: SystemModel):
    p, T, n_u = cfg.policy, cfg.mpc.horizon, model.control_dim
    mean = getattr(model, "nominal_control", None)
    rng = np.random.default_rng(cfg.seeds.policy_seed)
    if isinstance(p, GaussianParams):
        return GaussianPolicy.isotropic(T, n_u, p.std, mean=mean, variance_mode=p.variance_mode,
                                        variance_floor=p.variance_floor)
    if isinstance(p, GmmParams):
        return GmmPolicy.isotropic(p.n_components, T, n_u, p.std, mean=mean, spread=p.spread, rng=rng,
                                   variance_mode=p.variance_mode, variance_floor=p.variance_floor)
    return SteinPolicy.from_mean(p.n_particles, T, n_u, p.rollout_sigma, mean=mean, spread=p.spread, rng=rng,
                                 step_size=p.step_size, bandwidth_multiplier=p.bandwidth_multiplier)


def build_mpc_config(cfg: ExperimentConfig, model: SystemModel) -> MpcConfig:
    m = cfg.mpc
    sigma = model.sigma_eps if m.sigma_eps is None else m.sigma_eps
    em_iters = cfg.policy.em_iters if isinstance(cfg.policy, GmmParams) else 5
    return MpcConfig(
        horizon=m.horizon,
        n_steps=m.n_steps or model.episode_length,
        iters=m.iters,
        warmup_iters=m.warmup_iters,
        n_samples=m.n_samples,
        n_state_samples=m.n_state_samples,
        noise=NoiseConfig(sigma),
        transform=build_transform(cfg),
        policy=build_policy(cfg, model),
        smoothing_alpha=m.smoothing_alpha,
        trial_seed=cfg.seeds.trial_seed,
        em_iters=em_iters,
    )
