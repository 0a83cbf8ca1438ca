from .base import SystemModel
from .obstacles import InfeasibleFieldError, generate_obstacle_field
from .planar import PlanarNavigation
from .quadcopter import Quadcopter
from .single_stage import SingleStageObjective, single_stage_cost

__all__ = [
    "SystemModel", "PlanarNavigation", "Quadcopter", "SingleStageObjective",
    "single_stage_cost", "generate_obstacle_field", "InfeasibleFieldError", "make_system",
]


def make_system(task: str, field_seed: int = 0, **kw) -> SystemModel:
    if task == "planar":
        return PlanarNavigation(field_seed=field_seed, **kw)
    if task == "quadcopter":
        return Quadcopter(field_seed=field_seed, **kw)
    raise ValueError(f"no dynamical system for task {task!r}")
