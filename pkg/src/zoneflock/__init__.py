"""Zone-based flocking with bearing and distance measurements, plus a simplified single-zone model."""

from .behaviors import BehaviorWeights, DeviationSet, Limits, VelocityEstimate
from .geometry import Polygon, Segment
from .metrics import compute_metrics, summarize
from .perception import Bounds, Measurements, ZoneParams
from .scenario import Scenario, build_world, parse_scenario, write_scenario
from .sim import AgentState, AlienState, SimOptions, World, run, step
from .simplified import SimplifiedParams

__version__ = "0.1.0"

__all__ = [
    "AgentState",
    "AlienState",
    "BehaviorWeights",
    "Bounds",
    "DeviationSet",
    "Limits",
    "Measurements",
    "Polygon",
    "Scenario",
    "Segment",
    "SimOptions",
    "SimplifiedParams",
    "VelocityEstimate",
    "World",
    "ZoneParams",
    "build_world",
    "compute_metrics",
    "parse_scenario",
    "run",
    "step",
    "summarize",
    "write_scenario",
]
