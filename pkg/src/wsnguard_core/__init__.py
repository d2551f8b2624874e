"""wsnguard core library: secure protocols, network simulation and attack experiments."""

from .config import (
    Scenario,
    ScenarioParseError,
    ScenarioValidationError,
    build_scenario,
    load_scenario,
)

__all__ = [
    "Scenario",
    "ScenarioParseError",
    "ScenarioValidationError",
    "__version__",
    "build_scenario",
    "load_scenario",
]
__version__ = "0.1.0"
