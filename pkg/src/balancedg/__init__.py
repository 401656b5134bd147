"""Positivity-preserving well-balanced DG schemes for the Euler equations with gravity."""
from .errors import ContractError, DomainError, NumericError, PositivityFault, RunError
from .eos import GeneralEOS, IdealGas, StiffenedGas, parse_eos
from .scenarios import ScenarioConfig, Simulation, build_example
from .timestepping import RunReport, StepController, advance

__all__ = [
    "ContractError", "DomainError", "NumericError", "PositivityFault", "RunError",
    "GeneralEOS", "IdealGas", "StiffenedGas", "parse_eos",
    "ScenarioConfig", "Simulation", "build_example",
    "RunReport", "StepController", "advance",
]
__version__ = "0.1.0"
