"""
Error types for the simulator.

Every failure the library raises on purpose derives from SimulationError,
which carries a human readable detail and the process exit code the command
line maps it to.
"""

from typing import Any, Dict, Optional


class SimulationError(Exception):
    """Base exception for simulator errors."""
    exit_code = 70

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code
        super().__init__(self.detail)


class DimensionError(SimulationError):
    """Operands live on different numbers of qubits."""
    exit_code = 65


class DomainError(SimulationError):
    """An argument lies outside the domain of the operation."""
    exit_code = 65


class StructuralError(SimulationError):
    """A code or product does not have the structure the operation needs."""
    exit_code = 65


class KernelDivergenceError(SimulationError):
    """The bath correlation integral does not converge for these parameters."""
    exit_code = 4


class NumericalError(SimulationError):
    """A numerical routine failed to reach its tolerance."""
    exit_code = 4

    def __init__(self, detail: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(detail)


class NumericalConsistencyError(NumericalError):
    """A quantity that must be real, normalised or Hermitian is not."""


class DegenerateHistoryError(SimulationError):
    """The history has a probability below the normalisation floor."""
    exit_code = 4


class TruncationError(SimulationError):
    """The Fock truncation did not converge between d and d+2."""
    exit_code = 4


class SizeLimitError(SimulationError):
    """An exact enumeration would exceed its configured limit."""
    exit_code = 3

    def __init__(self, detail: str, limit_name: str, limit: int):
        self.limit_name = limit_name
        self.limit = limit
        super().__init__(f"{detail} (limit {limit_name}={limit}; use mode=montecarlo to sample instead)")


class NotImplementedScheduleError(SimulationError):
    """The pulse schedule is outside the family the expansion supports."""
    exit_code = 65


class ConfigError(SimulationError):
    """The configuration file or flags could not be turned into a RunConfig."""
    exit_code = 2

    def __init__(self, detail: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            detail = f"line {line}: {detail}"
        super().__init__(detail)


class ValidationFailed(SimulationError):
    """At least one check of the validation suite failed."""
    exit_code = 1
