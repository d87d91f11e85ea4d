from typing import List, Tuple

from pydantic import BaseModel, root_validator, validator


class FockConfig(BaseModel):
    modes: List[Tuple[float, float]]  # (omega_m, weight_m)
    cutoff_dim: int = 10
    n_qubits: int = 3
    dimension_limit: int = 4096

    @validator("modes")
    def modes_nonempty(cls, v):
        if not v:
            raise ValueError("at least one bath mode is required")
        if any(weight < 0 or omega <= 0 for omega, weight in v):
            raise ValueError("mode frequencies must be > 0 and weights >= 0")
        return v

    @validator("cutoff_dim")
    def cutoff_at_least_two(cls, v):
        if v < 2:
            raise ValueError("cutoff_dim must be >= 2")
        return v

    @root_validator(skip_on_failure=True)
    def dimension_within_limit(cls, values):
        dim = values["cutoff_dim"] ** len(values["modes"]) * 2 ** values["n_qubits"]
        if dim > values["dimension_limit"]:
            raise ValueError(f"Fock dimension {dim} exceeds limit {values['dimension_limit']}")
        return values
