from typing import Optional

from pydantic import BaseModel, Field, validator

from ..utils.errors import DomainError


# Validators raise DomainError, which pydantic v1 passes through unwrapped.
class BathSpec(BaseModel):
    s: float = 1.0  # spectral exponent, ohmic at 1
    lam: float = Field(0.05, alias="lambda")
    omega_c: float = 1.0
    v_b: float = 1.0

    @validator("s")
    def s_above_minus_one(cls, v):
        if v <= -1:
            raise DomainError(f"spectral exponent s must exceed -1, got {v}; the increment integrals diverge")
        return v

    @validator("lam")
    def lambda_nonnegative(cls, v):
        if v < 0:
            raise DomainError(f"coupling lambda must be >= 0, got {v}")
        return v

    @validator("omega_c", "v_b")
    def strictly_positive(cls, v, field):
        if v <= 0:
            raise DomainError(f"{field.name} must be > 0, got {v}")
        return v

    @property
    def t_uv(self) -> float:
        return 1.0 / self.omega_c

    class Config:
        allow_population_by_field_name = True
        allow_mutation = False


class SpacetimePoint(BaseModel):
    x: float = 0.0
    t: float = 0.0
    site: Optional[int] = None
