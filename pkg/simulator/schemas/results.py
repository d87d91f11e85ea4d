from typing import Any, Dict

from pydantic import BaseModel


class EffectiveCycleOperator(BaseModel):
    const_part: float
    grad_order: int
    grad_coefficient: float  # units of time**(2*grad_order)
    syndrome_class: str = "error"
    diagnostics: Dict[str, Any] = {}


class CorrelationPrediction(BaseModel):
    uncorrelated_part: float
    amplitude: float
    decay_exponent: float
