import math
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, validator


class CycleSchedule(BaseModel):
    delta: float = 100.0
    pulses: List[float] = []  # logical NOT times inside (0, delta)

    @validator("delta")
    def delta_positive(cls, v):
        if v <= 0:
            raise ValueError("cycle duration delta must be > 0")
        return v

    @validator("pulses")
    def pulses_inside_cycle(cls, v, values):
        delta = values.get("delta")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("pulse times must be strictly increasing")
        if delta is not None and any(t <= 0 or t >= delta for t in v):
            raise ValueError("pulse times must lie strictly inside (0, delta)")
        return v

    @property
    def n_pulses(self) -> int:
        return len(self.pulses)

    @classmethod
    def decoupling(cls, delta: float, n_pulses: int = 1) -> "CycleSchedule":
        """
        n logical NOTs at tau_p = delta * sin^2(pi p / (2n + 2)).

        n=1 is the mid-cycle pulse; for every n the first n time moments of
        the signed field increment vanish.
        """
        pulses = [delta * math.sin(math.pi * p / (2 * n_pulses + 2)) ** 2 for p in range(1, n_pulses + 1)]
        return cls(delta=delta, pulses=pulses)

    def segment_times(self) -> List[float]:
        return [0.0] + list(self.pulses) + [self.delta]

    class Config:
        allow_mutation = False


class SyndromeHistory(BaseModel):
    w: List[int]

    @property
    def N(self) -> int:
        return len(self.w)

    def to_string(self) -> str:
        return "-".join(str(m) for m in self.w)


class HistoryResult(BaseModel):
    history: SyndromeHistory
    probability: float
    rho: Optional[List[List[complex]]] = None
    diagnostics: Dict[str, Any] = {}

    @property
    def offdiag(self) -> Optional[complex]:
        return None if self.rho is None else self.rho[0][1]

    class Config:
        arbitrary_types_allowed = True
