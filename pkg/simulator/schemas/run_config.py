from typing import List, Optional

from pydantic import BaseModel, Field, root_validator, validator

from .bath import BathSpec
from .qec import CycleSchedule


def _parse_list(v):
    if isinstance(v, str):
        return [item for item in (part.strip() for part in v.split(",")) if item]
    return v


class RunConfig(BaseModel):
    # [bath]
    s: float = 1.0
    lam: float = Field(0.05, alias="lambda")
    omega_c: float = 1.0
    v_b: float = 1.0
    kernel_method: str = "analytic"

    # [qec]
    code: str = "phase_flip_3"
    delta: float = 100.0
    cycles: int = 1
    qubit_positions: List[float] = [0.0, 1.0e6, 2.0e6]
    pulses_per_cycle: int = 0
    alpha: complex = complex(1 / 2 ** 0.5)
    beta: complex = complex(1 / 2 ** 0.5)
    memoryless: bool = False
    probability_floor: float = 1e-30

    # [run]
    mode: str = "exact"
    samples: int = 10000
    seed: int = 12345
    workers: int = 1
    output_path: str = "output"
    sign_limit: int = 24
    history_limit: int = 5
    factorization_radius: float = 1.0e5
    log_level: str = "INFO"

    # [analysis]
    delta_values: List[float] = [1.0, 10.0, 100.0, 1000.0]
    s_values: List[float] = [1.0]
    kernel_dx_values: List[float] = [0.0]
    kernel_dt_values: List[float] = [0.01, 0.1, 1.0, 10.0, 100.0, 1000.0, 10000.0]
    min_separation: int = 4
    max_separation: int = 16
    fock_modes: int = 2
    fock_cutoff: int = 10
    fock_omega_max: float = 5.0
    fock_tolerance: float = 1e-3
    oracle_modes: int = 2000
    oracle_omega_max: float = 40.0

    @validator("qubit_positions", "delta_values", "s_values", "kernel_dx_values", "kernel_dt_values", pre=True)
    def split_lists(cls, v):
        return _parse_list(v)

    @validator("alpha", "beta", pre=True)
    def parse_complex(cls, v):
        if isinstance(v, str):
            v = v.replace(" ", "")
        try:
            return complex(v)
        except (TypeError, ValueError):
            raise ValueError(f"not a complex number: {v!r}")

    @validator("mode")
    def known_mode(cls, v):
        if v not in ("exact", "montecarlo", "ope"):
            raise ValueError("mode must be one of exact, montecarlo, ope")
        return v

    @validator("kernel_method")
    def known_kernel_method(cls, v):
        if v not in ("analytic", "quadrature"):
            raise ValueError("kernel_method must be analytic or quadrature")
        return v

    @validator("s")
    def s_above_minus_one(cls, v):
        if v <= -1:
            raise ValueError("spectral exponent s must exceed -1")
        return v

    @validator("lam")
    def lambda_nonnegative(cls, v):
        if v < 0:
            raise ValueError("coupling lambda must be >= 0")
        return v

    @validator("omega_c", "v_b")
    def bath_scale_positive(cls, v, field):
        if v <= 0:
            raise ValueError(f"{field.name} must be > 0")
        return v

    @validator("cycles", "workers", "sign_limit", "fock_modes", "fock_cutoff", "oracle_modes")
    def at_least_one(cls, v, field):
        if v < 1:
            raise ValueError(f"{field.name} must be >= 1")
        return v

    @validator("pulses_per_cycle", "history_limit")
    def non_negative(cls, v, field):
        if v < 0:
            raise ValueError(f"{field.name} must be >= 0")
        return v

    @root_validator(skip_on_failure=True)
    def mode_requirements(cls, values):
        if values["mode"] == "montecarlo" and values["samples"] <= 0:
            raise ValueError("samples must be > 0 in montecarlo mode")
        norm = abs(values["alpha"]) ** 2 + abs(values["beta"]) ** 2
        if norm == 0:
            raise ValueError("alpha and beta cannot both vanish")
        scale = norm ** 0.5
        values["alpha"] = values["alpha"] / scale
        values["beta"] = values["beta"] / scale
        if values["min_separation"] < 1 or values["max_separation"] < values["min_separation"]:
            raise ValueError("need 1 <= min_separation <= max_separation")
        return values

    @property
    def bath(self) -> BathSpec:
        return BathSpec(s=self.s, lam=self.lam, omega_c=self.omega_c, v_b=self.v_b)

    def schedule(self, n_pulses: Optional[int] = None) -> CycleSchedule:
        return CycleSchedule.decoupling(self.delta, self.pulses_per_cycle if n_pulses is None else n_pulses)

    def public_dict(self) -> dict:
        """JSON-safe view with complex amplitudes split into re/im."""
        data = self.dict(by_alias=True)
        for key in ("alpha", "beta"):
            data[key] = {"re": data[key].real, "im": data[key].imag}
        return data

    class Config:
        allow_population_by_field_name = True
        arbitrary_types_allowed = True
        extra = "forbid"


