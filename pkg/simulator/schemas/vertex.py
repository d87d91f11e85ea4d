from typing import List

from pydantic import BaseModel, validator


class VertexInsertion(BaseModel):
    site: int = 0
    x: float = 0.0
    t: float = 0.0
    charge: float
    ordinal: int


class VertexProduct(BaseModel):
    """
    Operator-ordered product of vertex insertions, leftmost first.

    Insertions that share an ordinal belong to one exponential.
    """
    insertions: List[VertexInsertion] = []
    prefactor: complex = 1.0 + 0j

    @validator("prefactor", pre=True)
    def parse_prefactor(cls, v):
        return complex(v)

    @validator("insertions")
    def ordinals_non_decreasing(cls, v):
        ordinals = [ins.ordinal for ins in v]
        if any(b < a for a, b in zip(ordinals, ordinals[1:])):
            raise ValueError("insertions must be listed in operator order (non-decreasing ordinal)")
        return v

    @property
    def total_charge(self) -> float:
        return sum(ins.charge for ins in self.insertions)

    class Config:
        arbitrary_types_allowed = True
