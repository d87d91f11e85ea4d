from .bath import BathSpec, SpacetimePoint
from .fock import FockConfig
from .qec import CycleSchedule, HistoryResult, SyndromeHistory
from .results import CorrelationPrediction, EffectiveCycleOperator
from .run_config import RunConfig
from .vertex import VertexInsertion, VertexProduct
