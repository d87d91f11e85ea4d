import pytest

from simulator.schemas.bath import BathSpec
from simulator.schemas.qec import CycleSchedule
from simulator.schemas.run_config import RunConfig
from simulator.utils.bath_field import ContinuumKernel
from simulator.utils.cache import clear_cache
from simulator.utils.qec_dynamics import HistoryModel
from simulator.utils.stabilizer import phase_flip_code

FAR = 1.0e8  # qubit spacing, in units of 1/omega_c


@pytest.fixture(autouse=True)
def _fresh_cache():
    clear_cache()
    yield
    clear_cache()


@pytest.fixture(autouse=True)
def _no_env(monkeypatch):
    for name in ("QECSIM_LOG_LEVEL", "QECSIM_WORKERS", "QECSIM_OUTPUT_DIR", "QECSIM_KERNEL_METHOD"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def code3():
    return phase_flip_code(3)


@pytest.fixture
def bath():
    return BathSpec(s=1.0, lam=0.1, omega_c=1.0)


@pytest.fixture
def kernel(bath):
    return ContinuumKernel(bath)


def make_far_model(code, bath, delta=100.0, pulses=0, **kwargs):
    schedule = CycleSchedule.decoupling(delta, pulses)
    return HistoryModel(code, schedule, bath, [FAR * j for j in range(code.n)],
                        factorization_radius=FAR / 10, **kwargs)


@pytest.fixture
def far_model(code3, bath):
    return make_far_model(code3, bath)


@pytest.fixture
def run_config(tmp_path):
    return RunConfig(output_path=str(tmp_path / "out"), lam=0.1, cycles=2)
