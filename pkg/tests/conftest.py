import numpy as np
import pytest

from core.cost_model import default_layer_specs
from core.views import EncryptionParams, Task, TaskCategory, WeightConfig
from sim.scenario import separable_scenario, smart_city_scenario


def make_task(
    latency_req: float = 0.1,
    complexity: float = 1e6,
    data_size: float = 1.0,
    privacy: int = 0,
    task_id: str = "t",
    arrival_time: float = 0.0,
    category: TaskCategory = TaskCategory.REALTIME,
) -> Task:
    return Task(
        id=task_id,
        arrival_time=arrival_time,
        latency_req=latency_req,
        complexity=complexity,
        data_size=data_size,
        privacy=privacy,
        category=category,
    )


def random_tasks(count: int, seed: int = 0) -> list[Task]:
    """Log-uniform latency/complexity/size across the full band range."""
    rng = np.random.default_rng(seed)
    return [
        make_task(
            latency_req=float(10 ** rng.uniform(-3, 0)),
            complexity=float(10 ** rng.uniform(4, 10)),
            data_size=float(10 ** rng.uniform(-3, -1)),
            privacy=int(rng.integers(2)),
            task_id=f"r{i}",
        )
        for i in range(count)
    ]


@pytest.fixture
def specs():
    return default_layer_specs()


@pytest.fixture
def weights():
    return WeightConfig()


@pytest.fixture
def encryption():
    return EncryptionParams(alpha=0.01, beta=0.005)


@pytest.fixture
def smart_city():
    return smart_city_scenario()


@pytest.fixture
def small_city():
    """Smart-city at a tenth of the load; quick enough for per-test runs."""
    return smart_city_scenario().model_copy(update={"task_count": 100, "duration": 360.0, "replications": 2})


@pytest.fixture
def separable():
    return separable_scenario()
