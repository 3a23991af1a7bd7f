import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from repromap.scenarios import default_arm, wall_environment, wall_graph


@pytest.fixture(scope="session")
def arm():
    return default_arm()


@pytest.fixture(scope="session")
def wall_env():
    return wall_environment()


@pytest.fixture(scope="session")
def wall_task_graph():
    return wall_graph()


@pytest.fixture(scope="session")
def wall_regions(arm, wall_env, wall_task_graph):
    from repromap.region_planner import PlannerParams, plan_regions

    params = PlannerParams(random_seed=7)
    return plan_regions(arm, wall_env, wall_task_graph, params)


@pytest.fixture(scope="session")
def primary_region(wall_regions):
    from repromap.region_planner import select_primary_region

    return select_primary_region(wall_regions)
