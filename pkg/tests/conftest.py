import pytest

import casemix
from casemix import compute_upper_bounds

from oracles import toy_instance


@pytest.fixture(scope="session")
def case_study():
    return casemix.io.load_bundled_instance()


@pytest.fixture(scope="session")
def case_bounds(case_study):
    return compute_upper_bounds(case_study)


@pytest.fixture(scope="session")
def case_program(case_study):
    return casemix.build_model(case_study)


@pytest.fixture()
def toy_ab():
    """One 100 h resource; A needs 1 h, B needs 2 h -> bounds (100, 50)."""
    return toy_instance({"A": [(1.0, "R")], "B": [(2.0, "R")]}, {"R": 100.0})
