import numpy as np
import pytest

from wittenlab import circle_lab
from wittenlab.constants import compute_constants


@pytest.fixture(scope="session")
def consts():
    return compute_constants()


@pytest.fixture(scope="session")
def example_a():
    return circle_lab.example_function("A")


@pytest.fixture(scope="session")
def example_b():
    return circle_lab.example_function("B")


@pytest.fixture(scope="session")
def example_morse():
    """A plain Morse circle function: one minimum, one maximum."""
    return circle_lab.build_circle_function([1.0, 4.0], [])


@pytest.fixture(scope="session")
def example_two_bd():
    """One minimum, one maximum, two birth-death points with distinct |a|."""
    return circle_lab.build_circle_function([0.4, 2.2], [3.4, 5.2])


@pytest.fixture(scope="session")
def a_sweep():
    return circle_lab.default_t_schedule("A")


@pytest.fixture(scope="session")
def b_sweep():
    return circle_lab.default_t_schedule("B")
