"""Shared fixtures.  The two reference trees are expensive enough that the
whole suite builds each exactly once."""

from fractions import Fraction

import pytest

from amofractal import (
    assign_mass,
    build_tree,
    faithful_constants,
    ids_table,
    named_alpha,
    toy_constants,
    toy_delta_schedule,
)


@pytest.fixture(scope="session")
def golden():
    return named_alpha("golden")


@pytest.fixture(scope="session")
def silver():
    return named_alpha("silver")


@pytest.fixture(scope="session")
def faithful_tree(golden):
    # level 1 at target exponent 1: the schedule ramp starts there anyway
    return build_tree(golden, Fraction(1), faithful_constants(), depth=1)


@pytest.fixture(scope="session")
def faithful_mass(faithful_tree):
    return assign_mass(faithful_tree)


@pytest.fixture(scope="session")
def toy_tree(golden):
    return build_tree(
        golden,
        2,
        toy_constants(),
        depth=3,
        branch_policy=("sample", 2),
        delta_schedule=toy_delta_schedule(),
        max_windows=1,
    )


@pytest.fixture(scope="session")
def toy_mass(toy_tree):
    return assign_mass(toy_tree)


@pytest.fixture(scope="session")
def staircase_144():
    return ids_table(0.5, 89, 144)
