import pytest

from subsearch import (
    Beta,
    MarketParams,
    Uniform,
    solve_reasonable_equilibrium,
)


@pytest.fixture(scope="session")
def uniform():
    return Uniform()


@pytest.fixture(scope="session")
def beta22():
    return Beta(2.0, 2.0)


@pytest.fixture(scope="session")
def baseline_params():
    # pooling regime: capped schedule, top pool active
    return MarketParams(n=10, c=0.5, p=1.0, u=1.0)


@pytest.fixture(scope="session")
def no_pool_params():
    # revealing regime: the uncapped schedule stays below c
    return MarketParams(n=10, c=0.5, p=1.8, u=1.0)


@pytest.fixture(scope="session")
def baseline_solution(baseline_params, uniform):
    return solve_reasonable_equilibrium(baseline_params, uniform)


@pytest.fixture(scope="session")
def no_pool_solution(no_pool_params, uniform):
    return solve_reasonable_equilibrium(no_pool_params, uniform)
