import pytest

import kerrcool as kc


@pytest.fixture(scope="session")
def defaults():
    return kc.default_params()


@pytest.fixture(scope="session")
def crit_drive(defaults):
    return kc.critical_power(defaults)


@pytest.fixture(scope="session")
def crit_state(defaults, crit_drive):
    """Steady state at the bifurcation detuning and the critical drive."""
    return kc.steady_at(defaults, kc.bifurcation(defaults).delta_bi, crit_drive)


@pytest.fixture(scope="session")
def optimal_state(defaults, crit_drive):
    """Steady state at the occupation-optimal detuning at critical drive."""
    from kerrcool.sweeps import optimal_detuning
    delta, _ = optimal_detuning(defaults, crit_drive)
    return kc.steady_at(defaults, delta, crit_drive)
