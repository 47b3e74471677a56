import pytest

from sta_swap import ProtocolConfig
from sta_swap.protocol import extract_gate, rank_sign_patterns


@pytest.fixture(scope="session")
def config():
    return ProtocolConfig()


@pytest.fixture(scope="session")
def calibration(config):
    return rank_sign_patterns(config)


@pytest.fixture(scope="session")
def gate(config):
    return extract_gate(config)


@pytest.fixture(scope="session")
def gamma_sweep(config):
    """Equal-superposition fidelities over gamma in [0, 1] at kappa = 0 and 10."""
    from sta_swap import sweep

    return sweep(config, [0.0, 0.25, 0.5, 0.75, 1.0], [0.0, 10.0], ["per_channel"])
