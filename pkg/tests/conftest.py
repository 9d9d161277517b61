import numpy as np
import pytest

from chanassign.scenario import Scenario


def make_scenario(gains, quota, power=1.0, bandwidth=1.0, noise_density=1.0):
    """Scenario with explicit channel gains; defaults give sigma^2 B = 1 and
    r = gains, which is what the worked solver examples use."""
    gains = np.asarray(gains, dtype=float)
    m, n = gains.shape
    return Scenario(
        num_users=m,
        num_subchannels=n,
        per_channel_quota=quota,
        bandwidth=bandwidth,
        noise_density=noise_density,
        tx_power=np.full(m, power),
        channel_gain=gains,
    )


@pytest.fixture
def scenario_2x2():
    # identity assignment is optimal: log2(4) + log2(4) = 4, the swap gives 2
    return make_scenario([[3.0, 1.0], [1.0, 3.0]], quota=1)
