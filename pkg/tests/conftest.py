import pytest

from neatuav.channel import ChannelParams, dbm_to_watts
from neatuav.environment import RewardWeights, Scene


@pytest.fixture
def scene():
    return Scene()


@pytest.fixture
def params():
    # default channel: C=10^-6.4, a=2, sigma^2=-84 dBm, P_T=20 dBm, 8x8 antennas, W=2 GHz
    return ChannelParams(
        intercept=10.0 ** -6.4,
        exponent=2.0,
        noise_w=dbm_to_watts(-84.0),
        mimo_gain=64.0,
        p_t_w=dbm_to_watts(20.0),
        bandwidth_hz=2e9,
    )


@pytest.fixture
def weights():
    return RewardWeights()
