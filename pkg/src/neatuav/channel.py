"""mmWave link-budget primitives: geometry, path loss, SNR/SINR algebra.

All powers are linear (watts) internally; dBm only appears at the config
boundary. Rates are handled as spectral efficiency (bit/s/Hz) throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ChannelParams:
    intercept: float  # path-loss intercept C (linear)
    exponent: float  # path-loss exponent a
    noise_w: float  # noise power sigma^2 (watts)
    mimo_gain: float  # G = N_uav * N_ue antenna gain (linear)
    p_t_w: float  # transmit power per cluster (watts)
    bandwidth_hz: float  # W

    def validate(self) -> None:
        for name in ("intercept", "noise_w", "mimo_gain", "p_t_w", "bandwidth_hz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.exponent < 1:
            raise ValueError("exponent must be at least 1")

    @property
    def snr_coefficient(self) -> float:
        """P_T * G / sigma^2; multiply by a channel gain to get the SNR."""
        return self.p_t_w * self.mimo_gain / self.noise_w


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def distance_3d(uav, user) -> float:
    """Euclidean distance from the UAV to a ground user (user height 0)."""
    dx = uav[0] - user[0]
    dy = uav[1] - user[1]
    return math.sqrt(dx * dx + dy * dy + uav[2] * uav[2])


def channel_gain(d: float, params: ChannelParams) -> float:
    """Power-law gain C * d^-a; strictly decreasing in distance."""
    if d <= 0:
        raise ValueError("distance must be strictly positive")
    return params.intercept * d ** -params.exponent


def sinr_value(snr: float, alpha: float, beta: float) -> float:
    """SIC-aware SINR: snr*alpha / (snr*beta + 1).

    beta is the partner's coefficient for the weak cluster member and 0 for
    the strong member, whose intra-cluster interference is cancelled.
    """
    return snr * alpha / (snr * beta + 1.0)


def se_from_sinr(sinr: float) -> float:
    return math.log2(1.0 + sinr)


def min_alpha_feasible(r_min_se: float, snr: float) -> float:
    """Smallest coefficient meeting r_min_se for an interference-free user."""
    if snr <= 0:
        raise ValueError("snr must be strictly positive")
    return (2.0 ** r_min_se - 1.0) / snr
