"""NEAT-evolved control of a NOMA mmWave UAV base station.

Deterministic downlink simulator (geometry, path loss, SIC-aware rates),
a from-scratch neuroevolution engine, training/evaluation orchestration,
and brute-force oracles for verification.
"""

from .channel import ChannelParams, dbm_to_watts, min_alpha_feasible, watts_to_dbm
from .environment import (
    ALPHA_FLOOR,
    Action,
    Cluster,
    EnvState,
    RewardWeights,
    Scene,
)
from .evolution import NeatConfig, Population, Species
from .genome import Genome, InnovationTracker, load_genome, save_genome

__all__ = [
    "ALPHA_FLOOR",
    "Action",
    "ChannelParams",
    "Cluster",
    "EnvState",
    "Genome",
    "InnovationTracker",
    "NeatConfig",
    "Population",
    "RewardWeights",
    "Scene",
    "Species",
    "dbm_to_watts",
    "load_genome",
    "min_alpha_feasible",
    "save_genome",
    "watts_to_dbm",
]

__version__ = "0.1.0"
