"""Simulation and key-rate analysis of hyperentanglement-based quantum secret sharing."""

from .ghz import PSI0_PLUS, PauliOp, PolGHZLabel, decode_key, predict_state
from .keyrate import key_rate, max_distance
from .photonics import ChannelParams

__all__ = [
    "ChannelParams",
    "PSI0_PLUS",
    "PauliOp",
    "PolGHZLabel",
    "decode_key",
    "key_rate",
    "max_distance",
    "predict_state",
]
__version__ = "0.1.0"
