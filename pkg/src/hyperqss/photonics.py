"""Physical-layer parameters: source statistics, fiber loss, threshold detectors
and the GHZ-diagonal decoherence of both DOFs."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, fields, replace
from typing import Any

import numpy as np

from .ghz import ALL_LABELS, PSI0_PLUS, PolGHZLabel


class AlphaConvention(str, enum.Enum):
    QUARTER = "quarter"
    FULL = "full"


class GainVariant(str, enum.Enum):
    PRINTED = "printed"
    RECOMPUTED = "recomputed"


@dataclass(frozen=True)
class ChannelParams:
    """Source, channel and detector parameters at one distance.

    Defaults are the simulation parameters of the reference setup
    (p=1e-3, p_d=1e-7, eta_c=0.9, eta_d=0.93, 0.2 dB/km, F_P=F_M=0.98,
    f=1.12).  ``L`` is the source-to-party distance; every photon arm sees
    its own ``eta_t``.

    ``multipair=False`` drops the two-pair emission term, so the source emits
    a pair with probability ``p`` and nothing otherwise (valid up to p=1).
    """

    p: float = 1e-3
    pd: float = 1e-7
    eta_c: float = 0.9
    eta_d: float = 0.93
    beta: float = 0.2
    L: float = 0.0
    F_P: float = 0.98
    F_M: float = 0.98
    f: float = 1.12
    alpha_convention: AlphaConvention = AlphaConvention.QUARTER
    gain_variant: GainVariant = GainVariant.PRINTED
    e1_fidelity: bool = False
    multipair: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha_convention", AlphaConvention(self.alpha_convention))
        object.__setattr__(self, "gain_variant", GainVariant(self.gain_variant))
        for name in ("p", "pd", "eta_c", "eta_d", "F_P", "F_M"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta!r}")
        if self.L < 0:
            raise ValueError(f"L must be >= 0, got {self.L!r}")
        if self.f < 1:
            raise ValueError(f"f must be >= 1, got {self.f!r}")
        if self.multipair and self.p + self.p**2 > 1:
            raise ValueError("p + p^2 must not exceed 1 when multipair emission is on")

    def with_(self, **changes: Any) -> "ChannelParams":
        return replace(self, **changes)

    def switches(self) -> str:
        """One-line description of the active convention switches."""
        return (
            f"alpha_convention={self.alpha_convention.value} "
            f"gain_variant={self.gain_variant.value} "
            f"e1_fidelity={'on' if self.e1_fidelity else 'off'} "
            f"multipair={'on' if self.multipair else 'off'}"
        )

    def as_dict(self) -> dict[str, Any]:
        out = {}
        for fld in fields(self):
            value = getattr(self, fld.name)
            out[fld.name] = value.value if isinstance(value, enum.Enum) else value
        return out


# Convention switches whose rates land closest to the published curves.
REFERENCE_CURVES = dict(
    alpha_convention=AlphaConvention.FULL,
    gain_variant=GainVariant.RECOMPUTED,
    e1_fidelity=False,
)


def transmission(beta: float, L: float) -> float:
    if beta < 0 or L < 0:
        raise ValueError(f"beta and L must be non-negative, got beta={beta!r}, L={L!r}")
    return 10.0 ** (-beta * L / 10.0)


def collection_efficiency(params: ChannelParams) -> float:
    """alpha = eta_c * eta_t * eta_d for one photon arm."""
    return params.eta_c * transmission(params.beta, params.L) * params.eta_d


def alpha_prime(params: ChannelParams) -> float:
    """Per-detector click probability contributed by one incident photon."""
    alpha = collection_efficiency(params)
    if params.alpha_convention is AlphaConvention.QUARTER:
        return alpha / 4.0
    return alpha


def detect_prob(k: int, a_prime: float, pd: float) -> float:
    """Threshold-detector click probability with ``k`` incident photons."""
    if k < 0:
        raise ValueError(f"photon count must be >= 0, got {k!r}")
    if k > 2:
        warnings.warn(
            f"detect_prob called with k={k}; the model only covers k <= 2",
            stacklevel=2,
        )
    if pd >= 1.0 or (k and a_prime >= 1.0):
        return 1.0
    # 1 - (1-a')^k (1-pd) without cancellation when a' and pd are tiny
    log_dark = k * math.log1p(-a_prime) if k else 0.0
    return -math.expm1(log_dark + math.log1p(-pd))


def detect_prob_expanded(k: int, a_prime: float, pd: float) -> float:
    """Expanded polynomials printed for k = 0, 1, 2."""
    a = a_prime
    if k == 0:
        return pd
    if k == 1:
        return a + pd - a * pd
    if k == 2:
        return 2 * a + a * a * pd + pd - 2 * a * pd - a * a
    raise ValueError("expanded form only exists for k <= 2")


def emission_probs(params: ChannelParams) -> tuple[float, float, float]:
    """Probabilities of emitting 0, 1 and 2 hyperentangled pairs."""
    p = params.p
    if params.multipair:
        return (1.0 - p - p * p, p, p * p)
    return (1.0 - p, p, 0.0)


def sample_emission(
    params: ChannelParams, rng: np.random.Generator, size: int | None = None
):
    """Number of pairs per pulse (0, 1 or 2)."""
    probs = emission_probs(params)
    u = rng.random(size)
    out = (u >= probs[0]).astype(np.int8) + (u >= probs[0] + probs[1]).astype(np.int8)
    return int(out) if size is None else out


def dof_label_weights(F: float) -> dict[PolGHZLabel, float]:
    """Target psi0+ with weight F, the other seven with (1-F)/7 each."""
    return {lab: (F if lab == PSI0_PLUS else (1.0 - F) / 7.0) for lab in ALL_LABELS}


def sample_dof_codes(F: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Label codes drawn from the decoherence mixture (psi0+ has code 0)."""
    wrong = rng.random(size) >= F
    codes = np.zeros(size, dtype=np.int8)
    n_wrong = int(wrong.sum())
    if n_wrong:
        codes[wrong] = rng.integers(1, 8, size=n_wrong, dtype=np.int8)
    return codes


def sample_dof_label(F: float, rng: np.random.Generator) -> PolGHZLabel:
    return PolGHZLabel.from_code(int(sample_dof_codes(F, rng, 1)[0]))


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based Philox generator for (seed, stream)."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(stream)])
    return np.random.Generator(np.random.Philox(ss))


def fidelity_factor(F_P: float, F_M: float) -> float:
    """Probability that the analyzer reports the encoded label correctly."""
    return F_P * F_M + (1.0 - F_P) * (1.0 - F_M) / 7.0

