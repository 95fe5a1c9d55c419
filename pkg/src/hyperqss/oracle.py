"""Amplitude-level reference simulator for three photons with two qubit DOFs.

States are plain complex arrays of length 64 laid out as the tensor
``[p1, p2, p3, m1, m2, m3]`` with ``H=0, V=1`` for polarization and
``L=0, R=1`` for momentum.  Everything here is brute force on purpose: it is
the independent check for the label algebra and for attack error rates.

The analyzer is modelled as a projective measurement onto the 64 product
GHZ states.  When the momentum outcome is ``psi_m`` rather than ``psi0+`` the
analyzer reports the polarization label shifted by ``m`` (label-group
product), which is what makes a correct report occur with probability
``F_P*F_M + (1-F_P)(1-F_M)/7`` under the decoherence mixtures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .ghz import (
    ALL_LABELS,
    PSI0_PLUS,
    PauliOp,
    PolGHZLabel,
    iter_op_triples,
    predict_state,
)

DIM = 64
TOL = 1e-12

PAULI_MATRICES = {
    PauliOp.I: np.array([[1, 0], [0, 1]], dtype=complex),
    PauliOp.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    PauliOp.X: np.array([[0, 1], [1, 0]], dtype=complex),
    # |H><V| - |V><H|
    PauliOp.Y: np.array([[0, 1], [-1, 0]], dtype=complex),
}


def ghz_vector(label: PolGHZLabel) -> np.ndarray:
    """8-dim GHZ state of one DOF (works for polarization and momentum)."""
    vec = np.zeros(8, dtype=complex)
    x = label.flip_pattern
    xbar = tuple(1 - b for b in x)
    vec[int("".join(map(str, x)), 2)] += 1 / math.sqrt(2)
    vec[int("".join(map(str, xbar)), 2)] += label.sign / math.sqrt(2)
    return vec


def ghz_basis_state(pol: PolGHZLabel, mom: PolGHZLabel = PSI0_PLUS) -> np.ndarray:
    return np.kron(ghz_vector(pol), ghz_vector(mom))


def norm(state: np.ndarray) -> float:
    return float(np.vdot(state, state).real)


def check_normalized(state: np.ndarray, tol: float = TOL) -> None:
    if state.shape != (DIM,):
        raise ValueError(f"expected a length-{DIM} state, got shape {state.shape}")
    n = norm(state)
    if abs(n - 1.0) > tol:
        raise ValueError(f"state not normalized: |psi|^2 = {n!r}")


def apply_encoding(state: np.ndarray, ops: Sequence[PauliOp]) -> np.ndarray:
    """Apply one polarization Pauli per photon; momentum is untouched."""
    if len(ops) != 3:
        raise ValueError("need exactly one operation per photon")
    psi = np.asarray(state, dtype=complex).reshape((2,) * 6)
    for photon, op in enumerate(ops):
        psi = np.tensordot(PAULI_MATRICES[op], psi, axes=([1], [photon]))
        psi = np.moveaxis(psi, 0, photon)
    return psi.reshape(DIM)


_BASIS_KEYS = [(p, m) for p in ALL_LABELS for m in ALL_LABELS]
_BASIS = np.array([ghz_basis_state(p, m) for p, m in _BASIS_KEYS])


def project_ghz(state: np.ndarray) -> dict[tuple[PolGHZLabel, PolGHZLabel], float]:
    """Outcome distribution of the product-GHZ measurement."""
    check_normalized(state)
    probs = np.abs(_BASIS.conj() @ state) ** 2
    return {key: float(pr) for key, pr in zip(_BASIS_KEYS, probs)}


def project_ghz_array(state: np.ndarray) -> np.ndarray:
    """Same as :func:`project_ghz` as a ``[pol_code, mom_code]`` array."""
    probs = np.abs(_BASIS.conj() @ state) ** 2
    out = np.zeros((8, 8))
    for (p, m), pr in zip(_BASIS_KEYS, probs):
        out[p.code, m.code] = pr
    return out


def reported_label(pol: PolGHZLabel, mom: PolGHZLabel) -> PolGHZLabel:
    """Polarization label the analyzer reports for a (pol, mom) outcome."""
    return pol.compose(mom)


@dataclass(frozen=True)
class Ensemble:
    """Classical mixture of pure 64-dim states."""

    members: tuple[tuple[float, np.ndarray], ...]

    def __post_init__(self) -> None:
        weights = [w for w, _ in self.members]
        if any(w < 0 for w in weights):
            raise ValueError("ensemble weights must be non-negative")
        if abs(sum(weights) - 1.0) > TOL:
            raise ValueError(f"ensemble weights sum to {sum(weights)!r}, not 1")
        for _, state in self.members:
            check_normalized(state)

    @classmethod
    def pure(cls, state: np.ndarray) -> "Ensemble":
        return cls(((1.0, np.asarray(state, dtype=complex)),))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, np.ndarray]]) -> "Ensemble":
        return cls(tuple((float(w), np.asarray(s, dtype=complex)) for w, s in pairs))

    def __len__(self) -> int:
        return len(self.members)


# Named single-photon resend states over (pol, mom) = (H,L), (H,R), (V,L), (V,R).
_S = 1 / math.sqrt(2)
RESEND_STATES: dict[str, np.ndarray] = {
    "HL": np.array([1, 0, 0, 0], dtype=complex),
    "VR": np.array([0, 0, 0, 1], dtype=complex),
    # |+>_P |+>_M
    "DD": np.array([0.5, 0.5, 0.5, 0.5], dtype=complex),
    # |+>_P |L>
    "DL": np.array([_S, 0, _S, 0], dtype=complex),
    # |H> |+>_M
    "HD": np.array([_S, _S, 0, 0], dtype=complex),
}


def resend_state(spec: str | np.ndarray) -> np.ndarray:
    if isinstance(spec, str):
        try:
            return RESEND_STATES[spec.upper()].copy()
        except KeyError:
            raise ValueError(
                f"unknown resend state {spec!r}; choose from {sorted(RESEND_STATES)}"
            ) from None
    vec = np.asarray(spec, dtype=complex).reshape(4)
    if abs(np.vdot(vec, vec).real - 1) > TOL:
        raise ValueError("resend state must be normalized")
    return vec


def intercept_resend_ensemble(resend: str | np.ndarray = "HL") -> Ensemble:
    """Eve's fresh photon at Alice's position times the Bob-Charlie reduced state.

    Tracing photon 1 out of ``psi0+ (x) psi0+`` leaves Bob and Charlie in an
    equal mixture of ``|xx>_P |yy>_M`` for ``x in {H,V}`` and ``y in {L,R}``.
    """
    photon = resend_state(resend).reshape(2, 2)
    members = []
    for x in (0, 1):
        for y in (0, 1):
            psi = np.zeros((2,) * 6, dtype=complex)
            psi[:, x, x, :, y, y] = photon
            members.append((0.25, psi.reshape(DIM)))
    return Ensemble.from_pairs(members)


def check_error_probability(
    state: np.ndarray,
    ops: Sequence[PauliOp],
    initial: PolGHZLabel = PSI0_PLUS,
) -> float:
    """Probability that one check round with ``ops`` is flagged as an error."""
    predicted = predict_state(initial, ops)
    dist = project_ghz(apply_encoding(state, ops))
    ok = sum(pr for (p, m), pr in dist.items() if reported_label(p, m) == predicted)
    return 1.0 - ok


def expected_check_error(ensemble: Ensemble, initial: PolGHZLabel = PSI0_PLUS) -> float:
    """Error rate averaged over members, uniform op triples and outcomes."""
    triples = list(iter_op_triples())
    total = 0.0
    for weight, state in ensemble.members:
        total += weight * sum(check_error_probability(state, ops, initial) for ops in triples)
    return total / len(triples)


def label_mixture_ensemble(
    pol_weights: dict[PolGHZLabel, float], mom: PolGHZLabel = PSI0_PLUS
) -> Ensemble:
    """GHZ-diagonal polarization mixture times a fixed momentum GHZ state."""
    return Ensemble.from_pairs(
        (w, ghz_basis_state(label, mom)) for label, w in pol_weights.items() if w > 0
    )


def outcome_table(ensemble: Ensemble) -> np.ndarray:
    """``[member, op_triple_code, pol_code, mom_code]`` outcome probabilities.

    ``op_triple_code = 16*a + 4*b + c`` with op codes I=0, X=1, Y=2, Z=3.
    """
    triples = list(iter_op_triples())
    out = np.zeros((len(ensemble), len(triples), 8, 8))
    for i, (_, state) in enumerate(ensemble.members):
        for j, ops in enumerate(triples):
            out[i, j] = project_ghz_array(apply_encoding(state, ops))
    return out
