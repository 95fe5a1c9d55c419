"""Label algebra of the eight three-photon polarization GHZ states.

A label ``psi_i^s`` stands for ``(|x> + s|~x>)/sqrt(2)`` where ``x`` is the
flip pattern of index ``i`` (000, 100, 010, 001) and ``~x`` its complement.
Single-photon Pauli operations permute the labels up to a global phase, so
the whole protocol logic (encoding, decoding, security checking) can be
carried out on labels alone.

Internally every label also has a 3-bit group code ``(x2, x3, s)``: the flip
pattern normalised so that photon 1 is unflipped, plus the sign bit.  Pauli
actions and the momentum-induced analyzer offset are XORs on that code.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

# Flip patterns (photon1, photon2, photon3) read off the first ket of each state.
FLIP_PATTERNS: tuple[tuple[int, int, int], ...] = (
    (0, 0, 0),
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
)


class PauliOp(enum.Enum):
    """Polarization encoding operation applied by one participant."""

    I = "I"
    X = "X"
    Y = "Y"
    Z = "Z"

    @property
    def key_class(self) -> int:
        """0 for the U1 class (I, Z), 1 for the U2 class (X, Y)."""
        return 1 if self in (PauliOp.X, PauliOp.Y) else 0

    @property
    def flips_bit(self) -> bool:
        return self in (PauliOp.X, PauliOp.Y)

    @property
    def flips_sign(self) -> bool:
        return self in (PauliOp.Y, PauliOp.Z)

    @property
    def code(self) -> int:
        return _OP_ORDER.index(self)

    @classmethod
    def from_code(cls, code: int) -> "PauliOp":
        return _OP_ORDER[code]


_OP_ORDER = (PauliOp.I, PauliOp.X, PauliOp.Y, PauliOp.Z)


def _canonical_index(pattern: Sequence[int]) -> int:
    bits = tuple(int(b) for b in pattern)
    if sum(bits) > 1:
        bits = tuple(1 - b for b in bits)
    return FLIP_PATTERNS.index(bits)


@dataclass(frozen=True, order=True)
class PolGHZLabel:
    """One of the eight GHZ labels; also used for the momentum DOF."""

    index: int
    sign: int = 1

    def __post_init__(self) -> None:
        if self.index not in (0, 1, 2, 3):
            raise ValueError(f"GHZ index must be in 0..3, got {self.index!r}")
        if self.sign not in (1, -1):
            raise ValueError(f"GHZ sign must be +1 or -1, got {self.sign!r}")

    @property
    def flip_pattern(self) -> tuple[int, int, int]:
        return FLIP_PATTERNS[self.index]

    @property
    def code(self) -> int:
        """Group code ``4*x2 + 2*x3 + s`` with s=1 for the minus sign."""
        x1, x2, x3 = self.flip_pattern
        x2 ^= x1
        x3 ^= x1
        return (x2 << 2) | (x3 << 1) | (1 if self.sign < 0 else 0)

    @classmethod
    def from_code(cls, code: int) -> "PolGHZLabel":
        if not 0 <= code < 8:
            raise ValueError(f"label code must be in 0..7, got {code!r}")
        x2, x3, s = (code >> 2) & 1, (code >> 1) & 1, code & 1
        return cls(_canonical_index((0, x2, x3)), -1 if s else 1)

    @classmethod
    def parse(cls, text: str) -> "PolGHZLabel":
        """Parse ``"psi2-"``, ``"2-"`` or ``"psi_0^+"`` style names."""
        t = text.strip().lower().replace("psi", "").replace("_", "").replace("^", "")
        if len(t) != 2 or t[0] not in "0123" or t[1] not in "+-":
            raise ValueError(f"cannot parse GHZ label {text!r}")
        return cls(int(t[0]), 1 if t[1] == "+" else -1)

    def compose(self, other: "PolGHZLabel") -> "PolGHZLabel":
        """Group product of two labels (XOR of codes)."""
        return PolGHZLabel.from_code(self.code ^ other.code)

    def __str__(self) -> str:
        return f"psi{self.index}{'+' if self.sign > 0 else '-'}"


PSI0_PLUS = PolGHZLabel(0, 1)
ALL_LABELS: tuple[PolGHZLabel, ...] = tuple(
    PolGHZLabel(i, s) for i in range(4) for s in (1, -1)
)


def apply_pauli(state: PolGHZLabel, op: PauliOp, position: int) -> PolGHZLabel:
    """Label of ``U_op`` acting on photon ``position`` (1-based) of ``state``."""
    if position not in (1, 2, 3):
        raise ValueError(f"photon position must be 1, 2 or 3, got {position!r}")
    index, sign = state.index, state.sign
    if op.flips_bit:
        pattern = list(FLIP_PATTERNS[index])
        pattern[position - 1] ^= 1
        index = _canonical_index(pattern)
    if op.flips_sign:
        sign = -sign
    return PolGHZLabel(index, sign)


def iter_op_triples() -> Iterator[tuple[PauliOp, PauliOp, PauliOp]]:
    for a in _OP_ORDER:
        for b in _OP_ORDER:
            for c in _OP_ORDER:
                yield (a, b, c)


def predict_state(
    initial: PolGHZLabel, ops: Sequence[PauliOp]
) -> PolGHZLabel:
    if len(ops) != 3:
        raise ValueError("need exactly one operation per photon")
    state = initial
    for position, op in enumerate(ops, start=1):
        state = apply_pauli(state, op, position)
    return state


def decode_key(initial: PolGHZLabel, measured: PolGHZLabel) -> int:
    """Bob-Charlie key bit Alice infers from the analyzed state.

    The bit is the parity of photons 2 and 3 in the relative flip pattern;
    it does not depend on Alice's own operation or on the measured sign.
    """
    m = measured.flip_pattern
    i = initial.flip_pattern
    return (m[1] ^ i[1]) ^ (m[2] ^ i[2])


def key_bit(op_b: PauliOp, op_c: PauliOp) -> int:
    return op_b.key_class ^ op_c.key_class


class CheckResult(enum.Enum):
    CONSISTENT = "consistent"
    ERROR = "error"


def check_round(
    initial: PolGHZLabel, announced_ops: Sequence[PauliOp], measured: PolGHZLabel
) -> CheckResult:
    if predict_state(initial, announced_ops) == measured:
        return CheckResult.CONSISTENT
    return CheckResult.ERROR


# ---------------------------------------------------------------------------
# Vectorised helpers on integer codes (used by the Monte Carlo engine).

# Code delta produced by op code (0..3 = I, X, Y, Z) at photon position 0..2.
_OP_DELTA = np.zeros((3, 4), dtype=np.int8)
for _pos in range(3):
    for _op in _OP_ORDER:
        _OP_DELTA[_pos, _op.code] = (
            apply_pauli(PSI0_PLUS, _op, _pos + 1).code
        )


def op_code_deltas() -> np.ndarray:
    """Array ``[position, op_code] -> label-code XOR mask``."""
    return _OP_DELTA.copy()


def predict_codes(initial_codes: np.ndarray, op_codes: np.ndarray) -> np.ndarray:
    """Vectorised :func:`predict_state`; ``op_codes`` has shape (n, 3)."""
    out = np.asarray(initial_codes, dtype=np.int8).copy()
    for pos in range(3):
        out ^= _OP_DELTA[pos, op_codes[:, pos]]
    return out


def key_bits_from_codes(measured_codes: np.ndarray, initial_code: int = 0) -> np.ndarray:
    rel = np.asarray(measured_codes) ^ initial_code
    return ((rel >> 2) ^ (rel >> 1)) & 1
