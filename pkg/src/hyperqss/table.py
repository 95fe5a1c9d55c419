"""Detector-response table of the hyperentanglement-assisted GHZ analysis.

Detectors D1-D4 sit at Alice, D5-D8 at Bob and D9-D12 at Charlie.  With the
momentum auxiliary in ``psi0+`` every polarization GHZ label lights exactly
eight detector triples, each with equal probability, and the eight rows
partition the 64 possible triples.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .ghz import ALL_LABELS, PolGHZLabel

ALICE_DETECTORS = (1, 2, 3, 4)
BOB_DETECTORS = (5, 6, 7, 8)
CHARLIE_DETECTORS = (9, 10, 11, 12)


@dataclass(frozen=True, order=True)
class DetectorTriple:
    a: int
    b: int
    c: int

    def __post_init__(self) -> None:
        if (
            self.a not in ALICE_DETECTORS
            or self.b not in BOB_DETECTORS
            or self.c not in CHARLIE_DETECTORS
        ):
            raise ValueError(f"invalid detector triple ({self.a}, {self.b}, {self.c})")

    @classmethod
    def parse(cls, text: str) -> "DetectorTriple":
        """Parse ``"D1D5D9"`` (case-insensitive)."""
        parts = [p for p in text.strip().upper().split("D") if p]
        if len(parts) != 3:
            raise ValueError(f"cannot parse detector triple {text!r}")
        return cls(*(int(p) for p in parts))

    @property
    def detectors(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)

    def __str__(self) -> str:
        return f"D{self.a}D{self.b}D{self.c}"


ALL_TRIPLES: tuple[DetectorTriple, ...] = tuple(
    DetectorTriple(a, b, c)
    for a in ALICE_DETECTORS
    for b in BOB_DETECTORS
    for c in CHARLIE_DETECTORS
)

# Transcribed row by row; each row is printed as two halves of four triples.
_TABLE_TEXT = {
    "psi0+": ("D1D5D9 D1D6D10 D2D5D10 D2D6D9", "D3D7D11 D3D8D12 D4D7D12 D4D8D11"),
    "psi0-": ("D2D6D10 D2D5D9 D1D6D9 D1D5D10", "D4D8D12 D4D7D11 D3D8D11 D3D7D12"),
    "psi1+": ("D3D5D9 D3D6D10 D4D5D10 D4D6D9", "D1D7D11 D1D8D12 D2D7D12 D2D8D11"),
    "psi1-": ("D4D6D10 D4D5D9 D3D6D9 D3D5D10", "D2D8D12 D2D7D11 D1D8D11 D1D7D12"),
    "psi2+": ("D1D7D9 D1D8D10 D2D7D10 D2D8D9", "D3D5D11 D3D6D12 D4D5D12 D4D6D11"),
    "psi2-": ("D2D8D10 D2D7D9 D1D8D9 D1D7D10", "D4D6D12 D4D5D11 D3D6D11 D3D5D12"),
    "psi3+": ("D1D5D11 D1D6D12 D2D5D12 D2D6D11", "D3D7D9 D3D8D10 D4D7D10 D4D8D9"),
    "psi3-": ("D2D6D12 D2D5D11 D1D6D11 D1D5D12", "D4D8D10 D4D7D9 D3D8D9 D3D7D10"),
}


def _parse_halves(text: Mapping[str, tuple[str, str]]):
    rows: dict[PolGHZLabel, tuple[tuple[DetectorTriple, ...], tuple[DetectorTriple, ...]]] = {}
    for name, halves in text.items():
        rows[PolGHZLabel.parse(name)] = tuple(
            tuple(DetectorTriple.parse(t) for t in half.split()) for half in halves
        )
    return rows


TABLE_HALVES = _parse_halves(_TABLE_TEXT)
TABLE: dict[PolGHZLabel, tuple[DetectorTriple, ...]] = {
    label: halves[0] + halves[1] for label, halves in TABLE_HALVES.items()
}


def table_checksum(table: Mapping[PolGHZLabel, tuple[DetectorTriple, ...]] = TABLE) -> str:
    """SHA-256 over a canonical text dump (rows in label order, triples in print order)."""
    lines = [
        f"{label}:" + ",".join(str(t) for t in table[label])
        for label in sorted(table, key=lambda lab: (lab.index, -lab.sign))
    ]
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


@dataclass
class PartitionReport:
    ok: bool
    row_sizes: dict[str, int]
    duplicates: dict[str, list[str]] = field(default_factory=dict)
    missing: list[str] = field(default_factory=list)
    unknown_rows: list[str] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"table partition: {'PASS' if self.ok else 'FAIL'}"]
        for name, size in self.row_sizes.items():
            flag = "" if size == 8 else "  (expected 8)"
            out.append(f"  row {name}: {size} triples{flag}")
        for trip, rows in sorted(self.duplicates.items()):
            out.append(f"  duplicate {trip} in rows {', '.join(rows)}")
        if self.missing:
            out.append(f"  coverage gap: {', '.join(self.missing)}")
        if self.unknown_rows:
            out.append(f"  missing label rows: {', '.join(self.unknown_rows)}")
        return out

    def __str__(self) -> str:
        return "\n".join(self.lines())


def verify_partition(
    table: Mapping[PolGHZLabel, tuple[DetectorTriple, ...]] | None = None,
) -> PartitionReport:
    """Check that the rows are disjoint 8-sets that cover all 64 triples."""
    table = TABLE if table is None else table
    owners: dict[DetectorTriple, list[str]] = {}
    row_sizes = {}
    for label in ALL_LABELS:
        row = table.get(label, ())
        row_sizes[str(label)] = len(row)
        for trip in row:
            owners.setdefault(trip, []).append(str(label))
    duplicates = {str(t): rows for t, rows in owners.items() if len(rows) > 1}
    missing = [str(t) for t in ALL_TRIPLES if t not in owners]
    unknown = [str(lab) for lab in ALL_LABELS if lab not in table]
    ok = (
        not duplicates
        and not missing
        and not unknown
        and all(size == 8 for size in row_sizes.values())
    )
    return PartitionReport(ok, row_sizes, duplicates, missing, unknown)


_startup = verify_partition()
if not _startup.ok:  # pragma: no cover - guards against a bad transcription
    raise RuntimeError(str(_startup))

_INVERSE: dict[DetectorTriple, PolGHZLabel] = {
    trip: label for label, row in TABLE.items() for trip in row
}


def detector_triples(pol: PolGHZLabel) -> frozenset[DetectorTriple]:
    """Triples that can fire for ``pol`` when the momentum auxiliary is psi0+."""
    return frozenset(TABLE[pol])


def identify(triple: DetectorTriple) -> PolGHZLabel:
    return _INVERSE[triple]


# Array forms for the sampler: detectors are 0-based (D1 -> 0), sides are
# separated so that side k uses detector ids 4k .. 4k+3.

def row_array() -> np.ndarray:
    """``[label_code, k] -> (a, b, c)`` 0-based detector ids, shape (8, 8, 3)."""
    out = np.zeros((8, 8, 3), dtype=np.int8)
    for label, row in TABLE.items():
        for k, trip in enumerate(row):
            out[label.code, k] = (trip.a - 1, trip.b - 1, trip.c - 1)
    return out


def lookup_array() -> np.ndarray:
    """``[a, b, c] -> label_code`` with side-local ids 0..3, shape (4, 4, 4)."""
    out = np.full((4, 4, 4), -1, dtype=np.int8)
    for trip, label in _INVERSE.items():
        out[trip.a - 1, trip.b - 5, trip.c - 9] = label.code
    return out
