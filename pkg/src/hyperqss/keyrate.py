"""Analytic gain, error-rate and GLLP key-rate model.

Two evaluations of the gains are provided:

``printed``
    the final closed-form polynomials exactly as published;
``recomputed``
    the per-side detector sums the closed forms were derived from, e.g.
    ``(D^1 + D^0 + D^1 + D^0)`` per side for the disjoint two-pair case.

They coincide for the vacuum, single-pair and coincident two-pair terms and
differ for the disjoint (2b) and partially coincident (2c) two-pair terms,
whose published closed forms do not follow from their own sums.  The
fourfold coincidence and correct-gain formulas have no such ambiguity and
are shared by both variants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable, Iterable

from .photonics import (
    ChannelParams,
    GainVariant,
    alpha_prime,
    detect_prob,
    detect_prob_expanded,
    emission_probs,
    fidelity_factor,
)


class DegeneratePointError(ValueError):
    """An error rate has a vanishing denominator at this parameter point."""


class NoPositiveRateError(ValueError):
    """The key rate is not positive even at zero distance."""


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy needs x in [0, 1], got {x!r}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


@dataclass(frozen=True)
class GainBreakdown:
    Q0: float
    Q1: float
    Q2a: float
    Q2b: float
    Q2c: float
    T0: float
    T1: float
    T2a: float
    T2b: float
    T2c: float
    Tt: float
    Qt: float
    QC0: float
    QC1: float
    QC2a: float
    QC2b: float
    QC2c: float
    QCt: float
    fidelity: float = 1.0

    @property
    def Q2(self) -> float:
        return self.Q2a + self.Q2b + self.Q2c

    def as_dict(self) -> dict[str, float]:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["Q2"] = self.Q2
        return d


def _fourfold(w0: float, w1: float, w2: float, D0: float, D1: float, D2: float):
    pd = D0
    T0 = w0 * 4**3 * 9 * pd**4
    T1 = 8 * w1 * (
        9 * D1**3 * pd
        + 3 * D1**2 * 3 * 8 * pd**2
        + 3 * D1 * 3**2 * 7 * pd**3
        + 3**3 * 6 * pd**4
    )
    T2a = 8 * w2 * (
        9 * D2**3 * pd
        + 3 * D2**2 * 3 * 8 * pd**2
        + 3 * D2 * 3**2 * 7 * pd**3
        + 3**3 * 6 * pd**4
    )
    T2b = 16 * w2 * (
        2**3 * 3 * D1**4
        + 2**3 * D1**3 * 6 * pd
        + 3 * 2**2 * D1**2 * 2 * 5 * pd**2
        + 3 * 2 * D1**2 * 2**2 * 4 * pd**3
        + 2**3 * 3 * pd**4
    )
    T2c = 2 * 6 * w2 * (
        2**2 * D2 * D1**3
        + 2**2 * D2 * D1**2 * 7 * pd
        + 2**2 * D2 * D1 * 2 * 6 * pd**2
        + 2**2 * D1**2 * 3 * 6 * pd**2
        + D2 * 2**2 * 5 * pd**3
        + 2**2 * D1 * 3 * 2 * 5 * pd**3
        + 3 * 2**2 * 4 * pd**4
    )
    return T0, T1, T2a, T2b, T2c


def gains(params: ChannelParams) -> GainBreakdown:
    a = alpha_prime(params)
    pd = params.pd
    w0, w1, w2 = emission_probs(params)

    if params.gain_variant is GainVariant.PRINTED:
        D0 = detect_prob_expanded(0, a, pd)
        D1 = detect_prob_expanded(1, a, pd)
        D2 = detect_prob_expanded(2, a, pd)
        single = a + 4 * pd - a * pd
        double = 2 * a + a * a * pd + 4 * pd - 2 * a * pd - a * a
        split = 4 * a + 2 * a * a * pd + 3 * pd - 4 * a * pd - 2 * a * a
        Q0 = 64 * w0 * pd**3
        Q1 = 8 * w1 * single**3
        Q2a = 8 * w2 * double**3
        Q2b = 16 * w2 * split**3
        Q2c = 12 * w2 * double * split**2
    else:
        D0 = detect_prob(0, a, pd)
        D1 = detect_prob(1, a, pd)
        D2 = detect_prob(2, a, pd)
        Q0 = w0 * (4 * D0) ** 3
        Q1 = 8 * w1 * (D1 + 3 * D0) ** 3
        Q2a = 8 * w2 * (D2 + 3 * D0) ** 3
        Q2b = 16 * w2 * (2 * D1 + 2 * D0) ** 3
        Q2c = 12 * w2 * (D2 + 3 * D0) * (2 * D1 + 2 * D0) ** 2

    T0, T1, T2a, T2b, T2c = _fourfold(w0, w1, w2, D0, D1, D2)
    Tt = T0 + T1 + T2a + T2b + T2c
    Qt = Q0 + Q1 + Q2a + Q2b + Q2c - Tt

    QC0 = w0 * 8 * pd**3
    QC1 = w1 * 8 * (D1**3 + 3 * D1 * pd**2 + 4 * pd**3)
    QC2a = w2 * 8 * (D2**3 + 3 * D2 * pd**2 + 4 * pd**3)
    QC2b = w2 * 16 * (2 * D1**3 + 6 * D1 * pd**2)
    QC2c = w2 * 12 * (2 * D2 * D1**2 + 2 * D1**2 * pd + 4 * pd**3)
    fid = fidelity_factor(params.F_P, params.F_M)
    QCt = fid * (QC0 + QC1 + QC2a + QC2b + QC2c)

    return GainBreakdown(
        Q0, Q1, Q2a, Q2b, Q2c,
        T0, T1, T2a, T2b, T2c, Tt, Qt,
        QC0, QC1, QC2a, QC2b, QC2c, QCt,
        fidelity=fid,
    )


def error_rates(breakdown: GainBreakdown, e1_fidelity: bool = False) -> tuple[float, float]:
    """Total QBER and single-pair error rate.

    With ``e1_fidelity`` the single-pair correct gain is weighted by the same
    decoherence factor as the total correct gain; by default it is not.
    """
    b = breakdown
    single = b.Q1 - b.T1
    if not b.Qt > 0:
        raise DegeneratePointError(f"total gain Qt={b.Qt!r} is not positive")
    if not single > 0:
        raise DegeneratePointError(f"Q1 - T1 = {single!r} is not positive")
    Et = (b.Qt - b.QCt) / b.Qt
    qc1 = b.QC1 * (b.fidelity if e1_fidelity else 1.0)
    e1 = (single - qc1) / single
    # The published combinatorics can overshoot [0, 1] by rounding-level amounts.
    return min(max(Et, 0.0), 1.0), min(max(e1, 0.0), 1.0)


@dataclass(frozen=True)
class BaselinePoint:
    """Approximate rate of the basis-choice GHZ protocol at the same point."""

    Q0: float
    Q1: float
    Q2: float
    Qt: float
    QCt: float
    Et: float
    e1: float
    R: float


def baseline_point(params: ChannelParams) -> BaselinePoint:
    """Basis-choice GHZ sharing with two detectors per party.

    Each party measures its photon in X or Y; only the half of the basis
    combinations with a definite GHZ parity is kept.  The gains follow the
    same per-side detector sums as :func:`gains` with two detectors per side
    and a single routed combination.  A click pattern involving a dark count
    has a random parity; polarization decoherence flips the parity for four
    of the seven wrong GHZ labels; momentum plays no role.
    """
    a = alpha_prime(params)
    pd = params.pd
    w0, w1, w2 = emission_probs(params)
    D0 = detect_prob(0, a, pd)
    D1 = detect_prob(1, a, pd)
    D2 = detect_prob(2, a, pd)
    Q0 = w0 * (2 * D0) ** 3
    Q1 = w1 * (D1 + D0) ** 3
    Q2 = w2 * (D2 + D0) ** 3
    QC0 = Q0 / 2
    QC1 = w1 * (D1**3 + ((D1 + D0) ** 3 - D1**3) / 2)
    QC2 = w2 * (D2**3 + ((D2 + D0) ** 3 - D2**3) / 2)
    fid = params.F_P + 3 * (1 - params.F_P) / 7
    Qt = Q0 + Q1 + Q2
    QCt = fid * (QC0 + QC1 + QC2)
    if not (Qt > 0 and Q1 > 0):
        raise DegeneratePointError("baseline gains vanish at this point")
    Et = min(max((Qt - QCt) / Qt, 0.0), 1.0)
    qc1 = QC1 * (fid if params.e1_fidelity else 1.0)
    e1 = min(max((Q1 - qc1) / Q1, 0.0), 1.0)
    R = 0.5 * (Q1 * (1 - binary_entropy(e1)) - Qt * params.f * binary_entropy(Et))
    return BaselinePoint(Q0, Q1, Q2, Qt, QCt, Et, e1, R)


def baseline_rate(params: ChannelParams) -> float:
    return baseline_point(params).R


@dataclass(frozen=True)
class RatePoint:
    L: float
    breakdown: GainBreakdown
    Et: float
    e1: float
    Rt: float
    Rt_baseline: float

    @property
    def Rt_clamped(self) -> float:
        return max(self.Rt, 0.0)


def key_rate(params: ChannelParams) -> RatePoint:
    b = gains(params)
    Et, e1 = error_rates(b, params.e1_fidelity)
    Rt = b.Q1 * (1 - binary_entropy(e1)) - b.Qt * params.f * binary_entropy(Et)
    return RatePoint(params.L, b, Et, e1, Rt, baseline_rate(params))


def sweep(params: ChannelParams, distances: Iterable[float]) -> list[RatePoint]:
    return [key_rate(params.with_(L=float(L))) for L in distances]


def _cutoff(
    rate: Callable[[ChannelParams], float],
    params: ChannelParams,
    tol: float,
    l_max: float,
    scan_step: float,
) -> float:
    if rate(params.with_(L=0.0)) <= 0:
        raise NoPositiveRateError("key rate is not positive at L = 0")
    lo = 0.0
    hi = None
    L = scan_step
    while L <= l_max:
        try:
            r = rate(params.with_(L=L))
        except DegeneratePointError:
            # loss has driven every gain to zero without a sign change
            return math.inf
        if r <= 0:
            hi = L
            break
        lo = L
        L += scan_step
    if hi is None:
        return math.inf
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rate(params.with_(L=mid)) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def max_distance(
    params: ChannelParams, tol: float = 0.1, l_max: float = 10_000.0, scan_step: float = 1.0
) -> float:
    """Smallest distance (to ``tol`` km) at which the key rate drops to <= 0.

    Returns ``math.inf`` if no sign change occurs below ``l_max``.
    """
    return _cutoff(lambda pr: key_rate(pr).Rt, params, tol, l_max, scan_step)


def baseline_max_distance(
    params: ChannelParams, tol: float = 0.1, l_max: float = 10_000.0, scan_step: float = 1.0
) -> float:
    return _cutoff(baseline_rate, params, tol, l_max, scan_step)


def timing_saving(t1: float, t2: float) -> float:
    """Fraction of time saved per key bit versus the basis-choice protocol.

    One distribution plus one announcement (t1 + t2) against two
    distributions and four announcements (2*t1 + 4*t2).
    """
    if t1 <= 0 or t2 <= 0:
        raise ValueError(f"t1 and t2 must be positive, got t1={t1!r}, t2={t2!r}")
    return 1.0 - (t1 + t2) / (2 * t1 + 4 * t2)
