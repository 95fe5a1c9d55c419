"""Pulse-level Monte Carlo of the sharing protocol.

Each pulse goes through emission, decoherence of both DOFs, random encoding
by all three parties, routing of every photon to a detector of its party,
threshold detection with dark counts, classification of the click pattern,
table decoding and (for a random subset of conclusive rounds) security
checking.

Click model
    A photon routed to a detector makes it click with probability
    ``alpha_prime(params)``; every detector also fires a dark count with
    probability ``pd``.  A detector with ``k`` routed photons therefore
    clicks with ``1 - (1 - a')**k * (1 - pd)``.  Photons of one pair are
    routed to a triple drawn uniformly from the table row of the label the
    analyzer reports, i.e. the encoded label shifted by both DOF
    decoherence offsets.  Two-pair pulses route two independent triples
    and OR their clicks.

:func:`exact_gains` evaluates the same click model by enumeration and is
the reference the sampler is tested against.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import oracle
from .ghz import key_bits_from_codes, predict_codes
from .keyrate import GainBreakdown
from .photonics import (
    ChannelParams,
    alpha_prime,
    emission_probs,
    make_rng,
    sample_dof_codes,
    sample_emission,
)
from .table import lookup_array, row_array

ROWS = row_array()  # [label_code, k] -> (a, b, c), 0-based detectors
LOOKUP = lookup_array()  # [a, b-4, c-8] -> label_code

# Bookkeeping keys for the event counters.
SCENARIOS = ("0", "1", "2a", "2b", "2c")
_COUNT_KEYS = (
    [f"Q{s}" for s in SCENARIOS]
    + [f"T{s}" for s in SCENARIOS]
    + [f"QC{s}" for s in SCENARIOS]
    + [f"E{s}" for s in SCENARIOS]
    + ["conclusive", "fourfold", "correct", "check_rounds", "check_errors",
       "raw_key_bits", "key_bit_errors"]
)


class AttackKind(str, enum.Enum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept-resend"


@dataclass(frozen=True)
class RunConfig:
    n_pulses: int = 1_000_000
    check_fraction: float = 0.1
    error_threshold: float = 0.11
    seed: int = 0
    attack: AttackKind = AttackKind.NONE
    resend: str = "HL"
    chunk_size: int = 1 << 20
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "attack", AttackKind(self.attack))
        if self.n_pulses < 0:
            raise ValueError("n_pulses must be non-negative")
        if not 0.0 < self.check_fraction < 1.0:
            raise ValueError(f"check_fraction must be in (0, 1), got {self.check_fraction!r}")
        if not 0.0 < self.error_threshold < 0.5:
            raise ValueError(f"error_threshold must be in (0, 0.5), got {self.error_threshold!r}")
        if self.chunk_size <= 0 or self.workers <= 0:
            raise ValueError("chunk_size and workers must be positive")
        if self.attack is AttackKind.INTERCEPT_RESEND:
            oracle.resend_state(self.resend)


@dataclass
class RunReport:
    pulses: int
    conclusive_triples: int
    fourfold_discards: int
    raw_key_bits: int
    check_rounds: int
    check_errors: int
    estimated_QBER: float | None
    estimated_Qt: float
    aborted: bool
    histogram: list[int]
    key_bit_errors: int = 0
    conclusive_errors: int = 0
    counts: dict[str, int] = field(default_factory=dict)
    config: RunConfig | None = None
    params: ChannelParams | None = None

    @property
    def inconclusive(self) -> bool:
        return self.check_rounds == 0

    def to_text(self) -> str:
        cfg, prm = self.config, self.params
        lines = ["# hyperqss simulate"]
        if prm is not None:
            lines.append(f"# {prm.switches()}")
            lines.append(
                "# params " + " ".join(f"{k}={v}" for k, v in prm.as_dict().items())
            )
        if cfg is not None:
            lines.append(
                f"# seed={cfg.seed} attack={cfg.attack.value}"
                + (f" resend={cfg.resend}" if cfg.attack is not AttackKind.NONE else "")
                + f" check_fraction={cfg.check_fraction} threshold={cfg.error_threshold}"
            )
        qber = "n/a" if self.estimated_QBER is None else f"{self.estimated_QBER:.6e}"
        lines += [
            f"pulses              {self.pulses}",
            f"conclusive_triples  {self.conclusive_triples}",
            f"fourfold_discards   {self.fourfold_discards}",
            f"raw_key_bits        {self.raw_key_bits}",
            f"key_bit_errors      {self.key_bit_errors}",
            f"check_rounds        {self.check_rounds}",
            f"check_errors        {self.check_errors}",
            f"estimated_QBER      {qber}",
            f"estimated_Qt        {self.estimated_Qt:.6e}",
            f"status              {self.status}",
        ]
        return "\n".join(lines) + "\n"

    @property
    def status(self) -> str:
        if self.inconclusive:
            return "inconclusive"
        return "aborted" if self.aborted else "accepted"

    def histogram_csv(self) -> str:
        out = ["triple,count"]
        for idx, n in enumerate(self.histogram):
            a, b, c = idx // 16, (idx // 4) % 4, idx % 4
            out.append(f"D{a + 1}D{b + 5}D{c + 9},{n}")
        return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# sampler


@dataclass(frozen=True)
class _ChunkJob:
    params: ChannelParams
    n: int
    seed: int
    stream: int
    check_fraction: float
    outcomes: np.ndarray | None  # [member, op_triple, pol*8+mom] cumulative
    member_cdf: np.ndarray | None


def _route_pairs(job: _ChunkJob, rng, idx, op_codes, expected):
    """Apparent label and routed triple for one pair in each selected pulse."""
    n = idx.size
    if job.outcomes is None:
        reported = expected
    else:
        member = np.searchsorted(job.member_cdf, rng.random(n), side="right")
        member = np.minimum(member, job.member_cdf.size - 1)
        triple_code = op_codes[:, 0] * 16 + op_codes[:, 1] * 4 + op_codes[:, 2]
        cdf = job.outcomes[member, triple_code]
        outcome = (cdf < rng.random(n)[:, None]).sum(axis=1)
        outcome = np.minimum(outcome, 63)
        reported = ((outcome >> 3) ^ (outcome & 7)).astype(np.int8)
    pol_off = sample_dof_codes(job.params.F_P, rng, n)
    mom_off = sample_dof_codes(job.params.F_M, rng, n)
    apparent = reported ^ pol_off ^ mom_off
    triples = ROWS[apparent, rng.integers(0, 8, size=n)]
    return apparent, triples


def _run_chunk(job: _ChunkJob) -> dict[str, np.ndarray | int]:
    rng = make_rng(job.seed, job.stream)
    params = job.params
    n = job.n
    a_prime = alpha_prime(params)

    pairs = sample_emission(params, rng, n)
    op_codes = rng.integers(0, 4, size=(n, 3), dtype=np.int8)
    expected = predict_codes(np.zeros(n, dtype=np.int8), op_codes)

    if params.pd > 0:
        clicks = rng.random((n, 12), dtype=np.float32) < np.float32(params.pd)
    else:
        clicks = np.zeros((n, 12), dtype=bool)

    apparent = np.full((n, 2), -1, dtype=np.int8)
    routed = np.full((n, 2, 3), -1, dtype=np.int8)
    for k in (0, 1):
        idx = np.flatnonzero(pairs > k)
        if idx.size == 0:
            continue
        app, trip = _route_pairs(job, rng, idx, op_codes[idx], expected[idx])
        apparent[idx, k] = app
        routed[idx, k] = trip
        hit = rng.random((idx.size, 3)) < a_prime
        for side in range(3):
            sel = hit[:, side]
            clicks[idx[sel], trip[sel, side]] = True

    per_side = clicks.reshape(n, 3, 4)
    side_counts = per_side.sum(axis=2)
    covered = np.all(side_counts >= 1, axis=1)
    conclusive = np.all(side_counts == 1, axis=1)
    fourfold = covered & (side_counts.sum(axis=1) == 4)

    # scenario label per pulse: 0, 1, 2 (2a), 3 (2b), 4 (2c)
    scenario = pairs.astype(np.int8).copy()
    two = np.flatnonzero(pairs == 2)
    if two.size:
        t1, t2 = routed[two, 0], routed[two, 1]
        same = np.all(t1 == t2, axis=1)
        disjoint = np.all(t1 != t2, axis=1)
        scenario[two] = np.where(same, 2, np.where(disjoint, 3, 4))

    conc_idx = np.flatnonzero(conclusive)
    det = per_side[conc_idx].argmax(axis=2)
    decoded = LOOKUP[det[:, 0], det[:, 1], det[:, 2]]
    correct = decoded == expected[conc_idx]
    genuine = (decoded == apparent[conc_idx, 0]) | (decoded == apparent[conc_idx, 1])
    if conc_idx.size:
        # no pair routed: only decoding against the encoded label is meaningful
        vac = pairs[conc_idx] == 0
        genuine[vac] = correct[vac]

    is_check = rng.random(conc_idx.size) < job.check_fraction
    oc = op_codes[conc_idx]
    true_bits = (((oc[:, 1] == 1) | (oc[:, 1] == 2)) ^ ((oc[:, 2] == 1) | (oc[:, 2] == 2))).astype(np.int8)
    got_bits = key_bits_from_codes(decoded).astype(np.int8)
    key_rounds = ~is_check

    out: dict[str, np.ndarray | int] = {}
    sc_conc = scenario[conc_idx]
    for code, name in enumerate(SCENARIOS):
        in_s = scenario == code
        out[f"Q{name}"] = int(np.count_nonzero(covered & in_s))
        out[f"T{name}"] = int(np.count_nonzero(fourfold & in_s))
        out[f"QC{name}"] = int(np.count_nonzero(genuine & (sc_conc == code)))
        out[f"E{name}"] = int(np.count_nonzero(~correct & (sc_conc == code)))
    out["conclusive"] = int(conc_idx.size)
    out["fourfold"] = int(np.count_nonzero(fourfold))
    out["correct"] = int(np.count_nonzero(correct))
    out["check_rounds"] = int(np.count_nonzero(is_check))
    out["check_errors"] = int(np.count_nonzero(is_check & ~correct))
    out["raw_key_bits"] = int(np.count_nonzero(key_rounds))
    out["key_bit_errors"] = int(np.count_nonzero(key_rounds & (true_bits != got_bits)))
    out["histogram"] = np.bincount(
        det[:, 0] * 16 + det[:, 1] * 4 + det[:, 2], minlength=64
    ).astype(np.int64)
    return out


def _attack_tables(config: RunConfig):
    if config.attack is AttackKind.NONE:
        return None, None
    ens = oracle.intercept_resend_ensemble(config.resend)
    probs = oracle.outcome_table(ens).reshape(len(ens), 64, 64)
    cdf = np.cumsum(probs, axis=2)
    cdf[..., -1] = 1.0
    weights = np.array([w for w, _ in ens.members])
    member_cdf = np.cumsum(weights)
    member_cdf[-1] = 1.0
    return cdf, member_cdf


def _jobs(config: RunConfig, params: ChannelParams) -> list[_ChunkJob]:
    outcomes, member_cdf = _attack_tables(config)
    jobs = []
    remaining = config.n_pulses
    stream = 0
    while remaining > 0:
        n = min(config.chunk_size, remaining)
        jobs.append(
            _ChunkJob(params, n, config.seed, stream, config.check_fraction, outcomes, member_cdf)
        )
        remaining -= n
        stream += 1
    return jobs


def _merge(parts: Sequence[dict]) -> dict:
    total = {key: 0 for key in _COUNT_KEYS}
    total["histogram"] = np.zeros(64, dtype=np.int64)
    for part in parts:
        for key, value in part.items():
            total[key] = total[key] + value
    return total


def _collect(config: RunConfig, params: ChannelParams) -> dict:
    jobs = _jobs(config, params)
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(job) for job in jobs]
    return _merge(parts)


def run(config: RunConfig, params: ChannelParams) -> RunReport:
    """Simulate ``config.n_pulses`` pulses and apply the abort rule."""
    tot = _collect(config, params)
    checks = tot["check_rounds"]
    qber = tot["check_errors"] / checks if checks else None
    aborted = qber is not None and qber > config.error_threshold
    counts = {k: int(v) for k, v in tot.items() if k != "histogram"}
    return RunReport(
        pulses=config.n_pulses,
        conclusive_triples=tot["conclusive"],
        fourfold_discards=tot["fourfold"],
        raw_key_bits=tot["raw_key_bits"],
        check_rounds=checks,
        check_errors=tot["check_errors"],
        estimated_QBER=qber,
        estimated_Qt=tot["conclusive"] / config.n_pulses if config.n_pulses else 0.0,
        aborted=aborted,
        histogram=[int(x) for x in tot["histogram"]],
        key_bit_errors=tot["key_bit_errors"],
        conclusive_errors=tot["conclusive"] - tot["correct"],
        counts=counts,
        config=config,
        params=params,
    )


# ---------------------------------------------------------------------------
# empirical gains


@dataclass(frozen=True)
class EmpiricalGains:
    """Event frequencies per pulse with binomial standard errors.

    ``QC*`` count conclusive rounds whose decoded label is a genuine
    analyzer outcome of one of the pulse's pairs (decoherence not counted as
    an error); ``QCt`` counts rounds decoded to the encoded label.
    """

    breakdown: GainBreakdown
    stderr: dict[str, float]
    counts: dict[str, int]
    n_pulses: int
    qber: float | None
    qber_stderr: float | None
    undersampled: tuple[str, ...]

    def sigma(self, name: str) -> float:
        return self.stderr[name]


_GAIN_NAMES = (
    "Q0", "Q1", "Q2a", "Q2b", "Q2c", "T0", "T1", "T2a", "T2b", "T2c", "Tt", "Qt",
    "QC0", "QC1", "QC2a", "QC2b", "QC2c", "QCt",
)


def gains_from_counts(counts: dict[str, int], n: int, min_count: int = 100) -> EmpiricalGains:
    c = dict(counts)
    c["Tt"] = counts["fourfold"]
    c["Qt"] = counts["conclusive"]
    c["QCt"] = counts["correct"]
    freq = {name: c[name] / n for name in _GAIN_NAMES}
    err = {name: math.sqrt(freq[name] * (1 - freq[name]) / n) for name in _GAIN_NAMES}
    b = GainBreakdown(**freq)
    conc = counts["conclusive"]
    if conc:
        qber = 1 - counts["correct"] / conc
        qerr = math.sqrt(qber * (1 - qber) / conc)
    else:
        qber = qerr = None
    under = tuple(name for name in _GAIN_NAMES if c[name] < min_count)
    return EmpiricalGains(b, err, {k: int(c[k]) for k in _GAIN_NAMES}, n, qber, qerr, under)


def estimate_gains(config: RunConfig, params: ChannelParams) -> EmpiricalGains:
    tot = _collect(config, params)
    return gains_from_counts({k: int(v) for k, v in tot.items() if k != "histogram"},
                             config.n_pulses)


# ---------------------------------------------------------------------------
# exact enumeration of the click model


def _offset_distribution(F_P: float, F_M: float) -> np.ndarray:
    """Distribution of the combined decoherence offset code."""
    def dof(F):
        return np.array([F] + [(1 - F) / 7] * 7)

    pol, mom = dof(F_P), dof(F_M)
    out = np.zeros(8)
    for x in range(8):
        for y in range(8):
            out[x ^ y] += pol[x] * mom[y]
    return out


def _side_stats(k: np.ndarray, a_prime: float, pd: float):
    """Click statistics of one side given photon counts ``k[..., 4]``.

    Returns (P(no click), P(single click at j) [..., 4], P(two clicks)).
    """
    q = 1.0 - (1.0 - a_prime) ** k * (1.0 - pd)
    nq = 1.0 - q
    p0 = np.prod(nq, axis=-1)
    single = np.empty_like(q)
    for j in range(4):
        others = np.prod(np.delete(nq, j, axis=-1), axis=-1)
        single[..., j] = q[..., j] * others
    p2 = np.zeros(q.shape[:-1])
    for i in range(4):
        for j in range(i + 1, 4):
            rest = [m for m in range(4) if m not in (i, j)]
            p2 = p2 + q[..., i] * q[..., j] * np.prod(nq[..., rest], axis=-1)
    return p0, single, p2


_LABEL_ONEHOT = np.zeros((64, 8))
for _i, _lab in enumerate(LOOKUP.ravel()):
    _LABEL_ONEHOT[_i, _lab] = 1.0

_ALL_TRIPLES = np.array([(a, b, c) for a in range(4) for b in range(4) for c in range(4)])
_TRIPLE_LABEL = LOOKUP[_ALL_TRIPLES[:, 0], _ALL_TRIPLES[:, 1], _ALL_TRIPLES[:, 2]]


def _config_stats(k: np.ndarray, a_prime: float, pd: float):
    """Coverage, fourfold and conclusive-label probabilities for configs ``k[n, 3, 4]``."""
    p0, single, p2 = _side_stats(k, a_prime, pd)
    p1 = single.sum(axis=-1)
    covered = np.prod(1.0 - p0, axis=-1)
    fourfold = p2[:, 0] * p1[:, 1] * p1[:, 2] + p1[:, 0] * p2[:, 1] * p1[:, 2] \
        + p1[:, 0] * p1[:, 1] * p2[:, 2]
    joint = np.einsum("na,nb,nc->nabc", single[:, 0], single[:, 1], single[:, 2])
    conc_label = joint.reshape(-1, 64) @ _LABEL_ONEHOT
    return covered, fourfold, conc_label


def exact_gains(params: ChannelParams) -> EmpiricalGains:
    """Exact event probabilities of the sampler's click model (no attack).

    Returned in the same form as :func:`estimate_gains` with zero errors.
    """
    a = alpha_prime(params)
    pd = params.pd
    w0, w1, w2 = emission_probs(params)
    pdelta = _offset_distribution(params.F_P, params.F_M)
    res = {name: 0.0 for name in _GAIN_NAMES}
    err_total = 0.0

    # vacuum
    cov, ff, conc = _config_stats(np.zeros((1, 3, 4)), a, pd)
    res["Q0"] = w0 * cov[0]
    res["T0"] = w0 * ff[0]
    # expected label uniform over all eight, so 1/8 of conclusive darks are right
    res["QC0"] = w0 * conc[0].sum() / 8
    qt = w0 * conc[0].sum()
    qct = res["QC0"]

    # one pair: triple t routed from the row of its own label
    k1 = np.zeros((64, 3, 4))
    for side in range(3):
        k1[np.arange(64), side, _ALL_TRIPLES[:, side]] += 1
    cov, ff, conc = _config_stats(k1, a, pd)
    lab = _TRIPLE_LABEL
    for e in range(8):
        wt = w1 * pdelta[lab ^ e] / 8 / 8
        res["Q1"] += float(wt @ cov)
        res["T1"] += float(wt @ ff)
        res["QC1"] += float(wt @ conc[np.arange(64), lab])
        qt += float(wt @ conc.sum(axis=1))
        qct += float(wt @ conc[:, e])

    # two pairs: ordered triples (t1, t2)
    if w2 > 0:
        i1, i2 = np.meshgrid(np.arange(64), np.arange(64), indexing="ij")
        i1, i2 = i1.ravel(), i2.ravel()
        k2 = k1[i1] + k1[i2]
        cov, ff, conc = _config_stats(k2, a, pd)
        t1, t2 = _ALL_TRIPLES[i1], _ALL_TRIPLES[i2]
        same = np.all(t1 == t2, axis=1)
        disjoint = np.all(t1 != t2, axis=1)
        l1, l2 = lab[i1], lab[i2]
        rows = np.arange(i1.size)
        genuine = conc[rows, l1] + np.where(l1 != l2, conc[rows, l2], 0.0)
        for name, mask in (("2a", same), ("2b", disjoint), ("2c", ~same & ~disjoint)):
            for e in range(8):
                wt = w2 * pdelta[l1 ^ e] * pdelta[l2 ^ e] / 64 / 8
                wt = np.where(mask, wt, 0.0)
                res[f"Q{name}"] += float(wt @ cov)
                res[f"T{name}"] += float(wt @ ff)
                res[f"QC{name}"] += float(wt @ genuine)
                qt += float(wt @ conc.sum(axis=1))
                qct += float(wt @ conc[:, e])

    res["Tt"] = res["T0"] + res["T1"] + res["T2a"] + res["T2b"] + res["T2c"]
    res["Qt"] = qt
    res["QCt"] = qct
    err_total = qt - qct
    qber = err_total / qt if qt > 0 else None
    return EmpiricalGains(
        GainBreakdown(**res), {k: 0.0 for k in _GAIN_NAMES}, {}, 0, qber, 0.0, ()
    )
