import math

import pytest

from hyperqss import oracle
from hyperqss.montecarlo import RunConfig, estimate_gains, exact_gains, run
from hyperqss.photonics import ChannelParams, alpha_prime

INFLATED = ChannelParams(p=1e-2, pd=1e-3, L=10, gain_variant="recomputed")
# Every emitted photon reaches its detector with probability eta_c*eta_d; no
# dark counts, no decoherence, at most one pair per pulse.
NOISELESS = ChannelParams(
    p=1.0, pd=0.0, F_P=1.0, F_M=1.0, multipair=False, alpha_convention="full"
)


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(check_fraction=0)
    with pytest.raises(ValueError):
        RunConfig(error_threshold=0.6)
    with pytest.raises(ValueError):
        RunConfig(n_pulses=-1)
    with pytest.raises(ValueError):
        RunConfig(attack="intercept-resend", resend="QQ")


def test_exact_enumeration_is_probability():
    ex = exact_gains(INFLATED).breakdown
    assert 0 < ex.Q0 < ex.Q1
    assert ex.Qt <= ex.Q0 + ex.Q1 + ex.Q2
    assert 0 < ex.QCt <= ex.Qt


def test_exact_noiseless_single_pair():
    ex = exact_gains(NOISELESS.with_(p=0.5))
    a = alpha_prime(NOISELESS)
    assert ex.breakdown.Qt == pytest.approx(0.5 * a**3, rel=1e-12)
    assert ex.qber == pytest.approx(0.0, abs=1e-12)


def test_sampler_matches_exact_enumeration():
    emp = estimate_gains(RunConfig(n_pulses=2_000_000, seed=3), INFLATED)
    ex = exact_gains(INFLATED)
    for name in ("Q0", "Q1", "Q2a", "Q2b", "Tt", "Qt", "QCt"):
        sigma = emp.sigma(name)
        if emp.counts[name] < 30:
            continue
        got, want = getattr(emp.breakdown, name), getattr(ex.breakdown, name)
        assert abs(got - want) < 4 * sigma, name
    assert abs(emp.qber - ex.qber) < 4 * emp.qber_stderr


def test_deterministic_and_worker_independent():
    cfg = RunConfig(n_pulses=300_000, seed=9, chunk_size=50_000)
    a = run(cfg, INFLATED)
    b = run(cfg, INFLATED)
    assert a.to_text() == b.to_text() and a.histogram == b.histogram
    c = run(RunConfig(n_pulses=300_000, seed=9, chunk_size=50_000, workers=2), INFLATED)
    assert c.to_text() == a.to_text()
    d = run(RunConfig(n_pulses=300_000, seed=10, chunk_size=50_000), INFLATED)
    assert d.histogram != a.histogram


def test_noiseless_run_is_error_free():
    rep = run(RunConfig(n_pulses=50_000, seed=1), NOISELESS)
    a = alpha_prime(NOISELESS)
    sigma = math.sqrt(a**3 * (1 - a**3) / rep.pulses)
    assert abs(rep.estimated_Qt - a**3) < 4 * sigma
    assert rep.check_errors == 0 and rep.key_bit_errors == 0
    assert rep.fourfold_discards == 0
    assert rep.status == "accepted"


def test_no_sifting_every_conclusive_round_is_used():
    rep = run(RunConfig(n_pulses=200_000, seed=2), INFLATED)
    assert rep.raw_key_bits + rep.check_rounds == rep.conclusive_triples
    frac = rep.check_rounds / rep.conclusive_triples
    assert abs(frac - 0.1) < 4 * math.sqrt(0.09 / rep.conclusive_triples)


def test_histogram_counts_conclusive_rounds():
    rep = run(RunConfig(n_pulses=100_000, seed=4), NOISELESS)
    assert sum(rep.histogram) == rep.conclusive_triples
    assert len(rep.histogram) == 64
    assert rep.histogram_csv().splitlines()[1].startswith("D1D5D9,")


@pytest.mark.parametrize("resend", ["HL", "DD"])
def test_intercept_resend_matches_oracle(resend):
    cfg = RunConfig(n_pulses=100_000, seed=5, attack="intercept-resend", resend=resend)
    rep = run(cfg, NOISELESS)
    want = oracle.expected_check_error(oracle.intercept_resend_ensemble(resend))
    sigma = math.sqrt(want * (1 - want) / rep.check_rounds)
    assert abs(rep.estimated_QBER - want) < 3 * sigma
    assert rep.aborted and rep.status == "aborted"


def test_empty_run_is_inconclusive():
    rep = run(RunConfig(n_pulses=0), NOISELESS)
    assert rep.estimated_QBER is None and rep.status == "inconclusive"
    assert "n/a" in rep.to_text()
