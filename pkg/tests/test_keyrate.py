import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperqss.keyrate import (
    DegeneratePointError,
    NoPositiveRateError,
    baseline_max_distance,
    baseline_point,
    binary_entropy,
    error_rates,
    gains,
    key_rate,
    max_distance,
    sweep,
    timing_saving,
)
from hyperqss.photonics import REFERENCE_CURVES, ChannelParams, alpha_prime, detect_prob, emission_probs

DISTANCES = (5, 50, 100, 200)

# Pinned per convention (regression values, computed by this implementation).
PINNED_RT = {
    "default": (9.733114e-06, 9.786836e-09, 8.130874e-12, -1.634697e-17),
    "match": (1.998475e-03, 3.107573e-06, 2.993763e-09, 2.415316e-15),
    "quarter_recomputed": (2.525860e-05, 4.713318e-08, 4.627514e-11, 1.740096e-17),
    "full_printed": (1.626849e-03, 8.956595e-07, 5.680213e-10, 4.731480e-17),
}
SWITCHES = {
    "default": {},
    "match": REFERENCE_CURVES,
    "quarter_recomputed": dict(gain_variant="recomputed"),
    "full_printed": dict(alpha_convention="full"),
}
PINNED_CUTOFF = {"default": 172.25, "match": 242.25, "quarter_recomputed": 212.125}


@pytest.mark.parametrize("name", PINNED_RT)
def test_pinned_rates(name):
    params = ChannelParams(**SWITCHES[name])
    for L, want in zip(DISTANCES, PINNED_RT[name]):
        assert key_rate(params.with_(L=L)).Rt == pytest.approx(want, rel=1e-5)


@pytest.mark.parametrize("name", PINNED_CUTOFF)
def test_pinned_cutoffs(name):
    assert max_distance(ChannelParams(**SWITCHES[name])) == pytest.approx(
        PINNED_CUTOFF[name], abs=0.1
    )


def test_binary_entropy():
    assert binary_entropy(0) == binary_entropy(1) == 0
    assert binary_entropy(0.5) == pytest.approx(1)
    assert binary_entropy(0.11) == pytest.approx(0.4999, abs=1e-3)
    with pytest.raises(ValueError):
        binary_entropy(1.2)


def test_variants_agree_where_forms_coincide():
    for L in (0, 40, 120):
        pr = gains(ChannelParams(L=L, gain_variant="printed"))
        rc = gains(ChannelParams(L=L, gain_variant="recomputed"))
        assert pr.Q1 == pytest.approx(rc.Q1, rel=1e-9)
        assert pr.Q2a == pytest.approx(rc.Q2a, rel=1e-9)
        assert pr.QCt == pytest.approx(rc.QCt, rel=1e-9)


def test_recomputed_per_side_sums():
    params = ChannelParams(L=30, gain_variant="recomputed")
    a, pd = alpha_prime(params), params.pd
    w0, w1, w2 = emission_probs(params)
    D0, D1, D2 = (detect_prob(k, a, pd) for k in range(3))
    b = gains(params)
    assert b.Q2b == pytest.approx(16 * w2 * (2 * D1 + 2 * D0) ** 3)
    assert b.Q2c == pytest.approx(12 * w2 * (D2 + 3 * D0) * (2 * D1 + 2 * D0) ** 2)
    assert b.Qt == pytest.approx(b.Q0 + b.Q1 + b.Q2 - b.Tt)


def test_noiseless_limit_has_no_errors():
    params = ChannelParams(pd=0, F_P=1, F_M=1, multipair=False, gain_variant="recomputed")
    b = gains(params)
    Et, e1 = error_rates(b)
    assert Et == pytest.approx(0, abs=1e-12) and e1 == pytest.approx(0, abs=1e-12)
    r = key_rate(params)
    assert r.Rt == pytest.approx(b.Q1)


def test_errors_grow_with_distance():
    params = ChannelParams(**REFERENCE_CURVES)
    e = [key_rate(params.with_(L=L)).Et for L in (0, 100, 200, 240)]
    assert e == sorted(e)


def test_e1_fidelity_switch_raises_e1():
    params = ChannelParams(L=50)
    assert key_rate(params.with_(e1_fidelity=True)).e1 > key_rate(params).e1


def test_degenerate_point():
    with pytest.raises(DegeneratePointError):
        key_rate(ChannelParams(eta_c=0, pd=0))


def test_no_positive_rate():
    with pytest.raises(NoPositiveRateError):
        max_distance(ChannelParams(F_P=0.5, F_M=0.5))


def test_cutoff_is_sign_change():
    params = ChannelParams(**REFERENCE_CURVES)
    L = max_distance(params)
    assert key_rate(params.with_(L=L)).Rt <= 0 < key_rate(params.with_(L=L - 0.1)).Rt


def test_unbounded_rate_returns_inf():
    assert max_distance(ChannelParams(pd=0, F_P=1, F_M=1), l_max=400) == math.inf


def test_baseline_below_protocol():
    params = ChannelParams(**REFERENCE_CURVES)
    for r in sweep(params, DISTANCES[:3]):
        assert 5 < r.Rt / r.Rt_baseline < 20
    assert baseline_max_distance(params) == pytest.approx(270.75, abs=0.1)


def test_baseline_noiseless_correct():
    bp = baseline_point(ChannelParams(pd=0, F_P=1, F_M=1, multipair=False, L=10))
    assert bp.Et == pytest.approx(0, abs=1e-12)
    assert bp.R == pytest.approx(0.5 * bp.Q1)


def test_rate_clamp():
    r = key_rate(ChannelParams(L=200))
    assert r.Rt < 0 and r.Rt_clamped == 0


def test_timing():
    assert timing_saving(1, math.sqrt(3)) == pytest.approx(0.693998, abs=1e-6)
    assert timing_saving(2.0, 2 * math.sqrt(3)) == pytest.approx(timing_saving(1, math.sqrt(3)))
    with pytest.raises(ValueError):
        timing_saving(0, 1)


def test_vacuum_gain_default_params():
    b = gains(ChannelParams())
    assert b.Q0 == pytest.approx(64 * (1 - 1e-3 - 1e-6) * 1e-21, rel=1e-12)


def test_no_source_no_dark_counts_no_gain():
    b = gains(ChannelParams(p=0, pd=0))
    assert all(v == 0 for v in b.as_dict().values() if v != b.fidelity)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(0, 0.5),
    st.floats(0, 1e-3),
    st.floats(0, 300),
    st.sampled_from(["quarter", "full"]),
)
def test_variants_differ_only_in_split_terms(p, pd, L, conv):
    base = ChannelParams(p=p, pd=pd, L=L, alpha_convention=conv)
    pr = gains(base)
    rc = gains(base.with_(gain_variant="recomputed"))
    for name in ("Q0", "Q1", "Q2a", "QC0", "QC1", "QC2a", "QC2b", "QC2c", "QCt"):
        assert getattr(pr, name) == pytest.approx(getattr(rc, name), rel=1e-9, abs=1e-300), name
