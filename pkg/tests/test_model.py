import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semalloc import model
from semalloc.instance import Selection
from semalloc.model import ChannelConfig, DeviceLink, ReciprocalBer

from conftest import BASE_CFG, make_scenario

LINK_100M = DeviceLink(100.0, 1.0, 1e-11)


def test_noise_power_examples():
    assert model.noise_power(ChannelConfig(noise_psd_w_per_hz=1e-17, total_bandwidth_hz=1e6)) == pytest.approx(1e-11, rel=1e-12)
    assert model.noise_power(ChannelConfig(noise_psd_w_per_hz=1.0, total_bandwidth_hz=1.0)) == 1.0
    assert model.noise_power(ChannelConfig(noise_psd_w_per_hz=2e-17, total_bandwidth_hz=1e6)) == pytest.approx(2e-11, rel=1e-12)


def test_noise_variance_override():
    cfg = ChannelConfig(noise_variance_w=1e-14)
    assert model.noise_power(cfg) == 1e-14


@pytest.mark.parametrize(
    "kwargs",
    [
        {"total_bandwidth_hz": 0.0},
        {"noise_psd_w_per_hz": -1.0},
        {"ber_threshold": 1.0},
        {"ber_threshold": 0.0},
        {"time_threshold_s": 0.0},
        {"max_power_w": -0.1},
    ],
)
def test_channel_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        ChannelConfig(**kwargs)


def test_device_link_coefficient():
    assert LINK_100M.channel_coefficient == pytest.approx(1e7, rel=1e-12)
    with pytest.raises(ValueError):
        DeviceLink(0.0, 1.0, 1e-11)
    with pytest.raises(ValueError):
        DeviceLink(10.0, -1.0, 1e-11)


def test_snr_examples():
    assert model.snr(0.01, LINK_100M) == pytest.approx(1e5, rel=1e-12)
    assert model.snr(0.0, LINK_100M) == 0.0
    unit = DeviceLink(1.0, 1.0, 1.0)
    assert model.snr(1.0, unit) == 1.0


def test_rate_examples():
    assert model.rate_bps(0.1, BASE_CFG, 1e5) == pytest.approx(1.66097e6, rel=1e-5)
    assert model.rate_bps(0.1, BASE_CFG, 1e5) == pytest.approx(0.1 * 1e6 * math.log2(100001), rel=1e-14)
    assert model.rate_bps(0.0, BASE_CFG, 1e5) == 0.0
    assert model.rate_bps(1.0, ChannelConfig(total_bandwidth_hz=1.0), 1.0) == 1.0


def test_tx_time_examples():
    assert model.tx_time_s(1200, 1.66097e6) == pytest.approx(7.2247e-4, rel=1e-4)
    assert model.tx_time_s(0, 1.66097e6) == 0.0
    assert model.tx_time_s(0, 0.0) == 0.0
    assert model.tx_time_s(1000, 125000) == pytest.approx(8e-3, rel=1e-12)
    with pytest.raises(model.InfeasibleRateError):
        model.tx_time_s(10, 0.0)


@pytest.mark.parametrize("beta,expected", [(1e-5, 1e5), (1.0, 1.0), (0.5, 2.0)])
def test_c_threshold(beta, expected):
    assert model.c_threshold(ReciprocalBer(), beta) == pytest.approx(expected, rel=1e-12)


def test_required_power_examples():
    assert model.required_power(1, 1e5, LINK_100M) == pytest.approx(0.01, rel=1e-12)
    assert model.required_power(0, 1e5, LINK_100M) == 0.0
    far = DeviceLink(1000.0, 1.0, 1e-11)
    assert far.channel_coefficient == pytest.approx(1e5)
    assert model.required_power(1, 1e5, far) == pytest.approx(1.0, rel=1e-12)


def test_closed_form_bandwidth_examples():
    # independent evaluation: 1000 / (8e-3 * 1e6 * log2(1 + 1e5))
    assert model.closed_form_bandwidth(1, 1000, BASE_CFG, 1e5) == pytest.approx(7.5257e-3, rel=1e-4)
    assert model.closed_form_bandwidth(1, 1000, BASE_CFG, 1e5) == pytest.approx(1000 / (8000 * 16.609654), rel=1e-6)
    assert model.closed_form_bandwidth(0, 1000, BASE_CFG, 1e5) == pytest.approx(8.6643e-7, rel=1e-4)
    assert model.closed_form_bandwidth(1, 0, BASE_CFG, 1e5) == 0.0
    assert model.closed_form_bandwidth(0, 0, BASE_CFG, 1e5) == 0.0


def _one_triplet(k=1, bits=1000.0):
    return make_scenario([(100.0, 1.0, [(bits, 1.0, 1.0)])] * k)


def test_exact_lhs_examples():
    sc = _one_triplet()
    assert model.exact_constraint_lhs(Selection([1], [[1]]), sc) == pytest.approx(7.5257e-3, rel=1e-4)
    assert model.exact_constraint_lhs(Selection([1], [[0]]), sc) == 0.0
    sc2 = _one_triplet(2)
    assert model.exact_constraint_lhs(Selection([1, 1], [[1], [1]]), sc2) == pytest.approx(1.50514e-2, rel=1e-4)


def test_relaxed_lhs_examples():
    sc = _one_triplet()
    expected = math.log(2) * 1000 / 8000 * (1 + 1e-5)
    assert model.relaxed_constraint_lhs(Selection([1], [[1]]), sc) == pytest.approx(expected, rel=1e-12)
    assert model.relaxed_constraint_lhs(Selection([1], [[1]]), sc) == pytest.approx(0.0866443, rel=1e-6)
    assert model.relaxed_constraint_lhs(Selection([1], [[0]]), sc) == 0.0
    assert model.relaxed_constraint_lhs(Selection([0], [[1]]), sc) == pytest.approx(8.6643e-7, rel=1e-4)


def test_zero_size_scenario_is_always_feasible():
    sc = make_scenario([(100.0, 1.0, [(0.0, 0.5, 0.5), (0.0, 1.0, 1.0)])])
    sel = Selection([1], [[1, 1]])
    assert model.exact_constraint_lhs(sel, sc) == 0.0
    assert model.relaxed_constraint_lhs(sel, sc) == 0.0
    assert model.is_feasible(sel, sc)


# ---- properties ---------------------------------------------------------

instances = st.lists(
    st.tuples(
        st.integers(0, 1),
        st.lists(st.tuples(st.floats(0, 5e4), st.integers(0, 1)), min_size=0, max_size=6),
    ),
    min_size=1,
    max_size=6,
)


def _build(inst, cfg=BASE_CFG):
    sc = make_scenario([(100.0, 1.0, [(s, 0.5, 0.5) for s, _ in trips]) for _, trips in inst], cfg)
    sel = Selection([a for a, _ in inst], [[b for _, b in trips] for _, trips in inst])
    return sc, sel


@settings(max_examples=300, deadline=None)
@given(inst=instances, beta=st.floats(1e-9, 0.9), t_th=st.floats(1e-4, 1e-1))
def test_relaxed_dominates_exact(inst, beta, t_th):
    cfg = ChannelConfig(ber_threshold=beta, time_threshold_s=t_th)
    sc, sel = _build(inst, cfg)
    assert model.relaxed_constraint_lhs(sel, sc) >= model.exact_constraint_lhs(sel, sc) - 1e-12


@settings(max_examples=200, deadline=None)
@given(inst=instances, data=st.data())
def test_lhs_monotone_in_each_bit(inst, data):
    sc, sel = _build(inst)
    base_exact = model.exact_constraint_lhs(sel, sc)
    base_relaxed = model.relaxed_constraint_lhs(sel, sc)
    k = data.draw(st.integers(0, len(inst) - 1))
    up = sel.copy()
    if data.draw(st.booleans()) or not len(up.eta[k]):
        up.alpha[k] = 1
    else:
        n = data.draw(st.integers(0, len(up.eta[k]) - 1))
        up.eta[k][n] = 1
    assert model.exact_constraint_lhs(up, sc) >= base_exact - 1e-15
    assert model.relaxed_constraint_lhs(up, sc) >= base_relaxed - 1e-15


@given(p=st.floats(0, 10), c=st.floats(0.1, 10), d=st.floats(1, 2000), g=st.floats(1e-3, 10))
def test_snr_linear_in_power(p, c, d, g):
    link = DeviceLink(d, g, 1e-11)
    assert model.snr(c * p, link) == pytest.approx(c * model.snr(p, link), rel=1e-12, abs=1e-300)


@given(b=st.floats(0, 1), c=st.floats(0, 1), gamma=st.floats(0, 1e9))
def test_rate_linear_in_band(b, c, gamma):
    assert model.rate_bps(c * b, BASE_CFG, gamma) == pytest.approx(c * model.rate_bps(b, BASE_CFG, gamma), rel=1e-12, abs=1e-300)


@given(bits=st.floats(1, 1e7), rate=st.floats(1, 1e9), k=st.floats(1e-3, 1e3))
def test_tx_time_scale_invariant(bits, rate, k):
    assert model.tx_time_s(k * bits, k * rate) == pytest.approx(model.tx_time_s(bits, rate), rel=1e-12)


@given(bits=st.floats(1, 1e7), t_th=st.floats(1e-4, 1.0), beta=st.floats(1e-9, 0.5))
def test_closed_form_bandwidth_makes_deadline_tight(bits, t_th, beta):
    cfg = ChannelConfig(time_threshold_s=t_th, ber_threshold=beta)
    c_th = model.c_threshold(ReciprocalBer(), beta)
    b = model.closed_form_bandwidth(1, bits, cfg, c_th)
    t = model.tx_time_s(bits, model.rate_bps(b, cfg, c_th))
    assert t == pytest.approx(t_th, rel=1e-9)


@given(gamma=st.floats(1.0, 1e9))
def test_threshold_inverts_ber(gamma):
    m = ReciprocalBer()
    assert model.c_threshold(m, m.ber(gamma)) == pytest.approx(gamma, rel=1e-12)


def test_power_feasible_boundary_is_inclusive():
    sc = make_scenario([(100.0, 1.0, [(10, 1, 1)]), (1000.0, 1.0, [(10, 1, 1)])])
    np.testing.assert_array_equal(model.power_feasible(sc), [True, False])
