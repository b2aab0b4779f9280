"""Physical-layer formulas, metrics and the constraint checker."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recipmec.channel import (ChannelRealization, _rician_power, draw_channel,
                              path_loss_gain)
from recipmec.model import (NoActivityError, Decision, active_sinr,
                            backscatter_snr, check_constraints,
                            compute_metrics, harvested_energy)
from recipmec.params import ChannelGenConfig, default_system

from conftest import anchor_channel, random_decision, rel_err


# ---------------------------------------------------------------------------
# channel generation


def test_path_loss_examples():
    assert path_loss_gain(1.0, 2.2) == 1.0
    assert rel_err(path_loss_gain(10.0, 2.2), 6.3096e-3, 1e-12) < 1e-4
    assert path_loss_gain(5.0, 0.0) == 1.0
    with pytest.raises(ValueError):
        path_loss_gain(0.0, 2.2)
    with pytest.raises(ValueError):
        path_loss_gain(-1.0, 2.2)


def test_draw_channel_deterministic():
    cfg = ChannelGenConfig()
    a = draw_channel(12345, cfg)
    b = draw_channel(12345, cfg)
    assert a == b
    c = draw_channel(12346, cfg)
    assert a != c


def test_rician_fading_unit_mean():
    rng = np.random.default_rng(0)
    k_lin = 10.0 ** (2.8 / 10.0)
    power = _rician_power(rng, k_lin, 100_000)
    assert 0.99 <= float(power.mean()) <= 1.01


def test_rician_large_k_is_line_of_sight():
    rng = np.random.default_rng(0)
    power = _rician_power(rng, 1e12, 100)
    assert np.allclose(power, 1.0, atol=1e-5)


def test_channel_gains_positive():
    with pytest.raises(ValueError):
        ChannelRealization(gain_user_ap=(0.0, 1e-4), gain_interuser=1e-2)


# ---------------------------------------------------------------------------
# per-user formulas


def test_harvested_energy_examples():
    sys = default_system()  # eh_coeff = 0.8
    ch = ChannelRealization(gain_user_ap=(1e-4, 1e-4), gain_interuser=0.01)
    dec = Decision((2.0, 2.0), (0.5, 0.5), (0.25, 0.25), (0.0, 0.0))
    # t_j zeta (1-alpha_k) p_j |g|^2 = 0.5*0.8*0.75*2*0.01
    assert math.isclose(harvested_energy(dec, ch, sys, 0), 0.006, rel_tol=1e-12)
    dec_full = Decision((2.0, 2.0), (0.5, 0.5), (1.0, 1.0), (0.0, 0.0))
    assert harvested_energy(dec_full, ch, sys, 0) == 0.0


def test_active_sinr_anchor():
    sys = default_system()
    ch = anchor_channel()
    dec = Decision((0.1, 0.1), (0.5, 0.5), (0.875, 0.875), (0.0, 0.0))
    assert rel_err(active_sinr(dec, ch, sys, 0), 114.28, 1e-12) < 1e-3
    dec0 = Decision((0.1, 0.1), (0.5, 0.5), (0.0, 0.0), (0.0, 0.0))
    assert math.isclose(active_sinr(dec0, ch, sys, 0),
                        0.1 * 1e-4 / 1e-11, rel_tol=1e-12)
    dec_zero_p = Decision((0.0, 0.0), (0.5, 0.5), (0.0, 0.0), (0.0, 0.0))
    assert active_sinr(dec_zero_p, ch, sys, 0) == 0.0


def test_backscatter_snr_anchor():
    sys = default_system()
    ch = anchor_channel()
    dec = Decision((0.1, 0.1), (0.5, 0.5), (0.875, 0.875), (0.0, 0.0))
    assert math.isclose(backscatter_snr(dec, ch, sys, 0), 8750.0, rel_tol=1e-9)
    dec0 = Decision((0.1, 0.1), (0.5, 0.5), (0.0, 0.0), (0.0, 0.0))
    assert backscatter_snr(dec0, ch, sys, 0) == 0.0


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_monotonicities_in_alpha(seed):
    """SINR decreases and backscatter SNR increases with the reflection
    coefficients; harvesting decreases with the harvester's own alpha."""
    rng = np.random.default_rng(seed)
    sys = default_system()
    ch = draw_channel(seed, ChannelGenConfig())
    dec = random_decision(rng)
    lo, hi = sorted((rng.uniform(0, 1), rng.uniform(0, 1)))
    d_lo = Decision(dec.transmit_power, dec.slot_time, (dec.reflection_coeff[0], lo),
                    dec.cpu_freq)
    d_hi = Decision(dec.transmit_power, dec.slot_time, (dec.reflection_coeff[0], hi),
                    dec.cpu_freq)
    assert active_sinr(d_hi, ch, sys, 0) <= active_sinr(d_lo, ch, sys, 0)
    assert backscatter_snr(d_hi, ch, sys, 1) >= backscatter_snr(d_lo, ch, sys, 1)
    assert harvested_energy(d_hi, ch, sys, 1) <= harvested_energy(d_lo, ch, sys, 1)


# ---------------------------------------------------------------------------
# metrics


def test_full_local_metrics_anchor(sys0, ch_anchor):
    dec = Decision((0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (2e8, 2e8))
    m = compute_metrics(dec, ch_anchor, sys0)
    for k in (0, 1):
        assert math.isclose(m.total_bits[k], 2e5, rel_tol=1e-12)
        assert math.isclose(m.total_energy[k], 0.08, rel_tol=1e-12)
    assert math.isclose(m.ce, 2.5e6, rel_tol=1e-12)


def test_all_zero_decision_raises(sys0, ch_anchor):
    dec = Decision((0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0))
    with pytest.raises(NoActivityError):
        compute_metrics(dec, ch_anchor, sys0)


@given(st.integers(0, 10_000))
@settings(max_examples=80, deadline=None)
def test_metrics_identities(seed):
    rng = np.random.default_rng(seed)
    sys = default_system()
    ch = draw_channel(seed, ChannelGenConfig())
    dec = random_decision(rng)
    m = compute_metrics(dec, ch, sys)
    for k in (0, 1):
        assert math.isclose(
            m.total_bits[k],
            m.active_bits[k] + m.backscatter_bits[k] + m.local_bits[k],
            rel_tol=1e-12)
        assert m.total_energy[k] >= m.local_energy[k] >= 0.0
    assert math.isclose(m.ce * sum(m.total_energy), sum(m.total_bits),
                        rel_tol=1e-12)


# ---------------------------------------------------------------------------
# constraint checker


def test_alpha_zero_boundary_convention(sys0, ch_anchor):
    """alpha=0 means inactive backscatter: C1 holds and C4 is vacuous."""
    dec = Decision((0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (2e8, 2e8))
    rep = check_constraints(dec, ch_anchor, sys0)
    assert rep.c1_rc[0].satisfied and rep.c1_rc[1].satisfied
    assert rep.c4_harvest[0].satisfied and rep.c4_harvest[1].satisfied
    assert rep.all_satisfied(0.0)


def test_time_budget_residual(sys0, ch_anchor):
    dec = Decision((1e-3, 1e-3), (0.75, 0.75), (0.0, 0.0), (2e8, 2e8))
    rep = check_constraints(dec, ch_anchor, sys0)
    assert not rep.c2_time.satisfied
    assert math.isclose(rep.c2_time.residual, 0.5, rel_tol=1e-12)


def test_sinr_constraint_with_anchor(sys0, ch_anchor):
    # SINR ~ 114.28 vs threshold 100 -> satisfied
    dec = Decision((0.1, 0.1), (0.5, 0.5), (0.875, 0.875), (0.0, 0.0))
    rep = check_constraints(dec, ch_anchor, sys0)
    assert rep.c5_sinr[0].satisfied and rep.c5_sinr[1].satisfied


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_residual_signs_match_inline_reevaluation(seed):
    """Each residual agrees with a direct inline re-evaluation of the
    inequality (independent re-implementation of C1-C7)."""
    rng = np.random.default_rng(seed)
    sys = default_system()
    ch = draw_channel(seed, ChannelGenConfig())
    dec = random_decision(rng)
    rep = check_constraints(dec, ch, sys)
    T, B = sys.frame_time, sys.bandwidth
    assert math.isclose(rep.c2_time.residual,
                        dec.slot_time[0] + dec.slot_time[1] - T, rel_tol=1e-12)
    for k in (0, 1):
        j = 1 - k
        u = sys.users[k]
        a = dec.reflection_coeff[k]
        assert math.isclose(rep.c1_rc[k].residual, max(a - 1.0, -a),
                            rel_tol=0, abs_tol=1e-15)
        assert math.isclose(rep.c3_freq[k].residual, dec.cpu_freq[k] - u.f_max,
                            rel_tol=1e-12)
        if a > 0.0 and dec.slot_time[j] >= 1e-9:
            eh = (dec.slot_time[j] * sys.eh_coeff * (1.0 - a)
                  * dec.transmit_power[j] * ch.gain_interuser)
            assert math.isclose(
                rep.c4_harvest[k].residual,
                dec.slot_time[j] * u.circuit_power_backscatter - eh,
                rel_tol=1e-12, abs_tol=1e-300)
        if dec.slot_time[k] >= 1e-9:
            sinr = active_sinr(dec, ch, sys, k)
            assert math.isclose(rep.c5_sinr[k].residual,
                                u.sinr_threshold - sinr, rel_tol=1e-12)
        bits = (dec.slot_time[k] * B * math.log2(1.0 + active_sinr(dec, ch, sys, k))
                + dec.slot_time[j] * B * math.log2(1.0 + backscatter_snr(dec, ch, sys, k))
                + T * dec.cpu_freq[k] / u.cpu_cycles_per_bit)
        assert math.isclose(rep.c6_bits[k].residual, u.min_bits - bits,
                            rel_tol=1e-9, abs_tol=1e-6)
        energy = (dec.slot_time[k] * (dec.transmit_power[k] + u.circuit_power_active)
                  + T * u.capacitance_coeff * dec.cpu_freq[k] ** 3)
        assert math.isclose(rep.c7_energy[k].residual, energy - u.energy_budget,
                            rel_tol=1e-9, abs_tol=1e-12)
        assert rep.c6_bits[k].satisfied == (rep.c6_bits[k].residual <= 0.0)
