"""Closed-form reciprocal-vs-non-reciprocal bit-gap analysis."""
from __future__ import annotations

import math

import numpy as np
import pytest

from recipmec.channel import ChannelRealization, draw_channel
from recipmec.gap import (GapCase, GapScenario, alpha_closed_form, bits_gap,
                          nonreciprocal_bits, reciprocal_bits)
from recipmec.params import ChannelGenConfig, default_system

from conftest import anchor_channel, rel_err


def _scn_a(sys):
    """Harvest-limited anchor: alpha = 0.875, Case A."""
    return GapScenario(p0=0.1, sys=sys, ch=anchor_channel())


def _scn_b(sys):
    """SINR-limited anchor: a strong partner link makes interference bind."""
    ch = ChannelRealization(gain_user_ap=(1e-4, 1e-2), gain_interuser=1e-2)
    return GapScenario(p0=0.1, sys=sys, ch=ch)


def test_scenario_validation(sys0):
    with pytest.raises(ValueError):
        GapScenario(p0=0.0, sys=sys0, ch=anchor_channel())
    with pytest.raises(ValueError):
        GapScenario(p0=0.1, sys=sys0, ch=anchor_channel(), k=2)


def test_alpha_closed_form_anchor(sys0):
    assert math.isclose(alpha_closed_form(_scn_a(sys0)), 0.875, rel_tol=1e-12)


def test_alpha_clamps_to_zero(sys0):
    # SINR numerator exactly zero: p0 |h_k|^2 = gamma_th sigma^2
    ch = anchor_channel()
    scn = GapScenario(p0=100.0 * 1e-11 / 1e-4, sys=sys0, ch=ch)
    assert alpha_closed_form(scn) == 0.0
    # harvesting infeasible at low carrier power
    scn2 = GapScenario(p0=0.01, sys=sys0, ch=ch)
    res = bits_gap(scn2)
    assert res.case is GapCase.INACTIVE
    assert res.gap == 0.0
    assert math.isclose(res.reciprocal_bits, res.nonreciprocal_bits,
                        rel_tol=1e-12)


def test_bit_counts_anchor(sys0):
    scn = _scn_a(sys0)
    rec = reciprocal_bits(scn, 0.875)
    nonrec = nonreciprocal_bits(scn)
    assert rel_err(rec, 9.972e5, 1.0) < 1e-4
    assert rel_err(nonrec, 9.9658e5, 1.0) < 1e-4
    # alpha = 0 removes the assistance entirely
    assert math.isclose(reciprocal_bits(scn, 0.0), nonrec, rel_tol=1e-12)
    with pytest.raises(ValueError):
        reciprocal_bits(scn, 1.5)


def test_case_a_gap_anchor(sys0):
    res = bits_gap(_scn_a(sys0))
    assert res.case is GapCase.A
    assert math.isclose(res.alpha_j, 0.875, rel_tol=1e-12)
    want = 5e4 * math.log2(1.0 + 8.75e-8 / (1e-5 + 1e-11))
    assert rel_err(res.gap, want, 1.0) < 1e-12
    assert rel_err(res.gap, 628.4, 1.0) < 1e-3
    assert math.isclose(res.gap, res.reciprocal_bits - res.nonreciprocal_bits,
                        rel_tol=1e-9)


def test_case_b_gap_anchor(sys0):
    res = bits_gap(_scn_b(sys0))
    assert res.case is GapCase.B
    want = 5e4 * math.log2(1.0 + (1e-5 - 1e-9) / ((1e-5 + 1e-11) * 100.0))
    assert rel_err(res.gap, want, 1.0) < 1e-12
    assert rel_err(res.gap, 717.6, 1.0) < 1e-3


def test_tie_goes_to_case_a(sys0):
    """When both reflection limits coincide the branches agree and the
    classifier reports Case A."""
    p0, g2, h_k2 = 0.1, 1e-2, 1e-4
    num = p0 * h_k2 - 100.0 * 1e-11
    harvest = 1.0 - 1e-4 / (0.8 * p0 * g2)   # 0.875
    h_j2 = num / (harvest * 100.0 * p0 * g2)
    ch = ChannelRealization(gain_user_ap=(h_k2, h_j2), gain_interuser=g2)
    res = bits_gap(GapScenario(p0=p0, sys=sys0, ch=ch))
    assert res.case is GapCase.A
    assert math.isclose(res.gap, res.reciprocal_bits - res.nonreciprocal_bits,
                        rel_tol=1e-9)


def test_case_a_gap_monotone_in_interuser_gain(sys0):
    """Within the harvest-limited regime a stronger inter-user link feeds the
    backscatterer more power and widens the gap."""
    gaps = []
    for g2 in (0.7e-2, 0.85e-2, 1e-2):
        ch = ChannelRealization(gain_user_ap=(1e-4, 1e-4), gain_interuser=g2)
        res = bits_gap(GapScenario(p0=0.1, sys=sys0, ch=ch))
        assert res.case is GapCase.A
        gaps.append(res.gap)
    assert gaps[0] < gaps[1] < gaps[2]


def test_gap_nonnegative_random(sys0):
    rng = np.random.default_rng(7)
    for i in range(200):
        ch = draw_channel(int(rng.integers(1 << 30)), ChannelGenConfig())
        p0 = 10.0 ** rng.uniform(-3, 0)
        res = bits_gap(GapScenario(p0=p0, sys=sys0, ch=ch, k=int(rng.integers(2))))
        assert res.gap >= 0.0
        assert (res.alpha_j > 0.0) == (res.case is not GapCase.INACTIVE)
        if res.case is not GapCase.INACTIVE:
            assert res.gap > 0.0
            assert res.reciprocal_bits > res.nonreciprocal_bits


def test_split_matches_combined_form(sys0):
    """reciprocal_bits equals the sum of the active-SINR log and the
    backscatter-SNR log (checked here against a manual evaluation)."""
    scn = _scn_a(sys0)
    for alpha in (0.1, 0.5, 0.875, 1.0):
        bs = alpha * 0.1 * 1e-4 * 1e-2
        split = (5e4 * math.log2(1.0 + 0.1 * 1e-4 / (bs + 1e-11))
                 + 5e4 * math.log2(1.0 + bs / 1e-11))
        assert math.isclose(reciprocal_bits(scn, alpha), split, rel_tol=1e-9)
