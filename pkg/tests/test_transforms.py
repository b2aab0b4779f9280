"""Ratio-parameter iteration and the quadratic-transform surrogate."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recipmec.channel import draw_channel
from recipmec.model import Decision, compute_metrics
from recipmec.params import ChannelGenConfig, default_system
from recipmec.transforms import (SurrogateDomainError, ZeroEnergyError,
                                 dinkelbach_eta_update, dinkelbach_solve,
                                 surrogate_rate, update_y)

from conftest import anchor_channel, random_decision, rel_err


def test_eta_update_full_local_anchor(sys0, ch_anchor):
    dec = Decision((0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (2e8, 2e8))
    m = compute_metrics(dec, ch_anchor, sys0)
    assert math.isclose(dinkelbach_eta_update(m), 2.5e6, rel_tol=1e-12)


def test_eta_update_zero_energy_raises(sys0, ch_anchor):
    dec = Decision((0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (2e8, 2e8))
    m = compute_metrics(dec, ch_anchor, sys0)
    zeroed = type(m)(m.active_bits, m.backscatter_bits, m.local_bits,
                     m.total_bits, m.local_energy, (0.0, 0.0),
                     m.harvested_energy, m.ce)
    with pytest.raises(ZeroEnergyError):
        dinkelbach_eta_update(zeroed)


def test_surrogate_zero_auxiliary(sys0, ch_anchor):
    dec = Decision((0.1, 0.1), (0.5, 0.5), (0.875, 0.875), (0.0, 0.0))
    assert surrogate_rate(dec, ch_anchor, sys0, 0.0, 0) == 0.0


def test_surrogate_hand_example(sys0, ch_anchor):
    dec = Decision((0.1, 0.1), (0.5, 0.5), (0.875, 0.875), (0.0, 0.0))
    got = surrogate_rate(dec, ch_anchor, sys0, 1e4, 0)
    want = 0.5 * 1e5 * math.log2(55.496)
    assert rel_err(got, want, 1.0) < 1e-4


def test_update_y_hand_example(sys0, ch_anchor):
    dec = Decision((0.1, 0.1), (0.5, 0.5), (0.875, 0.875), (0.0, 0.0))
    assert rel_err(update_y(dec, ch_anchor, sys0, 0), 3.614e4, 1e-12) < 1e-3
    dec0 = Decision((0.0, 0.1), (0.5, 0.5), (0.0, 0.0), (0.0, 0.0))
    assert update_y(dec0, ch_anchor, sys0, 0) == 0.0


def test_surrogate_domain_error(sys0, ch_anchor):
    dec = Decision((0.1, 0.1), (0.5, 0.5), (0.875, 0.875), (0.0, 0.0))
    with pytest.raises(SurrogateDomainError):
        surrogate_rate(dec, ch_anchor, sys0, 1e9, 0)


@given(st.integers(0, 10_000))
@settings(max_examples=80, deadline=None)
def test_tightness_and_upper_bound(seed):
    """surrogate(y*) equals the true active rate; any other valid y is an
    under-estimator (the transform is maximized at y*)."""
    rng = np.random.default_rng(seed)
    sys = default_system()
    ch = draw_channel(seed, ChannelGenConfig())
    dec = random_decision(rng)
    m = compute_metrics(dec, ch, sys)
    for k in (0, 1):
        y_star = update_y(dec, ch, sys, k)
        tight = surrogate_rate(dec, ch, sys, y_star, k)
        assert rel_err(tight, m.active_bits[k], 1.0) < 1e-9
        y = y_star * rng.uniform(0.0, 1.5)
        try:
            val = surrogate_rate(dec, ch, sys, y, k)
        except SurrogateDomainError:
            continue
        assert val <= m.active_bits[k] * (1.0 + 1e-9) + 1e-9


def test_dinkelbach_constant_inner_two_iterations(sys0, ch_anchor):
    """A constant inner decision is the classic fixed point: after the first
    eta update F(eta) = 0 exactly, so the loop stops on iteration 2."""
    dec = Decision((0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (2e8, 2e8))
    rep = dinkelbach_solve(lambda eta: dec, sys0, ch_anchor, eta0=1.0)
    assert rep.converged
    assert rep.outer_iterations <= 2
    assert math.isclose(rep.eta, 2.5e6, rel_tol=1e-12)


def test_dinkelbach_trace_properties(sys0, ch_anchor):
    """Non-decreasing eta trace and decreasing parametric objective along a
    non-trivial inner solver (selects the better of two fixed decisions)."""
    d1 = Decision((0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (2e8, 2e8))
    d2 = Decision((0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (4e8, 4e8))

    def inner(eta):
        def fval(d):
            m = compute_metrics(d, ch_anchor, sys0)
            return sum(m.total_bits) - eta * sum(m.total_energy)
        return max((d1, d2), key=fval)

    rep = dinkelbach_solve(inner, sys0, ch_anchor, eta0=1e3)
    assert rep.converged
    for i in range(1, len(rep.eta_trace)):
        assert rep.eta_trace[i] >= rep.eta_trace[i - 1]
        assert rep.f_trace[i] <= rep.f_trace[i - 1] + 1e-9
