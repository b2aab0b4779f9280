"""Closed-form primal updates, subproblem-A solver and the slot-time LP."""
from __future__ import annotations

import math

import pytest

from recipmec.channel import ChannelRealization, draw_channel
from recipmec.model import compute_metrics
from recipmec.optimizer import Scheme, initialize_feasible
from recipmec.params import ChannelGenConfig, default_system
from recipmec.subproblems import (DualMultipliers, InconsistencyError,
                                  InfeasibleError, SubproblemAInput, _Ctx,
                                  UnboundedDirectionError, _violations,
                                  backscatter_power_check, primal_f,
                                  primal_gamma, primal_p, primal_q,
                                  recover_alpha, solve_subproblem_a,
                                  solve_subproblem_b)
from recipmec.transforms import update_y

from conftest import anchor_channel, rel_err


# ---------------------------------------------------------------------------
# closed-form updates (hand-derivable anchors)


def test_primal_p_anchor():
    duals = DualMultipliers(kappa=(1e-5, 0.0))
    # (y |h| kappa / ((eta+chi) t - lam |h|^2))^2 = (3e4*1e-2*1e-5/1e6)^2
    got = primal_p(duals, y_k=3e4, t_k=0.5, eta=2e6, h_k2=1e-4, k=0)
    assert rel_err(got, 9e-18, 1e-300) < 1e-12


def test_primal_p_degenerate_cases():
    assert primal_p(DualMultipliers(), 3e4, 0.5, 2e6, 1e-4, 0) == 0.0  # kappa=0
    base = primal_p(DualMultipliers(kappa=(1e-5, 0.0)), 3e4, 0.5, 2e6, 1e-4, 0)
    scaled = primal_p(DualMultipliers(kappa=(3e-5, 0.0)), 3e4, 0.5, 2e6, 1e-4, 0)
    assert rel_err(scaled, 9.0 * base, 1e-300) < 1e-12  # homogeneity deg 2
    with pytest.raises(UnboundedDirectionError):
        primal_p(DualMultipliers(lam=(1e11, 0.0)), 3e4, 0.5, 2e6, 1e-4, 0)


def test_primal_q_anchor():
    sys = default_system()
    ch = anchor_channel()
    duals = DualMultipliers(eps=(1.0, 0.0))
    # decoupled water-filling form; clip disabled via a huge incident power
    got = primal_q(duals, t_j=0.5, bandwidth=1e5, ch=ch, sys=sys, y_j=0.0,
                   p_j=1e9, k=0)
    want = 0.5e5 / (math.log(2.0) * 0.5 * 0.8 * 1e-2) - 1e-11 / 1e-6
    assert rel_err(got, want, 1e-12) < 1e-12
    assert rel_err(got, 1.8034e7, 1e-12) < 1e-4
    # the clip to p_j governs in realistic instances
    clipped = primal_q(duals, 0.5, 1e5, ch, sys, 0.0, 0.1, 0)
    assert clipped == 0.1


def test_primal_q_cutoff_and_unbounded():
    sys = default_system()
    ch = anchor_channel()
    # large denominator drives the water level below the cutoff
    duals = DualMultipliers(eps=(1e15, 0.0))
    assert primal_q(duals, 0.5, 1e5, ch, sys, 0.0, 1.0, 0) == 0.0
    with pytest.raises(UnboundedDirectionError):
        primal_q(DualMultipliers(), 0.5, 1e5, ch, sys, 0.0, 1.0, 0)


def test_primal_f_anchor():
    sys = default_system()
    got = primal_f(DualMultipliers(), sys, eta=2.5e6, k=0)
    assert rel_err(got, 1.1547e8, 1e-12) < 1e-4
    # numerator cutoff
    duals = DualMultipliers(mu=(1.0, 0.0))  # mu >= T/C = 1e-3
    assert primal_f(duals, sys, 2.5e6, 0) == 0.0
    # clip contract
    assert primal_f(DualMultipliers(), sys, 1e-12, 0) <= sys.users[0].f_max


def test_primal_gamma_anchors():
    got = primal_gamma(DualMultipliers(kappa=(1e4, 0.0)), t_k=0.5,
                       bandwidth=1e5, k=0)
    assert rel_err(got, 6.2135, 1e-12) < 1e-4
    got2 = primal_gamma(DualMultipliers(kappa=(1e4, 0.0), omega=(1.0, 0.0)),
                        0.5, 1e5, 0)
    assert rel_err(got2, 13.427, 1e-12) < 1e-4
    assert primal_gamma(DualMultipliers(kappa=(1e12, 0.0)), 0.5, 1e5, 0) == 0.0
    with pytest.raises(UnboundedDirectionError):
        primal_gamma(DualMultipliers(), 0.5, 1e5, 0)


def test_recover_alpha():
    assert recover_alpha(0.0, 0.1) == 0.0
    assert recover_alpha(0.1, 0.1) == 1.0
    assert math.isclose(recover_alpha(0.0875, 0.1), 0.875, rel_tol=1e-12)
    assert recover_alpha(0.0, 0.0) == 0.0
    with pytest.raises(InconsistencyError):
        recover_alpha(0.2, 0.1)
    with pytest.raises(InconsistencyError):
        recover_alpha(0.1, 0.0)


# ---------------------------------------------------------------------------
# subproblem A


def _subproblem_input(seed: int, eta=None, **user_overrides):
    from dataclasses import replace
    sys = default_system()
    if user_overrides:
        users = tuple(replace(u, **user_overrides) for u in sys.users)
        sys = replace(sys, users=users)
    ch = draw_channel(seed, ChannelGenConfig())
    dec0 = initialize_feasible(sys, ch, Scheme.PROPOSED)
    if dec0 is None:
        return None
    m0 = compute_metrics(dec0, ch, sys)
    y = tuple(update_y(dec0, ch, sys, k) for k in (0, 1))
    T = sys.frame_time
    return SubproblemAInput(sys, ch, (T / 2, T / 2), y,
                            m0.ce if eta is None else eta)


def test_subproblem_a_feasible_output():
    for seed in range(5):
        inp = _subproblem_input(seed)
        assert inp is not None
        sol = solve_subproblem_a(inp)
        assert sol.feasible
        worst = max(_violations(_Ctx(inp), list(sol.p), list(sol.q),
                                list(sol.f), list(sol.gamma_bar)))
        assert worst <= 1e-9
        for k in (0, 1):
            assert 0.0 <= sol.q[k] <= sol.p[1 - k] * (1.0 + 1e-12)
            assert 0.0 <= recover_alpha(sol.q[k], sol.p[1 - k]) <= 1.0


def test_subproblem_a_unconstrained_frequency():
    """With no bit requirement and a huge budget the CPU frequency sits at its
    unconstrained stationary point (the closed-form primal_f value)."""
    inp = _subproblem_input(0, eta=2.5e6, min_bits=0.0, energy_budget=1e6)
    sol = solve_subproblem_a(inp)
    assert sol.feasible
    want = primal_f(DualMultipliers(), inp.sys, 2.5e6, 0)
    for k in (0, 1):
        assert rel_err(sol.f[k], want, 1.0) < 1e-6


def test_subproblem_a_complementary_slackness():
    """Multipliers above tolerance pair with tight constraints (skipped for
    instances where multiplier recovery fell back to ascent iterates)."""
    c_tol = 1e-5
    for seed in range(5):
        inp = _subproblem_input(seed)
        sol = solve_subproblem_a(inp, want_duals=True)
        assert sol.feasible
        if any("recovery" in w for w in sol.warnings):
            continue
        c = _Ctx(inp)
        d = sol.duals
        p, q, f = list(sol.p), list(sol.q), list(sol.f)
        for k in (0, 1):
            j = 1 - k
            if d.chi[k] > 0.0:
                e_used = c.t[k] * (p[k] + c.Pac[k]) + c.T * c.phi[k] * f[k] ** 3
                assert abs(c.Ebud[k] - e_used) <= c_tol * c.Ebud[k]
            if d.mu[k] > 0.0 and c.fmax[k] > 0.0:
                assert f[k] >= c.fmax[k] * (1.0 - c_tol)
            if d.psi[k] > 0.0:
                assert p[j] - q[k] <= c_tol * max(c.p_cap[j], 1e-9)


# ---------------------------------------------------------------------------
# subproblem B


def test_slot_lp_symmetric_tie_break():
    sys = default_system()
    ch = anchor_channel()
    t = solve_subproblem_b(sys, ch, p=(1e-3, 1e-3), q=(0.0, 0.0),
                           f=(0.0, 0.0), gamma_bar=(100.0, 100.0), eta=1e3)
    assert math.isclose(t[0], 0.5, rel_tol=1e-9)
    assert math.isclose(t[1], 0.5, rel_tol=1e-9)


def test_slot_lp_bits_bound_vertex():
    """User 1's net rate dominates: t_2 drops to its minimum-bits lower bound
    and t_1 takes the rest of the frame."""
    from dataclasses import replace
    sys = default_system()
    users = (replace(sys.users[0], min_bits=1e4),
             replace(sys.users[1], min_bits=1e4))
    sys = replace(sys, users=users)
    ch = ChannelRealization(gain_user_ap=(1e-3, 1e-5), gain_interuser=1e-2)
    gamma = (1e4, 10.0)   # user 1 far better
    t = solve_subproblem_b(sys, ch, p=(1e-3, 1e-3), q=(0.0, 0.0),
                           f=(0.0, 0.0), gamma_bar=gamma, eta=1e3)
    r2 = sys.bandwidth * math.log2(1.0 + gamma[1])
    t2_min = 1e4 / r2
    assert math.isclose(t[1], t2_min, rel_tol=1e-9)
    assert math.isclose(t[0] + t[1], sys.frame_time, rel_tol=1e-9)


def test_slot_lp_infeasible_polygon():
    from dataclasses import replace
    sys = default_system()
    users = tuple(replace(u, min_bits=1e9) for u in sys.users)
    sys = replace(sys, users=users)
    ch = anchor_channel()
    with pytest.raises(InfeasibleError):
        solve_subproblem_b(sys, ch, (1e-3, 1e-3), (0.0, 0.0), (0.0, 0.0),
                           (100.0, 100.0), 1e3)


def test_backscatter_power_check():
    sys = default_system()
    ch = anchor_channel()
    # harvested power zeta*(p_j - q_k)*g2 vs Pbc = 1e-4:
    # p=0.1, q=0.05 -> 0.8*0.05*1e-2 = 4e-4 >= 1e-4: kept
    assert backscatter_power_check(sys, ch, (0.1, 0.1), (0.05, 0.0)) == (0.05, 0.0)
    # p=0.01, q=0.005 -> 0.8*0.005*1e-2 = 4e-5 < 1e-4: zeroed
    assert backscatter_power_check(sys, ch, (0.01, 0.01), (0.005, 0.0)) == (0.0, 0.0)
