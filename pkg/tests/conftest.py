"""Shared fixtures and helpers for the test suite."""
from __future__ import annotations

import pytest

from recipmec.channel import ChannelRealization, draw_channel
from recipmec.harness import trial_seed
from recipmec.model import Decision
from recipmec.params import ChannelGenConfig, default_system


#: Flat symmetric channel used by the hand-derivable anchor examples:
#: |h_1|^2 = |h_2|^2 = 1e-4, |g|^2 = 1e-2.
def anchor_channel() -> ChannelRealization:
    return ChannelRealization(gain_user_ap=(1e-4, 1e-4), gain_interuser=1e-2)


def channel(seed_tag: int, trial: int) -> ChannelRealization:
    """Deterministic channel draw from the default generation config."""
    return draw_channel(trial_seed(seed_tag, trial), ChannelGenConfig())


def rel_err(a: float, b: float, floor: float = 1.0) -> float:
    return abs(a - b) / max(abs(a), abs(b), floor)


@pytest.fixture
def sys0():
    return default_system()


@pytest.fixture
def ch_anchor():
    return anchor_channel()


def random_decision(rng, T: float = 1.0) -> Decision:
    """A random Decision with valid ranges (not necessarily feasible)."""
    p = tuple(10.0 ** rng.uniform(-6, 0) for _ in range(2))
    t1 = rng.uniform(0.0, T)
    t2 = rng.uniform(0.0, T - t1)
    alpha = tuple(rng.uniform(0.0, 1.0) for _ in range(2))
    f = tuple(10.0 ** rng.uniform(6, 9) for _ in range(2))
    return Decision(transmit_power=p, slot_time=(t1, t2),
                    reflection_coeff=alpha, cpu_freq=f)


def decision_energy(dec: Decision, sys) -> float:
    total = 0.0
    for k in (0, 1):
        u = sys.users[k]
        total += (dec.slot_time[k] * (dec.transmit_power[k] + u.circuit_power_active)
                  + sys.frame_time * u.capacitance_coeff * dec.cpu_freq[k] ** 3)
    return total
