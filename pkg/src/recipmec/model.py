"""Physical-layer and computing formulas plus the feasibility checker.

User indexing: k in {0, 1}, the partner index is j = 1 - k.  User k transmits
actively in slot k (duration t_k) and backscatters in the partner slot j.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import ChannelRealization
from .params import SystemParams

#: Slot durations below this are treated as unused slots: the harvested-energy
#: and SINR-gate constraints are vacuous there.
TIME_EPS = 1e-9


class NoActivityError(ValueError):
    """Raised when computation efficiency is 0/0 (no bits, no energy)."""


@dataclass(frozen=True)
class Decision:
    transmit_power: tuple[float, float]    # p_k, W
    slot_time: tuple[float, float]         # t_k, s
    reflection_coeff: tuple[float, float]  # alpha_k in [0, 1]
    cpu_freq: tuple[float, float]          # f_k, Hz


@dataclass(frozen=True)
class Metrics:
    active_bits: tuple[float, float]
    backscatter_bits: tuple[float, float]
    local_bits: tuple[float, float]
    total_bits: tuple[float, float]
    local_energy: tuple[float, float]
    total_energy: tuple[float, float]
    harvested_energy: tuple[float, float]
    ce: float  # bits per Joule


@dataclass(frozen=True)
class ConstraintEntry:
    satisfied: bool
    residual: float  # lhs - rhs of the "<=" form; <= 0 iff satisfied


@dataclass(frozen=True)
class ConstraintReport:
    """Per-constraint status; per-user constraints carry one entry per user."""
    c1_rc: tuple[ConstraintEntry, ConstraintEntry]
    c2_time: ConstraintEntry
    c3_freq: tuple[ConstraintEntry, ConstraintEntry]
    c4_harvest: tuple[ConstraintEntry, ConstraintEntry]
    c5_sinr: tuple[ConstraintEntry, ConstraintEntry]
    c6_bits: tuple[ConstraintEntry, ConstraintEntry]
    c7_energy: tuple[ConstraintEntry, ConstraintEntry]

    def all_satisfied(self, tol: float = 0.0) -> bool:
        return self.max_violation() <= tol

    def max_violation(self) -> float:
        worst = self.c2_time.residual
        for pair in (self.c1_rc, self.c3_freq, self.c4_harvest,
                     self.c5_sinr, self.c6_bits, self.c7_energy):
            worst = max(worst, pair[0].residual, pair[1].residual)
        return worst


def harvested_energy(dec: Decision, ch: ChannelRealization, sys: SystemParams, k: int) -> float:
    """Energy harvested by user k while backscattering in the partner slot."""
    j = 1 - k
    return (dec.slot_time[j] * sys.eh_coeff * (1.0 - dec.reflection_coeff[k])
            * dec.transmit_power[j] * ch.gain_interuser)


def active_sinr(dec: Decision, ch: ChannelRealization, sys: SystemParams, k: int) -> float:
    """SINR of user k's active signal, interfered by the partner's backscatter."""
    j = 1 - k
    p_k = dec.transmit_power[k]
    interference = (dec.reflection_coeff[j] * p_k * ch.gain_user_ap[j]
                    * ch.gain_interuser)
    return p_k * ch.gain_user_ap[k] / (interference + sys.noise_power)


def backscatter_snr(dec: Decision, ch: ChannelRealization, sys: SystemParams, k: int) -> float:
    """SNR of user k's backscattered signal (reflected off the partner's carrier)."""
    j = 1 - k
    return (dec.reflection_coeff[k] * dec.transmit_power[j] * ch.gain_user_ap[k]
            * ch.gain_interuser / sys.noise_power)


def compute_metrics(dec: Decision, ch: ChannelRealization, sys: SystemParams) -> Metrics:
    T, B = sys.frame_time, sys.bandwidth
    r_a, r_b, r_l, r_tot = [], [], [], []
    e_l, e_tot, e_h = [], [], []
    for k in (0, 1):
        j = 1 - k
        u = sys.users[k]
        ra = dec.slot_time[k] * B * math.log2(1.0 + active_sinr(dec, ch, sys, k))
        rb = dec.slot_time[j] * B * math.log2(1.0 + backscatter_snr(dec, ch, sys, k))
        rl = T * dec.cpu_freq[k] / u.cpu_cycles_per_bit
        el = T * u.capacitance_coeff * dec.cpu_freq[k] ** 3
        et = dec.slot_time[k] * (dec.transmit_power[k] + u.circuit_power_active) + el
        r_a.append(ra)
        r_b.append(rb)
        r_l.append(rl)
        r_tot.append(rl + ra + rb)
        e_l.append(el)
        e_tot.append(et)
        e_h.append(harvested_energy(dec, ch, sys, k))
    total_energy = e_tot[0] + e_tot[1]
    total_bits = r_tot[0] + r_tot[1]
    if total_energy <= 0.0:
        if total_bits <= 0.0:
            raise NoActivityError("zero bits and zero energy: CE undefined")
        raise NoActivityError("positive bits with zero energy: CE undefined")
    ce = total_bits / total_energy
    return Metrics(
        active_bits=(r_a[0], r_a[1]),
        backscatter_bits=(r_b[0], r_b[1]),
        local_bits=(r_l[0], r_l[1]),
        total_bits=(r_tot[0], r_tot[1]),
        local_energy=(e_l[0], e_l[1]),
        total_energy=(e_tot[0], e_tot[1]),
        harvested_energy=(e_h[0], e_h[1]),
        ce=ce,
    )


def _entry(residual: float) -> ConstraintEntry:
    return ConstraintEntry(satisfied=residual <= 0.0, residual=residual)


_VACUOUS = ConstraintEntry(satisfied=True, residual=0.0)


def check_constraints(dec: Decision, ch: ChannelRealization, sys: SystemParams) -> ConstraintReport:
    """Evaluate C1..C7.

    Conventions: alpha_k = 0 means backscatter inactive, so C1 holds at the
    boundary and C4 is vacuous; C4/C5 are also vacuous when the relevant slot
    time is below TIME_EPS.
    """
    T = sys.frame_time
    c1, c3, c4, c5, c6, c7 = [], [], [], [], [], []
    for k in (0, 1):
        j = 1 - k
        u = sys.users[k]
        alpha = dec.reflection_coeff[k]
        c1.append(_entry(max(alpha - 1.0, -alpha)))
        c3.append(_entry(dec.cpu_freq[k] - u.f_max))
        if alpha <= 0.0 or dec.slot_time[j] < TIME_EPS:
            c4.append(_VACUOUS)
        else:
            c4.append(_entry(dec.slot_time[j] * u.circuit_power_backscatter
                             - harvested_energy(dec, ch, sys, k)))
        if dec.slot_time[k] < TIME_EPS:
            c5.append(_VACUOUS)
        else:
            c5.append(_entry(u.sinr_threshold - active_sinr(dec, ch, sys, k)))

    # C6/C7 need the bit/energy totals; recompute without the CE guard.
    B = sys.bandwidth
    for k in (0, 1):
        j = 1 - k
        u = sys.users[k]
        ra = dec.slot_time[k] * B * math.log2(1.0 + active_sinr(dec, ch, sys, k))
        rb = dec.slot_time[j] * B * math.log2(1.0 + backscatter_snr(dec, ch, sys, k))
        rl = T * dec.cpu_freq[k] / u.cpu_cycles_per_bit
        el = T * u.capacitance_coeff * dec.cpu_freq[k] ** 3
        et = dec.slot_time[k] * (dec.transmit_power[k] + u.circuit_power_active) + el
        c6.append(_entry(u.min_bits - (rl + ra + rb)))
        c7.append(_entry(et - u.energy_budget))

    return ConstraintReport(
        c1_rc=(c1[0], c1[1]),
        c2_time=_entry(dec.slot_time[0] + dec.slot_time[1] - T),
        c3_freq=(c3[0], c3[1]),
        c4_harvest=(c4[0], c4[1]),
        c5_sinr=(c5[0], c5[1]),
        c6_bits=(c6[0], c6[1]),
        c7_energy=(c7[0], c7[1]),
    )
