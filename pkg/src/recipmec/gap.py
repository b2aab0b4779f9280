"""Closed-form comparison of reciprocal (backscatter-assisted) vs
non-reciprocal offloading under equal slot times and constant power."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .channel import ChannelRealization
from .params import SystemParams


class GapCase(enum.Enum):
    A = "A"          # harvesting-limited reflection binds
    B = "B"          # SINR-limited reflection binds
    INACTIVE = "inactive"  # no feasible reflection, gap is zero


class GapCrossCheckError(AssertionError):
    """Branch value disagrees with the direct bit-count difference (bug trap)."""


@dataclass(frozen=True)
class GapScenario:
    """Equal-slot, constant-power comparison scenario for user k."""
    p0: float
    sys: SystemParams
    ch: ChannelRealization
    k: int = 0

    def __post_init__(self):
        if self.p0 <= 0.0:
            raise ValueError("p0 must be positive")
        if self.k not in (0, 1):
            raise ValueError("user index must be 0 or 1")


@dataclass(frozen=True)
class GapResult:
    alpha_j: float
    reciprocal_bits: float
    nonreciprocal_bits: float
    gap: float
    case: GapCase


def _terms(scn: GapScenario) -> tuple[float, float]:
    k, j = scn.k, 1 - scn.k
    s, ch = scn.sys, scn.ch
    h_k2, h_j2 = ch.gain_user_ap[k], ch.gain_user_ap[j]
    g2 = ch.gain_interuser
    gth = s.users[k].sinr_threshold
    harvest_term = 1.0 - s.users[j].circuit_power_backscatter / (
        s.eh_coeff * scn.p0 * g2)
    sinr_term = (scn.p0 * h_k2 - gth * s.noise_power) / (gth * scn.p0 * h_j2 * g2)
    return harvest_term, sinr_term


def alpha_closed_form(scn: GapScenario) -> float:
    """Partner reflection coefficient max{0, min(harvest-limit, SINR-limit)}."""
    harvest_term, sinr_term = _terms(scn)
    return max(0.0, min(harvest_term, sinr_term))


def reciprocal_bits(scn: GapScenario, alpha_j: float) -> float:
    """Total offloaded bits for user k with the partner backscattering.

    Evaluates the combined single-log form; the two-term split (active SINR
    log plus backscatter SNR log) is an exact algebraic identity and is
    asserted here.
    """
    if not 0.0 <= alpha_j <= 1.0:
        raise ValueError("alpha_j must lie in [0, 1]")
    k, j = scn.k, 1 - scn.k
    s, ch = scn.sys, scn.ch
    h_k2, h_j2 = ch.gain_user_ap[k], ch.gain_user_ap[j]
    g2, sig2 = ch.gain_interuser, s.noise_power
    half = 0.5 * s.frame_time * s.bandwidth
    bs_power = alpha_j * scn.p0 * h_j2 * g2
    combined = half * math.log2(1.0 + (bs_power + scn.p0 * h_k2) / sig2)
    split = (half * math.log2(1.0 + scn.p0 * h_k2 / (bs_power + sig2))
             + half * math.log2(1.0 + bs_power / sig2))
    if abs(combined - split) > 1e-9 * max(1.0, abs(combined)):
        raise GapCrossCheckError("combined and split bit counts diverged")
    return combined


def nonreciprocal_bits(scn: GapScenario) -> float:
    """Total offloaded bits for user k without any backscatter assistance."""
    s = scn.sys
    return (0.5 * s.frame_time * s.bandwidth
            * math.log2(1.0 + scn.p0 * scn.ch.gain_user_ap[scn.k] / s.noise_power))


def bits_gap(scn: GapScenario) -> GapResult:
    """Classify the binding reflection limit and evaluate the bit gap.

    The branch value is cross-checked against the direct difference of the
    reciprocal and non-reciprocal bit counts; a mismatch beyond 1e-9 relative
    raises GapCrossCheckError.
    """
    k, j = scn.k, 1 - scn.k
    s, ch = scn.sys, scn.ch
    h_k2, h_j2 = ch.gain_user_ap[k], ch.gain_user_ap[j]
    g2, sig2 = ch.gain_interuser, s.noise_power
    gth = s.users[k].sinr_threshold
    half = 0.5 * s.frame_time * s.bandwidth

    harvest_term, sinr_term = _terms(scn)
    alpha_j = max(0.0, min(harvest_term, sinr_term))
    rec = reciprocal_bits(scn, alpha_j)
    nonrec = nonreciprocal_bits(scn)
    direct = rec - nonrec

    if alpha_j <= 0.0:
        case = GapCase.INACTIVE
        branch = 0.0
    elif harvest_term <= sinr_term:  # ties go to Case A (branches coincide)
        case = GapCase.A
        branch = half * math.log2(
            1.0 + (scn.p0 * g2 - s.users[j].circuit_power_backscatter / s.eh_coeff)
            * h_j2 / (scn.p0 * h_k2 + sig2))
    else:
        case = GapCase.B
        branch = half * math.log2(
            1.0 + (scn.p0 * h_k2 - gth * sig2) / ((scn.p0 * h_k2 + sig2) * gth))
    if abs(branch - direct) > 1e-9 * max(1.0, abs(branch), abs(direct)):
        raise GapCrossCheckError(
            f"branch value {branch} != direct difference {direct}")
    return GapResult(alpha_j=alpha_j, reciprocal_bits=rec,
                     nonreciprocal_bits=nonrec, gap=branch, case=case)
