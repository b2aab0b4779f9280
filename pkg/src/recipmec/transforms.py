"""Ratio-to-parametric reduction and the quadratic-transform surrogate rate."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .channel import ChannelRealization
from .model import Decision, Metrics, compute_metrics
from .params import SystemParams


class SurrogateDomainError(ValueError):
    """log2 argument of the surrogate rate is nonpositive (stale/too-large y)."""


class ZeroEnergyError(ValueError):
    """Ratio parameter update attempted with zero total energy."""


@dataclass
class DinkelbachState:
    eta: float
    outer_iteration: int = 0
    last_objective: float = math.inf  # F(eta) = sum R_tot - eta * sum E_tot


@dataclass(frozen=True)
class AuxiliaryVars:
    y: tuple[float, float]           # W^(-1/2)
    gamma_bar: tuple[float, float]   # slack SINR, dimensionless


@dataclass
class DinkelbachReport:
    converged: bool
    eta: float
    decision: Decision
    metrics: Metrics
    outer_iterations: int
    eta_trace: list = field(default_factory=list)
    f_trace: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


def dinkelbach_eta_update(metrics: Metrics) -> float:
    """Next ratio parameter: total bits over total energy."""
    total_energy = sum(metrics.total_energy)
    if total_energy <= 0.0:
        raise ZeroEnergyError("eta update needs positive total energy")
    return sum(metrics.total_bits) / total_energy


def update_y(dec: Decision, ch: ChannelRealization, sys: SystemParams, k: int) -> float:
    """Closed-form optimal quadratic-transform auxiliary for user k."""
    j = 1 - k
    p_k = dec.transmit_power[k]
    interference = (dec.reflection_coeff[j] * p_k * ch.gain_user_ap[j]
                    * ch.gain_interuser)
    return math.sqrt(p_k * ch.gain_user_ap[k]) / (interference + sys.noise_power)


def surrogate_rate(dec: Decision, ch: ChannelRealization, sys: SystemParams,
                   y_k: float, k: int) -> float:
    """Surrogate active rate t_k B log2(1 + 2y sqrt(p|h|^2) - y^2 (I + sigma^2))."""
    j = 1 - k
    p_k = dec.transmit_power[k]
    interference = (dec.reflection_coeff[j] * p_k * ch.gain_user_ap[j]
                    * ch.gain_interuser)
    arg = (1.0 + 2.0 * y_k * math.sqrt(p_k * ch.gain_user_ap[k])
           - y_k * y_k * (interference + sys.noise_power))
    if arg <= 0.0:
        raise SurrogateDomainError(f"surrogate log argument {arg} <= 0")
    return dec.slot_time[k] * sys.bandwidth * math.log2(arg)


def dinkelbach_solve(inner: Callable[[float], Decision], sys: SystemParams,
                     ch: ChannelRealization, eta0: float, tol: float = 1e-6,
                     max_outer: int = 50) -> DinkelbachReport:
    """Iterate eta <- sum R / sum E with `inner(eta)` supplying a feasible
    decision that (approximately) maximizes sum R - eta * sum E.

    Stops when |F(eta)| <= tol * max(1, sum E).  The returned decision is the
    best-CE point seen, so the eta trace is non-decreasing even when the inner
    solver is inexact.
    """
    eta = eta0
    warnings = []
    best = None  # (ce, decision, metrics)
    eta_trace, f_trace = [], []
    outer = 0
    no_gain = 0
    for outer in range(1, max_outer + 1):
        dec = inner(eta)
        metrics = compute_metrics(dec, ch, sys)
        total_e = sum(metrics.total_energy)
        f_val = sum(metrics.total_bits) - eta * total_e
        eta_trace.append(eta)
        f_trace.append(f_val)
        stalled = best is not None and metrics.ce <= best[0] * (1.0 + 1e-9)
        no_gain = no_gain + 1 if stalled else 0
        if best is None or metrics.ce > best[0]:
            best = (metrics.ce, dec, metrics)
        if abs(f_val) <= tol * max(1.0, total_e):
            return DinkelbachReport(True, best[0], best[1], best[2], outer,
                                    eta_trace, f_trace, warnings)
        if abs(metrics.ce - eta) <= 1e-9 * max(1.0, abs(eta)) or no_gain >= 3:
            # ratio stagnated at the inner solver's noise floor; the quadratic
            # convergence of the parametric iteration makes further outer
            # iterations pure jitter
            return DinkelbachReport(True, best[0], best[1], best[2], outer,
                                    eta_trace, f_trace, warnings)
        if f_val < 0.0:
            # Inexact inner solver regressed below the current ratio; keep the
            # best point rather than letting eta decrease.
            warnings.append(f"outer {outer}: negative parametric objective {f_val:.3e}")
            return DinkelbachReport(True, best[0], best[1], best[2], outer,
                                    eta_trace, f_trace, warnings)
        eta = metrics.ce
    warnings.append(f"no convergence within {max_outer} outer iterations")
    return DinkelbachReport(False, best[0], best[1], best[2], outer,
                            eta_trace, f_trace, warnings)
