"""Inner solvers for the parametric (fixed-ratio) problem.

Subproblem A fixes the slot times and surrogate auxiliaries and optimizes
powers, backscatter powers, CPU frequencies, and the slack SINRs via the KKT
closed forms driven by projected dual subgradient ascent.  Subproblem B
re-allocates the two slot times by enumerating the vertices of a small 2-D
polygon.

The paper-style variables p_bar[k,j] = alpha_k * p_j and p_hat[j,k] =
alpha_j * p_k are the same product; we carry a single unified variable
q_k = alpha_k * p_j per user.  q_k is the effective backscatter power of
user k (drawn from the partner's slot), and q_j is the interference power
seen by user k's active uplink.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .channel import ChannelRealization
from .model import TIME_EPS
from .params import SystemParams

LN2 = math.log(2.0)
INVPHI = (math.sqrt(5.0) - 1.0) / 2.0  # golden ratio conjugate


class UnboundedDirectionError(ValueError):
    """A closed-form primal update has no finite maximizer at this dual point."""


class InconsistencyError(ValueError):
    """Backscatter power exceeds the incident carrier power."""


class InfeasibleError(ValueError):
    """The requested subproblem has an empty feasible set."""


@dataclass(frozen=True)
class DualMultipliers:
    """Nonnegative multipliers, one per user: backscatter-power cap (psi),
    CPU cap (mu), harvested-energy (eps), SINR (lam), minimum-bits (omega),
    energy budget (chi), and surrogate slack (kappa)."""
    psi: tuple[float, float] = (0.0, 0.0)
    mu: tuple[float, float] = (0.0, 0.0)
    eps: tuple[float, float] = (0.0, 0.0)
    lam: tuple[float, float] = (0.0, 0.0)
    omega: tuple[float, float] = (0.0, 0.0)
    chi: tuple[float, float] = (0.0, 0.0)
    kappa: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class SubproblemAInput:
    sys: SystemParams
    ch: ChannelRealization
    slot_time: tuple[float, float]
    y: tuple[float, float]
    eta: float
    backscatter_enabled: bool = True
    fix_f_zero: bool = False  # full-offloading benchmark pins f at 0


@dataclass(frozen=True)
class SubproblemASolution:
    p: tuple[float, float]
    q: tuple[float, float]
    f: tuple[float, float]
    gamma_bar: tuple[float, float]
    duals: DualMultipliers
    objective: float
    dual_gap: float
    feasible: bool
    iterations: int
    warnings: tuple[str, ...] = ()


@dataclass
class DualAscentConfig:
    max_iters: int = 400
    tol: float = 1e-6
    feas_tol: float = 1e-9
    step0: float = 1.0
    check_every: int = 20


# ---------------------------------------------------------------------------
# closed-form primal updates


def primal_p(duals: DualMultipliers, y_k: float, t_k: float, eta: float,
             h_k2: float, k: int, coupling: float = 0.0) -> float:
    """Stationary transmit power of user k.

    `coupling` carries psi_j + eps_j * t_k * zeta * |g|^2, the terms that
    appear once the partner's carrier-power and harvesting constraints are
    expressed in the unified q variable; with coupling = 0 this is the plain
    textbook form.
    """
    denom = (eta + duals.chi[k]) * t_k - duals.lam[k] * h_k2 - coupling
    if denom <= 0.0:
        raise UnboundedDirectionError(
            f"power update denominator {denom} <= 0 for user {k}")
    return (y_k * math.sqrt(h_k2) * duals.kappa[k] / denom) ** 2


def primal_q(duals: DualMultipliers, t_j: float, bandwidth: float,
             ch: ChannelRealization, sys: SystemParams, y_j: float,
             p_j: float, k: int) -> float:
    """Stationary backscatter power q_k, water-filling style, clipped to [0, p_j].

    The denominator extends the decoupled closed form with the partner's SINR
    and surrogate-slack multipliers, which both see q_k as interference.
    """
    j = 1 - k
    h_k2 = ch.gain_user_ap[k]
    g2 = ch.gain_interuser
    gamma_th_j = sys.users[j].sinr_threshold
    denom = (duals.eps[k] * t_j * sys.eh_coeff * g2 + duals.psi[k]
             + (duals.lam[j] * gamma_th_j + duals.kappa[j] * y_j * y_j) * h_k2 * g2)
    if denom <= 0.0:
        raise UnboundedDirectionError(
            f"backscatter update denominator {denom} <= 0 for user {k}")
    raw = (t_j * bandwidth * (1.0 + duals.omega[k]) / (LN2 * denom)
           - sys.noise_power / (h_k2 * g2))
    return min(max(raw, 0.0), p_j)


def primal_f(duals: DualMultipliers, sys: SystemParams, eta: float, k: int) -> float:
    """Stationary CPU frequency, clipped to [0, f_max]."""
    u = sys.users[k]
    T = sys.frame_time
    denom = 3.0 * T * u.capacitance_coeff * (eta + duals.chi[k])
    if denom <= 0.0:
        raise UnboundedDirectionError("eta + chi must be positive")
    num = max(0.0, (1.0 + duals.omega[k]) * T / u.cpu_cycles_per_bit - duals.mu[k])
    return min(math.sqrt(num / denom), u.f_max)


def primal_gamma(duals: DualMultipliers, t_k: float, bandwidth: float, k: int) -> float:
    """Stationary slack SINR [t_k B (1+omega)/(ln2 kappa) - 1]^+."""
    if duals.kappa[k] <= 0.0:
        raise UnboundedDirectionError(f"kappa_{k} = 0 leaves the slack SINR unbounded")
    return max(0.0, t_k * bandwidth * (1.0 + duals.omega[k]) / (LN2 * duals.kappa[k]) - 1.0)


def recover_alpha(q_k: float, p_j: float) -> float:
    """Reflection coefficient from the unified backscatter power."""
    if q_k < 0.0:
        raise InconsistencyError(f"negative backscatter power {q_k}")
    if p_j <= 0.0:
        if q_k > 0.0:
            raise InconsistencyError("backscatter power without incident carrier")
        return 0.0
    if q_k > p_j * (1.0 + 1e-12):
        raise InconsistencyError(f"q={q_k} exceeds incident power p={p_j}")
    return min(q_k / p_j, 1.0)


# ---------------------------------------------------------------------------
# subproblem A context + objective / feasibility helpers


class _Ctx:
    """Plain-float constants for one subproblem-A instance (hot-loop friendly)."""

    __slots__ = ("T", "B", "sig2", "zeta", "g2", "eta", "enabled",
                 "t", "y", "h2", "a", "C", "phi", "fmax", "Pbc", "Pac",
                 "Ebud", "Rth", "gth", "p_cap", "f_bud", "active", "bs")

    def __init__(self, inp: SubproblemAInput):
        s = inp.sys
        self.T, self.B = s.frame_time, s.bandwidth
        self.sig2, self.zeta = s.noise_power, s.eh_coeff
        self.g2 = inp.ch.gain_interuser
        self.eta = inp.eta
        self.enabled = inp.backscatter_enabled
        self.t = inp.slot_time
        self.y = inp.y
        self.h2 = inp.ch.gain_user_ap
        self.a = tuple(self.h2[k] * self.g2 / self.sig2 for k in (0, 1))
        us = s.users
        self.C = tuple(u.cpu_cycles_per_bit for u in us)
        self.phi = tuple(u.capacitance_coeff for u in us)
        self.fmax = ((0.0, 0.0) if inp.fix_f_zero
                     else tuple(u.f_max for u in us))
        self.Pbc = tuple(u.circuit_power_backscatter for u in us)
        self.Pac = tuple(u.circuit_power_active for u in us)
        self.Ebud = tuple(u.energy_budget for u in us)
        self.Rth = tuple(u.min_bits for u in us)
        self.gth = tuple(u.sinr_threshold for u in us)
        self.active = tuple(self.t[k] >= TIME_EPS for k in (0, 1))
        # user k backscatters in the partner slot
        self.bs = tuple(self.enabled and self.t[1 - k] >= TIME_EPS for k in (0, 1))
        self.p_cap = tuple(
            max(0.0, self.Ebud[k] / self.t[k] - self.Pac[k]) if self.active[k] else 0.0
            for k in (0, 1))
        self.f_bud = tuple(min(self.fmax[k], (self.Ebud[k] / (self.T * self.phi[k])) ** (1.0 / 3.0))
                           for k in (0, 1))


def _objective(c: _Ctx, p, q, f, gb) -> float:
    val = 0.0
    for k in (0, 1):
        j = 1 - k
        val += (c.T * f[k] / c.C[k]
                + c.t[k] * c.B * math.log2(1.0 + gb[k])
                + c.t[j] * c.B * math.log2(1.0 + q[k] * c.a[k])
                - c.eta * (c.t[k] * (p[k] + c.Pac[k]) + c.T * c.phi[k] * f[k] ** 3))
    return val


def _bits(c: _Ctx, k: int, q, f, gb) -> float:
    j = 1 - k
    return (c.T * f[k] / c.C[k]
            + c.t[k] * c.B * math.log2(1.0 + gb[k])
            + c.t[j] * c.B * math.log2(1.0 + q[k] * c.a[k]))


def _energy(c: _Ctx, k: int, p, f) -> float:
    return c.t[k] * (p[k] + c.Pac[k]) + c.T * c.phi[k] * f[k] ** 3


def _s8(c: _Ctx, k: int, p, q) -> float:
    """Surrogate-concavity slack: 2y sqrt(p|h|^2) - y^2 (q_j |h_j|^2 |g|^2 + sigma^2)."""
    j = 1 - k
    y = c.y[k]
    return (2.0 * y * math.sqrt(p[k] * c.h2[k])
            - y * y * (q[j] * c.h2[j] * c.g2 + c.sig2))


def _violations(c: _Ctx, p, q, f, gb):
    """Signed residuals (lhs - rhs of the <=-form) of the subproblem constraints."""
    out = []
    for k in (0, 1):
        j = 1 - k
        out.append(q[k] - p[j])                       # q <= p_j
        out.append(f[k] - c.fmax[k])                  # C3
        if c.bs[k]:
            out.append(c.Pbc[k] - c.zeta * (p[j] - q[k]) * c.g2)   # C4a / t_j
        if c.active[k]:
            out.append((q[j] * c.h2[j] * c.g2 + c.sig2) * c.gth[k]
                       - p[k] * c.h2[k])              # C5a
            out.append(gb[k] - _s8(c, k, p, q))       # C8
        out.append(c.Rth[k] - _bits(c, k, q, f, gb))  # C6b (bits)
        out.append(_energy(c, k, p, f) - c.Ebud[k])   # C7 (J)
    return out


def _restore(c: _Ctx, p, q, f, gb):
    """Project a primal point onto the feasible set along the q, f (and, where
    unavoidable, p) axes.  Returns feasible lists or None."""
    p = [min(max(p[k], 0.0), c.p_cap[k]) if c.active[k] else 0.0 for k in (0, 1)]
    q = list(q)
    f = [min(max(f[k], 0.0), c.fmax[k]) for k in (0, 1)]
    gb = list(gb)
    for k in (0, 1):
        if not c.bs[k]:
            q[k] = 0.0
    for _ in (0, 1):  # two passes: the C4a/C5a repairs interact across users
        for k in (0, 1):
            j = 1 - k
            if c.bs[k]:
                q[k] = min(max(q[k], 0.0), p[j])
                # C4a: p_j >= q_k + Pbc/(zeta g2)
                need = q[k] + c.Pbc[k] / (c.zeta * c.g2)
                if p[j] < need:
                    if need <= c.p_cap[j]:
                        p[j] = min(need * (1.0 + 1e-12), c.p_cap[j])
                    else:
                        q[k] = c.p_cap[j] - c.Pbc[k] / (c.zeta * c.g2)
                        if q[k] < 0.0:
                            return None
                        p[j] = c.p_cap[j]
        for k in (0, 1):
            j = 1 - k
            if not c.active[k]:
                continue
            # C5a: p_k h_k^2 >= (q_j h_j^2 g^2 + sigma^2) gamma_th
            need_p = (q[j] * c.h2[j] * c.g2 + c.sig2) * c.gth[k] / c.h2[k]
            if p[k] < need_p:
                if need_p <= c.p_cap[k]:
                    p[k] = min(need_p * (1.0 + 1e-12), c.p_cap[k])
                else:
                    p[k] = c.p_cap[k]
                    q_max = (p[k] * c.h2[k] / c.gth[k] - c.sig2) / (c.h2[j] * c.g2)
                    if q_max < 0.0:
                        return None
                    q[j] = min(q[j], q_max * (1.0 - 1e-12))
    for k in (0, 1):
        gb[k] = min(max(gb[k], 0.0), max(0.0, _s8(c, k, p, q))) if c.active[k] else 0.0
        # C7 via f
        head = c.Ebud[k] - c.t[k] * (p[k] + c.Pac[k])
        if head < 0.0:
            return None
        f_cap = min(c.fmax[k], (head / (c.T * c.phi[k])) ** (1.0 / 3.0) * (1.0 - 1e-12))
        f[k] = min(f[k], f_cap)
        # C6b via f (raise local computing to cover any bit shortfall)
        shortfall = c.Rth[k] - _bits(c, k, q, f, gb)
        if shortfall > 0.0:
            f_need = f[k] + c.C[k] * (shortfall + 1e-6) / c.T
            if f_need > f_cap:
                return None
            f[k] = f_need
    return p, q, f, gb


def _seed_point(c: _Ctx):
    """A deliberately conservative starting point for the ascent."""
    p = []
    for k in (0, 1):
        j = 1 - k
        if not c.active[k]:
            p.append(0.0)
            continue
        pk = 2.0 * c.gth[k] * c.sig2 / c.h2[k]
        if c.bs[j]:
            pk = max(pk, 1.5 * c.Pbc[j] / (c.zeta * c.g2))
        p.append(min(pk, c.p_cap[k]))
    q = [0.0, 0.0]
    gb = [max(0.0, _s8(c, k, p, q)) if c.active[k] else 0.0 for k in (0, 1)]
    return _restore(c, p, q, [0.0, 0.0], gb)


def _golden_max(fun, lo, hi, iters=40):
    """Golden-section maximization of a unimodal function on [lo, hi]."""
    if hi <= lo:
        return lo, fun(lo)
    a, b = lo, hi
    c1 = b - INVPHI * (b - a)
    c2 = a + INVPHI * (b - a)
    f1, f2 = fun(c1), fun(c2)
    for _ in range(iters):
        if f1 >= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - INVPHI * (b - a)
            f1 = fun(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + INVPHI * (b - a)
            f2 = fun(c2)
    x = 0.5 * (a + b)
    return x, fun(x)


def _user_value(c: _Ctx, k: int, q, gold: int = 40):
    """Exact inner maximization over (p_k, f_k) at fixed backscatter powers.

    For fixed q the per-user shares of problem (13) decouple: the slack SINR
    is eliminated (gb_k = s8 at any optimum), the CPU frequency has a clamped
    stationary point, and the remaining 1-D problem in p_k is concave.
    Returns (value, p_k, f_k, gb_k) or None when infeasible.
    """
    j = 1 - k
    f_unc = (1.0 / math.sqrt(3.0 * c.C[k] * c.phi[k] * c.eta)
             if c.eta > 0.0 else c.fmax[k])
    rate_b = c.t[j] * c.B * math.log2(1.0 + q[k] * c.a[k])
    if not c.active[k]:
        f_cap = min(c.fmax[k], (c.Ebud[k] / (c.T * c.phi[k])) ** (1.0 / 3.0))
        f_lo = max(0.0, c.C[k] * (c.Rth[k] - rate_b) / c.T)
        if f_lo > f_cap * (1.0 + 1e-12):
            return None
        f = min(max(f_unc, f_lo), f_cap)
        val = rate_b + c.T * f / c.C[k] - c.eta * c.T * c.phi[k] * f ** 3
        return val, 0.0, f, 0.0, True
    y = c.y[k]
    interf = q[j] * c.h2[j] * c.g2 + c.sig2
    lo = c.gth[k] * interf / c.h2[k]                       # C5a
    lo = max(lo, (y * interf) ** 2 / (4.0 * c.h2[k]))      # s8 >= 0 (C8 with gb >= 0)
    if c.bs[j]:
        lo = max(lo, q[j] + c.Pbc[j] / (c.zeta * c.g2))    # partner's C1a/C4a
    hi = c.p_cap[k]
    if lo > hi * (1.0 + 1e-12):
        return None
    lo = min(lo, hi)

    def eval_p(p):
        s8 = 2.0 * y * math.sqrt(p * c.h2[k]) - y * y * interf
        rate = c.t[k] * c.B * math.log2(1.0 + max(s8, 0.0)) + rate_b
        head = c.Ebud[k] - c.t[k] * (p + c.Pac[k])
        if head < 0.0:
            return None
        f_cap = min(c.fmax[k], (head / (c.T * c.phi[k])) ** (1.0 / 3.0))
        f_need = c.C[k] * (c.Rth[k] - rate) / c.T  # unclamped bits shortfall
        f_lo = max(0.0, f_need)
        if f_lo > f_cap * (1.0 + 1e-12):
            return None
        f = min(max(f_unc, f_lo), f_cap)
        val = (rate + c.T * f / c.C[k]
               - c.eta * (c.t[k] * (p + c.Pac[k]) + c.T * c.phi[k] * f ** 3))
        # interior: no constraint that depends on the incoming interference is
        # active, so the envelope derivative w.r.t. the partner backscatter
        # power is the plain partial derivative.  A frequency pinned at zero
        # (f_max = 0) is p-independent too, provided the bits cut is slack.
        f_free = (f_lo < f_unc < f_cap
                  or (c.fmax[k] <= 0.0 and f_need < 0.0))
        interior = f_free and lo * (1.0 + 1e-9) < p < hi * (1.0 - 1e-9)
        return val, p, f, max(s8, 0.0), interior

    # fast path: the interior stationary point with an unclamped CPU
    # frequency solves (1 + s8)*sqrt(p) = B*y*h/(ln2*eta), a quadratic in
    # sqrt(p); when it is strictly inside the box and leaves f unclamped the
    # problem's concavity makes it the exact optimum
    amp = y * math.sqrt(c.h2[k])
    if c.eta > 0.0 and amp > 0.0:
        const = 1.0 - y * y * interf
        disc = const * const + 8.0 * amp * c.B * amp / (LN2 * c.eta)
        if disc >= 0.0:
            u = (-const + math.sqrt(disc)) / (4.0 * amp)
            if u > 0.0:
                p_stat = u * u
                if lo * (1.0 + 1e-12) < p_stat < hi * (1.0 - 1e-12):
                    r = eval_p(p_stat)
                    if r is not None and r[4]:
                        return r

    # the minimum-bits cut is monotone in p: bisect for the lowest feasible p
    if eval_p(lo) is None:
        if eval_p(hi) is None:
            return None
        a, b = lo, hi
        for _ in range(80):
            m = 0.5 * (a + b)
            if eval_p(m) is None:
                a = m
            else:
                b = m
        lo = b

    def vfun(p):
        r = eval_p(p)
        return -math.inf if r is None else r[0]

    p_star, _ = _golden_max(vfun, lo, hi, iters=gold)
    cands = [p_star, lo, hi]
    # closed-form interior stationary point when the CPU frequency is
    # unclamped: (1 + s8)*sqrt(p) = B*y*h/(ln2*eta) is quadratic in sqrt(p)
    if c.eta > 0.0:
        amp = y * math.sqrt(c.h2[k])
        if amp > 0.0:
            const = 1.0 - y * y * interf
            rhs = c.B * amp / (math.log(2.0) * c.eta)
            disc = const * const + 8.0 * amp * rhs
            if disc >= 0.0:
                u = (-const + math.sqrt(disc)) / (4.0 * amp)
                if u > 0.0:
                    cands.append(min(max(u * u, lo), hi))
    return max((r for r in (eval_p(x) for x in cands)
                if r is not None), key=lambda r: r[0])


def _qmax_k(c: _Ctx, k: int) -> float:
    """Largest backscatter power of user k admitting a feasible partner p."""
    if not c.bs[k]:
        return 0.0
    j = 1 - k
    m = c.p_cap[j] - c.Pbc[k] / (c.zeta * c.g2)
    if c.active[j]:
        m = min(m, (c.p_cap[j] * c.h2[j] / c.gth[j] - c.sig2)
                / (c.h2[k] * c.g2))
    return max(0.0, m)


def _polish_primal(c: _Ctx, q_init=None, refine=True):
    """Exact primal refinement: concave 2-D search over the backscatter
    powers with per-user inner solves.  Returns (objective, p, q, f, gb) or
    None when no feasible point exists."""
    qmax = (_qmax_k(c, 0), _qmax_k(c, 1))
    # full precision is only needed when the point feeds multiplier recovery;
    # for objective-only use the value flatness tolerates a coarser search
    gold_in, gold_out, rounds = (40, 40, 10) if refine else (26, 26, 5)

    def evaluate(q):
        tot = 0.0
        parts = []
        for k in (0, 1):
            r = _user_value(c, k, q, gold=gold_in)
            if r is None:
                return -math.inf, None
            tot += r[0]
            parts.append(r)
        return tot, parts

    cands = [[0.0, 0.0]]
    if q_init is not None:
        cands.append([min(max(q_init[0], 0.0), qmax[0]),
                      min(max(q_init[1], 0.0), qmax[1])])
    for fr in (1e-4, 1e-2, 0.3):
        cands.append([fr * qmax[0], fr * qmax[1]])
    best_q, best_val = None, -math.inf
    for qc in cands:
        v, _ = evaluate(qc)
        if v > best_val:
            best_val, best_q = v, list(qc)
    if best_q is None or not math.isfinite(best_val):
        if best_q is None:
            return None
    q = best_q
    # axis + diagonal line searches cover the 2-D concave landscape
    dirs = ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0))
    for _ in range(rounds):
        improved = False
        for d in dirs:
            s_lo, s_hi = -math.inf, math.inf
            for k in (0, 1):
                if d[k] > 0.0:
                    s_lo = max(s_lo, -q[k] / d[k])
                    s_hi = min(s_hi, (qmax[k] - q[k]) / d[k])
                elif d[k] < 0.0:
                    s_lo = max(s_lo, (qmax[k] - q[k]) / d[k])
                    s_hi = min(s_hi, -q[k] / d[k])
            if s_hi <= s_lo:
                continue
            s_star, v = _golden_max(
                lambda s: evaluate([q[0] + s * d[0], q[1] + s * d[1]])[0],
                s_lo, s_hi, iters=gold_out)
            if v > best_val + 1e-12 * max(1.0, abs(best_val)):
                best_val = v
                q = [min(max(q[0] + s_star * d[0], 0.0), qmax[0]),
                     min(max(q[1] + s_star * d[1], 0.0), qmax[1])]
                improved = True
        if not improved:
            break

    # derivative refinement: line searches leave the interior coordinates a
    # few 1e-4 off stationarity (value flatness).  The envelope derivative of
    # the total value w.r.t. q_k is (t_j*B/ln2) * [a_k/(1+q_k a_k)
    # - y_j^2 h_k^2 g^2/(1+s8_j)]: the own backscatter-rate gain minus the
    # interference loss at the partner's inner optimum.  Bisecting its sign is
    # noise-free and drives the KKT residual to machine precision.
    def dq(k, x):
        j = 1 - k
        qa = list(q)
        qa[k] = x
        rj = _user_value(c, j, qa)
        if rj is None:
            return None
        if rj[4]:
            # partner optimum strictly interior: the envelope derivative is
            # the plain partial derivative, evaluated noise-free
            g = c.a[k] / (1.0 + x * c.a[k])
            if c.active[j]:
                g -= c.y[j] ** 2 * c.h2[k] * c.g2 / (1.0 + rj[3])
            return g
        # otherwise fall back to a central difference of the total value with
        # a step large enough to clear double-precision noise on the
        # ~1e6-bit objective
        h = max(1e-3 * x, 1e-10 * qmax[k], 1e-15)
        h = min(h, 0.5 * max(qmax[k] - x, 1e-300))
        qa[k] = min(x + h, qmax[k])
        va = evaluate(qa)[0]
        hi_x = qa[k]
        qa[k] = max(x - h, 0.0)
        vb = evaluate(qa)[0]
        if not (math.isfinite(va) and math.isfinite(vb)) or hi_x <= qa[k]:
            return None
        return (va - vb) / (hi_x - qa[k])

    for _ in range(3 if refine else 0):
        moved = False
        for k in (0, 1):
            if qmax[k] <= 0.0 or not (0.0 < q[k] < qmax[k] * (1.0 - 1e-9)):
                continue
            g_here = dq(k, q[k])
            if g_here is None:
                continue
            # bracket the sign change by geometric expansion away from q[k];
            # the far boundary may be infeasible for the partner, so expand
            # only through valid evaluations
            a = b = q[k]
            found = False
            x = q[k]
            if g_here > 0.0:
                while x < qmax[k]:
                    x = min(4.0 * x, qmax[k])
                    gx = dq(k, x)
                    if gx is None:
                        break
                    if gx <= 0.0:
                        b, found = x, True
                        break
                    a = x
            else:
                while x > qmax[k] * 1e-18:
                    x *= 0.25
                    gx = dq(k, x)
                    if gx is None:
                        break
                    if gx >= 0.0:
                        a, found = x, True
                        break
                    b = x
            if not found:
                continue  # no sign change in the valid range: boundary optimum
            for _ in range(100):
                m = 0.5 * (a + b)
                gm = dq(k, m)
                if gm is None or gm > 0.0:
                    a = m
                else:
                    b = m
                if b - a <= 1e-15 * b:
                    break
            cand = list(q)
            cand[k] = 0.5 * (a + b)
            v_cand = evaluate(cand)[0]
            if v_cand >= best_val - 1e-9 * max(1.0, abs(best_val)):
                q = cand
                best_val = max(best_val, v_cand)
                moved = True
        if not moved:
            break

    val, parts = evaluate(q)
    if parts is None:
        return None
    return (val, [parts[0][1], parts[1][1]], q,
            [parts[0][2], parts[1][2]], [parts[0][3], parts[1][3]])


_DUAL_NAMES = ("psi", "mu", "eps", "lam", "omega", "chi", "kappa")


def _recover_duals(c: _Ctx, p, q, f, gb, tol=1e-6):
    """Least-squares KKT multiplier recovery at a primal optimum.

    The Lagrangian stationarity system is linear in the multipliers; with the
    inactive constraints' multipliers pinned at zero it is solved by
    nonnegative least squares.  Returns (DualMultipliers, relative residual).
    """
    cols = []   # (name, k, scale)
    col_id = {}

    def col(name, k):
        key = (name, k)
        if key not in col_id:
            col_id[key] = len(cols)
            cols.append(key)
        return col_id[key]

    # activity detection (scaled residuals of the <=-form constraints)
    active_mult = set()
    for k in (0, 1):
        j = 1 - k
        if c.bs[k]:
            if p[j] - q[k] <= tol * max(c.p_cap[j], 1e-9):
                active_mult.add(("psi", k))
            if (c.zeta * (p[j] - q[k]) * c.g2 - c.Pbc[k]
                    <= tol * max(c.Pbc[k], 1e-12)):
                active_mult.add(("eps", k))
        if f[k] >= c.fmax[k] * (1.0 - tol) and c.fmax[k] > 0.0:
            active_mult.add(("mu", k))
        if c.active[k]:
            if (p[k] * c.h2[k] - (q[j] * c.h2[j] * c.g2 + c.sig2) * c.gth[k]
                    <= tol * c.sig2 * c.gth[k]):
                active_mult.add(("lam", k))
            active_mult.add(("kappa", k))   # gb sits on the surrogate bound
        if _bits(c, k, q, f, gb) - c.Rth[k] <= tol * max(c.Rth[k], c.B * c.T):
            active_mult.add(("omega", k))
        if c.Ebud[k] - _energy(c, k, p, f) <= tol * c.Ebud[k]:
            active_mult.add(("chi", k))

    rows = []
    rhs = []
    scales = []

    def add_row(coeffs, b, scale):
        rows.append(coeffs)
        rhs.append(b)
        scales.append(max(scale, 1e-300))

    for k in (0, 1):
        j = 1 - k
        # d/dp_k (interior points only)
        if c.active[k] and 1e-300 < p[k] < c.p_cap[k] * (1.0 - 1e-9):
            co = {}
            if ("psi", j) in active_mult:
                co[("psi", j)] = 1.0
            if ("eps", j) in active_mult:
                co[("eps", j)] = c.t[k] * c.zeta * c.g2
            if ("lam", k) in active_mult:
                co[("lam", k)] = c.h2[k]
            co[("kappa", k)] = c.y[k] * math.sqrt(c.h2[k] / p[k])
            if ("chi", k) in active_mult:
                co[("chi", k)] = -c.t[k]
            add_row(co, c.eta * c.t[k], c.eta * c.t[k])
        # d/dq_k (q interior: q > 0; the q <= p_j face carries psi)
        if c.bs[k] and q[k] > 0.0:
            gq = c.t[j] * c.B * c.a[k] / (LN2 * (1.0 + q[k] * c.a[k]))
            co = {}
            if ("omega", k) in active_mult:
                co[("omega", k)] = gq
            if ("psi", k) in active_mult:
                co[("psi", k)] = -1.0
            if ("eps", k) in active_mult:
                co[("eps", k)] = -c.t[j] * c.zeta * c.g2
            if ("lam", j) in active_mult:
                co[("lam", j)] = -c.gth[j] * c.h2[k] * c.g2
            if ("kappa", j) in active_mult:
                co[("kappa", j)] = -c.y[j] ** 2 * c.h2[k] * c.g2
            add_row(co, -gq, gq)
        # d/df_k
        if 0.0 < f[k] < c.fmax[k] * (1.0 - 1e-9):
            co = {}
            if ("omega", k) in active_mult:
                co[("omega", k)] = c.T / c.C[k]
            if ("mu", k) in active_mult:
                co[("mu", k)] = -1.0
            if ("chi", k) in active_mult:
                co[("chi", k)] = -3.0 * c.T * c.phi[k] * f[k] ** 2
            add_row(co, 3.0 * c.eta * c.T * c.phi[k] * f[k] ** 2 - c.T / c.C[k],
                    c.T / c.C[k])
        # d/dgb_k
        if c.active[k] and gb[k] > 0.0:
            gg = c.t[k] * c.B / (LN2 * (1.0 + gb[k]))
            co = {}
            if ("omega", k) in active_mult:
                co[("omega", k)] = gg
            co[("kappa", k)] = -1.0
            add_row(co, -gg, gg)

    if not rows:
        return DualMultipliers(), 0.0
    for co in rows:
        for key in co:
            col(*key)
    a_mat = np.zeros((len(rows), len(cols)))
    b_vec = np.array(rhs)
    for i, co in enumerate(rows):
        for key, v in co.items():
            a_mat[i, col_id[key]] = v
    # each row is normalized by the magnitude of its dominant stationarity
    # term, so residuals are comparable across the mixed physical units
    row_scale = np.array(scales)
    a_s = a_mat / row_scale[:, None]
    b_s = b_vec / row_scale
    col_scale = np.abs(a_s).max(axis=0)
    col_scale = np.where(col_scale > 0.0, col_scale, 1.0)
    try:
        theta_s, _ = nnls(a_s / col_scale, b_s)
    except RuntimeError:
        return None, math.inf
    theta = theta_s / col_scale
    rel = float(np.max(np.abs(a_s @ theta - b_s)))  # worst per-coordinate residual
    vals = {name: [0.0, 0.0] for name in _DUAL_NAMES}
    for (name, k), idx in col_id.items():
        vals[name][k] = float(theta[idx])
    duals = DualMultipliers(
        psi=tuple(vals["psi"]), mu=tuple(vals["mu"]), eps=tuple(vals["eps"]),
        lam=tuple(vals["lam"]), omega=tuple(vals["omega"]),
        chi=tuple(vals["chi"]), kappa=tuple(vals["kappa"]))
    return duals, rel


def lagrangian_value(inp: SubproblemAInput, duals: DualMultipliers,
                     p, q, f, gb) -> float:
    """Full Lagrangian of subproblem A at a primal/dual point."""
    c = _Ctx(inp)
    val = _objective(c, p, q, f, gb)
    for k in (0, 1):
        j = 1 - k
        val += duals.psi[k] * (p[j] - q[k])
        val += duals.mu[k] * (c.fmax[k] - f[k])
        val += duals.eps[k] * c.t[j] * (c.zeta * (p[j] - q[k]) * c.g2 - c.Pbc[k])
        val += duals.chi[k] * (c.Ebud[k] - _energy(c, k, p, f))
        val += duals.lam[k] * (p[k] * c.h2[k]
                               - (q[j] * c.h2[j] * c.g2 + c.sig2) * c.gth[k])
        val += duals.omega[k] * (_bits(c, k, q, f, gb) - c.Rth[k])
        val += duals.kappa[k] * (_s8(c, k, p, q) - gb[k])
    return val


def lagrangian_grad(inp: SubproblemAInput, duals: DualMultipliers,
                    p, q, f, gb):
    """Analytic gradient of the Lagrangian w.r.t. (p, q, f, gamma_bar)."""
    c = _Ctx(inp)
    gp, gq, gf, gg = [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]
    for k in (0, 1):
        j = 1 - k
        gp[k] = (-(c.eta + duals.chi[k]) * c.t[k]
                 + duals.lam[k] * c.h2[k]
                 + duals.psi[j]
                 + duals.eps[j] * c.t[k] * c.zeta * c.g2)
        if p[k] > 0.0:
            gp[k] += duals.kappa[k] * c.y[k] * math.sqrt(c.h2[k] / p[k])
        gq[k] = ((1.0 + duals.omega[k]) * c.t[j] * c.B * c.a[k]
                 / (LN2 * (1.0 + q[k] * c.a[k]))
                 - duals.psi[k]
                 - duals.eps[k] * c.t[j] * c.zeta * c.g2
                 - (duals.lam[j] * c.gth[j] + duals.kappa[j] * c.y[j] ** 2)
                 * c.h2[k] * c.g2)
        gf[k] = ((1.0 + duals.omega[k]) * c.T / c.C[k]
                 - duals.mu[k]
                 - 3.0 * (c.eta + duals.chi[k]) * c.T * c.phi[k] * f[k] ** 2)
        gg[k] = ((1.0 + duals.omega[k]) * c.t[k] * c.B / (LN2 * (1.0 + gb[k]))
                 - duals.kappa[k])
    return gp, gq, gf, gg


# ---------------------------------------------------------------------------
# dual subgradient ascent


def solve_subproblem_a(inp: SubproblemAInput, cfg: DualAscentConfig | None = None,
                       warm_duals: DualMultipliers | None = None,
                       warm_primal=None, want_duals: bool = True) -> SubproblemASolution:
    """Exact decomposed primal solve with KKT multiplier recovery, falling
    back to dual subgradient ascent when the stationarity system is not
    consistently solvable at the refined point.

    Returns the best restored-feasible primal found, the final multipliers and
    a dual-gap estimate.  `warm_primal` may supply a known-feasible
    (p, q, f, gamma_bar) used as the fallback incumbent.  `want_duals=False`
    skips the stationarity refinement and multiplier recovery (the returned
    primal is unchanged at the reported tolerance; duals/gap are then
    placeholders) — used in the inner alternating loop where only the primal
    matters.
    """
    cfg = cfg or DualAscentConfig()
    c = _Ctx(inp)
    warnings = []

    # incumbent: best feasible point seen
    best = None  # (objective, p, q, f, gb)
    if warm_primal is not None:
        restored = _restore(c, *warm_primal)
        if restored is not None:
            best = (_objective(c, *restored), *restored)
    seed = _seed_point(c)
    if seed is not None:
        obj = _objective(c, *seed)
        if best is None or obj > best[0]:
            best = (obj, *seed)
    if best is None and seed is None and warm_primal is None:
        pass  # pure dual run; restoration during the loop may still succeed

    # scales used to normalize residuals / multipliers (objective is in bits)
    obj_scale = max(1.0, c.B * c.T)
    p_scale = tuple(max(c.p_cap[k], 1e-6) for k in (0, 1))
    res_scale = {
        "psi": [max(p_scale[1 - k], 1e-9) for k in (0, 1)],
        "mu": [max(c.fmax[k], 1.0) for k in (0, 1)],
        "eps": [max(c.t[1 - k] * c.zeta * c.g2 * p_scale[1 - k], 1e-12) for k in (0, 1)],
        "lam": [max(c.h2[k] * p_scale[k], c.sig2 * c.gth[k]) for k in (0, 1)],
        "omega": [max(c.Rth[k], c.B * c.T) for k in (0, 1)],
        "chi": [c.Ebud[k] for k in (0, 1)],
        "kap": [max(1.0, 2.0 * c.y[k] * math.sqrt(p_scale[k] * c.h2[k])) for k in (0, 1)],
    }

    # multiplier state (plain lists for speed)
    if warm_duals is not None:
        psi = list(warm_duals.psi)
        mu = list(warm_duals.mu)
        eps = list(warm_duals.eps)
        lam = list(warm_duals.lam)
        om = list(warm_duals.omega)
        chi = list(warm_duals.chi)
        kap = list(warm_duals.kappa)
    else:
        psi, mu, eps, lam = [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]
        om, chi = [0.0, 0.0], [0.0, 0.0]
        kap = [0.0, 0.0]
    for k in (0, 1):
        if c.active[k] and kap[k] <= 0.0:
            gb0 = best[4][k] if best is not None else 0.0
            kap[k] = c.t[k] * c.B / (LN2 * (1.0 + gb0))

    gb_cap = tuple(2.0 * c.y[k] * math.sqrt(c.p_cap[k] * c.h2[k]) for k in (0, 1))
    kap_floor = tuple(1e-12 * c.t[k] * c.B if c.active[k] else 0.0 for k in (0, 1))

    def primal_at(psi, mu, eps, lam, om, chi, kap):
        """Closed-form maximizer of L (Eqs. 15-18 with caps) at a dual point."""
        p = [0.0, 0.0]
        q = [0.0, 0.0]
        f = [0.0, 0.0]
        gb = [0.0, 0.0]
        for k in (0, 1):
            if not c.active[k]:
                continue
            j = 1 - k
            denom = ((c.eta + chi[k]) * c.t[k] - lam[k] * c.h2[k]
                     - psi[j] - eps[j] * c.t[k] * c.zeta * c.g2)
            if denom <= 0.0:
                p[k] = c.p_cap[k]
            else:
                p[k] = min((c.y[k] * math.sqrt(c.h2[k]) * kap[k] / denom) ** 2,
                           c.p_cap[k])
        for k in (0, 1):
            if not c.bs[k]:
                continue
            j = 1 - k
            denom = (eps[k] * c.t[j] * c.zeta * c.g2 + psi[k]
                     + (lam[j] * c.gth[j] + kap[j] * c.y[j] ** 2) * c.h2[k] * c.g2)
            if denom <= 0.0:
                q[k] = p[j]
            else:
                raw = (c.t[j] * c.B * (1.0 + om[k]) / (LN2 * denom)
                       - c.sig2 / (c.h2[k] * c.g2))
                q[k] = min(max(raw, 0.0), p[j])
        for k in (0, 1):
            num = max(0.0, (1.0 + om[k]) * c.T / c.C[k] - mu[k])
            f[k] = min(math.sqrt(num / (3.0 * c.T * c.phi[k] * (c.eta + chi[k]))),
                       c.fmax[k])
            if c.active[k]:
                gb[k] = min(max(0.0, c.t[k] * c.B * (1.0 + om[k])
                                / (LN2 * max(kap[k], kap_floor[k])) - 1.0),
                            gb_cap[k])
        return p, q, f, gb

    # exact primal refinement first: the decomposed solver normally lands on
    # the optimum directly and the stationarity system then yields the
    # multipliers, so the subgradient loop is only a fallback
    polished = _polish_primal(c, q_init=(best[2] if best is not None else None),
                              refine=want_duals)
    if polished is not None:
        _, pp, qq, ff, gbb = polished
        rest = _restore(c, pp, qq, ff, gbb)
        if rest is not None:
            obj = _objective(c, *rest)
            if best is None or obj > best[0]:
                best = (obj, *rest)
    recovered, rel = (None, math.inf)
    if want_duals and best is not None:
        recovered, rel = _recover_duals(c, best[1], best[2], best[3], best[4])
    need_ascent = want_duals and (recovered is None or rel > 5e-5)
    if not want_duals and best is None:
        need_ascent = True  # infeasible-looking instance: let the ascent try

    p = [0.0, 0.0]
    q = [0.0, 0.0]
    f = [0.0, 0.0]
    gb = [0.0, 0.0]
    dual_value = math.inf
    stall = 0
    n_done = 0
    for n in range(1, cfg.max_iters + 1 if need_ascent else 0):
        n_done = n
        p, q, f, gb = primal_at(psi, mu, eps, lam, om, chi, kap)

        # --- dual subgradient step (normalized coordinates, s0 / sqrt(n))
        step = cfg.step0 / math.sqrt(n)
        max_cs = 0.0
        for k in (0, 1):
            j = 1 - k
            if c.bs[k]:
                s = p[j] - q[k]
                max_cs = max(max_cs, abs(psi[k] * s) / obj_scale)
                m_scale = obj_scale / res_scale["psi"][k]
                psi[k] = max(0.0, psi[k] - step * (s / res_scale["psi"][k]) * m_scale)
                s = c.t[j] * (c.zeta * (p[j] - q[k]) * c.g2 - c.Pbc[k])
                max_cs = max(max_cs, abs(eps[k] * s) / obj_scale)
                m_scale = obj_scale / res_scale["eps"][k]
                eps[k] = max(0.0, eps[k] - step * (s / res_scale["eps"][k]) * m_scale)
            else:
                psi[k] = 0.0
                eps[k] = 0.0
            s = c.fmax[k] - f[k]
            m_scale = obj_scale / res_scale["mu"][k]
            max_cs = max(max_cs, abs(mu[k] * s) / obj_scale)
            mu[k] = max(0.0, mu[k] - step * (s / res_scale["mu"][k]) * m_scale)
            if c.active[k]:
                s = p[k] * c.h2[k] - (q[j] * c.h2[j] * c.g2 + c.sig2) * c.gth[k]
                m_scale = obj_scale / res_scale["lam"][k]
                max_cs = max(max_cs, abs(lam[k] * s) / obj_scale)
                lam[k] = max(0.0, lam[k] - step * (s / res_scale["lam"][k]) * m_scale)
                s = _s8(c, k, p, q) - gb[k]
                m_scale = obj_scale / res_scale["kap"][k]
                max_cs = max(max_cs, abs(kap[k] * s) / obj_scale)
                kap[k] = max(kap_floor[k],
                             kap[k] - step * (s / res_scale["kap"][k]) * m_scale)
            else:
                lam[k] = 0.0
                kap[k] = 0.0
            s = _bits(c, k, q, f, gb) - c.Rth[k]
            m_scale = obj_scale / res_scale["omega"][k]
            max_cs = max(max_cs, abs(om[k] * s) / obj_scale)
            om[k] = max(0.0, om[k] - step * (s / res_scale["omega"][k]) * m_scale)
            s = c.Ebud[k] - _energy(c, k, p, f)
            m_scale = obj_scale / res_scale["chi"][k]
            max_cs = max(max_cs, abs(chi[k] * s) / obj_scale)
            chi[k] = max(0.0, chi[k] - step * (s / res_scale["chi"][k]) * m_scale)

        # --- incumbent update + stopping
        if n <= 100 or n % 5 == 0:
            restored = _restore(c, p, q, f, gb)
            if restored is not None:
                obj = _objective(c, *restored)
                if best is None or obj > best[0] * (1.0 + 1e-12) + 1e-15:
                    best = (obj, *restored)
                    stall = 0
                else:
                    stall += 1
        if n % cfg.check_every == 0:
            duals_now = DualMultipliers(
                psi=tuple(psi), mu=tuple(mu), eps=tuple(eps), lam=tuple(lam),
                omega=tuple(om), chi=tuple(chi), kappa=tuple(kap))
            dual_value = lagrangian_value(inp, duals_now, p, q, f, gb)
            if best is not None:
                gap = dual_value - best[0]
                if (max_cs < cfg.tol
                        and gap <= cfg.tol * max(1.0, abs(best[0]))):
                    break
                if stall > 400 / 5 and gap <= 1e-3 * max(1.0, abs(best[0])):
                    break

    if need_ascent:
        # refine again from the ascent incumbent's backscatter point
        polished = _polish_primal(c, q_init=(best[2] if best is not None else None))
        if polished is not None:
            _, pp, qq, ff, gbb = polished
            rest = _restore(c, pp, qq, ff, gbb)
            if rest is not None:
                obj = _objective(c, *rest)
                if best is None or obj > best[0]:
                    best = (obj, *rest)

    duals_out = DualMultipliers(
        psi=tuple(psi), mu=tuple(mu), eps=tuple(eps), lam=tuple(lam),
        omega=tuple(om), chi=tuple(chi), kappa=tuple(kap))
    if best is None:
        return SubproblemASolution(
            p=(0.0, 0.0), q=(0.0, 0.0), f=(0.0, 0.0), gamma_bar=(0.0, 0.0),
            duals=duals_out, objective=-math.inf, dual_gap=math.inf,
            feasible=False, iterations=n_done,
            warnings=("no feasible point found",))

    # KKT multiplier recovery at the refined primal; fall back to the ascent's
    # multipliers when the stationarity system is not consistently solvable
    if need_ascent:
        recovered, rel = _recover_duals(c, best[1], best[2], best[3], best[4])
    if recovered is not None and rel <= 5e-5:
        duals_out = recovered
        p_d, q_d, f_d, gb_d = primal_at(
            list(recovered.psi), list(recovered.mu), list(recovered.eps),
            list(recovered.lam), list(recovered.omega), list(recovered.chi),
            [max(recovered.kappa[k], kap_floor[k]) for k in (0, 1)])
        dual_value = lagrangian_value(inp, duals_out, p_d, q_d, f_d, gb_d)
    elif not want_duals:
        dual_value = math.inf  # not computed in primal-only mode
    else:
        warnings.append(f"multiplier recovery residual {rel:.2e}; "
                        "reporting ascent multipliers")
        dual_value = lagrangian_value(inp, duals_out, p, q, f, gb)
    gap = dual_value - best[0]
    if n_done >= cfg.max_iters:
        warnings.append("dual ascent hit max_iters; returning best feasible point")
    return SubproblemASolution(
        p=tuple(best[1]), q=tuple(best[2]), f=tuple(best[3]),
        gamma_bar=tuple(best[4]), duals=duals_out, objective=best[0],
        dual_gap=gap, feasible=True, iterations=n_done,
        warnings=tuple(warnings))


# ---------------------------------------------------------------------------
# subproblem B: slot-time LP by vertex enumeration


def backscatter_power_check(sys: SystemParams, ch: ChannelRealization,
                            p: tuple[float, float], q: tuple[float, float]) -> tuple[float, float]:
    """Zero out any backscatter power whose harvested energy cannot cover the
    circuit draw (the harvesting constraint is slot-time-free)."""
    out = list(q)
    for k in (0, 1):
        j = 1 - k
        # small relative tolerance: points sitting exactly on the constraint
        # boundary must not be zeroed by floating-point cancellation
        if out[k] > 0.0 and (sys.eh_coeff * (p[j] - out[k]) * ch.gain_interuser
                             < sys.users[k].circuit_power_backscatter
                             * (1.0 - 1e-9)):
            out[k] = 0.0
    return (out[0], out[1])


def solve_subproblem_b(sys: SystemParams, ch: ChannelRealization,
                       p: tuple[float, float], q: tuple[float, float],
                       f: tuple[float, float], gamma_bar: tuple[float, float],
                       eta: float) -> tuple[float, float]:
    """Optimal slot times over the 2-D polygon {t >= 0, t_1 + t_2 <= T,
    per-user minimum-bits lower bounds, per-user energy upper bounds},
    certified by full vertex enumeration.

    Tie-break among optimal points: maximize min(t_1, t_2); exact symmetric
    degeneracy lands on T/2 each.
    """
    T, B = sys.frame_time, sys.bandwidth
    sig2 = sys.noise_power
    g2 = ch.gain_interuser
    # per-slot rate/energy coefficients (slot k hosts user k active + partner backscatter)
    r_act = [B * math.log2(1.0 + gamma_bar[k]) for k in (0, 1)]
    r_bs = [B * math.log2(1.0 + q[k] * ch.gain_user_ap[k] * g2 / sig2) for k in (0, 1)]
    cost = [eta * (p[k] + sys.users[k].circuit_power_active) for k in (0, 1)]
    # objective coefficient of t_k: active user k + backscatter of partner j
    coeff = [r_act[k] + r_bs[1 - k] - cost[k] for k in (0, 1)]

    # constraint rows a1*t1 + a2*t2 <= b
    rows = [(-1.0, 0.0, 0.0), (0.0, -1.0, 0.0), (1.0, 1.0, T)]
    for k in (0, 1):
        u = sys.users[k]
        e_local = T * u.capacitance_coeff * f[k] ** 3
        if e_local > u.energy_budget:
            raise InfeasibleError(f"local-computing energy exceeds budget for user {k}")
        cap = (u.energy_budget - e_local) / (p[k] + u.circuit_power_active)
        rows.append((1.0, 0.0, cap) if k == 0 else (0.0, 1.0, cap))
        # minimum bits: r_act_k t_k + r_bs_k t_j >= Rth - T f/C
        need = u.min_bits - T * f[k] / u.cpu_cycles_per_bit
        a = [0.0, 0.0]
        a[k] = -r_act[k]
        a[1 - k] = -r_bs[k]
        rows.append((a[0], a[1], -need))

    def feasible(t1, t2):
        tol = 1e-9 * max(1.0, T)
        for a1, a2, b in rows:
            scale = max(1.0, abs(a1) + abs(a2), abs(b))
            if a1 * t1 + a2 * t2 - b > tol * scale:
                return False
        return True

    vertices = []
    n = len(rows)
    for i in range(n):
        for jj in range(i + 1, n):
            a1, a2, b1 = rows[i]
            c1, c2, b2 = rows[jj]
            det = a1 * c2 - a2 * c1
            if abs(det) < 1e-14 * max(1.0, abs(a1) + abs(a2)) * max(1.0, abs(c1) + abs(c2)):
                continue
            t1 = (b1 * c2 - b2 * a2) / det
            t2 = (a1 * b2 - c1 * b1) / det
            if feasible(t1, t2):
                vertices.append((max(t1, 0.0), max(t2, 0.0)))
    if not vertices:
        raise InfeasibleError("slot-time polygon is empty")

    obj = [coeff[0] * v[0] + coeff[1] * v[1] for v in vertices]
    best_val = max(obj)
    tol = 1e-12 * max(1.0, abs(best_val))
    opt = [v for v, o in zip(vertices, obj) if o >= best_val - tol]
    # candidate optimal points: optimal vertices plus crossings of optimal
    # segments with the t1 = t2 diagonal
    cands = list(opt)
    for i in range(len(opt)):
        for jj in range(i + 1, len(opt)):
            (x1, y1), (x2, y2) = opt[i], opt[jj]
            d1, d2 = x1 - y1, x2 - y2
            if d1 * d2 < 0.0:
                lam_x = d1 / (d1 - d2)
                cands.append((x1 + lam_x * (x2 - x1), y1 + lam_x * (y2 - y1)))
    cands.sort(key=lambda v: (-min(v[0], v[1]), v[0], v[1]))
    return cands[0]
