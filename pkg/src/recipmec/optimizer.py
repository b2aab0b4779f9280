"""Full solver orchestration: initialization, scheme restrictions, and the
alternating loop nested inside the ratio-parameter outer loop."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .channel import ChannelRealization
from .model import (TIME_EPS, ConstraintReport, Decision, Metrics,
                    check_constraints, compute_metrics)
from .params import SystemParams
from .subproblems import (DualAscentConfig, DualMultipliers, InfeasibleError,
                          SubproblemAInput, _Ctx, _golden_max, _objective,
                          _restore, _s8, backscatter_power_check,
                          recover_alpha, solve_subproblem_a,
                          solve_subproblem_b)
from .transforms import dinkelbach_solve

FEAS_TOL = 1e-9


class Scheme(enum.Enum):
    PROPOSED = "proposed"
    FULL_OFFLOADING = "full_offloading"
    FULL_LOCAL = "full_local"
    NON_RECIPROCAL = "non_reciprocal"


@dataclass(frozen=True)
class SchemeRestriction:
    fix_f_zero: bool
    backscatter_allowed: bool
    local_only: bool


def apply_scheme(scheme: Scheme) -> SchemeRestriction:
    if scheme is Scheme.PROPOSED:
        return SchemeRestriction(False, True, False)
    if scheme is Scheme.FULL_OFFLOADING:
        return SchemeRestriction(True, True, False)
    if scheme is Scheme.FULL_LOCAL:
        return SchemeRestriction(False, False, True)
    if scheme is Scheme.NON_RECIPROCAL:
        return SchemeRestriction(False, False, False)
    raise ValueError(f"unknown scheme {scheme}")


@dataclass
class SolveReport:
    scheme: Scheme
    feasible: bool
    decision: Decision | None = None
    metrics: Metrics | None = None
    eta: float = math.nan
    constraints: ConstraintReport | None = None
    outer_iterations: int = 0
    inner_iterations: list = field(default_factory=list)  # per outer iteration
    trace: list = field(default_factory=list)  # inner objective per block step
    eta_trace: list = field(default_factory=list)  # ratio parameter per outer
    #: problem-(12)-objective trace of the alternating loop, kept even when a
    #: direct configuration solve supplies the final point (diagnostic); three
    #: entries per inner iteration (start, after subproblem A, after slot LP),
    #: segmented per outer iteration by block_inner_iterations
    block_trace: list = field(default_factory=list)
    block_inner_iterations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


@dataclass
class SolverTolerances:
    outer_tol: float = 1e-6
    inner_tol: float = 1e-6
    max_outer: int = 50
    max_inner: int = 100
    dual: DualAscentConfig = field(default_factory=DualAscentConfig)


# ---------------------------------------------------------------------------
# initialization


def _c5_alpha_cap(p: list, ch: ChannelRealization, sys: SystemParams, k: int) -> float:
    """Largest partner reflection coefficient keeping user k's SINR at threshold."""
    j = 1 - k
    gth = sys.users[k].sinr_threshold
    num = p[k] * ch.gain_user_ap[k] / gth - sys.noise_power
    den = p[k] * ch.gain_user_ap[j] * ch.gain_interuser
    if den <= 0.0:
        return 1.0
    return num / den


def initialize_feasible(sys: SystemParams, ch: ChannelRealization,
                        scheme: Scheme,
                        restrict: SchemeRestriction | None = None) -> Decision | None:
    """Construct a point satisfying C1-C7, or None if the bounded search fails."""
    restrict = restrict or apply_scheme(scheme)
    T = sys.frame_time

    if restrict.local_only:
        freqs, ok = [], True
        for u in sys.users:
            if u.min_bits <= 0.0:
                freqs.append(0.0)
                continue
            fk = u.cpu_cycles_per_bit * u.min_bits / T
            if fk > u.f_max or T * u.capacitance_coeff * fk ** 3 > u.energy_budget:
                ok = False
            freqs.append(fk)
        if not ok:
            return None
        return Decision((0.0, 0.0), (0.0, 0.0), (0.0, 0.0), tuple(freqs))

    t = (T / 2.0, T / 2.0)

    def build(scale: float) -> Decision:
        p = [scale * 2.0 * sys.users[k].sinr_threshold * sys.noise_power
             / ch.gain_user_ap[k] for k in (0, 1)]
        p = [min(p[k], max(0.0, sys.users[k].energy_budget / t[k]
                           - sys.users[k].circuit_power_active)) for k in (0, 1)]
        alpha = [0.0, 0.0]
        if restrict.backscatter_allowed:
            for k in (0, 1):
                j = 1 - k
                ak = 1.0 - sys.users[k].circuit_power_backscatter / (
                    sys.eh_coeff * p[j] * ch.gain_interuser) if p[j] > 0 else -1.0
                ak = min(0.5, ak, _c5_alpha_cap(p, ch, sys, j))
                alpha[k] = min(max(ak, 0.0), 1.0 - 1e-12)
        f = []
        for k in (0, 1):
            u = sys.users[k]
            if restrict.fix_f_zero:
                f.append(0.0)
                continue
            dec_probe = Decision(tuple(p), t, tuple(alpha), (0.0, 0.0))
            m = compute_metrics(dec_probe, ch, sys)
            offloaded = m.active_bits[k] + m.backscatter_bits[k]
            fk = u.cpu_cycles_per_bit * max(0.0, u.min_bits - offloaded) / T
            if fk > 0.0:
                fk *= 1.0 + 1e-9
            head = u.energy_budget - t[k] * (p[k] + u.circuit_power_active)
            f_bud = (max(0.0, head) / (T * u.capacitance_coeff)) ** (1.0 / 3.0)
            f.append(min(fk, u.f_max, f_bud))
        return Decision(tuple(p), t, tuple(alpha), tuple(f))

    for scale in (1.0, 0.5, 2.0, 8.0, 32.0, 128.0, 512.0):
        dec = build(scale)
        if check_constraints(dec, ch, sys).all_satisfied(FEAS_TOL):
            return dec

    # bisection on the power/frequency scaling toward feasibility
    lo, hi = 0.5, 1.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        dec = build(mid)
        rep = check_constraints(dec, ch, sys)
        if rep.all_satisfied(FEAS_TOL):
            return dec
        # energy-side violations shrink the scale, rate-side ones grow it
        if max(rep.c7_energy[0].residual, rep.c7_energy[1].residual) > 0:
            hi = mid
        else:
            lo = mid
    if restrict.backscatter_allowed:
        # backscatter interference can make the bit cut unreachable for the
        # build above even when the plain-transmission point is feasible
        return initialize_feasible(
            sys, ch, scheme, SchemeRestriction(restrict.fix_f_zero, False,
                                               restrict.local_only))
    return None


# ---------------------------------------------------------------------------
# exact solver for the interference-free (no-backscatter) branch


def _interference_free_solve(sys: SystemParams, ch: ChannelRealization,
                             scheme: Scheme, fix_f_zero: bool,
                             tols: SolverTolerances,
                             eta0: float | None = None) -> SolveReport:
    """Exact solve of the backscatter-free branch (all reflection
    coefficients zero).

    With no backscatter there is no inter-user interference, so the users
    decouple given the slot-time split, and each user's parametric problem is
    concave in (t, t*p): nested 1-D searches give the branch optimum,
    including the frequent case where the frame is left partly idle because
    active circuit power makes a full frame wasteful.  The block-coordinate
    loop cannot reliably reach such points (its slot LP is bang-bang in the
    frame), so this closed path both audits and replaces it on this branch.
    """
    T, B = sys.frame_time, sys.bandwidth
    sig2 = sys.noise_power
    LN2 = math.log(2.0)

    def user_best(k: int, t_cap: float, eta: float, pinned: bool = False):
        """Max of bits - eta*energy for user k with slot time in [0, t_cap].
        Returns (value, t, p, f) or None when infeasible; with `pinned`,
        returns the fixed-slot evaluator itself instead."""
        u = sys.users[k]
        h2 = ch.gain_user_ap[k]
        fmax = 0.0 if fix_f_zero else u.f_max
        f_unc = (1.0 / math.sqrt(3.0 * u.cpu_cycles_per_bit
                                 * u.capacitance_coeff * eta)
                 if eta > 0.0 and not fix_f_zero else fmax)

        def best_pf(t: float):
            """Inner optimum over (p, f) at a fixed slot time."""
            if t < TIME_EPS:
                f_cap = min(fmax, (u.energy_budget
                                   / (T * u.capacitance_coeff)) ** (1.0 / 3.0))
                f_lo = max(0.0, u.cpu_cycles_per_bit * u.min_bits / T)
                if f_lo > f_cap * (1.0 + 1e-12):
                    return None
                f = min(max(f_unc, f_lo), f_cap)
                val = T * f / u.cpu_cycles_per_bit - eta * (
                    T * u.capacitance_coeff * f ** 3)
                return val, 0.0, 0.0, f
            lo = u.sinr_threshold * sig2 / h2
            hi = u.energy_budget / t - u.circuit_power_active
            if hi < lo:
                return None

            def eval_p(p):
                rate = t * B * math.log2(1.0 + p * h2 / sig2)
                head = u.energy_budget - t * (p + u.circuit_power_active)
                if head < 0.0:
                    return None
                f_cap = min(fmax, (head / (T * u.capacitance_coeff)) ** (1.0 / 3.0))
                f_lo = max(0.0, u.cpu_cycles_per_bit * (u.min_bits - rate) / T)
                if f_lo > f_cap * (1.0 + 1e-12):
                    return None
                f = min(max(f_unc, f_lo), f_cap)
                val = (rate + T * f / u.cpu_cycles_per_bit
                       - eta * (t * (p + u.circuit_power_active)
                                + T * u.capacitance_coeff * f ** 3))
                return val, t, p, f

            if eta > 0.0:
                # Fast path: at the stationary transmit power of
                # rate - eta*energy with the frequency at its unconstrained
                # stationary value, the point is jointly stationary and
                # interior, hence globally optimal (the value is concave).
                ps = B / (LN2 * eta) - sig2 / h2
                if lo < ps < hi:
                    rate = t * B * math.log2(1.0 + ps * h2 / sig2)
                    head = u.energy_budget - t * (ps + u.circuit_power_active)
                    f_tgt = min(f_unc, fmax)
                    if (head > 0.0
                            and u.cpu_cycles_per_bit * (u.min_bits - rate) / T
                            <= f_tgt
                            and T * u.capacitance_coeff * f_tgt ** 3 < head):
                        return eval_p(ps)
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
            cands = [lo, hi]
            if eta > 0.0:
                cands.append(min(max(B / (LN2 * eta) - sig2 / h2, lo), hi))
            p_g, _ = _golden_max(
                lambda p: -math.inf if eval_p(p) is None else eval_p(p)[0],
                lo, hi, iters=40)
            cands.append(p_g)
            best = None
            for p in cands:
                r = eval_p(p)
                if r is not None and (best is None or r[0] > best[0]):
                    best = r
            return best

        if pinned:
            return best_pf

        def vfun(t):
            r = best_pf(t)
            return -math.inf if r is None else r[0]

        t_g, _ = _golden_max(vfun, 0.0, t_cap, iters=48)
        best = None
        for t in (t_g, 0.0, t_cap):
            r = best_pf(t)
            if r is not None and (best is None or r[0] > best[0]):
                best = r
        return best

    def inner(eta: float) -> Decision:
        r0 = user_best(0, T, eta)
        r1 = user_best(1, T, eta)
        if r0 is not None and r1 is not None and r0[1] + r1[1] <= T:
            pair = (r0, r1)
        else:
            # The frame constraint binds; by concavity the optimum satisfies
            # t_0 + t_1 = T exactly, so search the split directly with each
            # user pinned at its share (no nested slot search).
            ub0 = user_best(0, T, eta, pinned=True)
            ub1 = user_best(1, T, eta, pinned=True)

            def split_val(s):
                a = ub0(s)
                b = ub1(T - s)
                if a is None or b is None:
                    return -math.inf
                return a[0] + b[0]
            s_g, v_g = _golden_max(split_val, 0.0, T, iters=48)
            cand = [(s_g, v_g)]
            for s in (0.0, T):
                cand.append((s, split_val(s)))
            s_g, v_g = max(cand, key=lambda it: it[1])
            if not math.isfinite(v_g):
                raise InfeasibleError("interference-free branch infeasible")
            pair = (ub0(s_g), ub1(T - s_g))
            if pair[0] is None or pair[1] is None:
                raise InfeasibleError("interference-free branch infeasible")
        return Decision(transmit_power=(pair[0][2], pair[1][2]),
                        slot_time=(pair[0][1], pair[1][1]),
                        reflection_coeff=(0.0, 0.0),
                        cpu_freq=(pair[0][3], pair[1][3]))

    if eta0 is None:
        dec0 = initialize_feasible(sys, ch, scheme,
                                   SchemeRestriction(fix_f_zero, False, False))
        if dec0 is None:
            return SolveReport(scheme, feasible=False,
                               warnings=["no feasible initialization found"])
        eta0 = compute_metrics(dec0, ch, sys).ce
    try:
        report = dinkelbach_solve(inner, sys, ch, eta0=eta0,
                                  tol=tols.outer_tol, max_outer=tols.max_outer)
    except InfeasibleError as exc:
        return SolveReport(scheme, feasible=False, warnings=[str(exc)])
    dec = report.decision
    metrics = report.metrics
    creport = check_constraints(dec, ch, sys)
    return SolveReport(scheme, feasible=creport.all_satisfied(FEAS_TOL),
                       decision=dec, metrics=metrics, eta=metrics.ce,
                       constraints=creport,
                       outer_iterations=report.outer_iterations,
                       inner_iterations=[1] * report.outer_iterations,
                       trace=list(report.f_trace),
                       eta_trace=list(report.eta_trace),
                       warnings=list(report.warnings))


def _log_grid_max(fun, lo: float, hi: float, n: int = 40, iters: int = 36):
    """Maximize over [lo, hi]: geometric grid scan (dense near lo) followed by
    a golden refinement around the best cell.  Robust to the piecewise branch
    structure that makes plain golden-section unreliable here."""
    if hi <= lo:
        return lo, fun(lo)
    base = max(lo, 1e-12 * hi)
    pts = [lo] + [base * (hi / base) ** (i / (n - 1.0)) for i in range(n)]
    vals = [fun(x) for x in pts]
    i = max(range(len(pts)), key=lambda j: vals[j])
    a = pts[i - 1] if i > 0 else lo
    b = pts[i + 1] if i + 1 < len(pts) else hi
    x_g, v_g = _golden_max(fun, a, b, iters=iters)
    if v_g >= vals[i]:
        return x_g, v_g
    return pts[i], vals[i]


# ---------------------------------------------------------------------------
# exact solver for the single-active-slot configuration


def _single_slot_solve(sys: SystemParams, ch: ChannelRealization,
                       scheme: Scheme, fix_f_zero: bool,
                       tols: SolverTolerances, eta0: float) -> SolveReport:
    """Near-exact solve of the configuration where one user transmits for a
    single slot of length tau while the partner never transmits actively and
    instead backscatters (power q) during that slot and computes locally.

    This configuration frequently carries the optimum: the idle partner gets
    its bits almost for free (backscatter spends no own energy), and active
    circuit power makes a part-idle frame preferable.  The block-coordinate
    loop reaches it only through a bang-bang slot LP whose fixed point drifts
    with the width of the energy-budget search brackets; here everything has
    a closed form except a 1-D concave search over q whose bracket does not
    involve the budgets, so the returned point is consistent across budgets.

    For the parametric objective at ratio eta, with a = active user index and
    x = q * h_b^2 * g the backscattered power seen at the access point:
      rate_a/tau = B log2(1 + p h_a^2 / (x + sigma^2))
      rate_b/tau = B log2(1 + x / sigma^2)
    and the objective is linear in tau at fixed (p, q, f), so tau sits at a
    bound (partner bits, own bits, frame length, or energy).  The transmit
    power has the stationary point p = B/(ln2 eta) - (x + sigma^2)/h_a^2, and
    the partner frequency trades local bits against slot length with the
    stationary point f_b = f_unc * sqrt(1 - S/r_b) (S the per-second net
    objective rate of the slot).
    """
    T, B = sys.frame_time, sys.bandwidth
    sig2 = sys.noise_power
    g = ch.gain_interuser
    LN2 = math.log(2.0)
    EPS_UP = 1.0 + 1e-12

    def orientation_best(a: int, eta: float):
        """Best (value, Decision) with user a active, or None."""
        b = 1 - a
        ua, ub = sys.users[a], sys.users[b]
        h2a, h2b = ch.gain_user_ap[a], ch.gain_user_ap[b]
        beta = h2b * g
        fmax_a = 0.0 if fix_f_zero else ua.f_max
        fmax_b = 0.0 if fix_f_zero else ub.f_max
        f_cap_b = min(fmax_b, (ub.energy_budget / (T * ub.capacitance_coeff))
                      ** (1.0 / 3.0) / EPS_UP)
        f_unc_a = (1.0 / math.sqrt(3.0 * ua.cpu_cycles_per_bit
                                   * ua.capacitance_coeff * eta)
                   if eta > 0.0 and fmax_a > 0.0 else fmax_a)
        f_unc_b = (1.0 / math.sqrt(3.0 * ub.cpu_cycles_per_bit
                                   * ub.capacitance_coeff * eta)
                   if eta > 0.0 and fmax_b > 0.0 else fmax_b)
        pbc_term = ub.circuit_power_backscatter / (sys.eh_coeff * g)

        def evaluate(q, f_b, p, f_a):
            """Exact value of the best tau for the given coordinates."""
            if not (0.0 <= f_b <= f_cap_b * EPS_UP and 0.0 <= f_a <= fmax_a):
                return None
            x = q * beta
            r_b = B * math.log2(1.0 + x / sig2)
            r_a = B * math.log2(1.0 + p * h2a / (x + sig2))
            # slot-independent feasibility of the coordinates
            if p * h2a < ua.sinr_threshold * (x + sig2):
                return None
            if q > 0.0 and (p - q < pbc_term or q > p):
                return None
            tau_lo = 0.0
            for (rate, u, f) in ((r_a, ua, f_a), (r_b, ub, f_b)):
                deficit = u.min_bits - T * f / u.cpu_cycles_per_bit
                if deficit > 0.0:
                    if rate <= 0.0:
                        return None
                    tau_lo = max(tau_lo, deficit / rate * EPS_UP)
            head_a = ua.energy_budget - T * ua.capacitance_coeff * f_a ** 3
            if head_a < 0.0:
                return None
            tau_hi = min(T, head_a / (p + ua.circuit_power_active))
            if tau_lo > tau_hi:
                return None
            slope = r_a + r_b - eta * (p + ua.circuit_power_active)
            tau = tau_hi if slope > 0.0 else tau_lo
            val = (tau * slope
                   + T * f_a / ua.cpu_cycles_per_bit
                   - eta * T * ua.capacitance_coeff * f_a ** 3
                   + T * f_b / ub.cpu_cycles_per_bit
                   - eta * T * ub.capacitance_coeff * f_b ** 3)
            return val, tau, p, f_a, f_b

        p_base = B / (LN2 * eta) - sig2 / h2a if eta > 0.0 else math.inf

        def best_at_q(q):
            x = q * beta
            p_stat = p_base - x / h2a
            p_lo = ua.sinr_threshold * (x + sig2) / h2a
            if q > 0.0:
                p_lo = max(p_lo, (q + pbc_term) * EPS_UP)
            p_cands = {max(p_stat, p_lo), p_lo}
            r_b = B * math.log2(1.0 + x / sig2)
            best = None
            for p in p_cands:
                if not math.isfinite(p) or p <= 0.0:
                    continue
                r_a = B * math.log2(1.0 + p * h2a / (x + sig2))
                slope = r_a + r_b - eta * (p + ua.circuit_power_active)
                fb_cands = {min(f_unc_b, f_cap_b), f_cap_b, 0.0}
                if r_b > 0.0 and eta > 0.0 and slope < r_b:
                    fb_cands.add(min(f_unc_b * math.sqrt(1.0 - slope / r_b),
                                     f_cap_b))
                # frequency that meets the partner bits without any slot time
                fb_cands.add(min(ub.cpu_cycles_per_bit * ub.min_bits / T
                                 * EPS_UP, f_cap_b))
                fa_base = min(f_unc_a, fmax_a)
                for f_b in fb_cands:
                    deficit_b = ub.min_bits - T * f_b / ub.cpu_cycles_per_bit
                    fa_cands = {fa_base}
                    if deficit_b > 0.0 and r_b > 0.0:
                        # own frequency making the own-bits cut match the
                        # partner-driven slot length
                        tau_b = deficit_b / r_b
                        need = (ua.min_bits - tau_b * r_a) \
                            * ua.cpu_cycles_per_bit / T
                        if 0.0 < need <= fmax_a:
                            fa_cands.add(need * EPS_UP)
                    for f_a in fa_cands:
                        r = evaluate(q, f_b, p, f_a)
                        if r is not None and (best is None or r[0] > best[0]):
                            best = r
            return best

        # q bracket from budget-free bounds at the stationary power:
        # C4a  p_stat(q) - q >= Pbc/(zeta g)   and   C5  p_stat(q) h_a^2 >=
        # gamma_th (q beta + sigma^2), both linear in q
        q_hi = 0.0
        if math.isfinite(p_base) and p_base > 0.0 and beta > 0.0:
            b_c4 = (p_base - pbc_term) / (1.0 + beta / h2a)
            b_c5 = ((p_base * h2a - ua.sinr_threshold * sig2)
                    / (beta * (1.0 + ua.sinr_threshold)))
            q_hi = max(0.0, min(b_c4, b_c5))

        def vfun(q):
            r = best_at_q(q)
            return -math.inf if r is None else r[0]

        cands = [0.0]
        if q_hi > 0.0:
            q_g, _ = _log_grid_max(vfun, 0.0, q_hi)
            cands.extend([q_g, q_hi])
        best = None
        for q in cands:
            r = best_at_q(q)
            if r is not None and (best is None or r[0] > best[0]):
                best = (r[0], q, r[1], r[2], r[3], r[4])

        # On the harvest face q = p - Pbc/(zeta g) the transmit power is
        # pushed above its stationary point because raising p relaxes the
        # backscatter-power bound; search p directly with q tied to it.
        if beta > 0.0 and math.isfinite(p_base) and p_base > 0.0:
            def face_best(p):
                q = p - pbc_term
                if q <= 0.0:
                    return None
                rb = None
                for f_b, f_a in _face_combos(q):
                    r = evaluate(q, f_b, p, f_a)
                    if r is not None and (rb is None or r[0] > rb[0]):
                        rb = r
                return rb

            def _face_combos(q):
                x = q * beta
                p = q + pbc_term
                r_b = B * math.log2(1.0 + x / sig2)
                r_a = B * math.log2(1.0 + p * h2a / (x + sig2))
                slope = r_b + r_a - eta * (p + ua.circuit_power_active)
                fb_cands = {min(f_unc_b, f_cap_b), f_cap_b, 0.0,
                            min(ub.cpu_cycles_per_bit * ub.min_bits / T
                                * EPS_UP, f_cap_b)}
                if r_b > 0.0 and eta > 0.0 and slope < r_b:
                    fb_cands.add(min(f_unc_b * math.sqrt(1.0 - slope / r_b),
                                     f_cap_b))
                fa = min(f_unc_a, fmax_a)
                out = [(f_b, fa) for f_b in fb_cands]
                if r_b > 0.0:
                    for f_b in fb_cands:
                        deficit_b = (ub.min_bits
                                     - T * f_b / ub.cpu_cycles_per_bit)
                        if deficit_b > 0.0:
                            tau_b = deficit_b / r_b
                            need = (ua.min_bits - tau_b * r_a) \
                                * ua.cpu_cycles_per_bit / T
                            if 0.0 < need <= fmax_a:
                                out.append((f_b, need * EPS_UP))
                return out

            def face_val(qf):
                r = face_best(qf + pbc_term)
                return -math.inf if r is None else r[0]

            qf_hi = 64.0 * (p_base + pbc_term
                            + ua.sinr_threshold * sig2 / h2a)
            qf_g, _ = _log_grid_max(face_val, 0.0, qf_hi)
            for qf in (qf_g, qf_hi):
                r = face_best(qf + pbc_term)
                if r is not None and (best is None or r[0] > best[0]):
                    best = (r[0], qf, r[1], r[2], r[3], r[4])
        if best is None:
            return None
        _, q, tau, p, f_a, f_b = best
        dec_p, dec_t = [0.0, 0.0], [0.0, 0.0]
        dec_al, dec_f = [0.0, 0.0], [0.0, 0.0]
        dec_p[a], dec_t[a] = p, tau
        dec_f[a], dec_f[b] = f_a, f_b
        if q > 0.0 and p > 0.0:
            dec_al[b] = min(q / p, 1.0)
        return best[0], Decision(tuple(dec_p), tuple(dec_t),
                                 tuple(dec_al), tuple(dec_f))

    def inner(eta: float) -> Decision:
        best = None
        for a in (0, 1):
            r = orientation_best(a, eta)
            if r is not None and (best is None or r[0] > best[0]):
                best = r
        if best is None:
            raise InfeasibleError("single-active-slot configuration infeasible")
        return best[1]

    try:
        report = dinkelbach_solve(inner, sys, ch, eta0=eta0,
                                  tol=tols.outer_tol, max_outer=tols.max_outer)
    except InfeasibleError as exc:
        return SolveReport(scheme, feasible=False, warnings=[str(exc)])
    dec = report.decision
    metrics = report.metrics
    creport = check_constraints(dec, ch, sys)
    return SolveReport(scheme, feasible=creport.all_satisfied(FEAS_TOL),
                       decision=dec, metrics=metrics, eta=metrics.ce,
                       constraints=creport,
                       outer_iterations=report.outer_iterations,
                       inner_iterations=[1] * report.outer_iterations,
                       trace=list(report.f_trace),
                       eta_trace=list(report.eta_trace),
                       warnings=list(report.warnings))


# ---------------------------------------------------------------------------
# the alternating loop


def _obj12(ctx: _Ctx, p, q, f, gb) -> float:
    return _objective(ctx, p, q, f, gb)


def _full_local_report(sys: SystemParams, ch: ChannelRealization) -> SolveReport:
    dec = initialize_feasible(sys, ch, Scheme.FULL_LOCAL)
    if dec is None:
        return SolveReport(Scheme.FULL_LOCAL, feasible=False,
                           warnings=["local-only computing cannot meet the bit "
                                     "requirement within budget"])
    if all(fr <= 0.0 for fr in dec.cpu_freq):
        return SolveReport(Scheme.FULL_LOCAL, feasible=False,
                           warnings=["no bit requirement: local-only CE is "
                                     "unbounded as f -> 0 (supremum not attained)"])
    metrics = compute_metrics(dec, ch, sys)
    return SolveReport(Scheme.FULL_LOCAL, feasible=True, decision=dec,
                       metrics=metrics, eta=metrics.ce,
                       constraints=check_constraints(dec, ch, sys),
                       outer_iterations=1, inner_iterations=[1],
                       trace=[sum(metrics.total_bits)
                              - metrics.ce * sum(metrics.total_energy)],
                       eta_trace=[metrics.ce])


def alternating_solve(sys: SystemParams, ch: ChannelRealization, scheme: Scheme,
                      tols: SolverTolerances | None = None,
                      fixed_slots: tuple[float, float] | None = None,
                      _no_backscatter: bool = False) -> SolveReport:
    """Solve one instance under the given scheme restriction.

    Nesting: ratio-parameter loop outermost; inside it, alternate
    [auxiliary update -> subproblem A -> slot-time LP] to convergence.
    Deterministic: no randomness anywhere in the solve path.

    `fixed_slots` pins the slot times and skips the slot-time LP block; it is
    used by the slot-collapse rescue, which re-optimizes the split on a coarse
    grid when the LP's bang-bang vertex strands the loop with a dead slot.

    `_no_backscatter` runs the same scheme with backscatter disabled.  The
    block-coordinate trajectory with backscatter active can stall on a worse
    coordinate-wise optimum than the backscatter-free trajectory even though
    the former's feasible set contains the latter's, so schemes that allow
    backscatter solve both trajectories and keep the better point.
    """
    tols = tols or SolverTolerances()
    if scheme is Scheme.FULL_LOCAL:
        return _full_local_report(sys, ch)
    restrict = apply_scheme(scheme)
    if _no_backscatter:
        restrict = SchemeRestriction(restrict.fix_f_zero, False, False)

    dec0 = initialize_feasible(sys, ch, scheme, restrict)
    if dec0 is None:
        return SolveReport(scheme, feasible=False,
                           warnings=["no feasible initialization found"])
    if restrict.fix_f_zero:
        dec0 = Decision(dec0.transmit_power, dec0.slot_time,
                        dec0.reflection_coeff, (0.0, 0.0))
        if not check_constraints(dec0, ch, sys).all_satisfied(FEAS_TOL):
            return SolveReport(scheme, feasible=False,
                               warnings=["offloading alone cannot meet the bit "
                                         "requirement"])
    m0 = compute_metrics(dec0, ch, sys)

    state = {
        "p": list(dec0.transmit_power),
        "q": [dec0.reflection_coeff[k] * dec0.transmit_power[1 - k] for k in (0, 1)],
        "f": list(dec0.cpu_freq),
        "t": list(fixed_slots) if fixed_slots is not None else list(dec0.slot_time),
        "duals_on": None,   # warm duals, backscatter-enabled branch
        "duals_off": None,
        "best_feas": None,  # (ce, decision, metrics), feasibility re-checked
    }
    trace: list[float] = []
    inner_counts: list[int] = []
    warnings: list[str] = []

    sig2 = sys.noise_power
    h2 = ch.gain_user_ap
    g2 = ch.gain_interuser

    def current_y(p, q, t):
        y = [0.0, 0.0]
        for k in (0, 1):
            if t[k] >= TIME_EPS and p[k] > 0.0:
                y[k] = math.sqrt(p[k] * h2[k]) / (q[1 - k] * h2[1 - k] * g2 + sig2)
        return y

    def inner(eta: float) -> Decision:
        p, q, f, t = state["p"], state["q"], state["f"], state["t"]
        prev_obj = None
        inner_n = 0
        for _ in range(tols.max_inner):
            inner_n += 1
            y = current_y(p, q, t)
            gb = [max(0.0, _s8_vals(p, q, y, k)) if t[k] >= TIME_EPS else 0.0
                  for k in (0, 1)]

            inp_on = SubproblemAInput(sys, ch, tuple(t), tuple(y), eta, True,
                                      fix_f_zero=restrict.fix_f_zero)
            ctx_on = _Ctx(inp_on)
            trace.append(_obj12(ctx_on, p, q, f, gb))

            # subproblem A on the scheme's branch; the backscatter-off branch
            # is solved only as a fallback here because the full
            # backscatter-free trajectory is explored separately at the end
            candidates = []
            if restrict.backscatter_allowed:
                sol = solve_subproblem_a(inp_on, tols.dual,
                                         warm_duals=state["duals_on"],
                                         warm_primal=(p, q, f, gb),
                                         want_duals=False)
                if sol.feasible:
                    state["duals_on"] = sol.duals
                    candidates.append(sol)
            if not candidates:
                inp_off = SubproblemAInput(sys, ch, tuple(t), tuple(y), eta,
                                           False, fix_f_zero=restrict.fix_f_zero)
                sol_off = solve_subproblem_a(inp_off, tols.dual,
                                             warm_duals=state["duals_off"],
                                             warm_primal=(p, [0.0, 0.0], f,
                                                          [min(gb[k], _s8_off(p, y, k))
                                                           for k in (0, 1)]),
                                             want_duals=False)
                if sol_off.feasible:
                    state["duals_off"] = sol_off.duals
                    candidates.append(sol_off)
            if candidates:
                best = max(candidates, key=lambda s: s.objective)
                cur = _obj12(ctx_on, p, q, f, gb)
                if best.objective >= cur - 1e-9:
                    p[:], q[:] = list(best.p), list(best.q)
                    f[:], gb = list(best.f), list(best.gamma_bar)
            trace.append(_obj12(ctx_on, p, q, f, gb))

            # harvested energy must cover the backscatter circuit (t-free check)
            q2 = backscatter_power_check(sys, ch, tuple(p), tuple(q))
            if q2 != tuple(q):
                q[:] = list(q2)
                gb = [min(gb[k], max(0.0, _s8_vals(p, q, y, k))) for k in (0, 1)]

            # subproblem B: slot-time LP (skipped when the split is pinned)
            if fixed_slots is not None:
                t_new = tuple(t)
            else:
                try:
                    t_new = solve_subproblem_b(sys, ch, tuple(p), tuple(q),
                                               tuple(f), tuple(gb), eta)
                except InfeasibleError as exc:
                    warnings.append(f"slot-time LP infeasible: {exc}")
                    t_new = tuple(t)
            ctx_try = _Ctx(SubproblemAInput(sys, ch, t_new, tuple(y), eta, True,
                                            fix_f_zero=restrict.fix_f_zero))
            if _obj12(ctx_try, p, q, f, gb) >= _obj12(ctx_on, p, q, f, gb) - 1e-9:
                t[:] = list(t_new)
                ctx_on = ctx_try
            obj = _obj12(ctx_on, p, q, f, gb)
            trace.append(obj)

            # near the ratio fixed point the parametric objective itself is
            # ~0, so scale the test by the bits magnitude, not |obj|
            obj_scale = max(1.0, abs(obj), sys.bandwidth * sys.frame_time)
            if prev_obj is not None and abs(obj - prev_obj) <= tols.inner_tol * obj_scale:
                break
            prev_obj = obj
        inner_counts.append(inner_n)
        alpha = tuple(recover_alpha(q[k], p[1 - k]) if p[1 - k] > 0 else 0.0
                      for k in (0, 1))
        dec = Decision(tuple(p), tuple(t), alpha, tuple(f))
        # remember the best feasible point: the loop can wander into a corner
        # where a later block update strands it infeasible
        m = compute_metrics(dec, ch, sys)
        if (check_constraints(dec, ch, sys).all_satisfied(FEAS_TOL)
                and (state["best_feas"] is None or m.ce > state["best_feas"][0])):
            state["best_feas"] = (m.ce, dec, m)
        return dec

    def _s8_vals(p, q, y, k):
        j = 1 - k
        return (2.0 * y[k] * math.sqrt(p[k] * h2[k])
                - y[k] * y[k] * (q[j] * h2[j] * g2 + sig2))

    def _s8_off(p, y, k):
        return max(0.0, 2.0 * y[k] * math.sqrt(p[k] * h2[k]) - y[k] * y[k] * sig2)

    report = dinkelbach_solve(inner, sys, ch, eta0=m0.ce,
                              tol=tols.outer_tol, max_outer=tols.max_outer)
    warnings.extend(report.warnings)

    dec = report.decision
    metrics = report.metrics
    creport = check_constraints(dec, ch, sys)
    feasible = creport.all_satisfied(FEAS_TOL)
    if not feasible and state["best_feas"] is not None:
        warnings.append("returned the best feasible iterate; the final "
                        "iterate failed the constraint re-check")
        _, dec, metrics = state["best_feas"]
        creport = check_constraints(dec, ch, sys)
        feasible = creport.all_satisfied(FEAS_TOL)
    def _best_trajectory(rep_out: SolveReport) -> SolveReport:
        """Compare with the exact interference-free branch solve.  For schemes
        without backscatter this audits (and usually replaces) the
        block-coordinate point; for schemes with backscatter it covers the
        frequent case where the optimum leaves the reflection coefficients at
        zero and the block-coordinate loop stalls short of it."""
        if fixed_slots is not None:
            return rep_out
        alt = _interference_free_solve(
            sys, ch, scheme, restrict.fix_f_zero, tols,
            eta0=rep_out.eta if rep_out.feasible else None)
        if alt.feasible and ((not rep_out.feasible) or alt.eta > rep_out.eta):
            alt.warnings.insert(0, "interference-free branch solve returned "
                                   "the better point")
            rep_out = alt
        if restrict.backscatter_allowed and not _no_backscatter:
            eta0 = rep_out.eta if rep_out.feasible else m0.ce
            single = _single_slot_solve(sys, ch, scheme, restrict.fix_f_zero,
                                        tols, eta0)
            if single.feasible and ((not rep_out.feasible)
                                    or single.eta > rep_out.eta):
                single.warnings.insert(0, "single-active-slot solve returned "
                                          "the better point")
                rep_out = single
        return rep_out

    def _slot_rescue(rep_out: SolveReport) -> SolveReport:
        """Slot-collapse rescue.  The slot-time LP is bang-bang, and a zeroed
        slot is absorbing (its user's power and rate can never recover), which
        can strand the block-coordinate loop far below the optimum.  When the
        result has a dead slot, re-optimize with the split pinned on a coarse
        ratio grid and keep the best point."""
        if fixed_slots is not None or (rep_out.feasible
                                       and min(rep_out.decision.slot_time) > TIME_EPS):
            return rep_out
        T = sys.frame_time
        light = SolverTolerances(max_outer=2, max_inner=2, dual=tols.dual)
        cur = rep_out.eta if rep_out.feasible else -math.inf
        best_fr, best_ce = None, cur
        for fr in (0.125, 0.25, 0.5, 0.75, 0.875):
            probe = alternating_solve(sys, ch, scheme, light,
                                      fixed_slots=(fr * T, (1.0 - fr) * T),
                                      _no_backscatter=_no_backscatter)
            if probe.feasible and probe.eta > best_ce:
                best_fr, best_ce = fr, probe.eta
        if best_fr is None:
            return rep_out
        full = alternating_solve(sys, ch, scheme, tols,
                                 fixed_slots=(best_fr * T, (1.0 - best_fr) * T),
                                 _no_backscatter=_no_backscatter)
        if full.feasible and full.eta > cur:
            full.warnings.insert(0, "slot-collapse rescue: slot split "
                                    "re-optimized on a fixed ratio grid")
            return full
        return rep_out

    if not feasible:
        warnings.append("final point failed the independent constraint re-check")
    rep = SolveReport(scheme, feasible=feasible, decision=dec, metrics=metrics,
                      eta=metrics.ce, constraints=creport,
                      outer_iterations=report.outer_iterations,
                      inner_iterations=inner_counts, trace=trace,
                      eta_trace=list(report.eta_trace),
                      block_trace=trace, block_inner_iterations=inner_counts,
                      warnings=warnings)
    out = _best_trajectory(rep)
    if out is rep:
        # The direct configuration solves did not improve on the
        # block-coordinate point, so a slot collapse may be genuine damage
        # rather than the optimal configuration; try the pinned-split rescue.
        out = _slot_rescue(rep)
    if not out.block_trace:
        # keep the alternating-loop diagnostic on replaced reports
        out.block_trace = trace
        out.block_inner_iterations = inner_counts
    return out
