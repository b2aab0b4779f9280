"""Independent oracles: exhaustive grid search over the original problem and a
projected-gradient/penalty solver for subproblem A.  Both are deliberately
separate code paths from the production solvers so they can audit them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization
from .model import TIME_EPS, Decision
from .params import SystemParams
from .subproblems import (SubproblemAInput, _Ctx, _objective, _restore,
                          _seed_point, _violations)

LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# grid search over the original decision space


@dataclass(frozen=True)
class GridSpec:
    p_points: tuple            # W, includes 0 and the bound values
    alpha_points: tuple        # includes 0 and 1
    f_fractions: tuple         # fractions of f_max, includes 0 and 1
    t_fractions: tuple         # t1 as fraction of T; t2 fractions of the rest

    @classmethod
    def coarse(cls, points_per_decade: int = 2, p_lo: float = 1e-6,
               p_hi: float = 1.0, n_alpha: int = 5, n_f: int = 5,
               n_t: int = 5) -> "GridSpec":
        n_p = int(points_per_decade * math.log10(p_hi / p_lo)) + 1
        return cls(
            p_points=(0.0, *np.geomspace(p_lo, p_hi, n_p)),
            alpha_points=tuple(np.linspace(0.0, 1.0, n_alpha)),
            f_fractions=tuple(np.linspace(0.0, 1.0, n_f)),
            t_fractions=tuple(np.linspace(0.0, 1.0, n_t)),
        )


@dataclass(frozen=True)
class GridResult:
    feasible: bool
    decision: Decision | None
    ce: float


def _grid_axes(sys: SystemParams, ch: ChannelRealization, scheme, grid: GridSpec):
    # local import: oracles must stay importable from the optimizer tests
    from .optimizer import Scheme, apply_scheme
    restrict = apply_scheme(scheme)
    p_axis = (0.0,) if restrict.local_only else grid.p_points
    a_axis = (0.0,) if not restrict.backscatter_allowed else grid.alpha_points
    f_axes = []
    for u in sys.users:
        if restrict.fix_f_zero:
            f_axes.append((0.0,))
        else:
            f_axes.append(tuple(fr * u.f_max for fr in grid.f_fractions))
    t_fracs = (0.0,) if restrict.local_only else grid.t_fractions
    return p_axis, a_axis, f_axes, t_fracs


def grid_search_solve(sys: SystemParams, ch: ChannelRealization, scheme,
                      grid: GridSpec | None = None,
                      feas_tol: float = 1e-9) -> GridResult:
    """Exhaustively evaluate CE over the (scheme-restricted) Cartesian grid.

    Ties resolve to the first maximum in ascending (t1, t2, p1, p2, a1, a2,
    f1, f2) order, i.e. the lexicographically smallest decision on the grid.
    """
    grid = grid or GridSpec.coarse()
    T, B = sys.frame_time, sys.bandwidth
    sig2 = sys.noise_power
    h2 = ch.gain_user_ap
    g2 = ch.gain_interuser
    p_axis, a_axis, f_axes, t_fracs = _grid_axes(sys, ch, scheme, grid)

    p1, p2, a1, a2, f1, f2 = np.meshgrid(
        np.asarray(p_axis), np.asarray(p_axis),
        np.asarray(a_axis), np.asarray(a_axis),
        np.asarray(f_axes[0]), np.asarray(f_axes[1]),
        indexing="ij", sparse=True)
    best_ce = -np.inf
    best = None

    u1, u2 = sys.users
    for fr1 in t_fracs:
        t1 = fr1 * T
        for fr2 in t_fracs:
            t2 = fr2 * (T - t1)
            bits_tot = 0.0
            e_tot = 0.0
            feas = True
            per = []
            for k, (pk, pj, ak, aj, fk, tk, tj, u) in enumerate((
                    (p1, p2, a1, a2, f1, t1, t2, u1),
                    (p2, p1, a2, a1, f2, t2, t1, u2))):
                hk2, hj2 = h2[k], h2[1 - k]
                sinr = pk * hk2 / (aj * pk * hj2 * g2 + sig2)
                snr = ak * pj * hk2 * g2 / sig2
                ra = tk * B * np.log2(1.0 + sinr)
                rb = tj * B * np.log2(1.0 + snr)
                rl = T * fk / u.cpu_cycles_per_bit
                ek = tk * (pk + u.circuit_power_active) + T * u.capacitance_coeff * fk ** 3
                bits = rl + ra + rb
                eh = tj * sys.eh_coeff * (1.0 - ak) * pj * g2
                ok = (bits >= u.min_bits - feas_tol) & (ek <= u.energy_budget + feas_tol)
                if tj >= TIME_EPS:
                    ok = ok & ((ak <= 0.0) | (eh >= tj * u.circuit_power_backscatter - feas_tol))
                if tk >= TIME_EPS:
                    ok = ok & (sinr >= u.sinr_threshold - feas_tol)
                per.append((bits, ek, ok))
            bits_tot = per[0][0] + per[1][0]
            e_tot = per[0][1] + per[1][1]
            feas = per[0][2] & per[1][2] & (e_tot > 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                ce = np.where(feas, bits_tot / np.where(e_tot > 0, e_tot, 1.0), -np.inf)
            idx = np.unravel_index(np.argmax(ce), ce.shape)
            if ce[idx] > best_ce:
                best_ce = float(ce[idx])
                i1, i2, j1, j2, k1, k2 = idx
                best = Decision(
                    transmit_power=(float(p_axis[i1]), float(p_axis[i2])),
                    slot_time=(t1, t2),
                    reflection_coeff=(float(a_axis[j1]), float(a_axis[j2])),
                    cpu_freq=(float(f_axes[0][k1]), float(f_axes[1][k2])))
    if best is None or not np.isfinite(best_ce):
        return GridResult(feasible=False, decision=None, ce=-math.inf)
    return GridResult(feasible=True, decision=best, ce=best_ce)


def grid_resolution_bound(sys: SystemParams, ch: ChannelRealization, scheme,
                          result: GridResult, grid: GridSpec | None = None) -> float:
    """Heuristic CE slack of one grid cell around the returned optimum: for
    each coordinate, move to the adjacent grid values and add up the largest
    feasible CE change per dimension."""
    from .model import check_constraints, compute_metrics
    grid = grid or GridSpec.coarse()
    if not result.feasible:
        return 0.0
    dec = result.decision
    p_axis, a_axis, f_axes, t_fracs = _grid_axes(sys, ch, scheme, grid)
    T = sys.frame_time

    def neighbors(axis, val):
        arr = sorted(axis)
        out = []
        for i, v in enumerate(arr):
            if abs(v - val) <= 1e-12 * max(1.0, abs(val)):
                if i > 0:
                    out.append(arr[i - 1])
                if i < len(arr) - 1:
                    out.append(arr[i + 1])
                break
        return out

    def ce_of(d: Decision):
        if not check_constraints(d, ch, sys).all_satisfied(1e-9):
            return None
        try:
            return compute_metrics(d, ch, sys).ce
        except ValueError:
            return None

    bound = 0.0
    base = result.ce
    fields = []
    for k in (0, 1):
        fields.append(("p", k, p_axis, dec.transmit_power[k]))
        fields.append(("a", k, a_axis, dec.reflection_coeff[k]))
        fields.append(("f", k, f_axes[k], dec.cpu_freq[k]))
    t_axis1 = [fr * T for fr in t_fracs]
    fields.append(("t", 0, t_axis1, dec.slot_time[0]))
    t_axis2 = [fr * (T - dec.slot_time[0]) for fr in t_fracs]
    fields.append(("t", 1, t_axis2, dec.slot_time[1]))
    for name, k, axis, val in fields:
        worst = 0.0
        for nb in neighbors(axis, val):
            p = list(dec.transmit_power)
            a = list(dec.reflection_coeff)
            f = list(dec.cpu_freq)
            t = list(dec.slot_time)
            {"p": p, "a": a, "f": f, "t": t}[name][k] = nb
            ce = ce_of(Decision(tuple(p), tuple(t), tuple(a), tuple(f)))
            if ce is not None:
                worst = max(worst, abs(ce - base))
        bound += worst
    return bound


# ---------------------------------------------------------------------------
# projected-gradient / penalty oracle for subproblem A


@dataclass
class PGConfig:
    tol: float = 1e-10
    steps_per_round: int = 2000
    penalty_rounds: tuple = (1e2, 1e4, 1e6, 1e8)
    dykstra_cycles: int = 40


@dataclass
class PGSolution:
    p: tuple
    q: tuple
    f: tuple
    gamma_bar: tuple
    objective: float
    feasible: bool
    warnings: list = field(default_factory=list)


def objective_a(inp: SubproblemAInput, p, q, f, gb) -> float:
    """Subproblem-A objective at a primal point (shared with the tests)."""
    return _objective(_Ctx(inp), p, q, f, gb)


def objective_grad_a(inp: SubproblemAInput, p, q, f, gb):
    """Analytic gradient of the subproblem-A objective w.r.t. (p, q, f, gb)."""
    c = _Ctx(inp)
    gp, gq, gf, gg = [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]
    for k in (0, 1):
        j = 1 - k
        gp[k] = -c.eta * c.t[k]
        gq[k] = c.t[j] * c.B * c.a[k] / (LN2 * (1.0 + q[k] * c.a[k]))
        gf[k] = c.T / c.C[k] - 3.0 * c.eta * c.T * c.phi[k] * f[k] ** 2
        gg[k] = c.t[k] * c.B / (LN2 * (1.0 + gb[k]))
    return gp, gq, gf, gg


def _halfspaces(c: _Ctx):
    """Linear constraints a.x <= b over x = (p1, p2, q1, q2)."""
    rows = []
    for k in (0, 1):
        j = 1 - k
        if c.bs[k]:
            a = [0.0] * 4
            a[2 + k] = 1.0
            a[j] = -1.0
            rows.append((a, 0.0))                                    # q_k <= p_j
            a = [0.0] * 4
            a[2 + k] = 1.0
            a[j] = -1.0
            rows.append((a, -c.Pbc[k] / (c.zeta * c.g2)))            # C4a
        if c.active[k]:
            a = [0.0] * 4
            a[k] = -c.h2[k]
            a[2 + j] = c.h2[j] * c.g2 * c.gth[k]
            rows.append((a, -c.sig2 * c.gth[k]))                     # C5a
    return rows


def _project_linear(x4, rows, los, his, cycles):
    """Dykstra's alternating projections onto box + halfspaces in (p, q)."""
    x = np.array(x4, dtype=float)
    corrections = [np.zeros(4) for _ in rows]
    box_corr = np.zeros(4)
    for _ in range(cycles):
        moved = 0.0
        for i, (a, b) in enumerate(rows):
            a = np.asarray(a)
            z = x + corrections[i]
            viol = a @ z - b
            newx = z - max(0.0, viol) / (a @ a) * a
            corrections[i] = z - newx
            moved = max(moved, float(np.max(np.abs(newx - x))))
            x = newx
        z = x + box_corr
        newx = np.clip(z, los, his)
        box_corr = z - newx
        moved = max(moved, float(np.max(np.abs(newx - x))))
        x = newx
        if moved < 1e-14:
            break
    return x


def pg_solve_a(inp: SubproblemAInput, cfg: PGConfig | None = None) -> PGSolution:
    """Penalty-refined projected gradient ascent on subproblem A.

    Box and linear constraints are enforced by Dykstra projection; the
    nonlinear ones (minimum bits, energy budget, surrogate concavity) enter
    through a quadratic penalty whose weight increases between rounds.  The
    final iterate is repaired to exact feasibility before reporting.
    """
    cfg = cfg or PGConfig()
    c = _Ctx(inp)
    warnings = []

    seed = _seed_point(c)
    if seed is None:
        return PGSolution((0, 0), (0, 0), (0, 0), (0, 0), -math.inf, False,
                          ["no feasible seed"])
    p, q, f, gb = [list(v) for v in seed]

    rows = _halfspaces(c)
    los = np.zeros(8)
    his = np.array([c.p_cap[0], c.p_cap[1],
                    c.p_cap[1] if c.bs[0] else 0.0,
                    c.p_cap[0] if c.bs[1] else 0.0,
                    c.fmax[0], c.fmax[1],
                    max(1.0, 4.0 * c.y[0] * math.sqrt(max(c.p_cap[0], 1e-12) * c.h2[0])),
                    max(1.0, 4.0 * c.y[1] * math.sqrt(max(c.p_cap[1], 1e-12) * c.h2[1]))])
    his = np.maximum(his, 1e-12)

    res_scale = [max(c.Rth[k], c.B * c.T) for k in (0, 1)] + \
                [c.Ebud[k] for k in (0, 1)] + \
                [max(1.0, 2.0 * c.y[k] * math.sqrt(max(c.p_cap[k], 1e-12) * c.h2[k]))
                 for k in (0, 1)]

    def penalized(x, mu):
        pp, qq, ff, gg = x[0:2], x[2:4], x[4:6], x[6:8]
        val = _objective(c, pp, qq, ff, gg)
        pen = 0.0
        for k in (0, 1):
            v = (c.Rth[k] - _bits_np(c, k, qq, ff, gg)) / res_scale[k]
            pen += max(0.0, v) ** 2
            v = (_energy_np(c, k, pp, ff) - c.Ebud[k]) / res_scale[2 + k]
            pen += max(0.0, v) ** 2
            if c.active[k]:
                v = (gg[k] - _s8_np(c, k, pp, qq)) / res_scale[4 + k]
                pen += max(0.0, v) ** 2
        return val - mu * pen

    def penalized_grad(x, mu):
        """Gradient of the penalized objective plus a diagonal curvature
        estimate (Gauss-Newton for the penalty terms) used to precondition
        the ascent step across the many-decade coordinate scales."""
        pp, qq, ff, gg = x[0:2], x[2:4], x[4:6], x[6:8]
        gpd, gqd, gfd, ggd = objective_grad_a(inp, pp, qq, ff, gg)
        grad = np.array([*gpd, *gqd, *gfd, *ggd])
        curv = np.zeros(8)
        for k in (0, 1):
            j = 1 - k
            curv[2 + k] += (c.t[j] * c.B * c.a[k] ** 2
                            / (LN2 * (1.0 + qq[k] * c.a[k]) ** 2))
            curv[4 + k] += 6.0 * c.eta * c.T * c.phi[k] * ff[k]
            curv[6 + k] += c.t[k] * c.B / (LN2 * (1.0 + gg[k]) ** 2)
            # reduced gradient through the active surrogate bound: when the
            # iterate sits on gamma_bar = s8 (kept there by the projection),
            # the objective's sensitivity to (p_k, q_j) flows through s8
            if c.active[k]:
                s8 = _s8_np(c, k, pp, qq)
                if gg[k] >= s8 - 1e-9 * max(1.0, abs(s8)):
                    coef = grad[6 + k]        # t_k B / (ln2 (1 + gb_k))
                    dq = c.y[k] ** 2 * c.h2[j] * c.g2
                    grad[2 + j] -= coef * dq
                    curv[2 + j] += coef * dq ** 2 / (1.0 + gg[k])
                    if pp[k] > 1e-300:
                        dp = c.y[k] * math.sqrt(c.h2[k] / pp[k])
                        grad[k] += coef * dp
                        curv[k] += coef * (dp ** 2 / (1.0 + gg[k])
                                           + 0.5 * dp / pp[k])
                    grad[6 + k] = 0.0
        for k in (0, 1):
            j = 1 - k
            v = (c.Rth[k] - _bits_np(c, k, qq, ff, gg)) / res_scale[k]
            if v > 0.0:
                coef = 2.0 * mu * v / res_scale[k]
                gn = 2.0 * mu / res_scale[k] ** 2
                dq = c.t[j] * c.B * c.a[k] / (LN2 * (1.0 + qq[k] * c.a[k]))
                df = c.T / c.C[k]
                dg = c.t[k] * c.B / (LN2 * (1.0 + gg[k]))
                grad[2 + k] += coef * dq
                grad[4 + k] += coef * df
                grad[6 + k] += coef * dg
                curv[2 + k] += gn * dq ** 2
                curv[4 + k] += gn * df ** 2
                curv[6 + k] += gn * dg ** 2
            v = (_energy_np(c, k, pp, ff) - c.Ebud[k]) / res_scale[2 + k]
            if v > 0.0:
                coef = 2.0 * mu * v / res_scale[2 + k]
                gn = 2.0 * mu / res_scale[2 + k] ** 2
                df = 3.0 * c.T * c.phi[k] * ff[k] ** 2
                grad[k] -= coef * c.t[k]
                grad[4 + k] -= coef * df
                curv[k] += gn * c.t[k] ** 2
                curv[4 + k] += gn * df ** 2
            if c.active[k]:
                v = (gg[k] - _s8_np(c, k, pp, qq)) / res_scale[4 + k]
                if v > 0.0:
                    coef = 2.0 * mu * v / res_scale[4 + k]
                    gn = 2.0 * mu / res_scale[4 + k] ** 2
                    grad[6 + k] -= coef
                    curv[6 + k] += gn
                    if pp[k] > 1e-300:
                        dp = c.y[k] * math.sqrt(c.h2[k] / pp[k])
                        grad[k] += coef * dp
                        curv[k] += gn * dp ** 2
                    dq = c.y[k] ** 2 * c.h2[j] * c.g2
                    grad[2 + j] -= coef * dq
                    curv[2 + j] += gn * dq ** 2
        return grad, curv

    def project(xn):
        xn[0:4] = _project_linear(xn[0:4], rows, los[0:4], his[0:4],
                                  cfg.dykstra_cycles)
        xn[4:8] = np.clip(xn[4:8], los[4:8], his[4:8])
        # exact partial maximization over gamma_bar: the objective is strictly
        # increasing in it, so it always sits on the surrogate bound
        for k in (0, 1):
            if c.active[k]:
                xn[6 + k] = min(his[6 + k], max(0.0, _s8_np(c, k, xn[0:2], xn[2:4])))
        return xn

    x = project(np.array([*p, *q, *f, *gb], dtype=float))
    obj_scale = max(1.0, c.B * c.T)
    for mu_rel in cfg.penalty_rounds:
        mu = mu_rel * obj_scale
        step = 1.0
        stale = 0
        for _ in range(cfg.steps_per_round):
            g, curv = penalized_grad(x, mu)
            # diagonal-Newton ascent direction; the |g|/box floor caps each
            # coordinate's unit step at one box width
            hinv = 1.0 / np.maximum(curv, np.abs(g) / his)
            d = g * hinv
            # slide along active halfspace faces: deflate in the curvature
            # metric every tight row the step would push outward, so the later
            # projection does not annihilate it (e.g. on the
            # p_j - q_k = const face the coordinates must move together)
            for _pass in range(3):
                for a, b in rows:
                    a4 = np.asarray(a)
                    if (a4 @ x[0:4] - b >= -1e-9 * max(1.0, abs(b))
                            and a4 @ d[0:4] > 0.0):
                        hinv_a = hinv[0:4] * a4
                        d[0:4] -= (a4 @ d[0:4]) / (a4 @ hinv_a) * hinv_a
            if not np.any(d):
                break
            base = penalized(x, mu)
            improved = False
            step = min(step * 4.0, 1.0)
            while step > 1e-14:
                xn = project(x + step * d)
                val = penalized(xn, mu)
                if val > base:
                    gain = val - base
                    x = xn
                    improved = True
                    stale = stale + 1 if gain <= cfg.tol * max(1.0, abs(base)) else 0
                    break
                step *= 0.5
            if not improved or stale >= 30:
                break

    restored = _restore(c, list(x[0:2]), list(x[2:4]), list(x[4:6]), list(x[6:8]))
    if restored is None:
        restored = seed
        warnings.append("final repair failed; reporting the seed point")
    p, q, f, gb = restored
    # polish: the slack SINR always sits on its surrogate bound at an optimum
    for k in (0, 1):
        if c.active[k]:
            gb[k] = max(0.0, _s8_np(c, k, p, q))
    obj = _objective(c, p, q, f, gb)
    worst = max(_violations(c, p, q, f, gb))
    return PGSolution(tuple(p), tuple(q), tuple(f), tuple(gb), obj,
                      worst <= 1e-9, warnings)


def _bits_np(c, k, q, f, gb):
    j = 1 - k
    return (c.T * f[k] / c.C[k]
            + c.t[k] * c.B * math.log2(1.0 + max(gb[k], 0.0))
            + c.t[j] * c.B * math.log2(1.0 + max(q[k], 0.0) * c.a[k]))


def _energy_np(c, k, p, f):
    return c.t[k] * (p[k] + c.Pac[k]) + c.T * c.phi[k] * f[k] ** 3


def _s8_np(c, k, p, q):
    j = 1 - k
    y = c.y[k]
    return (2.0 * y * math.sqrt(max(p[k], 0.0) * c.h2[k])
            - y * y * (max(q[j], 0.0) * c.h2[j] * c.g2 + c.sig2))
