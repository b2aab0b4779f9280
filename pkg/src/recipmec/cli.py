"""Command-line front end: solve one instance, run sweeps, audit with the
oracles, or evaluate the reciprocity bit gap.

Exit codes: 0 success, 2 config error, 3 no feasible instance, 4 internal
assertion failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from .channel import draw_channel
from .gap import GapCrossCheckError, GapScenario, bits_gap
from .harness import (AXES, ConfigError, ExperimentConfig, emit_results,
                      parse_config, run_sweep, trial_seed)
from .optimizer import Scheme, alternating_solve
from .oracles import GridSpec, grid_resolution_bound, grid_search_solve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4


def _load_config(args) -> ExperimentConfig:
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    else:
        text = "{}"
    cfg = parse_config(text)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if getattr(args, "out", None) is not None:
        overrides["out_dir"] = args.out
    if getattr(args, "axis", None) is not None and args.axis != cfg.axis:
        overrides["axis"] = args.axis
        from .harness import DEFAULT_BITS_VALUES, DEFAULT_ENERGY_VALUES
        overrides["values"] = (DEFAULT_ENERGY_VALUES if args.axis == "energy"
                               else DEFAULT_BITS_VALUES)
    if getattr(args, "scheme", None) is not None:
        overrides["schemes"] = (Scheme(args.scheme),)
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _cmd_solve(args) -> int:
    cfg = _load_config(args)
    ch = draw_channel(trial_seed(cfg.master_seed, 0), cfg.channel)
    scheme = Scheme(args.scheme) if args.scheme else Scheme.PROPOSED
    rep = alternating_solve(cfg.system, ch, scheme)
    print(f"scheme       : {rep.scheme.value}")
    print(f"feasible     : {rep.feasible}")
    if rep.feasible:
        d = rep.decision
        print(f"eta          : {rep.eta:.6e} bits/J")
        print(f"p (W)        : {d.transmit_power[0]:.6e}, {d.transmit_power[1]:.6e}")
        print(f"t (s)        : {d.slot_time[0]:.6f}, {d.slot_time[1]:.6f}")
        print(f"alpha        : {d.reflection_coeff[0]:.6f}, {d.reflection_coeff[1]:.6f}")
        print(f"f (Hz)       : {d.cpu_freq[0]:.6e}, {d.cpu_freq[1]:.6e}")
        print(f"bits         : {rep.metrics.total_bits[0]:.1f}, {rep.metrics.total_bits[1]:.1f}")
        print(f"energy (J)   : {rep.metrics.total_energy[0]:.6e}, {rep.metrics.total_energy[1]:.6e}")
    print(f"outer iters  : {rep.outer_iterations}")
    print(f"inner iters  : {rep.inner_iterations}")
    for w in rep.warnings:
        print(f"warning      : {w}")
    return EXIT_OK if rep.feasible else EXIT_INFEASIBLE


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    records = run_sweep(cfg)
    paths = emit_results(records, cfg.out_dir)
    n_feas = sum(1 for r in records if r.feasible)
    print(f"{len(records)} records ({n_feas} feasible) -> {paths['records']}")
    return EXIT_OK if n_feas else EXIT_INFEASIBLE


def _cmd_verify(args) -> int:
    cfg = _load_config(args)
    scheme = Scheme(args.scheme) if args.scheme else Scheme.PROPOSED
    grid = GridSpec.coarse()
    trials = args.trials if args.trials is not None else 5
    checked = failures = feasible = 0
    for trial in range(trials):
        ch = draw_channel(trial_seed(cfg.master_seed, trial), cfg.channel)
        rep = alternating_solve(cfg.system, ch, scheme)
        res = grid_search_solve(cfg.system, ch, scheme, grid)
        if not rep.feasible and not res.feasible:
            print(f"trial {trial}: both infeasible")
            continue
        feasible += 1
        if not rep.feasible:
            print(f"trial {trial}: FAIL optimizer infeasible, grid CE {res.ce:.4e}")
            failures += 1
            continue
        slack = grid_resolution_bound(cfg.system, ch, scheme, res, grid)
        ok = (not res.feasible) or rep.eta >= res.ce - slack - 1e-9
        checked += 1
        mark = "ok" if ok else "FAIL"
        grid_ce = res.ce if res.feasible else float("nan")
        print(f"trial {trial}: {mark} optimizer CE {rep.eta:.6e}, "
              f"grid CE {grid_ce:.6e}, cell slack {slack:.3e}")
        if not ok:
            failures += 1
    if failures:
        print(f"{failures} oracle violations", file=sys.stderr)
        return EXIT_INTERNAL
    if not feasible:
        return EXIT_INFEASIBLE
    print(f"{checked} instances verified")
    return EXIT_OK


def _cmd_gap(args) -> int:
    cfg = _load_config(args)
    trials = args.trials if args.trials is not None else 20
    p0 = args.p0
    rng_cases = {"A": 0, "B": 0, "inactive": 0}
    gaps = []
    for trial in range(trials):
        ch = draw_channel(trial_seed(cfg.master_seed, trial), cfg.channel)
        res = bits_gap(GapScenario(p0=p0, sys=cfg.system, ch=ch, k=0))
        rng_cases[res.case.value] += 1
        gaps.append(res.gap)
        print(f"trial {trial}: case {res.case.value:8s} alpha_j {res.alpha_j:.4f} "
              f"gap {res.gap:.1f} bits")
    print(f"cases: {rng_cases}")
    if gaps:
        print(f"mean gap: {float(np.mean(gaps)):.1f} bits over {trials} draws")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recipmec",
        description="Computation-efficiency maximization for two-user "
                    "backscatter-assisted edge offloading")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials_help):
        p.add_argument("--config", metavar="PATH", help="JSON config file")
        p.add_argument("--seed", type=int, metavar="N", help="master seed")
        p.add_argument("--trials", type=int, metavar="N", help=trials_help)
        p.add_argument("--scheme", choices=[s.value for s in Scheme])

    p = sub.add_parser("solve", help="solve one random instance")
    common(p, "(unused)")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sweep", help="run a Monte Carlo sweep")
    common(p, "trials per sweep point")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--axis", choices=list(AXES))
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify", help="audit the optimizer against the grid oracle")
    common(p, "number of instances (default 5)")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("gap", help="evaluate the reciprocity bit gap")
    common(p, "number of channel draws (default 20)")
    p.add_argument("--p0", type=float, default=1e-3,
                   help="fixed transmit power in W (default 1 mW)")
    p.set_defaults(func=_cmd_gap)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GapCrossCheckError, AssertionError) as exc:
        print(f"internal assertion failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
