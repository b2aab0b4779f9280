"""Experiment configuration, Monte Carlo sweeps and CSV persistence.

Config files are JSON and use the figure-friendly units of the simulation
section (mW, MHz, GHz, Mbit); everything is converted to SI on parse.  Sweep
results are flat per-trial records plus a (scheme, axis value) summary.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from dataclasses import dataclass, replace
from pathlib import Path

from .channel import draw_channel
from .optimizer import Scheme, SolverTolerances, alternating_solve
from .params import ChannelGenConfig, SystemParams, default_system

RECORDS_HEADER = ("scheme,axis,value,trial,seed,feasible,eta_bits_per_joule,"
                  "bits_u1,bits_u2,energy_u1_J,energy_u2_J,"
                  "outer_iters,inner_iters,wall_ms")
SUMMARY_HEADER = "scheme,axis,value,mean_eta,std_eta,n_feasible,n_infeasible"

AXES = ("energy", "bits")

DEFAULT_ENERGY_VALUES = tuple(round(0.05 * i, 10) for i in range(1, 21))   # J
DEFAULT_BITS_VALUES = tuple(round(0.1 + 0.05 * i, 10) for i in range(0, 11))  # Mbit


class ConfigError(ValueError):
    """Raised for malformed config documents; message carries the field path."""


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemParams
    channel: ChannelGenConfig
    axis: str = "energy"                      # "energy" (J) or "bits" (Mbit)
    values: tuple = DEFAULT_ENERGY_VALUES     # in axis units
    schemes: tuple = tuple(Scheme)
    trials: int = 200
    master_seed: int = 0
    out_dir: str = "results"
    record_wall_time: bool = True             # False => wall_ms column all 0.0

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"sweep.axis: must be one of {AXES}")
        if self.trials < 1:
            raise ConfigError("sweep.trials: must be >= 1")
        vals = list(self.values)
        if not vals or any(v <= 0 for v in vals) or vals != sorted(vals):
            raise ConfigError("sweep.values: must be positive and ascending")


@dataclass(frozen=True)
class SweepRecord:
    scheme: str
    axis: str
    value: float          # axis units (J or Mbit)
    trial: int
    seed: int
    feasible: bool
    eta: float | None     # bits/J; None when infeasible
    bits: tuple | None    # per-user bits
    energy: tuple | None  # per-user J
    outer_iters: int
    inner_iters: int
    wall_ms: float


# ---------------------------------------------------------------------------
# config parsing

_SYSTEM_KEYS = {"frame_time_s", "bandwidth_mhz", "noise_power_mw", "eh_coeff"}
_USER_KEYS = {"cpu_cycles_per_bit", "capacitance_coeff", "f_max_ghz",
              "circuit_power_backscatter_mw", "circuit_power_active_mw",
              "sinr_threshold", "min_bits_mbit", "energy_budget_j"}
_CHANNEL_KEYS = {"pathloss_exponent", "rician_k_db", "ap_user_distance_m",
                 "interuser_distance_m"}
_SWEEP_KEYS = {"axis", "values", "schemes", "trials", "master_seed",
               "out_dir", "record_wall_time"}


def _reject_unknown(doc: dict, allowed: set, path: str):
    for key in doc:
        if key not in allowed:
            raise ConfigError(f"{path}{key}: unknown key")


def _number(doc: dict, key: str, default: float, path: str) -> float:
    val = doc.get(key, default)
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ConfigError(f"{path}{key}: expected a number")
    return float(val)


def parse_config(text: str) -> ExperimentConfig:
    """Parse a JSON experiment config, applying defaults for omitted fields.

    Unknown keys are rejected with the offending field path.  An empty
    document yields the default operating point.
    """
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected an object")
    _reject_unknown(doc, {"system", "users", "channel", "sweep"}, "")

    base = default_system()
    u0 = base.users[0]

    sys_doc = doc.get("system", {})
    if not isinstance(sys_doc, dict):
        raise ConfigError("system: expected an object")
    _reject_unknown(sys_doc, _SYSTEM_KEYS, "system.")
    frame_time = _number(sys_doc, "frame_time_s", base.frame_time, "system.")
    bandwidth = _number(sys_doc, "bandwidth_mhz", base.bandwidth / 1e6, "system.") * 1e6
    noise = _number(sys_doc, "noise_power_mw", base.noise_power * 1e3, "system.") * 1e-3
    eh = _number(sys_doc, "eh_coeff", base.eh_coeff, "system.")

    usr_doc = doc.get("users", {})
    if not isinstance(usr_doc, dict):
        raise ConfigError("users: expected an object")
    _reject_unknown(usr_doc, _USER_KEYS, "users.")
    user = replace(
        u0,
        cpu_cycles_per_bit=_number(usr_doc, "cpu_cycles_per_bit",
                                   u0.cpu_cycles_per_bit, "users."),
        capacitance_coeff=_number(usr_doc, "capacitance_coeff",
                                  u0.capacitance_coeff, "users."),
        f_max=_number(usr_doc, "f_max_ghz", u0.f_max / 1e9, "users.") * 1e9,
        circuit_power_backscatter=_number(
            usr_doc, "circuit_power_backscatter_mw",
            u0.circuit_power_backscatter * 1e3, "users.") * 1e-3,
        circuit_power_active=_number(
            usr_doc, "circuit_power_active_mw",
            u0.circuit_power_active * 1e3, "users.") * 1e-3,
        sinr_threshold=_number(usr_doc, "sinr_threshold",
                               u0.sinr_threshold, "users."),
        min_bits=_number(usr_doc, "min_bits_mbit",
                         u0.min_bits / 1e6, "users.") * 1e6,
        energy_budget=_number(usr_doc, "energy_budget_j",
                              u0.energy_budget, "users."),
    )

    ch_doc = doc.get("channel", {})
    if not isinstance(ch_doc, dict):
        raise ConfigError("channel: expected an object")
    _reject_unknown(ch_doc, _CHANNEL_KEYS, "channel.")
    ch_base = ChannelGenConfig()

    def _pair(key, default):
        val = ch_doc.get(key, list(default))
        if (not isinstance(val, (list, tuple)) or len(val) != 2
                or not all(isinstance(v, (int, float)) for v in val)):
            raise ConfigError(f"channel.{key}: expected [lo, hi]")
        return (float(val[0]), float(val[1]))

    sw_doc = doc.get("sweep", {})
    if not isinstance(sw_doc, dict):
        raise ConfigError("sweep: expected an object")
    _reject_unknown(sw_doc, _SWEEP_KEYS, "sweep.")
    axis = sw_doc.get("axis", "energy")
    if axis not in AXES:
        raise ConfigError(f"sweep.axis: must be one of {AXES}")
    values = sw_doc.get("values",
                        list(DEFAULT_ENERGY_VALUES if axis == "energy"
                             else DEFAULT_BITS_VALUES))
    if not isinstance(values, (list, tuple)):
        raise ConfigError("sweep.values: expected an array")
    scheme_names = sw_doc.get("schemes", [s.value for s in Scheme])
    if not isinstance(scheme_names, (list, tuple)):
        raise ConfigError("sweep.schemes: expected an array")
    try:
        schemes = tuple(Scheme(name) for name in scheme_names)
    except ValueError as exc:
        raise ConfigError(f"sweep.schemes: {exc}") from exc
    trials = sw_doc.get("trials", 200)
    if not isinstance(trials, int) or isinstance(trials, bool):
        raise ConfigError("sweep.trials: expected an integer")
    master_seed = sw_doc.get("master_seed", 0)
    if not isinstance(master_seed, int) or isinstance(master_seed, bool):
        raise ConfigError("sweep.master_seed: expected an integer")
    record_wall = sw_doc.get("record_wall_time", True)
    if not isinstance(record_wall, bool):
        raise ConfigError("sweep.record_wall_time: expected a boolean")

    try:
        system = SystemParams(frame_time=frame_time, bandwidth=bandwidth,
                              noise_power=noise, eh_coeff=eh,
                              users=(user, user))
        channel = ChannelGenConfig(
            pathloss_exponent=_number(ch_doc, "pathloss_exponent",
                                      ch_base.pathloss_exponent, "channel."),
            rician_k_db=_number(ch_doc, "rician_k_db",
                                ch_base.rician_k_db, "channel."),
            ap_user_distance_range=_pair("ap_user_distance_m",
                                         ch_base.ap_user_distance_range),
            interuser_distance_range=_pair("interuser_distance_m",
                                           ch_base.interuser_distance_range),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(system=system, channel=channel, axis=axis,
                            values=tuple(float(v) for v in values),
                            schemes=schemes, trials=trials,
                            master_seed=master_seed,
                            out_dir=str(sw_doc.get("out_dir", "results")),
                            record_wall_time=record_wall)


# ---------------------------------------------------------------------------
# sweep execution


def trial_seed(master_seed: int, trial: int) -> int:
    """Stable per-trial seed: adding trials never perturbs earlier ones."""
    digest = hashlib.sha256(f"{master_seed}:{trial}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def apply_axis(system: SystemParams, axis: str, value: float) -> SystemParams:
    if axis == "energy":
        return system.with_energy_budget(value)            # J
    return system.with_min_bits(value * 1e6)               # Mbit -> bits


def run_sweep(cfg: ExperimentConfig,
              tols: SolverTolerances | None = None) -> list:
    """Run the Monte Carlo sweep; every scheme inside a (value, trial) cell
    sees the identical channel realization (paired comparison)."""
    records = []
    seeds = [trial_seed(cfg.master_seed, t) for t in range(cfg.trials)]
    channels = [draw_channel(s, cfg.channel) for s in seeds]
    for value in cfg.values:
        system = apply_axis(cfg.system, cfg.axis, value)
        for trial in range(cfg.trials):
            ch = channels[trial]
            for scheme in cfg.schemes:
                t0 = time.perf_counter()
                rep = alternating_solve(system, ch, scheme, tols)
                wall = ((time.perf_counter() - t0) * 1e3
                        if cfg.record_wall_time else 0.0)
                if rep.feasible:
                    records.append(SweepRecord(
                        scheme.value, cfg.axis, value, trial, seeds[trial],
                        True, rep.eta,
                        tuple(rep.metrics.total_bits),
                        tuple(rep.metrics.total_energy),
                        rep.outer_iterations, sum(rep.inner_iterations), wall))
                else:
                    records.append(SweepRecord(
                        scheme.value, cfg.axis, value, trial, seeds[trial],
                        False, None, None, None,
                        rep.outer_iterations, sum(rep.inner_iterations), wall))
    records.sort(key=lambda r: (r.scheme, r.value, r.trial))
    return records


def summarize(records: list) -> list:
    """Per (scheme, axis, value): mean/stddev CE over feasible trials and the
    infeasible count.  Stddev is the population value; empty cells get NaN."""
    cells = {}
    for r in records:
        cells.setdefault((r.scheme, r.axis, r.value), []).append(r)
    out = []
    for (scheme, axis, value) in sorted(cells):
        rs = cells[(scheme, axis, value)]
        etas = [r.eta for r in rs if r.feasible]
        n = len(etas)
        if n:
            mean = sum(etas) / n
            std = math.sqrt(sum((e - mean) ** 2 for e in etas) / n)
        else:
            mean = std = math.nan
        out.append((scheme, axis, value, mean, std, n, len(rs) - n))
    return out


# ---------------------------------------------------------------------------
# persistence

_PLOT_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Render CE-vs-axis curves from summary.csv (one line per scheme).\"\"\"
import csv
import sys
from collections import defaultdict

path = sys.argv[1] if len(sys.argv) > 1 else "summary.csv"
curves = defaultdict(list)
with open(path, newline="") as fh:
    for row in csv.DictReader(fh):
        if row["mean_eta"] not in ("", "nan"):
            curves[row["scheme"]].append(
                (float(row["value"]), float(row["mean_eta"])))

try:
    import matplotlib.pyplot as plt
except ImportError:
    for scheme, pts in sorted(curves.items()):
        print(scheme)
        for x, y in sorted(pts):
            print(f"  {x:g}\\t{y:.6g}")
    sys.exit(0)

for scheme, pts in sorted(curves.items()):
    xs, ys = zip(*sorted(pts))
    plt.plot(xs, ys, marker="o", label=scheme)
plt.xlabel("axis value")
plt.ylabel("mean computation efficiency (bits/J)")
plt.legend()
plt.grid(True)
plt.savefig("ce_curves.png", dpi=150)
print("wrote ce_curves.png")
"""


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def emit_results(records: list, out_dir) -> dict:
    """Write records.csv, summary.csv and plot_summary.py under out_dir."""
    if not records:
        raise ValueError("no records to emit")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        rec_path = out / "records.csv"
        with open(rec_path, "w", newline="") as fh:
            fh.write(RECORDS_HEADER + "\n")
            for r in records:
                bits = r.bits or (None, None)
                en = r.energy or (None, None)
                fh.write(",".join([
                    r.scheme, r.axis, _fmt(r.value), str(r.trial), str(r.seed),
                    "1" if r.feasible else "0", _fmt(r.eta),
                    _fmt(bits[0]), _fmt(bits[1]), _fmt(en[0]), _fmt(en[1]),
                    str(r.outer_iters), str(r.inner_iters), _fmt(r.wall_ms),
                ]) + "\n")
        sum_path = out / "summary.csv"
        with open(sum_path, "w", newline="") as fh:
            fh.write(SUMMARY_HEADER + "\n")
            for scheme, axis, value, mean, std, nf, ni in summarize(records):
                fh.write(",".join([
                    scheme, axis, _fmt(value),
                    "nan" if math.isnan(mean) else _fmt(mean),
                    "nan" if math.isnan(std) else _fmt(std),
                    str(nf), str(ni)]) + "\n")
        plot_path = out / "plot_summary.py"
        plot_path.write_text(_PLOT_SCRIPT)
    except OSError as exc:
        raise OSError(f"cannot write results under {out}: {exc}") from exc
    return {"records": rec_path, "summary": sum_path, "plot": plot_path}


def load_records(path) -> list:
    """Inverse of emit_results for records.csv (exact round trip)."""
    records = []
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\n")
        if header != RECORDS_HEADER:
            raise ValueError(f"unexpected records header in {path}")
        for row in csv.reader(fh):
            feasible = row[5] == "1"
            records.append(SweepRecord(
                scheme=row[0], axis=row[1], value=float(row[2]),
                trial=int(row[3]), seed=int(row[4]), feasible=feasible,
                eta=float(row[6]) if row[6] else None,
                bits=(float(row[7]), float(row[8])) if row[7] else None,
                energy=(float(row[9]), float(row[10])) if row[9] else None,
                outer_iters=int(row[11]), inner_iters=int(row[12]),
                wall_ms=float(row[13])))
    return records
