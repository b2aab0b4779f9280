"""Scenario parameter containers and the default operating point.

All values are stored in SI units (W, J, s, Hz, bits).  Config files use the
more convenient mW / MHz / Mbit units and are converted at parse time
(see recipmec.harness).
"""
from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class UserParams:
    cpu_cycles_per_bit: float        # cycles/bit
    capacitance_coeff: float         # effective switched-capacitance energy scale
    f_max: float                     # Hz
    circuit_power_backscatter: float  # W
    circuit_power_active: float      # W
    sinr_threshold: float            # dimensionless, >= 1
    min_bits: float                  # bits
    energy_budget: float             # J

    def __post_init__(self):
        for name in ("cpu_cycles_per_bit", "capacitance_coeff", "f_max",
                     "circuit_power_backscatter", "circuit_power_active",
                     "sinr_threshold", "energy_budget"):
            if getattr(self, name) <= 0:
                raise ValueError(f"UserParams.{name} must be strictly positive")
        if self.min_bits < 0:
            raise ValueError("UserParams.min_bits must be nonnegative")
        if self.sinr_threshold < 1:
            raise ValueError("UserParams.sinr_threshold must be >= 1")


@dataclass(frozen=True)
class SystemParams:
    frame_time: float     # s
    bandwidth: float      # Hz
    noise_power: float    # W
    eh_coeff: float       # in (0, 1]
    users: tuple[UserParams, UserParams]

    def __post_init__(self):
        if self.frame_time <= 0:
            raise ValueError("frame_time must be positive")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.noise_power <= 0:
            raise ValueError("noise_power must be positive")
        if not 0 < self.eh_coeff <= 1:
            raise ValueError("eh_coeff must be in (0, 1]")
        if len(self.users) != 2:
            raise ValueError("exactly two users required")

    def with_energy_budget(self, budget: float) -> "SystemParams":
        users = tuple(replace(u, energy_budget=budget) for u in self.users)
        return replace(self, users=users)

    def with_min_bits(self, bits: float) -> "SystemParams":
        users = tuple(replace(u, min_bits=bits) for u in self.users)
        return replace(self, users=users)


@dataclass(frozen=True)
class ChannelGenConfig:
    pathloss_exponent: float = 2.2
    rician_k_db: float = 2.8
    ap_user_distance_range: tuple[float, float] = (2.0, 10.0)
    interuser_distance_range: tuple[float, float] = (1.0, 4.0)

    def __post_init__(self):
        if self.pathloss_exponent <= 0:
            raise ValueError("pathloss_exponent must be positive")
        for rng in (self.ap_user_distance_range, self.interuser_distance_range):
            lo, hi = rng
            if lo <= 0 or hi < lo:
                raise ValueError("distance range bounds must be positive and ordered")


def default_user() -> UserParams:
    """Per-user parameters of the default simulation operating point."""
    return UserParams(
        cpu_cycles_per_bit=1000.0,
        capacitance_coeff=1e-26,
        f_max=1e9,
        circuit_power_backscatter=1e-4,   # 0.1 mW
        circuit_power_active=1e-2,        # 10 mW
        sinr_threshold=100.0,
        min_bits=2e5,                     # 0.2 Mbit
        energy_budget=1.0,
    )


def default_system() -> SystemParams:
    """Default scenario: T=1 s, B=0.1 MHz, sigma^2=1e-8 mW, zeta=0.8."""
    return SystemParams(
        frame_time=1.0,
        bandwidth=1e5,
        noise_power=1e-11,
        eh_coeff=0.8,
        users=(default_user(), default_user()),
    )
