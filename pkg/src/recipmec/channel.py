"""Channel realizations: distance-dependent path loss with Rician fading."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ChannelGenConfig


@dataclass(frozen=True)
class ChannelRealization:
    """Squared channel magnitudes for one trial (dimensionless power gains)."""
    gain_user_ap: tuple[float, float]   # |h_1|^2, |h_2|^2
    gain_interuser: float               # |g|^2

    def __post_init__(self):
        if any(g <= 0 for g in self.gain_user_ap) or self.gain_interuser <= 0:
            raise ValueError("channel power gains must be strictly positive")


def path_loss_gain(d: float, beta: float) -> float:
    """Power gain d^(-beta) at distance d meters."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    return d ** (-beta)


def _rician_power(rng: np.random.Generator, k_linear: float, n: int) -> np.ndarray:
    """|v|^2 for unit-mean-power Rician fading with linear K factor."""
    # LoS amplitude sqrt(K/(K+1)), scattered component variance 1/(K+1)
    los = np.sqrt(k_linear / (k_linear + 1.0))
    sigma = np.sqrt(1.0 / (2.0 * (k_linear + 1.0)))
    phase = rng.uniform(0.0, 2.0 * np.pi, n)
    v = los * np.exp(1j * phase) + sigma * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return np.abs(v) ** 2


def draw_channel(seed, cfg: ChannelGenConfig) -> ChannelRealization:
    """Draw one channel realization; deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    k_lin = 10.0 ** (cfg.rician_k_db / 10.0)
    d_ap = rng.uniform(*cfg.ap_user_distance_range, 2)
    d_uu = rng.uniform(*cfg.interuser_distance_range)
    fades = _rician_power(rng, k_lin, 3)
    h1 = path_loss_gain(d_ap[0], cfg.pathloss_exponent) * fades[0]
    h2 = path_loss_gain(d_ap[1], cfg.pathloss_exponent) * fades[1]
    g = path_loss_gain(d_uu, cfg.pathloss_exponent) * fades[2]
    return ChannelRealization(gain_user_ap=(float(h1), float(h2)), gain_interuser=float(g))
