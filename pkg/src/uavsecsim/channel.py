"""Air-to-ground average channel: sigmoid line-of-sight probability, mean pathloss, gain.

All links are UAV-to-ground. Distances are in meters, angles internal to the
model are in degrees, gains are linear power ratios.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EnvParams:
    """Propagation constants of the sigmoid LoS model and the excess-loss mix.

    alpha_g is the ground-to-ground loss exponent. It is carried so presets
    stay complete, but no ground-to-ground link exists in this system model.
    """

    psi: float
    omega: float
    eta_los: float
    eta_nlos: float
    alpha_j: float
    alpha_g: float = 0.3

    def __post_init__(self) -> None:
        if self.psi <= 0 or self.omega <= 0:
            raise ValueError("sigmoid constants must be positive")
        if self.eta_los <= 0 or self.eta_nlos < self.eta_los:
            raise ValueError("excess losses must satisfy 0 < eta_los <= eta_nlos")
        if self.alpha_j <= 0:
            raise ValueError("air-to-ground exponent must be positive")


# Dense-urban propagation preset.
URBAN = EnvParams(psi=9.61, omega=0.16, eta_los=1.0, eta_nlos=20.0, alpha_j=0.3, alpha_g=0.3)


def los_probability(z, r, env: EnvParams = URBAN):
    """Probability of a line-of-sight link from altitude z to ground range r.

    Sigmoid in the elevation angle: directly overhead (r = 0) the elevation is
    90 degrees and the probability approaches one; toward the horizon it falls
    to 1 / (1 + psi * exp(omega * psi)).
    """
    z = np.asarray(z, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(z <= 0):
        raise ValueError("altitude must be positive")
    if np.any(r < 0):
        raise ValueError("ground range cannot be negative")
    elevation_deg = np.degrees(np.arctan2(z, r))
    out = 1.0 / (1.0 + env.psi * np.exp(-env.omega * (elevation_deg - env.psi)))
    return out if out.ndim else float(out)


def avg_pathloss(z, r, env: EnvParams = URBAN):
    """Mean pathloss: distance term times the LoS/NLoS excess-loss mix."""
    p_los = los_probability(z, r, env)
    z = np.asarray(z, dtype=float)
    r = np.asarray(r, dtype=float)
    excess = p_los * env.eta_los + (1.0 - p_los) * env.eta_nlos
    out = (z * z + r * r) ** (env.alpha_j / 2.0) * excess
    return out if np.ndim(out) else float(out)


def channel_gain(uav_xyz, node_xy, env: EnvParams = URBAN) -> float:
    """Average channel power gain of one UAV-to-node link."""
    uav = np.asarray(uav_xyz, dtype=float)
    node = np.asarray(node_xy, dtype=float)
    r = float(np.hypot(uav[0] - node[0], uav[1] - node[1]))
    return 1.0 / avg_pathloss(uav[2], r, env)


def channel_gain_matrix(
    uav_positions: np.ndarray, node_positions: np.ndarray, env: EnvParams = URBAN
) -> np.ndarray:
    """Gain of every UAV-to-node link, shape (n_uavs, n_nodes)."""
    uavs = np.asarray(uav_positions, dtype=float).reshape(-1, 3)
    nodes = np.asarray(node_positions, dtype=float).reshape(-1, 2)
    dx = uavs[:, 0][:, None] - nodes[:, 0][None, :]
    dy = uavs[:, 1][:, None] - nodes[:, 1][None, :]
    r = np.hypot(dx, dy)
    z = uavs[:, 2][:, None]
    return 1.0 / avg_pathloss(np.broadcast_to(z, r.shape), r, env)
