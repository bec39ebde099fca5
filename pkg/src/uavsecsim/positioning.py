"""UAV placement: horizontal clustering plus a best-response altitude game.

The horizontal layout comes from one k-means run over the legitimate nodes.
Altitudes then play a synchronous game on a fixed grid: each round every UAV
scores every grid level by the summed association metric of its own served
nodes (other UAVs frozen at their round-start positions), and moves to a
maximizer if that strictly improves its score. Raising a UAV improves its
served links and its leakage to the strongest eavesdropper at the same time,
which is why the score has an interior optimum instead of pinning to a band
edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import EnvParams, avg_pathloss, channel_gain_matrix
from .radio import (
    PHI_NO_EAVESDROPPER,
    AssociationArray,
    SystemState,
)
from .scenario import Region, Scenario


def kmeans_2d(
    points: np.ndarray,
    k: int,
    rng: np.random.Generator,
    max_iters: int = 100,
    tol: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray]:
    """Plain Lloyd iteration on 2D points.

    Centroids start at k distinct data points (jittered duplicates when
    k exceeds the point count). An empty cluster is reseeded at the point
    currently farthest from its centroid. Stops when no centroid moves more
    than tol meters.

    Returns (centroids (k, 2), labels (n,)).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = pts.shape[0]
    if n == 0:
        raise ValueError("cannot cluster zero points")
    if k < 1:
        raise ValueError("need at least one cluster")

    if k <= n:
        centroids = pts[rng.choice(n, size=k, replace=False)].copy()
    else:
        extra = pts[rng.choice(n, size=k - n)] + rng.normal(scale=1e-3, size=(k - n, 2))
        centroids = np.vstack([pts, extra])

    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iters):
        d2 = ((pts[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        new_centroids = centroids.copy()
        member_d2 = d2[np.arange(n), labels].copy()
        for j in range(k):
            mask = labels == j
            if mask.any():
                new_centroids[j] = pts[mask].mean(axis=0)
            else:
                far = int(np.argmax(member_d2))
                new_centroids[j] = pts[far]
                member_d2[far] = -np.inf  # keep later empty clusters off this point
        shift = np.abs(new_centroids - centroids).max()
        centroids = new_centroids
        if shift <= tol:
            break
    d2 = ((pts[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    return centroids, labels


def initial_uav_positions(centroids: np.ndarray, region: Region) -> np.ndarray:
    """Stack centroids with the middle grid altitude."""
    grid = region.altitude_grid()
    z0 = grid[len(grid) // 2]
    centroids = np.asarray(centroids, dtype=float).reshape(-1, 2)
    return np.column_stack([centroids, np.full(centroids.shape[0], z0)])


def _score_over_grid(state: SystemState, m: int) -> np.ndarray:
    """Summed served-node metric of UAV m at every grid altitude, others fixed.

    Even power spread makes the interference terms subchannel-independent and,
    crucially, independent of UAV m's own altitude, so only the candidate
    gain rows need recomputing.
    """
    grid = state.region.altitude_grid()
    members = state.assoc.served_by(m)
    if len(members) == 0:
        return np.zeros(len(grid))
    scen = state.scenario
    nodes = scen.positions
    gamma_u = state.uniform_power_level()

    r = np.hypot(
        nodes[:, 0] - state.uav_positions[m, 0], nodes[:, 1] - state.uav_positions[m, 1]
    )
    g_cand = 1.0 / avg_pathloss(grid[:, None], r[None, :], state.env)  # (n_z, N)
    total = gamma_u * state.gains.sum(axis=0)
    i_m = total - gamma_u * state.gains[m]  # (N,) interference seen opposite UAV m
    eff = g_cand / (i_m + 1.0)[None, :]

    member_global = scen.legit_idx[members]
    eff_leg = eff[:, member_global]  # (n_z, |members|)
    if scen.n_eave == 0:
        return np.full(len(grid), PHI_NO_EAVESDROPPER * len(members))
    eff_star = eff[:, scen.eave_idx].max(axis=1)  # (n_z,)
    return np.log2(eff_leg).sum(axis=1) - len(members) * np.log2(eff_star)


def _grid_index(grid: np.ndarray, z: float) -> int:
    idx = int(np.argmin(np.abs(grid - z)))
    if not np.isclose(grid[idx], z):
        raise ValueError(f"altitude {z} is not on the grid")
    return idx


def altitude_payoffs(state: SystemState, m: int) -> np.ndarray:
    """Score change of UAV m for each grid altitude relative to its current one."""
    grid = state.region.altitude_grid()
    scores = _score_over_grid(state, m)
    return scores - scores[_grid_index(grid, state.uav_positions[m, 2])]


def altitude_payoff(state: SystemState, m: int, z_candidate: float) -> float:
    """Score change for one candidate altitude; zero at the current altitude."""
    grid = state.region.altitude_grid()
    return float(altitude_payoffs(state, m)[_grid_index(grid, z_candidate)])


@dataclass
class AltitudeResult:
    state: SystemState
    converged: bool
    # Rounds in which at least one UAV moved; the final no-move pass that
    # certifies the equilibrium stops the game without being counted.
    rounds: int
    moves: int


def br_altitude(
    state: SystemState, rng: np.random.Generator, max_rounds: int = 10
) -> AltitudeResult:
    """Synchronous best-response altitude game on the grid.

    Every round each UAV evaluates the grid against the round-start fleet,
    then all positive-gain UAVs jump to a payoff maximizer at once (random
    choice among exact ties). No positive gain anywhere means the altitudes
    are a pure Nash equilibrium.
    """
    grid = state.region.altitude_grid()
    converged = False
    rounds = 0
    total_moves = 0

    for rnd in range(1, max_rounds + 1):
        moves: list[tuple[int, float]] = []
        for m in range(state.n_uavs):
            f = altitude_payoffs(state, m)
            best = f.max()
            if best > 0.0:
                candidates = np.flatnonzero(f == best)
                pick = candidates[0] if len(candidates) == 1 else rng.choice(candidates)
                moves.append((m, float(grid[pick])))
        if not moves:
            converged = True
            break
        positions = state.uav_positions.copy()
        for m, z in moves:
            positions[m, 2] = z
        state = state.with_uav_positions(positions)
        total_moves += len(moves)
        rounds = rnd

    return AltitudeResult(state=state, converged=converged, rounds=rounds, moves=total_moves)


def certify_altitude_equilibrium(state: SystemState) -> list[tuple[int, int, float]]:
    """Profitable unilateral altitude moves left: (uav, grid index, gain)."""
    violations = []
    for m in range(state.n_uavs):
        f = altitude_payoffs(state, m)
        for idx in np.flatnonzero(f > 0.0):
            violations.append((m, int(idx), float(f[idx])))
    return violations


def adapted_greedy_place(
    scenario: Scenario,
    region: Region,
    env: EnvParams,
    n_uavs: int,
    n_subchannels: int,
    gamma_p: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, AssociationArray]:
    """Joint placement and association benchmark, one UAV at a time.

    Each step clusters the still-unassociated legitimate nodes, puts the next
    UAV over the largest cluster's centroid, tries every grid altitude, and
    keeps the one whose top-C unassociated metrics sum highest; those nodes
    are then bound to its subchannels. Already-placed UAVs radiate the even
    power spread and contribute interference; unplaced ones do not exist yet.
    """
    legit_idx = scenario.legit_idx
    eave_idx = scenario.eave_idx
    nodes = scenario.positions
    grid = region.altitude_grid()
    gamma_u = gamma_p / n_subchannels

    assoc = AssociationArray.empty(len(legit_idx), n_uavs, n_subchannels)
    positions = np.zeros((n_uavs, 3))
    unbound = list(range(len(legit_idx)))
    placed_gains: list[np.ndarray] = []  # gain rows of already-placed UAVs

    center = np.array(
        [(region.x_min + region.x_max) / 2.0, (region.y_min + region.y_max) / 2.0]
    )

    for m in range(n_uavs):
        if not unbound:
            positions[m] = (*center, grid[len(grid) // 2])
            placed_gains.append(
                channel_gain_matrix(positions[m][None, :], nodes, env)[0]
            )
            continue

        remaining_pts = nodes[legit_idx[unbound]]
        k = min(n_uavs - m, len(unbound))
        centroids, labels = kmeans_2d(remaining_pts, k, rng)
        counts = np.bincount(labels, minlength=k)
        xy = centroids[int(np.argmax(counts))]  # argmax tie: lowest cluster index

        base_interf = (
            gamma_u * np.sum(placed_gains, axis=0) if placed_gains else np.zeros(len(nodes))
        )
        r = np.hypot(nodes[:, 0] - xy[0], nodes[:, 1] - xy[1])
        g_cand = 1.0 / avg_pathloss(grid[:, None], r[None, :], env)  # (n_z, N)
        eff = g_cand / (base_interf + 1.0)[None, :]

        unbound_global = legit_idx[unbound]
        if len(eave_idx) > 0:
            eff_star = eff[:, eave_idx].max(axis=1)
            phi_cand = np.log2(eff[:, unbound_global] / eff_star[:, None])
        else:
            phi_cand = np.full((len(grid), len(unbound)), PHI_NO_EAVESDROPPER)

        take = min(n_subchannels, len(unbound))
        # Sum of the top-take metrics at each altitude; ties keep the lowest level.
        top_sum = -np.sort(-phi_cand, axis=1)[:, :take].sum(axis=1)
        z_idx = int(np.argmax(top_sum))
        positions[m] = (*xy, grid[z_idx])

        order = np.argsort(-phi_cand[z_idx], kind="stable")[:take]
        for c, pick in enumerate(order):
            assoc.assign(unbound[int(pick)], m, c)
        for pick in sorted((int(p) for p in order), reverse=True):
            del unbound[pick]

        placed_gains.append(channel_gain_matrix(positions[m][None, :], nodes, env)[0])

    return positions, assoc


def deployment_rows(state: SystemState) -> list[tuple[int, float, float, float]]:
    return [
        (m, float(x), float(y), float(z))
        for m, (x, y, z) in enumerate(state.uav_positions)
    ]
