"""Shared builders for small deterministic system states."""

import numpy as np

from uavsecsim.channel import URBAN
from uavsecsim.radio import AssociationArray, PowerMatrix, SystemState
from uavsecsim.scenario import Region, Scenario


def default_region(n_altitude_levels: int = 8) -> Region:
    return Region(0.0, 1000.0, 0.0, 1000.0, 20.0, 300.0, n_altitude_levels)


def build_state(
    node_xy,
    legit_mask,
    uav_xyz,
    n_subchannels: int = 2,
    gamma_p: float = 100.0,
    assoc_pairs=None,
    region: Region | None = None,
) -> SystemState:
    """Assemble a SystemState from plain lists; optionally pre-assign links."""
    scenario = Scenario(np.asarray(node_xy, dtype=float), np.asarray(legit_mask, dtype=bool))
    region = region or default_region()
    uav_xyz = np.asarray(uav_xyz, dtype=float).reshape(-1, 3)
    assoc = AssociationArray.empty(scenario.n_legit, uav_xyz.shape[0], n_subchannels)
    for l, m, c in assoc_pairs or []:
        assoc.assign(l, m, c)
    powers = PowerMatrix.uniform(uav_xyz.shape[0], n_subchannels, gamma_p)
    return SystemState.build(scenario, region, URBAN, uav_xyz, assoc, powers)


def random_state(
    rng: np.random.Generator,
    n_legit: int = 6,
    n_eave: int = 3,
    n_uavs: int = 2,
    n_subchannels: int = 4,
    gamma_p: float = 100.0,
    associate: bool = False,
) -> SystemState:
    """Random nodes and UAVs in the default region; association empty or random."""
    region = default_region()
    n = n_legit + n_eave
    xy = np.column_stack([rng.uniform(0, 1000, n), rng.uniform(0, 1000, n)])
    mask = np.zeros(n, dtype=bool)
    mask[rng.choice(n, size=n_legit, replace=False)] = True
    grid = region.altitude_grid()
    uav_xyz = np.column_stack(
        [rng.uniform(0, 1000, n_uavs), rng.uniform(0, 1000, n_uavs), rng.choice(grid, n_uavs)]
    )
    state = build_state(xy, mask, uav_xyz, n_subchannels, gamma_p, region=region)
    if associate:
        resources = [(m, c) for m in range(n_uavs) for c in range(n_subchannels)]
        picks = rng.choice(len(resources), size=min(n_legit, len(resources)), replace=False)
        for l, r in enumerate(picks):
            m, c = resources[int(r)]
            state.assoc.assign(l, m, c)
    return state
