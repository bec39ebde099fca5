"""Random problem instances: service region, node placement, role split, fleet sizing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ROLE_LEGITIMATE = "L"
ROLE_EAVESDROPPER = "E"


class EmptyLegitimateSetError(ValueError):
    """Raised when an operation needs at least one legitimate node and none exist."""


@dataclass(frozen=True)
class Region:
    """Rectangular ground area with a discretized flight-altitude band.

    Horizontal extents may be zero-width (sampling then collapses onto a line),
    the altitude band must be a proper interval above ground.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    z_min: float
    z_max: float
    n_altitude_levels: int = 8

    def __post_init__(self) -> None:
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError("inverted horizontal bounds")
        if not 0.0 < self.z_min < self.z_max:
            raise ValueError("altitude band must satisfy 0 < z_min < z_max")
        if self.n_altitude_levels < 2:
            raise ValueError("need at least two altitude levels")

    def altitude_grid(self) -> np.ndarray:
        """Evenly spaced candidate altitudes, both endpoints included."""
        return np.linspace(self.z_min, self.z_max, self.n_altitude_levels)

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return (
            (pts[:, 0] >= self.x_min)
            & (pts[:, 0] <= self.x_max)
            & (pts[:, 1] >= self.y_min)
            & (pts[:, 1] <= self.y_max)
        )


@dataclass(frozen=True)
class RandomStream:
    """Seed plus stream id, realized as an independent PCG64 generator.

    The same (seed, stream) pair yields the same draw sequence on every
    platform, which is what makes paired experiment designs reproducible.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((self.seed, self.stream)))
        )


@dataclass
class Scenario:
    """One realization of ground nodes: 2D positions and a legitimate/eavesdropper split."""

    positions: np.ndarray  # (N, 2) float
    legit_mask: np.ndarray  # (N,) bool, True for legitimate nodes
    q: float = 0.5  # probability a node is legitimate

    def __post_init__(self) -> None:
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        self.legit_mask = np.asarray(self.legit_mask, dtype=bool).reshape(-1)
        if self.positions.shape[0] != self.legit_mask.shape[0]:
            raise ValueError("positions and roles disagree on node count")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("q must lie in [0, 1]")

    @property
    def n_nodes(self) -> int:
        return self.positions.shape[0]

    @property
    def n_legit(self) -> int:
        return int(self.legit_mask.sum())

    @property
    def n_eave(self) -> int:
        return self.n_nodes - self.n_legit

    @property
    def legit_idx(self) -> np.ndarray:
        return np.flatnonzero(self.legit_mask)

    @property
    def eave_idx(self) -> np.ndarray:
        return np.flatnonzero(~self.legit_mask)

    def to_text(self) -> str:
        """One node per line: x,y,role with full float precision."""
        lines = []
        for (x, y), legit in zip(self.positions, self.legit_mask):
            role = ROLE_LEGITIMATE if legit else ROLE_EAVESDROPPER
            lines.append(f"{float(x)!r},{float(y)!r},{role}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, q: float = 0.5) -> "Scenario":
        positions = []
        mask = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            x, y, role = line.split(",")
            if role not in (ROLE_LEGITIMATE, ROLE_EAVESDROPPER):
                raise ValueError(f"unknown role {role!r}")
            positions.append((float(x), float(y)))
            mask.append(role == ROLE_LEGITIMATE)
        return cls(np.array(positions, dtype=float).reshape(-1, 2), np.array(mask, dtype=bool), q)


def sample_nodes(region: Region, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n node positions uniformly over the region's ground area."""
    if n <= 0:
        raise ValueError("node count must be positive")
    x = rng.uniform(region.x_min, region.x_max, size=n)
    y = rng.uniform(region.y_min, region.y_max, size=n)
    return np.column_stack([x, y])


def partition_roles(n: int, q: float, rng: np.random.Generator) -> np.ndarray:
    """Independent Bernoulli(q) split; True marks a legitimate node."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    if n <= 0:
        raise ValueError("node count must be positive")
    return rng.random(n) < q


def sample_scenario(region: Region, n: int, q: float, rng: np.random.Generator) -> Scenario:
    positions = sample_nodes(region, n, rng)
    mask = partition_roles(n, q, rng)
    return Scenario(positions, mask, q)


def choose_uav_count(n_legit: int, n_subchannels: int) -> int:
    """Smallest fleet able to serve every legitimate node, one subchannel each."""
    if n_subchannels < 1:
        raise ValueError("need at least one subchannel")
    if n_legit < 1:
        raise EmptyLegitimateSetError("no legitimate nodes to serve")
    return -(-n_legit // n_subchannels)
