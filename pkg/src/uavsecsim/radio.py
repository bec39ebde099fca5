"""Link-level quantities over a full system state.

Everything here is expressed in noise-normalized units: a transmit power p
enters the SINR as p * gain, so the noise floor never appears explicitly.
Node indices come in two flavors and the distinction matters:

* global index: position in Scenario.positions (legitimate and eavesdropper),
* legit-local index: position within the legitimate subset, used by the
  association array whose first axis only covers legitimate nodes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import EnvParams, channel_gain_matrix
from .scenario import EmptyLegitimateSetError, Region, Scenario

# Secrecy-metric cap used when no eavesdropper exists (bits). Finite stand-in
# for an infinitely favorable log-ratio so downstream games stay well defined.
PHI_NO_EAVESDROPPER = 60.0
# Payoff assigned to a node holding no resource (bits). Low enough that any
# first association is an improvement for every realizable geometry.
PHI_UNASSOCIATED = -60.0


@dataclass
class AssociationArray:
    """Node/UAV/subchannel assignment under the two exclusivity rules:

    each (uav, subchannel) resource serves at most one node and each node
    holds at most one resource.
    """

    node_of: np.ndarray  # (M, C) legit-local node index, -1 when the resource is free
    serving: np.ndarray  # (L, 2) columns [uav, subchannel], -1 when unassociated

    @classmethod
    def empty(cls, n_legit: int, n_uavs: int, n_subchannels: int) -> "AssociationArray":
        return cls(
            node_of=np.full((n_uavs, n_subchannels), -1, dtype=np.int64),
            serving=np.full((n_legit, 2), -1, dtype=np.int64),
        )

    @property
    def n_legit(self) -> int:
        return self.serving.shape[0]

    @property
    def n_uavs(self) -> int:
        return self.node_of.shape[0]

    @property
    def n_subchannels(self) -> int:
        return self.node_of.shape[1]

    def is_associated(self, l: int) -> bool:
        return self.serving[l, 0] >= 0

    def occupied(self, m: int, c: int) -> bool:
        return self.node_of[m, c] >= 0

    def occupancy(self) -> np.ndarray:
        return self.node_of >= 0

    def assign(self, l: int, m: int, c: int) -> None:
        if self.node_of[m, c] >= 0:
            raise ValueError(f"resource ({m}, {c}) already serves node {self.node_of[m, c]}")
        if self.serving[l, 0] >= 0:
            raise ValueError(f"node {l} already holds a resource")
        self.node_of[m, c] = l
        self.serving[l] = (m, c)

    def release(self, l: int) -> None:
        m, c = self.serving[l]
        if m >= 0:
            self.node_of[m, c] = -1
            self.serving[l] = (-1, -1)

    def move(self, l: int, m: int, c: int) -> None:
        self.release(l)
        self.assign(l, m, c)

    def served_by(self, m: int) -> np.ndarray:
        """Legit-local indices of the nodes on UAV m, ordered by subchannel."""
        row = self.node_of[m]
        return row[row >= 0]

    def dense(self) -> np.ndarray:
        """Materialize the (L, M, C) binary array."""
        a = np.zeros((self.n_legit, self.n_uavs, self.n_subchannels), dtype=np.int8)
        for l, (m, c) in enumerate(self.serving):
            if m >= 0:
                a[l, m, c] = 1
        return a

    def validate(self) -> None:
        dense = self.dense()
        if dense.sum(axis=0).max(initial=0) > 1:
            raise ValueError("a resource serves more than one node")
        if dense.sum(axis=(1, 2)).max(initial=0) > 1:
            raise ValueError("a node holds more than one resource")
        for l, (m, c) in enumerate(self.serving):
            if m >= 0 and self.node_of[m, c] != l:
                raise ValueError("serving map and occupancy map disagree")
        for m, c in zip(*np.nonzero(self.node_of >= 0)):
            if tuple(self.serving[self.node_of[m, c]]) != (m, c):
                raise ValueError("serving map and occupancy map disagree")

    def copy(self) -> "AssociationArray":
        return AssociationArray(self.node_of.copy(), self.serving.copy())


@dataclass
class PowerMatrix:
    """Per-(UAV, subchannel) transmit powers with a per-UAV budget."""

    gamma: np.ndarray  # (M, C) linear noise-normalized powers
    gamma_p: float  # per-UAV budget in the same units

    BUDGET_RTOL = 1e-9

    @classmethod
    def uniform(cls, n_uavs: int, n_subchannels: int, gamma_p: float) -> "PowerMatrix":
        level = gamma_p / n_subchannels
        return cls(np.full((n_uavs, n_subchannels), level, dtype=float), gamma_p)

    def validate(self) -> None:
        if np.any(self.gamma < 0):
            raise ValueError("negative transmit power")
        totals = self.gamma.sum(axis=1)
        if np.any(totals > self.gamma_p * (1.0 + self.BUDGET_RTOL)):
            raise ValueError(f"budget exceeded: {totals.max()} > {self.gamma_p}")

    def copy(self) -> "PowerMatrix":
        return PowerMatrix(self.gamma.copy(), self.gamma_p)


@dataclass
class SystemState:
    """Scenario, fleet positions, assignment and powers, with cached gains."""

    scenario: Scenario
    region: Region
    env: EnvParams
    uav_positions: np.ndarray  # (M, 3)
    assoc: AssociationArray
    powers: PowerMatrix
    gains: np.ndarray = field(default=None)  # (M, N), derived

    @classmethod
    def build(
        cls,
        scenario: Scenario,
        region: Region,
        env: EnvParams,
        uav_positions: np.ndarray,
        assoc: AssociationArray,
        powers: PowerMatrix,
    ) -> "SystemState":
        uav_positions = np.asarray(uav_positions, dtype=float).reshape(-1, 3)
        gains = channel_gain_matrix(uav_positions, scenario.positions, env)
        return cls(scenario, region, env, uav_positions, assoc, powers, gains)

    @property
    def n_uavs(self) -> int:
        return self.uav_positions.shape[0]

    def with_uav_positions(self, uav_positions: np.ndarray) -> "SystemState":
        return SystemState.build(
            self.scenario, self.region, self.env, uav_positions, self.assoc, self.powers
        )

    def with_assoc(self, assoc: AssociationArray) -> "SystemState":
        return replace(self, assoc=assoc)

    def with_powers(self, powers: PowerMatrix) -> "SystemState":
        return replace(self, powers=powers)

    def uniform_power_level(self) -> float:
        """Power per subchannel when the budget is spread evenly."""
        return self.powers.gamma_p / self.assoc.n_subchannels


def interference(powers: PowerMatrix, gains: np.ndarray, m: int, c: int, n: int) -> float:
    """Aggregate co-subchannel power at global node n from every UAV but m."""
    total = float(powers.gamma[:, c] @ gains[:, n])
    return total - float(powers.gamma[m, c] * gains[m, n])


def sinr(
    assoc: AssociationArray,
    powers: PowerMatrix,
    gains: np.ndarray,
    legit_idx: np.ndarray,
    l: int,
    m: int,
    c: int,
) -> float:
    """Uplink-equivalent SINR of legit-local node l on resource (m, c).

    Zero unless (m, c) actually serves l.
    """
    if assoc.node_of[m, c] != l:
        return 0.0
    n = int(legit_idx[l])
    i = interference(powers, gains, m, c, n)
    return float(powers.gamma[m, c] * gains[m, n] / (i + 1.0))


def strongest_eavesdropper(
    powers: PowerMatrix, gains: np.ndarray, eave_idx: np.ndarray, m: int, c: int
) -> tuple[int, float]:
    """Global index and SINR of the most capable eavesdropper on (m, c).

    Ties break toward the lowest node index. With no eavesdroppers returns
    (-1, 0.0), the perfect-secrecy regime.
    """
    if len(eave_idx) == 0:
        return -1, 0.0
    best_idx, best_val = -1, -np.inf
    for e in eave_idx:
        i = interference(powers, gains, m, c, int(e))
        val = powers.gamma[m, c] * gains[m, int(e)] / (i + 1.0)
        if val > best_val:
            best_idx, best_val = int(e), float(val)
    return best_idx, best_val


def secrecy_rate(gamma_l: float, gamma_e: float) -> float:
    """Nonnegative secrecy rate in bits/s/Hz given both SINRs."""
    if gamma_l < 0 or gamma_e < 0:
        raise ValueError("SINRs cannot be negative")
    return max(0.0, float(np.log2((1.0 + gamma_l) / (1.0 + gamma_e))))


def phi_metric(
    powers: PowerMatrix,
    gains: np.ndarray,
    legit_idx: np.ndarray,
    eave_idx: np.ndarray,
    l: int,
    m: int,
    c: int,
) -> float:
    """Secrecy association metric of legit-local node l on resource (m, c).

    Log-ratio of the node's effective channel to the strongest eavesdropper's
    effective channel on that resource. The node's own transmit power cancels,
    so the metric ranks resources before powers are decided. Positive means a
    positive secrecy rate is achievable there.
    """
    n = int(legit_idx[l])
    g_l = gains[m, n]
    if g_l <= 0:
        raise ValueError("nonpositive channel gain")
    i_l = interference(powers, gains, m, c, n)
    eff_l = g_l / (i_l + 1.0)
    if len(eave_idx) == 0:
        return PHI_NO_EAVESDROPPER
    e_star, _ = strongest_eavesdropper(powers, gains, eave_idx, m, c)
    i_e = interference(powers, gains, m, c, e_star)
    eff_e = gains[m, e_star] / (i_e + 1.0)
    return float(np.log2(eff_l / eff_e))


def phi_table(state: SystemState) -> tuple[np.ndarray, np.ndarray]:
    """Association metric of every (node, UAV) pair under even power spread.

    With the budget spread evenly across subchannels the interference at a
    node does not depend on the subchannel, so the metric collapses to one
    value per (node, UAV) pair; every subchannel of that UAV shares it.

    Returns (phi, e_star): phi has shape (M, L); e_star has shape (M,) and
    holds global eavesdropper indices, -1 when there are none.
    """
    gains = state.gains
    legit_idx = state.scenario.legit_idx
    eave_idx = state.scenario.eave_idx
    gamma_u = state.uniform_power_level()
    m_count = gains.shape[0]
    total = gamma_u * gains.sum(axis=0)
    interf = total[None, :] - gamma_u * gains  # (M, N)
    eff = gains / (interf + 1.0)
    eff_leg = eff[:, legit_idx]  # (M, L)
    if len(eave_idx) == 0:
        phi = np.full(eff_leg.shape, PHI_NO_EAVESDROPPER)
        return phi, np.full(m_count, -1, dtype=np.int64)
    eff_eav = eff[:, eave_idx]  # (M, E)
    local_star = np.argmax(eff_eav, axis=1)
    eff_star = eff_eav[np.arange(m_count), local_star]
    phi = np.log2(eff_leg / eff_star[:, None])
    return phi, eave_idx[local_star]


@dataclass
class SecrecySnapshot:
    """Per-legitimate-node link report under the state's actual powers.

    Arrays are indexed legit-locally; serving_uav/serving_ch are -1 and the
    rate quantities zero for unassociated nodes. e_star holds global node
    indices (-1 when no eavesdropper exists). phi is NaN without a link.
    """

    legit_idx: np.ndarray
    serving_uav: np.ndarray
    serving_ch: np.ndarray
    interference: np.ndarray
    sinr: np.ndarray
    e_star: np.ndarray
    eave_sinr: np.ndarray
    phi: np.ndarray
    secrecy: np.ndarray
    gains: np.ndarray

    @property
    def n_legit(self) -> int:
        return len(self.legit_idx)


def build_snapshot(state: SystemState) -> SecrecySnapshot:
    """Evaluate every legitimate link under the current powers."""
    scen = state.scenario
    gains = state.gains
    gamma = state.powers.gamma
    legit_idx = scen.legit_idx
    eave_idx = scen.eave_idx
    n_legit = len(legit_idx)

    serving_uav = state.assoc.serving[:, 0].copy()
    serving_ch = state.assoc.serving[:, 1].copy()
    interf = np.zeros(n_legit)
    sinr_l = np.zeros(n_legit)
    e_star = np.full(n_legit, -1, dtype=np.int64)
    sinr_e = np.zeros(n_legit)
    phi = np.full(n_legit, np.nan)
    rate = np.zeros(n_legit)

    # (C, N) total received power per subchannel at every node.
    total = np.einsum("mc,mn->cn", gamma, gains)
    for l in range(n_legit):
        m, c = serving_uav[l], serving_ch[l]
        if m < 0:
            continue
        n = legit_idx[l]
        i_l = total[c, n] - gamma[m, c] * gains[m, n]
        eff_l = gains[m, n] / (i_l + 1.0)
        g_l = gamma[m, c] * eff_l
        interf[l] = i_l
        sinr_l[l] = g_l
        if len(eave_idx) > 0:
            i_e = total[c, eave_idx] - gamma[m, c] * gains[m, eave_idx]
            eff_e = gains[m, eave_idx] / (i_e + 1.0)
            star = int(np.argmax(gamma[m, c] * eff_e))
            e_star[l] = eave_idx[star]
            sinr_e[l] = gamma[m, c] * eff_e[star]
            phi[l] = np.log2(eff_l / eff_e[star])
        else:
            phi[l] = PHI_NO_EAVESDROPPER
        rate[l] = secrecy_rate(sinr_l[l], sinr_e[l])

    return SecrecySnapshot(
        legit_idx=legit_idx,
        serving_uav=serving_uav,
        serving_ch=serving_ch,
        interference=interf,
        sinr=sinr_l,
        e_star=e_star,
        eave_sinr=sinr_e,
        phi=phi,
        secrecy=rate,
        gains=gains,
    )


def sum_secrecy_rate(snapshot: SecrecySnapshot) -> float:
    """Network sum of per-node secrecy rates in bits/s/Hz."""
    return float(snapshot.secrecy.sum())


def positive_secrecy_fraction(snapshot: SecrecySnapshot) -> float:
    """Percentage of legitimate nodes with a strictly positive secrecy rate."""
    if snapshot.n_legit == 0:
        raise EmptyLegitimateSetError("fraction undefined without legitimate nodes")
    return 100.0 * float((snapshot.secrecy > 0).sum()) / snapshot.n_legit


SNAPSHOT_COLUMNS = ("node", "uav", "subchannel", "sinr", "e_star", "eave_sinr", "phi", "secrecy")


def write_snapshot_csv(snapshot: SecrecySnapshot, path: str | Path) -> None:
    """One row per legitimate node; node and e_star are global indices."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SNAPSHOT_COLUMNS)
        for l in range(snapshot.n_legit):
            writer.writerow(
                [
                    int(snapshot.legit_idx[l]),
                    int(snapshot.serving_uav[l]),
                    int(snapshot.serving_ch[l]),
                    repr(float(snapshot.sinr[l])),
                    int(snapshot.e_star[l]),
                    repr(float(snapshot.eave_sinr[l])),
                    repr(float(snapshot.phi[l])),
                    repr(float(snapshot.secrecy[l])),
                ]
            )
