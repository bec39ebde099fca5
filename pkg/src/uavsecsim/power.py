"""Per-UAV power allocation over subchannels, interference-frozen per sweep.

Three allocators share one structure: a few outer sweeps in which the
cross-UAV interference is frozen at the previous iterate, every UAV solves
its own subproblem in closed form or by bisection, and all UAVs commit at
once. Subchannels that serve nobody never carry power.

The secure allocator works in two levels. A closed-form floor first gives
every served node exactly the target SINR. If that floor already exceeds the
budget, or no node can outhear its strongest eavesdropper, the floor profile
is scaled to the budget and that is the answer. Otherwise the leftover budget
is spent on the nodes that can beat their eavesdropper, equalizing their
secrecy SINR ratio at the largest feasible level, found by bisecting the
ratio between 1 and the tightest eavesdropper-imposed bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .radio import PowerMatrix, SystemState


@dataclass(frozen=True)
class PowerConfig:
    gamma0: float = 0.1  # per-node SINR floor, linear
    n_iter_pow: int = 3  # outer interference-refresh sweeps
    n_iter_bis: int = 50  # bisection iterations for the secrecy ratio
    gamma_s_tol: float = 1e-6  # stop when the ratio bracket is this tight

    def __post_init__(self) -> None:
        if self.gamma0 <= 0:
            raise ValueError("SINR floor must be positive")
        if self.n_iter_pow < 1 or self.n_iter_bis < 1:
            raise ValueError("iteration counts must be positive")


# Effective eavesdropper channel stand-in when no eavesdropper exists,
# consistent with the 60-bit metric cap: eff_leg / 2**60.
_NO_EAVE_RATIO = 2.0**60


@dataclass
class UavLinks:
    """Frozen per-UAV link terms for one allocation sweep.

    Arrays run over the UAV's serving subchannels in ascending order:
    channel index, served node (legit-local), effective legitimate channel
    g/(I+1), and the strongest eavesdropper's effective channel on that
    subchannel.
    """

    channels: np.ndarray
    nodes: np.ndarray
    eff_leg: np.ndarray
    eff_eav: np.ndarray


def freeze_links(state: SystemState, gamma: np.ndarray) -> list[UavLinks]:
    """Evaluate every serving link under a frozen power matrix."""
    gains = state.gains
    scen = state.scenario
    legit_idx = scen.legit_idx
    eave_idx = scen.eave_idx
    total = np.einsum("mc,mn->cn", gamma, gains)  # (C, N)

    out = []
    for m in range(state.n_uavs):
        channels = np.flatnonzero(state.assoc.node_of[m] >= 0)
        nodes = state.assoc.node_of[m, channels]
        if len(channels) == 0:
            out.append(
                UavLinks(channels, nodes, np.zeros(0), np.zeros(0))
            )
            continue
        n_glob = legit_idx[nodes]
        i_leg = total[channels, n_glob] - gamma[m, channels] * gains[m, n_glob]
        eff_leg = gains[m, n_glob] / (i_leg + 1.0)
        if len(eave_idx) > 0:
            i_eav = total[np.ix_(channels, eave_idx)] - np.outer(
                gamma[m, channels], gains[m, eave_idx]
            )
            eff = gains[m, eave_idx][None, :] / (i_eav + 1.0)  # (|channels|, E)
            star = np.argmax(gamma[m, channels][:, None] * eff, axis=1)
            eff_eav = eff[np.arange(len(channels)), star]
        else:
            eff_eav = eff_leg / _NO_EAVE_RATIO
        out.append(UavLinks(channels, nodes, eff_leg, eff_eav))
    return out


def secrecy_eligible(links: UavLinks) -> np.ndarray:
    """Mask of serving links whose node outhears its strongest eavesdropper."""
    return links.eff_leg > links.eff_eav


def qos_power(links: UavLinks, gamma0: float) -> np.ndarray:
    """Closed-form floor power per serving subchannel: SINR lands exactly on gamma0."""
    return gamma0 / links.eff_leg


@dataclass
class BisectionResult:
    powers: np.ndarray  # secrecy top-up per eligible link, budget-feasible
    gamma_s: float  # secrecy SINR ratio of the returned profile
    gap: float  # final bracket width
    feasible: bool  # a nonzero feasible profile was found


def secrecy_bisection(
    eff_leg: np.ndarray,
    eff_eav: np.ndarray,
    budget: float,
    config: PowerConfig,
) -> BisectionResult:
    """Equalize the secrecy SINR ratio across links by bisecting the ratio.

    The demanded top-up power of a link grows monotonically with the ratio
    and diverges as the ratio approaches eff_leg/eff_eav of the weakest link,
    so the total demanded power crosses any positive budget exactly once.
    Returns the last profile whose total stayed within the budget.

    The upper bracket is the tighter of two valid bounds: the weakest link's
    channel ratio (shrunk by a relative 1e-9 to stay off the singularity) and
    the ratio the budget could buy if it all went to the best link. The
    second one keeps the bracket finite when eavesdroppers barely constrain
    a link, or not at all.

    Requires eff_leg > eff_eav elementwise (callers filter to eligible links).
    """
    eff_leg = np.asarray(eff_leg, dtype=float)
    eff_eav = np.asarray(eff_eav, dtype=float)
    if eff_leg.size == 0:
        raise ValueError("no eligible links to bisect over")
    if np.any(eff_leg <= eff_eav):
        raise ValueError("every link must satisfy eff_leg > eff_eav")
    if budget <= 0:
        raise ValueError("budget must be positive")

    lo = 1.0
    ratio_bound = float((eff_leg / eff_eav).min()) * (1.0 - 1e-9)
    budget_bound = 1.0 + budget * float(eff_leg.max())
    hi = min(ratio_bound, budget_bound)
    if hi <= lo:  # eligibility margin below float resolution: nothing to gain
        return BisectionResult(np.zeros_like(eff_leg), 1.0, 0.0, True)
    powers = np.zeros_like(eff_leg)
    gamma_s = lo
    feasible = False
    for _ in range(config.n_iter_bis):
        mid = 0.5 * (lo + hi)
        p = np.maximum(0.0, (mid - 1.0) / (eff_leg - mid * eff_eav))
        if p.sum() > budget:
            hi = mid
        else:
            lo = mid
            powers, gamma_s, feasible = p, mid, True
        if hi - lo < config.gamma_s_tol:
            break
    return BisectionResult(powers=powers, gamma_s=gamma_s, gap=hi - lo, feasible=feasible)


@dataclass
class PowerTraceEntry:
    """Audit record of one outer sweep of the secure allocator."""

    sweep: int
    uav: int
    channels: np.ndarray
    nodes: np.ndarray
    floor: np.ndarray  # QoS floor per serving subchannel
    floor_total: float
    fallback: bool  # True when the scaled floor was returned
    topup: np.ndarray  # secrecy top-up per serving subchannel (zeros on fallback)
    gamma_s: float  # equalized ratio, 1.0 on fallback


def secure_allocate(
    state: SystemState,
    config: PowerConfig,
    trace: list[PowerTraceEntry] | None = None,
) -> PowerMatrix:
    """Two-level secure allocation: QoS floor, then max-min secrecy top-up."""
    assoc = state.assoc
    budget = state.powers.gamma_p
    gamma = PowerMatrix.uniform(state.n_uavs, assoc.n_subchannels, budget).gamma

    for sweep in range(config.n_iter_pow):
        links = freeze_links(state, gamma)
        new = np.zeros_like(gamma)
        for m, lk in enumerate(links):
            if len(lk.channels) == 0:
                continue
            floor = qos_power(lk, config.gamma0)
            floor_total = float(floor.sum())
            eligible = secrecy_eligible(lk)
            fallback = floor_total >= budget or not eligible.any()
            topup = np.zeros_like(floor)
            gamma_s = 1.0
            if fallback:
                new[m, lk.channels] = floor * (budget / floor_total)
            else:
                res = secrecy_bisection(
                    lk.eff_leg[eligible], lk.eff_eav[eligible], budget - floor_total, config
                )
                topup[eligible] = res.powers
                gamma_s = res.gamma_s
                new[m, lk.channels] = floor + topup
            if trace is not None:
                trace.append(
                    PowerTraceEntry(
                        sweep=sweep,
                        uav=m,
                        channels=lk.channels.copy(),
                        nodes=lk.nodes.copy(),
                        floor=floor,
                        floor_total=floor_total,
                        fallback=fallback,
                        topup=topup,
                        gamma_s=gamma_s,
                    )
                )
        gamma = new
        out = PowerMatrix(gamma, budget)
        out.validate()
    return out


def maxmin_sinr_allocate(state: SystemState, config: PowerConfig) -> PowerMatrix:
    """Equalize served-node SINR per UAV, spending the whole budget."""
    assoc = state.assoc
    budget = state.powers.gamma_p
    gamma = PowerMatrix.uniform(state.n_uavs, assoc.n_subchannels, budget).gamma

    for _ in range(config.n_iter_pow):
        links = freeze_links(state, gamma)
        new = np.zeros_like(gamma)
        for m, lk in enumerate(links):
            if len(lk.channels) == 0:
                continue
            weights = 1.0 / lk.eff_leg  # power per unit SINR
            level = budget / float(weights.sum())
            new[m, lk.channels] = level * weights
        gamma = new
        out = PowerMatrix(gamma, budget)
        out.validate()
    return out


def waterfill(floors: np.ndarray, budget: float, max_iters: int = 200) -> tuple[np.ndarray, float]:
    """Bisect a common water level over the given floors until the budget binds.

    Returns (powers, level) with powers = max(0, level - floors), total within
    the budget from below.
    """
    floors = np.asarray(floors, dtype=float)
    if floors.size == 0:
        raise ValueError("no channels to fill")
    if budget < 0:
        raise ValueError("budget cannot be negative")
    lo = float(floors.min())
    hi = lo + budget
    level = lo
    powers = np.zeros_like(floors)
    for _ in range(max_iters):
        mid = 0.5 * (lo + hi)
        p = np.maximum(0.0, mid - floors)
        if p.sum() > budget:
            hi = mid
        else:
            lo, level, powers = mid, mid, p
        if hi - lo <= 1e-15 * max(1.0, abs(hi)):
            break
    return powers, level


def max_sumrate_allocate(state: SystemState, config: PowerConfig) -> PowerMatrix:
    """Waterfill each UAV's budget over its serving subchannels for sum rate."""
    assoc = state.assoc
    budget = state.powers.gamma_p
    gamma = PowerMatrix.uniform(state.n_uavs, assoc.n_subchannels, budget).gamma

    for _ in range(config.n_iter_pow):
        links = freeze_links(state, gamma)
        new = np.zeros_like(gamma)
        for m, lk in enumerate(links):
            if len(lk.channels) == 0:
                continue
            p, _ = waterfill(1.0 / lk.eff_leg, budget)
            new[m, lk.channels] = p
        gamma = new
        out = PowerMatrix(gamma, budget)
        out.validate()
    return out
