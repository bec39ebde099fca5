"""Node association as a synchronous potential game over (UAV, subchannel) resources.

Players are the legitimate nodes, actions are free resources, and a node's
payoff for a move is the change in its secrecy association metric. Because
that metric does not depend on what other nodes chose, the sum of per-node
metrics acts as a potential: every executed move raises it by the mover's
payoff, which is what guarantees the round dynamics settle.

Each round has two phases. First every node builds its action set (free
resources that strictly improve its metric) and picks a candidate, either by
sampling a softmax over payoffs (stochastic better response) or by taking the
argmax (best response). Then each contested resource is granted to the
contender with the highest payoff, ties broken uniformly at random; winners
release their previous resource, which only reopens next round. A round in
which every action set is empty means no node can improve unilaterally, i.e.
the assignment is a pure Nash equilibrium.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .radio import PHI_UNASSOCIATED, AssociationArray, SystemState, phi_table


@dataclass
class AssociationResult:
    assoc: AssociationArray
    converged: bool
    # Rounds in which at least one move executed; the final pass that finds
    # every action set empty stops the game without being counted.
    rounds: int
    moves: int
    # Potential after round r; index 0 is the starting state.
    f_trace: list[float] = field(default_factory=list)
    # Executed moves per round, aligned with f_trace[1:].
    moves_trace: list[int] = field(default_factory=list)
    # Optional per-proposal rows: (round, node, uav, subchannel, payoff, won).
    trace: list[tuple] | None = None


def sbr_distribution(payoffs: np.ndarray) -> np.ndarray:
    """Softmax over payoffs with max-subtraction for numerical stability."""
    payoffs = np.asarray(payoffs, dtype=float)
    if payoffs.size == 0:
        raise ValueError("no available actions")
    w = np.exp(payoffs - payoffs.max())
    return w / w.sum()


def marginal_payoff(phi: np.ndarray, assoc: AssociationArray, l: int, m: int, c: int) -> float:
    """Metric change for node l moving to resource (m, c) from its current one."""
    cur_m = assoc.serving[l, 0]
    phi_cur = phi[cur_m, l] if cur_m >= 0 else PHI_UNASSOCIATED
    return float(phi[m, l] - phi_cur)


def total_utility(phi: np.ndarray, assoc: AssociationArray) -> float:
    """Potential of the assignment: summed metrics with the unassociated sentinel."""
    cur = assoc.serving[:, 0]
    values = np.where(
        cur >= 0, phi[np.clip(cur, 0, None), np.arange(assoc.n_legit)], PHI_UNASSOCIATED
    )
    return float(values.sum())


def _run_rounds(
    state: SystemState,
    rng: np.random.Generator,
    max_rounds: int,
    stochastic: bool,
    record_trace: bool,
) -> AssociationResult:
    assoc = state.assoc
    phi, _ = phi_table(state)
    n_legit = assoc.n_legit
    m_count, c_count = assoc.n_uavs, assoc.n_subchannels
    trace: list[tuple] | None = [] if record_trace else None

    f_trace = [total_utility(phi, assoc)]
    moves_trace: list[int] = []
    total_moves = 0
    converged = False
    rounds = 0

    for rnd in range(1, max_rounds + 1):
        occupied = assoc.occupancy()  # round-start snapshot
        free_flat = np.flatnonzero(~occupied.ravel())
        proposals: dict[int, list[tuple[int, float]]] = {}

        any_action = False
        for l in range(n_legit):
            cur_m = assoc.serving[l, 0]
            phi_cur = phi[cur_m, l] if cur_m >= 0 else PHI_UNASSOCIATED
            # Payoff of each free resource; subchannels of a UAV share it.
            gains = phi[free_flat // c_count, l] - phi_cur
            positive = gains > 0.0
            if not positive.any():
                continue
            any_action = True
            actions = free_flat[positive]
            payoffs = gains[positive]
            if stochastic:
                pick = int(rng.choice(len(actions), p=sbr_distribution(payoffs)))
            else:
                pick = int(np.argmax(payoffs))  # first max: lowest (uav, subchannel)
            resource = int(actions[pick])
            proposals.setdefault(resource, []).append((l, float(payoffs[pick])))

        if not any_action:
            converged = True
            break

        moves = 0
        for resource in sorted(proposals):
            contenders = proposals[resource]
            payoffs = np.array([f for _, f in contenders])
            best = payoffs.max()
            winners = [l for (l, f) in contenders if f == best]
            winner = winners[0] if len(winners) == 1 else int(rng.choice(winners))
            m, c = divmod(resource, c_count)
            assoc.move(winner, m, c)
            moves += 1
            if trace is not None:
                for l, f in contenders:
                    trace.append((rnd, l, m, c, f, l == winner))
        total_moves += moves
        moves_trace.append(moves)
        f_trace.append(total_utility(phi, assoc))
        rounds = rnd

    return AssociationResult(
        assoc=assoc,
        converged=converged,
        rounds=rounds,
        moves=total_moves,
        f_trace=f_trace,
        moves_trace=moves_trace,
        trace=trace,
    )


def slll_associate(
    state: SystemState,
    rng: np.random.Generator,
    max_rounds: int = 10,
    record_trace: bool = False,
) -> AssociationResult:
    """Synchronous log-linear learning: sample proposals from the payoff softmax."""
    return _run_rounds(state, rng, max_rounds, stochastic=True, record_trace=record_trace)


def best_response_associate(
    state: SystemState,
    rng: np.random.Generator,
    max_rounds: int = 10,
    record_trace: bool = False,
) -> AssociationResult:
    """Deterministic variant: each node proposes its highest-payoff free resource.

    The rng only settles ties between equal-payoff contenders in the grant phase.
    """
    return _run_rounds(state, rng, max_rounds, stochastic=False, record_trace=record_trace)


def greedy_associate(state: SystemState) -> AssociationResult:
    """Bind the globally best (node, resource) pair repeatedly until done.

    Deterministic: ties break toward the lowest node index, then the lowest
    (uav, subchannel). rounds counts binding steps.
    """
    assoc = state.assoc
    phi, _ = phi_table(state)
    n_legit, c_count = assoc.n_legit, assoc.n_subchannels

    free_count = np.array(
        [int((~assoc.occupancy()[m]).sum()) for m in range(assoc.n_uavs)], dtype=np.int64
    )
    unbound = [l for l in range(n_legit) if not assoc.is_associated(l)]
    steps = 0
    while unbound and free_count.sum() > 0:
        best = None  # (phi, l, m)
        for l in unbound:
            for m in range(assoc.n_uavs):
                if free_count[m] == 0:
                    continue
                key = (-phi[m, l], l, m)
                if best is None or key < best:
                    best = key
        _, l, m = best
        c = int(np.flatnonzero(~assoc.occupancy()[m])[0])
        assoc.assign(l, m, c)
        free_count[m] -= 1
        unbound.remove(l)
        steps += 1

    f_value = total_utility(phi, assoc)
    return AssociationResult(
        assoc=assoc,
        converged=True,
        rounds=steps,
        moves=steps,
        f_trace=[f_value],
        moves_trace=[steps],
    )


def certify_association_equilibrium(state: SystemState) -> list[tuple[int, int, int, float]]:
    """Profitable unilateral deviations left in the assignment.

    Returns (node, uav, subchannel, payoff) for every free resource that would
    strictly improve some node's metric; empty means pure Nash equilibrium.
    """
    assoc = state.assoc
    phi, _ = phi_table(state)
    free = ~assoc.occupancy()
    violations = []
    for l in range(assoc.n_legit):
        cur_m = assoc.serving[l, 0]
        phi_cur = phi[cur_m, l] if cur_m >= 0 else PHI_UNASSOCIATED
        for m in range(assoc.n_uavs):
            for c in range(assoc.n_subchannels):
                if not free[m, c]:
                    continue
                gain = float(phi[m, l] - phi_cur)
                if gain > 0.0:
                    violations.append((l, m, c, gain))
    return violations
