"""Association game dynamics: proposals, conflicts, convergence, certification."""

import itertools

import numpy as np
import pytest

from conftest import build_state, random_state
from uavsecsim.association import (
    AssociationResult,
    best_response_associate,
    certify_association_equilibrium,
    greedy_associate,
    marginal_payoff,
    sbr_distribution,
    slll_associate,
    total_utility,
)
from uavsecsim.radio import PHI_UNASSOCIATED, AssociationArray, phi_table


def enumerate_pure_equilibria(phi: np.ndarray, n_subchannels: int):
    """Brute-force the set of assignments with no profitable move to a free resource.

    Returns a set of canonical states: tuples of (uav, subchannel) per node,
    (-1, -1) for unassociated. The metric is shared across a UAV's subchannels,
    so a deviation check only needs one free channel per UAV.
    """
    n_uavs, n_legit = phi.shape
    resources = [(m, c) for m in range(n_uavs) for c in range(n_subchannels)]
    equilibria = set()
    for k in range(n_legit + 1):
        for nodes in itertools.combinations(range(n_legit), k):
            for slots in itertools.permutations(range(len(resources)), k):
                serving = {l: (-1, -1) for l in range(n_legit)}
                for l, s in zip(nodes, slots):
                    serving[l] = resources[s]
                taken = set(slots)
                free_uavs = {
                    resources[s][0] for s in range(len(resources)) if s not in taken
                }
                stable = True
                for l in range(n_legit):
                    cur = phi[serving[l][0], l] if serving[l][0] >= 0 else PHI_UNASSOCIATED
                    if any(phi[m, l] > cur for m in free_uavs):
                        stable = False
                        break
                if stable:
                    equilibria.add(tuple(serving[l] for l in range(n_legit)))
    return equilibria


def canonical(assoc: AssociationArray):
    return tuple((int(m), int(c)) for m, c in assoc.serving)


def test_sbr_distribution_known_values():
    probs = sbr_distribution(np.array([np.log(2.0), 0.0]))
    np.testing.assert_allclose(probs, [2.0 / 3.0, 1.0 / 3.0], rtol=1e-12)
    np.testing.assert_allclose(sbr_distribution(np.array([5.0, 5.0, 5.0])), np.full(3, 1 / 3))
    assert sbr_distribution(np.array([1e6, 1e6 - 700.0]))[0] == pytest.approx(1.0)
    assert sbr_distribution(np.array([3.0])).sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        sbr_distribution(np.array([]))


def test_marginal_payoff_uses_unassociated_sentinel():
    state = random_state(np.random.default_rng(0))
    phi, _ = phi_table(state)
    assert marginal_payoff(phi, state.assoc, 0, 1, 0) == pytest.approx(
        phi[1, 0] - PHI_UNASSOCIATED
    )
    state.assoc.assign(0, 0, 0)
    assert marginal_payoff(phi, state.assoc, 0, 1, 0) == pytest.approx(phi[1, 0] - phi[0, 0])


def test_total_utility_sums_current_metrics():
    state = random_state(np.random.default_rng(1), n_legit=4)
    phi, _ = phi_table(state)
    assert total_utility(phi, state.assoc) == pytest.approx(4 * PHI_UNASSOCIATED)
    state.assoc.assign(2, 1, 0)
    expected = 3 * PHI_UNASSOCIATED + phi[1, 2]
    assert total_utility(phi, state.assoc) == pytest.approx(expected)


def test_single_node_takes_the_only_resource():
    state = build_state(
        [(400, 400), (600, 600)],
        [True, False],
        [(500, 500, 180)],
        n_subchannels=1,
    )
    res = slll_associate(state, np.random.default_rng(0))
    assert res.converged
    assert res.rounds == 1 and res.moves == 1
    assert tuple(res.assoc.serving[0]) == (0, 0)


def test_fully_occupied_start_converges_in_zero_rounds():
    state = build_state(
        [(400, 400), (600, 600)],
        [True, False],
        [(500, 500, 180)],
        n_subchannels=1,
        assoc_pairs=[(0, 0, 0)],
    )
    res = best_response_associate(state, np.random.default_rng(0))
    assert res.converged and res.rounds == 0 and res.moves == 0
    assert res.f_trace == [pytest.approx(total_utility(phi_table(state)[0], state.assoc))]


def test_conflict_goes_to_the_higher_payoff_node():
    # Both nodes want the single resource; the closer node carries the larger
    # metric and must win, the loser waits unassociated.
    state = build_state(
        [(450, 500), (100, 500), (500, 600)],
        [True, True, False],
        [(500, 500, 180)],
        n_subchannels=1,
    )
    phi, _ = phi_table(state)
    assert phi[0, 0] > phi[0, 1]
    res = best_response_associate(state, np.random.default_rng(0))
    assert res.converged and res.rounds == 1 and res.moves == 1
    assert tuple(res.assoc.serving[0]) == (0, 0)
    assert not res.assoc.is_associated(1)


def test_conflict_ties_break_randomly():
    # Mirror-image nodes have bitwise-equal metrics; over many seeds each
    # must win sometimes.
    winners = set()
    for seed in range(30):
        state = build_state(
            [(400, 500), (600, 500), (500, 700)],
            [True, True, False],
            [(500, 500, 180)],
            n_subchannels=1,
        )
        phi, _ = phi_table(state)
        assert phi[0, 0] == phi[0, 1]
        res = slll_associate(state, np.random.default_rng(seed))
        winners.add(int(res.assoc.node_of[0, 0]))
    assert winners == {0, 1}


def test_released_resource_reopens_next_round():
    # Node 0 vacates its resource in round 1; node 1, whose only improvement
    # is that resource, can claim it in round 2 only.
    state = build_state(
        [(850, 850), (150, 100), (500, 500)],
        [True, True, False],
        [(100, 100, 180), (900, 900, 180), (500, 100, 180)],
        n_subchannels=1,
        assoc_pairs=[(0, 0, 0), (1, 2, 0)],
    )
    phi, _ = phi_table(state)
    assert phi[1, 0] > phi[0, 0]  # node 0 prefers UAV 1
    assert phi[0, 1] > phi[2, 1] > phi[1, 1]  # node 1 prefers UAV 0, not UAV 1
    res = best_response_associate(state, np.random.default_rng(0))
    assert res.converged
    assert res.rounds == 2
    assert res.moves_trace == [1, 1]
    assert tuple(res.assoc.serving[0]) == (1, 0)
    assert tuple(res.assoc.serving[1]) == (0, 0)


def test_potential_never_decreases():
    rng = np.random.default_rng(10)
    for dynamics in (slll_associate, best_response_associate):
        for _ in range(15):
            state = random_state(rng, n_legit=8, n_eave=4, n_uavs=3, n_subchannels=3)
            res = dynamics(state, rng)
            diffs = np.diff(res.f_trace)
            assert np.all(diffs >= 0.0)
            if res.moves > 0:
                assert res.f_trace[-1] > res.f_trace[0]
            assert len(res.f_trace) == res.rounds + 1
            assert len(res.moves_trace) == res.rounds


def test_converged_states_have_no_profitable_deviation():
    rng = np.random.default_rng(11)
    for dynamics in (slll_associate, best_response_associate):
        for _ in range(10):
            state = random_state(rng, n_legit=7, n_eave=3, n_uavs=2, n_subchannels=4)
            res = dynamics(state, rng, max_rounds=20)
            assert res.converged
            res.assoc.validate()
            assert certify_association_equilibrium(state.with_assoc(res.assoc)) == []


def test_terminal_states_in_brute_force_equilibrium_set():
    rng = np.random.default_rng(12)
    hits = 0
    for _ in range(40):
        state = random_state(rng, n_legit=3, n_eave=2, n_uavs=2, n_subchannels=2)
        phi, _ = phi_table(state)
        equilibria = enumerate_pure_equilibria(phi, 2)
        res = slll_associate(state, rng, max_rounds=20)
        if res.converged:
            assert canonical(res.assoc) in equilibria
            hits += 1
    assert hits > 30  # nearly all tiny instances settle


def test_greedy_binds_best_pair_first_and_is_deterministic():
    rng = np.random.default_rng(13)
    state = random_state(rng, n_legit=5, n_eave=3, n_uavs=2, n_subchannels=2)
    phi, _ = phi_table(state)
    res = greedy_associate(state)
    assert res.converged
    assert res.rounds == res.moves == 4  # capacity 4 < 5 nodes
    # the globally best (metric, node, uav) pair is bound first, on subchannel 0
    best_m, best_l = np.unravel_index(np.argmax(phi), phi.shape)
    assert tuple(res.assoc.serving[best_l]) == (best_m, 0)

    again = greedy_associate(
        random_state(np.random.default_rng(13), n_legit=5, n_eave=3, n_uavs=2, n_subchannels=2)
    )
    np.testing.assert_array_equal(res.assoc.serving, again.assoc.serving)


def test_greedy_total_bounded_by_brute_force_optimum():
    rng = np.random.default_rng(14)
    for _ in range(10):
        state = random_state(rng, n_legit=3, n_eave=2, n_uavs=2, n_subchannels=2)
        phi, _ = phi_table(state)
        res = greedy_associate(state)
        got = total_utility(phi, res.assoc)
        resources = [(m, c) for m in range(2) for c in range(2)]
        best = -np.inf
        for slots in itertools.permutations(range(4), 3):
            a = AssociationArray.empty(3, 2, 2)
            for l, s in enumerate(slots):
                a.assign(l, *resources[s])
            best = max(best, total_utility(phi, a))
        assert got <= best + 1e-9


def test_slll_is_reproducible_for_a_fixed_seed():
    state_a = random_state(np.random.default_rng(15), associate=False)
    state_b = random_state(np.random.default_rng(15), associate=False)
    res_a = slll_associate(state_a, np.random.default_rng(99))
    res_b = slll_associate(state_b, np.random.default_rng(99))
    np.testing.assert_array_equal(res_a.assoc.serving, res_b.assoc.serving)
    assert res_a.f_trace == res_b.f_trace


def test_trace_rows_are_consistent():
    rng = np.random.default_rng(16)
    state = random_state(rng, n_legit=6, n_eave=3, n_uavs=2, n_subchannels=2)
    res = slll_associate(state, rng, record_trace=True)
    assert res.trace, "expected at least one proposal"
    for rnd, node, uav, subch, payoff, won in res.trace:
        assert 1 <= rnd <= res.rounds
        assert payoff > 0.0
        assert 0 <= node < 6 and 0 <= uav < 2 and 0 <= subch < 2
    for rnd in range(1, res.rounds + 1):
        wins = sum(1 for row in res.trace if row[0] == rnd and row[5])
        assert wins == res.moves_trace[rnd - 1]
