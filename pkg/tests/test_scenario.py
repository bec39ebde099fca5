"""Problem-instance plumbing: region, random streams, scenarios, fleet sizing."""

import numpy as np
import pytest

from uavsecsim.scenario import (
    EmptyLegitimateSetError,
    RandomStream,
    Region,
    Scenario,
    choose_uav_count,
    partition_roles,
    sample_nodes,
    sample_scenario,
)


def test_altitude_grid_spans_band_inclusively():
    region = Region(0, 1000, 0, 1000, 20, 300, 8)
    grid = region.altitude_grid()
    assert len(grid) == 8
    assert grid[0] == 20.0 and grid[-1] == 300.0
    assert np.allclose(np.diff(grid), 40.0)


def test_region_rejects_bad_bounds():
    with pytest.raises(ValueError):
        Region(10, 0, 0, 1000, 20, 300)
    with pytest.raises(ValueError):
        Region(0, 1000, 0, 1000, 0, 300)
    with pytest.raises(ValueError):
        Region(0, 1000, 0, 1000, 300, 20)
    with pytest.raises(ValueError):
        Region(0, 1000, 0, 1000, 20, 300, n_altitude_levels=1)


def test_region_allows_zero_width_ground():
    region = Region(500, 500, 0, 1000, 20, 300)
    pts = sample_nodes(region, 10, np.random.default_rng(0))
    assert np.all(pts[:, 0] == 500.0)


def test_region_contains():
    region = Region(0, 100, 0, 50, 20, 300)
    inside = region.contains(np.array([[10, 10], [0, 0], [100, 50]]))
    outside = region.contains(np.array([[-1, 10], [10, 51]]))
    assert inside.all()
    assert not outside.any()


def test_random_stream_reproducible_and_independent():
    a = RandomStream(seed=42, stream=0).generator().random(5)
    b = RandomStream(seed=42, stream=0).generator().random(5)
    c = RandomStream(seed=42, stream=1).generator().random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sample_nodes_inside_region():
    region = Region(100, 400, -50, 50, 20, 300)
    pts = sample_nodes(region, 200, np.random.default_rng(3))
    assert pts.shape == (200, 2)
    assert region.contains(pts).all()
    with pytest.raises(ValueError):
        sample_nodes(region, 0, np.random.default_rng(3))


def test_partition_roles_extremes_and_balance():
    rng = np.random.default_rng(5)
    assert partition_roles(50, 1.0, rng).all()
    assert not partition_roles(50, 0.0, rng).any()
    frac = partition_roles(20000, 0.5, rng).mean()
    assert 0.48 < frac < 0.52
    with pytest.raises(ValueError):
        partition_roles(10, 1.5, rng)


def test_sample_scenario_counts_consistent():
    region = Region(0, 1000, 0, 1000, 20, 300)
    scen = sample_scenario(region, 80, 0.5, np.random.default_rng(9))
    assert scen.n_nodes == 80
    assert scen.n_legit + scen.n_eave == 80
    assert len(scen.legit_idx) == scen.n_legit
    assert not np.intersect1d(scen.legit_idx, scen.eave_idx).size


def test_scenario_rejects_mismatched_roles():
    with pytest.raises(ValueError):
        Scenario(np.zeros((3, 2)), np.array([True, False]))
    with pytest.raises(ValueError):
        Scenario(np.zeros((2, 2)), np.array([True, False]), q=1.5)


def test_scenario_text_roundtrip_is_exact():
    region = Region(0, 1000, 0, 1000, 20, 300)
    scen = sample_scenario(region, 17, 0.4, np.random.default_rng(13))
    back = Scenario.from_text(scen.to_text(), q=scen.q)
    np.testing.assert_array_equal(back.positions, scen.positions)
    np.testing.assert_array_equal(back.legit_mask, scen.legit_mask)


def test_scenario_from_text_rejects_unknown_role():
    with pytest.raises(ValueError):
        Scenario.from_text("1.0,2.0,X\n")


def test_choose_uav_count_covers_all_nodes():
    assert choose_uav_count(1, 8) == 1
    assert choose_uav_count(8, 8) == 1
    assert choose_uav_count(9, 8) == 2
    assert choose_uav_count(16, 8) == 2
    assert choose_uav_count(17, 8) == 3
    assert choose_uav_count(5, 2) == 3


def test_choose_uav_count_needs_legitimate_nodes():
    with pytest.raises(EmptyLegitimateSetError):
        choose_uav_count(0, 8)
    assert issubclass(EmptyLegitimateSetError, ValueError)
