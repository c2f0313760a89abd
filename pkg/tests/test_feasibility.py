import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohap.feasibility import (FeasibilityError, FeasibilityOracle,
                               Manipulator, Region, Workspace, collision_free,
                               dump_workspace, load_workspace, reachable,
                               workspace_oracle)

from oracles import flood_reachable


def test_bench_geometry(bench):
    # both manipulators reach the robot and shared regions; the wall at
    # x = 13 fences off the human side and the hazard strip entirely
    for m in ("left", "right"):
        assert reachable(m, "robotOnly", bench)
        assert reachable(m, "shared", bench)
        assert not reachable(m, "humanOnly", bench)
        assert not reachable(m, "hazard", bench)


def test_collision_free_basics(bench):
    assert collision_free("left", (4, 4), bench)
    assert collision_free("left", (10, 4), bench)
    assert not collision_free("left", (14, 4), bench)  # behind the wall
    assert not collision_free("left", (13, 4), bench)  # the wall itself
    with pytest.raises(FeasibilityError):
        collision_free("left", (99, 99), bench)


def test_reach_radius_limits():
    w = Workspace(cell_size=1.0, width=10, height=10, obstacles=frozenset(),
                  manipulators=(Manipulator("m", (0, 0), 2.0),),
                  regions=(Region("far", (5, 5, 6, 6)),
                           Region("near", (0, 1, 1, 1))))
    assert reachable("m", "near", w)
    assert not reachable("m", "far", w)
    assert collision_free("m", (2, 0), w)
    assert not collision_free("m", (3, 0), w)  # distance 3 > reach 2


def test_obstacles_block_bfs_not_euclid():
    # the target cell is within reach but walled off
    wall = frozenset({(1, 0), (1, 1), (0, 1)})
    w = Workspace(cell_size=1.0, width=3, height=3, obstacles=wall,
                  manipulators=(Manipulator("m", (0, 0), 5.0),),
                  regions=(Region("r", (2, 2, 2, 2)),))
    assert not reachable("m", "r", w)
    unwalled = Workspace(cell_size=1.0, width=3, height=3,
                         obstacles=frozenset({(1, 1)}),
                         manipulators=(Manipulator("m", (0, 0), 5.0),),
                         regions=(Region("r", (2, 2, 2, 2)),))
    assert reachable("m", "r", unwalled)


def test_obstacle_monotonicity(bench):
    # adding obstacles can only shrink the reachable set
    rng = random.Random(5)
    cells = [(x, y) for x in range(bench.width) for y in range(bench.height)]
    extra = {c for c in rng.sample(cells, 30)
             if all(c != m.base for m in bench.manipulators)}
    smaller = Workspace(bench.cell_size, bench.width, bench.height,
                        bench.obstacles | extra, bench.manipulators,
                        bench.regions)
    for m in ("left", "right"):
        for r in ("robotOnly", "shared", "humanOnly", "hazard"):
            if reachable(m, r, smaller):
                assert reachable(m, r, bench)


def test_flood_fill_oracle_bench(bench):
    for m in ("left", "right"):
        for r in ("robotOnly", "shared", "humanOnly", "hazard"):
            assert reachable(m, r, bench) == flood_reachable(m, r, bench)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 30), st.floats(0.5, 6.0))
def test_flood_fill_oracle_random_grids(seed, reach):
    rng = random.Random(seed)
    width, height = rng.randint(3, 9), rng.randint(3, 9)
    base = (rng.randrange(width), rng.randrange(height))
    obstacles = frozenset(
        (x, y) for x in range(width) for y in range(height)
        if (x, y) != base and rng.random() < 0.3)
    x0 = rng.randrange(width)
    y0 = rng.randrange(height)
    x1 = rng.randrange(x0, width)
    y1 = rng.randrange(y0, height)
    w = Workspace(cell_size=1.0, width=width, height=height,
                  obstacles=obstacles,
                  manipulators=(Manipulator("m", base, reach),),
                  regions=(Region("r", (x0, y0, x1, y1)),))
    assert reachable("m", "r", w) == flood_reachable("m", "r", w)


def test_workspace_round_trip(bench):
    assert load_workspace(dump_workspace(bench)) == bench


def test_workspace_validation():
    with pytest.raises(FeasibilityError):
        Workspace(1.0, 5, 5, frozenset(),
                  (Manipulator("m", (9, 9), 1.0),), ())
    with pytest.raises(FeasibilityError):
        Workspace(1.0, 5, 5, frozenset({(1, 1)}),
                  (Manipulator("m", (1, 1), 1.0),), ())
    with pytest.raises(FeasibilityError):
        Workspace(1.0, 5, 5, frozenset(),
                  (Manipulator("m", (0, 0), -1.0),), ())
    with pytest.raises(FeasibilityError):
        Workspace(1.0, 5, 5, frozenset(), (),
                  (Region("r", (0, 0, 7, 7)),))


def test_oracle_cache_transparent(bench):
    fx = workspace_oracle(bench)
    first = fx.eval("reachable", ("left", "shared"))
    stats = fx.check_stats()
    assert stats["calls"] == 1 and stats["hits"] == 0
    again = fx.eval("reachable", ("left", "shared"))
    assert again == first
    stats = fx.check_stats()
    assert stats["calls"] == 2 and stats["hits"] == 1
    # with the cache disabled the answers must not change
    fx2 = workspace_oracle(bench)
    fx2.set_cache_enabled(False)
    assert fx2.eval("reachable", ("left", "shared")) == first
    assert fx2.eval("reachable", ("left", "shared")) == first
    assert fx2.check_stats()["hits"] == 0


def test_oracle_unregistered():
    fx = FeasibilityOracle()
    with pytest.raises(FeasibilityError):
        fx.eval("nope", ())


def test_oracle_counts_time(bench):
    fx = workspace_oracle(bench)
    fx.eval("reachable", ("left", "humanOnly"))
    assert fx.check_stats()["seconds"] >= 0.0
