import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmpastar.errors import EmptyObstacle, InvalidEnvironment
from mmpastar.grid import (
    SQRT2,
    GridEnvironment,
    HorizontalBarrier,
    State,
    VerticalBarrier,
    euclidean,
    is_free,
    neighbors,
    octile,
    path_cost,
    skeletonize,
    validate_path,
)

from conftest import brute_force_costs, empty_env, small_envs


def test_is_free_examples(demo_env):
    assert not is_free(demo_env, (5, 10))
    assert not is_free(demo_env, (-1, 0))
    env = empty_env(10, 10)
    assert all(is_free(env, (x, y)) for x in range(10) for y in range(10))


def test_barriers_are_half_open(demo_env):
    assert not demo_env.is_free((24, 10))
    assert demo_env.is_free((25, 10)) is False  # covered by the vertical barrier
    assert demo_env.is_free((26, 9))
    assert demo_env.is_free((25, 22))
    assert not demo_env.is_free((25, 21))


def test_neighbors_center_and_corner():
    env = empty_env(5, 5)
    nb = neighbors(env, (2, 2))
    assert len(nb) == 8
    costs = sorted(c for _, c in nb)
    assert costs == [1.0] * 4 + [SQRT2] * 4
    assert len(neighbors(env, (0, 0))) == 3


def test_corner_cutting_forbidden():
    # 3x3: goal at (2, 0), blocked (1, 0) and (2, 1) flank the diagonal (1, 1) -> (2, 0)
    env = GridEnvironment(3, 3, State(0, 2), State(2, 0),
                          (HorizontalBarrier(0, 1, 2),), (VerticalBarrier(2, 1, 2),))
    nb = {s for s, _ in neighbors(env, (1, 1))}
    assert State(2, 0) not in nb
    # hand enumeration: (0, 0) and (2, 2) also lose a flank, cardinals (1, 0) and (2, 1) are walls
    assert nb == {State(0, 1), State(1, 2), State(0, 2)}
    # a single blocked flank is enough to forbid the diagonal
    env2 = GridEnvironment(3, 3, State(0, 2), State(2, 0), (HorizontalBarrier(0, 1, 2),))
    assert State(2, 0) not in {s for s, _ in neighbors(env2, (1, 1))}
    env3 = GridEnvironment(3, 3, State(0, 2), State(2, 0), (HorizontalBarrier(0, 0, 1),))
    assert State(2, 0) in {s for s, _ in neighbors(env3, (1, 1))}


def test_corner_cutting_ablation_flag():
    env = GridEnvironment(3, 3, State(0, 2), State(2, 0),
                          (HorizontalBarrier(0, 1, 2),), (VerticalBarrier(2, 1, 2),), corner_cutting=True)
    assert State(2, 0) in {s for s, _ in neighbors(env, (1, 1))}
    assert "corner_cutting" not in env.to_dict()


def test_euclidean_examples():
    assert euclidean((0, 0), (3, 4)) == 5.0
    assert euclidean((7, 7), (7, 7)) == 0.0
    assert euclidean((5, 5), (20, 20)) == pytest.approx(15 * math.sqrt(2))
    assert euclidean((5, 5), (20, 20)) == pytest.approx(21.2132, abs=1e-4)


def test_octile():
    assert octile((0, 0), (3, 4)) == pytest.approx(1 + 3 * SQRT2)


def test_skeleton_block():
    ob = skeletonize([(x, y) for x in range(4, 7) for y in range(4, 7)])
    assert ob.centroid == (5.0, 5.0)
    assert ob.horizontal.as_list() == [5, 4, 7]
    assert ob.vertical.as_list() == [5, 4, 7]


def test_skeleton_single_cell():
    ob = skeletonize([(2, 3)])
    assert ob.horizontal.cells() == [State(2, 3)]
    assert ob.vertical.cells() == [State(2, 3)]


def test_skeleton_plus():
    plus = [(x, 10) for x in range(6, 15)] + [(10, y) for y in range(7, 14) if y != 10]
    ob = skeletonize(plus)
    assert ob.horizontal.as_list() == [10, 6, 15]
    assert ob.vertical.as_list() == [10, 7, 14]


def test_skeleton_nonconvex_falls_back_to_nearest_cell():
    # U shape: the centroid cell lies in the empty notch
    cells = [(x, 0) for x in range(5)] + [(0, y) for y in range(1, 5)] + [(4, y) for y in range(1, 5)]
    ob = skeletonize(cells)
    assert ob.anchor in ob.cells
    assert set(ob.horizontal.cells()) <= ob.cells and set(ob.vertical.cells()) <= ob.cells


def test_skeleton_errors():
    with pytest.raises(EmptyObstacle):
        skeletonize([])
    with pytest.raises(InvalidEnvironment):
        skeletonize([(0, 0), (5, 5)])


def test_environment_validation():
    with pytest.raises(InvalidEnvironment):
        GridEnvironment(0, 5, State(0, 0), State(1, 1))
    with pytest.raises(InvalidEnvironment):
        GridEnvironment(5, 5, State(0, 0), State(1, 0), (HorizontalBarrier(0, 1, 3),))
    with pytest.raises(InvalidEnvironment):
        GridEnvironment(5, 5, State(2, 2), State(2, 2))
    with pytest.raises(InvalidEnvironment):
        GridEnvironment(5, 5, State(0, 0), State(1, 1), (HorizontalBarrier(1, 3, 9),))


def test_validate_path_examples(demo_env):
    assert not validate_path(demo_env, [(5, 5), (7, 5)])
    bad = [(5, 5), (5, 6), (5, 7), (5, 8), (5, 9), (5, 10)]
    assert not validate_path(demo_env, bad)
    assert not validate_path(demo_env, [])


def test_json_roundtrip(demo_env):
    env = demo_env.replace(irregular=(skeletonize([(40, 25), (41, 25), (41, 26)]),))
    assert GridEnvironment.from_dict(env.to_dict()) == env


def test_barrier_lists_append_skeletons(demo_env):
    ob = skeletonize([(40, 25), (41, 25), (42, 25), (41, 24), (41, 26)])
    hb, vb = demo_env.replace(irregular=(ob,)).barrier_lists()
    assert hb[-1] == [25, 40, 43] and vb[-1] == [41, 24, 27]
    assert demo_env.barrier_lists(include_skeletons=False) == ([[10, 0, 25], [15, 30, 50]], [[25, 10, 22]])


def test_path_cost():
    assert path_cost([(0, 0), (1, 1), (2, 1)]) == SQRT2 + 1.0


@settings(max_examples=60, deadline=None)
@given(small_envs())
def test_free_and_obstacle_partition(env):
    obs = env.obstacle_cells()
    for y in range(env.height):
        for x in range(env.width):
            assert env.is_free((x, y)) != ((x, y) in obs)


@settings(max_examples=60, deadline=None)
@given(small_envs())
def test_neighbors_symmetric(env):
    for y in range(env.height):
        for x in range(env.width):
            for t, c in neighbors(env, (x, y)):
                back = dict(neighbors(env, t))
                assert back.get(State(x, y)) == c


coords = st.tuples(st.integers(-50, 50), st.integers(-50, 50))


@given(coords, coords, coords)
def test_euclidean_is_a_metric(a, b, c):
    assert euclidean(a, b) >= 0
    assert euclidean(a, b) == euclidean(b, a)
    assert euclidean(a, c) <= euclidean(a, b) + euclidean(b, c) + 1e-12


@settings(max_examples=40, deadline=None)
@given(small_envs())
def test_euclidean_never_exceeds_grid_path_cost(env):
    costs = brute_force_costs(env, env.goal)
    for cell, d in costs.items():
        assert euclidean(cell, env.goal) <= d + 1e-12
