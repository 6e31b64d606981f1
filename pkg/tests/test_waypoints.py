import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmpastar.errors import ParseFailure, ValidationFailure
from mmpastar.grid import GridEnvironment, State, skeletonize
from mmpastar.search import WaypointList, mmp_astar
from mmpastar.waypoints import (
    PromptStyle,
    VlmSelection,
    apply_selection,
    build_llm_prompt,
    build_vlm_prompt,
    enforce_endpoints,
    format_generated_path,
    parse_generated_path,
    parse_vlm_selection,
    prune_infeasible,
    sanitize,
)
from mmpastar.waypoints.prompts import DEMOS

from conftest import DEMO, DEMO_PATH

DEMO_ANSWER = "Generated Path: [[5, 5], [26, 9], [25, 23], [20, 20]]"


# -- prompts ---------------------------------------------------------------

def test_few_shot_prompt(demo_env):
    text = build_llm_prompt(demo_env, PromptStyle.FEW_SHOT_5)
    assert DEMO_ANSWER in text
    assert text.count("Start Point:") == 6
    assert text.endswith("Vertical Barriers: [[25, 10, 22]]\nGenerated Path:")
    assert text.startswith("Identify a path between the start and goal points")


def test_cot_prompt(demo_env):
    text = build_llm_prompt(demo_env, "cot_3")
    assert text.count("Thought: ") == 3
    assert "Thought: Identify a path from [5, 5] to [20, 20]" in text
    assert text.count("Start Point:") == 4


def test_repe_prompt(demo_env):
    text = build_llm_prompt(demo_env, PromptStyle.REPE_3)
    assert "-- First Iteration on [5, 5]" in text
    assert "Selected Point: [26, 9]" in text
    assert "-- Third Iteration on [25, 23]" in text


def test_prompt_includes_skeletons(demo_env):
    ob = skeletonize([(40, 25), (41, 25), (42, 25), (41, 24), (41, 26)])
    text = build_llm_prompt(demo_env.replace(irregular=(ob,)))
    assert "Horizontal Barriers: [[10, 0, 25], [15, 30, 50], [25, 40, 43]]" in text
    assert "Vertical Barriers: [[25, 10, 22], [41, 24, 27]]" in text


def test_demonstrations_are_feasible():
    for d in DEMOS:
        env = GridEnvironment.from_dict({"width": 51, "height": 31, "start": d.start, "goal": d.goal,
                                         "horizontal_barriers": d.horizontal, "vertical_barriers": d.vertical})
        assert all(env.is_free(p) for p in d.path)
        assert d.path[0] == d.start and d.path[-1] == d.goal


def test_vlm_prompt():
    text = build_vlm_prompt(4)
    assert "goal is id 5" in text
    assert "Waypoints are indexed 1..4" in text
    assert "Do NOT create any new waypoints" in text
    assert "integers between 1 and 4" in text
    assert "num-waypoints" not in text and "{n" not in text
    assert "goal is id 1" in build_vlm_prompt(0)
    with pytest.raises(ValueError):
        build_vlm_prompt(-1)


# -- parsing ---------------------------------------------------------------

def test_parse_demo_answer():
    assert parse_generated_path(DEMO_ANSWER) == [State(*p) for p in DEMO_PATH]


def test_parse_last_marker_wins():
    text = ("Generated Path: [[1, 1], [2, 2]]\nThought: reroute around the wall.\n"
            "Generated Path:\n  [ [5,5],[26, 9] ,\n[25, 23], [20,20] ]\nDone.")
    assert parse_generated_path(text) == [State(*p) for p in DEMO_PATH]


def test_parse_skips_malformed_last_marker():
    text = f"{DEMO_ANSWER}\nGenerated Path: banana"
    assert parse_generated_path(text) == [State(*p) for p in DEMO_PATH]


@pytest.mark.parametrize("text", ["Generated Path: banana", "no marker [[1, 2]]", "Generated Path: [[1, 2], [3]]", ""])
def test_parse_failures(text):
    with pytest.raises(ParseFailure):
        parse_generated_path(text)


@given(st.lists(st.tuples(st.integers(0, 500), st.integers(0, 500)), min_size=1, max_size=12))
def test_parse_format_roundtrip(points):
    assert parse_generated_path(format_generated_path(points)) == [State(*p) for p in points]


def test_parse_vlm_example():
    sel = parse_vlm_selection('{"selected-waypoints":[2,5],"final-reasoning":"..."}', 6)
    assert sel.selected == (2, 5)


def test_parse_vlm_code_fence_and_prose():
    text = 'Here you go:\n```json\n{"selected-waypoints": [], "final-reasoning": "open corridor"}\n```'
    sel = parse_vlm_selection(text, 3)
    assert sel.selected == () and sel.reasoning == "open corridor"


@pytest.mark.parametrize("payload,num", [
    ('{"selected-waypoints":[7],"final-reasoning":"x"}', 6),
    ('{"selected-waypoints":[0],"final-reasoning":"x"}', 6),
    ('{"selected-waypoints":[2,2],"final-reasoning":"x"}', 6),
    ('{"selected-waypoints":["2"],"final-reasoning":"x"}', 6),
    ('{"selected-waypoints":[1]}', 6),
])
def test_parse_vlm_validation_failures(payload, num):
    with pytest.raises(ValidationFailure):
        parse_vlm_selection(payload, num)


def test_parse_vlm_no_json():
    with pytest.raises(ParseFailure):
        parse_vlm_selection("I keep waypoints 2 and 5.", 6)


# -- constraint enforcement -----------------------------------------------

S0, SG = State(5, 5), State(20, 20)


def test_enforce_endpoints():
    assert enforce_endpoints([S0, (26, 9)], S0, SG).targets == (S0, State(26, 9), SG)
    assert enforce_endpoints([S0, SG], S0, SG).targets == (S0, SG)
    assert enforce_endpoints([], S0, SG).targets == (S0, SG)
    assert enforce_endpoints([(26, 9), (25, 23)], S0, SG).targets == (S0, State(26, 9), State(25, 23), SG)


def test_prune_infeasible(demo_env):
    T = enforce_endpoints([(5, 10), (26, 9), (60, 3)], S0, SG)
    assert prune_infeasible(T, demo_env).targets == (S0, State(26, 9), SG)
    clean = WaypointList([S0, (26, 9), SG])
    assert prune_infeasible(clean, demo_env) == clean


def test_duplicates_collapse_without_changing_search(demo_env):
    dup = prune_infeasible([S0, (26, 9), (26, 9), (25, 23), (25, 23), SG], demo_env)
    single = WaypointList([S0, (26, 9), (25, 23), SG])
    assert dup == single
    assert mmp_astar(demo_env, dup).switches == mmp_astar(demo_env, single).switches


def test_apply_selection():
    T = WaypointList([S0, (1, 1), (2, 2), (3, 3), (4, 4), (6, 6), (7, 7), SG])
    out = apply_selection(T, VlmSelection([2, 5]))
    assert out.targets == (S0, State(2, 2), State(6, 6), SG)
    assert out.cursor == 0 and out.switch_count == 0
    assert apply_selection(T, VlmSelection(range(1, 7))).targets == T.targets
    assert apply_selection(T, VlmSelection([])).targets == (S0, SG)
    with pytest.raises(ValidationFailure):
        apply_selection(T, VlmSelection([7]))


@given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)), max_size=8), st.data())
def test_apply_selection_never_invents(points, data):
    T = enforce_endpoints(points, S0, SG)
    n = len(T) - 2
    ids = data.draw(st.lists(st.integers(1, max(n, 1)), unique=True, max_size=n)) if n else []
    out = apply_selection(T, VlmSelection(ids))
    assert set(out.targets) <= set(T.targets)
    assert out.targets[0] == S0 and out.targets[-1] == SG


@given(st.lists(st.tuples(st.integers(-3, 55), st.integers(-3, 35)), max_size=10))
def test_pipeline_output_invariant(points):
    env = GridEnvironment.from_dict(DEMO)
    T = sanitize(points, env)
    assert T.targets[0] == env.start and T.targets[-1] == env.goal
    assert all(env.is_free(t) for t in T.targets)
    assert all(a != b for a, b in zip(T.targets, T.targets[1:]))
