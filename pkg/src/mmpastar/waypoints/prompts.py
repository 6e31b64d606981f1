"""Prompt templates for the text-model proposal leg and the vision-model refinement leg."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from ..grid import GridEnvironment

HEADER = (
    "Identify a path between the start and goal points to navigate around obstacles "
    "and find the shortest path to the goal.\n"
    "Horizontal barriers are represented as [y, x_start, x_end], and vertical barriers "
    "are represented as [x, y_start, y_end].\n"
    'Conclude your response with the generated path in the format "Generated Path: [[x1, y1], [x2, y2], ...]".'
)

MARKER = "Generated Path:"


class PromptStyle(str, enum.Enum):
    FEW_SHOT_5 = "few_shot_5"
    COT_3 = "cot_3"
    REPE_3 = "repe_3"

    @property
    def shots(self) -> int:
        return 5 if self is PromptStyle.FEW_SHOT_5 else 3


@dataclass(frozen=True)
class Demo:
    start: list
    goal: list
    horizontal: list
    vertical: list
    path: list
    thought: str
    # (thought, selected point, evaluation) per RePE iteration
    iterations: tuple


DEMOS = (
    Demo(
        start=[5, 5], goal=[20, 20],
        horizontal=[[10, 0, 25], [15, 30, 50]], vertical=[[25, 10, 22]],
        path=[[5, 5], [26, 9], [25, 23], [20, 20]],
        thought=(
            "Identify a path from [5, 5] to [20, 20] while avoiding the horizontal barrier at y=10 "
            "spanning x=0 to x=25 by moving upwards and right, then bypass the vertical barrier at "
            "x=25 spanning y=10 to y=22, and finally move directly to [20, 20]."
        ),
        iterations=(
            ("The horizontal barrier at y=10 spanning x=0 to x=25 blocks the direct path. "
             "Move to the upper-right corner of the barrier.",
             [26, 9], "The point [26, 9] bypasses the horizontal barrier efficiently."),
            ("The vertical barrier at x=25 blocks direct motion to [20, 20]; move around it.",
             [25, 23], "The new point successfully avoids the barrier."),
            ("No further obstacles to the goal.", [20, 20], None),
        ),
    ),
    Demo(
        start=[3, 25], goal=[46, 3],
        horizontal=[[15, 10, 50]], vertical=[[20, 0, 12]],
        path=[[3, 25], [7, 14], [24, 13], [46, 3]],
        thought=(
            "The horizontal barrier at y=15 covers x=10 to x=50, so pass it on the left near x=7. "
            "The vertical barrier at x=20 rises from y=0 to y=12, so cross it through the gap at "
            "y=13 before descending to [46, 3]."
        ),
        iterations=(
            ("The horizontal barrier at y=15 spanning x=10 to x=50 blocks the way down. "
             "Go around its left end.",
             [7, 14], "The point [7, 14] clears the left end of the barrier."),
            ("The vertical barrier at x=20 spans y=0 to y=12; stay above it while moving right.",
             [24, 13], "The point [24, 13] is past the vertical barrier."),
            ("Nothing remains between [24, 13] and the goal.", [46, 3], None),
        ),
    ),
    Demo(
        start=[45, 27], goal=[4, 4],
        horizontal=[[20, 15, 50], [8, 0, 30]], vertical=[[10, 9, 20]],
        path=[[45, 27], [11, 21], [32, 7], [4, 4]],
        thought=(
            "The barrier at y=20 spans x=15 to x=50, so move left above it and round its end near "
            "x=11. The barrier at y=8 spans x=0 to x=30, so it must be passed on its right near "
            "x=32 before heading left to [4, 4]."
        ),
        iterations=(
            ("The horizontal barrier at y=20 spanning x=15 to x=50 blocks the descent. "
             "Round its left end.",
             [11, 21], "The point [11, 21] sits just past the end of the barrier."),
            ("The horizontal barrier at y=8 spans x=0 to x=30 and the goal lies below it. "
             "Pass its right end.",
             [32, 7], "The point [32, 7] is below the barrier and clear of it."),
            ("The goal is directly reachable.", [4, 4], None),
        ),
    ),
    Demo(
        start=[5, 15], goal=[45, 15],
        horizontal=[], vertical=[[25, 5, 30], [35, 0, 20]],
        path=[[5, 15], [25, 3], [36, 23], [45, 15]],
        thought=(
            "The vertical barrier at x=25 leaves a gap below y=5 and the vertical barrier at x=35 "
            "leaves a gap above y=20, so weave under the first and over the second."
        ),
        iterations=(
            ("The vertical barrier at x=25 spans y=5 to y=30. Use the gap below it.",
             [25, 3], "The point [25, 3] reaches the gap under the barrier."),
            ("The vertical barrier at x=35 spans y=0 to y=20. Use the gap above it.",
             [36, 23], "The point [36, 23] clears the top of the second barrier."),
            ("The goal is now in the open.", [45, 15], None),
        ),
    ),
    Demo(
        start=[40, 5], goal=[10, 25],
        horizontal=[[15, 5, 45]], vertical=[[20, 16, 30]],
        path=[[40, 5], [3, 14], [10, 25]],
        thought=(
            "The barrier at y=15 spans x=5 to x=45 and the vertical barrier at x=20 closes the "
            "region to its right, so cross y=15 through the gap left of x=5."
        ),
        iterations=(
            ("The horizontal barrier at y=15 spanning x=5 to x=45 blocks the way up, and the right "
             "side is closed by the vertical barrier at x=20. Use the left gap.",
             [3, 14], "The point [3, 14] reaches the gap left of the barrier."),
            ("The goal is reachable from the gap.", [10, 25], None),
        ),
    ),
)


def _fmt(value) -> str:
    return json.dumps(value)


def _problem(start, goal, horizontal, vertical) -> str:
    return (
        f"Start Point: {_fmt(start)}\n"
        f"Goal Point: {_fmt(goal)}\n"
        f"Horizontal Barriers: {_fmt(horizontal)}\n"
        f"Vertical Barriers: {_fmt(vertical)}\n"
    )


def format_generated_path(path) -> str:
    return f"{MARKER} {_fmt([[int(p[0]), int(p[1])] for p in path])}"


def _demo_block(demo: Demo, style: PromptStyle) -> str:
    text = _problem(demo.start, demo.goal, demo.horizontal, demo.vertical)
    if style is PromptStyle.COT_3:
        text += f"Thought: {demo.thought}\n"
    elif style is PromptStyle.REPE_3:
        ordinals = ("First", "Second", "Third", "Fourth", "Fifth")
        current = demo.start
        for n, (thought, point, evaluation) in enumerate(demo.iterations):
            text += f"-- {ordinals[n]} Iteration on {_fmt(current)}\n"
            text += f"Thought: {thought}\n"
            text += f"Selected Point: {_fmt(point)}\n"
            if evaluation:
                text += f"Evaluation: {evaluation}\n"
            current = point
    return text + format_generated_path(demo.path)


def build_llm_prompt(env: GridEnvironment, style=PromptStyle.FEW_SHOT_5) -> str:
    """Full text prompt for one map; irregular obstacles appear as their skeleton segments."""
    style = PromptStyle(style)
    horizontal, vertical = env.barrier_lists(include_skeletons=True)
    demos = "\n\n".join(_demo_block(d, style) for d in DEMOS[:style.shots])
    query = _problem([env.start.x, env.start.y], [env.goal.x, env.goal.y], horizontal, vertical)
    return f"{HEADER}\n\n{demos}\n\n{query}{MARKER}"


VLM_TEMPLATE = """\
You are presented with two visual representations of the same maze environment. The obstacles are defined by two distinct visual cues: standard black grid walls and irregular red regions delineated by dashed contours:
1. First image: Shows the clean map with start point (blue square) and goal point (green square).
2. Second image: Shows the same map with {n} waypoints (yellow stars) placed along a blue path. Waypoints are indexed 1..{n}; goal is id {n_plus_1}.

What is a "waypoint" and its role (read carefully):
- A waypoint (yellow star) is a navigation landmark, a coarse checkpoint placed in clearly open space that helps the robot orient its heading and follow a feasible route.
- It is NOT a precise docking coordinate. Waypoints indicate:
  - Turning points (where the robot must change direction)
  - Corridor transitions (entering or leaving a corridor)
  - Decision junctions (where multiple passages meet)
- A valid waypoint MUST be centered in open space with visible clearance from walls. Waypoints in dead-ends, touching/near walls, or inside narrow squeezes are invalid and must be discarded.
- Because the robot travels in straight-line segments between consecutive waypoints, every such segment in the final path must be visibly open and free of contact with barriers.
- Important: The second image (with yellow stars) is only a suggested route, it is NOT guaranteed to be a valid robot path. You must infer safety from the barrier layout (do not assume the blue path is correct).

IMPORTANT RULES:
- This is for a physical robot. The robot cannot touch, graze, or squeeze between walls. Be conservative: if a straight segment is ambiguous or appears to touch walls, treat it as blocked.
- Do NOT create any new waypoints. Choose only from the existing numbered candidate waypoints shown in the second image. Do NOT output internal chain-of-thought. Output only the structured JSON described below using factual, image-tied statements.

TASK (two stages, output combined):
1. First, inspect the clean map (first image) globally and identify which corridors or directions from start toward goal are visibly open or blocked.
2. Then, using that global view, evaluate each original waypoint in order and decide whether it is essential as a navigation marker:
   - Keep a waypoint if it lies in open space and is necessary as a turning point, corridor transition, or decision marker so that start → selected-waypoint-1 → ... → goal can be realized by clearly open straight segments.
   - Discard a waypoint if it lies in a blocked, narrow, redundant, or dead-end location that would force the robot into unsafe or blocked segments.

OUTPUT (strict JSON only; nothing else):
- "selected-waypoints": [ list of integer waypoint IDs to KEEP in traversal order, e.g. [2, 5] ], must contain only integers between 1 and {n}. If no original waypoint is needed, return an empty list.
- "final-reasoning": "(a) explicitly describe the overall feasible route(s) observed on the clean map before considering waypoints, and (b) explain for each chosen waypoint why it is necessary and for discarded waypoints why they were removed. Keep statements factual and tied to visible barriers/corridors, must be factual and image-referential"
"""


def build_vlm_prompt(num_waypoints: int) -> str:
    if num_waypoints < 0:
        raise ValueError("num_waypoints must be >= 0")
    return VLM_TEMPLATE.format(n=num_waypoints, n_plus_1=num_waypoints + 1)
