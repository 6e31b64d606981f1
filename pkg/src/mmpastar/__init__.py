"""Waypoint-guided grid path planning: A*, LLM-A* and MMP-A* with adaptive decay."""

from .grid import (
    GridEnvironment,
    HorizontalBarrier,
    IrregularObstacle,
    State,
    VerticalBarrier,
    euclidean,
    is_free,
    neighbors,
    octile,
    skeletonize,
    validate_path,
)
from .search import (
    SearchConfig,
    SearchResult,
    WaypointList,
    astar,
    check_bounded_suboptimality,
    dijkstra_oracle,
    llm_astar,
    mmp_astar,
)

__version__ = "0.1.0"
