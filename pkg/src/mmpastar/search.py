"""A* with pluggable waypoint guidance, plus a Dijkstra oracle for verification.

Three entry points share one search loop:

* :func:`astar` - plain A* with an admissible base heuristic.
* :func:`llm_astar` - waypoint-biased heuristic ``h(n) + cost(n, t_k)``.
* :func:`mmp_astar` - the same bias scaled by ``alpha ** k``, where ``k`` counts
  waypoint switches so far.

Counters: ``operations`` is the number of nodes popped from the open set and
expanded (the goal pop is not an expansion); ``peak_storage`` is the maximum of
``|open| + |closed|`` observed after each expansion.
"""

from __future__ import annotations

import heapq
import math
import time
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .errors import BoundViolated, GoalBlocked, InvalidWaypoints, StartBlocked, Unsolvable
from .grid import HEURISTICS, SQRT2, GridEnvironment, State

FOUND = "found"
UNREACHABLE = "unreachable"

TIE_BREAK_POLICIES = ("max_g_then_yx",)


@dataclass(frozen=True)
class WaypointList:
    """Ordered targets ending at the goal; ``cursor`` indexes the live target."""

    targets: tuple
    cursor: int = 0
    switch_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(State(*t) for t in self.targets))
        if self.targets and not 0 <= self.cursor < len(self.targets):
            raise InvalidWaypoints(f"cursor {self.cursor} outside 0..{len(self.targets) - 1}")
        if self.switch_count < 0:
            raise InvalidWaypoints("switch_count must be non-negative")

    def __len__(self):
        return len(self.targets)

    def __iter__(self):
        return iter(self.targets)

    @property
    def current(self) -> State:
        return self.targets[self.cursor]

    @property
    def interior(self) -> tuple:
        return self.targets[1:-1]

    def advanced(self) -> "WaypointList":
        return replace(self, cursor=self.cursor + 1, switch_count=self.switch_count + 1)

    def started(self, start: Sequence[int]) -> "WaypointList":
        """Skip a leading start state so the first live target is informative."""
        if self.cursor == 0 and len(self.targets) > 1 and self.targets[0] == tuple(start):
            return replace(self, cursor=1)
        return self

    def reset(self) -> "WaypointList":
        return replace(self, cursor=0, switch_count=0)

    def as_lists(self) -> list[list[int]]:
        return [[t.x, t.y] for t in self.targets]


@dataclass(frozen=True)
class SearchConfig:
    mode: str = "waypoint"
    alpha: float = 0.7
    heuristic: str = "euclidean"
    tie_break: str = "max_g_then_yx"

    def __post_init__(self):
        if self.mode not in ("plain_astar", "waypoint"):
            raise ValueError(f"unknown search mode {self.mode!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.heuristic not in HEURISTICS:
            raise ValueError(f"unknown heuristic {self.heuristic!r}")
        if self.tie_break not in TIE_BREAK_POLICIES:
            raise ValueError(f"unknown tie-break policy {self.tie_break!r}")


@dataclass(frozen=True)
class SearchResult:
    status: str
    path: tuple
    cost: float
    operations: int
    peak_storage: int
    switches: int
    # Wall clock is excluded from equality so identical runs compare equal.
    runtime: float = field(default=0.0, compare=False)

    @property
    def found(self) -> bool:
        return self.status == FOUND

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "path": [[s[0], s[1]] for s in self.path],
            "cost": self.cost,
            "operations": self.operations,
            "peak_storage": self.peak_storage,
            "switches": self.switches,
            "runtime_ms": self.runtime * 1000.0,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SearchResult":
        return cls(
            status=data["status"],
            path=tuple(State(*p) for p in data["path"]),
            cost=float(data["cost"]),
            operations=int(data["operations"]),
            peak_storage=int(data["peak_storage"]),
            switches=int(data["switches"]),
            runtime=float(data.get("runtime_ms", 0.0)) / 1000.0,
        )


# observer(node, k, h_value) is called every time the guided heuristic is evaluated
Observer = Callable[[State, int, float], None]


def _search(env: GridEnvironment, waypoints: Optional[WaypointList], alpha: float,
            heuristic: str, observer: Optional[Observer] = None) -> SearchResult:
    t0 = time.perf_counter()
    if not env.is_free(env.start):
        raise StartBlocked(f"start {tuple(env.start)} is blocked")
    if not env.is_free(env.goal):
        raise GoalBlocked(f"goal {tuple(env.goal)} is blocked")

    w = env.width
    start = env.index(env.start)
    goal = env.index(env.goal)
    gx, gy = env.goal
    succ = env.successors
    sqrt = math.sqrt
    octile = heuristic == "octile"

    hcache = {}

    def h_base(i):
        v = hcache.get(i)
        if v is None:
            dx = abs(i % w - gx)
            dy = abs(i // w - gy)
            if octile:
                v = (max(dx, dy) - min(dx, dy)) + SQRT2 * min(dx, dy)
            else:
                v = sqrt(dx * dx + dy * dy)
            hcache[i] = v
        return v

    guided = waypoints is not None
    if guided:
        targets = waypoints.targets
        if not targets or targets[-1] != env.goal:
            raise InvalidWaypoints("waypoint list must end at the goal")
        for t in targets:
            if not env.is_free(t):
                raise InvalidWaypoints(f"waypoint {tuple(t)} is not in free space")
        wl = waypoints.started(env.start)
        cursor = wl.cursor
        k = wl.switch_count
        tx, ty = targets[cursor]
        t_idx = ty * w + tx
        weight = alpha ** k  # 0.0 ** 0 == 1.0, so alpha=0 still guides the first leg
    else:
        k = 0

    g = {start: 0.0}
    parent = {start: -1}
    open_ = {start}
    closed = set()

    def f_of(i):
        if not guided:
            return g[i] + h_base(i)
        dx = i % w - tx
        dy = i // w - ty
        hv = h_base(i) + weight * sqrt(dx * dx + dy * dy)
        if observer is not None:
            observer(env.state(i), k, hv)
        return g[i] + hv

    # Heap key (f, -g, index): ties prefer larger g, then smaller (y, x).
    heap = [(f_of(start), -0.0, start)]
    push, pop = heapq.heappush, heapq.heappop
    peak = 1
    ops = 0
    found = False

    while heap:
        _, neg_g, i = pop(heap)
        if i in closed or -neg_g != g[i]:
            continue
        if i == goal:
            found = True
            break
        open_.discard(i)
        closed.add(i)
        ops += 1
        gi = g[i]
        for j, c in succ(i):
            if guided and j == t_idx and t_idx != goal:
                cursor += 1
                k += 1
                tx, ty = targets[cursor]
                t_idx = ty * w + tx
                weight = alpha ** k
                heap = [(f_of(o), -g[o], o) for o in open_]
                heapq.heapify(heap)
            if j in closed:
                continue
            gt = gi + c
            if j not in open_ or gt < g[j]:
                parent[j] = i
                g[j] = gt
                push(heap, (f_of(j), -gt, j))
                open_.add(j)
        size = len(open_) + len(closed)
        if size > peak:
            peak = size

    runtime = time.perf_counter() - t0
    if not found:
        return SearchResult(UNREACHABLE, (), math.inf, ops, peak, k, runtime)
    path = []
    i = goal
    while i != -1:
        path.append(env.state(i))
        i = parent[i]
    path.reverse()
    return SearchResult(FOUND, tuple(path), g[goal], ops, peak, k, runtime)


def astar(env: GridEnvironment, config: SearchConfig = SearchConfig(mode="plain_astar")) -> SearchResult:
    """Plain A*; ``config.alpha`` and any waypoints are ignored."""
    return _search(env, None, 1.0, config.heuristic)


def mmp_astar(env: GridEnvironment, waypoints: WaypointList, config: SearchConfig = SearchConfig(),
              observer: Optional[Observer] = None) -> SearchResult:
    """A* with the decaying waypoint term ``alpha ** k * cost(t_k, n)``."""
    if config.mode == "plain_astar":
        return astar(env, config)
    if not isinstance(waypoints, WaypointList):
        waypoints = WaypointList(tuple(waypoints))
    return _search(env, waypoints, config.alpha, config.heuristic, observer)


def llm_astar(env: GridEnvironment, waypoints: WaypointList, config: SearchConfig = SearchConfig(),
              observer: Optional[Observer] = None) -> SearchResult:
    """Waypoint-biased A* with no decay (``alpha`` pinned to 1)."""
    return mmp_astar(env, waypoints, replace(config, mode="waypoint", alpha=1.0), observer)


# ---------------------------------------------------------------------------
# Oracle
# ---------------------------------------------------------------------------

class CostField(Mapping):
    """Exact shortest-path costs to a source, keyed by reachable ``State``."""

    def __init__(self, source: State, dist: np.ndarray, predecessors: np.ndarray):
        self.source = source
        self.dist = dist  # (height, width), inf where unreachable
        self._pred = predecessors
        self._reachable = np.flatnonzero(np.isfinite(dist.ravel()))

    def __getitem__(self, s):
        x, y = s[0], s[1]
        if not (0 <= y < self.dist.shape[0] and 0 <= x < self.dist.shape[1]):
            raise KeyError(s)
        v = self.dist[y, x]
        if not np.isfinite(v):
            raise KeyError(s)
        return float(v)

    def __iter__(self):
        w = self.dist.shape[1]
        for i in self._reachable:
            yield State(int(i % w), int(i // w))

    def __len__(self):
        return len(self._reachable)

    def path_from(self, s: Sequence[int]) -> list[State]:
        """Optimal path from ``s`` to the source following predecessor links."""
        w = self.dist.shape[1]
        if tuple(s) not in self:
            raise Unsolvable(f"{tuple(s)} cannot reach {tuple(self.source)}")
        path = [State(*s)]
        i = s[1] * w + s[0]
        while path[-1] != self.source:
            i = int(self._pred[i])
            path.append(State(i % w, i // w))
        return path


def _move_graph(env: GridEnvironment) -> csr_matrix:
    free = ~env.occupancy()
    h, w = free.shape
    idx = np.arange(h * w).reshape(h, w)
    rows, cols, costs = [], [], []
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            # source window and destination window of equal shape
            sy = slice(max(0, -dy), h - max(0, dy))
            sx = slice(max(0, -dx), w - max(0, dx))
            ty = slice(max(0, dy), h - max(0, -dy))
            tx = slice(max(0, dx), w - max(0, -dx))
            ok = free[sy, sx] & free[ty, tx]
            if dx and dy and not env.corner_cutting:
                ok &= free[sy, tx] & free[ty, sx]
            rows.append(idx[sy, sx][ok])
            cols.append(idx[ty, tx][ok])
            costs.append(np.full(int(ok.sum()), SQRT2 if dx and dy else 1.0))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    costs = np.concatenate(costs)
    return csr_matrix((costs, (rows, cols)), shape=(h * w, h * w))


def dijkstra_oracle(env: GridEnvironment, source: Sequence[int]) -> CostField:
    """Exact cost from every reachable free cell to ``source``."""
    source = State(*source)
    if not env.is_free(source):
        raise StartBlocked(f"oracle source {tuple(source)} is blocked")
    graph = _move_graph(env)
    dist, pred = _csgraph_dijkstra(graph, directed=True, indices=env.index(source), return_predecessors=True)
    return CostField(source, dist.reshape(env.height, env.width), pred)


def optimal_path(env: GridEnvironment) -> list[State]:
    """One optimal start-to-goal path, or :class:`Unsolvable`."""
    field_ = dijkstra_oracle(env, env.goal)
    return field_.path_from(env.start)


def is_solvable(env: GridEnvironment) -> bool:
    return env.start in dijkstra_oracle(env, env.goal)


# ---------------------------------------------------------------------------
# Bound checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    evaluations: int
    violations: int
    d_max: float
    min_slack: float
    max_overestimate: float


def check_bounded_suboptimality(env: GridEnvironment, waypoints: WaypointList, alpha: float,
                                heuristic: str = "euclidean", tol: float = 1e-9) -> BoundReport:
    """Assert ``h(n) <= h*(n) + alpha**k * D_max`` at every heuristic evaluation.

    ``D_max`` is the Euclidean diameter of the grid, which bounds any
    Euclidean waypoint distance. Raises :class:`BoundViolated` on the first
    offending node.
    """
    truth = dijkstra_oracle(env, env.goal)
    d_max = env.diameter
    stats = {"n": 0, "min_slack": math.inf, "over": -math.inf}

    def observe(node, k, value):
        bound = truth[node] + (alpha ** k) * d_max
        stats["n"] += 1
        slack = bound - value
        if slack < -tol:
            raise BoundViolated(node, value, bound)
        stats["min_slack"] = min(stats["min_slack"], slack)
        stats["over"] = max(stats["over"], value - truth[node])

    mmp_astar(env, waypoints, SearchConfig(alpha=alpha, heuristic=heuristic), observer=observe)
    return BoundReport(stats["n"], 0, d_max, stats["min_slack"], stats["over"])


def decay_coefficient(alpha: float, k: int) -> float:
    return alpha ** k


def decay_horizon(alpha: float, d_max: float, eps: float) -> int:
    """Switches needed before ``alpha**K * d_max`` drops below ``eps``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("decay horizon needs 0 < alpha < 1")
    return max(0, math.ceil(math.log(eps / d_max) / math.log(alpha)))
