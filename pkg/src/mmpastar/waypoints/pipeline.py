"""Constraint enforcement applied to every proposed waypoint list."""

from __future__ import annotations

from typing import Iterable, Sequence

from ..errors import ValidationFailure
from ..grid import GridEnvironment, State
from ..search import WaypointList
from .parsing import VlmSelection, validate_selection


def _states(T) -> list[State]:
    return [State(int(t[0]), int(t[1])) for t in T]


def _collapse(states: list[State]) -> list[State]:
    out: list[State] = []
    for s in states:
        if not out or out[-1] != s:
            out.append(s)
    return out


def enforce_endpoints(T: Iterable[Sequence[int]], s0: Sequence[int], sg: Sequence[int]) -> WaypointList:
    states = _states(T)
    s0, sg = State(*s0), State(*sg)
    if not states or states[0] != s0:
        states.insert(0, s0)
    if states[-1] != sg:
        states.append(sg)
    return WaypointList(states)


def prune_infeasible(T: Iterable[Sequence[int]], env: GridEnvironment) -> WaypointList:
    """Drop interior waypoints on obstacles or off the map, then collapse repeats."""
    states = _states(T)
    if len(states) <= 2:
        return WaypointList(_collapse(states))
    kept = [states[0]] + [t for t in states[1:-1] if env.is_free(t)] + [states[-1]]
    return WaypointList(_collapse(kept))


def sanitize(T: Iterable[Sequence[int]], env: GridEnvironment) -> WaypointList:
    return prune_infeasible(enforce_endpoints(T, env.start, env.goal), env)


def apply_selection(T: WaypointList | Sequence, sel: VlmSelection) -> WaypointList:
    """Keep the endpoints plus the selected interior waypoints, in selection order."""
    states = _states(T)
    if len(states) < 2:
        raise ValidationFailure("waypoint list must hold at least start and goal")
    interior = states[1:-1]
    ids = validate_selection(sel.selected, len(interior))
    return WaypointList(_collapse([states[0]] + [interior[i - 1] for i in ids] + [states[-1]]))
