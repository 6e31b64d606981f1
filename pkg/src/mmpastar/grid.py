"""Grid world model: occupancy, Moore-neighborhood moves and irregular obstacles.

Cells are addressed as ``State(x, y)`` with ``x`` the column and ``y`` the row.
Barrier extents are half-open, so ``HorizontalBarrier(10, 0, 25)`` blocks
cells ``(0, 10) .. (24, 10)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import EmptyObstacle, InvalidEnvironment

SQRT2 = math.sqrt(2.0)

# Fixed generation order; the search relies on it for reproducible traces.
MOVES = (
    (1, 0, 1.0),
    (-1, 0, 1.0),
    (0, 1, 1.0),
    (0, -1, 1.0),
    (1, 1, SQRT2),
    (1, -1, SQRT2),
    (-1, 1, SQRT2),
    (-1, -1, SQRT2),
)


class State(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True)
class HorizontalBarrier:
    y: int
    x_start: int
    x_end: int

    def cells(self) -> list[State]:
        return [State(x, self.y) for x in range(self.x_start, self.x_end)]

    def as_list(self) -> list[int]:
        return [self.y, self.x_start, self.x_end]


@dataclass(frozen=True)
class VerticalBarrier:
    x: int
    y_start: int
    y_end: int

    def cells(self) -> list[State]:
        return [State(self.x, y) for y in range(self.y_start, self.y_end)]

    def as_list(self) -> list[int]:
        return [self.x, self.y_start, self.y_end]


@dataclass(frozen=True)
class IrregularObstacle:
    cells: frozenset
    centroid: tuple
    horizontal: HorizontalBarrier
    vertical: VerticalBarrier

    @property
    def anchor(self) -> State:
        """Cell where the two skeleton segments cross."""
        return State(self.vertical.x, self.horizontal.y)

    @property
    def skeleton(self) -> tuple[HorizontalBarrier, VerticalBarrier]:
        return self.horizontal, self.vertical


def euclidean(a: Sequence[int], b: Sequence[int]) -> float:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return math.sqrt(dx * dx + dy * dy)


def octile(a: Sequence[int], b: Sequence[int]) -> float:
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    return (max(dx, dy) - min(dx, dy)) + SQRT2 * min(dx, dy)


HEURISTICS = {"euclidean": euclidean, "octile": octile}


def _is_8_connected(cells: frozenset) -> bool:
    first = next(iter(cells))
    seen = {first}
    stack = [first]
    while stack:
        x, y = stack.pop()
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                nb = (x + dx, y + dy)
                if nb in cells and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
    return len(seen) == len(cells)


def skeletonize(cells: Iterable[Sequence[int]]) -> IrregularObstacle:
    """Reduce a blob to one horizontal and one vertical unit-width segment.

    Both segments cross at the cell containing the centroid and are clipped to
    the contiguous run of blob cells through it. When the centroid falls
    outside a non-convex blob, the nearest blob cell is used instead.
    """
    cellset = frozenset(State(int(c[0]), int(c[1])) for c in cells)
    if not cellset:
        raise EmptyObstacle("irregular obstacle has no cells")
    if not _is_8_connected(cellset):
        raise InvalidEnvironment("irregular obstacle cells are not 8-connected")

    n = len(cellset)
    xc = math.fsum(c.x for c in cellset) / n
    yc = math.fsum(c.y for c in cellset) / n
    anchor = State(math.floor(xc + 0.5), math.floor(yc + 0.5))
    if anchor not in cellset:
        anchor = min(cellset, key=lambda c: ((c.x - xc) ** 2 + (c.y - yc) ** 2, c.y, c.x))

    x_lo = anchor.x
    while (x_lo - 1, anchor.y) in cellset:
        x_lo -= 1
    x_hi = anchor.x + 1
    while (x_hi, anchor.y) in cellset:
        x_hi += 1
    y_lo = anchor.y
    while (anchor.x, y_lo - 1) in cellset:
        y_lo -= 1
    y_hi = anchor.y + 1
    while (anchor.x, y_hi) in cellset:
        y_hi += 1

    return IrregularObstacle(
        cells=cellset,
        centroid=(xc, yc),
        horizontal=HorizontalBarrier(anchor.y, x_lo, x_hi),
        vertical=VerticalBarrier(anchor.x, y_lo, y_hi),
    )


@dataclass(frozen=True)
class GridEnvironment:
    width: int
    height: int
    start: State
    goal: State
    horizontal_barriers: tuple = ()
    vertical_barriers: tuple = ()
    irregular: tuple = ()
    # Ablation only; never serialized.
    corner_cutting: bool = False
    _blocked: bytearray = field(init=False, repr=False, compare=False)
    _adj: list = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "start", State(*self.start))
        set_(self, "goal", State(*self.goal))
        set_(self, "horizontal_barriers", tuple(self.horizontal_barriers))
        set_(self, "vertical_barriers", tuple(self.vertical_barriers))
        set_(self, "irregular", tuple(self.irregular))
        w, h = self.width, self.height
        if w <= 0 or h <= 0:
            raise InvalidEnvironment(f"map must have positive area, got {w}x{h}")

        blocked = bytearray(w * h)
        for b in self.horizontal_barriers:
            if not (0 <= b.y < h and 0 <= b.x_start < b.x_end <= w):
                raise InvalidEnvironment(f"horizontal barrier {b.as_list()} out of range")
            row = b.y * w
            blocked[row + b.x_start:row + b.x_end] = b"\x01" * (b.x_end - b.x_start)
        for b in self.vertical_barriers:
            if not (0 <= b.x < w and 0 <= b.y_start < b.y_end <= h):
                raise InvalidEnvironment(f"vertical barrier {b.as_list()} out of range")
            for y in range(b.y_start, b.y_end):
                blocked[y * w + b.x] = 1
        for ob in self.irregular:
            for c in ob.cells:
                if not (0 <= c.x < w and 0 <= c.y < h):
                    raise InvalidEnvironment(f"irregular obstacle cell {tuple(c)} out of range")
                blocked[c.y * w + c.x] = 1
        set_(self, "_blocked", blocked)
        set_(self, "_adj", [None] * (w * h))

        for name, s in (("start", self.start), ("goal", self.goal)):
            if not self.is_free(s):
                raise InvalidEnvironment(f"{name} {tuple(s)} is not in free space")
        if self.start == self.goal:
            raise InvalidEnvironment("start and goal coincide")

    # -- cell addressing ---------------------------------------------------
    def index(self, s: Sequence[int]) -> int:
        return s[1] * self.width + s[0]

    def state(self, i: int) -> State:
        return State(i % self.width, i // self.width)

    def in_bounds(self, s: Sequence[int]) -> bool:
        return 0 <= s[0] < self.width and 0 <= s[1] < self.height

    def is_free(self, s: Sequence[int]) -> bool:
        x, y = s[0], s[1]
        if not (0 <= x < self.width and 0 <= y < self.height):
            return False
        return not self._blocked[y * self.width + x]

    @property
    def diameter(self) -> float:
        """Largest Euclidean distance between two cells of the map."""
        return euclidean((0, 0), (self.width - 1, self.height - 1))

    def successors(self, i: int) -> list:
        """Legal moves out of cell index ``i`` as ``(index, cost)`` pairs."""
        adj = self._adj[i]
        if adj is not None:
            return adj
        w, h = self.width, self.height
        blocked = self._blocked
        x, y = i % w, i // w
        adj = []
        if not blocked[i]:
            for dx, dy, cost in MOVES:
                nx, ny = x + dx, y + dy
                if not (0 <= nx < w and 0 <= ny < h) or blocked[ny * w + nx]:
                    continue
                if dx and dy and not self.corner_cutting:
                    if blocked[y * w + nx] or blocked[ny * w + x]:
                        continue
                adj.append((ny * w + nx, cost))
        self._adj[i] = adj
        return adj

    def is_legal_step(self, a: Sequence[int], b: Sequence[int]) -> bool:
        dx, dy = b[0] - a[0], b[1] - a[1]
        if (dx, dy) == (0, 0) or abs(dx) > 1 or abs(dy) > 1:
            return False
        if not (self.is_free(a) and self.is_free(b)):
            return False
        if dx and dy and not self.corner_cutting:
            return self.is_free((a[0] + dx, a[1])) and self.is_free((a[0], a[1] + dy))
        return True

    # -- whole-map views ---------------------------------------------------
    def occupancy(self) -> np.ndarray:
        """Boolean ``(height, width)`` array, True on obstacle cells."""
        return np.frombuffer(bytes(self._blocked), dtype=np.uint8).reshape(self.height, self.width).astype(bool)

    def obstacle_cells(self) -> set:
        return {self.state(i) for i, b in enumerate(self._blocked) if b}

    def barrier_lists(self, include_skeletons: bool = True) -> tuple[list, list]:
        """Barriers as ``[y, xs, xe]`` / ``[x, ys, ye]`` lists, skeletons appended."""
        hb = [b.as_list() for b in self.horizontal_barriers]
        vb = [b.as_list() for b in self.vertical_barriers]
        if include_skeletons:
            for ob in self.irregular:
                hb.append(ob.horizontal.as_list())
                vb.append(ob.vertical.as_list())
        return hb, vb

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "start": [self.start.x, self.start.y],
            "goal": [self.goal.x, self.goal.y],
            "horizontal_barriers": [b.as_list() for b in self.horizontal_barriers],
            "vertical_barriers": [b.as_list() for b in self.vertical_barriers],
            "irregular": [
                {"cells": [[c.x, c.y] for c in sorted(ob.cells, key=lambda c: (c.y, c.x))]}
                for ob in self.irregular
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridEnvironment":
        return cls(
            width=int(data["width"]),
            height=int(data["height"]),
            start=State(*data["start"]),
            goal=State(*data["goal"]),
            horizontal_barriers=tuple(HorizontalBarrier(*map(int, b)) for b in data.get("horizontal_barriers", [])),
            vertical_barriers=tuple(VerticalBarrier(*map(int, b)) for b in data.get("vertical_barriers", [])),
            irregular=tuple(skeletonize(ob["cells"]) for ob in data.get("irregular", [])),
        )

    def replace(self, **changes) -> "GridEnvironment":
        kwargs = {
            "width": self.width,
            "height": self.height,
            "start": self.start,
            "goal": self.goal,
            "horizontal_barriers": self.horizontal_barriers,
            "vertical_barriers": self.vertical_barriers,
            "irregular": self.irregular,
            "corner_cutting": self.corner_cutting,
        }
        kwargs.update(changes)
        return GridEnvironment(**kwargs)


def is_free(env: GridEnvironment, s: Sequence[int]) -> bool:
    return env.is_free(s)


def neighbors(env: GridEnvironment, s: Sequence[int]) -> list[tuple[State, float]]:
    if not env.is_free(s):
        return []
    return [(env.state(j), cost) for j, cost in env.successors(env.index(s))]


def validate_path(env: GridEnvironment, path: Sequence[Sequence[int]]) -> bool:
    """True iff ``path`` is a collision-free chain of legal moves from start to goal."""
    if not path:
        return False
    if tuple(path[0]) != env.start or tuple(path[-1]) != env.goal:
        return False
    if not all(env.is_free(s) for s in path):
        return False
    return all(env.is_legal_step(a, b) for a, b in zip(path, path[1:]))


def path_cost(path: Sequence[Sequence[int]]) -> float:
    """Left-to-right sum of step costs, matching how the search accumulates g."""
    total = 0.0
    for a, b in zip(path, path[1:]):
        total += SQRT2 if (a[0] != b[0] and a[1] != b[1]) else 1.0
    return total
