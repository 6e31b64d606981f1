import heapq
import sys
import math

import pytest
from hypothesis import strategies as st

from mmpastar.grid import GridEnvironment, HorizontalBarrier, State, VerticalBarrier

DEMO = {
    "width": 51,
    "height": 31,
    "start": [5, 5],
    "goal": [20, 20],
    "horizontal_barriers": [[10, 0, 25], [15, 30, 50]],
    "vertical_barriers": [[25, 10, 22]],
}
DEMO_PATH = [[5, 5], [26, 9], [25, 23], [20, 20]]


@pytest.fixture
def demo_env():
    return GridEnvironment.from_dict(DEMO)


def empty_env(w, h, start=(0, 0), goal=None):
    return GridEnvironment(w, h, State(*start), State(*(goal or (w - 1, h - 1))))


def brute_force_costs(env, source):
    """Textbook Dijkstra straight off the occupancy grid; shares no code with the package search."""
    occ = env.occupancy()
    h, w = occ.shape
    free = lambda x, y: 0 <= x < w and 0 <= y < h and not occ[y, x]
    dist = {tuple(source): 0.0}
    heap = [(0.0, tuple(source))]
    done = set()
    while heap:
        d, (x, y) = heapq.heappop(heap)
        if (x, y) in done:
            continue
        done.add((x, y))
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if dx == dy == 0:
                    continue
                nx, ny = x + dx, y + dy
                if not free(nx, ny):
                    continue
                if dx and dy and not (free(x + dx, y) and free(x, y + dy)):
                    continue
                nd = d + (math.sqrt(2) if dx and dy else 1.0)
                if nd < dist.get((nx, ny), math.inf):
                    dist[(nx, ny)] = nd
                    heapq.heappush(heap, (nd, (nx, ny)))
    return dist


@st.composite
def small_envs(draw, max_w=14, max_h=14, max_barriers=5):
    """Random barrier maps; start and goal free and distinct, not necessarily connected."""
    w = draw(st.integers(3, max_w))
    h = draw(st.integers(3, max_h))
    hb = []
    for _ in range(draw(st.integers(0, max_barriers))):
        y = draw(st.integers(0, h - 1))
        xs = draw(st.integers(0, w - 1))
        xe = draw(st.integers(xs + 1, w))
        hb.append(HorizontalBarrier(y, xs, xe))
    vb = []
    for _ in range(draw(st.integers(0, max_barriers))):
        x = draw(st.integers(0, w - 1))
        ys = draw(st.integers(0, h - 1))
        ye = draw(st.integers(ys + 1, h))
        vb.append(VerticalBarrier(x, ys, ye))
    blocked = {c for b in hb for c in b.cells()} | {c for b in vb for c in b.cells()}
    free = [State(x, y) for y in range(h) for x in range(w) if State(x, y) not in blocked]
    if len(free) < 2:
        hb, vb = [], []
        free = [State(x, y) for y in range(h) for x in range(w)]
    i = draw(st.integers(0, len(free) - 1))
    j = draw(st.integers(0, len(free) - 2))
    if j >= i:
        j += 1
    return GridEnvironment(w, h, free[i], free[j], tuple(hb), tuple(vb))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
