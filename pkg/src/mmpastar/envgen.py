"""Procedural maze generation, scaling, complexity ladders and suite persistence."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Union

import numpy as np

from .errors import FileError, GenerationExhausted, InvalidEnvironment, SchemaError
from .grid import GridEnvironment, HorizontalBarrier, IrregularObstacle, State, VerticalBarrier, euclidean, skeletonize
from .search import is_solvable

# barrier totals per complexity level; consecutive levels differ by 2 or 3
COMPLEXITY_BARRIERS = {1: 2, 2: 5, 3: 7, 4: 10, 5: 12}

# (width, height) per scale level; every level is an integer multiple of level 1
BASE_SCALE = (50, 30)
SCALE_FACTORS = {1: 1, 2: 2, 3: 4, 4: 6, 5: 8}
SCALE_LEVELS = {lvl: (BASE_SCALE[0] * f, BASE_SCALE[1] * f) for lvl, f in SCALE_FACTORS.items()}

PRESETS = ("paper-core", "complexity", "scale", "irregular", "trap")
PRESET_COUNTS = {"paper-core": 200, "complexity": 20, "scale": 10, "irregular": 50, "trap": 20}


@dataclass(frozen=True)
class GenParams:
    width: int = 100
    height: int = 60
    n_horizontal: int = 6
    n_vertical: int = 6
    n_irregular: int = 0
    min_start_goal_dist: float = 0.5
    seed: int = 0
    # barrier length as a fraction of the map side it runs along
    barrier_length: tuple = (0.3, 0.8)
    irregular_area: tuple = (20, 60)
    max_attempts: int = 10_000

    def __post_init__(self):
        if min(self.n_horizontal, self.n_vertical, self.n_irregular) < 0:
            raise ValueError("obstacle counts must be non-negative")
        if not 0.0 <= self.min_start_goal_dist < 1.0:
            raise ValueError("min_start_goal_dist must lie in [0, 1)")
        if self.width < 2 or self.height < 2:
            raise ValueError("map must be at least 2x2")


@dataclass(frozen=True)
class LevelSuite:
    complexity_levels: dict = field(default_factory=lambda: dict(COMPLEXITY_BARRIERS))
    scale_levels: dict = field(default_factory=lambda: dict(SCALE_LEVELS))

    def complexity_params(self, level: int, **overrides) -> GenParams:
        n = self.complexity_levels[level]
        base = dict(n_horizontal=n // 2, n_vertical=n - n // 2)
        base.update(overrides)
        return GenParams(**base)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def instance_seed(suite_seed: int, index: int) -> int:
    """Independent 64-bit stream per (suite, instance) pair."""
    return int(np.random.SeedSequence([suite_seed, index]).generate_state(1, np.uint64)[0])


def generate_irregular(params: GenParams, seed, area: Optional[int] = None,
                       blocked: Optional[np.ndarray] = None) -> IrregularObstacle:
    """Grow a 4-connected blob by random walk from a random seed cell."""
    rng = _rng(seed)
    if area is None:
        lo, hi = params.irregular_area
        area = int(rng.integers(lo, hi + 1))
    if area < 1:
        raise ValueError("irregular obstacle area must be at least 1 cell")
    w, h = params.width, params.height
    area = min(area, w * h)
    cx = int(rng.integers(0, w))
    cy = int(rng.integers(0, h))
    cells = [(cx, cy)]
    members = {(cx, cy)}
    stalls = 0
    while len(cells) < area and stalls < 50 * area:
        x, y = cells[int(rng.integers(len(cells)))]
        dx, dy = ((1, 0), (-1, 0), (0, 1), (0, -1))[int(rng.integers(4))]
        nb = (x + dx, y + dy)
        if nb in members or not (0 <= nb[0] < w and 0 <= nb[1] < h):
            stalls += 1
            continue
        cells.append(nb)
        members.add(nb)
    return skeletonize(cells)


def _random_barriers(rng, params: GenParams):
    w, h = params.width, params.height
    lo, hi = params.barrier_length
    hb, vb = [], []
    for _ in range(params.n_horizontal):
        length = int(rng.integers(max(1, int(lo * w)), max(1, int(hi * w)) + 1))
        y = int(rng.integers(1, h - 1)) if h > 2 else 0
        xs = int(rng.integers(0, w - length + 1))
        hb.append(HorizontalBarrier(y, xs, xs + length))
    for _ in range(params.n_vertical):
        length = int(rng.integers(max(1, int(lo * h)), max(1, int(hi * h)) + 1))
        x = int(rng.integers(1, w - 1)) if w > 2 else 0
        ys = int(rng.integers(0, h - length + 1))
        vb.append(VerticalBarrier(x, ys, ys + length))
    return hb, vb


def _occupancy(w, h, hb, vb, blobs) -> np.ndarray:
    occ = np.zeros((h, w), dtype=bool)
    for b in hb:
        occ[b.y, b.x_start:b.x_end] = True
    for b in vb:
        occ[b.y_start:b.y_end, b.x] = True
    for ob in blobs:
        for c in ob.cells:
            occ[c.y, c.x] = True
    return occ


def generate(params: GenParams) -> GridEnvironment:
    """Random solvable barrier map; fully determined by ``params``."""
    rng = _rng(params.seed)
    w, h = params.width, params.height
    min_dist = params.min_start_goal_dist * math.hypot(w - 1, h - 1)
    for _ in range(params.max_attempts):
        hb, vb = _random_barriers(rng, params)
        blobs = [generate_irregular(params, rng) for _ in range(params.n_irregular)]
        occ = _occupancy(w, h, hb, vb, blobs)
        free = np.flatnonzero(~occ.ravel())
        if len(free) < 2:
            continue
        for _ in range(100):
            a, b = rng.choice(free, size=2, replace=False)
            start = State(int(a % w), int(a // w))
            goal = State(int(b % w), int(b // w))
            if euclidean(start, goal) >= min_dist:
                break
        else:
            continue
        env = GridEnvironment(w, h, start, goal, tuple(hb), tuple(vb), tuple(blobs))
        if is_solvable(env):
            return env
    raise GenerationExhausted(f"no solvable map after {params.max_attempts} attempts")


def scale(env: GridEnvironment, factor_x: int, factor_y: int) -> GridEnvironment:
    """Blow every cell up into a ``factor_x`` by ``factor_y`` block.

    Unit-width barriers become bands of parallel barriers, so occupancy (and
    with it every adjacency between obstacles) is preserved exactly.
    """
    fx, fy = int(factor_x), int(factor_y)
    if fx < 1 or fy < 1:
        raise ValueError("scale factors must be integers >= 1")
    if fx == 1 and fy == 1:
        return env
    hb = tuple(
        HorizontalBarrier(b.y * fy + j, b.x_start * fx, b.x_end * fx)
        for b in env.horizontal_barriers for j in range(fy)
    )
    vb = tuple(
        VerticalBarrier(b.x * fx + i, b.y_start * fy, b.y_end * fy)
        for b in env.vertical_barriers for i in range(fx)
    )
    blobs = tuple(
        skeletonize([(c.x * fx + i, c.y * fy + j) for c in ob.cells for i in range(fx) for j in range(fy)])
        for ob in env.irregular
    )
    scaled = GridEnvironment(
        env.width * fx, env.height * fy,
        State(env.start.x * fx, env.start.y * fy),
        State(env.goal.x * fx, env.goal.y * fy),
        hb, vb, blobs, env.corner_cutting,
    )
    assert is_solvable(scaled) == is_solvable(env)
    return scaled


def derive_complexity_levels(env_level5: GridEnvironment, seed=0) -> list[GridEnvironment]:
    """Levels 1..5 obtained by stripping 2-3 barriers per level from ``env_level5``."""
    barriers = [("h", b) for b in env_level5.horizontal_barriers] + [("v", b) for b in env_level5.vertical_barriers]
    n = len(barriers)
    if n < 10:
        raise ValueError(f"level-5 map needs at least 10 barriers, got {n}")
    rng = _rng(seed)
    order = [int(i) for i in rng.permutation(n)]
    levels = [env_level5]
    remaining = n
    for steps_after in (3, 2, 1, 0):
        drop = 3 if (rng.random() < 0.5 and remaining - 3 >= 1 + 2 * steps_after) else 2
        remaining -= drop
        keep = sorted(order[:remaining])
        kept = [barriers[i] for i in keep]
        levels.append(env_level5.replace(
            horizontal_barriers=tuple(b for kind, b in kept if kind == "h"),
            vertical_barriers=tuple(b for kind, b in kept if kind == "v"),
        ))
    levels.reverse()
    return levels


def make_trap(seed) -> tuple[GridEnvironment, tuple]:
    """Open map with one cup-shaped cul-de-sac beside the start-goal corridor.

    The cup's mouth faces away from the goal, so its inner wall is close to the
    goal in straight-line terms but far along any path. Returns the map and the
    cup interior as ``(x_lo, y_lo, x_hi, y_hi)`` (exclusive upper bounds).
    """
    rng = _rng(seed)
    w = int(rng.integers(60, 101))
    h = int(rng.integers(40, 61))
    mid = h // 2
    below = bool(rng.integers(2))
    depth = int(rng.integers(w // 3, w // 2))
    thick = int(rng.integers(6, max(7, mid - 8)))
    x0 = int(rng.integers(w // 5, w - depth - 6))
    x1 = x0 + depth
    if below:
        y_lo = int(rng.integers(2, max(3, mid - thick - 3)))
        y_hi = y_lo + thick
    else:
        y_hi = int(rng.integers(mid + thick + 3, h - 2))
        y_lo = y_hi - thick
    hb = (HorizontalBarrier(y_lo, x0, x1 + 1), HorizontalBarrier(y_hi, x0, x1 + 1))
    vb = (VerticalBarrier(x1, y_lo, y_hi + 1),)
    start = State(int(rng.integers(1, max(2, x0 - 3))), int(rng.integers(mid - 3, mid + 4)))
    goal = State(int(rng.integers(x1 + 3, w - 1)), int(rng.integers(mid - 3, mid + 4)))
    env = GridEnvironment(w, h, start, goal, hb, vb)
    return env, (x0, y_lo + 1, x1, y_hi)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def dumps(env: GridEnvironment) -> str:
    return json.dumps(env.to_dict(), separators=(", ", ": ")) + "\n"


def save(env: GridEnvironment, path: Union[str, os.PathLike]) -> None:
    try:
        Path(path).write_text(dumps(env))
    except OSError as exc:
        raise FileError(f"cannot write {path}: {exc}") from exc


def _int_list(value, where, length=None):
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise SchemaError(where, "expected a list of integers")
    if length is not None and len(value) != length:
        raise SchemaError(where, f"expected {length} integers, got {len(value)}")
    return value


def env_from_json(data) -> GridEnvironment:
    """Validate a decoded environment document and build the environment."""
    if not isinstance(data, dict):
        raise SchemaError("$", "expected an object")
    for key in ("width", "height", "start", "goal"):
        if key not in data:
            raise SchemaError(key, "missing required field")
    for key in ("width", "height"):
        if not isinstance(data[key], int) or isinstance(data[key], bool) or data[key] <= 0:
            raise SchemaError(key, "expected a positive integer")
    _int_list(data["start"], "start", 2)
    _int_list(data["goal"], "goal", 2)
    for key in ("horizontal_barriers", "vertical_barriers"):
        items = data.get(key, [])
        if not isinstance(items, list):
            raise SchemaError(key, "expected a list")
        for i, item in enumerate(items):
            _int_list(item, f"{key}[{i}]", 3)
    blobs = data.get("irregular", [])
    if not isinstance(blobs, list):
        raise SchemaError("irregular", "expected a list")
    for i, ob in enumerate(blobs):
        if not isinstance(ob, dict) or "cells" not in ob:
            raise SchemaError(f"irregular[{i}].cells", "missing required field")
        if not isinstance(ob["cells"], list) or not ob["cells"]:
            raise SchemaError(f"irregular[{i}].cells", "expected a non-empty list")
        for j, c in enumerate(ob["cells"]):
            _int_list(c, f"irregular[{i}].cells[{j}]", 2)
    try:
        return GridEnvironment.from_dict(data)
    except InvalidEnvironment as exc:
        raise SchemaError("$", str(exc)) from exc


def load(path: Union[str, os.PathLike]) -> GridEnvironment:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from exc
    return env_from_json(data)


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SuiteEntry:
    id: str
    file: str
    level: int
    scale: int


def _preset_instances(preset: str, seed: int, count: int) -> Iterator[tuple[str, int, int, GridEnvironment]]:
    suite = LevelSuite()
    if preset == "paper-core":
        for i in range(count):
            params = suite.complexity_params(5, seed=instance_seed(seed, i))
            yield f"core-{i:03d}", 5, SCALE_FACTORS[2], generate(params)
    elif preset == "complexity":
        for i in range(count):
            s = instance_seed(seed, i)
            base = generate(suite.complexity_params(5, seed=s))
            for lvl, env in enumerate(derive_complexity_levels(base, seed=s), start=1):
                yield f"cx-{i:03d}-L{lvl}", lvl, SCALE_FACTORS[2], env
    elif preset == "scale":
        bw, bh = BASE_SCALE
        for i in range(count):
            s = instance_seed(seed, i)
            base = generate(suite.complexity_params(5, width=bw, height=bh, seed=s))
            for lvl, f in SCALE_FACTORS.items():
                yield f"sc-{i:03d}-L{lvl}", lvl, f, scale(base, f, f)
    elif preset == "irregular":
        for i in range(count):
            params = GenParams(n_horizontal=4, n_vertical=4, n_irregular=4, seed=instance_seed(seed, i))
            yield f"irr-{i:03d}", 5, SCALE_FACTORS[2], generate(params)
    elif preset == "trap":
        for i in range(count):
            env, _ = make_trap(instance_seed(seed, i))
            yield f"trap-{i:03d}", 5, 1, env
    else:
        raise ValueError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")


def build_suite(preset: str, seed: int, out_dir: Union[str, os.PathLike], count: Optional[int] = None) -> dict:
    """Write ``manifest.json`` plus one environment file per instance."""
    count = PRESET_COUNTS[preset] if count is None else count
    out = Path(out_dir)
    try:
        (out / "instances").mkdir(parents=True, exist_ok=True)
        entries = []
        for inst_id, level, factor, env in _preset_instances(preset, seed, count):
            rel = f"instances/{inst_id}.json"
            (out / rel).write_text(dumps(env))
            entries.append({"id": inst_id, "file": rel, "level": level, "scale": factor})
        manifest = {"suite_seed": seed, "preset": preset, "instances": entries}
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    except OSError as exc:
        raise FileError(f"cannot write suite to {out}: {exc}") from exc
    return manifest


def load_manifest(path: Union[str, os.PathLike]) -> tuple[dict, list[SuiteEntry]]:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise FileError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from exc
    if "instances" not in data or not isinstance(data["instances"], list):
        raise SchemaError("instances", "missing required field")
    entries = []
    for i, item in enumerate(data["instances"]):
        for key in ("id", "file", "level", "scale"):
            if key not in item:
                raise SchemaError(f"instances[{i}].{key}", "missing required field")
        entries.append(SuiteEntry(str(item["id"]), str(item["file"]), int(item["level"]), int(item["scale"])))
    return data, entries


def iter_suite(path: Union[str, os.PathLike]) -> Iterator[tuple[SuiteEntry, GridEnvironment]]:
    path = Path(path)
    root = path if path.is_dir() else path.parent
    _, entries = load_manifest(path)
    for entry in entries:
        yield entry, load(root / entry.file)
