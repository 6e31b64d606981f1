"""Waypoint providers: live model legs plus deterministic stand-ins for tests."""

from __future__ import annotations

import hashlib
import json
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import httpx
import numpy as np

from ..errors import FileError, ParseFailure, SchemaError, TransportError, ValidationFailure
from ..grid import GridEnvironment, State, euclidean
from ..search import WaypointList, dijkstra_oracle, optimal_path
from .client import ChatClient, ProviderConfig, text_messages, vision_messages
from .parsing import parse_generated_path, parse_vlm_selection
from .pipeline import apply_selection, sanitize
from .prompts import PromptStyle, build_llm_prompt, build_vlm_prompt
from .render import RenderSpec, render_pair


# ---------------------------------------------------------------------------
# run log
# ---------------------------------------------------------------------------

def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


class RunLog:
    """Append-only provider call log, optionally mirrored to a JSON-lines file."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self.records: list[dict] = []
        self._lock = threading.Lock()

    def record(self, instance_id: str, leg: str, prompt: str, status: str, fallback_used: bool) -> dict:
        rec = {
            "instance_id": instance_id,
            "leg": leg,
            "prompt_hash": prompt_hash(prompt),
            "status": status,
            "fallback_used": bool(fallback_used),
        }
        with self._lock:
            self.records.append(rec)
            if self.path:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec) + "\n")
        return rec

    def for_instance(self, instance_id: str) -> list[dict]:
        with self._lock:
            return [r for r in self.records if r["instance_id"] == instance_id]


def _trivial(env: GridEnvironment) -> WaypointList:
    return WaypointList([env.start, env.goal])


# ---------------------------------------------------------------------------
# live legs
# ---------------------------------------------------------------------------

def _llm_leg(env, style, cfg, client, log, instance_id) -> tuple[WaypointList, bool]:
    prompt = build_llm_prompt(env, style)
    log = log if log is not None else RunLog()
    for _ in range(cfg.max_retries + 1):
        try:
            reply = client.complete(text_messages(prompt))
        except TransportError as exc:
            log.record(instance_id, "llm", prompt, "transport_error", False)
            raise TransportError(str(exc), log.for_instance(instance_id)) from exc
        try:
            proposal = parse_generated_path(reply)
        except ParseFailure:
            log.record(instance_id, "llm", prompt, "parse_failure", False)
            continue
        log.record(instance_id, "llm", prompt, "ok", False)
        return sanitize(proposal, env), False
    log.record(instance_id, "llm", prompt, "fallback", True)
    return _trivial(env), True


def _vlm_leg(env, T, cfg, client, log, instance_id, spec) -> tuple[WaypointList, bool]:
    T = sanitize(T, env)
    n = len(T) - 2
    prompt = build_vlm_prompt(n)
    log = log if log is not None else RunLog()
    if n == 0:
        log.record(instance_id, "vlm", prompt, "skipped", False)
        return T, False
    images = render_pair(env, T, spec or RenderSpec.fit(env))
    messages = vision_messages(list(images), prompt)
    for _ in range(cfg.max_retries + 1):
        try:
            reply = client.complete(messages)
        except TransportError as exc:
            log.record(instance_id, "vlm", prompt, "transport_error", False)
            raise TransportError(str(exc), log.for_instance(instance_id)) from exc
        try:
            sel = parse_vlm_selection(reply, n)
        except ParseFailure:
            log.record(instance_id, "vlm", prompt, "parse_failure", False)
            continue
        except ValidationFailure:
            log.record(instance_id, "vlm", prompt, "validation_failure", False)
            continue
        log.record(instance_id, "vlm", prompt, "ok", False)
        return apply_selection(T, sel), False
    # refinement is optional: keep the unrefined proposal
    log.record(instance_id, "vlm", prompt, "fallback", True)
    return T, True


def provider_llm(env: GridEnvironment, style=PromptStyle.FEW_SHOT_5, cfg: ProviderConfig = ProviderConfig(), *,
                 client: ChatClient | None = None, log: RunLog | None = None, instance_id: str = "") -> WaypointList:
    """Text-model proposal: prompt, call, parse, enforce endpoints, prune."""
    own = client is None
    client = client or ChatClient(cfg)
    try:
        return _llm_leg(env, style, cfg, client, log, instance_id)[0]
    finally:
        if own:
            client.close()


def provider_vlm_refine(env: GridEnvironment, T, cfg: ProviderConfig = ProviderConfig(), *,
                        client: ChatClient | None = None, log: RunLog | None = None, instance_id: str = "",
                        spec: RenderSpec | None = None) -> WaypointList:
    """Vision-model filter over an existing proposal; never adds waypoints."""
    own = client is None
    client = client or ChatClient(cfg)
    try:
        return _vlm_leg(env, T, cfg, client, log, instance_id, spec)[0]
    finally:
        if own:
            client.close()


# ---------------------------------------------------------------------------
# deterministic providers
# ---------------------------------------------------------------------------

def load_waypoint_file(path: str | Path) -> list[State]:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise FileError(f"cannot read waypoint file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(str(path), f"invalid JSON: {exc}") from exc
    pts = data.get("waypoints") if isinstance(data, dict) else None
    if not isinstance(pts, list):
        raise SchemaError("waypoints", "expected a list of [x, y] pairs")
    out = []
    for i, p in enumerate(pts):
        if not (isinstance(p, list) and len(p) == 2 and all(isinstance(v, int) and not isinstance(v, bool) for v in p)):
            raise SchemaError(f"waypoints[{i}]", "expected [x, y] integers")
        out.append(State(*p))
    return out


def save_waypoint_file(path: str | Path, T) -> None:
    Path(path).write_text(json.dumps({"waypoints": [[int(t[0]), int(t[1])] for t in T]}) + "\n", encoding="utf-8")


def provider_scripted(path: str | Path, env: GridEnvironment | None = None) -> WaypointList:
    """Waypoints read from ``{"waypoints": [[x, y], ...]}``; sanitized when ``env`` is given."""
    pts = load_waypoint_file(path)
    return sanitize(pts, env) if env is not None else WaypointList(pts)


def provider_oracle(env: GridEnvironment, stride: float = 10) -> WaypointList:
    """Every ``stride``-th cell of an optimal path, endpoints included."""
    if not stride >= 1:
        raise ValueError("stride must be >= 1")
    path = optimal_path(env)
    if math.isinf(stride):
        return _trivial(env)
    pts = path[::int(stride)]
    if pts[-1] != env.goal:
        pts.append(env.goal)
    return WaypointList(pts)


def dead_end_tip(env: GridEnvironment) -> State | None:
    """Deepest cell of the most costly dead-end branch, or None.

    Candidates are local maxima of travel cost from the start (no legal move
    leads further away). Among them the cell whose true cost-to-goal most
    exceeds its straight-line distance wins, i.e. the cell that looks closest
    to the goal while being hardest to leave.
    """
    from_start = dijkstra_oracle(env, env.start).dist
    to_goal = dijkstra_oracle(env, env.goal).dist
    w = env.width
    best, best_key = None, None
    for i in np.flatnonzero(np.isfinite(from_start.ravel())):
        i = int(i)
        y, x = divmod(i, w)
        c = State(x, y)
        if c == env.start or c == env.goal or not np.isfinite(to_goal[y, x]):
            continue
        d = from_start[y, x]
        if any(from_start[j // w, j % w] > d for j, _ in env.successors(i)):
            continue
        key = (float(to_goal[y, x]) - euclidean(c, env.goal), -y, -x)
        if best_key is None or key > best_key:
            best, best_key = c, key
    return best


def provider_adversarial(env: GridEnvironment, stride: float = 10) -> WaypointList:
    """Oracle prefix that detours through a dead-end tip before the goal.

    The prefix keeps the search on track until the misleading waypoint is
    reached late in the list, where its decayed pull is weakest.
    """
    tip = dead_end_tip(env)
    if tip is None:
        return _trivial(env)
    path = optimal_path(env)
    j = min(range(len(path)), key=lambda i: (euclidean(path[i], tip), i))
    step = len(path) if math.isinf(stride) else int(stride)
    prefix = path[0:j:step] or [env.start]
    return sanitize(prefix + [tip, env.goal], env)


# ---------------------------------------------------------------------------
# composed providers used by the bench runner and the CLI
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Proposal:
    """Waypoints for the text-only and the refined method, with provenance."""

    llm: WaypointList
    mmp: WaypointList
    kind: str
    fallback_used: bool = False

    def provenance(self) -> dict:
        return {"provider": self.kind, "fallback_used": self.fallback_used}


Provider = Callable[[GridEnvironment, str], Proposal]


def _same(kind: str, fn: Callable[[GridEnvironment], WaypointList]) -> Provider:
    def propose(env: GridEnvironment, instance_id: str = "") -> Proposal:
        T = fn(env)
        return Proposal(T, T, kind)
    propose.kind = kind
    return propose


@dataclass
class LiveProvider:
    """Text leg, optionally followed by the vision leg.

    With ``allow_fallback`` a dead text endpoint yields ``[s0, sg]`` and a dead
    vision endpoint yields the unrefined proposal; otherwise the
    :class:`TransportError` propagates.
    """

    llm_cfg: ProviderConfig
    vlm_cfg: ProviderConfig | None = None
    style: PromptStyle = PromptStyle.FEW_SHOT_5
    allow_fallback: bool = True
    log: RunLog = field(default_factory=RunLog)
    render_spec: RenderSpec | None = None
    transport: httpx.BaseTransport | None = None
    vlm_transport: httpx.BaseTransport | None = None

    @property
    def kind(self) -> str:
        return "mmp" if self.vlm_cfg else "llm"

    def __call__(self, env: GridEnvironment, instance_id: str = "") -> Proposal:
        fallback = False
        with ChatClient(self.llm_cfg, self.transport) as client:
            try:
                T, fallback = _llm_leg(env, self.style, self.llm_cfg, client, self.log, instance_id)
            except TransportError:
                if not self.allow_fallback:
                    raise
                self.log.record(instance_id, "llm", "", "fallback", True)
                trivial = _trivial(env)
                return Proposal(trivial, trivial, self.kind, True)
        if self.vlm_cfg is None:
            return Proposal(T, T, self.kind, fallback)
        with ChatClient(self.vlm_cfg, self.vlm_transport or self.transport) as client:
            try:
                R, vfallback = _vlm_leg(env, T, self.vlm_cfg, client, self.log, instance_id, self.render_spec)
            except TransportError:
                if not self.allow_fallback:
                    raise
                self.log.record(instance_id, "vlm", "", "fallback", True)
                R, vfallback = T, True
        return Proposal(T, R, self.kind, fallback or vfallback)


def _stride(arg: str | None, default: float = 10) -> float:
    if arg in (None, ""):
        return default
    if arg.lower() in ("inf", "infinity"):
        return math.inf
    return float(int(arg))


def make_provider(spec: str, *, llm_cfg: ProviderConfig | None = None, vlm_cfg: ProviderConfig | None = None,
                  style=PromptStyle.FEW_SHOT_5, allow_fallback: bool = True, log: RunLog | None = None,
                  transport: httpx.BaseTransport | None = None) -> Provider:
    """Build a provider from ``none``, ``oracle[:stride]``, ``adversarial[:stride]``,
    ``scripted:<file-or-dir>``, ``llm`` or ``mmp``.

    A scripted directory is looked up as ``<dir>/<instance_id>.json``.
    """
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "none":
        return _same("none", _trivial)
    if kind == "oracle":
        stride = _stride(arg)
        return _same(f"oracle:{arg or 10}", lambda env: provider_oracle(env, stride))
    if kind == "adversarial":
        stride = _stride(arg)
        return _same(f"adversarial:{arg or 10}", lambda env: provider_adversarial(env, stride))
    if kind == "scripted":
        if not arg:
            raise ValueError("scripted provider needs a path: scripted:<file-or-dir>")
        root = Path(arg)

        def scripted(env: GridEnvironment, instance_id: str = "") -> Proposal:
            path = root / f"{instance_id}.json" if root.is_dir() else root
            T = provider_scripted(path, env)
            return Proposal(T, T, "scripted")
        scripted.kind = "scripted"
        return scripted
    if kind in ("llm", "mmp"):
        return LiveProvider(
            llm_cfg=llm_cfg or ProviderConfig(),
            vlm_cfg=(vlm_cfg or ProviderConfig()) if kind == "mmp" else None,
            style=PromptStyle(style),
            allow_fallback=allow_fallback,
            log=log if log is not None else RunLog(),
            transport=transport,
        )
    raise ValueError(f"unknown provider {spec!r}")
