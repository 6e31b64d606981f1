"""Parsers for model responses."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from ..errors import ParseFailure, ValidationFailure
from ..grid import State

_MARKER = re.compile(r"Generated\s+Path\s*:", re.IGNORECASE)
_PAIR = r"\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]"
_LIST = re.compile(rf"\s*\[\s*(?:{_PAIR}\s*(?:,\s*{_PAIR}\s*)*)?,?\s*\]")
_PAIRS = re.compile(_PAIR)


def parse_generated_path(text: str) -> list[State]:
    """Waypoints from the last ``Generated Path:`` marker that is followed by a pair list.

    Earlier markers are only consulted when every later one is malformed.
    """
    if not isinstance(text, str):
        raise ParseFailure("response is not text")
    for marker in reversed(list(_MARKER.finditer(text))):
        m = _LIST.match(text, marker.end())
        if m:
            return [State(int(x), int(y)) for x, y in _PAIRS.findall(m.group(0))]
    raise ParseFailure("no well-formed 'Generated Path:' list in response")


@dataclass(frozen=True)
class VlmSelection:
    selected: tuple
    reasoning: str = ""

    def __post_init__(self):
        object.__setattr__(self, "selected", tuple(self.selected))


def _first_json_object(text: str):
    decoder = json.JSONDecoder()
    pos = text.find("{")
    while pos != -1:
        try:
            obj, _ = decoder.raw_decode(text, pos)
        except json.JSONDecodeError:
            pos = text.find("{", pos + 1)
            continue
        if isinstance(obj, dict):
            return obj
        pos = text.find("{", pos + 1)
    return None


def validate_selection(selected, num_waypoints: int) -> tuple:
    ids = []
    for v in selected:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ValidationFailure(f"waypoint id {v!r} is not an integer")
        if not 1 <= v <= num_waypoints:
            raise ValidationFailure(f"waypoint id {v} outside 1..{num_waypoints}")
        if v in ids:
            raise ValidationFailure(f"waypoint id {v} repeated")
        ids.append(v)
    return tuple(ids)


def parse_vlm_selection(text: str, num_waypoints: int) -> VlmSelection:
    """Selection from the first JSON object in a vision-model response.

    Code fences and surrounding prose are ignored because the object is located
    by scanning for the first decodable ``{...}``.
    """
    obj = _first_json_object(text) if isinstance(text, str) else None
    if obj is None:
        raise ParseFailure("no JSON object in response")
    if "selected-waypoints" not in obj:
        raise ParseFailure("JSON object has no 'selected-waypoints'")
    if "final-reasoning" not in obj:
        raise ValidationFailure("JSON object has no 'final-reasoning'")
    selected = obj["selected-waypoints"]
    if not isinstance(selected, list):
        raise ValidationFailure("'selected-waypoints' is not a list")
    return VlmSelection(validate_selection(selected, num_waypoints), str(obj["final-reasoning"]))
