"""Waypoint proposal, refinement and the deterministic stand-in providers."""

from .client import ChatClient, ProviderConfig
from .parsing import VlmSelection, parse_generated_path, parse_vlm_selection
from .pipeline import apply_selection, enforce_endpoints, prune_infeasible, sanitize
from .prompts import PromptStyle, build_llm_prompt, build_vlm_prompt, format_generated_path
from .providers import (
    LiveProvider,
    Proposal,
    RunLog,
    dead_end_tip,
    make_provider,
    provider_adversarial,
    provider_llm,
    provider_oracle,
    provider_scripted,
    provider_vlm_refine,
)
from .render import RenderSpec, render_pair

__all__ = [
    "ChatClient", "ProviderConfig", "VlmSelection", "parse_generated_path", "parse_vlm_selection",
    "apply_selection", "enforce_endpoints", "prune_infeasible", "sanitize", "PromptStyle",
    "build_llm_prompt", "build_vlm_prompt", "format_generated_path", "LiveProvider", "Proposal",
    "RunLog", "dead_end_tip", "make_provider", "provider_adversarial", "provider_llm",
    "provider_oracle", "provider_scripted", "provider_vlm_refine", "RenderSpec", "render_pair",
]
