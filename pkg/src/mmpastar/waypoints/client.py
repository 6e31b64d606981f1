"""Minimal client for OpenAI-compatible ``/chat/completions`` endpoints."""

from __future__ import annotations

import base64
import logging
import os
import time
from dataclasses import dataclass

import httpx

from ..errors import TransportError

log = logging.getLogger(__name__)

RETRYABLE_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


@dataclass(frozen=True)
class ProviderConfig:
    base_url: str = "https://api.openai.com/v1"
    model_name: str = "gpt-4o-mini"
    # Name of the environment variable holding the key; the key itself is never stored.
    api_key_env: str = "OPENAI_API_KEY"
    temperature: float = 0.0
    timeout: float = 60.0
    max_retries: int = 2
    backoff: float = 1.0

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "ProviderConfig":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        if "api_key" in data:
            raise ValueError("api keys belong in the environment; set api_key_env instead")
        return cls(**known)


def text_messages(prompt: str) -> list[dict]:
    return [{"role": "user", "content": prompt}]


def vision_messages(images: list[bytes], prompt: str) -> list[dict]:
    parts = [
        {"type": "image_url",
         "image_url": {"url": "data:image/png;base64," + base64.b64encode(png).decode("ascii")}}
        for png in images
    ]
    parts.append({"type": "text", "text": prompt})
    return [{"role": "user", "content": parts}]


def _content(payload: dict) -> str:
    content = payload["choices"][0]["message"]["content"]
    if isinstance(content, list):
        content = "".join(p.get("text", "") for p in content if isinstance(p, dict))
    if not isinstance(content, str):
        raise TypeError("message content is not text")
    return content


class ChatClient:
    """Posts chat requests, retrying transport faults and retryable statuses."""

    def __init__(self, cfg: ProviderConfig, transport: httpx.BaseTransport | None = None):
        self.cfg = cfg
        self._http = httpx.Client(transport=transport, timeout=cfg.timeout)

    def close(self):
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.cfg.api_key_env) if self.cfg.api_key_env else None
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, messages: list[dict]) -> str:
        url = self.cfg.base_url.rstrip("/") + "/chat/completions"
        body = {"model": self.cfg.model_name, "messages": messages, "temperature": self.cfg.temperature}
        errors = []
        for attempt in range(self.cfg.max_retries + 1):
            if attempt and self.cfg.backoff:
                time.sleep(self.cfg.backoff * 2 ** (attempt - 1))
            try:
                resp = self._http.post(url, json=body, headers=self._headers())
            except httpx.HTTPError as exc:
                errors.append(f"attempt {attempt + 1}: {type(exc).__name__}: {exc}")
                log.warning("chat request failed: %s", errors[-1])
                continue
            if resp.status_code in RETRYABLE_STATUS:
                errors.append(f"attempt {attempt + 1}: HTTP {resp.status_code}")
                log.warning("chat request failed: %s", errors[-1])
                continue
            if resp.status_code >= 400:
                errors.append(f"attempt {attempt + 1}: HTTP {resp.status_code}")
                raise TransportError(f"{url} rejected the request: HTTP {resp.status_code}", errors)
            try:
                return _content(resp.json())
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                errors.append(f"attempt {attempt + 1}: malformed response: {exc}")
                continue
        raise TransportError(f"{url} failed after {self.cfg.max_retries + 1} attempts", errors)
