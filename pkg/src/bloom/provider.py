"""Language-model provider abstraction.

Everything upstream talks to a single ``complete`` call that returns either
text or one tool call. The ScriptedProvider replays recorded exchanges in
order, which keeps the whole orchestration stack deterministic and testable
offline; the OpenAI-compatible adapter is only constructed when credentials
are supplied.
"""

from __future__ import annotations

import json
import os
import time
import urllib.request
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Protocol

from .errors import ProviderError, ScriptExhaustedError


@dataclass
class ToolCall:
    name: str
    arguments_json: str

    def arguments(self) -> dict:
        """Parse arguments; raises ProviderError on malformed JSON."""
        try:
            parsed = json.loads(self.arguments_json)
        except json.JSONDecodeError as exc:
            raise ProviderError(f"malformed tool arguments: {exc}") from exc
        if not isinstance(parsed, dict):
            raise ProviderError("tool arguments must be a JSON object")
        return parsed


@dataclass
class CompletionRequest:
    messages: List[dict]
    tool_schemas: List[dict] = field(default_factory=list)
    temperature: float = 0.0
    max_tokens: Optional[int] = None


@dataclass
class CompletionResult:
    text: Optional[str] = None
    tool_call: Optional[ToolCall] = None


class LLMProvider(Protocol):
    def complete(self, request: CompletionRequest) -> CompletionResult: ...


class ScriptedProvider:
    """Replays a recorded list of responses in order.

    Entries are either ``{"text": "..."}`` or
    ``{"toolCall": {"name": "...", "arguments": {...}}}`` (``arguments`` may
    instead be a pre-encoded ``argumentsJson`` string, e.g. to script a
    malformed call). Given the same script and call sequence, outputs are
    byte-identical. An exhausted script raises rather than improvising.
    """

    def __init__(self, script: List[dict]):
        self._script = [self._parse(entry) for entry in script]
        self._cursor = 0
        self.requests: List[CompletionRequest] = []

    @staticmethod
    def _parse(entry: dict) -> CompletionResult:
        if "text" in entry:
            return CompletionResult(text=entry["text"])
        if "toolCall" in entry:
            call = entry["toolCall"]
            if "argumentsJson" in call:
                args_json = call["argumentsJson"]
            else:
                args_json = json.dumps(call.get("arguments", {}), sort_keys=True)
            return CompletionResult(tool_call=ToolCall(call["name"], args_json))
        if "error" in entry:
            # Scripted fault injection: this slot raises instead of answering.
            result = CompletionResult()
            result._scripted_error = str(entry["error"])  # type: ignore[attr-defined]
            return result
        raise ValueError(f"unusable script entry: {entry!r}")

    @classmethod
    def from_fixture(cls, path) -> "ScriptedProvider":
        with open(path, "r", encoding="utf-8") as handle:
            return cls(json.load(handle))

    @property
    def calls_made(self) -> int:
        return self._cursor

    def remaining(self) -> int:
        return len(self._script) - self._cursor

    def complete(self, request: CompletionRequest) -> CompletionResult:
        if self._cursor >= len(self._script):
            raise ScriptExhaustedError(
                f"script exhausted after {self._cursor} calls")
        self.requests.append(request)
        result = self._script[self._cursor]
        self._cursor += 1
        error = getattr(result, "_scripted_error", None)
        if error is not None:
            raise ProviderError(error)
        return result


class RetryingProvider:
    """Retries transient provider failures, then surfaces the error.

    No silent degradation: after the retry budget the original failure
    propagates for the caller to handle.
    """

    def __init__(self, inner: LLMProvider, retries: int = 2, backoff: float = 0.5,
                 sleep: Callable[[float], None] = time.sleep):
        self.inner = inner
        self.retries = retries
        self.backoff = backoff
        self._sleep = sleep

    def complete(self, request: CompletionRequest) -> CompletionResult:
        attempt = 0
        while True:
            try:
                return self.inner.complete(request)
            except ScriptExhaustedError:
                raise  # a finished script is a test-authoring bug, not flakiness
            except ProviderError:
                if attempt >= self.retries:
                    raise
                self._sleep(self.backoff * (2 ** attempt))
                attempt += 1


class OpenAIChatProvider:
    """Minimal adapter for any OpenAI-compatible chat-completions endpoint."""

    def __init__(self, model: Optional[str] = None, api_key: Optional[str] = None,
                 base_url: Optional[str] = None, timeout: float = 60.0):
        self.model = model or os.environ.get("BLOOM_MODEL", "gpt-4o")
        self.api_key = api_key or os.environ.get("OPENAI_API_KEY")
        self.base_url = (base_url or os.environ.get("OPENAI_BASE_URL",
                                                    "https://api.openai.com/v1")).rstrip("/")
        self.timeout = timeout
        if not self.api_key:
            raise ProviderError("no API key configured (set OPENAI_API_KEY)")

    def complete(self, request: CompletionRequest) -> CompletionResult:
        body = {
            "model": self.model,
            "messages": request.messages,
            "temperature": request.temperature,
        }
        if request.max_tokens:
            body["max_tokens"] = request.max_tokens
        if request.tool_schemas:
            body["tools"] = [
                {"type": "function", "function": schema} for schema in request.tool_schemas
            ]
        req = urllib.request.Request(
            f"{self.base_url}/chat/completions",
            data=json.dumps(body).encode("utf-8"),
            headers={
                "Content-Type": "application/json",
                "Authorization": f"Bearer {self.api_key}",
            },
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as response:
                payload = json.loads(response.read().decode("utf-8"))
        except Exception as exc:  # transport, HTTP, or decode failure
            raise ProviderError(f"provider request failed: {exc}") from exc
        try:
            message = payload["choices"][0]["message"]
        except (KeyError, IndexError) as exc:
            raise ProviderError(f"unexpected provider payload: {exc}") from exc
        tool_calls = message.get("tool_calls") or []
        if tool_calls:
            fn = tool_calls[0]["function"]
            return CompletionResult(tool_call=ToolCall(fn["name"], fn.get("arguments", "{}")))
        return CompletionResult(text=message.get("content") or "")


def provider_from_config(kind: str, **kwargs) -> LLMProvider:
    """Build a provider by name: ``scripted:<fixture path>`` or ``live``."""
    if kind.startswith("scripted:"):
        return ScriptedProvider.from_fixture(kind.split(":", 1)[1])
    if kind == "live":
        return RetryingProvider(OpenAIChatProvider(**kwargs))
    raise ValueError(f"unknown provider kind: {kind!r}")
