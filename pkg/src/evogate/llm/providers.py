"""Completion providers: live OpenAI-compatible HTTP, scripted, and record/replay."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from collections import defaultdict, deque
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping

import httpx

log = logging.getLogger(__name__)

API_KEY_ENV = "EVOGATE_API_KEY"
BASE_URL_ENV = "EVOGATE_BASE_URL"
DEFAULT_BASE_URL = "https://api.openai.com"


class ProviderError(RuntimeError):
    pass


class ProviderAuthError(ProviderError):
    pass


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    temperature: float = 0.0
    max_tokens: int = 4096
    model: str = "gpt-4o-mini"
    # template id and bindings only feed the fixture fingerprint
    template_id: str | None = None
    bindings: Mapping[str, Any] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    @property
    def fingerprint(self) -> str:
        if self.template_id is not None and self.bindings is not None:
            payload = {"template": self.template_id,
                       "bindings": {k: str(v) for k, v in self.bindings.items()}}
        else:
            payload = {"prompt": self.prompt}
        blob = json.dumps(payload, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["bindings"] = None if self.bindings is None else {k: str(v) for k, v in self.bindings.items()}
        return d


class Provider:
    """Anything that turns a completion request into assistant text."""

    def complete(self, request: CompletionRequest) -> str:
        raise NotImplementedError

    def close(self) -> None:
        pass


class HttpProvider(Provider):
    """OpenAI-compatible chat-completions client.

    Transient failures (timeouts, connection errors, 429, 5xx) are retried with
    exponential backoff; other 4xx responses fail immediately.
    """

    RETRY_STATUS = {408, 409, 429, 500, 502, 503, 504}

    def __init__(self, base_url: str | None = None, api_key: str | None = None, *,
                 max_attempts: int = 5, backoff: float = 1.0, timeout: float = 300.0,
                 max_concurrency: int = 8, transport: httpx.BaseTransport | None = None,
                 sleep: Callable[[float], None] = time.sleep):
        api_key = api_key or os.environ.get(API_KEY_ENV)
        if not api_key:
            raise ProviderAuthError(f"no API key: set {API_KEY_ENV}")
        base = (base_url or os.environ.get(BASE_URL_ENV) or DEFAULT_BASE_URL).rstrip("/")
        if base.endswith("/v1"):
            base = base[:-3]
        self.url = base + "/v1/chat/completions"
        self.max_attempts = max_attempts
        self.backoff = backoff
        self._sleep = sleep
        self._gate = threading.BoundedSemaphore(max_concurrency)
        self._client = httpx.Client(timeout=timeout, transport=transport,
                                    headers={"Authorization": f"Bearer {api_key}"})

    def complete(self, request: CompletionRequest) -> str:
        body = {
            "model": request.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        last: Exception | None = None
        for attempt in range(self.max_attempts):
            if attempt:
                self._sleep(self.backoff * 2 ** (attempt - 1))
            try:
                with self._gate:
                    resp = self._client.post(self.url, json=body)
            except httpx.TransportError as exc:
                last = exc
                log.warning("transient transport failure (attempt %d): %s", attempt + 1, exc)
                continue
            if resp.status_code in self.RETRY_STATUS:
                last = ProviderError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                log.warning("transient HTTP %d (attempt %d)", resp.status_code, attempt + 1)
                continue
            if resp.status_code in (401, 403):
                raise ProviderAuthError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            if resp.status_code >= 400:
                raise ProviderError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()["choices"][0]["message"]["content"] or ""
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise ProviderError(f"malformed completion payload: {exc}") from exc
        raise ProviderError(f"gave up after {self.max_attempts} attempts: {last}")

    def close(self) -> None:
        self._client.close()


class ScriptedProvider(Provider):
    """Deterministic stand-in for a model.

    ``sequence`` mode hands out responses in call order, ``keyed`` mode looks
    them up by request fingerprint, and a ``responder`` callable can compute
    each answer. Calls are serialized so the call order is well defined.
    """

    def __init__(self, responses: Iterable[str] | Mapping[str, str] | None = None, *,
                 mode: str = "sequence", cycle: bool = False, default: str | None = None,
                 responder: Callable[[CompletionRequest], str] | None = None):
        if mode not in ("sequence", "keyed", "responder"):
            raise ValueError(f"unknown scripted mode {mode!r}")
        if responder is not None:
            mode = "responder"
        self.mode = mode
        self.cycle = cycle
        self.default = default
        self.responder = responder
        if mode == "keyed":
            self.table = dict(responses or {})
        elif mode == "sequence":
            self.sequence = list(responses or [])
        self.log: list[tuple[CompletionRequest, str]] = []
        self._cursor = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return len(self.log)

    def complete(self, request: CompletionRequest) -> str:
        with self._lock:
            out = self._next(request)
            self.log.append((request, out))
            return out

    def _next(self, request: CompletionRequest) -> str:
        if self.mode == "responder":
            return self.responder(request)
        if self.mode == "keyed":
            if request.fingerprint in self.table:
                return self.table[request.fingerprint]
            if self.default is not None:
                return self.default
            raise ProviderError(f"no scripted response for fingerprint {request.fingerprint[:12]}")
        if self._cursor >= len(self.sequence):
            if self.cycle and self.sequence:
                self._cursor = 0
            elif self.default is not None:
                return self.default
            else:
                raise ProviderError("scripted response sequence exhausted")
        out = self.sequence[self._cursor]
        self._cursor += 1
        return out

    @classmethod
    def from_file(cls, path: str | Path, **kw: Any) -> "ScriptedProvider":
        """JSON list -> sequence mode; JSON object -> keyed mode (fingerprint -> text)."""
        data = json.loads(Path(path).read_text())
        if isinstance(data, list):
            return cls(data, mode="sequence", **kw)
        return cls(data, mode="keyed", **kw)


class RecordingProvider(Provider):
    """Pass-through that appends every exchange to a JSON-lines replay fixture."""

    def __init__(self, inner: Provider, path: str | Path):
        self.inner = inner
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> str:
        out = self.inner.complete(request)
        line = json.dumps({"fingerprint": request.fingerprint, "request": request.to_dict(),
                           "response": out}, sort_keys=True, ensure_ascii=False)
        with self._lock, self.path.open("a") as fh:
            fh.write(line + "\n")
        return out

    def close(self) -> None:
        self.inner.close()


class ReplayProvider(Provider):
    """Serves responses from a recorded fixture.

    Repeated fingerprints (e.g. Best-of-N draws of one prompt) are served in
    recorded order.
    """

    def __init__(self, path: str | Path):
        self.queues: dict[str, deque[str]] = defaultdict(deque)
        for line in Path(path).read_text().splitlines():
            if line.strip():
                rec = json.loads(line)
                self.queues[rec["fingerprint"]].append(rec["response"])
        self._lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> str:
        with self._lock:
            queue = self.queues.get(request.fingerprint)
            if not queue:
                raise ProviderError(f"replay fixture has no response left for {request.fingerprint[:12]}")
            return queue.popleft()
