"""Completion endpoints and the on-disk response cache.

A single ``complete(prompt) -> text`` surface with two implementations: a
generic HTTP client and a deterministic mock that serves canned responses
from disk (benchmarks must be replayable offline). Responses are cached
under ``cache/<spec-hash>/<doc_id>.json`` with atomic writes.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from minutemeta.errors import EndpointError


class CompletionEndpoint(Protocol):
    def complete(self, prompt: str) -> str: ...


@dataclass
class HttpEndpoint:
    """Minimal JSON-over-HTTP client for text-completion services.

    ``payload_template`` is merged with {"prompt": ...}; ``response_path``
    is a dotted path to the text field in the JSON response.
    """

    url: str
    headers: dict = field(default_factory=dict)
    payload_template: dict = field(default_factory=dict)
    prompt_field: str = "prompt"
    response_path: str = "text"
    timeout: float = 120.0
    retries: int = 3
    backoff: float = 2.0

    def complete(self, prompt: str) -> str:
        import requests

        payload = dict(self.payload_template)
        payload[self.prompt_field] = prompt
        last_error: Exception | None = None
        for attempt in range(self.retries):
            try:
                response = requests.post(
                    self.url, json=payload, headers=self.headers, timeout=self.timeout
                )
                response.raise_for_status()
                data = response.json()
                value = data
                for key in self.response_path.split("."):
                    value = value[int(key)] if isinstance(value, list) else value[key]
                return str(value)
            except Exception as exc:
                last_error = exc
                time.sleep(self.backoff * (2**attempt))
        raise EndpointError(f"endpoint failed after {self.retries} attempts: {last_error}")


_DOC_MARKER = "Document ID: "


def extract_doc_id(prompt: str) -> str | None:
    for line in prompt.splitlines():
        if line.startswith(_DOC_MARKER):
            return line[len(_DOC_MARKER):].strip()
    return None


@dataclass
class MockEndpoint:
    """Serves canned responses keyed by the document id in the prompt.

    ``responses`` maps doc_id to raw response text; alternatively point
    ``directory`` at files named ``<doc_id>.txt``. Missing entries return
    ``fallback`` (default: unparseable garbage, exercising the failure path).
    """

    responses: dict = field(default_factory=dict)
    directory: Path | None = None
    fallback: str = "I could not produce structured output."
    calls: int = 0

    def complete(self, prompt: str) -> str:
        self.calls += 1
        doc_id = extract_doc_id(prompt)
        if doc_id is None:
            return self.fallback
        if doc_id in self.responses:
            return self.responses[doc_id]
        if self.directory is not None:
            path = Path(self.directory) / f"{doc_id}.txt"
            if path.exists():
                return path.read_text(encoding="utf-8")
        return self.fallback


@dataclass
class ResponseCache:
    """Disk cache keyed by (spec hash, doc id)."""

    root: Path

    def __post_init__(self):
        self.root = Path(self.root)

    def path_for(self, spec_hash: str, doc_id: str) -> Path:
        return self.root / spec_hash / f"{doc_id}.json"

    def get(self, spec_hash: str, doc_id: str) -> dict | None:
        path = self.path_for(spec_hash, doc_id)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def put(self, spec_hash: str, doc_id: str, entry: dict) -> None:
        path = self.path_for(spec_hash, doc_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(entry, handle, ensure_ascii=False)
            os.replace(tmp_name, path)
        except Exception:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise


def spec_hash(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
