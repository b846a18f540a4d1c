"""Contract with a text-generation backend, plus deterministic stubs.

The wire protocol is a single endpoint::

    POST /generate
    request  {"doc_id", "input_text", "max_input_tokens", "max_output_tokens", "decoding"}
    response {"doc_id", "output_text", "backend_meta"}

so any model server (or mock) can implement it. Token limits are enforced by
the backend; the client truncates by whitespace-token count as a conservative
pre-check because the real subword tokenizer is backend-specific.
"""

from __future__ import annotations

import json
import time
from collections.abc import Iterable, Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Protocol

import httpx


class GenConfigError(ValueError):
    """Invalid request or driver configuration."""


class GenerationError(RuntimeError):
    """Base for backend failures."""


class MissingOutputError(GenerationError):
    """A keyed stub has no stored output for the requested doc."""


class BackendUnavailableError(GenerationError):
    """Transport kept failing; retryable."""

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


@dataclass(frozen=True)
class GenRequest:
    doc_id: str
    input_text: str
    max_input_tokens: int = 1024
    max_output_tokens: int = 512
    decoding: str = "greedy"

    def __post_init__(self) -> None:
        if self.max_input_tokens <= 0 or self.max_output_tokens <= 0:
            raise GenConfigError("token limits must be positive")
        if self.decoding != "greedy":
            raise GenConfigError("only greedy decoding is supported")


@dataclass(frozen=True)
class GenResponse:
    doc_id: str
    output_text: str
    backend_meta: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class GenFailure:
    doc_id: str
    error: str


@dataclass(frozen=True)
class GenBatch:
    """Batch result; ``responses`` is sorted by doc_id so persisted output is stable."""

    responses: tuple[GenResponse, ...]
    failures: tuple[GenFailure, ...]


class Backend(Protocol):
    def generate(self, req: GenRequest) -> GenResponse: ...


class EchoOracle:
    """Returns the stored reference linearization for each doc.

    Feeding these outputs back through parse and evaluate must score a
    perfect 1.0, which makes this the standard pipeline identity check.
    """

    def __init__(self, targets: Mapping[str, str]):
        self._targets = dict(targets)

    def generate(self, req: GenRequest) -> GenResponse:
        if req.doc_id not in self._targets:
            raise MissingOutputError(f"no stored target for doc {req.doc_id!r}")
        return GenResponse(req.doc_id, self._targets[req.doc_id], {"backend": "echo"})


class FileBacked:
    """Replays generations stored as JSONL ``{"id", "output_text"}`` records."""

    def __init__(self, outputs: Mapping[str, str]):
        self._outputs = dict(outputs)

    @classmethod
    def from_path(cls, path: str | Path) -> "FileBacked":
        outputs = {}
        with Path(path).open(encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                record = json.loads(line)
                if "_meta" in record:
                    continue
                outputs[record["id"]] = record["output_text"]
        return cls(outputs)

    def generate(self, req: GenRequest) -> GenResponse:
        if req.doc_id not in self._outputs:
            raise MissingOutputError(f"no stored output for doc {req.doc_id!r}")
        return GenResponse(req.doc_id, self._outputs[req.doc_id], {"backend": "file"})


class HTTPBackend:
    """Talks to a real model server over the pinned /generate endpoint."""

    def __init__(
        self,
        base_url: str,
        timeout: float = 60.0,
        max_attempts: int = 3,
        retry_wait: float = 0.5,
        client: httpx.Client | None = None,
    ):
        if max_attempts < 1:
            raise GenConfigError("max_attempts must be >= 1")
        self._url = base_url.rstrip("/") + "/generate"
        self._max_attempts = max_attempts
        self._retry_wait = retry_wait
        self._client = client or httpx.Client(timeout=timeout)

    def generate(self, req: GenRequest) -> GenResponse:
        payload = {
            "doc_id": req.doc_id,
            "input_text": req.input_text,
            "max_input_tokens": req.max_input_tokens,
            "max_output_tokens": req.max_output_tokens,
            "decoding": req.decoding,
        }
        last_error: Exception | None = None
        for attempt in range(1, self._max_attempts + 1):
            try:
                response = self._client.post(self._url, json=payload)
                response.raise_for_status()
                body = response.json()
                return GenResponse(
                    doc_id=body["doc_id"],
                    output_text=body["output_text"],
                    backend_meta=dict(body.get("backend_meta", {})),
                )
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                last_error = exc
                if attempt < self._max_attempts:
                    time.sleep(self._retry_wait)
        raise BackendUnavailableError(
            f"backend unreachable after {self._max_attempts} attempts: {last_error}",
            attempts=self._max_attempts,
        )


def truncate_input(req: GenRequest) -> GenRequest:
    """Conservative whitespace-token truncation to the request's input limit."""
    tokens = req.input_text.split()
    if len(tokens) <= req.max_input_tokens:
        return req
    return replace(req, input_text=" ".join(tokens[: req.max_input_tokens]))


def generate(req: GenRequest, backend: Backend) -> GenResponse:
    """Run one request; the backend's text is returned verbatim, unparsed."""
    req = truncate_input(req)
    response = backend.generate(req)
    if response.doc_id != req.doc_id:
        raise GenerationError(
            f"backend echoed doc {response.doc_id!r} for request {req.doc_id!r}"
        )
    return response


def generate_corpus(
    requests: Iterable[GenRequest], backend: Backend, workers: int = 1
) -> GenBatch:
    """Run a batch with at most ``workers`` requests in flight.

    Per-doc failures are recorded and the batch completes; only configuration
    problems raise.
    """
    if workers < 1:
        raise GenConfigError("workers must be >= 1")
    requests = list(requests)
    responses: list[GenResponse] = []
    failures: list[GenFailure] = []

    def run(req: GenRequest) -> tuple[GenResponse | None, GenFailure | None]:
        try:
            return generate(req, backend), None
        except GenerationError as exc:
            return None, GenFailure(req.doc_id, str(exc))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for response, failure in pool.map(run, requests):
            if response is not None:
                responses.append(response)
            if failure is not None:
                failures.append(failure)

    responses.sort(key=lambda r: r.doc_id)
    failures.sort(key=lambda f: f.doc_id)
    return GenBatch(tuple(responses), tuple(failures))
