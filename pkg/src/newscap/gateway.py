"""Wire protocol to an external captioning model and the two-stage
self-supplemented generation pipeline.

Protocol: one UTF-8 JSON request record per line, one response record per
line, identical schema over a subprocess's standard streams or a local TCP
socket. Requests carry a task tag (``sent_select``, ``ent_select``,
``caption``), the image reference, and a text payload; responses echo the
request id and carry the task-specific field. Malformed payloads raise
ProtocolError, never get coerced.

Generation runs in two stages per document: first one ``sent_select``
request per article sentence plus one ``ent_select`` request, then a single
``caption`` request over the supplemented context. Every request/response is
appended to a trace so a batch can be replayed bit-exactly.
"""

from __future__ import annotations

import json
import queue
import shlex
import socket
import subprocess
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Protocol

from .context import (
    DEFAULT_ENTITY_PROMPT,
    DEFAULT_ORIGIN_BUDGET,
    DEFAULT_SENTENCE_CAP,
    SupplementedContext,
    origin_context,
    supplement_context,
)
from .corpus import Document
from .errors import InputFileError, ProtocolError, SchemaError

TASK_SENT = "sent_select"
TASK_ENT = "ent_select"
TASK_CAPTION = "caption"
TASKS = (TASK_SENT, TASK_ENT, TASK_CAPTION)

DEFAULT_TIMEOUT = 60.0


@dataclass(frozen=True)
class ModelRequest:
    request_id: str
    task: str
    image_ref: str
    text: str

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise SchemaError(f"unknown request task {self.task!r}")

    def to_record(self) -> dict:
        return {
            "request_id": self.request_id,
            "task": self.task,
            "image_ref": self.image_ref,
            "text": self.text,
        }

    @classmethod
    def from_record(cls, raw: dict) -> "ModelRequest":
        for name in ("request_id", "task", "image_ref", "text"):
            if name not in raw:
                raise ProtocolError(f"request record missing field {name}")
        if raw["task"] not in TASKS:
            raise ProtocolError(f"unknown request task {raw['task']!r}")
        return cls(
            request_id=str(raw["request_id"]),
            task=raw["task"],
            image_ref=str(raw["image_ref"]),
            text=str(raw["text"]),
        )


@dataclass(frozen=True)
class ModelResponse:
    request_id: str
    answer: str | None = None
    entities: tuple[str, ...] | None = None
    caption: str | None = None

    def to_record(self) -> dict:
        record: dict = {"request_id": self.request_id}
        if self.answer is not None:
            record["answer"] = self.answer
        if self.entities is not None:
            record["entities"] = list(self.entities)
        if self.caption is not None:
            record["caption"] = self.caption
        return record


def parse_response_record(raw: object, request: ModelRequest) -> ModelResponse:
    """Validate a raw response record against the request it answers."""
    if not isinstance(raw, dict):
        raise ProtocolError(f"response to {request.request_id} is not an object")
    if raw.get("request_id") != request.request_id:
        raise ProtocolError(
            f"request_id mismatch: sent {request.request_id!r}, got {raw.get('request_id')!r}"
        )
    if request.task == TASK_SENT:
        answer = raw.get("answer")
        if answer not in ("yes", "no"):
            raise ProtocolError(
                f"sent_select answer must be yes/no, got {answer!r} ({request.request_id})"
            )
        return ModelResponse(request_id=request.request_id, answer=answer)
    if request.task == TASK_ENT:
        entities = raw.get("entities")
        if not isinstance(entities, list) or any(not isinstance(e, str) for e in entities):
            raise ProtocolError(
                f"ent_select response must carry a string list ({request.request_id})"
            )
        return ModelResponse(request_id=request.request_id, entities=tuple(entities))
    caption = raw.get("caption")
    if not isinstance(caption, str):
        raise ProtocolError(f"caption response must carry a string ({request.request_id})")
    return ModelResponse(request_id=request.request_id, caption=caption)


class Endpoint(Protocol):
    def query(self, request: ModelRequest) -> ModelResponse: ...

    def close(self) -> None: ...


class InProcessEndpoint:
    """Wraps a handler callable; used for the built-in mock model."""

    def __init__(self, handler: Callable[[ModelRequest], ModelResponse]):
        self._handler = handler

    def query(self, request: ModelRequest) -> ModelResponse:
        response = self._handler(request)
        return parse_response_record(response.to_record(), request)

    def close(self) -> None:
        pass


class SubprocessEndpoint:
    """Line protocol over a child process's stdin/stdout."""

    def __init__(self, argv: list[str], timeout: float = DEFAULT_TIMEOUT):
        self._timeout = timeout
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ProtocolError(f"cannot launch endpoint {argv!r}: {exc}") from None
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def query(self, request: ModelRequest) -> ModelResponse:
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write(json.dumps(request.to_record(), ensure_ascii=False) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, ValueError) as exc:
            raise ProtocolError(f"endpoint process closed its pipe: {exc}") from None
        try:
            line = self._lines.get(timeout=self._timeout)
        except queue.Empty:
            raise ProtocolError(f"timeout after {self._timeout}s on {request.request_id}") from None
        if line is None:
            raise ProtocolError(f"endpoint process exited before answering {request.request_id}")
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed response line: {exc.msg}") from None
        return parse_response_record(raw, request)

    def close(self) -> None:
        if self._proc.poll() is None:
            if self._proc.stdin is not None:
                self._proc.stdin.close()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()


class SocketEndpoint:
    """Line protocol over a local TCP connection."""

    def __init__(self, host: str, port: int, timeout: float = DEFAULT_TIMEOUT):
        try:
            self._sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise ProtocolError(f"cannot connect to {host}:{port}: {exc}") from None
        self._sock.settimeout(timeout)
        self._reader = self._sock.makefile("r", encoding="utf-8")
        self._writer = self._sock.makefile("w", encoding="utf-8")

    def query(self, request: ModelRequest) -> ModelResponse:
        try:
            self._writer.write(json.dumps(request.to_record(), ensure_ascii=False) + "\n")
            self._writer.flush()
            line = self._reader.readline()
        except (OSError, ValueError) as exc:
            raise ProtocolError(f"socket failure on {request.request_id}: {exc}") from None
        if not line:
            raise ProtocolError(f"connection closed before answering {request.request_id}")
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed response line: {exc.msg}") from None
        return parse_response_record(raw, request)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


class ReplayEndpoint:
    """Answers from a recorded trace; requests must match what was recorded."""

    def __init__(self, trace_path: str | Path):
        trace_path = Path(trace_path)
        if not trace_path.is_file():
            raise InputFileError(f"trace file not found: {trace_path}")
        self._requests: dict[str, dict] = {}
        self._responses: dict[str, dict] = {}
        with trace_path.open("r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                entry = json.loads(line)
                record = entry["record"]
                if entry["kind"] == "request":
                    self._requests[record["request_id"]] = record
                else:
                    self._responses[record["request_id"]] = record

    def query(self, request: ModelRequest) -> ModelResponse:
        recorded = self._requests.get(request.request_id)
        if recorded is None or request.request_id not in self._responses:
            raise ProtocolError(f"trace has no entry for {request.request_id}")
        if recorded != request.to_record():
            raise ProtocolError(f"request {request.request_id} differs from the recorded one")
        return parse_response_record(self._responses[request.request_id], request)

    def close(self) -> None:
        pass


class TraceWriter:
    """Append-only interleaved request/response log; the only shared sink."""

    def __init__(self, path: str | Path | None):
        self._path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        if self._path is not None:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            self._path.write_text("", encoding="utf-8")

    def append(self, kind: str, record: dict) -> None:
        if self._path is None:
            return
        entry = {"kind": kind, "record": record, "ts": time.time()}
        line = json.dumps(entry, ensure_ascii=False, sort_keys=True) + "\n"
        with self._lock:
            with self._path.open("a", encoding="utf-8") as fh:
                fh.write(line)


def _traced_query(endpoint: Endpoint, request: ModelRequest, trace: TraceWriter) -> ModelResponse:
    trace.append("request", request.to_record())
    response = endpoint.query(request)
    trace.append("response", response.to_record())
    return response


# ---------------------------------------------------------------------------
# Two-stage generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenerationConfig:
    style: str = "generic"
    origin_budget: int = DEFAULT_ORIGIN_BUDGET
    sentence_cap: int = DEFAULT_SENTENCE_CAP
    entity_prompt: str = DEFAULT_ENTITY_PROMPT
    # Payload prefixes for each task; empty by default, configurable.
    sent_prompt: str = ""
    ent_prompt: str = ""
    caption_prompt: str = ""
    # Which text the entity-extraction request sees.
    ent_context: str = "origin"  # or "origin_plus_selected"

    def __post_init__(self) -> None:
        if self.ent_context not in ("origin", "origin_plus_selected"):
            raise SchemaError(f"unknown ent_context mode {self.ent_context!r}")


@dataclass(frozen=True)
class GenerationResult:
    doc_id: str
    context: SupplementedContext
    caption: str
    requests: int


@dataclass(frozen=True)
class DocumentFailure:
    doc_id: str
    error: str


def run_self_supplemented(
    doc: Document,
    endpoint: Endpoint,
    config: GenerationConfig,
    trace: TraceWriter,
) -> GenerationResult:
    """Extract sentences and entities with the model, then caption.

    Stage 1 scans every article sentence with one ``sent_select`` request
    each and issues one ``ent_select`` request; stage 2 sends a single
    ``caption`` request over the supplemented context. No caption request
    leaves before all extraction responses arrived.
    """
    requests = 0
    origin = origin_context(doc, config.style, config.origin_budget)

    selected: list[int] = []
    for sentence in doc.sentences:
        req = ModelRequest(
            request_id=f"{doc.doc_id}/sent/{sentence.index}",
            task=TASK_SENT,
            image_ref=doc.image_ref,
            text=config.sent_prompt + sentence.text,
        )
        response = _traced_query(endpoint, req, trace)
        requests += 1
        if response.answer == "yes":
            selected.append(sentence.index)

    if config.ent_context == "origin_plus_selected":
        ent_base = supplement_context(
            doc, selected, [], origin, config.sentence_cap, config.entity_prompt
        ).final_text
    else:
        ent_base = origin.final_text
    ent_req = ModelRequest(
        request_id=f"{doc.doc_id}/ent",
        task=TASK_ENT,
        image_ref=doc.image_ref,
        text=config.ent_prompt + ent_base,
    )
    ent_response = _traced_query(endpoint, ent_req, trace)
    requests += 1
    entities = list(ent_response.entities or ())

    supplemented = supplement_context(
        doc,
        selected,
        entities,
        origin,
        sentence_cap_words=config.sentence_cap,
        entity_prompt=config.entity_prompt,
    )

    cap_req = ModelRequest(
        request_id=f"{doc.doc_id}/cap",
        task=TASK_CAPTION,
        image_ref=doc.image_ref,
        text=config.caption_prompt + supplemented.final_text,
    )
    cap_response = _traced_query(endpoint, cap_req, trace)
    requests += 1
    assert cap_response.caption is not None  # guaranteed by parse_response_record
    return GenerationResult(
        doc_id=doc.doc_id,
        context=supplemented,
        caption=cap_response.caption,
        requests=requests,
    )


def run_batch(
    documents: Iterable[Document],
    endpoint_factory: Callable[[], Endpoint],
    config: GenerationConfig,
    trace: TraceWriter,
    jobs: int = 1,
) -> tuple[list[GenerationResult], list[DocumentFailure]]:
    """Generate for many documents with bounded parallelism.

    All requests for one document go to one endpoint in order; one
    document's protocol failure is recorded and never aborts the batch.
    Results come back in corpus order regardless of completion order.
    """
    docs = list(documents)
    jobs = max(1, min(jobs, len(docs) or 1))
    endpoints: queue.Queue[Endpoint] = queue.Queue()
    for _ in range(jobs):
        endpoints.put(endpoint_factory())

    def work(doc: Document) -> GenerationResult | DocumentFailure:
        endpoint = endpoints.get()
        try:
            return run_self_supplemented(doc, endpoint, config, trace)
        except ProtocolError as exc:
            return DocumentFailure(doc_id=doc.doc_id, error=str(exc))
        finally:
            endpoints.put(endpoint)

    try:
        if jobs == 1:
            outcomes = [work(doc) for doc in docs]
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                outcomes = list(pool.map(work, docs))
    finally:
        while not endpoints.empty():
            endpoints.get_nowait().close()

    results = [o for o in outcomes if isinstance(o, GenerationResult)]
    failures = [o for o in outcomes if isinstance(o, DocumentFailure)]
    return results, failures


def make_endpoint_factory(
    spec: str,
    timeout: float = DEFAULT_TIMEOUT,
    mock_builder: Callable[[], Callable[[ModelRequest], ModelResponse]] | None = None,
) -> Callable[[], Endpoint]:
    """Parse an endpoint spec into a factory of per-worker endpoints.

    Specs: ``mock`` (requires mock_builder), ``subprocess:<command line>``,
    ``tcp:<host>:<port>``, ``replay:<trace path>``.
    """
    if spec == "mock":
        if mock_builder is None:
            raise SchemaError("mock endpoint requested but no mock model is configured")
        handler = mock_builder()
        return lambda: InProcessEndpoint(handler)
    if spec.startswith("subprocess:"):
        argv = shlex.split(spec[len("subprocess:"):])
        if not argv:
            raise SchemaError("subprocess endpoint spec has an empty command")
        return lambda: SubprocessEndpoint(argv, timeout=timeout)
    if spec.startswith("tcp:"):
        rest = spec[len("tcp:"):]
        host, _, port_text = rest.rpartition(":")
        if not host or not port_text.isdigit():
            raise SchemaError(f"tcp endpoint spec must be tcp:<host>:<port>, got {spec!r}")
        port = int(port_text)
        return lambda: SocketEndpoint(host, port, timeout=timeout)
    if spec.startswith("replay:"):
        path = spec[len("replay:"):]
        replay = ReplayEndpoint(path)
        return lambda: replay
    raise SchemaError(f"unknown endpoint spec {spec!r}")
