"""Deterministic mock captioning model.

Rules: a sentence is selected when it shares at least one gazetteer entity
with the document's caption (looked up by image reference); entity
extraction returns the deduplicated gazetteer entities of the payload in
order of appearance; the caption is the first payload sentence truncated to
18 words, the corpus-average caption length.

Runs in-process as a handler, as a stdio line-protocol server
(``python -m newscap.mock_model``), or as a local TCP server (``--tcp``),
so every endpoint transport can be exercised against the same rules.
"""

from __future__ import annotations

import argparse
import json
import socketserver
import sys
from pathlib import Path

from .alignment import dedup_keep_order
from .corpus import load_corpus_dir, ingest_jsonl, segment_sentences
from .errors import InputFileError
from .gateway import TASK_ENT, TASK_SENT, ModelRequest, ModelResponse
from .ner import GazetteerTagger, load_gazetteer

CAPTION_WORD_LIMIT = 18


class MockModel:
    """Stateless after construction; safe to share across worker threads."""

    def __init__(self, tagger: GazetteerTagger, captions_by_image_ref: dict[str, str]):
        self._tagger = tagger
        self._captions = dict(captions_by_image_ref)

    def handle(self, request: ModelRequest) -> ModelResponse:
        if request.task == TASK_SENT:
            caption = self._captions.get(request.image_ref, "")
            sentence_surfaces = {e.surface for e in self._tagger.tag(request.text)}
            caption_surfaces = {e.surface for e in self._tagger.tag(caption)}
            answer = "yes" if sentence_surfaces & caption_surfaces else "no"
            return ModelResponse(request_id=request.request_id, answer=answer)
        if request.task == TASK_ENT:
            surfaces = dedup_keep_order([e.surface for e in self._tagger.tag(request.text)])
            return ModelResponse(request_id=request.request_id, entities=tuple(surfaces))
        sentences = segment_sentences(request.text)
        first = sentences[0].text if sentences else ""
        caption = " ".join(first.split()[:CAPTION_WORD_LIMIT])
        return ModelResponse(request_id=request.request_id, caption=caption)


def build_mock_model(gazetteer_path: str | Path, corpus_path: str | Path) -> MockModel:
    tagger = load_gazetteer(gazetteer_path)
    corpus_path = Path(corpus_path)
    if corpus_path.is_dir():
        corpus = load_corpus_dir(corpus_path)
    elif corpus_path.is_file():
        corpus = ingest_jsonl(corpus_path)
    else:
        raise InputFileError(f"corpus not found: {corpus_path}")
    captions = {doc.image_ref: doc.caption for doc in corpus}
    return MockModel(tagger, captions)


def _answer_line(model: MockModel, line: str) -> str:
    try:
        request = ModelRequest.from_record(json.loads(line))
    except Exception as exc:  # malformed input: report, keep serving
        return json.dumps({"request_id": None, "error": str(exc)}, ensure_ascii=False)
    response = model.handle(request)
    return json.dumps(response.to_record(), ensure_ascii=False)


def serve_stdio(model: MockModel) -> None:
    for line in sys.stdin:
        if not line.strip():
            continue
        sys.stdout.write(_answer_line(model, line) + "\n")
        sys.stdout.flush()


class _LineHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        for raw in self.rfile:
            line = raw.decode("utf-8")
            if not line.strip():
                continue
            self.wfile.write((_answer_line(self.server.model, line) + "\n").encode("utf-8"))
            self.wfile.flush()


class MockModelServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, model: MockModel, host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), _LineHandler)
        self.model = model


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Serve the deterministic mock model.")
    parser.add_argument("--gazetteer", required=True, help="surface<TAB>label file")
    parser.add_argument("--corpus", required=True, help="corpus directory or JSONL file")
    parser.add_argument("--tcp", type=int, default=None, metavar="PORT",
                        help="serve on 127.0.0.1:PORT instead of stdio")
    args = parser.parse_args(argv)
    model = build_mock_model(args.gazetteer, args.corpus)
    if args.tcp is not None:
        server = MockModelServer(model, port=args.tcp)
        print(f"listening on 127.0.0.1:{server.server_address[1]}", file=sys.stderr)
        server.serve_forever()
    else:
        serve_stdio(model)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
