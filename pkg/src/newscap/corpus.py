"""Corpus ingestion, sentence segmentation, and word accounting.

A corpus is one JSON record per line with fields ``doc_id``, ``article``,
``caption``, ``image_ref``, ``split``, and (for corpora that track where the
photo sits in the article) ``image_position`` as a word offset. Articles are
segmented into sentences at ingest time with a deterministic rule set so the
same input file always produces the same corpus, byte for byte.

All budgets downstream are measured in whitespace-delimited words, and every
sentence is a contiguous word range of the normalized article, so joining
the sentence texts reproduces the whitespace-normalized article exactly.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

from .errors import InputFileError, SchemaError

STYLES = ("goodnews", "nytimes", "generic")
SPLITS = ("train", "validation", "test")

_TERMINALS = ".!?"
_CLOSERS = "\"'”’)]}»"
_OPENERS = "\"'“‘([{«"
_INITIALS_RE = re.compile(r"^([A-Za-z]\.)+$")


def _load_default_abbreviations() -> frozenset[str]:
    text = resources.files("newscap").joinpath("data/abbreviations.txt").read_text("utf-8")
    entries = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.add(line.lower())
    return frozenset(entries)


_DEFAULT_ABBREVIATIONS = _load_default_abbreviations()


def normalize_ws(text: str) -> str:
    """Collapse all whitespace runs to single spaces and trim the ends."""
    return " ".join(text.split())


def word_count(text: str) -> int:
    """Number of whitespace-delimited tokens after normalization."""
    return len(text.split())


@dataclass(frozen=True)
class Sentence:
    """One sentence as a word range [start_word, end_word) of its article."""

    index: int
    text: str
    start_word: int
    end_word: int

    @property
    def word_count(self) -> int:
        return self.end_word - self.start_word


def _is_boundary(words: list[str], i: int, abbreviations: frozenset[str]) -> bool:
    core = words[i].rstrip(_CLOSERS)
    if not core or core[-1] not in _TERMINALS:
        return False
    # A following lowercase word signals a continuation, not a new sentence.
    if i + 1 < len(words):
        nxt = words[i + 1].lstrip(_OPENERS)
        if nxt and nxt[0].islower():
            return False
    if core[-1] == ".":
        token = core.lstrip(_OPENERS).lower()
        if token in abbreviations:
            return False
        if _INITIALS_RE.match(token):
            return False
    return True


def segment_sentences(text: str, abbreviations: frozenset[str] | None = None) -> list[Sentence]:
    """Split text into sentences over contiguous, disjoint word ranges.

    Rules: a word ends a sentence when, after stripping trailing quotes and
    brackets, it ends in ``.``, ``!`` or ``?``; a period does not split after
    a known abbreviation or a run of single-letter initials; nothing splits
    before a word starting with a lowercase letter. Any trailing words
    without a terminal form a final sentence. Total function: empty input
    yields an empty list.
    """
    abbreviations = abbreviations if abbreviations is not None else _DEFAULT_ABBREVIATIONS
    words = text.split()
    if not words:
        return []
    sentences: list[Sentence] = []
    start = 0
    for i in range(len(words)):
        if i == len(words) - 1 or _is_boundary(words, i, abbreviations):
            sentences.append(
                Sentence(
                    index=len(sentences),
                    text=" ".join(words[start : i + 1]),
                    start_word=start,
                    end_word=i + 1,
                )
            )
            start = i + 1
    return sentences


@dataclass(frozen=True)
class Document:
    """One corpus record; immutable after ingestion."""

    doc_id: str
    article_text: str
    caption: str
    image_ref: str
    split: str
    sentences: tuple[Sentence, ...]
    image_position: int | None = None

    @property
    def total_words(self) -> int:
        return self.sentences[-1].end_word if self.sentences else 0

    def sentence_at_word(self, position: int) -> Sentence:
        """Sentence containing the given word offset (clamped to the ends)."""
        position = max(0, min(position, self.total_words - 1))
        for sentence in self.sentences:
            if sentence.start_word <= position < sentence.end_word:
                return sentence
        raise SchemaError(f"word position {position} outside document {self.doc_id}")


def make_document(
    doc_id: str,
    article: str,
    caption: str,
    image_ref: str,
    split: str,
    image_position: int | None = None,
) -> Document:
    if split not in SPLITS:
        raise SchemaError(f"unknown split {split!r} (expected one of {SPLITS})")
    if not article.split():
        raise SchemaError(f"document {doc_id} has an empty article")
    if not caption.split():
        raise SchemaError(f"document {doc_id} has an empty caption")
    sentences = tuple(segment_sentences(article))
    total = sentences[-1].end_word
    if image_position is not None and not 0 <= image_position <= total:
        raise SchemaError(
            f"document {doc_id}: image_position {image_position} outside [0, {total}]"
        )
    return Document(
        doc_id=doc_id,
        article_text=article,
        caption=caption,
        image_ref=image_ref,
        split=split,
        sentences=sentences,
        image_position=image_position,
    )


@dataclass
class Corpus:
    """An ordered collection of validated documents, safe for shared reads."""

    style: str
    documents: list[Document] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._by_id = {doc.doc_id: doc for doc in self.documents}

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __getitem__(self, doc_id: str) -> Document:
        try:
            return self._by_id[doc_id]
        except KeyError:
            raise SchemaError(f"unknown doc_id {doc_id!r}") from None

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    def add(self, doc: Document) -> None:
        if doc.doc_id in self._by_id:
            raise SchemaError(f"duplicate doc_id {doc.doc_id!r}")
        self.documents.append(doc)
        self._by_id[doc.doc_id] = doc

    def split_counts(self) -> dict[str, int]:
        counts = {split: 0 for split in SPLITS}
        for doc in self.documents:
            counts[doc.split] += 1
        return counts


_REQUIRED_FIELDS = ("doc_id", "article", "caption", "image_ref", "split")


def _parse_record(raw: dict, line_no: int, style: str) -> Document:
    for name in _REQUIRED_FIELDS:
        if name not in raw:
            raise SchemaError(f"missing field {name} at line {line_no}")
    image_position = raw.get("image_position")
    if image_position is not None and not isinstance(image_position, int):
        raise SchemaError(f"image_position must be an integer at line {line_no}")
    if style == "nytimes" and image_position is None:
        raise SchemaError(f"missing field image_position at line {line_no} (nytimes style)")
    try:
        return make_document(
            doc_id=str(raw["doc_id"]),
            article=str(raw["article"]),
            caption=str(raw["caption"]),
            image_ref=str(raw["image_ref"]),
            split=str(raw["split"]),
            image_position=image_position,
        )
    except SchemaError as exc:
        raise SchemaError(f"{exc} (line {line_no})") from None


def iter_records(path: str | Path) -> Iterator[tuple[int, dict]]:
    path = Path(path)
    if not path.is_file():
        raise InputFileError(f"corpus file not found: {path}")
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"malformed record at line {line_no}: {exc.msg}") from None
            if not isinstance(raw, dict):
                raise SchemaError(f"malformed record at line {line_no}: not an object")
            yield line_no, raw


def ingest_jsonl(path: str | Path, style: str = "generic") -> Corpus:
    """Stream-validate a JSONL corpus file into a Corpus."""
    if style not in STYLES:
        raise SchemaError(f"unknown corpus style {style!r} (expected one of {STYLES})")
    corpus = Corpus(style=style)
    for line_no, raw in iter_records(path):
        doc = _parse_record(raw, line_no, style)
        if doc.doc_id in corpus:
            raise SchemaError(f"duplicate doc_id {doc.doc_id!r} at line {line_no}")
        corpus.add(doc)
    return corpus


def document_to_record(doc: Document) -> dict:
    record = {
        "doc_id": doc.doc_id,
        "article": doc.article_text,
        "caption": doc.caption,
        "image_ref": doc.image_ref,
        "split": doc.split,
        "sentences": [[s.start_word, s.end_word] for s in doc.sentences],
    }
    if doc.image_position is not None:
        record["image_position"] = doc.image_position
    return record


def write_corpus_dir(corpus: Corpus, out_dir: str | Path) -> dict:
    """Write the validated corpus directory: documents.jsonl + manifest.json.

    Output is deterministic for identical inputs (sorted keys, no
    timestamps), so re-ingesting the same file is byte-identical.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "documents.jsonl").open("w", encoding="utf-8") as fh:
        for doc in corpus:
            fh.write(json.dumps(document_to_record(doc), ensure_ascii=False, sort_keys=True))
            fh.write("\n")
    manifest = {
        "documents": len(corpus),
        "splits": corpus.split_counts(),
        "style": corpus.style,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return manifest


def load_corpus_dir(corpus_dir: str | Path) -> Corpus:
    corpus_dir = Path(corpus_dir)
    manifest_path = corpus_dir / "manifest.json"
    documents_path = corpus_dir / "documents.jsonl"
    if not manifest_path.is_file() or not documents_path.is_file():
        raise InputFileError(f"not a corpus directory (missing manifest): {corpus_dir}")
    manifest = json.loads(manifest_path.read_text("utf-8"))
    corpus = Corpus(style=manifest.get("style", "generic"))
    for line_no, raw in iter_records(documents_path):
        doc = _parse_record(raw, line_no, corpus.style)
        corpus.add(doc)
    return corpus


def join_sentences(sentences: Iterable[Sentence]) -> str:
    return " ".join(s.text for s in sentences)
