"""Textual-input context builders.

Regimes:

* ``origin`` -- the traditional input: first N words of the article
  (goodnews style, default 500) or a whole-sentence window around the image
  position (nytimes style).
* ``full`` -- the entire article.
* ``origin_longer`` -- the origin rule run at a larger budget, used to match
  a supplemented context's realized length.
* ``oracle_sent`` / ``oracle_ent`` / ``oracle_sent_ent`` -- idealized inputs
  built from the reference caption's entities.
* ``supplemented`` -- origin merged with selected sentences (deduplicated,
  article order, capped by whole sentences) plus an appended entity hint
  line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .alignment import caption_order_intersection, dedup_keep_order
from .corpus import Document, word_count
from .errors import SchemaError
from .ner import Entity, contains_surface

REGIMES = (
    "origin",
    "full",
    "origin_longer",
    "oracle_sent",
    "oracle_ent",
    "oracle_sent_ent",
    "supplemented",
)

DEFAULT_ORIGIN_BUDGET = 500
DEFAULT_SENTENCE_CAP = 600
DEFAULT_ENTITY_PROMPT = "The possible related entities are:"


@dataclass(frozen=True)
class SupplementedContext:
    doc_id: str
    regime: str
    base_sentence_indices: tuple[int, ...]
    entity_hints: tuple[str, ...]
    final_text: str
    sentence_word_count: int
    partial_tail: bool = field(default=False)  # goodnews prefix may cut the last sentence

    def __post_init__(self) -> None:
        if self.regime not in REGIMES:
            raise SchemaError(f"unknown context regime {self.regime!r}")
        if list(self.base_sentence_indices) != sorted(set(self.base_sentence_indices)):
            raise SchemaError("sentence indices must be strictly ascending and unique")

    @property
    def total_word_count(self) -> int:
        return word_count(self.final_text)


def _entity_line(entity_hints: list[str], entity_prompt: str) -> str:
    return f"{entity_prompt} {', '.join(entity_hints)}"


def origin_context(
    doc: Document,
    style: str,
    budget_words: int = DEFAULT_ORIGIN_BUDGET,
    regime: str = "origin",
) -> SupplementedContext:
    """Traditional context: word prefix (goodnews) or image window (nytimes)."""
    if budget_words < 1:
        raise SchemaError("budget_words must be >= 1")
    if style == "nytimes":
        return _image_window_context(doc, budget_words, regime)
    if style in ("goodnews", "generic"):
        return _prefix_context(doc, budget_words, regime)
    raise SchemaError(f"unknown corpus style {style!r}")


def _prefix_context(doc: Document, budget_words: int, regime: str) -> SupplementedContext:
    words = doc.article_text.split()
    taken = words[:budget_words]
    indices = [s.index for s in doc.sentences if s.start_word < len(taken)]
    partial = bool(indices) and doc.sentences[indices[-1]].end_word > len(taken)
    return SupplementedContext(
        doc_id=doc.doc_id,
        regime=regime,
        base_sentence_indices=tuple(indices),
        entity_hints=(),
        final_text=" ".join(taken),
        sentence_word_count=len(taken),
        partial_tail=partial,
    )


def _image_window_context(doc: Document, budget_words: int, regime: str) -> SupplementedContext:
    if doc.image_position is None:
        raise SchemaError(f"document {doc.doc_id} has no image_position (nytimes style)")
    anchor = doc.sentence_at_word(doc.image_position).index
    sentences = doc.sentences
    remaining = budget_words
    forward_target = math.ceil(budget_words / 2)

    included: list[int] = []
    used_forward = 0
    i = anchor
    # Forward fill from the image sentence up to half the budget. The anchor
    # itself only has to fit the total budget.
    while i < len(sentences):
        wc = sentences[i].word_count
        if i != anchor and used_forward + wc > forward_target:
            break
        if wc > remaining:
            break
        included.append(i)
        used_forward += wc
        remaining -= wc
        i += 1
    forward_stop = i
    # Backward fill with preceding sentences until the budget is exhausted.
    j = anchor - 1
    while j >= 0 and remaining > 0:
        wc = sentences[j].word_count
        if wc > remaining:
            break
        included.append(j)
        remaining -= wc
        j -= 1
    # Any budget the backward phase could not use flows forward again.
    i = forward_stop
    while i < len(sentences) and remaining > 0:
        wc = sentences[i].word_count
        if wc > remaining:
            break
        included.append(i)
        remaining -= wc
        i += 1

    indices = sorted(included)
    text = " ".join(sentences[k].text for k in indices)
    return SupplementedContext(
        doc_id=doc.doc_id,
        regime=regime,
        base_sentence_indices=tuple(indices),
        entity_hints=(),
        final_text=text,
        sentence_word_count=sum(sentences[k].word_count for k in indices),
    )


def full_context(doc: Document) -> SupplementedContext:
    return SupplementedContext(
        doc_id=doc.doc_id,
        regime="full",
        base_sentence_indices=tuple(s.index for s in doc.sentences),
        entity_hints=(),
        final_text=" ".join(s.text for s in doc.sentences),
        sentence_word_count=doc.total_words,
    )


def oracle_sentences(doc: Document, caption_entities: list[Entity]) -> list[int]:
    """Indices of sentences containing any caption-entity surface (all labels)."""
    surfaces = dedup_keep_order([e.surface for e in caption_entities])
    return [
        s.index
        for s in doc.sentences
        if any(contains_surface(s.text, surface) for surface in surfaces)
    ]


def oracle_entities(
    doc: Document, caption_entities: list[Entity], article_entities: list[Entity]
) -> list[str]:
    """Caption-ordered surfaces occurring in both the caption and the article."""
    return caption_order_intersection(caption_entities, article_entities)


def supplement_context(
    doc: Document,
    selected_sentence_indices: list[int],
    selected_entities: list[str],
    origin: SupplementedContext | None,
    sentence_cap_words: int | None = DEFAULT_SENTENCE_CAP,
    entity_prompt: str = DEFAULT_ENTITY_PROMPT,
    regime: str = "supplemented",
) -> SupplementedContext:
    """Merge origin and selected sentences, cap by whole sentences, append hints.

    The merged index set is deduplicated and kept in article order;
    inclusion stops at the first sentence that would push the sentence
    portion past the cap (no mid-sentence truncation, no skip-and-continue).
    The entity hint line is omitted entirely when there are no entities.
    """
    if sentence_cap_words is not None and sentence_cap_words < 1:
        raise SchemaError("sentence_cap_words must be >= 1")
    n_sentences = len(doc.sentences)
    for index in selected_sentence_indices:
        if not 0 <= index < n_sentences:
            raise SchemaError(f"sentence index {index} out of range for {doc.doc_id}")

    base = set(origin.base_sentence_indices) if origin is not None else set()
    merged = sorted(base | set(selected_sentence_indices))

    included: list[int] = []
    used = 0
    for index in merged:
        wc = doc.sentences[index].word_count
        if sentence_cap_words is not None and used + wc > sentence_cap_words:
            break
        included.append(index)
        used += wc

    hints = dedup_keep_order(list(selected_entities))
    sentence_text = " ".join(doc.sentences[k].text for k in included)
    if hints:
        line = _entity_line(hints, entity_prompt)
        final_text = f"{sentence_text}\n{line}" if sentence_text else line
    else:
        final_text = sentence_text
    return SupplementedContext(
        doc_id=doc.doc_id,
        regime=regime,
        base_sentence_indices=tuple(included),
        entity_hints=tuple(hints),
        final_text=final_text,
        sentence_word_count=used,
    )


def origin_longer_budget(default_budget: int, supplemented: SupplementedContext) -> int:
    """Origin(Longer) never carries less than the plain origin budget."""
    return max(default_budget, supplemented.total_word_count)


def origin_longer_context(doc: Document, style: str, budget_words: int) -> SupplementedContext:
    return origin_context(doc, style, budget_words, regime="origin_longer")


def oracle_sent_context(doc: Document, caption_entities: list[Entity]) -> SupplementedContext:
    """Oracle(SENT): only the sentences sharing a caption-entity surface."""
    indices = oracle_sentences(doc, caption_entities)
    return supplement_context(
        doc, indices, [], origin=None, sentence_cap_words=None, regime="oracle_sent"
    )


def oracle_ent_context(
    doc: Document,
    caption_entities: list[Entity],
    article_entities: list[Entity],
    origin: SupplementedContext,
    entity_prompt: str = DEFAULT_ENTITY_PROMPT,
) -> SupplementedContext:
    """Oracle(ENT): the origin context plus the oracle entity hint line."""
    hints = oracle_entities(doc, caption_entities, article_entities)
    text = origin.final_text
    if hints:
        line = _entity_line(hints, entity_prompt)
        text = f"{text}\n{line}" if text else line
    return SupplementedContext(
        doc_id=doc.doc_id,
        regime="oracle_ent",
        base_sentence_indices=origin.base_sentence_indices,
        entity_hints=tuple(hints),
        final_text=text,
        sentence_word_count=origin.sentence_word_count,
        partial_tail=origin.partial_tail,
    )


def oracle_sent_ent_context(
    doc: Document,
    caption_entities: list[Entity],
    article_entities: list[Entity],
    origin: SupplementedContext,
    sentence_cap_words: int = DEFAULT_SENTENCE_CAP,
    entity_prompt: str = DEFAULT_ENTITY_PROMPT,
) -> SupplementedContext:
    """Oracle(SENT+ENT): oracle sentences and entities supplementing origin."""
    return supplement_context(
        doc,
        oracle_sentences(doc, caption_entities),
        oracle_entities(doc, caption_entities, article_entities),
        origin=origin,
        sentence_cap_words=sentence_cap_words,
        entity_prompt=entity_prompt,
        regime="oracle_sent_ent",
    )
