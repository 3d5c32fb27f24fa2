"""Construction of the three alignment-task sample streams and mini-groups.

Three task tags:

* ``SENT`` -- binary sentence selection: does this article sentence contain
  a visual entity from the caption? Positives are the sentences tied at the
  per-document maximum visual-entity count plus the caption itself; hard
  negatives are drawn (seeded) from sentences containing none.
* ``ENT`` -- entity selection: emit the caption-ordered sequence of entities
  whose surfaces also occur among the article's entities.
* ``CAP`` -- captioning: context in, reference caption out.

Training batches are organized as mini-groups of 2 CAP samples, 1 SENT
sample set, and 1 ENT sample.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from .corpus import Document
from .errors import SchemaError
from .ner import Entity, VisualEntityPolicy, contains_surface, visual_entities

TASKS = ("SENT", "ENT", "CAP")

# Separator for serialized entity sequences in ENT contexts and targets.
ENTITY_JOIN = ", "
ENT_CONTEXT_DELIMITER = "\nEntities: "


@dataclass(frozen=True)
class AlignmentSample:
    sample_id: str
    task: str
    doc_id: str
    image_ref: str
    input_context: str
    target: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise SchemaError(f"unknown task {self.task!r}")
        if self.task == "SENT" and self.target not in ("yes", "no"):
            raise SchemaError(f"SENT target must be yes/no, got {self.target!r}")


@dataclass(frozen=True)
class MiniGroup:
    """One training batch unit: exactly 2 CAP + 1 SENT set + 1 ENT."""

    index: int
    cap_samples: tuple[AlignmentSample, AlignmentSample]
    sent_set: tuple[AlignmentSample, ...]
    ent_sample: AlignmentSample


def stable_seed(seed: int, *parts: str) -> int:
    """Platform-stable per-document seed derivation."""
    digest = hashlib.sha256(("|".join([str(seed), *parts])).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def dedup_keep_order(items: list[str]) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def sentence_entity_counts(doc: Document, surfaces: list[str]) -> list[int]:
    """Per-sentence count of distinct surfaces present at word boundaries."""
    unique = dedup_keep_order(surfaces)
    return [
        sum(1 for surface in unique if contains_surface(sentence.text, surface))
        for sentence in doc.sentences
    ]


def build_sentence_selection(
    doc: Document,
    caption_entities: list[Entity],
    policy: VisualEntityPolicy,
    neg_per_group: int | None = None,
    rng_seed: int = 0,
) -> list[AlignmentSample]:
    """SENT samples for one document.

    With no visual caption entity the task is undefined and no samples are
    emitted. ``neg_per_group`` defaults to the number of positives
    (balanced classes); fewer eligible sentences than requested yields
    fewer negatives.
    """
    if neg_per_group is not None and neg_per_group < 0:
        raise SchemaError("neg_per_group must be >= 0")
    visual = visual_entities(caption_entities, policy)
    surfaces = dedup_keep_order([e.surface for e in visual])
    if not surfaces:
        return []

    counts = sentence_entity_counts(doc, surfaces)
    max_count = max(counts)
    samples: list[AlignmentSample] = []

    def add(text: str, target: str, meta: dict) -> None:
        samples.append(
            AlignmentSample(
                sample_id=f"sent:{doc.doc_id}:{len(samples)}",
                task="SENT",
                doc_id=doc.doc_id,
                image_ref=doc.image_ref,
                input_context=text,
                target=target,
                metadata=meta,
            )
        )

    positive_indices = (
        [i for i, c in enumerate(counts) if c == max_count] if max_count >= 1 else []
    )
    for i in positive_indices:
        add(doc.sentences[i].text, "yes", {"sentence_index": i, "provenance": "positive"})
    # The caption itself always joins the positives.
    add(doc.caption, "yes", {"sentence_index": None, "provenance": "caption"})

    negative_pool = [i for i, c in enumerate(counts) if c == 0]
    wanted = len(samples) if neg_per_group is None else neg_per_group
    rng = random.Random(stable_seed(rng_seed, doc.doc_id, "sent-neg"))
    chosen = sorted(rng.sample(negative_pool, min(wanted, len(negative_pool))))
    for i in chosen:
        add(doc.sentences[i].text, "no", {"sentence_index": i, "provenance": "negative"})
    return samples


def caption_order_intersection(
    caption_entities: list[Entity], article_entities: list[Entity]
) -> list[str]:
    """Caption-ordered surfaces present in both lists, first mention only."""
    article_surfaces = {e.surface for e in article_entities}
    ordered = sorted(caption_entities, key=lambda e: e.start_char)
    return dedup_keep_order([e.surface for e in ordered if e.surface in article_surfaces])


def build_entity_selection(
    doc: Document,
    caption_entities: list[Entity],
    article_entities: list[Entity],
) -> AlignmentSample:
    """ENT sample: all caption entities (visual and not) found in the article."""
    target_surfaces = caption_order_intersection(caption_entities, article_entities)
    candidate_surfaces = dedup_keep_order(
        [e.surface for e in sorted(article_entities, key=lambda e: e.start_char)]
    )
    context = doc.article_text
    if candidate_surfaces:
        context += ENT_CONTEXT_DELIMITER + ENTITY_JOIN.join(candidate_surfaces)
    return AlignmentSample(
        sample_id=f"ent:{doc.doc_id}",
        task="ENT",
        doc_id=doc.doc_id,
        image_ref=doc.image_ref,
        input_context=context,
        target=ENTITY_JOIN.join(target_surfaces),
        metadata={
            "candidates": candidate_surfaces,
            "targets": target_surfaces,
            "context_words": len(context.split()),
        },
    )


def build_caption_sample(doc: Document, context: str, sample_no: int = 0) -> AlignmentSample:
    return AlignmentSample(
        sample_id=f"cap:{doc.doc_id}:{sample_no}",
        task="CAP",
        doc_id=doc.doc_id,
        image_ref=doc.image_ref,
        input_context=context,
        target=doc.caption,
        metadata={"context_words": len(context.split())},
    )


def assemble_minigroups(
    cap_samples: list[AlignmentSample],
    sent_sets: list[list[AlignmentSample]],
    ent_samples: list[AlignmentSample],
    rng_seed: int = 0,
) -> tuple[list[MiniGroup], dict[str, int]]:
    """Deterministically shuffle the streams and zip them into mini-groups.

    Returns the groups plus a leftover count per stream; leftovers are
    reported, never silently dropped.
    """
    if not cap_samples or not sent_sets or not ent_samples:
        raise SchemaError("every task stream must be non-empty to form mini-groups")
    caps = list(cap_samples)
    sents = list(sent_sets)
    ents = list(ent_samples)
    random.Random(stable_seed(rng_seed, "cap")).shuffle(caps)
    random.Random(stable_seed(rng_seed, "sent")).shuffle(sents)
    random.Random(stable_seed(rng_seed, "ent")).shuffle(ents)

    n_groups = min(len(caps) // 2, len(sents), len(ents))
    groups = [
        MiniGroup(
            index=i,
            cap_samples=(caps[2 * i], caps[2 * i + 1]),
            sent_set=tuple(sents[i]),
            ent_sample=ents[i],
        )
        for i in range(n_groups)
    ]
    leftovers = {
        "CAP": len(caps) - 2 * n_groups,
        "SENT_sets": len(sents) - n_groups,
        "ENT": len(ents) - n_groups,
    }
    return groups, leftovers
