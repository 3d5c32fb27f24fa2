from __future__ import annotations

import pytest

from newscap.alignment import (
    MiniGroup,
    assemble_minigroups,
    build_caption_sample,
    build_entity_selection,
    build_sentence_selection,
    caption_order_intersection,
)
from newscap.context import origin_context
from newscap.corpus import Document, make_document
from newscap.errors import SchemaError
from newscap.ner import Entity, VisualEntityPolicy, contains_surface, visual_entities

from synth import make_tagger, synth_corpus

POLICY = VisualEntityPolicy()


def tag_caption(tagger, doc):
    return tagger.tag(doc.caption, doc_id=doc.doc_id, field="caption")


def tag_article(tagger, doc):
    return tagger.tag(doc.article_text, doc_id=doc.doc_id, field="article")


def make_doc(article: str, caption: str, doc_id="d1") -> Document:
    return make_document(doc_id, article, caption, f"img/{doc_id}.jpg", "train")


# ---------------------------------------------------------------------------
# sentence selection (SENT)
# ---------------------------------------------------------------------------

def test_sentence_labels_follow_entity_presence():
    doc = make_doc(
        "Lucy Bronze scored twice. The weather was mild. Fans sang songs.",
        "Lucy Bronze celebrates a win.",
    )
    entities = [Entity("Lucy Bronze", "PERSON", 0, 11)]
    samples = build_sentence_selection(doc, entities, POLICY, rng_seed=1)
    by_provenance = {s.metadata["provenance"]: s for s in samples}
    assert by_provenance["positive"].input_context == "Lucy Bronze scored twice."
    assert by_provenance["positive"].target == "yes"
    assert by_provenance["caption"].input_context == doc.caption
    assert by_provenance["caption"].target == "yes"
    negatives = [s for s in samples if s.metadata["provenance"] == "negative"]
    assert all(s.target == "no" for s in negatives)
    assert all("Lucy Bronze" not in s.input_context for s in negatives)


def test_positives_are_sentences_with_most_visual_entities():
    doc = make_doc(
        "Alice Ngu met Bob Tan today. Alice Ngu left early. The rain kept falling.",
        "Alice Ngu and Bob Tan shake hands.",
    )
    entities = [Entity("Alice Ngu", "PERSON", 0, 9), Entity("Bob Tan", "PERSON", 14, 21)]
    samples = build_sentence_selection(doc, entities, POLICY, rng_seed=0)
    positive_texts = [
        s.input_context for s in samples if s.metadata["provenance"] == "positive"
    ]
    # only the two-entity sentence reaches the per-document maximum
    assert positive_texts == ["Alice Ngu met Bob Tan today."]
    negative_indices = [
        s.metadata["sentence_index"] for s in samples if s.metadata["provenance"] == "negative"
    ]
    assert negative_indices == [2]  # only the zero-entity sentence is eligible


def test_no_samples_without_visual_caption_entities():
    doc = make_doc("Something happened. More text here.", "It happened on Tuesday.")
    entities = [Entity("Tuesday", "DATE", 15, 22)]
    assert build_sentence_selection(doc, entities, POLICY, rng_seed=0) == []


def test_caption_positive_appears_exactly_once():
    corpus = synth_corpus(30, seed=3)
    tagger = make_tagger()
    for doc in corpus:
        samples = build_sentence_selection(doc, tag_caption(tagger, doc), POLICY, rng_seed=5)
        if samples:
            assert sum(1 for s in samples if s.metadata["provenance"] == "caption") == 1


def test_negative_count_defaults_to_positive_count():
    corpus = synth_corpus(30, seed=4)
    tagger = make_tagger()
    for doc in corpus:
        samples = build_sentence_selection(doc, tag_caption(tagger, doc), POLICY, rng_seed=5)
        if not samples:
            continue
        positives = [s for s in samples if s.target == "yes"]
        negatives = [s for s in samples if s.target == "no"]
        zero_pool = _zero_entity_sentences(doc, tagger)
        assert len(negatives) == min(len(positives), len(zero_pool))


def _zero_entity_sentences(doc, tagger):
    surfaces = {
        e.surface for e in visual_entities(tag_caption(tagger, doc), POLICY)
    }
    return [
        s.index
        for s in doc.sentences
        if not any(contains_surface(s.text, surface) for surface in surfaces)
    ]


def test_sentence_selection_brute_force_soundness():
    """Independent re-scan: every yes sample holds >=1 visual caption entity,
    every no sample holds none (hard-negative purity)."""
    corpus = synth_corpus(50, seed=6)
    tagger = make_tagger()
    for doc in corpus:
        caption_entities = tag_caption(tagger, doc)
        surfaces = {e.surface for e in visual_entities(caption_entities, POLICY)}
        for sample in build_sentence_selection(doc, caption_entities, POLICY, rng_seed=9):
            present = any(contains_surface(sample.input_context, s) for s in surfaces)
            assert present == (sample.target == "yes")


def test_sentence_selection_seeded_reproducibility():
    corpus = synth_corpus(10, seed=8)
    tagger = make_tagger()
    for doc in corpus:
        entities = tag_caption(tagger, doc)
        first = build_sentence_selection(doc, entities, POLICY, rng_seed=42)
        second = build_sentence_selection(doc, entities, POLICY, rng_seed=42)
        assert first == second


def test_negative_neg_per_group_rejected():
    doc = make_doc("One sentence here.", "A caption.")
    with pytest.raises(SchemaError):
        build_sentence_selection(doc, [], POLICY, neg_per_group=-1)


# ---------------------------------------------------------------------------
# entity selection (ENT)
# ---------------------------------------------------------------------------

def _caption_entities(*pairs):
    out = []
    pos = 0
    for surface in pairs:
        out.append(Entity(surface, "PERSON", pos, pos + len(surface)))
        pos += len(surface) + 1
    return out


def test_entity_selection_intersection_in_caption_order():
    caption = _caption_entities("Ertz", "Bronze", "England")
    article = _caption_entities("Bronze", "England", "Lyon")
    assert caption_order_intersection(caption, article) == ["Bronze", "England"]


def test_entity_selection_empty_intersection():
    caption = _caption_entities("Ertz")
    article = _caption_entities("Lyon")
    assert caption_order_intersection(caption, article) == []


def test_entity_selection_duplicates_collapse_to_first():
    # caption "X met Y; X smiled": X appears twice, listed once at first position
    caption = [
        Entity("X", "PERSON", 0, 1),
        Entity("Y", "PERSON", 6, 7),
        Entity("X", "PERSON", 9, 10),
    ]
    article = _caption_entities("Y", "X")
    assert caption_order_intersection(caption, article) == ["X", "Y"]


def brute_force_ordered_intersection(caption_entities, article_entities):
    article_surfaces = {e.surface for e in article_entities}
    seen = set()
    out = []
    for e in sorted(caption_entities, key=lambda e: e.start_char):
        if e.surface in article_surfaces and e.surface not in seen:
            seen.add(e.surface)
            out.append(e.surface)
    return out


def test_entity_selection_brute_force_oracle_on_corpus():
    corpus = synth_corpus(50, seed=12)
    tagger = make_tagger()
    for doc in corpus:
        caption_entities = tag_caption(tagger, doc)
        article_entities = tag_article(tagger, doc)
        sample = build_entity_selection(doc, caption_entities, article_entities)
        expected = brute_force_ordered_intersection(caption_entities, article_entities)
        assert sample.metadata["targets"] == expected
        assert sample.target == ", ".join(expected)
        # every target surface occurs among article entities
        article_surfaces = {e.surface for e in article_entities}
        assert all(s in article_surfaces for s in sample.metadata["targets"])


def test_entity_selection_context_carries_article_and_candidates():
    doc = make_doc("Lucy Bronze met England fans. It was loud.", "Lucy Bronze waves to England.")
    tagger = make_tagger()
    sample = build_entity_selection(doc, tag_caption(tagger, doc), tag_article(tagger, doc))
    assert sample.input_context.startswith(doc.article_text)
    assert "Lucy Bronze" in sample.input_context.rsplit("\n", 1)[-1]
    assert sample.task == "ENT"


def test_entity_selection_empty_target_is_valid():
    doc = make_doc("Nothing notable happened today.", "Quiet day in the park.")
    sample = build_entity_selection(doc, [], [])
    assert sample.target == ""


# ---------------------------------------------------------------------------
# caption samples (CAP)
# ---------------------------------------------------------------------------

def test_caption_sample_target_is_reference():
    doc = make_doc("Some article text here.", "A b c.")
    sample = build_caption_sample(doc, "Some article text here.")
    assert sample.target == "A b c."
    assert sample.task == "CAP"


def test_caption_sample_respects_origin_budget():
    corpus = synth_corpus(5, seed=2)
    for doc in corpus:
        origin = origin_context(doc, "goodnews", 500)
        sample = build_caption_sample(doc, origin.final_text)
        assert len(sample.input_context.split()) <= 500


# ---------------------------------------------------------------------------
# mini-groups
# ---------------------------------------------------------------------------

def _samples(task: str, n: int):
    doc = make_doc("Words in a sentence.", "A caption.")
    if task == "CAP":
        return [build_caption_sample(doc, "ctx", sample_no=i) for i in range(n)]
    return [build_entity_selection(doc, [], []) for _ in range(n)]


def _sent_sets(n: int):
    doc = make_doc(
        "Lucy Bronze scored twice. The weather was mild.",
        "Lucy Bronze celebrates.",
    )
    entities = [Entity("Lucy Bronze", "PERSON", 0, 11)]
    return [build_sentence_selection(doc, entities, POLICY, rng_seed=i) for i in range(n)]


def test_minigroups_exact_division():
    groups, leftovers = assemble_minigroups(_samples("CAP", 4), _sent_sets(2), _samples("ENT", 2))
    assert len(groups) == 2
    assert leftovers == {"CAP": 0, "SENT_sets": 0, "ENT": 0}
    for group in groups:
        assert isinstance(group, MiniGroup)
        assert len(group.cap_samples) == 2
        assert len(group.sent_set) >= 1
        assert group.ent_sample.task == "ENT"


def test_minigroups_reports_leftovers():
    _groups, leftovers = assemble_minigroups(_samples("CAP", 5), _sent_sets(2), _samples("ENT", 2))
    assert leftovers["CAP"] == 1


def test_minigroups_deterministic_given_seed():
    args = (_samples("CAP", 8), _sent_sets(4), _samples("ENT", 4))
    first, _ = assemble_minigroups(*args, rng_seed=7)
    second, _ = assemble_minigroups(*args, rng_seed=7)
    assert [
        ([s.sample_id for s in g.cap_samples], g.ent_sample.sample_id) for g in first
    ] == [([s.sample_id for s in g.cap_samples], g.ent_sample.sample_id) for g in second]


def test_minigroups_empty_stream_is_error():
    with pytest.raises(SchemaError):
        assemble_minigroups([], _sent_sets(1), _samples("ENT", 1))
