"""Seeded synthetic news corpus for soundness and property tests.

Documents embed entities from a fixed bank; captions mention a few of them
and articles repeat caption entities in some sentences, so alignment and
context construction have non-trivial positives, negatives, and oracles.
Everything is driven by random.Random(seed) and is fully reproducible.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from newscap.corpus import Corpus, make_document
from newscap.ner import GazetteerTagger

PEOPLE = [
    "Lucy Bronze", "Julie Ertz", "Anna Holm", "Erik Brandt", "Maya Okafor",
    "Daniel Reyes", "Ingrid Svensson", "Tomas Marek", "Aisha Bello", "Petr Novak",
]
PLACES = ["England", "Lyon", "Copenhagen", "Nairobi", "Oporto", "Lisbon", "Prague"]
ORGS = ["United Nations", "Acme Corp", "Riverside FC", "Northern Rail", "Star Lab"]
DATES = ["Tuesday", "Friday", "March", "November"]

FILLER = (
    "the match continued under light rain as fans watched from the stands "
    "officials reviewed the schedule while traffic slowed near the stadium "
    "a long season brought many changes and quiet afternoons in the capital "
    "reports described steady progress on the project despite early delays"
).split()


def gazetteer_entries() -> dict[str, str]:
    entries = {name: "PERSON" for name in PEOPLE}
    entries.update({place: "GPE" for place in PLACES})
    entries.update({org: "ORG" for org in ORGS})
    return entries


def make_tagger() -> GazetteerTagger:
    return GazetteerTagger(gazetteer_entries())


def _filler(rng: random.Random, n: int) -> list[str]:
    return [rng.choice(FILLER) for _ in range(n)]


def _sentence(rng: random.Random, mentions: list[str]) -> str:
    words = _filler(rng, rng.randint(4, 10))
    for mention in mentions:
        words.insert(rng.randint(0, len(words)), mention)
    text = " ".join(words)
    return text[0].upper() + text[1:] + "."


def synth_document(doc_id: str, rng: random.Random, split: str = "train",
                   with_image_position: bool = False):
    caption_people = rng.sample(PEOPLE, rng.randint(1, 3))
    caption_places = rng.sample(PLACES, rng.randint(0, 2))
    caption_date = [rng.choice(DATES)] if rng.random() < 0.5 else []
    caption_entities = caption_people + caption_places + caption_date
    rng.shuffle(caption_entities)
    caption = _sentence(rng, caption_entities)

    visual = caption_people + caption_places
    n_sentences = rng.randint(6, 14)
    sentences = []
    for _ in range(n_sentences):
        roll = rng.random()
        if roll < 0.2 and visual:
            mentions = rng.sample(visual, rng.randint(1, min(2, len(visual))))
        elif roll < 0.35:
            # distractor entities not in the caption
            pool = [p for p in PEOPLE + PLACES + ORGS if p not in caption_entities]
            mentions = rng.sample(pool, rng.randint(1, 2))
        else:
            mentions = []
        sentences.append(_sentence(rng, mentions))
    article = " ".join(sentences)

    image_position = None
    if with_image_position:
        image_position = rng.randint(0, len(article.split()))
    return make_document(
        doc_id=doc_id,
        article=article,
        caption=caption,
        image_ref=f"images/{doc_id}.jpg",
        split=split,
        image_position=image_position,
    )


def synth_corpus(n_docs: int, seed: int = 7, style: str = "generic") -> Corpus:
    rng = random.Random(seed)
    corpus = Corpus(style=style)
    for i in range(n_docs):
        corpus.add(
            synth_document(
                f"doc{i:04d}", rng, with_image_position=(style == "nytimes")
            )
        )
    return corpus


def write_corpus_jsonl(corpus: Corpus, path: Path) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for doc in corpus:
            record = {
                "doc_id": doc.doc_id,
                "article": doc.article_text,
                "caption": doc.caption,
                "image_ref": doc.image_ref,
                "split": doc.split,
            }
            if doc.image_position is not None:
                record["image_position"] = doc.image_position
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def write_gazetteer(path: Path) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for surface, label in sorted(gazetteer_entries().items()):
            fh.write(f"{surface}\t{label}\n")
