"""Caption evaluation: n-gram metrics and entity-level analyses."""

from .entities import EvalReport, entity_report, full_report, merge_external_meteor
from .ngram import (
    bleu4,
    bleu_scores,
    cider,
    cider_per_document,
    rouge_l,
    rouge_l_per_document,
    tokenize_caption,
)

__all__ = [
    "EvalReport",
    "bleu4",
    "bleu_scores",
    "cider",
    "cider_per_document",
    "entity_report",
    "full_report",
    "merge_external_meteor",
    "rouge_l",
    "rouge_l_per_document",
    "tokenize_caption",
]
