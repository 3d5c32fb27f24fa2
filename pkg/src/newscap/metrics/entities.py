"""Entity-level evaluation: precision/recall, in/out-context recall, and
out-of-train analysis, plus the assembled evaluation report.

Matching is exact case-sensitive surface equality with multiset clipping
(see newscap.ner.match_entities). A reference entity is "in context" when
its surface occurs in the document's textual input at a word boundary; the
in/out split partitions the matched-entity count exactly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass

from ..errors import SchemaError
from ..ner import contains_surface, entity_pr
from . import ngram


@dataclass
class EvalReport:
    """All corpus scores in natural units; render() scales x100."""

    documents: int = 0
    bleu4: float | None = None
    rouge_l: float | None = None
    cider: float | None = None
    meteor: float | None = None
    meteor_source: str | None = None

    entity_precision: float = 0.0
    entity_recall: float = 0.0
    generated_entities: int = 0
    reference_entities: int = 0
    matched_entities: int = 0

    in_context_recall: float | None = None
    out_context_recall: float | None = None
    in_context_matched: int = 0
    in_context_total: int = 0
    out_context_matched: int = 0
    out_context_total: int = 0

    out_of_train_precision: float | None = None
    out_of_train_recall: float | None = None
    out_of_train_reference_entities: int = 0
    out_of_train_matched: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def render(self) -> str:
        def fmt(value: float | None) -> str:
            return f"{value * 100:.2f}" if value is not None else "n/a"

        rows = [
            ("documents", str(self.documents)),
            ("BLEU-4", fmt(self.bleu4)),
            ("METEOR", fmt(self.meteor) + (" (external)" if self.meteor is not None else "")),
            ("ROUGE-L", fmt(self.rouge_l)),
            ("CIDEr", fmt(self.cider)),
            ("entity precision", fmt(self.entity_precision)),
            ("entity recall", fmt(self.entity_recall)),
            ("in-context recall", fmt(self.in_context_recall)),
            ("out-context recall", fmt(self.out_context_recall)),
            ("out-of-train precision", fmt(self.out_of_train_precision)),
            ("out-of-train recall", fmt(self.out_of_train_recall)),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def merge_external_meteor(report: EvalReport, meteor_value: float) -> EvalReport:
    """Attach an externally computed METEOR value (natural units)."""
    if not 0.0 <= meteor_value <= 1.0:
        raise SchemaError(f"meteor value {meteor_value} outside [0, 1]")
    report.meteor = meteor_value
    report.meteor_source = "external"
    return report


def _surface_counts(entities) -> Counter:
    return Counter(e.surface for e in entities)


def entity_report(
    generated_captions: list[str],
    reference_captions: list[str],
    contexts: list[str] | None,
    tagger,
    doc_ids: list[str] | None = None,
    train_index: set[str] | None = None,
) -> EvalReport:
    """Entity-level scores over aligned (generated, reference[, context]) lists."""
    if len(generated_captions) != len(reference_captions):
        raise SchemaError(
            "generated/reference length mismatch: "
            f"{len(generated_captions)} vs {len(reference_captions)}"
        )
    if contexts is not None and len(contexts) != len(generated_captions):
        raise SchemaError("contexts must align with the caption lists")
    if doc_ids is None:
        doc_ids = [str(i) for i in range(len(generated_captions))]

    report = EvalReport(documents=len(generated_captions))
    tp = fp = fn = 0
    in_matched = in_total = out_matched = out_total = 0
    oot_tp = oot_fp = oot_fn = 0

    for i, (gen_text, ref_text) in enumerate(zip(generated_captions, reference_captions)):
        doc_id = doc_ids[i]
        gen = _surface_counts(tagger.tag(gen_text, doc_id=doc_id, field="generated"))
        ref = _surface_counts(tagger.tag(ref_text, doc_id=doc_id, field="caption"))
        matched = {s: min(c, gen.get(s, 0)) for s, c in ref.items()}

        doc_tp = sum(matched.values())
        tp += doc_tp
        fp += sum(gen.values()) - doc_tp
        fn += sum(ref.values()) - doc_tp
        report.generated_entities += sum(gen.values())
        report.reference_entities += sum(ref.values())

        if contexts is not None:
            context = contexts[i]
            for surface, count in ref.items():
                if contains_surface(context, surface):
                    in_total += count
                    in_matched += matched[surface]
                else:
                    out_total += count
                    out_matched += matched[surface]

        if train_index is not None:
            gen_oot = Counter({s: c for s, c in gen.items() if s not in train_index})
            ref_oot = Counter({s: c for s, c in ref.items() if s not in train_index})
            doc_oot_tp = sum(min(c, gen_oot.get(s, 0)) for s, c in ref_oot.items())
            oot_tp += doc_oot_tp
            oot_fp += sum(gen_oot.values()) - doc_oot_tp
            oot_fn += sum(ref_oot.values()) - doc_oot_tp

    report.matched_entities = tp
    report.entity_precision, report.entity_recall = entity_pr(tp, fp, fn)

    if contexts is not None:
        report.in_context_matched = in_matched
        report.in_context_total = in_total
        report.out_context_matched = out_matched
        report.out_context_total = out_total
        report.in_context_recall = in_matched / in_total if in_total else 0.0
        report.out_context_recall = out_matched / out_total if out_total else 0.0

    if train_index is not None:
        precision, recall = entity_pr(oot_tp, oot_fp, oot_fn)
        report.out_of_train_precision = precision
        report.out_of_train_recall = recall
        report.out_of_train_reference_entities = oot_tp + oot_fn
        report.out_of_train_matched = oot_tp

    return report


def full_report(
    generated_captions: list[str],
    reference_captions: list[str],
    contexts: list[str] | None,
    tagger,
    doc_ids: list[str] | None = None,
    train_index: set[str] | None = None,
    meteor: float | None = None,
) -> EvalReport:
    """n-gram scores plus the entity analyses in one report."""
    report = entity_report(
        generated_captions, reference_captions, contexts, tagger, doc_ids, train_index
    )
    report.bleu4 = ngram.bleu4(generated_captions, reference_captions)
    report.rouge_l = ngram.rouge_l(generated_captions, reference_captions)
    report.cider = ngram.cider(generated_captions, reference_captions)
    if meteor is not None:
        merge_external_meteor(report, meteor)
    return report
