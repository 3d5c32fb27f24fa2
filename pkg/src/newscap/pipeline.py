"""End-to-end pipeline operations behind the service and the CLI.

Each ``run_*`` function validates its inputs, writes its artifacts under an
output directory, and returns a machine-readable summary that includes the
resolved configuration. Artifacts carry no timestamps and are written with
sorted keys, so identical inputs (plus seed) produce byte-identical outputs.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from . import context as ctx
from .alignment import (
    AlignmentSample,
    assemble_minigroups,
    build_caption_sample,
    build_entity_selection,
    build_sentence_selection,
)
from .corpus import Document, ingest_jsonl, load_corpus_dir, write_corpus_dir
from .errors import InputFileError, SchemaError
from .gateway import DEFAULT_TIMEOUT, GenerationConfig, TraceWriter, make_endpoint_factory, run_batch
from .loss import TaskWeights, audit_losses, read_logprob_file
from .metrics import full_report
from .mock_model import MockModel
from .ner import (
    VisualEntityPolicy,
    load_annotations,
    load_gazetteer,
    load_policy,
)

OFFLINE_REGIMES = ("origin", "full", "origin_longer", "oracle_sent", "oracle_ent", "oracle_sent_ent")


def _write_jsonl(path: Path, rows: list[dict]) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def _out_dir(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_tagger(gazetteer: str | None, annotations: str | None):
    if gazetteer and annotations:
        raise SchemaError("choose either a gazetteer or an annotation file, not both")
    if gazetteer:
        return load_gazetteer(gazetteer)
    if annotations:
        return load_annotations(annotations)
    raise SchemaError("an entity tagger is required: pass a gazetteer or annotations")


def _read_jsonl(path: str | Path, what: str) -> list[dict]:
    path = Path(path)
    if not path.is_file():
        raise InputFileError(f"{what} file not found: {path}")
    rows = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise SchemaError(f"malformed {what} record at line {line_no}: {exc.msg}") from None
    return rows


def _context_record(c: ctx.SupplementedContext) -> dict:
    return {
        "doc_id": c.doc_id,
        "regime": c.regime,
        "sentence_indices": list(c.base_sentence_indices),
        "entity_hints": list(c.entity_hints),
        "final_text": c.final_text,
        "sentence_word_count": c.sentence_word_count,
        "total_word_count": c.total_word_count,
    }


def _sample_record(sample: AlignmentSample) -> dict:
    return {
        "sample_id": sample.sample_id,
        "task": sample.task,
        "doc_id": sample.doc_id,
        "image_ref": sample.image_ref,
        "input_context": sample.input_context,
        "target": sample.target,
        "metadata": sample.metadata,
    }


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------

def run_ingest(input_path: str, style: str, out: str) -> dict:
    corpus = ingest_jsonl(input_path, style)
    manifest = write_corpus_dir(corpus, _out_dir(out))
    summary = {
        "command": "ingest",
        "config": {"input": str(input_path), "style": style, "out": str(out)},
        "manifest": manifest,
    }
    _write_json(_out_dir(out) / "summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# build-alignment
# ---------------------------------------------------------------------------

def run_build_alignment(
    corpus_dir: str,
    out: str,
    gazetteer: str | None = None,
    annotations: str | None = None,
    policy_path: str | None = None,
    neg_per_group: int | None = None,
    seed: int = 0,
    origin_budget: int = ctx.DEFAULT_ORIGIN_BUDGET,
) -> dict:
    corpus = load_corpus_dir(corpus_dir)
    tagger = _load_tagger(gazetteer, annotations)
    policy = load_policy(policy_path) if policy_path else VisualEntityPolicy()

    cap_samples = []
    sent_sets = []
    ent_samples = []
    for doc in corpus:
        caption_entities = tagger.tag(doc.caption, doc_id=doc.doc_id, field="caption")
        article_entities = tagger.tag(doc.article_text, doc_id=doc.doc_id, field="article")
        sent_set = build_sentence_selection(
            doc, caption_entities, policy, neg_per_group=neg_per_group, rng_seed=seed
        )
        if sent_set:
            sent_sets.append(sent_set)
        ent_samples.append(build_entity_selection(doc, caption_entities, article_entities))
        origin = ctx.origin_context(doc, corpus.style, origin_budget)
        cap_samples.append(build_caption_sample(doc, origin.final_text))

    groups, leftovers = assemble_minigroups(cap_samples, sent_sets, ent_samples, rng_seed=seed)

    out_path = _out_dir(out)
    _write_jsonl(out_path / "samples_sent.jsonl", [_sample_record(s) for ss in sent_sets for s in ss])
    _write_jsonl(out_path / "samples_ent.jsonl", [_sample_record(s) for s in ent_samples])
    _write_jsonl(out_path / "samples_cap.jsonl", [_sample_record(s) for s in cap_samples])
    _write_jsonl(
        out_path / "minigroups.jsonl",
        [
            {
                "index": g.index,
                "cap": [s.sample_id for s in g.cap_samples],
                "sent": [s.sample_id for s in g.sent_set],
                "ent": g.ent_sample.sample_id,
            }
            for g in groups
        ],
    )
    summary = {
        "command": "build-alignment",
        "config": {
            "corpus_dir": str(corpus_dir),
            "gazetteer": gazetteer,
            "annotations": annotations,
            "policy": policy_path,
            "neg_per_group": neg_per_group,
            "seed": seed,
            "origin_budget": origin_budget,
            "out": str(out),
        },
        "documents": len(corpus),
        "samples": {
            "SENT": sum(len(ss) for ss in sent_sets),
            "SENT_sets": len(sent_sets),
            "ENT": len(ent_samples),
            "CAP": len(cap_samples),
        },
        "minigroups": len(groups),
        "leftovers": leftovers,
    }
    _write_json(out_path / "summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# build-context
# ---------------------------------------------------------------------------

def _offline_context(
    doc: Document,
    regime: str,
    style: str,
    budget: int,
    cap: int,
    entity_prompt: str,
    tagger,
    supplemented_words: dict[str, int] | None,
) -> ctx.SupplementedContext:
    if regime == "origin":
        return ctx.origin_context(doc, style, budget)
    if regime == "full":
        return ctx.full_context(doc)
    if regime == "origin_longer":
        assert supplemented_words is not None
        if doc.doc_id not in supplemented_words:
            raise SchemaError(f"supplemented dump has no record for doc_id {doc.doc_id!r}")
        longer = max(budget, supplemented_words[doc.doc_id])
        return ctx.origin_longer_context(doc, style, longer)
    caption_entities = tagger.tag(doc.caption, doc_id=doc.doc_id, field="caption")
    if regime == "oracle_sent":
        return ctx.oracle_sent_context(doc, caption_entities)
    article_entities = tagger.tag(doc.article_text, doc_id=doc.doc_id, field="article")
    origin = ctx.origin_context(doc, style, budget)
    if regime == "oracle_ent":
        return ctx.oracle_ent_context(doc, caption_entities, article_entities, origin, entity_prompt)
    return ctx.oracle_sent_ent_context(
        doc, caption_entities, article_entities, origin, cap, entity_prompt
    )


def run_build_context(
    corpus_dir: str,
    regime: str,
    out: str,
    style: str | None = None,
    budget: int = ctx.DEFAULT_ORIGIN_BUDGET,
    cap: int = ctx.DEFAULT_SENTENCE_CAP,
    entity_prompt: str = ctx.DEFAULT_ENTITY_PROMPT,
    gazetteer: str | None = None,
    annotations: str | None = None,
    supplemented: str | None = None,
) -> dict:
    if regime not in OFFLINE_REGIMES:
        raise SchemaError(
            f"regime {regime!r} is not built offline (expected one of {OFFLINE_REGIMES})"
        )
    corpus = load_corpus_dir(corpus_dir)
    style = style or corpus.style

    tagger = None
    if regime.startswith("oracle"):
        tagger = _load_tagger(gazetteer, annotations)

    supplemented_words = None
    if regime == "origin_longer":
        if not supplemented:
            raise SchemaError("origin_longer needs the supplemented context dump (--supplemented)")
        supplemented_words = {
            row["doc_id"]: int(row["total_word_count"])
            for row in _read_jsonl(supplemented, "context")
        }

    records = []
    for doc in corpus:
        built = _offline_context(
            doc, regime, style, budget, cap, entity_prompt, tagger, supplemented_words
        )
        records.append(_context_record(built))

    out_path = _out_dir(out)
    _write_jsonl(out_path / "contexts.jsonl", records)
    total_article_words = sum(doc.total_words for doc in corpus)
    total_context_words = sum(r["sentence_word_count"] for r in records)
    summary = {
        "command": "build-context",
        "config": {
            "corpus_dir": str(corpus_dir),
            "regime": regime,
            "style": style,
            "budget": budget,
            "cap": cap,
            "entity_prompt": entity_prompt,
            "gazetteer": gazetteer,
            "annotations": annotations,
            "supplemented": supplemented,
            "out": str(out),
        },
        "documents": len(corpus),
        "context_words": total_context_words,
        "article_words": total_article_words,
        "context_fraction": (
            total_context_words / total_article_words if total_article_words else 0.0
        ),
    }
    _write_json(out_path / "summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def run_generate(
    corpus_dir: str,
    endpoint: str,
    out: str,
    style: str | None = None,
    budget: int = ctx.DEFAULT_ORIGIN_BUDGET,
    cap: int = ctx.DEFAULT_SENTENCE_CAP,
    entity_prompt: str = ctx.DEFAULT_ENTITY_PROMPT,
    ent_context: str = "origin",
    jobs: int | None = None,
    timeout: float = DEFAULT_TIMEOUT,
    gazetteer: str | None = None,
    seed: int = 0,
) -> dict:
    corpus = load_corpus_dir(corpus_dir)
    style = style or corpus.style
    if jobs is None:
        jobs = os.cpu_count() or 1
    config = GenerationConfig(
        style=style,
        origin_budget=budget,
        sentence_cap=cap,
        entity_prompt=entity_prompt,
        ent_context=ent_context,
    )

    def mock_builder():
        if not gazetteer:
            raise SchemaError("mock endpoint needs --gazetteer for its entity rules")
        tagger = load_gazetteer(gazetteer)
        model = MockModel(tagger, {doc.image_ref: doc.caption for doc in corpus})
        return model.handle

    factory = make_endpoint_factory(endpoint, timeout=timeout, mock_builder=mock_builder)
    out_path = _out_dir(out)
    trace = TraceWriter(out_path / "trace.jsonl")
    results, failures = run_batch(corpus, factory, config, trace, jobs=jobs)

    _write_jsonl(
        out_path / "predictions.jsonl",
        [{"doc_id": r.doc_id, "caption": r.caption} for r in results],
    )
    _write_jsonl(out_path / "contexts.jsonl", [_context_record(r.context) for r in results])
    if failures:
        _write_jsonl(
            out_path / "failures.jsonl",
            [{"doc_id": f.doc_id, "error": f.error} for f in failures],
        )
    summary = {
        "command": "generate",
        "config": {
            "corpus_dir": str(corpus_dir),
            "endpoint": endpoint,
            "style": style,
            "budget": budget,
            "cap": cap,
            "entity_prompt": entity_prompt,
            "ent_context": ent_context,
            "jobs": jobs,
            "timeout": timeout,
            "gazetteer": gazetteer,
            "seed": seed,
            "out": str(out),
        },
        "documents": len(corpus),
        "generated": len(results),
        "failed": len(failures),
        "requests": sum(r.requests for r in results),
    }
    _write_json(out_path / "summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def run_evaluate(
    predictions: str,
    corpus_dir: str,
    out: str,
    contexts: str | None = None,
    gazetteer: str | None = None,
    annotations: str | None = None,
    train_index: str | None = None,
    meteor: float | None = None,
) -> dict:
    corpus = load_corpus_dir(corpus_dir)
    tagger = _load_tagger(gazetteer, annotations)

    rows = _read_jsonl(predictions, "predictions")
    doc_ids = []
    generated = []
    references = []
    for row in rows:
        for name in ("doc_id", "caption"):
            if name not in row:
                raise SchemaError(f"prediction record missing field {name}")
        doc_ids.append(row["doc_id"])
        generated.append(str(row["caption"]))
        references.append(corpus[row["doc_id"]].caption)

    context_texts = None
    if contexts:
        by_id = {r["doc_id"]: r["final_text"] for r in _read_jsonl(contexts, "context")}
        missing = [d for d in doc_ids if d not in by_id]
        if missing:
            raise SchemaError(f"context dump is missing doc_ids: {missing[:5]}")
        context_texts = [by_id[d] for d in doc_ids]

    index = None
    if train_index:
        index_path = Path(train_index)
        if not index_path.is_file():
            raise InputFileError(f"train index not found: {index_path}")
        index = {
            line.strip()
            for line in index_path.read_text("utf-8").splitlines()
            if line.strip()
        }

    report = full_report(
        generated, references, context_texts, tagger,
        doc_ids=doc_ids, train_index=index, meteor=meteor,
    )
    out_path = _out_dir(out)
    _write_json(out_path / "report.json", report.to_dict())
    (out_path / "report.txt").write_text(report.render() + "\n", encoding="utf-8")
    summary = {
        "command": "evaluate",
        "config": {
            "predictions": str(predictions),
            "corpus_dir": str(corpus_dir),
            "contexts": contexts,
            "gazetteer": gazetteer,
            "annotations": annotations,
            "train_index": train_index,
            "meteor": meteor,
            "out": str(out),
        },
        "report": report.to_dict(),
    }
    _write_json(out_path / "summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# loss-audit
# ---------------------------------------------------------------------------

def run_loss_audit(
    logprobs: str,
    out: str,
    weights_preset: str | None = None,
    weights: tuple[float, float, float] | None = None,
) -> dict:
    if weights_preset and weights:
        raise SchemaError("pass a weight preset or explicit weights, not both")
    if weights_preset:
        task_weights = TaskWeights.preset(weights_preset)
    elif weights:
        task_weights = TaskWeights(*weights)
    else:
        raise SchemaError("loss audit needs --weights-preset or --weights")
    by_task = read_logprob_file(logprobs)
    losses = audit_losses(by_task, task_weights)
    out_path = _out_dir(out)
    summary = {
        "command": "loss-audit",
        "config": {
            "logprobs": str(logprobs),
            "weights": {
                "w_sent": task_weights.w_sent,
                "w_ent": task_weights.w_ent,
                "w_cap": task_weights.w_cap,
            },
            "out": str(out),
        },
        "samples": {task: len(samples) for task, samples in sorted(by_task.items())},
        "losses": losses,
    }
    _write_json(out_path / "losses.json", losses)
    _write_json(out_path / "summary.json", summary)
    return summary
