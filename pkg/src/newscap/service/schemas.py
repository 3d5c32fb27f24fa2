"""Pydantic request/response models for the pipeline service."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..context import DEFAULT_ENTITY_PROMPT, DEFAULT_ORIGIN_BUDGET, DEFAULT_SENTENCE_CAP
from ..gateway import DEFAULT_TIMEOUT


class IngestRequest(BaseModel):
    input: str = Field(description="JSONL corpus file, one record per line")
    style: str = "generic"
    out: str


class BuildAlignmentRequest(BaseModel):
    corpus_dir: str
    out: str
    gazetteer: str | None = None
    annotations: str | None = None
    policy: str | None = None
    neg_per_group: int | None = None
    seed: int = 0
    origin_budget: int = DEFAULT_ORIGIN_BUDGET


class BuildContextRequest(BaseModel):
    corpus_dir: str
    regime: str
    out: str
    style: str | None = None
    budget: int = DEFAULT_ORIGIN_BUDGET
    cap: int = DEFAULT_SENTENCE_CAP
    entity_prompt: str = DEFAULT_ENTITY_PROMPT
    gazetteer: str | None = None
    annotations: str | None = None
    supplemented: str | None = None


class GenerateRequest(BaseModel):
    corpus_dir: str
    endpoint: str
    out: str
    style: str | None = None
    budget: int = DEFAULT_ORIGIN_BUDGET
    cap: int = DEFAULT_SENTENCE_CAP
    entity_prompt: str = DEFAULT_ENTITY_PROMPT
    ent_context: str = "origin"
    jobs: int | None = None  # default: available parallelism
    timeout: float = DEFAULT_TIMEOUT
    gazetteer: str | None = None
    seed: int = 0  # recorded for auditability; generation itself is deterministic


class EvaluateRequest(BaseModel):
    predictions: str
    corpus_dir: str
    out: str
    contexts: str | None = None
    gazetteer: str | None = None
    annotations: str | None = None
    train_index: str | None = None
    meteor: float | None = None


class LossAuditRequest(BaseModel):
    logprobs: str
    out: str
    weights_preset: str | None = None
    weights: tuple[float, float, float] | None = None


class SummaryResponse(BaseModel):
    summary: dict


class HealthResponse(BaseModel):
    status: str
    version: str
