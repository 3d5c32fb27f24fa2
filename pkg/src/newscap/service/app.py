"""FastAPI application exposing the pipeline operations.

Every endpoint wraps one pipeline function: the request model carries the
resolved configuration, the response carries the written summary. Expected
failures map to HTTP 400 with a stable error code so thin clients can
translate them back into exceptions and exit codes.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, pipeline
from ..errors import ToolkitError
from .schemas import (
    BuildAlignmentRequest,
    BuildContextRequest,
    EvaluateRequest,
    GenerateRequest,
    HealthResponse,
    IngestRequest,
    LossAuditRequest,
    SummaryResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="newscap", version=__version__)

    @app.exception_handler(ToolkitError)
    async def toolkit_error_handler(_request: Request, exc: ToolkitError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"detail": {"code": exc.code, "message": str(exc)}},
        )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/ingest", response_model=SummaryResponse)
    def ingest(req: IngestRequest) -> SummaryResponse:
        return SummaryResponse(summary=pipeline.run_ingest(req.input, req.style, req.out))

    @app.post("/alignment/build", response_model=SummaryResponse)
    def build_alignment(req: BuildAlignmentRequest) -> SummaryResponse:
        return SummaryResponse(
            summary=pipeline.run_build_alignment(
                corpus_dir=req.corpus_dir,
                out=req.out,
                gazetteer=req.gazetteer,
                annotations=req.annotations,
                policy_path=req.policy,
                neg_per_group=req.neg_per_group,
                seed=req.seed,
                origin_budget=req.origin_budget,
            )
        )

    @app.post("/context/build", response_model=SummaryResponse)
    def build_context(req: BuildContextRequest) -> SummaryResponse:
        return SummaryResponse(
            summary=pipeline.run_build_context(
                corpus_dir=req.corpus_dir,
                regime=req.regime,
                out=req.out,
                style=req.style,
                budget=req.budget,
                cap=req.cap,
                entity_prompt=req.entity_prompt,
                gazetteer=req.gazetteer,
                annotations=req.annotations,
                supplemented=req.supplemented,
            )
        )

    @app.post("/generate", response_model=SummaryResponse)
    def generate(req: GenerateRequest) -> SummaryResponse:
        return SummaryResponse(
            summary=pipeline.run_generate(
                corpus_dir=req.corpus_dir,
                endpoint=req.endpoint,
                out=req.out,
                style=req.style,
                budget=req.budget,
                cap=req.cap,
                entity_prompt=req.entity_prompt,
                ent_context=req.ent_context,
                jobs=req.jobs,
                timeout=req.timeout,
                gazetteer=req.gazetteer,
                seed=req.seed,
            )
        )

    @app.post("/evaluate", response_model=SummaryResponse)
    def evaluate(req: EvaluateRequest) -> SummaryResponse:
        return SummaryResponse(
            summary=pipeline.run_evaluate(
                predictions=req.predictions,
                corpus_dir=req.corpus_dir,
                out=req.out,
                contexts=req.contexts,
                gazetteer=req.gazetteer,
                annotations=req.annotations,
                train_index=req.train_index,
                meteor=req.meteor,
            )
        )

    @app.post("/loss-audit", response_model=SummaryResponse)
    def loss_audit(req: LossAuditRequest) -> SummaryResponse:
        return SummaryResponse(
            summary=pipeline.run_loss_audit(
                logprobs=req.logprobs,
                out=req.out,
                weights_preset=req.weights_preset,
                weights=req.weights,
            )
        )

    return app
