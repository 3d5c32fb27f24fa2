#!/usr/bin/env python3
"""Generate the 10-document end-to-end fixture and freeze its golden outputs.

Writes tests/data/fixture_corpus.jsonl and fixture_gazetteer.tsv, then runs
ingest -> generate (mock endpoint) once and freezes the resulting
predictions and supplemented contexts as the golden files the pipeline
tests compare against, byte for byte.

Re-run only when deliberately changing the fixture or the mock rules.
"""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "tests"))

from synth import synth_corpus, write_corpus_jsonl, write_gazetteer  # noqa: E402

from newscap import pipeline  # noqa: E402

DATA = REPO / "tests" / "data"


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    corpus = synth_corpus(10, seed=101, style="generic")
    corpus_jsonl = DATA / "fixture_corpus.jsonl"
    gazetteer = DATA / "fixture_gazetteer.tsv"
    write_corpus_jsonl(corpus, corpus_jsonl)
    write_gazetteer(gazetteer)

    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        pipeline.run_ingest(str(corpus_jsonl), "generic", str(tmp_path / "corpus"))
        pipeline.run_generate(
            corpus_dir=str(tmp_path / "corpus"),
            endpoint="mock",
            out=str(tmp_path / "gen"),
            jobs=1,
            gazetteer=str(gazetteer),
        )
        golden_predictions = (tmp_path / "gen" / "predictions.jsonl").read_bytes()
        golden_contexts = (tmp_path / "gen" / "contexts.jsonl").read_bytes()

    (DATA / "golden_predictions.jsonl").write_bytes(golden_predictions)
    (DATA / "golden_contexts.jsonl").write_bytes(golden_contexts)
    print(f"froze {len(golden_predictions)} bytes of predictions, "
          f"{len(golden_contexts)} bytes of contexts")


if __name__ == "__main__":
    main()
