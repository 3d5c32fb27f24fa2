"""Command-line front end: a thin client over the pipeline service.

Each subcommand assembles a request from flags (plus an optional flat
key=value config file; flags win) and posts it to the service. Without
``--server`` the service runs in-process, so the CLI works standalone;
``newscap serve`` starts the same app under uvicorn for remote clients.

Exit codes: 0 success, 2 usage, 3 missing input, 4 schema violation,
5 protocol error, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys

from .client import ServiceClient
from .config import coerce, load_config_file
from .errors import ToolkitError


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file; flags override")
    parser.add_argument("--server", help="base URL of a running service (default: in-process)")
    parser.add_argument("--out", help="output directory for artifacts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newscap",
        description="Entity-aware news captioning toolkit (data, contexts, generation, evaluation).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and segment a JSONL corpus")
    _add_common(p)
    p.add_argument("--input", help="corpus JSONL file")
    p.add_argument("--style", choices=["goodnews", "nytimes", "generic"])

    p = sub.add_parser("build-alignment", help="construct SENT/ENT/CAP samples and mini-groups")
    _add_common(p)
    p.add_argument("--corpus-dir")
    p.add_argument("--gazetteer")
    p.add_argument("--annotations")
    p.add_argument("--policy")
    p.add_argument("--neg-per-group", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--origin-budget", type=int)

    p = sub.add_parser("build-context", help="build a textual-input context dump")
    _add_common(p)
    p.add_argument("--corpus-dir")
    p.add_argument("--regime")
    p.add_argument("--style", choices=["goodnews", "nytimes", "generic"])
    p.add_argument("--budget", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--entity-prompt")
    p.add_argument("--gazetteer")
    p.add_argument("--annotations")
    p.add_argument("--supplemented", help="context dump used to size origin_longer")

    p = sub.add_parser("generate", help="run two-stage generation against a model endpoint")
    _add_common(p)
    p.add_argument("--corpus-dir")
    p.add_argument("--endpoint", help="mock | subprocess:<cmd> | tcp:<host>:<port> | replay:<trace>")
    p.add_argument("--style", choices=["goodnews", "nytimes", "generic"])
    p.add_argument("--budget", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--entity-prompt")
    p.add_argument("--ent-context", choices=["origin", "origin_plus_selected"])
    p.add_argument("--jobs", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--gazetteer", help="entity rules for the mock endpoint")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("evaluate", help="score predictions against corpus references")
    _add_common(p)
    p.add_argument("--predictions")
    p.add_argument("--corpus-dir")
    p.add_argument("--contexts")
    p.add_argument("--gazetteer")
    p.add_argument("--annotations")
    p.add_argument("--train-index")
    p.add_argument("--meteor", type=float, help="externally computed METEOR in [0, 1]")

    p = sub.add_parser("loss-audit", help="recompute losses from a token log-prob dump")
    _add_common(p)
    p.add_argument("--logprobs")
    p.add_argument("--weights-preset", choices=["goodnews", "nytimes"])
    p.add_argument("--weights", help="w_sent,w_ent,w_cap")

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)

    return parser


_PAYLOAD_KEYS = {
    "ingest": ["input", "style", "out"],
    "build-alignment": [
        "corpus_dir", "out", "gazetteer", "annotations", "policy",
        "neg_per_group", "seed", "origin_budget",
    ],
    "build-context": [
        "corpus_dir", "regime", "out", "style", "budget", "cap",
        "entity_prompt", "gazetteer", "annotations", "supplemented",
    ],
    "generate": [
        "corpus_dir", "endpoint", "out", "style", "budget", "cap",
        "entity_prompt", "ent_context", "jobs", "timeout", "gazetteer", "seed",
    ],
    "evaluate": [
        "predictions", "corpus_dir", "out", "contexts", "gazetteer",
        "annotations", "train_index", "meteor",
    ],
    "loss-audit": ["logprobs", "out", "weights_preset", "weights"],
}

_REQUIRED = {
    "ingest": ["input", "out"],
    "build-alignment": ["corpus_dir", "out"],
    "build-context": ["corpus_dir", "regime", "out"],
    "generate": ["corpus_dir", "endpoint", "out"],
    "evaluate": ["predictions", "corpus_dir", "out"],
    "loss-audit": ["logprobs", "out"],
}

_CLIENT_METHOD = {
    "ingest": "ingest",
    "build-alignment": "build_alignment",
    "build-context": "build_context",
    "generate": "generate",
    "evaluate": "evaluate",
    "loss-audit": "loss_audit",
}


def _resolve_payload(command: str, args: argparse.Namespace) -> dict:
    file_values = load_config_file(args.config) if args.config else {}
    payload: dict = {}
    for key in _PAYLOAD_KEYS[command]:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            payload[key] = flag_value
        elif key in file_values:
            payload[key] = coerce(key, file_values[key])
    if "weights" in payload and isinstance(payload["weights"], str):
        payload["weights"] = coerce("weights", payload["weights"])
    missing = [key for key in _REQUIRED[command] if key not in payload]
    if missing:
        flags = ", ".join("--" + key.replace("_", "-") for key in missing)
        raise ToolkitError(f"missing required option(s): {flags}")
    return payload


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    try:
        payload = _resolve_payload(args.command, args)
        with ServiceClient(base_url=args.server) as client:
            summary = getattr(client, _CLIENT_METHOD[args.command])(**payload)
    except ToolkitError as exc:
        print(json.dumps({"error": {"code": exc.code, "message": str(exc)}}), file=sys.stderr)
        return exc.exit_code
    print(json.dumps(summary, ensure_ascii=False, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
