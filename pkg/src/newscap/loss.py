"""Language-modeling loss arithmetic and the weighted multi-task total.

Operates on per-token conditional log-probabilities supplied by an external
trainer; nothing here touches a neural network. The per-sample loss is the
negative mean token log-probability, dataset losses are plain means over
samples, and the multi-task total is a weighted sum with per-dataset weight
presets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import InputFileError, SchemaError

# Validation-tuned task weight presets (sent, ent, cap).
WEIGHT_PRESETS: dict[str, tuple[float, float, float]] = {
    "goodnews": (0.5, 0.25, 1.0),
    "nytimes": (0.25, 0.75, 1.0),
}


@dataclass(frozen=True)
class TokenLogProbs:
    """Natural-log conditional probabilities for one target sequence."""

    logprobs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.logprobs) < 1:
            raise SchemaError("token log-prob list must be non-empty")
        if any(lp > 0 for lp in self.logprobs):
            raise SchemaError("log-probabilities must be <= 0")

    @property
    def n(self) -> int:
        return len(self.logprobs)


@dataclass(frozen=True)
class TaskWeights:
    w_sent: float
    w_ent: float
    w_cap: float

    def __post_init__(self) -> None:
        if min(self.w_sent, self.w_ent, self.w_cap) < 0:
            raise SchemaError("task weights must be non-negative")
        if self.w_cap <= 0:
            raise SchemaError("caption weight must be positive")

    @classmethod
    def preset(cls, name: str) -> "TaskWeights":
        try:
            w_sent, w_ent, w_cap = WEIGHT_PRESETS[name]
        except KeyError:
            raise SchemaError(
                f"unknown weight preset {name!r} (expected one of {sorted(WEIGHT_PRESETS)})"
            ) from None
        return cls(w_sent=w_sent, w_ent=w_ent, w_cap=w_cap)


def lm_loss(tlp: TokenLogProbs) -> float:
    """Negative mean token log-probability; 0.0 for certain predictions."""
    return -sum(tlp.logprobs) / tlp.n


def dataset_loss(samples: list[TokenLogProbs]) -> float:
    """Per-sample mean first, then mean over the batch."""
    if not samples:
        raise SchemaError("dataset loss needs at least one sample")
    return sum(lm_loss(s) for s in samples) / len(samples)


def weighted_total(l_sent: float, l_ent: float, l_cap: float, weights: TaskWeights) -> float:
    if min(l_sent, l_ent, l_cap) < 0:
        raise SchemaError("task losses must be non-negative")
    return weights.w_sent * l_sent + weights.w_ent * l_ent + weights.w_cap * l_cap


def read_logprob_file(path: str | Path) -> dict[str, list[TokenLogProbs]]:
    """Read an audit file of one record per line: sample_id, task, logprobs."""
    path = Path(path)
    if not path.is_file():
        raise InputFileError(f"log-prob file not found: {path}")
    by_task: dict[str, list[TokenLogProbs]] = {}
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"malformed record at line {line_no}: {exc.msg}") from None
            for name in ("sample_id", "task", "logprobs"):
                if name not in raw:
                    raise SchemaError(f"missing field {name} at line {line_no}")
            task = raw["task"]
            if task not in ("SENT", "ENT", "CAP"):
                raise SchemaError(f"unknown task {task!r} at line {line_no}")
            try:
                tlp = TokenLogProbs(tuple(float(x) for x in raw["logprobs"]))
            except SchemaError as exc:
                raise SchemaError(f"{exc} (line {line_no})") from None
            by_task.setdefault(task, []).append(tlp)
    return by_task


def audit_losses(
    by_task: dict[str, list[TokenLogProbs]], weights: TaskWeights
) -> dict[str, float]:
    """Per-task dataset losses plus the weighted total; absent tasks count 0."""
    losses = {
        task: (dataset_loss(samples) if samples else 0.0)
        for task, samples in ((t, by_task.get(t, [])) for t in ("SENT", "ENT", "CAP"))
    }
    total = weighted_total(losses["SENT"], losses["ENT"], losses["CAP"], weights)
    return {
        "loss_sent": losses["SENT"],
        "loss_ent": losses["ENT"],
        "loss_cap": losses["CAP"],
        "weighted_total": total,
    }
