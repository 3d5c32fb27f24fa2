#!/usr/bin/env python3
"""Generate the 50-pair caption fixture and record its oracle metric values.

The fixture captions are plain lowercase token sequences (no punctuation),
so every sane caption tokenizer maps them to themselves and the recorded
values exercise the scorers, not the tokenizer. Expected values come from
the reference-toolkit ports in tests/reference_scorers.py and are frozen
into tests/data/metric_fixture_expected.json.

Re-run only when deliberately changing the fixture; the frozen numbers are
the contract the package scorers are tested against.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "tests"))

from reference_scorers import reference_bleu, reference_cider, reference_rouge  # noqa: E402

COMMON = (
    "the a an of in on at for with by after before during against over "
    "president minister team player game match city country state official "
    "police court judge company market report plan talks deal vote election "
    "left arrived spoke said won lost met visited announced signed opened"
).split()

RARE = (
    "bronzeville kestrel maritsa oberhausen quetzal sorbonne talloga vireo "
    "wyndham zalesky ferrandino glastonbury hokkaido ilmenau jacaranda "
    "katmandu lisbon montevideo nairobi oporto"
).split()


def _caption(rng: random.Random) -> list[str]:
    length = rng.randint(8, 18)
    words = []
    for _ in range(length):
        bank = RARE if rng.random() < 0.18 else COMMON
        words.append(rng.choice(bank))
    return words


def _perturb(ref: list[str], rng: random.Random) -> list[str]:
    mode = rng.random()
    if mode < 0.12:
        return list(ref)  # exact match
    cand = list(ref)
    edits = rng.randint(1, max(1, len(cand) // 2))
    for _ in range(edits):
        op = rng.random()
        if op < 0.4 and len(cand) > 4:
            del cand[rng.randrange(len(cand))]
        elif op < 0.8:
            cand[rng.randrange(len(cand))] = rng.choice(COMMON + RARE)
        else:
            cand.insert(rng.randrange(len(cand) + 1), rng.choice(COMMON))
    if mode > 0.9:
        rng.shuffle(cand)
    return cand


def main() -> None:
    rng = random.Random(20240501)
    pairs = []
    for i in range(50):
        ref = _caption(rng)
        cand = _perturb(ref, rng)
        pairs.append({"doc_id": f"m{i:03d}", "candidate": " ".join(cand), "reference": " ".join(ref)})

    data_dir = REPO / "tests" / "data"
    data_dir.mkdir(parents=True, exist_ok=True)
    fixture_path = data_dir / "metric_fixture.jsonl"
    with fixture_path.open("w", encoding="utf-8") as fh:
        for row in pairs:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    cands = [p["candidate"] for p in pairs]
    refs = [[p["reference"]] for p in pairs]
    bleus, _ = reference_bleu(cands, refs)
    rouge, _ = reference_rouge(cands, refs)
    cider, _ = reference_cider(cands, refs)

    expected = {
        "pairs": len(pairs),
        "bleu1": bleus[0],
        "bleu2": bleus[1],
        "bleu3": bleus[2],
        "bleu4": bleus[3],
        "rouge_l": rouge,
        "cider": cider,
        "recorded_with": "tests/reference_scorers.py ports of the COCO caption toolkit scorers",
    }
    expected_path = data_dir / "metric_fixture_expected.json"
    expected_path.write_text(json.dumps(expected, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(json.dumps(expected, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
