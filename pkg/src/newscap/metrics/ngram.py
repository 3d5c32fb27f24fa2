"""Corpus n-gram metrics: BLEU-4, ROUGE-L, and CIDEr-D.

All three follow the COCO caption evaluation toolkit's conventions so scores
are interchangeable with numbers produced by it: corpus-level BLEU with
clipped counts, closest-reference brevity penalty, and the toolkit's
zero-division guards; ROUGE-L as the corpus mean of LCS F-scores with
beta = 1.2; CIDEr-D with tf-idf n-gram cosines for n = 1..4, a Gaussian
length penalty (sigma = 6), idf from the reference corpus, and the x10
scaling. Scores are returned in natural units; presentation scaling (x100)
happens at render time only.

Captions are tokenized PTB-style before scoring: lowercase, clitics split,
punctuation separated and dropped.
"""

from __future__ import annotations

import math
import re
from collections import Counter

from ..errors import SchemaError

_BLEU_TINY = 1e-15
_BLEU_SMALL = 1e-9
_ROUGE_BETA = 1.2
_CIDER_SIGMA = 6.0
_MAX_N = 4

# Punctuation tokens removed after tokenization, per the toolkit convention
# (brackets included: PTB rewrites them to -LRB-/-RRB- forms, all dropped;
# unicode dashes/ellipses/quotes normalize to dropped ASCII forms there too).
_DROPPED_TOKENS = frozenset(
    {"''", "'", "``", "`", "-lrb-", "-rrb-", "-lcb-", "-rcb-",
     "(", ")", "[", "]", "{", "}",
     ".", "?", "!", ",", ":", "-", "--", "...", ";",
     "–", "—", "…", "‘", "’", "“", "”"}
)

_CLITIC_NT = re.compile(r"(?<=\w)n't\b")
_CLITIC_APOS = re.compile(r"(?<=\w)'(s|re|ve|ll|d|m)\b")
_TOKEN = re.compile(
    r"\d+(?:[.,]\d+)*(?:[a-z]+)?"      # numbers, incl. 3.5 / 1,000 / 2nd
    r"|'(?:s|re|ve|ll|d|m)\b"          # split-off clitics
    r"|[a-z][a-z0-9]*(?:['’\-.][a-z0-9]+)*"  # words, incl. u.s / entity-aware / v2
    r"|[^\w\s]"
)


def tokenize_caption(text: str) -> list[str]:
    """Lowercase PTB-style tokens with punctuation stripped."""
    text = text.lower()
    text = _CLITIC_NT.sub(" n't", text)
    text = _CLITIC_APOS.sub(r" '\1", text)
    return [t for t in _TOKEN.findall(text) if t not in _DROPPED_TOKENS]


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _check_corpus(candidates: list[str], references: list[str]) -> None:
    if not candidates:
        raise SchemaError("metric corpus must be non-empty")
    if len(candidates) != len(references):
        raise SchemaError(
            f"candidate/reference length mismatch: {len(candidates)} vs {len(references)}"
        )


def _tokenized(captions: list[str]) -> list[list[str]]:
    return [tokenize_caption(c) for c in captions]


# ---------------------------------------------------------------------------
# BLEU-4
# ---------------------------------------------------------------------------

def bleu4(candidates: list[str], references: list[str]) -> float:
    """Corpus BLEU-4, one reference per candidate."""
    return bleu_scores(candidates, references)[3]


def bleu_scores(candidates: list[str], references: list[str]) -> list[float]:
    """Corpus BLEU-1..4 under the toolkit conventions."""
    _check_corpus(candidates, references)
    cand_tokens = _tokenized(candidates)
    ref_tokens = _tokenized(references)

    test_len = 0
    ref_len = 0
    guess = [0] * _MAX_N
    correct = [0] * _MAX_N
    for cand, ref in zip(cand_tokens, ref_tokens):
        test_len += len(cand)
        ref_len += len(ref)  # single reference == closest reference
        for k in range(_MAX_N):
            guess[k] += max(0, len(cand) - k)
            ref_counts = _ngrams(ref, k + 1)
            correct[k] += sum(
                min(count, ref_counts[ngram]) for ngram, count in _ngrams(cand, k + 1).items()
            )

    scores: list[float] = []
    running = 1.0
    for k in range(_MAX_N):
        running *= (correct[k] + _BLEU_TINY) / (guess[k] + _BLEU_SMALL)
        scores.append(running ** (1.0 / (k + 1)))
    ratio = (test_len + _BLEU_TINY) / (ref_len + _BLEU_SMALL)
    if ratio < 1:
        brevity = math.exp(1 - 1 / ratio)
        scores = [s * brevity for s in scores]
    return scores


# ---------------------------------------------------------------------------
# ROUGE-L
# ---------------------------------------------------------------------------

def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        row = [0]
        for j, y in enumerate(b, start=1):
            row.append(prev[j - 1] + 1 if x == y else max(prev[j], row[j - 1]))
        prev = row
    return prev[-1]


def rouge_l_per_document(candidates: list[str], references: list[str]) -> list[float]:
    _check_corpus(candidates, references)
    scores = []
    for cand_text, ref_text in zip(candidates, references):
        cand = tokenize_caption(cand_text)
        ref = tokenize_caption(ref_text)
        if not cand or not ref:
            scores.append(0.0)
            continue
        lcs = _lcs_length(ref, cand)
        precision = lcs / len(cand)
        recall = lcs / len(ref)
        if precision == 0 or recall == 0:
            scores.append(0.0)
        else:
            beta_sq = _ROUGE_BETA**2
            scores.append(((1 + beta_sq) * precision * recall) / (recall + beta_sq * precision))
    return scores


def rouge_l(candidates: list[str], references: list[str]) -> float:
    scores = rouge_l_per_document(candidates, references)
    return sum(scores) / len(scores)


# ---------------------------------------------------------------------------
# CIDEr-D
# ---------------------------------------------------------------------------

def cider_per_document(candidates: list[str], references: list[str]) -> list[float]:
    _check_corpus(candidates, references)
    cand_tokens = _tokenized(candidates)
    ref_tokens = _tokenized(references)

    ref_counts = [
        [_ngrams(ref, n) for n in range(1, _MAX_N + 1)] for ref in ref_tokens
    ]
    # idf: document frequency counts each n-gram once per reference document
    doc_freq: Counter = Counter()
    for per_n in ref_counts:
        seen = set()
        for counts in per_n:
            seen.update(counts)
        doc_freq.update(seen)
    log_corpus = math.log(float(len(candidates)))

    def tfidf(per_n: list[Counter]) -> tuple[list[dict], list[float], int]:
        vecs: list[dict] = []
        norms: list[float] = []
        for counts in per_n:
            vec = {
                ngram: count * (log_corpus - math.log(max(1.0, doc_freq[ngram])))
                for ngram, count in counts.items()
            }
            vecs.append(vec)
            norms.append(math.sqrt(sum(w * w for w in vec.values())))
        # The toolkit measures length by bigram count; deltas are unchanged.
        length = sum(per_n[1].values())
        return vecs, norms, length

    scores = []
    for cand, per_n_ref in zip(cand_tokens, ref_counts):
        per_n_cand = [_ngrams(cand, n) for n in range(1, _MAX_N + 1)]
        cand_vecs, cand_norms, cand_len = tfidf(per_n_cand)
        ref_vecs, ref_norms, ref_len = tfidf(per_n_ref)
        penalty = math.exp(-((cand_len - ref_len) ** 2) / (2 * _CIDER_SIGMA**2))
        total = 0.0
        for k in range(_MAX_N):
            dot = sum(
                min(w, ref_vecs[k].get(ngram, 0.0)) * ref_vecs[k].get(ngram, 0.0)
                for ngram, w in cand_vecs[k].items()
            )
            if cand_norms[k] != 0 and ref_norms[k] != 0:
                dot /= cand_norms[k] * ref_norms[k]
            total += dot * penalty
        scores.append(total / _MAX_N * 10.0)
    return scores


def cider(candidates: list[str], references: list[str]) -> float:
    scores = cider_per_document(candidates, references)
    return sum(scores) / len(scores)
