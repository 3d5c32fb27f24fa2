"""Oracle scorers for the n-gram metric tests.

Line-by-line ports of the corpus BLEU, ROUGE-L, and CIDEr-D scorers from the
reference COCO caption evaluation toolkit (tylin/coco-caption, as packaged in
pycocoevalcap), kept deliberately in the toolkit's procedural style. The
scorers in ``newscap.metrics`` are written independently; these ports exist
only to record expected values for fixtures and to cross-check the package
implementation on arbitrary corpora.

All functions here take already-tokenized captions: strings of tokens joined
by single spaces.
"""

from __future__ import annotations

import math
from collections import defaultdict


# ---------------------------------------------------------------------------
# BLEU (bleu_scorer.py port, option="closest")
# ---------------------------------------------------------------------------

def _bleu_precook(s: str, n: int = 4):
    words = s.split()
    counts = defaultdict(int)
    for k in range(1, n + 1):
        for i in range(len(words) - k + 1):
            ngram = tuple(words[i : i + k])
            counts[ngram] += 1
    return len(words), counts


def _bleu_cook_refs(refs: list[str], n: int = 4):
    reflen = []
    maxcounts: dict = {}
    for ref in refs:
        rl, counts = _bleu_precook(ref, n)
        reflen.append(rl)
        for ngram, count in counts.items():
            maxcounts[ngram] = max(maxcounts.get(ngram, 0), count)
    return reflen, maxcounts


def _bleu_cook_test(test: str, reflen, refmaxcounts, n: int = 4):
    testlen, counts = _bleu_precook(test, n)
    result: dict = {}
    result["testlen"] = testlen
    result["reflen"] = reflen
    result["guess"] = [max(0, testlen - k + 1) for k in range(1, n + 1)]
    result["correct"] = [0] * n
    for ngram, count in counts.items():
        result["correct"][len(ngram) - 1] += min(refmaxcounts.get(ngram, 0), count)
    return result


def _single_reflen(reflens, option, testlen):
    if option == "shortest":
        return min(reflens)
    if option == "average":
        return float(sum(reflens)) / len(reflens)
    if option == "closest":
        return min((abs(l - testlen), l) for l in reflens)[1]
    raise ValueError(f"unsupported reflen option {option}")


def reference_bleu(candidates: list[str], references: list[list[str]], n: int = 4,
                   option: str = "closest"):
    """Corpus BLEU-1..n plus per-sentence scores, toolkit conventions."""
    small = 1e-9
    tiny = 1e-15  # so that if guess is 0 still return 0
    bleu_list: list[list[float]] = [[] for _ in range(n)]

    ctest = []
    for cand, refs in zip(candidates, references):
        reflen, refmaxcounts = _bleu_cook_refs(refs, n)
        ctest.append(_bleu_cook_test(cand, reflen, refmaxcounts, n))

    total_testlen = 0
    total_reflen = 0.0
    totalcomps = {"guess": [0] * n, "correct": [0] * n}

    for comps in ctest:
        testlen = comps["testlen"]
        total_testlen += testlen
        reflen = _single_reflen(comps["reflen"], option, testlen)
        total_reflen += reflen

        for key in ("guess", "correct"):
            for k in range(n):
                totalcomps[key][k] += comps[key][k]

        bleu = 1.0
        for k in range(n):
            bleu *= (float(comps["correct"][k]) + tiny) / (float(comps["guess"][k]) + small)
            bleu_list[k].append(bleu ** (1.0 / (k + 1)))
        ratio = (testlen + tiny) / (reflen + small)
        if ratio < 1:
            for k in range(n):
                bleu_list[k][-1] *= math.exp(1 - 1 / ratio)

    bleus = []
    bleu = 1.0
    for k in range(n):
        bleu *= float(totalcomps["correct"][k] + tiny) / (float(totalcomps["guess"][k]) + small)
        bleus.append(bleu ** (1.0 / (k + 1)))
    ratio = (total_testlen + tiny) / (total_reflen + small)
    if ratio < 1:
        for k in range(n):
            bleus[k] *= math.exp(1 - 1 / ratio)

    return bleus, bleu_list


# ---------------------------------------------------------------------------
# ROUGE-L (rouge.py port, beta = 1.2)
# ---------------------------------------------------------------------------

_ROUGE_BETA = 1.2


def _my_lcs(string: list[str], sub: list[str]) -> int:
    if len(string) < len(sub):
        sub, string = string, sub
    lengths = [[0 for _ in range(len(sub) + 1)] for _ in range(len(string) + 1)]
    for j in range(1, len(sub) + 1):
        for i in range(1, len(string) + 1):
            if string[i - 1] == sub[j - 1]:
                lengths[i][j] = lengths[i - 1][j - 1] + 1
            else:
                lengths[i][j] = max(lengths[i - 1][j], lengths[i][j - 1])
    return lengths[len(string)][len(sub)]


def _rouge_calc_score(candidate: str, refs: list[str]) -> float:
    prec = []
    rec = []
    token_c = candidate.split(" ")
    for reference in refs:
        token_r = reference.split(" ")
        lcs = _my_lcs(token_r, token_c)
        prec.append(lcs / float(len(token_c)))
        rec.append(lcs / float(len(token_r)))
    prec_max = max(prec)
    rec_max = max(rec)
    if prec_max != 0 and rec_max != 0:
        return ((1 + _ROUGE_BETA**2) * prec_max * rec_max) / float(
            rec_max + _ROUGE_BETA**2 * prec_max
        )
    return 0.0


def reference_rouge(candidates: list[str], references: list[list[str]]):
    scores = [_rouge_calc_score(cand, refs) for cand, refs in zip(candidates, references)]
    return sum(scores) / len(scores), scores


# ---------------------------------------------------------------------------
# CIDEr-D (cider_scorer.py port, n = 4, sigma = 6.0)
# ---------------------------------------------------------------------------

def _cider_precook(s: str, n: int = 4):
    words = s.split()
    counts = defaultdict(int)
    for k in range(1, n + 1):
        for i in range(len(words) - k + 1):
            ngram = tuple(words[i : i + k])
            counts[ngram] += 1
    return counts


def reference_cider(candidates: list[str], references: list[list[str]], n: int = 4,
                    sigma: float = 6.0):
    crefs = [[_cider_precook(ref, n) for ref in refs] for refs in references]
    ctest = [_cider_precook(cand, n) for cand in candidates]

    document_frequency: dict = defaultdict(float)
    for refs in crefs:
        for ngram in set(ngram for ref in refs for ngram in ref):
            document_frequency[ngram] += 1

    ref_len = math.log(float(len(crefs)))

    def counts2vec(cnts):
        vec = [defaultdict(float) for _ in range(n)]
        length = 0
        norm = [0.0 for _ in range(n)]
        for ngram, term_freq in cnts.items():
            df = math.log(max(1.0, document_frequency[ngram]))
            k = len(ngram) - 1
            vec[k][ngram] = float(term_freq) * (ref_len - df)
            norm[k] += pow(vec[k][ngram], 2)
            if k == 1:
                length += term_freq
        norm = [math.sqrt(x) for x in norm]
        return vec, norm, length

    def sim(vec_hyp, vec_ref, norm_hyp, norm_ref, length_hyp, length_ref):
        delta = float(length_hyp - length_ref)
        val = [0.0 for _ in range(n)]
        for k in range(n):
            for ngram, _count in vec_hyp[k].items():
                # CIDEr-D: clip hypothesis counts at the reference counts
                val[k] += min(vec_hyp[k][ngram], vec_ref[k][ngram]) * vec_ref[k][ngram]
            if norm_hyp[k] != 0 and norm_ref[k] != 0:
                val[k] /= norm_hyp[k] * norm_ref[k]
            val[k] *= math.exp(-(delta**2) / (2 * sigma**2))
        return val

    scores = []
    for test, refs in zip(ctest, crefs):
        vec, norm, length = counts2vec(test)
        score = [0.0 for _ in range(n)]
        for ref in refs:
            vec_ref, norm_ref, length_ref = counts2vec(ref)
            for k, v in enumerate(sim(vec, vec_ref, norm, norm_ref, length, length_ref)):
                score[k] += v
        score_avg = sum(score) / n
        score_avg /= len(refs)
        score_avg *= 10.0
        scores.append(score_avg)

    return sum(scores) / len(scores), scores
