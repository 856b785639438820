"""Completion quality metrics: BLEU-4, exact-match METEOR, CIDEr.

All three work on pre-tokenized, lowercased segments.  The corpus BLEU
score is computed from pooled n-gram counts without smoothing; add-one
smoothing exists only for the per-segment detail numbers.  METEOR is
the exact-match variant (no stemming, no synonyms): F-mean
10PR/(R+9P), fragmentation penalty 0.5*(chunks/matches)^3.  CIDEr is
the plain tf-idf cosine form with idf log(|S|/(1+df)) taken from the
reference corpus, averaged over n-gram orders 1..4 and scaled by 10.
SPICE is not implemented.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Sequence

from .corpus import tokenize

MAX_ORDER = 4

_BEAM_WIDTH = 64


class CountMismatch(ValueError):
    """Candidate and reference files disagree on segment count."""


class SingleSegmentCorpus(ValueError):
    """CIDEr idf is degenerate without at least two segments."""


@dataclass(frozen=True)
class EvalSegment:
    candidate: tuple[str, ...]
    references: tuple[tuple[str, ...], ...]


def normalize(text: str) -> tuple[str, ...]:
    return tuple(tokenize(text.lower()))


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(
        tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)
    )


# ---------------------------------------------------------------- BLEU


@dataclass(frozen=True)
class BleuResult:
    score: float
    precisions: tuple[float, ...]
    brevity_penalty: float
    candidate_length: int
    reference_length: int


def _closest_reference_length(candidate_length: int, references) -> int:
    return min(
        (len(r) for r in references),
        key=lambda n: (abs(n - candidate_length), n),
    )


def corpus_bleu(segments: Sequence[EvalSegment], max_order: int = MAX_ORDER) -> BleuResult:
    """Pooled modified n-gram precision BLEU, no smoothing."""
    matches = [0] * max_order
    totals = [0] * max_order
    candidate_length = 0
    reference_length = 0
    for segment in segments:
        candidate = segment.candidate
        candidate_length += len(candidate)
        reference_length += _closest_reference_length(
            len(candidate), segment.references
        )
        for n in range(1, max_order + 1):
            counts = _ngram_counts(candidate, n)
            if not counts:
                continue
            ceiling: Counter = Counter()
            for reference in segment.references:
                for gram, count in _ngram_counts(reference, n).items():
                    if count > ceiling[gram]:
                        ceiling[gram] = count
            matches[n - 1] += sum(
                min(count, ceiling[gram]) for gram, count in counts.items()
            )
            totals[n - 1] += sum(counts.values())
    precisions = tuple(
        m / t if t else 0.0 for m, t in zip(matches, totals)
    )
    if candidate_length == 0:
        return BleuResult(0.0, precisions, 0.0, 0, reference_length)
    if candidate_length >= reference_length:
        brevity_penalty = 1.0
    else:
        brevity_penalty = math.exp(1.0 - reference_length / candidate_length)
    if min(precisions) > 0.0:
        geometric = math.exp(
            math.fsum(math.log(p) for p in precisions) / max_order
        )
    else:
        geometric = 0.0
    return BleuResult(
        100.0 * brevity_penalty * geometric,
        precisions,
        brevity_penalty,
        candidate_length,
        reference_length,
    )


def bleu4(segments: Sequence[EvalSegment]) -> float:
    return corpus_bleu(segments).score


def sentence_bleu(
    candidate: Sequence[str],
    references: Sequence[Sequence[str]],
    max_order: int = MAX_ORDER,
) -> float:
    """Per-segment detail score, add-one smoothed for orders >= 2."""
    if not candidate:
        return 0.0
    smoothed = []
    for n in range(1, max_order + 1):
        counts = _ngram_counts(candidate, n)
        total = sum(counts.values())
        ceiling: Counter = Counter()
        for reference in references:
            for gram, count in _ngram_counts(reference, n).items():
                if count > ceiling[gram]:
                    ceiling[gram] = count
        match = sum(min(c, ceiling[g]) for g, c in counts.items())
        if n == 1:
            smoothed.append(match / total if total else 0.0)
        else:
            smoothed.append((match + 1.0) / (total + 1.0))
    if smoothed[0] == 0.0:
        return 0.0
    reference_length = _closest_reference_length(len(candidate), references)
    if len(candidate) >= reference_length:
        brevity_penalty = 1.0
    else:
        brevity_penalty = math.exp(1.0 - reference_length / len(candidate))
    geometric = math.exp(
        math.fsum(math.log(p) for p in smoothed) / max_order
    )
    return 100.0 * brevity_penalty * geometric


# -------------------------------------------------------------- METEOR


@dataclass(frozen=True)
class MeteorStats:
    matches: int
    chunks: int
    candidate_length: int
    reference_length: int

    @property
    def precision(self) -> float:
        return self.matches / self.candidate_length if self.candidate_length else 0.0

    @property
    def recall(self) -> float:
        return self.matches / self.reference_length if self.reference_length else 0.0

    @property
    def fmean(self) -> float:
        if self.matches == 0:
            return 0.0
        p, r = self.precision, self.recall
        return 10.0 * p * r / (r + 9.0 * p)

    @property
    def penalty(self) -> float:
        if self.matches == 0:
            return 0.0
        return 0.5 * (self.chunks / self.matches) ** 3

    @property
    def score(self) -> float:
        return self.fmean * (1.0 - self.penalty)


def align(candidate: Sequence[str], reference: Sequence[str]) -> tuple[int, int]:
    """(matches, chunks) of an exact unigram alignment.

    Every alignment with the maximum number of matches is feasible;
    among those a beam search minimizes the chunk count.  Exact chunk
    minimization is a common-partition problem, so for adversarial
    repetition patterns the beam may return a slight overcount, but it
    is deterministic and exact on natural sentences.
    """
    ref_positions: dict[str, list[int]] = defaultdict(list)
    for j, word in enumerate(reference):
        ref_positions[word].append(j)
    cand_positions: dict[str, list[int]] = defaultdict(list)
    for i, word in enumerate(candidate):
        cand_positions[word].append(i)
    quota = {
        word: min(len(cand_positions[word]), len(ref_positions[word]))
        for word in cand_positions
        if word in ref_positions
    }
    total = sum(quota.values())
    if total == 0:
        return 0, 0
    no_pair = (-2, -2)
    # state: (used reference positions, last matched pair) -> chunks
    states: dict[tuple[frozenset[int], tuple[int, int]], int] = {
        (frozenset(), no_pair): 0
    }
    for i, word in enumerate(candidate):
        if word not in quota:
            continue
        later = sum(1 for p in cand_positions[word] if p > i)
        successors: dict[tuple[frozenset[int], tuple[int, int]], int] = {}
        for (used, last), chunks in states.items():
            need = quota[word] - sum(1 for j in used if reference[j] == word)
            if need <= 0 or later >= need:
                key = (used, last)
                if chunks < successors.get(key, math.inf):
                    successors[key] = chunks
            if need > 0:
                for j in ref_positions[word]:
                    if j in used:
                        continue
                    grown = chunks + (0 if last == (i - 1, j - 1) else 1)
                    key = (used | {j}, (i, j))
                    if grown < successors.get(key, math.inf):
                        successors[key] = grown
        ranked = sorted(
            successors.items(),
            key=lambda kv: (kv[1], -len(kv[0][0]), kv[0][1], tuple(sorted(kv[0][0]))),
        )
        states = dict(ranked[:_BEAM_WIDTH])
    return total, min(states.values())


def meteor_segment(
    candidate: Sequence[str], references: Sequence[Sequence[str]]
) -> MeteorStats:
    """Stats against the best-scoring reference."""
    best: MeteorStats | None = None
    for reference in references:
        matches, chunks = align(candidate, reference)
        stats = MeteorStats(matches, chunks, len(candidate), len(reference))
        if best is None or stats.score > best.score:
            best = stats
    assert best is not None
    return best


def meteor(segments: Sequence[EvalSegment]) -> float:
    """Corpus score: sum matches/chunks/lengths, then apply the formulas."""
    matches = chunks = candidate_length = reference_length = 0
    for segment in segments:
        stats = meteor_segment(segment.candidate, segment.references)
        matches += stats.matches
        chunks += stats.chunks
        candidate_length += stats.candidate_length
        reference_length += stats.reference_length
    pooled = MeteorStats(matches, chunks, candidate_length, reference_length)
    return pooled.score


# --------------------------------------------------------------- CIDEr


def cider_scores(
    segments: Sequence[EvalSegment], max_order: int = MAX_ORDER
) -> tuple[float, list[float]]:
    """(corpus score, per-segment scores)."""
    if len(segments) < 2:
        raise SingleSegmentCorpus(
            f"got {len(segments)} segment(s); idf needs a corpus of at least 2"
        )
    corpus_size = len(segments)
    document_frequency: list[Counter] = [Counter() for _ in range(max_order)]
    for segment in segments:
        for n in range(1, max_order + 1):
            seen: set = set()
            for reference in segment.references:
                seen.update(_ngram_counts(reference, n))
            for gram in seen:
                document_frequency[n - 1][gram] += 1

    def idf(gram, n: int) -> float:
        return math.log(corpus_size / (1.0 + document_frequency[n - 1][gram]))

    def vector(tokens, n: int) -> dict:
        return {
            gram: count * idf(gram, n)
            for gram, count in _ngram_counts(tokens, n).items()
        }

    def cosine(a: dict, b: dict) -> float:
        norm_a = math.sqrt(math.fsum(v * v for v in a.values()))
        norm_b = math.sqrt(math.fsum(v * v for v in b.values()))
        if norm_a == 0.0 or norm_b == 0.0:
            return 0.0
        dot = math.fsum(v * b[g] for g, v in a.items() if g in b)
        return dot / (norm_a * norm_b)

    per_segment: list[float] = []
    for segment in segments:
        order_scores = []
        for n in range(1, max_order + 1):
            cand_vec = vector(segment.candidate, n)
            sims = [
                cosine(cand_vec, vector(reference, n))
                for reference in segment.references
            ]
            order_scores.append(math.fsum(sims) / len(sims))
        per_segment.append(10.0 * math.fsum(order_scores) / max_order)
    corpus = math.fsum(per_segment) / len(per_segment)
    return corpus, per_segment


def cider(segments: Sequence[EvalSegment]) -> float:
    return cider_scores(segments)[0]


# -------------------------------------------------------------- report


@dataclass(frozen=True)
class SegmentScores:
    index: int
    bleu4: float
    meteor: float
    cider: float


@dataclass(frozen=True)
class EvalReport:
    bleu4: float
    meteor: float
    cider: float
    segments: tuple[SegmentScores, ...]
    metadata: dict


def evaluate(segments: Sequence[EvalSegment]) -> EvalReport:
    corpus = corpus_bleu(segments)
    meteor_corpus = meteor(segments)
    cider_corpus, cider_per_segment = cider_scores(segments)
    detail = tuple(
        SegmentScores(
            index=i,
            bleu4=sentence_bleu(s.candidate, s.references),
            meteor=meteor_segment(s.candidate, s.references).score,
            cider=cider_per_segment[i],
        )
        for i, s in enumerate(segments)
    )
    metadata = {
        "bleu4": "corpus pooled n-gram counts, unsmoothed; "
                 "per-segment detail add-one smoothed for n >= 2",
        "meteor": "exact-METEOR: fmean 10PR/(R+9P), "
                  "penalty 0.5*(chunks/matches)^3",
        "cider": "plain CIDEr, idf log(|S|/(1+df)) over the references",
        "spice": "not implemented",
    }
    return EvalReport(
        bleu4=corpus.score,
        meteor=meteor_corpus,
        cider=cider_corpus,
        segments=detail,
        metadata=metadata,
    )


def load_segments(candidates_path, references_path) -> list[EvalSegment]:
    """Read aligned plain-text files; tab separates multiple references."""
    with open(candidates_path, encoding="utf-8") as handle:
        candidates = handle.read().splitlines()
    with open(references_path, encoding="utf-8") as handle:
        references = handle.read().splitlines()
    if len(candidates) != len(references):
        raise CountMismatch(
            f"{len(candidates)} candidates vs {len(references)} references"
        )
    return [
        EvalSegment(
            normalize(candidate),
            tuple(normalize(r) for r in reference.split("\t")),
        )
        for candidate, reference in zip(candidates, references)
    ]


def render_report(report: EvalReport) -> str:
    lines = [
        "metric         score",
        f"BLEU-4        {report.bleu4:9.4f}",
        f"exact-METEOR  {report.meteor:9.4f}",
        f"CIDEr         {report.cider:9.4f}",
        "spice: not implemented",
        f"segments: {len(report.segments)}",
    ]
    for key in ("bleu4", "meteor", "cider"):
        lines.append(f"note {key}: {report.metadata[key]}")
    return "\n".join(lines)


def report_to_json(report: EvalReport) -> str:
    payload = {
        "bleu4": report.bleu4,
        "meteor": report.meteor,
        "cider": report.cider,
        "spice": "not implemented",
        "metadata": report.metadata,
        "segments": [
            {
                "index": s.index,
                "bleu4": s.bleu4,
                "meteor": s.meteor,
                "cider": s.cider,
            }
            for s in report.segments
        ],
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
