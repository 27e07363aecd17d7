"""The four answer-confidence scoring methods and the trigger decision.

All scores land in [0, 1] and rank "answer" over "abstain":

* likelihood  - the sequence probability exp(sum of token logprobs), no
  length normalization.
* repetition  - frequency of the modal normalized sample over the sample
  count (the probability of the mode of the empirical distribution).
* diversity   - 1 - (#unique normalized samples) / #samples.
* avg-bleu    - likelihood-weighted mean of pairwise similarities over the
  distinct sampled answers; generalizes to any similarity function and
  collapses to the likelihood score when all samples agree.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Iterable, Sequence

from .correctness import CorrectnessClassifier, answerable_label
from .errors import JoinError
from .records import (
    ABSTENTION_MARKER,
    GoldRecord,
    PredictionRecord,
    SampledAnswer,
    ScoredPrediction,
)
from .similarity import BleuSimilarity, SimilarityFn, answer_similarity
from .textnorm import normalize_answer

#: Names accepted by score requests; the avg method's report key follows the
#: similarity function in use ("avg-bleu" builtin, "avg-<name>" for adapters).
BUILTIN_METHODS = ("likelihood", "repetition", "diversity", "avg-bleu")


def likelihood_score(answer: SampledAnswer) -> float:
    """Sequence probability of one answer via the chain rule."""
    if not answer.logprobs:
        raise ValueError("likelihood needs at least one token logprob")
    return math.exp(math.fsum(answer.logprobs))


def repetition_score(samples: Sequence[SampledAnswer]) -> float:
    """Relative frequency of the most common normalized sample text."""
    if not samples:
        raise ValueError("repetition needs at least one sample")
    counts = Counter(normalize_answer(s.text) for s in samples)
    return max(counts.values()) / len(samples)


def diversity_score(samples: Sequence[SampledAnswer]) -> float:
    """One minus the fraction of distinct normalized sample texts.

    Zero when all samples differ; 1 - 1/N when they all agree.
    """
    if not samples:
        raise ValueError("diversity needs at least one sample")
    unique = len({normalize_answer(s.text) for s in samples})
    return 1.0 - unique / len(samples)


def avg_bleu_score(samples: Sequence[SampledAnswer], fn: SimilarityFn | None = None) -> float:
    """Likelihood-weighted average similarity over distinct sampled answers.

    With k distinct normalized answers a_1..a_k, each weighted by the
    sequence probability of its first occurrence, the score is
    (1/k) * sum over all ordered pairs (i, j) of p(a_i) * sim(a_i, a_j),
    diagonal included, so a unanimous sample set reduces to the likelihood
    score of that answer.
    """
    if not samples:
        raise ValueError("avg similarity needs at least one sample")
    fn = fn if fn is not None else BleuSimilarity()
    weights: dict[str, float] = {}
    for sample in samples:
        key = normalize_answer(sample.text)
        if key not in weights:
            weights[key] = likelihood_score(sample)
    distinct = list(weights)
    # fsum is exact, so the result does not depend on first-occurrence order.
    terms = [
        weights[a] * answer_similarity(a, b, fn) for a in distinct for b in distinct
    ]
    score = math.fsum(terms) / len(distinct)
    if score > 1.0:
        # Weights are probabilities of distinct sequences, so a consistent
        # dump keeps the sum at or below 1; beyond float noise the dump lies.
        if score <= 1.0 + 1e-9:
            return 1.0
        raise ValueError(
            f"average similarity {score} exceeds 1; distinct-sample "
            "probabilities sum above 1 in this record"
        )
    return score


def trigger_decision(greedy: SampledAnswer) -> bool:
    """Answer (True) unless the raw greedy text contains the abstention marker."""
    return ABSTENTION_MARKER not in greedy.text.lower()


def resolve_method_names(methods: Iterable[str], sim_name: str = "bleu") -> list[str]:
    """Validate requested method names and fix the avg method's report key.

    "avg-bleu" always requests the average-similarity method; its key in
    scores and reports is "avg-" plus the active similarity's name.
    """
    avg_key = f"avg-{sim_name}"
    resolved: list[str] = []
    for method in methods:
        if method in ("likelihood", "repetition", "diversity"):
            key = method
        elif method == "avg-bleu" or method == avg_key:
            key = avg_key
        else:
            raise ValueError(
                f"unknown scoring method {method!r}; expected one of "
                f"{', '.join(BUILTIN_METHODS)}"
            )
        if key not in resolved:
            resolved.append(key)
    if not resolved:
        raise ValueError("no scoring methods requested")
    return resolved


def score_record(
    record: PredictionRecord, methods: Iterable[str], fn: SimilarityFn | None = None
) -> dict[str, float]:
    """Compute the requested confidence scores for one record."""
    fn = fn if fn is not None else BleuSimilarity()
    scores: dict[str, float] = {}
    for name in resolve_method_names(methods, fn.name):
        if name == "likelihood":
            scores[name] = likelihood_score(record.greedy)
        elif name == "repetition":
            scores[name] = repetition_score(record.samples)
        elif name == "diversity":
            scores[name] = diversity_score(record.samples)
        else:
            scores[name] = avg_bleu_score(record.samples, fn)
    return scores


def score_all(
    record: PredictionRecord,
    gold: GoldRecord,
    methods: Iterable[str] = BUILTIN_METHODS,
    fn: SimilarityFn | None = None,
    classifiers: Sequence[CorrectnessClassifier] | None = None,
) -> ScoredPrediction:
    """Join one record with its gold and produce the full scored row.

    Abstained records get scores but no correctness verdicts.
    """
    if record.question_id != gold.question_id:
        raise JoinError(
            f"question_id mismatch: prediction {record.question_id!r} "
            f"vs gold {gold.question_id!r}"
        )
    if classifiers is None:
        classifiers = (CorrectnessClassifier.exact_match(),)
    fn = fn if fn is not None else BleuSimilarity()
    triggered = trigger_decision(record.greedy)
    scores = score_record(record, methods, fn)
    correct: dict[str, bool] = {}
    if triggered:
        for clf in classifiers:
            correct[clf.name] = clf.verdict(record.greedy.text, gold)
    return ScoredPrediction(
        question_id=record.question_id,
        triggered=triggered,
        scores=scores,
        correct=correct,
        answerable=answerable_label(gold),
    )
