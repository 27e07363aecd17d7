"""Answer-correctness classification against gold annotations.

A prediction counts as correct when it matches at least one gold answer,
either exactly (after normalization) or by clearing a similarity threshold.
Text is normalized uniformly across all classifiers, so "A system restore"
matches gold "system restore".
"""

from __future__ import annotations

from dataclasses import dataclass

from .records import GoldRecord
from .similarity import BleuSimilarity, SimilarityFn, answer_similarity
from .textnorm import normalize_answer


def exact_match_correct(prediction: str, gold: GoldRecord) -> bool:
    """True iff the normalized prediction equals some normalized gold answer."""
    normalized = normalize_answer(prediction)
    return any(normalized == normalize_answer(a.answer) for a in gold.annotations)


def similarity_correct(
    prediction: str, gold: GoldRecord, fn: SimilarityFn, threshold: float
) -> bool:
    """True iff the best similarity against any gold answer reaches the threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    best = max(answer_similarity(prediction, a.answer, fn) for a in gold.annotations)
    return best >= threshold


def answerable_label(gold: GoldRecord) -> bool:
    """OR over the per-annotation answerable flags."""
    if not gold.annotations:
        raise ValueError(f"gold record {gold.question_id!r} has no annotations")
    return any(a.answerable for a in gold.annotations)


@dataclass(frozen=True)
class CorrectnessClassifier:
    """A named correctness rule: exact match or similarity-above-threshold.

    The default similarity threshold of 0.5 is exposed, not hidden; reports
    record the threshold actually used.
    """

    name: str = "em"
    threshold: float = 0.5
    similarity: SimilarityFn | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")
        if self.name != "em" and self.similarity is None:
            raise ValueError(f"classifier {self.name!r} needs a similarity function")

    @classmethod
    def exact_match(cls) -> "CorrectnessClassifier":
        return cls(name="em")

    @classmethod
    def bleu_threshold(
        cls, threshold: float = 0.5, max_order: int = 4, mode: str = "word"
    ) -> "CorrectnessClassifier":
        return cls(
            name="bleu-threshold",
            threshold=threshold,
            similarity=BleuSimilarity(max_order=max_order, mode=mode),
        )

    @classmethod
    def adapter_threshold(
        cls, fn: SimilarityFn, threshold: float = 0.5
    ) -> "CorrectnessClassifier":
        return cls(name=f"adapter-threshold:{fn.name}", threshold=threshold, similarity=fn)

    def verdict(self, prediction: str, gold: GoldRecord) -> bool:
        if self.name == "em":
            return exact_match_correct(prediction, gold)
        assert self.similarity is not None
        return similarity_correct(prediction, gold, self.similarity, self.threshold)
