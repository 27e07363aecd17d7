from concurrent.futures import ThreadPoolExecutor

import pytest

from selqa import AdapterError, answer_similarity
from selqa.adapter import AdapterPool, ExternalSimilarity

from conftest import adapter_cmd


class TestExternalSimilarity:
    def test_scores_flow_through(self):
        with ExternalSimilarity(adapter_cmd("em"), name="em") as fn:
            assert fn.similarity("red apple", "red apple") == 1.0
            assert fn.similarity("red apple", "blue car") == 0.0

    def test_used_via_answer_similarity(self):
        with ExternalSimilarity(adapter_cmd("jaccard"), name="jac") as fn:
            assert answer_similarity("The Red Apple", "red apple", fn) == 1.0
            assert answer_similarity("red apple", "red car", fn) == pytest.approx(1 / 3)
            # abstention override happens before the adapter sees anything
            assert answer_similarity("unanswerable", "red apple", fn) == 0.0

    def test_out_of_range_score_rejected(self):
        with ExternalSimilarity(adapter_cmd("const:1.5"), name="bad") as fn:
            with pytest.raises(AdapterError, match=r"\[0, 1\]"):
                answer_similarity("a", "b", fn)

    def test_reported_error_surfaces(self):
        with ExternalSimilarity(adapter_cmd("error"), name="boom") as fn:
            with pytest.raises(AdapterError, match="scorer exploded"):
                fn.similarity("a", "b")

    def test_garbage_reply(self):
        with ExternalSimilarity(adapter_cmd("garbage"), name="junk") as fn:
            with pytest.raises(AdapterError, match="invalid JSON"):
                fn.similarity("a", "b")

    def test_dead_process(self):
        with ExternalSimilarity(adapter_cmd("die"), name="dead") as fn:
            with pytest.raises(AdapterError, match="closed its output"):
                fn.similarity("a", "b")

    def test_launch_failure(self):
        with pytest.raises(AdapterError, match="failed to launch"):
            ExternalSimilarity(["/nonexistent/scorer-binary"], name="ghost")


class TestAdapterPool:
    def test_parallel_scoring_consistent(self):
        with ExternalSimilarity(adapter_cmd("jaccard"), name="jac", pool_size=4) as fn:
            pairs = [(f"word{i} shared", "shared other") for i in range(40)]
            with ThreadPoolExecutor(max_workers=8) as executor:
                results = list(executor.map(lambda p: fn.similarity(*p), pairs))
            assert results == [pytest.approx(1 / 3)] * 40

    def test_pool_size_validated(self):
        with pytest.raises(ValueError):
            AdapterPool(adapter_cmd("em"), size=0)

    def test_unicode_round_trip(self):
        with ExternalSimilarity(adapter_cmd("em"), name="em") as fn:
            assert fn.similarity("café żółć", "café żółć") == 1.0
