import sys
from pathlib import Path

import pytest

from selqa import SampledAnswer

DATA_DIR = Path(__file__).parent / "data"
ADAPTER_SCRIPT = Path(__file__).parent / "adapters" / "line_scorer.py"


def adapter_cmd(mode: str = "em") -> list[str]:
    return [sys.executable, str(ADAPTER_SCRIPT), mode]


def ans(text: str, *logprobs: float) -> SampledAnswer:
    """Shorthand for building answers in tests."""
    return SampledAnswer(text=text, logprobs=tuple(logprobs) or (-1.0,))


@pytest.fixture
def golden_paths() -> tuple[Path, Path]:
    return DATA_DIR / "golden_predictions.jsonl", DATA_DIR / "golden_gold.json"
