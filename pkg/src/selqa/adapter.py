"""Subprocess adapter for external answer-similarity scorers.

Wire protocol, one JSON object per line over stdin/stdout:

    request   {"a": "<candidate>", "b": "<reference>"}
    response  {"score": 0.42}            on success
    response  {"error": "<message>"}     on failure

Scores must lie in [0, 1]; anything else is rejected with AdapterError rather
than trusted. A connection is used by one thread at a time; the pool hands
out connections for parallel scoring and serializes access per process.
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
from typing import Iterator

from contextlib import contextmanager

from .errors import AdapterError
from .similarity import SimilarityFn


class AdapterConnection:
    """A single scorer subprocess speaking the line protocol."""

    def __init__(self, argv: list[str]) -> None:
        self.argv = argv
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,  # line buffered
            )
        except OSError as exc:
            raise AdapterError(f"failed to launch adapter {argv!r}: {exc}") from exc

    def score(self, a: str, b: str) -> float:
        request = json.dumps({"a": a, "b": b}, ensure_ascii=False)
        try:
            assert self._proc.stdin is not None and self._proc.stdout is not None
            self._proc.stdin.write(request + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except (OSError, ValueError) as exc:
            raise AdapterError(f"adapter pipe broke: {exc}") from exc
        if not line:
            code = self._proc.poll()
            raise AdapterError(f"adapter closed its output (exit status {code})")
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise AdapterError(f"adapter sent invalid JSON: {line!r}") from exc
        if not isinstance(response, dict):
            raise AdapterError(f"adapter response is not an object: {line!r}")
        if "error" in response:
            raise AdapterError(f"adapter reported: {response['error']}")
        if "score" not in response:
            raise AdapterError(f"adapter response has no score: {line!r}")
        score = response["score"]
        if not isinstance(score, (int, float)):
            raise AdapterError(f"adapter score is not a number: {score!r}")
        return float(score)

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                if self._proc.stdin is not None:
                    self._proc.stdin.close()
                self._proc.wait(timeout=5)
            except (OSError, subprocess.TimeoutExpired):
                self._proc.kill()
                self._proc.wait()


class AdapterPool:
    """A fixed-size pool of adapter connections for parallel scoring."""

    def __init__(self, command: str | list[str], size: int = 1) -> None:
        if size < 1:
            raise ValueError(f"pool size must be >= 1, got {size}")
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self._connections: queue.Queue[AdapterConnection] = queue.Queue()
        self._all: list[AdapterConnection] = []
        for _ in range(size):
            conn = AdapterConnection(self.argv)
            self._all.append(conn)
            self._connections.put(conn)

    @contextmanager
    def connection(self) -> Iterator[AdapterConnection]:
        conn = self._connections.get()
        try:
            yield conn
        finally:
            self._connections.put(conn)

    def close(self) -> None:
        for conn in self._all:
            conn.close()


class ExternalSimilarity(SimilarityFn):
    """A SimilarityFn backed by a pool of adapter subprocesses.

    The [0, 1] range check happens in answer_similarity, which sees every
    score regardless of which connection produced it.
    """

    def __init__(self, command: str | list[str], name: str = "adapter", pool_size: int = 1) -> None:
        self.name = name
        self._pool = AdapterPool(command, pool_size)

    def similarity(self, candidate: str, reference: str) -> float:
        with self._pool.connection() as conn:
            return conn.score(candidate, reference)

    def close(self) -> None:
        self._pool.close()
