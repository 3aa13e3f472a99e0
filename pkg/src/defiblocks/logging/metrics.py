"""
Stage metrics collection for defiblocks.

Counters and wall-clock timings gathered while a pipeline stage runs; the
summary is written into the stage manifest.
"""

from dataclasses import dataclass, field
from typing import Any
import time


@dataclass
class StageMetrics:
    """
    Collects counters and timings for one pipeline stage.

    Attributes:
        stage: Stage name.
        counters: Named integer counters.
        timings_s: Named durations in seconds.
    """

    stage: str
    counters: dict[str, int] = field(default_factory=dict)
    timings_s: dict[str, float] = field(default_factory=dict)
    _started: dict[str, float] = field(default_factory=dict, repr=False)

    def incr(self, name: str, amount: int = 1) -> None:
        """Increase a counter."""
        self.counters[name] = self.counters.get(name, 0) + amount

    def set(self, name: str, value: int) -> None:
        """Set a counter to an absolute value."""
        self.counters[name] = int(value)

    def start(self, name: str) -> None:
        """Start timing a named section."""
        self._started[name] = time.perf_counter()

    def stop(self, name: str) -> float:
        """
        Stop timing a named section.

        Returns:
            Elapsed seconds for the section.
        """
        begin = self._started.pop(name, None)
        if begin is None:
            return 0.0
        elapsed = time.perf_counter() - begin
        self.timings_s[name] = self.timings_s.get(name, 0.0) + elapsed
        return elapsed

    def get_summary(self) -> dict[str, Any]:
        """
        Get a deterministic summary for manifests.

        Timings are excluded because they differ between otherwise identical runs.

        Returns:
            Summary dictionary.
        """
        return {
            "stage": self.stage,
            "counters": dict(sorted(self.counters.items())),
        }

    def get_timings(self) -> dict[str, float]:
        """Return rounded timings for logging."""
        return {k: round(v, 3) for k, v in sorted(self.timings_s.items())}
