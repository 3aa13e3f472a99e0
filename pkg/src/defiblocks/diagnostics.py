"""
Diagnostics for defiblocks.

Row- and record-level problems that do not abort a stage are recorded as
Diagnostic values, logged, and dumped next to the stage outputs.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Optional

from defiblocks.logging.setup import get_logger
from defiblocks.utils.io import write_table

logger = get_logger(__name__)

DIAGNOSTIC_COLUMNS = ("code", "source", "line", "message", "context")


@dataclass(frozen=True)
class Diagnostic:
    """
    A single non-fatal problem.

    Attributes:
        code: Short machine-readable code (e.g. 'invalid_address').
        message: Human-readable description.
        source: File or component the problem was found in.
        line: 1-based line number in the source file, when applicable.
        context: Extra key-value details.
    """

    code: str
    message: str
    source: str = ""
    line: Optional[int] = None
    context: tuple[tuple[str, str], ...] = ()

    def to_dict(self) -> dict[str, Any]:
        """Convert to a flat dictionary for dumping."""
        return {
            "code": self.code,
            "source": self.source,
            "line": "" if self.line is None else self.line,
            "message": self.message,
            "context": ";".join(f"{k}={v}" for k, v in self.context),
        }


@dataclass
class DiagnosticCollector:
    """
    Accumulates diagnostics and logs each one as a warning.

    Attributes:
        source: Default source name attached to reported diagnostics.
    """

    source: str = ""
    _items: list[Diagnostic] = field(default_factory=list)

    def report(
        self,
        code: str,
        message: str,
        line: Optional[int] = None,
        source: Optional[str] = None,
        **context: object,
    ) -> Diagnostic:
        """
        Record a diagnostic.

        Args:
            code: Diagnostic code.
            message: Description.
            line: Optional 1-based line number.
            source: Overrides the collector's default source.
            **context: Extra details.

        Returns:
            The recorded diagnostic.
        """
        diag = Diagnostic(
            code=code,
            message=message,
            source=source if source is not None else self.source,
            line=line,
            context=tuple((k, str(v)) for k, v in context.items()),
        )
        self._items.append(diag)
        logger.warning(code, message=message, line=line, source=diag.source, **context)
        return diag

    def add(self, diag: Diagnostic) -> None:
        """Append an already-logged diagnostic (e.g. one produced in a worker)."""
        self._items.append(diag)

    def extend(self, other: "DiagnosticCollector") -> None:
        """Append all diagnostics of another collector."""
        self._items.extend(other._items)

    def count(self, code: Optional[str] = None) -> int:
        """Count diagnostics, optionally of one code."""
        if code is None:
            return len(self._items)
        return sum(1 for d in self._items if d.code == code)

    def codes(self) -> list[str]:
        """List the codes of all diagnostics in report order."""
        return [d.code for d in self._items]

    def dump(self, path: Path) -> int:
        """Write diagnostics in report order; returns the number written."""
        return write_table((d.to_dict() for d in self._items), path, DIAGNOSTIC_COLUMNS)

    def __iter__(self) -> Iterator[Diagnostic]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)
