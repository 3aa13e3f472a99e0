"""
Structured logging setup for defiblocks.

structlog events are rendered by stdlib handlers: a console (or JSON) stream
on stderr and, for pipeline runs, a JSON-lines log file next to the stage
directories. The run id and the running stage are carried in context
variables, so every event of a stage is tagged without passing loggers around.
"""

from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional
import logging
import sys

import structlog
from structlog.types import Processor

LOG_FILE_NAME = "pipeline.log"

_SHARED_PROCESSORS: list[Processor] = [
    structlog.contextvars.merge_contextvars,
    structlog.stdlib.add_log_level,
    structlog.stdlib.add_logger_name,
    structlog.processors.TimeStamper(fmt="iso"),
    structlog.stdlib.PositionalArgumentsFormatter(),
    structlog.processors.StackInfoRenderer(),
    structlog.processors.UnicodeDecoder(),
]


def _formatter(json_format: bool) -> structlog.stdlib.ProcessorFormatter:
    renderer: Processor
    if json_format:
        renderer = structlog.processors.JSONRenderer()
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty())
    return structlog.stdlib.ProcessorFormatter(
        foreign_pre_chain=_SHARED_PROCESSORS,
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            *([structlog.processors.format_exc_info] if json_format else []),
            renderer,
        ],
    )


def configure_logging(
    level: str = "INFO",
    run_id: Optional[str] = None,
    json_format: bool = False,
    log_file: Optional[Path] = None,
) -> None:
    """
    Configure structured logging for the application.

    Safe to call more than once: handlers installed by an earlier call are
    closed and replaced.

    Args:
        level: Log level (DEBUG, INFO, WARNING, ERROR).
        run_id: Run identifier bound to every event.
        json_format: Render stderr output as JSON (batch runs).
        log_file: Optional JSON-lines log file; its directory is created.
    """
    numeric_level = getattr(logging, level.upper(), logging.INFO)

    structlog.configure(
        processors=[*_SHARED_PROCESSORS, structlog.stdlib.ProcessorFormatter.wrap_for_formatter],
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )

    handlers: list[logging.Handler] = []
    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(_formatter(json_format))
    handlers.append(stream)
    if log_file is not None:
        log_file = Path(log_file)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(_formatter(json_format=True))
        handlers.append(file_handler)

    root = logging.getLogger()
    for old in root.handlers[:]:
        root.removeHandler(old)
        old.close()
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(numeric_level)

    structlog.contextvars.clear_contextvars()
    if run_id:
        structlog.contextvars.bind_contextvars(run_id=run_id)


@contextmanager
def stage_logging(stage: str) -> Iterator[None]:
    """Tag every event emitted inside the block with the pipeline stage."""
    with structlog.contextvars.bound_contextvars(stage=stage):
        yield


def get_logger(name: Optional[str] = None) -> structlog.stdlib.BoundLogger:
    """Structured logger for a module; pass `__name__`."""
    return structlog.get_logger(name)
