"""Logging module for defiblocks."""

from defiblocks.logging.setup import LOG_FILE_NAME, configure_logging, get_logger, stage_logging
from defiblocks.logging.metrics import StageMetrics

__all__ = [
    "LOG_FILE_NAME",
    "configure_logging",
    "get_logger",
    "StageMetrics",
    "stage_logging",
]
