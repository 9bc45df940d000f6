"""
Random polytope lab - logging setup

Library modules log through `logging.getLogger(__name__)`; this module
wires the root handler once, from the CLI flags.

Output format:

    [1712345678.123456] [DEBUG] message      (--debug --timestamp)
    [DEBUG] message                          (--debug)

Functions:
    setup_logging(debug, timestamp): Configure the root logger
"""
import logging
import sys


class _LevelFormatter(logging.Formatter):
    def __init__(self, timestamp: bool):
        super().__init__()
        self.timestamp = timestamp

    def format(self, record: logging.LogRecord) -> str:
        prefix = f"[{record.created:.6f}] " if self.timestamp else ""
        return f"{prefix}[{record.levelname}] {record.getMessage()}"


def setup_logging(debug: bool = False, timestamp: bool = False):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_LevelFormatter(timestamp))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if debug else logging.WARNING)
