"""
Logging configuration and utilities for nestprover
"""

import json
import logging
import sys
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from config import LOG_FILE, LOG_LEVEL, LOG_MEMORY_LIMIT


class StructuredLogger:
    """Logger that keeps structured JSON events in memory and forwards them to stdlib logging"""

    def __init__(self, name: str, log_file: Optional[str] = None, level: str = LOG_LEVEL):
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, level.upper(), logging.WARNING))
        self.logger.propagate = False

        if not self.logger.handlers:
            # Human-readable lines go to stderr so stdout stays clean for proof documents
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setFormatter(
                logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
            )
            self.logger.addHandler(console_handler)

            if log_file:
                self.logger.addHandler(logging.FileHandler(log_file))

        self.json_logs: List[Dict[str, Any]] = []

    def log_structured(self, level: str, event: str, **kwargs) -> Dict[str, Any]:
        """Record a structured event with additional metadata"""
        log_entry = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": level.upper(),
            "event": event,
            **kwargs,
        }

        self.json_logs.append(log_entry)
        if len(self.json_logs) > LOG_MEMORY_LIMIT:
            self.json_logs = self.json_logs[-LOG_MEMORY_LIMIT:]

        getattr(self.logger, level.lower())(json.dumps(log_entry, default=str))
        return log_entry

    def info(self, message: str, **kwargs):
        return self.log_structured("info", message, **kwargs)

    def warning(self, message: str, **kwargs):
        return self.log_structured("warning", message, **kwargs)

    def error(self, message: str, **kwargs):
        return self.log_structured("error", message, **kwargs)

    def debug(self, message: str, **kwargs):
        return self.log_structured("debug", message, **kwargs)

    def audit(self, event: str, subject: str, **kwargs):
        """Record a verdict (proved, refuted, exhausted, check failure) about a goal or document"""
        return self.log_structured("info", f"AUDIT: {event}", subject=subject, audit=True, **kwargs)

    def get_recent_logs(self, limit: int = 100) -> list:
        return self.json_logs[-limit:] if limit > 0 else self.json_logs


# Global logger instance
logger = StructuredLogger("nestprover", LOG_FILE or None)
