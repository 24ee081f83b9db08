"""
Structured logging configuration for jointsdr.

Every log entry carries the run id, and entries emitted while a codeword is
simulated also carry its Monte Carlo coordinates (``snr_db``, ``trial``).
Trial-parallel runs configure each worker process with :func:`init_worker`
so that worker entries share the parent's run id and renderer and are tagged
with the worker's pid.
"""

import logging
import os
import sys
import uuid
from contextvars import ContextVar
from typing import Any, Dict, List, Optional

import structlog
from structlog.stdlib import LoggerFactory

from jointsdr.core.config import Settings

run_id_var: ContextVar[Optional[str]] = ContextVar("run_id", default=None)

# pid of the process that called configure_logging first
_parent_pid: Optional[int] = None


def add_run_id(logger: Any, method_name: str, event_dict: Dict[str, Any]) -> Dict[str, Any]:
    """Add the run correlation id to log entries."""
    run_id = run_id_var.get()
    if run_id:
        event_dict["run_id"] = run_id
    return event_dict


def add_worker(logger: Any, method_name: str, event_dict: Dict[str, Any]) -> Dict[str, Any]:
    """Tag entries emitted from a worker process with its pid."""
    pid = os.getpid()
    if _parent_pid is not None and pid != _parent_pid:
        event_dict["worker"] = pid
    return event_dict


def _processors(json_logs: bool) -> List[Any]:
    processors: List[Any] = [
        structlog.contextvars.merge_contextvars,
        add_run_id,
        add_worker,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.add_log_level,
        structlog.processors.StackInfoRenderer(),
    ]
    if json_logs:
        processors += [structlog.processors.dict_tracebacks, structlog.processors.JSONRenderer()]
    else:
        processors.append(structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty()))
    return processors


def configure_logging(settings: Settings) -> None:
    """Configure structured logging on stderr; stdout is reserved for CLI output."""
    global _parent_pid
    if _parent_pid is None:
        _parent_pid = os.getpid()

    level = getattr(logging, settings.log_level.value)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(message)s", force=True)
    structlog.configure(
        processors=_processors(settings.json_logs),
        logger_factory=LoggerFactory(),
        wrapper_class=structlog.make_filtering_bound_logger(level),
        cache_logger_on_first_use=True,
    )


def init_worker(settings: Settings, run_id: Optional[str], parent_pid: int) -> None:
    """Process-pool initializer: same logging setup and run id as the parent."""
    global _parent_pid
    _parent_pid = parent_pid
    configure_logging(settings)
    if run_id:
        run_id_var.set(run_id)


def get_logger(name: str) -> structlog.BoundLogger:
    """Get a structured logger instance."""
    return structlog.get_logger(name)


def set_run_id(run_id: Optional[str] = None) -> str:
    """Set the run id in context. Generate one if not provided."""
    if run_id is None:
        run_id = uuid.uuid4().hex[:12]
    run_id_var.set(run_id)
    return run_id


def get_run_id() -> Optional[str]:
    return run_id_var.get()


def bind_trial(snr_db: float, trial: int) -> None:
    """Bind Monte Carlo coordinates to every subsequent log entry."""
    structlog.contextvars.bind_contextvars(snr_db=snr_db, trial=trial)


def clear_trial() -> None:
    structlog.contextvars.unbind_contextvars("snr_db", "trial")


class LoggerMixin:
    """Mixin to add structured logging to classes."""

    @property
    def logger(self) -> structlog.BoundLogger:
        return get_logger(self.__class__.__name__)
