"""
Prometheus metrics collection for jointsdr.

Collectors live on a dedicated registry and are created lazily. Simulation
runs can dump the registry to a text file in the Prometheus exposition format
(node-exporter textfile style); nothing here feeds back into results.
"""

import time
from pathlib import Path
from typing import Optional, Union

from prometheus_client import (
    CollectorRegistry,
    Counter,
    Histogram,
    write_to_textfile,
)

from jointsdr.core.logging import get_logger

logger = get_logger("observability.metrics")

_registry: Optional[CollectorRegistry] = None


def get_registry() -> CollectorRegistry:
    """Get the jointsdr metrics registry."""
    global _registry
    if _registry is None:
        _registry = CollectorRegistry()
    return _registry


def setup_metrics() -> None:
    """Initialize all metrics collectors."""
    logger.debug("Setting up Prometheus metrics")

    get_solve_counter()
    get_solve_iterations_histogram()
    get_solve_duration_histogram()
    get_codeword_counter()
    get_bit_error_counter()
    get_codeword_runtime_histogram()
    get_error_counter()


# Solver metrics
_solve_counter: Optional[Counter] = None
_solve_iterations_histogram: Optional[Histogram] = None
_solve_duration_histogram: Optional[Histogram] = None


def get_solve_counter() -> Counter:
    """Get SDP solve counter."""
    global _solve_counter
    if _solve_counter is None:
        _solve_counter = Counter(
            "jointsdr_sdp_solves_total",
            "Total SDP solves",
            ["form", "status"],
            registry=get_registry()
        )
    return _solve_counter


def get_solve_iterations_histogram() -> Histogram:
    """Get interior-point iteration count histogram."""
    global _solve_iterations_histogram
    if _solve_iterations_histogram is None:
        _solve_iterations_histogram = Histogram(
            "jointsdr_sdp_iterations",
            "Interior-point iterations per solve",
            buckets=(5, 10, 15, 20, 25, 30, 40, 50, 75, 100),
            registry=get_registry()
        )
    return _solve_iterations_histogram


def get_solve_duration_histogram() -> Histogram:
    """Get SDP solve duration histogram."""
    global _solve_duration_histogram
    if _solve_duration_histogram is None:
        _solve_duration_histogram = Histogram(
            "jointsdr_sdp_solve_seconds",
            "SDP solve duration in seconds",
            ["form"],
            buckets=(0.001, 0.005, 0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0),
            registry=get_registry()
        )
    return _solve_duration_histogram


# Link simulation metrics
_codeword_counter: Optional[Counter] = None
_bit_error_counter: Optional[Counter] = None
_codeword_runtime_histogram: Optional[Histogram] = None


def get_codeword_counter() -> Counter:
    """Get simulated codeword counter."""
    global _codeword_counter
    if _codeword_counter is None:
        _codeword_counter = Counter(
            "jointsdr_codewords_total",
            "Total simulated codewords",
            ["receiver"],
            registry=get_registry()
        )
    return _codeword_counter


def get_bit_error_counter() -> Counter:
    """Get coded bit error counter (final iteration)."""
    global _bit_error_counter
    if _bit_error_counter is None:
        _bit_error_counter = Counter(
            "jointsdr_bit_errors_total",
            "Total coded bit errors after the final iteration",
            ["receiver"],
            registry=get_registry()
        )
    return _bit_error_counter


def get_codeword_runtime_histogram() -> Histogram:
    """Get per-codeword receiver runtime histogram."""
    global _codeword_runtime_histogram
    if _codeword_runtime_histogram is None:
        _codeword_runtime_histogram = Histogram(
            "jointsdr_codeword_runtime_seconds",
            "Receiver runtime per codeword in seconds",
            ["receiver"],
            buckets=(0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0, 30.0, 60.0),
            registry=get_registry()
        )
    return _codeword_runtime_histogram


# Error metrics
_error_counter: Optional[Counter] = None


def get_error_counter() -> Counter:
    """Get error counter."""
    global _error_counter
    if _error_counter is None:
        _error_counter = Counter(
            "jointsdr_errors_total",
            "Total errors",
            ["error_type", "component"],
            registry=get_registry()
        )
    return _error_counter


class SolveTimer:
    """Context manager recording duration and outcome of one SDP solve."""

    def __init__(self, form: str):
        self.form = form
        self.status = "error"
        self.iterations: Optional[int] = None
        self.start_time = time.perf_counter()

    def __enter__(self) -> "SolveTimer":
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        duration = time.perf_counter() - self.start_time
        get_solve_duration_histogram().labels(form=self.form).observe(duration)
        get_solve_counter().labels(form=self.form, status=self.status).inc()
        if self.iterations is not None:
            get_solve_iterations_histogram().observe(self.iterations)
        if exc_type:
            get_error_counter().labels(
                error_type=getattr(exc_val, "error_code", exc_type.__name__),
                component="solver"
            ).inc()


def record_codeword(receiver: str, bit_errors: int, runtime_s: float) -> None:
    """Record one simulated codeword."""
    get_codeword_counter().labels(receiver=receiver).inc()
    if bit_errors > 0:
        get_bit_error_counter().labels(receiver=receiver).inc(bit_errors)
    get_codeword_runtime_histogram().labels(receiver=receiver).observe(runtime_s)


def record_error(error_type: str, component: str) -> None:
    """Record an error occurrence."""
    get_error_counter().labels(
        error_type=error_type,
        component=component
    ).inc()


def write_metrics(path: Union[str, Path]) -> None:
    """Write the registry in Prometheus text format."""
    write_to_textfile(str(path), get_registry())
    logger.info("Metrics written", path=str(path))
