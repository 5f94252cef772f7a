"""
Prometheus Metrics Module for headwave

Counters for forward evaluations, quadrature work, reconstructions, gauge
checks and errors, collected in a private registry.

Exports:
    - get_metrics_registry: Function to get the Prometheus registry
    - setup_metrics: Function to initialize info metrics
    - quadrature_stats: Summary dict used by the CLI
"""

from .base import (
    FORWARD_COUNTER,
    QUADRATURE_CALLS,
    QUADRATURE_FAILURES,
    RECONSTRUCTION_COUNTER,
    GAUGE_CHECK_COUNTER,
    ERROR_COUNTER,
    generate_metrics_text,
    get_metrics_registry,
    quadrature_stats,
    record_error,
    record_forward,
    record_gauge_check,
    record_quadrature,
    record_reconstruction,
    reset_metrics,
    setup_metrics
)

__all__ = [
    "FORWARD_COUNTER",
    "QUADRATURE_CALLS",
    "QUADRATURE_FAILURES",
    "RECONSTRUCTION_COUNTER",
    "GAUGE_CHECK_COUNTER",
    "ERROR_COUNTER",
    "generate_metrics_text",
    "get_metrics_registry",
    "quadrature_stats",
    "record_error",
    "record_forward",
    "record_gauge_check",
    "record_quadrature",
    "record_reconstruction",
    "reset_metrics",
    "setup_metrics"
]

__version__ = "0.1.0"
