"""
Prometheus Metrics Definitions for headwave

This module defines the counters collected while forward transforms,
reconstructions and gauge checks run. The CLI prints a short summary from
them and can dump the full exposition text with --metrics-out.

Metrics Categories:
- Forward evaluation counters (by operator)
- Quadrature counters (calls, integrand evaluations, subintervals, failures)
- Reconstruction counters (points by method)
- Gauge check counters (by kind and outcome)
- Error counters (by type)
"""

from typing import Dict

from prometheus_client import (
    Counter, Histogram, Info, generate_latest,
    CONTENT_TYPE_LATEST, CollectorRegistry
)

# Create a custom registry for the application
REGISTRY = CollectorRegistry()

FORWARD_COUNTER = Counter(
    'headwave_forward_evaluations_total',
    'Total number of forward transform evaluations',
    ['operator'],
    registry=REGISTRY
)

QUADRATURE_CALLS = Counter(
    'headwave_quadrature_calls_total',
    'Total number of adaptive quadrature calls',
    ['leg'],
    registry=REGISTRY
)

QUADRATURE_EVALUATIONS = Counter(
    'headwave_quadrature_integrand_evaluations_total',
    'Total number of integrand evaluations made by adaptive quadrature',
    ['leg'],
    registry=REGISTRY
)

QUADRATURE_SUBINTERVALS = Histogram(
    'headwave_quadrature_subintervals',
    'Subintervals used per adaptive quadrature call',
    ['leg'],
    buckets=[1, 2, 4, 8, 16, 32, 64, 128, 512, 2048, 32768],
    registry=REGISTRY
)

QUADRATURE_FAILURES = Counter(
    'headwave_quadrature_failures_total',
    'Total number of quadrature calls that did not converge',
    ['leg'],
    registry=REGISTRY
)

RECONSTRUCTION_COUNTER = Counter(
    'headwave_reconstructed_points_total',
    'Total number of reconstructed profile samples',
    ['method'],
    registry=REGISTRY
)

GAUGE_CHECK_COUNTER = Counter(
    'headwave_gauge_checks_total',
    'Total number of gauge verification runs',
    ['kind', 'outcome'],
    registry=REGISTRY
)

ERROR_COUNTER = Counter(
    'headwave_errors_total',
    'Total number of domain errors raised to the CLI',
    ['error_type', 'command'],
    registry=REGISTRY
)

APP_INFO = Info(
    'headwave',
    'Application information',
    registry=REGISTRY
)

_LABELED = (
    FORWARD_COUNTER,
    QUADRATURE_CALLS,
    QUADRATURE_EVALUATIONS,
    QUADRATURE_SUBINTERVALS,
    QUADRATURE_FAILURES,
    RECONSTRUCTION_COUNTER,
    GAUGE_CHECK_COUNTER,
    ERROR_COUNTER,
)


def setup_metrics(version: str = "0.1.0") -> None:
    """
    Initialize info metrics.

    Should be called once by the CLI before running a command.
    """
    APP_INFO.info({
        'name': 'headwave',
        'version': version,
        'description': 'Head wave transform forward, inversion and gauge toolkit'
    })


def get_metrics_registry() -> CollectorRegistry:
    """
    Get the application's Prometheus metrics registry.

    Returns:
        CollectorRegistry: The metrics registry containing all application metrics
    """
    return REGISTRY


def reset_metrics() -> None:
    """Drop every recorded label set (used between CLI runs and in tests)."""
    for metric in _LABELED:
        metric.clear()


def record_forward(operator: str) -> None:
    FORWARD_COUNTER.labels(operator=operator).inc()


def record_quadrature(leg: str, evaluations: int, subintervals: int, converged: bool = True) -> None:
    """
    Record one adaptive quadrature call.

    Args:
        leg: Which integral was computed (descent, glide, ascent, line, ...)
        evaluations: Integrand evaluations reported by the integrator
        subintervals: Subintervals used by the integrator
        converged: Whether the requested tolerance was met
    """
    QUADRATURE_CALLS.labels(leg=leg).inc()
    QUADRATURE_EVALUATIONS.labels(leg=leg).inc(evaluations)
    QUADRATURE_SUBINTERVALS.labels(leg=leg).observe(subintervals)
    if not converged:
        QUADRATURE_FAILURES.labels(leg=leg).inc()


def record_reconstruction(method: str, points: int) -> None:
    RECONSTRUCTION_COUNTER.labels(method=method).inc(points)


def record_gauge_check(kind: str, passed: bool) -> None:
    GAUGE_CHECK_COUNTER.labels(kind=kind, outcome="pass" if passed else "fail").inc()


def record_error(error_type: str, command: str) -> None:
    ERROR_COUNTER.labels(error_type=error_type, command=command).inc()


def _sum_samples(sample_name: str) -> float:
    total = 0.0
    for metric in REGISTRY.collect():
        for sample in metric.samples:
            if sample.name == sample_name:
                total += sample.value
    return total


def quadrature_stats() -> Dict[str, float]:
    """
    Summarize quadrature work recorded so far.

    Returns:
        dict with calls, evaluations, subintervals, failures and forward evaluations
    """
    calls = _sum_samples('headwave_quadrature_calls_total')
    return {
        "forward_evaluations": _sum_samples('headwave_forward_evaluations_total'),
        "quadrature_calls": calls,
        "integrand_evaluations": _sum_samples('headwave_quadrature_integrand_evaluations_total'),
        "subintervals": _sum_samples('headwave_quadrature_subintervals_sum'),
        "failures": _sum_samples('headwave_quadrature_failures_total'),
    }


def generate_metrics_text() -> tuple[bytes, str]:
    """
    Render the registry in Prometheus exposition format.

    Returns:
        tuple: (metrics_data, content_type)
    """
    return generate_latest(REGISTRY), CONTENT_TYPE_LATEST
