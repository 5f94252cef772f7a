from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

import typer

from apps import __version__
from apps.core.config import load_run_config
from apps.core.exceptions import AssumptionViolation, HeadwaveError, ResidualExceeded, VerificationFailed
from apps.core.service import run_check, run_forward, run_gauge, run_invert, run_verify
from apps.metrics import generate_metrics_text, record_error, setup_metrics
from conf.enhanced_logging import configure_enhanced_logging, get_logger
from conf.settings import get_settings

logger = get_logger(__name__)

cli = typer.Typer(
    help="Head wave transform: forward sweeps, inversions, gauge constructions and self-checks.",
    no_args_is_help=True,
)

CONFIG_OPTION = typer.Option(..., "--config", "-c", help="Run config (INI)")
METRICS_OPTION = typer.Option(None, "--metrics-out", help="Write Prometheus metrics text here")
LOG_LEVEL_OPTION = typer.Option(None, "--log-level", help="Override LOG_LEVEL for this run")


def _setup(log_level: Optional[str]) -> None:
    settings = get_settings()
    configure_enhanced_logging(
        log_level=(log_level or settings.LOG_LEVEL).upper(),
        enable_file_logging=settings.ENABLE_FILE_LOGGING,
        log_format=settings.LOG_FORMAT,
    )
    setup_metrics(__version__)


@contextmanager
def _command(name: str, log_level: Optional[str], metrics_out: Optional[Path]) -> Iterator[None]:
    """
    Run one command body: domain errors become `error: ...` on stderr and their exit code.
    """
    _setup(log_level)
    try:
        yield
    except HeadwaveError as exc:
        record_error(type(exc).__name__, name)
        logger.error(f"{name} failed: {exc}")
        if isinstance(exc, AssumptionViolation) and exc.report is not None:
            typer.echo(exc.report.to_text(), err=True)
        typer.echo(f"error: {exc}", err=True)
        raise typer.Exit(code=exc.exit_code)
    finally:
        if metrics_out is not None:
            payload, _ = generate_metrics_text()
            Path(metrics_out).write_bytes(payload)


@cli.command()
def forward(
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Data CSV (default: output.data)"),
    threads: Optional[int] = typer.Option(None, "--threads", min=1, help="Sweep workers"),
    metrics_out: Optional[Path] = METRICS_OPTION,
    log_level: Optional[str] = LOG_LEVEL_OPTION,
):
    """
    Sweep the forward transform over the config grid and write the data CSV.
    """
    with _command("forward", log_level, metrics_out):
        summary = run_forward(load_run_config(config), out, threads)
        typer.echo(summary.to_text())


@cli.command()
def invert(
    config: Path = CONFIG_OPTION,
    data: Optional[Path] = typer.Option(None, "--data", "-d", help="Data CSV (default: output.data)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Reconstruction CSV (default: output.recon)"),
    total_integral: Optional[float] = typer.Option(None, "--total-integral", help="∫f̃, or every line integral"),
    method: Optional[str] = typer.Option(None, "--method", "-m", help="Inversion formula (default: invert.method)"),
    override_hash: bool = typer.Option(False, "--override-hash", help="Invert data written for another scene"),
    metrics_out: Optional[Path] = METRICS_OPTION,
    log_level: Optional[str] = LOG_LEVEL_OPTION,
):
    """
    Reconstruct the profile from forward data.
    """
    with _command("invert", log_level, metrics_out):
        summary = run_invert(load_run_config(config), data, out, total_integral, method, override_hash)
        if summary.hash_overridden:
            typer.echo("warning: scene hash mismatch ignored (--override-hash)", err=True)
        typer.echo(summary.to_text())


@cli.command()
def gauge(
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Report file (default: output.report)"),
    metrics_out: Optional[Path] = METRICS_OPTION,
    log_level: Optional[str] = LOG_LEVEL_OPTION,
):
    """
    Build a kernel element from the [gauge] potential and report its residuals.
    """
    with _command("gauge", log_level, metrics_out):
        outcome = run_gauge(load_run_config(config), out)
        typer.echo(f"field = {outcome.field}")
        typer.echo(outcome.report.to_text(), nl=False)
        exceeded = outcome.report.exceeded()
        if exceeded:
            raise ResidualExceeded(f"{exceeded[0]} above its threshold", exceeded=exceeded)


@cli.command()
def verify(
    config: Path = CONFIG_OPTION,
    data: Optional[Path] = typer.Option(None, "--data", "-d", help="Also check this data CSV"),
    metrics_out: Optional[Path] = METRICS_OPTION,
    log_level: Optional[str] = LOG_LEVEL_OPTION,
):
    """
    Run the self-consistency checks and print one row per check.
    """
    with _command("verify", log_level, metrics_out):
        suite = run_verify(load_run_config(config), data)
        typer.echo(suite.to_text())
        failure = suite.first_failure()
        if failure is not None:
            raise VerificationFailed(f"check {failure.name} failed", check=failure.name)


@cli.command()
def check(
    config: Path = CONFIG_OPTION,
    metrics_out: Optional[Path] = METRICS_OPTION,
    log_level: Optional[str] = LOG_LEVEL_OPTION,
):
    """
    Print every assumption verdict for the config's scene.
    """
    with _command("check", log_level, metrics_out):
        report = run_check(load_run_config(config))
        typer.echo(report.to_text())
        if not report.holds:
            raise AssumptionViolation(f"scene fails {report.failed()[0].name}")
