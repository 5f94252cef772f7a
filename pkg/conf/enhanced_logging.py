import sys
import json
import socket
import os
import logging
import platform
from pathlib import Path
from loguru import logger

from apps import __version__

hostname = socket.gethostname()
app_name = "headwave"


def get_structured_context():
    """
    Get structured context information for logging.

    Returns:
        dict: Structured context data
    """
    return {
        "hostname": hostname,
        "app_name": app_name,
        "platform": platform.system().lower(),
        "python": platform.python_version(),
        "run": {
            "threads": os.environ.get("HEADWAVE_THREADS", "0"),
            "version": __version__,
        },
    }


def _extract_extra(record) -> dict:
    extra_data = {}
    for key, value in record["extra"].items():
        if key.startswith("_") or key in ("extra", "logger_name"):
            continue
        if isinstance(value, (str, int, float, bool, type(None))):
            extra_data[key] = value
        else:
            extra_data[key] = str(value)
    nested = record["extra"].get("extra")
    if isinstance(nested, dict):
        extra_data.update(nested)
    return extra_data


def make_json_sink(stream=None, context=None):
    """
    Build a JSON-lines sink writing one structured record per log call.

    Args:
        stream: Writable text stream (default: stderr)
        context: Static context merged into every record
    """
    context = context or get_structured_context()

    def json_sink(message):
        record = message.record
        try:
            extra_data = _extract_extra(record)
            log_entry = {
                "@timestamp": record["time"].isoformat(),
                "level": record["level"].name,
                "logger": record["extra"].get("logger_name", record["name"]),
                "message": record["message"],
                "context": context,
                "source": {
                    "file": record["file"].path if record.get("file") else None,
                    "line": record.get("line"),
                    "function": record.get("function"),
                },
                "extra": extra_data or None,
            }
            if record.get("exception"):
                log_entry["exception"] = str(record["exception"])
            (stream or sys.stderr).write(json.dumps(log_entry, default=str) + "\n")
        except Exception:
            (stream or sys.stderr).write(
                f'{record["time"].isoformat()} | {record["level"].name} | {record["message"]}\n'
            )

    return json_sink


def ensure_logs_directory(logs_dir: Path | str = "logs") -> Path:
    """Ensure the logs directory exists."""
    logs_dir = Path(logs_dir)
    logs_dir.mkdir(parents=True, exist_ok=True)
    return logs_dir


class InterceptHandler(logging.Handler):
    """Route stdlib logging records (scipy, numpy, typer) into loguru."""

    def emit(self, record):
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        frame, depth = logging.currentframe(), 2
        while frame and frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back
            depth += 1

        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


def configure_enhanced_logging(log_level="WARNING", enable_file_logging=False, log_format=None, logs_dir="logs"):
    """
    Configure loguru sinks for the CLI and library.

    Console output always goes to stderr so stdout stays reserved for
    command summaries.

    Args:
        log_level: Minimum log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        enable_file_logging: Whether to add rotating file sinks under logs_dir
        log_format: "text" or "json" (default: LOG_FORMAT env var, else text)
        logs_dir: Directory for file sinks
    """
    log_format = log_format or os.environ.get("LOG_FORMAT", "text")
    try:
        logger.remove()

        if log_format == "json":
            logger.add(make_json_sink(), level=log_level, backtrace=False, diagnose=False, catch=True)
        else:
            console_format = (
                "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | "
                "<level>{level: <8}</level> | "
                "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | "
                "<level>{message}</level>"
            )
            disable_colors = os.environ.get("NO_COLOR") == "1" or os.environ.get("TERM") == "dumb"
            if disable_colors:
                console_format = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {name}:{function}:{line} | {message}"

            logger.add(
                sys.stderr,
                format=console_format,
                level=log_level,
                colorize=not disable_colors,
                backtrace=False,
                diagnose=False,
                catch=True,
            )

        if enable_file_logging:
            logs_path = ensure_logs_directory(logs_dir)
            logger.add(
                logs_path / "headwave_{time:YYYY-MM-DD}.log",
                format="{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {name}:{function}:{line} | {message}",
                level=log_level,
                rotation="50 MB",
                retention="7 days",
                compression="gz",
            )
            logger.add(
                logs_path / "errors_{time:YYYY-MM-DD}.log",
                format="{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {name}:{function}:{line} | {message}",
                level="ERROR",
                rotation="50 MB",
                retention="90 days",
                compression="gz",
            )

        logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)
        for logger_name in ("scipy", "numpy", "py.warnings"):
            logging.getLogger(logger_name).handlers = [InterceptHandler()]
            logging.getLogger(logger_name).propagate = False
        logging.captureWarnings(True)

        logger.debug(
            "Logging configured",
            extra={"log_level": log_level, "file_logging_enabled": enable_file_logging, "format": log_format},
        )
    except Exception as exc:
        sys.stderr.write(f"Logging configuration failed: {exc}\n")
        logger.remove()
        logger.add(sys.stderr, level=log_level, format="{time} | {level} | {message}", colorize=False)


def get_logger(name: str = None):
    """
    Get a logger instance with optional name.

    Args:
        name: Logger name (typically __name__)

    Returns:
        Loguru logger instance
    """
    if name:
        return logger.bind(logger_name=name)
    return logger
