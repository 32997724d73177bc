"""
📝 Logging setup for vem-adapt
Single place where loguru sinks are configured
"""

import os
import sys
import traceback
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from dotenv import load_dotenv
from loguru import logger

LOG_ENV_VAR = "VEM_ADAPT_LOG"
VALID_LEVELS = ("ERROR", "WARNING", "INFO", "DEBUG")


@dataclass
class LoggingConfig:
    """📝 Logging configuration"""
    level: str = "INFO"
    rotation: str = "10 MB"
    retention: str = "7 days"
    format: str = "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
    file_format: str = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}"


def resolve_level(level: Optional[str] = None) -> str:
    """Explicit level wins, then VEM_ADAPT_LOG (a .env file is honoured), then INFO"""
    if level is None:
        load_dotenv()
        level = os.environ.get(LOG_ENV_VAR, "info")
    level = level.upper()
    if level not in VALID_LEVELS:
        logger.warning(f"⚠️ Unknown log level '{level}', falling back to INFO")
        level = "INFO"
    return level


def configure_logging(level: Optional[str] = None,
                      log_file: Optional[Union[str, Path]] = None,
                      config: Optional[LoggingConfig] = None) -> str:
    """Replace loguru's default sink with the project's stderr (and optional file) sinks"""
    config = config or LoggingConfig()
    resolved = resolve_level(level)
    logger.remove()
    logger.add(sys.stderr, level=resolved, format=config.format, colorize=True)
    if log_file is not None:
        add_file_sink(log_file, config)
    logger.debug(f"🔧 Logging configured at {resolved}")
    return resolved


def add_file_sink(log_file: Union[str, Path], config: Optional[LoggingConfig] = None) -> int:
    """Rotating DEBUG file sink; returns the loguru handler id so callers can remove it"""
    config = config or LoggingConfig()
    return logger.add(
        str(log_file),
        level="DEBUG",
        rotation=config.rotation,
        retention=config.retention,
        format=config.file_format,
        backtrace=True,
        diagnose=False,
    )


class ErrorContext:
    """Log any exception raised inside the block under a named context, then re-raise"""

    def __init__(self, name: str, reraise: bool = True):
        self.name = name
        self.reraise = reraise

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None:
            return False
        logger.error(f"❌ {self.name} failed: {exc}")
        logger.debug("".join(traceback.format_exception(exc_type, exc, tb)))
        return not self.reraise
