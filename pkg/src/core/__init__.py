"""Core module: configuration, errors and logging"""

from .config import AdaptConfig, load_config
from .logging_setup import ErrorContext, configure_logging

__all__ = ["AdaptConfig", "load_config", "ErrorContext", "configure_logging"]
