"""UI module: rich console output for adaptive runs"""

from .display import AdaptDisplay

__all__ = ["AdaptDisplay"]
