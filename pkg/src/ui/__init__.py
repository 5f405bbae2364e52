"""
UI package initialization.
"""

from src.ui.console import (
    ProgressCounter,
    display_comparison,
    display_diagnostics,
    display_error,
    display_grid_result,
    display_header,
    display_summary,
)

__all__ = [
    'ProgressCounter',
    'display_comparison',
    'display_diagnostics',
    'display_error',
    'display_grid_result',
    'display_header',
    'display_summary',
]
