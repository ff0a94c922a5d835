"""Command-line interface for the gsqc laboratory."""

from .commands import main

__all__ = ['main']
