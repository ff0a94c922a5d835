"""Data models."""

from .circuit import Circuit, Gate, Layout, ValidationReport, Violation
from .run_config import LambdaGrid, RunConfig

__all__ = [
    'Circuit',
    'Gate',
    'Layout',
    'ValidationReport',
    'Violation',
    'LambdaGrid',
    'RunConfig',
]
