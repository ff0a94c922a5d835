"""Run configuration captured from the command line."""

from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator


class LambdaGrid(BaseModel):
    """Evenly spaced lambda values parsed from "a:b:steps"."""

    start: float = Field(0.0, ge=0.0, le=1.0)
    stop: float = Field(1.0, ge=0.0, le=1.0)
    steps: int = Field(11, ge=1)

    @classmethod
    def parse(cls, text: str) -> 'LambdaGrid':
        parts = text.split(':')
        if len(parts) != 3:
            raise ValueError(f"lambda grid must look like a:b:steps, got {text!r}")
        return cls(start=float(parts[0]), stop=float(parts[1]), steps=int(parts[2]))

    def values(self) -> list[float]:
        if self.steps == 1:
            return [self.start]
        return [float(x) for x in np.linspace(self.start, self.stop, self.steps)]

    def __str__(self) -> str:
        return f"{self.start:g}:{self.stop:g}:{self.steps}"


class RunConfig(BaseModel):
    """Every input of one CLI command; the sole source of the run identifier."""

    command: str
    layout: Optional[str] = None
    M: Optional[int] = None
    n: Optional[int] = None
    circuit_file: Optional[str] = None
    lambda_grid: str = "0:1:11"
    tol: float = 1e-9
    seed: int = 0
    out: Optional[str] = None
    options: dict[str, Any] = Field(default_factory=dict)

    @field_validator('lambda_grid')
    @classmethod
    def _check_grid(cls, value: str) -> str:
        LambdaGrid.parse(value)
        return value

    @property
    def grid(self) -> LambdaGrid:
        return LambdaGrid.parse(self.lambda_grid)
