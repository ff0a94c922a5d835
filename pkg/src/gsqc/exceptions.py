"""Exception hierarchy for the gsqc laboratory."""

from typing import Optional


class GSQCError(Exception):
    """Base class for all laboratory errors."""


class CircuitError(GSQCError, ValueError):
    """Invalid circuit parameters, gate assignments or circuit JSON."""


class ScheduleError(GSQCError, ValueError):
    """Schedule evaluated outside lambda in [0, 1]."""


class BasisError(GSQCError, ValueError):
    """Basis overflow, empty sector or materialisation budget exceeded."""


class OperatorError(GSQCError, ValueError):
    """Hamiltonian term with out-of-window steps or a non-unitary matrix."""


class SpectralError(GSQCError, RuntimeError):
    """Eigensolver failure or unexpected kernel dimension."""

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class GaugeError(GSQCError, ValueError):
    """Gauge or swap transformation applied to an incompatible space."""


class PathConstructionError(GSQCError, RuntimeError):
    """A path construction reached a configuration it cannot leave."""

    def __init__(self, message: str, witness: Optional[tuple] = None):
        super().__init__(message)
        self.witness = witness


class PathCertificateError(GSQCError, ValueError):
    """Certifier preconditions violated (odd vertex count, unbalanced function)."""


class EvolutionError(GSQCError, RuntimeError):
    """Time evolution exceeded its norm-drift budget."""
