"""Laboratory services."""

from .adiabatic_service import AdiabaticService
from .basis_service import BasisService
from .certificate_service import CertificateService
from .circuit_service import CircuitService
from .gauge_service import GaugeService
from .graph_service import GraphService
from .groundstate_service import GroundStateService
from .hamiltonian_service import HamiltonianService
from .path_service import PathService
from .spectra_service import SpectraService
from .verify_service import VerifyService

__all__ = [
    'AdiabaticService',
    'BasisService',
    'CertificateService',
    'CircuitService',
    'GaugeService',
    'GraphService',
    'GroundStateService',
    'HamiltonianService',
    'PathService',
    'SpectraService',
    'VerifyService',
]
