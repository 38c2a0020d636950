"""Single-photon transport through emitter arrays coupled to a 1D waveguide.

Rates are in units of a reference waveguide decay rate, the group velocity is
1, so times are in 1/Gamma and lengths in v_g/Gamma.
"""

from .errors import (
    ConfigError,
    MissingDriveError,
    NumericalError,
    SingularSeparationError,
    ValidationError,
    WgqedError,
)
from .model import (
    EmitterArray,
    EmitterParams,
    GaussianPulse,
    Scenario,
    TabulatedSpectrum,
    UnitSystem,
    gaussian_spectrum,
)
from .coupling import (
    CollectiveMode,
    CouplingMatrices,
    build_couplings,
    collective_modes,
    nonwaveguide_coupling,
)
from .dynamics import AmplitudeTrajectory, drive, evolve, excitation_probabilities
from .spectra import (
    SpectrumGrid,
    decay_spectra,
    m_matrix,
    scattering_spectra,
    solve_chi,
    waveguide_branching,
)
from .analysis import (
    PeakCatalogue,
    SpectrumDifference,
    conservation_audit,
    coupling_transition_sweep,
    find_peaks,
    spectrum_difference,
)

__version__ = "0.1.0"

__all__ = [
    "AmplitudeTrajectory",
    "CollectiveMode",
    "ConfigError",
    "CouplingMatrices",
    "EmitterArray",
    "EmitterParams",
    "GaussianPulse",
    "MissingDriveError",
    "NumericalError",
    "PeakCatalogue",
    "Scenario",
    "SingularSeparationError",
    "SpectrumDifference",
    "SpectrumGrid",
    "TabulatedSpectrum",
    "UnitSystem",
    "ValidationError",
    "WgqedError",
    "build_couplings",
    "collective_modes",
    "conservation_audit",
    "coupling_transition_sweep",
    "decay_spectra",
    "drive",
    "evolve",
    "excitation_probabilities",
    "find_peaks",
    "gaussian_spectrum",
    "m_matrix",
    "nonwaveguide_coupling",
    "scattering_spectra",
    "solve_chi",
    "spectrum_difference",
    "waveguide_branching",
]
