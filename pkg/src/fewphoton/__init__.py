"""Few-photon scattering amplitudes for waveguide-coupled emitter systems.

The package computes one-, two- and three-photon S-matrix elements for small
quantum systems attached to one-dimensional waveguides. Scattering is driven
by an effective non-Hermitian Hamiltonian that is block-diagonal over total
excitation number; connected amplitudes come from sums over diagrams (ballot
paths of creations and annihilations) whose propagators are resolvents in
the biorthogonal eigenbasis of each block.
"""

from ._version import __version__
from .config import BUILDERS, LoadedConfig, load_config, parse_config
from .diagrams import (
    Diagram,
    ascii_profile,
    diagram_label,
    enumerate_diagrams,
    parse_label,
)
from .errors import (
    ConfigError,
    DefectiveHamiltonian,
    FewphotonError,
    GridTooCoarse,
    InstabilityDetected,
    NonFinite,
)
from .fockspace import (
    BOSON,
    TWO_LEVEL,
    Hop,
    Manifold,
    ModeSpec,
    OperatorBlock,
    Port,
    SystemSpec,
    build_manifold,
    effective_hamiltonian_block,
    excitation_cap,
)
from .greens import (
    ConnectedAmplitude,
    ScatterConfig,
    connected_batch,
    connected_green,
    default_eta,
    evaluate_diagram,
)
from .maps import (
    GridJob,
    PeakReport,
    find_peaks,
    find_peaks_grid,
    fwhm,
    job_from_metadata,
    read_gmap,
    run_gmap,
)
from .models import (
    CollocatedParams,
    DimerAnalytics,
    build_bose_hubbard,
    build_collocated,
    build_two_level,
    coll_eigenvalues,
    coll_four_point,
    coll_one_photon_g,
    dimer_peaks,
    dimer_probe_energy,
    tl_green_2m,
    tl_one_photon,
    tl_two_photon_connected,
)
from .smatrix import (
    SMatrixTerm,
    Wavepacket,
    cluster_terms,
    one_photon_S,
    two_photon_density,
    two_photon_grid,
    wavepacket_output,
)
from .spectral import Spectrum, decompose, decompose_all

__all__ = [
    "__version__",
    "BUILDERS",
    "LoadedConfig",
    "load_config",
    "parse_config",
    "Diagram",
    "ascii_profile",
    "diagram_label",
    "enumerate_diagrams",
    "parse_label",
    "ConfigError",
    "DefectiveHamiltonian",
    "FewphotonError",
    "GridTooCoarse",
    "InstabilityDetected",
    "NonFinite",
    "BOSON",
    "TWO_LEVEL",
    "Hop",
    "Manifold",
    "ModeSpec",
    "OperatorBlock",
    "Port",
    "SystemSpec",
    "build_manifold",
    "effective_hamiltonian_block",
    "excitation_cap",
    "ConnectedAmplitude",
    "ScatterConfig",
    "connected_batch",
    "connected_green",
    "default_eta",
    "evaluate_diagram",
    "GridJob",
    "PeakReport",
    "find_peaks",
    "find_peaks_grid",
    "fwhm",
    "job_from_metadata",
    "read_gmap",
    "run_gmap",
    "CollocatedParams",
    "DimerAnalytics",
    "build_bose_hubbard",
    "build_collocated",
    "build_two_level",
    "coll_eigenvalues",
    "coll_four_point",
    "coll_one_photon_g",
    "dimer_peaks",
    "dimer_probe_energy",
    "tl_green_2m",
    "tl_one_photon",
    "tl_two_photon_connected",
    "SMatrixTerm",
    "Wavepacket",
    "cluster_terms",
    "one_photon_S",
    "two_photon_density",
    "two_photon_grid",
    "wavepacket_output",
    "Spectrum",
    "decompose",
    "decompose_all",
]
