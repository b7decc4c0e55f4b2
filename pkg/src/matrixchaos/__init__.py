"""Quantum Poincaré maps, Poincaré-Markov maps and Lyapunov exponents of Hermitian matrices."""

from .errors import *  # noqa: F401,F403
from .hermitian_graph import (
    GershgorinData,
    GraphStructure,
    HermitianMatrix,
    PolarEntries,
    bipartition,
    build_graph,
    gershgorin,
    is_bipartite,
    load_matrix,
    polar_entries,
)
from .quantum_poincare import (
    QuantumMap,
    SecularValue,
    SpectrumRoot,
    VertexScattering,
    assemble_U,
    bipartite_reduce,
    find_spectrum,
    fixed_point,
    gershgorin_window,
    reconstruct_wavefunction,
    secular,
    vertex_sigma,
)
from .markov_map import MarkovMap, MarkovSpectrum, build_B, evolve, return_probability, spectrum_B
from .lyapunov import (
    LyapunovReport,
    ThermoCurve,
    VarianceReport,
    large_E_decay,
    local_lyapunov,
    lyapunov_bounds,
    lyapunov_report,
    mc_lyapunov,
    mean_lyapunov,
    q_matrix,
    thermo_lyapunov,
    variance_lyapunov,
)
from .otoc import coef_bound, enumerate_trajectories, otoc_norm, path_count, trajectory_sums

__version__ = "0.1.0"
