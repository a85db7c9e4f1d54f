"""Simulation toolkit for arrays of driven Kerr-nonlinear oscillators.

Covers rotating-frame Hamiltonians for period-3 and period-2 phase
locking, quasi-adiabatic preparation sweeps, phase-sector POVM
measurement, symmetry-resolved spectra, and dissipative single-mode
diagnostics (steady states, Wigner distributions, drift fixed points).
"""

from .fock import (
    DensityMatrix,
    DimensionError,
    FockSpace,
    OperatorMatrix,
    StateVector,
    coherent_state,
    destroy_op,
    embed_site,
    expectation,
    fock_state,
    identity_op,
    number_op,
    partial_trace,
    vacuum_state,
)
from .model import (
    ArrayConfig,
    ClassicalExtremum,
    ExtremaResult,
    OscillatorParams,
    SweepSchedule,
    build_array_hamiltonian,
    build_single_hamiltonian,
    classical_surface,
    find_extrema,
    hamiltonian_parts,
    minima_threshold_drive,
    schedule_at,
    well_radius,
)
from .povm import ConfigProbabilities, MeasurementSet, config_probabilities, e_theta, measurement_set
from .symmetry import (
    ConfigOrbit,
    SymmetryGenerators,
    all_orbits,
    build_generators,
    config_orbit,
    symmetric_projector,
    symmetric_weight,
)
from .evolve import LeakageError, Trajectory, geometric_asymmetry, propagate_sweep
from .spectra import SpectrumResult, array_low_spectrum, dominant_orbit, perturbative_shift, single_spectrum_path
from .opensys import (
    DissipationParams,
    FixedPointReport,
    WignerGrid,
    classical_fixed_points,
    default_half_width,
    drift_velocity,
    landau_zener,
    laplacian_at_origin,
    laplacian_from_grid,
    liouvillian,
    scan_laplacian,
    semiclassical_steady_state,
    steady_state,
    three_state_inequality,
    wigner,
    wigner_points,
)

__version__ = "0.1.0"
