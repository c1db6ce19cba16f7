"""Molecular-only dynamics driven by quantum and classical light.

The package propagates a two-level emitter (Rabi model) or an ensemble of
them (Dicke model) coupled to one quantized cavity mode three ways: exact
quantum evolution of the full state, a second-order time-nonlocal reduced
master equation fed by the light-state statistics, and standard
semiclassical driving. It ships closed-form field kernels for Fock,
Fock-superposition, and squeezed-vacuum states together with a brute-force
Fock-space oracle to validate them.
"""

from ._backend import BACKEND
from ._version import __version__
from .errors import (
    CavmolError,
    ConfigError,
    DimensionMismatchError,
    GridViolationError,
    InsufficientTruncationError,
    NonHermitianError,
    StateError,
    TraceDriftError,
)
from .hilbert import (
    DensityMatrix,
    OperatorMatrix,
    SpectralPropagator,
    eigendecompose,
    evolve_unitary,
    fock_annihilation,
    partial_trace_last,
    tensor,
)
from .light import (
    FieldKernels,
    Fock,
    FockSuperposition,
    SqueezedVacuum,
    antisym_corr,
    corr_oracle,
    covariance_kernel,
    field_kernels,
    mandel_parameter,
    mean_field,
    mean_photon_number,
    quadrature_squeezing,
    required_photon_trunc,
    response_kernel,
    state_vector,
    sym_corr,
)
from .models import (
    ModelKind,
    ModelSpec,
    coupling_operator,
    default_photon_trunc,
    full_hamiltonian,
    molecular_hamiltonian,
)
from .propagators import (
    FieldChoice,
    PropagationGrid,
    TimeSeries,
    classical_field,
    default_grid,
    effective_field,
    exact_conservation,
    observables,
    propagate_exact,
    propagate_qcme,
    propagate_semiclassical,
)
from .scenarios_io import (
    RunResult,
    ScenarioConfig,
    figure_presets,
    load_config,
    preset_by_name,
    run_scenario,
    write_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
