"""scatterlab: depolarization of entangled photon pairs by classical linear
scattering media — states, measures, Mueller/Kraus bridge, tomography, and
seeded sweeps, with a CLI and an HTTP service on top."""

from .channel import LocalChannel, Scenario, apply, channel_from_mueller, scatter_singlet
from .errors import (
    ConfigError,
    InvalidStateError,
    NonHermitianError,
    NonPhysicalMuellerError,
    NotPositiveError,
    ScatterLabError,
    ValidationError,
    ZeroProbabilityError,
)
from .mueller import (
    KrausSet,
    cloude_decompose,
    coherency_from_mueller,
    compose,
    depolarizer,
    diattenuator,
    is_physical,
    mueller_from_jones,
    retarder,
)
from .numerics import HermitianEig, general_eigenvalues, hermitian_eig, psd_sqrt
from .qstate import (
    GwFitResult,
    PlanePoint,
    classify_point,
    euler_unitary,
    fidelity,
    generalized_werner,
    gw_fit,
    linear_entropy,
    mems,
    mems_curve,
    mems_tangle_at,
    singlet,
    tangle,
    validate_density_matrix,
    werner,
    werner_curve,
    werner_tangle_at,
)
from .sweep import SweepConfig, SweepRecord, run_sweep
from .tomography import (
    ClippedPoint,
    CoincidenceCounts,
    MonteCarloErrors,
    ProjectorSet,
    ReconstructionResult,
    clip_to_physical,
    mle_reconstruct,
    monte_carlo_errors,
    simulate_counts,
    standard_projectors,
)

__version__ = "0.1.0"
