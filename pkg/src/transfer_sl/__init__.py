"""Direct and inverse Sturm-Liouville problems with a transfer condition at x=0."""

from .errors import (
    ConfigurationError,
    ConvergenceError,
    InsufficientDataError,
    MissedRootError,
    NotAnEigenvalueError,
    PoleProximityError,
    PropagationOverflowError,
    SimplicityViolatedError,
    TransferSLError,
)
from .problem import (
    BoundaryAngles,
    Problem,
    SpectralDataset,
    SpectralParameter,
    StateMatrix,
    load_problem,
    save_problem,
)
from .propagation import full_propagator, propagate, wronskian_drift
from .spectral import (
    NEUMANN_DIRICHLET,
    NEUMANN_NEUMANN,
    delta,
    eigenvalues,
    fundamental_solution,
    m_function,
    norming_constant,
    residue,
    spectrum,
    v_solution,
)
from .inverse import (
    MittagLefflerModel,
    TwoSpectraInput,
    constant_C,
    hadamard_ratio,
    m_from_norming,
    m_from_two_spectra,
    m_prime_at_zero,
)
from .scattering import (
    ForwardAB,
    JostPair,
    ScatteringData,
    bound_states,
    jost,
    neumann_data_from_scattering,
    recover_W_at_S,
    reflection,
    scattering_coefficients,
)

__version__ = "0.1.0"
