"""Secret key rates of CV-MDI-QKD with (photon-subtracted) two-mode squeezed states."""

__version__ = "0.1.0"

from .channel import LinkBudget, OneWayChannel, one_way_reduce, transmissivity_from_distance  # noqa: E402
from .errors import (  # noqa: E402
    CutoffError,
    CvmdiError,
    NoBracketError,
    PhysicsError,
    UnphysicalStateError,
    VanishingPostSelectionError,
)
from .fock import FockAmplitudes, build_tmsc, moments, resolve_cutoff, subtract_photon  # noqa: E402
from .gaussian import (  # noqa: E402
    entropy_g,
    heterodyne_condition,
    mutual_information,
    symplectic_eigenvalues,
    von_neumann_entropy,
)
from .keyrate import KeyRateBreakdown, holevo_bound, propagate, secret_key_rate  # noqa: E402
from .optimize import (  # noqa: E402
    OptBox,
    OptResult,
    frontier,
    max_distance,
    optimal_parameter_trace,
    optimize_key_rate,
    scan_variance,
)
from .states import Family, StateSpec  # noqa: E402
