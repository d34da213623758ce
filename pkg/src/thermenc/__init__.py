"""Holevo information and capacity-achieving encodings for phase-symmetric
bosonic states sent through thermal (beamsplitter) channels."""

from .analytic import (
    BoundsTable,
    bounds_table,
    fidelity,
    flat_encoding_capacity,
    flat_encoding_distribution,
    lapidoth_lower_bound,
    lossy_upper_bound,
    low_energy_approx,
    one_ring_capacity,
    optimal_state_amplitudes,
    ring_capacity,
    single_ring_threshold,
    squeezed_displaced_amplitudes,
    squeezing_db,
    squeezing_r,
    two_codeword_capacity,
    two_codeword_residual,
    two_codeword_threshold,
)
from .channel import (
    ChannelContext,
    Coherent,
    DisplacedThermal,
    PureFock,
    Resource,
    Thermal,
    UnsupportedChannelError,
    codeword_entropy,
    ring_distribution,
)
from .encoding import (
    Encoding,
    OptimalityReport,
    average_distribution,
    holevo,
    kkt_residuals,
    marginal_info_density,
)
from .fock import (
    CutoffOverflowError,
    CutoffPolicy,
    PhotonDistribution,
    default_policy,
    displaced_thermal_pmf,
    g_function,
    laguerre,
    poisson_pmf,
    shannon_entropy,
    thermal_pmf,
    upper_incomplete_gamma_int,
)
from .optimizer import (
    OptimizationError,
    OptimizerConfig,
    optimize_encoding,
    optimize_weights,
    support_transitions,
    threshold_scan,
)
from .wigner import RadialProfile, wigner_plane, wigner_radial

__version__ = "0.1.0"
