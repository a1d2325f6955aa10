"""Periodic-box harmonic-analysis toolkit and verification lab.

Dyadic frequency decompositions, Besov/Lorentz norms, paraproduct calculus,
axisymmetric swirl-free flow geometry, a pseudo-spectral transport solver for
the angular-vorticity-over-radius scalar, and a registry of reproducible
numerical experiments auditing the estimates these objects satisfy.
"""

from .axisym import (
    AxisymProfile,
    biot_savart,
    build_profile,
    check_axisymmetry,
    dipole,
    gaussian_ring,
    radial_velocity_over_r,
    random_axisym,
    realize,
    realize_alpha,
    swirl_free_vorticity_over_r,
)
from .blocks import bernstein_ratio, decompose, delta_q, s_q
from .dynamics import (
    CFLViolation,
    DiagnosticsSeries,
    EulerRun,
    SolverConfig,
    TildeFamilyTrajectory,
    VelocityHistory,
    alpha_to_omega,
    block_decay_report,
    evolve,
    evolve_passive_scalar,
    evolve_tilde_family,
    evolve_vorticity_model,
    fit_gronwall_constant,
    transport_estimate_audit,
    velocity_from_alpha,
)
from .grid import (
    Grid,
    SpectralField,
    VectorField,
    random_band_limited,
    random_wave_packet,
)
from .io import (
    load_run,
    read_field,
    read_vector_field,
    save_run,
    write_field,
    write_vector_field,
)
from .lab import (
    REGISTRY,
    ExperimentReport,
    Scenario,
    emit_plots,
    run_scenario,
)
from .norms import (
    INF,
    BesovParams,
    LorentzParams,
    anisotropic_dilate,
    besov_norm,
    dilation_ratio,
    embedding_ratio,
    lebesgue_norm,
    lorentz_norm,
    rearrange,
)
from .operators import curl, divergence, divergence_sup, gradient, leray_project, vector_from_curl
from .paraproduct import (
    BonySplit,
    bony_split,
    commutator,
    commutator_gain_ratio,
    commutator_terms,
    dealias,
    paraproduct_summand_localization,
    remainder_divergence_check,
    stretching_norm_bound,
)
from .partition import PartitionOfUnity, build_partition

__version__ = "0.1.0"
