"""Certified numerics for circle rotations, resonance-built Cantor sets,
and the spectral side of the almost Mathieu family.

The library is organised by mechanism: exact continued-fraction frequencies
(`alpha`), integer-frame orbit geometry (`circle`), resonance strength
scans (`resonance`), nested annulus constructions (`cantor`), exact mass
splitting with a ball-vs-gauge certificate (`mass`), logarithmic gauges and
covering sums (`gauge`), and periodic-approximant spectra with states
functions, gap labels and cover transport (`amo`).  `cli` wraps everything
into reproducible artifact-producing runs.

Everything advertised here keeps one discipline: any comparison that feeds
a verdict is certified (exact rationals, or enclosures with both ends
tracked), and anything sampled takes an explicit seed.
"""

from .errors import (
    AmoFractalError,
    CardinalityViolation,
    DegenerateFit,
    DisjointnessViolation,
    InadmissibleScale,
    LadderInstability,
    MassInvariantViolation,
    PlanError,
    PrecisionExhausted,
    ScanCapExceeded,
)
from .alpha import (
    NAMED_ALPHAS,
    Alpha,
    AlphaSpec,
    ContinuedFraction,
    make_alpha,
    named_alpha,
)
from .circle import (
    CirclePoint,
    DcReport,
    DiscrepancyReport,
    FixedOrbit,
    SeparationReport,
    cf_expand,
    check_separation,
    circle_dist,
    circle_dist_bounds,
    count_in_interval,
    dc_check,
    dhat_estimate,
    norm_distance,
    orbit_point,
)
from .resonance import (
    DDeltaVerdict,
    HitRecord,
    ResonanceEstimate,
    classify_D_delta,
    psi_hits,
    resonance_ratio,
    resonance_strength,
)
from .gauge import (
    BorelCantelliReport,
    Cover,
    GaugeFunction,
    LogDimFit,
    TailReport,
    borel_cantelli_tail,
    cover_sum,
    log_dim_estimate,
    omega,
    omega_bounds,
    omega_eval,
    partial_sum,
    tail_prediction,
    tail_report,
    tail_sum,
)
from .amo import (
    AmoParams,
    GapLabel,
    HolderReport,
    IDSTable,
    LocalDimReport,
    SpectrumApprox,
    TransferProduct,
    TransportItem,
    TransportReport,
    approximant_spectrum,
    beta_of_delta,
    convergent_ladder,
    delta_of_beta,
    duality_defect,
    gap_labels,
    holder_check,
    ids,
    ids_table,
    local_dim_estimate,
    transfer_matrix,
    transport_cover,
    write_bands_csv,
    write_butterfly_csv,
    write_ids_csv,
)
from .cantor import (
    Annulus,
    AuditEntry,
    AuditReport,
    CantorNode,
    CantorTree,
    ConstructionConstants,
    LevelParams,
    Selection,
    ThinnedSelection,
    admissible_scale_floor,
    build_tree,
    cantor_point,
    choose_k,
    delta_sequence,
    faithful_constants,
    make_annulus,
    select_in_annulus,
    select_in_interval,
    thin_selection,
    toy_constants,
    toy_delta_schedule,
    tree_hash,
    tree_to_json,
    verify_tree,
    write_audit_csv,
)
from .mass import (
    MassDistribution,
    MdpCertificate,
    MdpSample,
    NodeBoundReport,
    assign_mass,
    certificate_constant,
    certificate_to_json,
    child_sum_deviation,
    distribution_to_json,
    level_inflation,
    mass_of_ball,
    mdp_certificate,
    node_bound_constant,
    node_bound_report,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "AmoFractalError", "PrecisionExhausted", "ScanCapExceeded",
    "InadmissibleScale", "CardinalityViolation", "DisjointnessViolation",
    "MassInvariantViolation", "LadderInstability", "DegenerateFit", "PlanError",
    # alpha
    "AlphaSpec", "ContinuedFraction", "Alpha", "named_alpha", "make_alpha",
    "NAMED_ALPHAS",
    # circle
    "CirclePoint", "FixedOrbit", "cf_expand", "orbit_point", "circle_dist",
    "circle_dist_bounds", "norm_distance", "SeparationReport",
    "check_separation", "DiscrepancyReport", "count_in_interval",
    "dhat_estimate", "DcReport", "dc_check",
    # resonance
    "ResonanceEstimate", "resonance_strength", "resonance_ratio", "HitRecord",
    "psi_hits", "DDeltaVerdict", "classify_D_delta",
    # gauge
    "omega", "omega_bounds", "GaugeFunction", "Cover", "omega_eval",
    "cover_sum", "tail_sum", "tail_prediction", "partial_sum", "TailReport",
    "tail_report", "BorelCantelliReport", "borel_cantelli_tail", "LogDimFit",
    "log_dim_estimate",
    # amo
    "AmoParams", "TransferProduct", "transfer_matrix", "SpectrumApprox",
    "approximant_spectrum", "duality_defect", "IDSTable", "ids_table", "ids",
    "GapLabel", "gap_labels", "HolderReport", "holder_check", "delta_of_beta",
    "beta_of_delta", "LocalDimReport", "local_dim_estimate",
    "convergent_ladder", "TransportItem", "TransportReport", "transport_cover",
    "write_bands_csv", "write_ids_csv", "write_butterfly_csv",
    # cantor
    "Annulus", "ConstructionConstants", "LevelParams", "Selection",
    "ThinnedSelection", "CantorNode", "CantorTree", "AuditEntry",
    "AuditReport", "delta_sequence", "faithful_constants", "toy_constants",
    "toy_delta_schedule", "make_annulus", "select_in_interval",
    "select_in_annulus", "thin_selection", "admissible_scale_floor",
    "choose_k", "build_tree", "cantor_point", "verify_tree",
    "write_audit_csv", "tree_to_json", "tree_hash",
    # mass
    "MassDistribution", "MdpSample", "MdpCertificate", "NodeBoundReport",
    "assign_mass", "child_sum_deviation", "node_bound_constant",
    "level_inflation", "certificate_constant", "node_bound_report",
    "mass_of_ball", "mdp_certificate", "distribution_to_json",
    "certificate_to_json",
]
