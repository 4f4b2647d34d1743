"""Certified k-way spectral partitioning of step graphons.

The library computes the degree-normalized spectrum of a step graphon,
rounds the spectral embedding into k disjoint low-expansion sets through a
randomized shifted-grid construction, and verifies an explicit two-sided
bound relating the k-th eigenvalue to the k-way expansion constant:

    lambda_k / 2  <=  h(k)  <=  sqrt(8000) * k^3.5 * sqrt(lambda_k).

Every intermediate inequality (grid separation, merged masses, localized
Rayleigh quotients, sweep bounds) is asserted on the computed values.
"""

from .errors import (
    AsymmetricError,
    BlockMisalignmentError,
    CertificateError,
    DimensionMismatchError,
    DisconnectedError,
    EmptySetError,
    GraphonError,
    IndexOutOfRangeError,
    InsufficientSetsError,
    KTooLargeError,
    MassError,
    MassShortfallError,
    NonSquareError,
    NonUnitVectorError,
    OverlappingSetsError,
    ParseError,
    SeparationError,
    TooLargeError,
    ValueOutOfRangeError,
    ZeroDegreeCellError,
    ZeroFunctionError,
    ZeroVolumeError,
)
from .estimator import GraphonKWayPartition
from .graphon import (
    CellSet,
    StepGraphon,
    VertexFunction,
    eta,
    expansion,
    indicator,
    inner_v,
    new_graphon,
    nu,
    rayleigh,
)
from .io import canonical_json, load_graphon, save_graphon_json
from .partition import (
    GridShift,
    LocalizationReport,
    LocalizedFamily,
    SeparatedFamily,
    SweepStep,
    distance_to_set,
    grid_side,
    localize,
    localized_rayleigh_certificate,
    merge_to_k,
    radial_distance,
    sample_shift,
    separated_family,
    separation_threshold,
    set_mass,
    shifted_grid_family,
    sweep_cut,
    sweep_profile,
)
from .pipeline import (
    DEFAULT_ORACLE_LIMIT,
    UPPER_BOUND_FACTOR,
    BuserReport,
    Check,
    OracleResult,
    PartitionResult,
    VerifyReport,
    brute_force_hk,
    buser_check,
    k_way_partition,
    refine,
    verify_theorem,
)
from .presets import KernelPreset, discretize_preset, parse_preset
from .spectral import (
    Embedding,
    SpectralBasis,
    build_embedding,
    eigen_k,
    lambda_k_graphon,
    normalized_operator,
    spread_check,
)

__version__ = "0.1.0"

__all__ = [
    "AsymmetricError",
    "BlockMisalignmentError",
    "BuserReport",
    "CellSet",
    "CertificateError",
    "Check",
    "DEFAULT_ORACLE_LIMIT",
    "DimensionMismatchError",
    "DisconnectedError",
    "Embedding",
    "EmptySetError",
    "GraphonError",
    "GraphonKWayPartition",
    "GridShift",
    "IndexOutOfRangeError",
    "InsufficientSetsError",
    "KTooLargeError",
    "KernelPreset",
    "LocalizationReport",
    "LocalizedFamily",
    "MassError",
    "MassShortfallError",
    "NonSquareError",
    "NonUnitVectorError",
    "OracleResult",
    "OverlappingSetsError",
    "ParseError",
    "PartitionResult",
    "SeparatedFamily",
    "SeparationError",
    "SpectralBasis",
    "StepGraphon",
    "SweepStep",
    "TooLargeError",
    "UPPER_BOUND_FACTOR",
    "ValueOutOfRangeError",
    "VerifyReport",
    "VertexFunction",
    "ZeroDegreeCellError",
    "ZeroFunctionError",
    "ZeroVolumeError",
    "brute_force_hk",
    "build_embedding",
    "buser_check",
    "canonical_json",
    "discretize_preset",
    "distance_to_set",
    "eigen_k",
    "eta",
    "expansion",
    "grid_side",
    "indicator",
    "inner_v",
    "k_way_partition",
    "lambda_k_graphon",
    "load_graphon",
    "localize",
    "localized_rayleigh_certificate",
    "merge_to_k",
    "new_graphon",
    "normalized_operator",
    "nu",
    "parse_preset",
    "radial_distance",
    "rayleigh",
    "refine",
    "sample_shift",
    "save_graphon_json",
    "separated_family",
    "separation_threshold",
    "set_mass",
    "shifted_grid_family",
    "spread_check",
    "sweep_cut",
    "sweep_profile",
    "verify_theorem",
]
