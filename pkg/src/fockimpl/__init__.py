"""Finite truncations of quasi-free endomorphisms with explicit implementers.

The package realizes, at finite mode number, the structure theory of
Bogoliubov transformations of the selfdual CAR and CCR algebras: criteria
for implementability on Fock space, canonical decomposition of a map into a
pure rotation and a diagonal shift part, explicit families of isometric
implementers obeying Cuntz relations, their statistics and charge data, and
a small set of worked truncation experiments exposed through a CLI.
"""

from .selfdual import (
    CAR,
    CCR,
    BogoliubovMap,
    IndexData,
    NumericalValidityError,
    PreconditionError,
    ResourceError,
    SelfdualSpace,
    StructuralError,
    ValidationReport,
    components,
    conjugate_operator,
    deterministic_onb,
    diagonal_embedding,
    index_data,
    kappa_adjoint,
    kernel_basis,
    load_operator,
    operator_from_dict,
    operator_to_dict,
    pseudo_inverse,
    save_operator,
    validate,
)
from .car_structure import (
    CanonicalCarData,
    FockStateParamCAR,
    SpectralProfile,
    canonical_T_h,
    chi_character,
    decompose,
    equivalence_diagnostic,
    param_to_projection,
    projection_to_param,
    purity_class,
    rotation_U_T,
    rotation_U_h,
    spectral_profile,
    state_operator,
)
from .car_fock import (
    CuntzReport,
    FockRep,
    FockSpaceCAR,
    ImplementerFamily,
    WickBlocks,
    bosonized_statistics,
    build_rep,
    central_state,
    decomposition_subspaces,
    hamiltonian_from_T,
    implementers,
    lambda_multiplicative,
    left_inverse,
    matrix_units,
    multi_indices_strict,
    param_to_vector,
    verify_cuntz,
    wick_exponential,
)
from .ccr_structure import (
    CanonicalCcrData,
    FockStateParamCCR,
    Z_from_projection,
    canonical_pV,
    decompose_ccr,
    moebius_action,
    projection_from_Z,
    rotation_U_Z,
    validate_ccr,
)
from .ccr_fock import (
    CcrFamilyReport,
    FockRepCCR,
    FockSpaceCCR,
    ImplementerFamilyCCR,
    WickBlocksCCR,
    build_rep_ccr,
    decomposition_subspaces_ccr,
    hamiltonian_from_Z,
    implementers_ccr,
    lambda_multiplicative_ccr,
    multi_indices_weak,
    verify_ccr_family,
    weyl,
    wick_exponential_ccr,
)
from .experiments import (
    HS_BOUND_MINUS_PLUS,
    HS_BOUND_PLUS_MINUS,
    DiracLadder,
    DiracLadderRow,
    DiracTruncation,
    LocalizationReport,
    LocalizationSample,
    build_dirac_v,
    build_example_ex2_u,
    build_example_vphi,
    dirac_hs_ladder,
    dirac_truncation,
    localization_check,
    off_interval_sample,
    run_example_ex2,
    run_example_vphi,
)
from .gauge import (
    ChargeReportCAR,
    ChargeReportCCR,
    GaugeElement,
    GaugeInvarianceReport,
    charge_conjugation,
    charge_decomposition_car,
    charge_decomposition_ccr,
    charge_operator,
    charge_projection,
    conjugate_car,
    is_gauge_invariant,
    second_quantize,
    u1_charge,
    u1_element,
)

__version__ = "0.1.0"
