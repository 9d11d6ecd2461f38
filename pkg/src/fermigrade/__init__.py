"""Graded orthogonality, internal spaces and Araki angles for groups of
identical fermions, over a finite orthonormal orbital basis."""

from .density import (
    MixedState,
    RdmMatrix,
    Subspace,
    as_mixed,
    cross_gram,
    external_space,
    internal_space,
    rdm,
    rdm_eigensystem,
    sector_occupations,
    subspace_distance,
)
from .fock import (
    CeilingError,
    OrbitalBasis,
    StateVector,
    annihilate_sequence,
    determinant,
    indices_of,
    inner,
    interior_left,
    interior_right,
    mask_of,
    merge_sign,
    split,
    vacuum,
    wedge,
    wedge_all,
    zero_state,
)
from .groups import (
    GroupProduct,
    OrthogonalityError,
    PlanCounter,
    QOperator,
    apply_operator,
    matelem,
    matelem_pruned,
    overlap_group,
    overlap_group_pruned,
    rho_sign,
    rho_twist,
    rotate_active,
    term_count,
)
from .ortho import (
    AngleBlock,
    AngleSpectrum,
    GradeReport,
    araki_angles,
    araki_decomposition,
    araki_operators,
    grade,
    is_p_orthogonal,
    is_strongly_orthogonal,
    max_internal_overlap,
)

__version__ = "0.1.0"

__all__ = [
    "AngleBlock",
    "AngleSpectrum",
    "CeilingError",
    "GradeReport",
    "GroupProduct",
    "MixedState",
    "OrbitalBasis",
    "OrthogonalityError",
    "PlanCounter",
    "QOperator",
    "RdmMatrix",
    "StateVector",
    "Subspace",
    "annihilate_sequence",
    "apply_operator",
    "araki_angles",
    "araki_decomposition",
    "araki_operators",
    "as_mixed",
    "cross_gram",
    "determinant",
    "external_space",
    "grade",
    "indices_of",
    "inner",
    "interior_left",
    "interior_right",
    "internal_space",
    "is_p_orthogonal",
    "is_strongly_orthogonal",
    "mask_of",
    "matelem",
    "matelem_pruned",
    "max_internal_overlap",
    "merge_sign",
    "overlap_group",
    "overlap_group_pruned",
    "rdm",
    "rdm_eigensystem",
    "rho_sign",
    "rho_twist",
    "rotate_active",
    "sector_occupations",
    "split",
    "subspace_distance",
    "term_count",
    "vacuum",
    "wedge",
    "wedge_all",
    "zero_state",
]
