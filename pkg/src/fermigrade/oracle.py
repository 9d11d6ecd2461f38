"""Brute-force reference implementations.

Everything here validates an optimized routine elsewhere in the package,
so it stays deliberately naive: expand the full wedge, contract directly,
orthonormalize by Gram-Schmidt.  No code is shared with the paths being
validated beyond the exterior-algebra primitives.  Never optimize this
module.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .density import MixedState, Subspace, as_mixed, sector_occupations
from .fock import (
    CeilingError,
    StateVector,
    annihilate_sequence,
    determinant,
    inner,
    interior_left,
    wedge,
)
from .groups import GroupProduct, QOperator


def expand(group: GroupProduct) -> StateVector:
    """Full wedge of all factors, in order."""
    n = group.total
    if math.comb(group.basis.dim, n) > 20_000:
        raise CeilingError(f"expansion sector C({group.basis.dim},{n}) exceeds the desk-scale ceiling")
    acc = group.factors[0]
    for f in group.factors[1:]:
        acc = wedge(acc, f)
    return acc


def overlap_direct(bra: GroupProduct, ket: GroupProduct) -> complex:
    return inner(expand(bra), expand(ket))


def matelem_direct(bra: GroupProduct, op: QOperator, ket: GroupProduct) -> complex:
    """Apply each operator string to the expanded ket, creations realized
    as wedging the creation determinant on the left, then contract."""
    bex = expand(bra)
    kex = expand(ket)
    total = 0j
    for (i_tup, j_tup), lam in sorted(op.terms.items()):
        annihilated = annihilate_sequence(j_tup, kex)
        if annihilated.is_zero():
            continue
        created = wedge(determinant(op.basis, i_tup), annihilated)
        total += lam * inner(bex, created)
    return total


def _gram_schmidt(columns: list[np.ndarray], drop_tol: float = 1e-8) -> np.ndarray:
    kept: list[np.ndarray] = []
    for col in columns:
        v = col.astype(complex)
        for _ in range(2):  # re-orthogonalize once for stability
            for u in kept:
                v = v - u * (u.conj() @ v)
        nrm = np.linalg.norm(v)
        if nrm > drop_tol:
            kept.append(v / nrm)
    if not kept:
        return np.zeros((len(columns[0]) if columns else 0, 0), dtype=complex)
    return np.array(kept, dtype=complex).T


def internal_space_direct(state: StateVector | MixedState, p: int) -> Subspace:
    """Span of every residue obtained by annihilating an (n - p)-particle
    basis determinant in every component, orthonormalized."""
    mixed = as_mixed(state)
    n, basis = mixed.n, mixed.basis
    if not 1 <= p <= n:
        raise ValueError(f"internal-space order {p} outside 1..{n}")
    occs = sector_occupations(basis, p)
    index = {m: i for i, m in enumerate(occs)}
    columns = []
    for _, psi in mixed.components:
        for omega in combinations(range(1, basis.dim + 1), n - p):
            residue = interior_left(determinant(basis, omega), psi)
            if residue.is_zero():
                continue
            v = np.zeros(len(occs), dtype=complex)
            for m, c in residue.terms.items():
                v[index[m]] = c
            columns.append(v)
    coeffs = _gram_schmidt(columns)
    return Subspace(basis, p, tuple(occs), coeffs)
