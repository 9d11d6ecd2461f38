"""Reduced density operators of order p and their internal/external spaces.

The p-order reduced density operator of a pure state is the restriction
of psi |- (. -| psi) to the p-particle sector; for ensembles it is the
weight-averaged sum over components.  Its nonzero-eigenvalue span is the
p-internal space, its kernel the p-external space.

The trace normalization used here is the one induced by the determinant
inner-product convention of :mod:`fermigrade.fock`: tr D^p = C(n, p) for
a normalized pure state.  This is verified against a term-by-term
interior-product evaluation in the test suite rather than assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .fock import (
    CeilingError,
    OrbitalBasis,
    StateVector,
    indices_of,
    mask_of,
    merge_sign,
)

# Dense sector matrices are refused above this size; this is a desk-scale
# verification tool, not a production chemistry code.
SECTOR_CEILING = 20_000

# Relative eigenvalue cutoff deciding "nonzero eigenvalue" in floating point.
RANK_TOL = 1e-10


@dataclass(frozen=True)
class MixedState:
    """Convex combination of normalized pure states with one particle number."""

    components: tuple[tuple[float, StateVector], ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise ValueError("mixed state needs at least one component")
        basis = self.components[0][1].basis
        n = self.components[0][1].n
        total = 0.0
        for w, psi in self.components:
            if w <= 0:
                raise ValueError(f"component weights must be positive, got {w}")
            if psi.basis != basis or psi.n != n:
                raise ValueError("all components must share one basis and particle number")
            if abs(psi.norm() - 1.0) > 1e-12:
                raise ValueError(f"component state not normalized (norm {psi.norm():.3e})")
            total += w
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {total!r}")

    @classmethod
    def pure(cls, psi: StateVector) -> "MixedState":
        return cls(((1.0, psi.normalized()),))

    @classmethod
    def mix(cls, weighted: list[tuple[float, StateVector]]) -> "MixedState":
        return cls(tuple((w, psi.normalized()) for w, psi in weighted))

    @property
    def basis(self) -> OrbitalBasis:
        return self.components[0][1].basis

    @property
    def n(self) -> int:
        return self.components[0][1].n


def as_mixed(state: StateVector | MixedState) -> MixedState:
    if isinstance(state, MixedState):
        return state
    return MixedState.pure(state)


def sector_occupations(basis: OrbitalBasis, p: int) -> list[int]:
    """Canonical (lexicographic) occupation masks of the p-particle sector."""
    if not 0 <= p <= basis.dim:
        raise ValueError(f"sector {p} outside 0..{basis.dim}")
    size = math.comb(basis.dim, p)
    if size > SECTOR_CEILING:
        raise CeilingError(
            f"p={p} sector over {basis.dim} orbitals has dimension {size}, "
            f"above the ceiling of {SECTOR_CEILING}"
        )
    return [mask_of(occ) for occ in combinations(range(1, basis.dim + 1), p)]


@dataclass(eq=False)
class RdmMatrix:
    """Dense p-order reduced density matrix over the canonical sector basis."""

    basis: OrbitalBasis
    p: int
    occs: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = self.matrix
        if np.abs(m - m.conj().T).max(initial=0.0) > 1e-12:
            raise ValueError("reduced density matrix is not Hermitian")
        if len(self.occs) and np.linalg.eigvalsh(m).min() < -1e-10:
            raise ValueError("reduced density matrix is not positive semidefinite")

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(eq=False)
class Subspace:
    """Subspace of a p-particle sector, held as orthonormal columns over the
    canonical sector occupation list."""

    basis: OrbitalBasis
    sector: int
    occs: tuple[int, ...]
    coeffs: np.ndarray  # shape (len(occs), dim), orthonormal columns
    _index: dict[int, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] != len(self.occs):
            raise ValueError("coefficient matrix shape does not match occupation list")
        if self.dim:
            gram = self.coeffs.conj().T @ self.coeffs
            if np.abs(gram - np.eye(self.dim)).max() > 1e-10:
                raise ValueError("subspace basis is not orthonormal")
        self._index = {m: i for i, m in enumerate(self.occs)}

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def vectors(self) -> list[StateVector]:
        out = []
        for k in range(self.dim):
            col = self.coeffs[:, k]
            out.append(StateVector(self.basis, self.sector, {m: col[i] for i, m in enumerate(self.occs)}))
        return out

    def coordinates(self, psi: StateVector) -> np.ndarray:
        """Column of psi over the sector occupation list."""
        if psi.basis != self.basis or psi.n != self.sector:
            raise ValueError("state does not live in this sector")
        v = np.zeros(len(self.occs), dtype=complex)
        for m, c in psi.terms.items():
            v[self._index[m]] = c
        return v

    def projection_residual(self, psi: StateVector) -> float:
        """Norm of psi minus its orthogonal projection onto the subspace."""
        v = self.coordinates(psi)
        r = v - self.coeffs @ (self.coeffs.conj().T @ v)
        return float(np.linalg.norm(r))

    def projector(self) -> np.ndarray:
        return self.coeffs @ self.coeffs.conj().T


def cross_gram(a: Subspace, b: Subspace) -> np.ndarray:
    """Matrix of overlaps between the two orthonormal bases."""
    if a.basis != b.basis or a.sector != b.sector:
        raise ValueError("subspaces live in different sectors")
    return a.coeffs.conj().T @ b.coeffs


def subspace_distance(a: Subspace, b: Subspace) -> float:
    """Frobenius distance between the orthogonal projectors."""
    if a.basis != b.basis or a.sector != b.sector:
        raise ValueError("subspaces live in different sectors")
    return float(np.linalg.norm(a.projector() - b.projector()))


def _component_block_rows(psi: StateVector, p: int, col: dict[int, int], width: int) -> np.ndarray:
    """Rows of <phi_S ^ phi_R | psi> indexed by residual occupation R,
    columns by the sector occupation S."""
    rows: dict[int, np.ndarray] = {}
    for t, c in psi.terms.items():
        for sub in combinations(indices_of(t), p):
            smask = mask_of(sub)
            rmask = t ^ smask
            row = rows.get(rmask)
            if row is None:
                row = rows[rmask] = np.zeros(width, dtype=complex)
            row[col[smask]] += merge_sign(smask, rmask) * c
    if not rows:
        return np.zeros((0, width), dtype=complex)
    return np.array([rows[k] for k in sorted(rows)], dtype=complex)


def rdm(state: StateVector | MixedState, p: int) -> RdmMatrix:
    """Assemble the p-order reduced density matrix on the canonical sector basis.

    Matrix elements are the interior-product contractions
    sum_R <theta ^ R | psi> conj(<phi ^ R | psi>), weight averaged over
    ensemble components.
    """
    mixed = as_mixed(state)
    if not 0 <= p <= mixed.n:
        raise ValueError(f"reduced order {p} outside 0..{mixed.n}")
    occs = sector_occupations(mixed.basis, p)
    col = {m: i for i, m in enumerate(occs)}
    d = np.zeros((len(occs), len(occs)), dtype=complex)
    for w, psi in mixed.components:
        m = _component_block_rows(psi, p, col, len(occs))
        d += w * (m.T @ m.conj())
    d = 0.5 * (d + d.conj().T)
    return RdmMatrix(mixed.basis, p, tuple(occs), d)


def rdm_eigensystem(state: StateVector | MixedState, p: int) -> tuple[np.ndarray, RdmMatrix, np.ndarray]:
    """Eigenvalues (descending), the density matrix, and eigenvectors (columns)."""
    dm = rdm(state, p)
    w, v = np.linalg.eigh(dm.matrix)
    order = np.argsort(w)[::-1]
    return w[order], dm, v[:, order]


def internal_space(state: StateVector | MixedState, p: int, rank_tol: float = RANK_TOL) -> Subspace:
    """Span of the eigenvectors of the p-order density matrix with eigenvalue
    above ``rank_tol`` times the largest one."""
    mixed = as_mixed(state)
    if not 1 <= p <= mixed.n:
        raise ValueError(f"internal-space order {p} outside 1..{mixed.n}")
    w, dm, v = rdm_eigensystem(mixed, p)
    cut = rank_tol * max(w[0], 0.0)
    keep = w > cut
    return Subspace(mixed.basis, p, dm.occs, v[:, keep])


def external_space(state: StateVector | MixedState, p: int, rank_tol: float = RANK_TOL) -> Subspace:
    """Kernel of the p-order density matrix, the orthogonal complement of the
    internal space inside the full sector."""
    mixed = as_mixed(state)
    if not 1 <= p <= mixed.n:
        raise ValueError(f"external-space order {p} outside 1..{mixed.n}")
    w, dm, v = rdm_eigensystem(mixed, p)
    cut = rank_tol * max(w[0], 0.0)
    keep = w <= cut
    return Subspace(mixed.basis, p, dm.occs, v[:, keep])
