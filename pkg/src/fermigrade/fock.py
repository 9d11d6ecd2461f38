"""Exterior-algebra core for fermionic states over a finite orthonormal orbital basis.

Conventions, fixed here once and relied on everywhere else:

* Orbitals are indexed 1..dim and are orthonormal by construction.
* An occupation (ordered set of occupied orbitals) is encoded as a bit
  mask, orbital ``i`` living on bit ``i - 1``.  Python integers are
  arbitrary width, so the same encoding covers any basis size; for
  dim <= 64 all mask arithmetic stays on machine words.
* Ordered occupations form an orthonormal basis of each n-particle
  sector.  There are no n! normalization prefactors anywhere.
* All reordering signs are merge signs: the parity of the permutation
  sorting the concatenation of two increasing index sequences.
* The annihilator a_j removes orbital j from an ordered occupation with
  sign (-1)**(number of occupied orbitals below j).  The string
  a_{j_q} ... a_{j_1} applies a_{j_1} first.  Its agreement with the
  left interior product is a tested theorem, not a definition.

Coefficients are complex doubles.  Magnitudes at or below COEFF_EPS are
dropped after every algebraic operation so sparse maps stay clean; every
tolerance used in tests is at least two orders of magnitude larger.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Mapping

COEFF_EPS = 1e-14


class CeilingError(RuntimeError):
    """A requested sector or expansion exceeds the desk-scale size ceiling."""


@dataclass(frozen=True)
class OrbitalBasis:
    """Finite orthonormal one-particle basis; orbitals are indexed 1..dim."""

    dim: int

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"basis dimension must be >= 1, got {self.dim}")

    def orbital_masks(self) -> list[int]:
        return [1 << i for i in range(self.dim)]


def mask_of(indices: Iterable[int], dim: int | None = None) -> int:
    """Pack strictly increasing 1-based orbital indices into a bit mask."""
    mask = 0
    last = 0
    for i in indices:
        if i <= last:
            raise ValueError(f"occupation indices must be strictly increasing, got {tuple(indices)}")
        if dim is not None and i > dim:
            raise ValueError(f"orbital index {i} exceeds basis dimension {dim}")
        mask |= 1 << (i - 1)
        last = i
    return mask


def indices_of(mask: int) -> tuple[int, ...]:
    """Unpack a bit mask into the increasing tuple of 1-based orbital indices."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length())
        mask ^= low
    return tuple(out)


def merge_sign(a: int, b: int) -> int:
    """Sign of the permutation sorting the concatenation A // B of two
    disjoint increasing index sequences given as masks."""
    sign = 1
    while a:
        low = a & -a
        if (b & (low - 1)).bit_count() & 1:
            sign = -sign
        a ^= low
    return sign


class StateVector:
    """Sparse n-particle state: a map from occupation masks to complex
    coefficients.  Treated as immutable after construction; all algebra
    returns fresh instances.

    Normalization is not an invariant.  Operations state when they
    require it.
    """

    __slots__ = ("basis", "n", "terms")

    def __init__(self, basis: OrbitalBasis, n: int, terms: Mapping[int, complex] | None = None):
        if n < 0:
            raise ValueError(f"particle number must be >= 0, got {n}")
        cleaned: dict[int, complex] = {}
        full = (1 << basis.dim) - 1
        for mask, c in (terms or {}).items():
            c = complex(c)
            if abs(c) <= COEFF_EPS:
                continue
            if mask & ~full:
                raise ValueError(f"occupation {indices_of(mask)} exceeds basis dimension {basis.dim}")
            if mask.bit_count() != n:
                raise ValueError(f"occupation {indices_of(mask)} has {mask.bit_count()} particles, expected {n}")
            cleaned[mask] = c
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", cleaned)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("StateVector is immutable")

    @classmethod
    def from_occupations(cls, basis: OrbitalBasis, terms: Mapping[Iterable[int], complex]) -> "StateVector":
        packed = {mask_of(occ, basis.dim): c for occ, c in terms.items()}
        sizes = {m.bit_count() for m in packed}
        if len(sizes) > 1:
            raise ValueError(f"mixed particle numbers in one state: {sorted(sizes)}")
        n = sizes.pop() if sizes else 0
        return cls(basis, n, packed)

    def occupations(self) -> dict[tuple[int, ...], complex]:
        return {indices_of(m): c for m, c in sorted(self.terms.items())}

    def coefficient(self, occ: Iterable[int]) -> complex:
        return self.terms.get(mask_of(occ, self.basis.dim), 0j)

    def items(self) -> Iterator[tuple[int, complex]]:
        return iter(sorted(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def norm(self) -> float:
        return sum(abs(c) ** 2 for c in self.terms.values()) ** 0.5

    def normalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm <= COEFF_EPS:
            raise ValueError("cannot normalize a zero state")
        return StateVector(self.basis, self.n, {m: c / nrm for m, c in self.terms.items()})

    def __add__(self, other: "StateVector") -> "StateVector":
        _check_compatible(self, other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0j) + c
        return StateVector(self.basis, self.n, out)

    def __sub__(self, other: "StateVector") -> "StateVector":
        return self + (-1.0) * other

    def __mul__(self, scalar: complex) -> "StateVector":
        return StateVector(self.basis, self.n, {m: c * scalar for m, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, StateVector)
            and self.basis == other.basis
            and self.n == other.n
            and self.terms == other.terms
        )

    def __repr__(self) -> str:
        body = ", ".join(f"{occ}: {c:.6g}" for occ, c in list(self.occupations().items())[:4])
        more = "" if len(self.terms) <= 4 else f", ... {len(self.terms)} terms"
        return f"StateVector(n={self.n}, dim={self.basis.dim}, {{{body}{more}}})"


def vacuum(basis: OrbitalBasis) -> StateVector:
    return StateVector(basis, 0, {0: 1.0})


def determinant(basis: OrbitalBasis, indices: Iterable[int]) -> StateVector:
    """Single ordered-occupation basis state with coefficient +1."""
    mask = mask_of(indices, basis.dim)
    return StateVector(basis, mask.bit_count(), {mask: 1.0})


def zero_state(basis: OrbitalBasis, n: int) -> StateVector:
    return StateVector(basis, n, {})


def _check_compatible(a: StateVector, b: StateVector, same_n: bool = True) -> None:
    if a.basis != b.basis:
        raise ValueError(f"orbital basis mismatch: dim {a.basis.dim} vs {b.basis.dim}")
    if same_n and a.n != b.n:
        raise ValueError(f"particle number mismatch: {a.n} vs {b.n}")


def wedge(a: StateVector, b: StateVector) -> StateVector:
    """Grassmann product.  Bilinear; on basis occupations it concatenates
    index sequences, kills repeats (Pauli principle) and reorders with the
    merge sign.  Satisfies a ^ b = (-1)**(p*q) b ^ a."""
    _check_compatible(a, b, same_n=False)
    out: dict[int, complex] = {}
    for ta, ca in a.terms.items():
        for tb, cb in b.terms.items():
            if ta & tb:
                continue
            m = ta | tb
            out[m] = out.get(m, 0j) + merge_sign(ta, tb) * ca * cb
    return StateVector(a.basis, a.n + b.n, out)


def wedge_all(factors: Iterable[StateVector]) -> StateVector:
    factors = list(factors)
    if not factors:
        raise ValueError("wedge_all needs at least one factor")
    acc = factors[0]
    for f in factors[1:]:
        acc = wedge(acc, f)
    return acc


def inner(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b>, conjugate linear in the first argument.
    Ordered occupations are orthonormal.  States from distinct particle
    sectors are rejected rather than silently treated as orthogonal."""
    _check_compatible(a, b)
    if len(a.terms) > len(b.terms):
        return sum(a.terms[m].conjugate() * c for m, c in b.terms.items() if m in a.terms)
    return sum(c.conjugate() * b.terms[m] for m, c in a.terms.items() if m in b.terms)


def interior_left(psi: StateVector, phi: StateVector) -> StateVector:
    """Left interior product psi -| phi: the unique (q-p)-particle state
    with <theta | psi -| phi> = <psi ^ theta | phi> for every theta.
    Conjugate linear in psi, linear in phi."""
    _check_compatible(psi, phi, same_n=False)
    if psi.n > phi.n:
        raise ValueError(f"interior product needs p <= q, got p={psi.n}, q={phi.n}")
    out: dict[int, complex] = {}
    for s, cs in psi.terms.items():
        csq = cs.conjugate()
        for t, ct in phi.terms.items():
            if s & ~t:
                continue
            r = t ^ s
            out[r] = out.get(r, 0j) + csq * merge_sign(s, r) * ct
    return StateVector(phi.basis, phi.n - psi.n, out)


def interior_right(phi: StateVector, psi: StateVector) -> StateVector:
    """Right interior product phi |- psi: <theta | phi |- psi> =
    <theta ^ psi | phi>.  Agrees with the left product up to the sign
    (-1)**(p*(q-p)) on basis occupations (a tested property)."""
    _check_compatible(phi, psi, same_n=False)
    if psi.n > phi.n:
        raise ValueError(f"interior product needs p <= q, got p={psi.n}, q={phi.n}")
    out: dict[int, complex] = {}
    for s, cs in psi.terms.items():
        csq = cs.conjugate()
        for t, ct in phi.terms.items():
            if s & ~t:
                continue
            r = t ^ s
            out[r] = out.get(r, 0j) + csq * merge_sign(r, s) * ct
    return StateVector(phi.basis, phi.n - psi.n, out)


def annihilate_sequence(ops: tuple[int, ...], psi: StateVector) -> StateVector:
    """Apply the annihilation string a_{j_q} ... a_{j_1} for ops = (j_1, ..., j_q).

    A repeated index gives the zero state, not an error.  Antisymmetric
    under transposition of the tuple.
    """
    q = len(ops)
    if q > psi.n:
        raise ValueError(f"cannot annihilate {q} particles from an {psi.n}-particle state")
    if len(set(ops)) != q:
        return zero_state(psi.basis, psi.n - q)
    terms = psi.terms
    for j in ops:
        if not 1 <= j <= psi.basis.dim:
            raise ValueError(f"orbital index {j} outside 1..{psi.basis.dim}")
        bit = 1 << (j - 1)
        below = bit - 1
        nxt: dict[int, complex] = {}
        for t, c in terms.items():
            if not t & bit:
                continue
            sign = -1 if (t & below).bit_count() & 1 else 1
            nxt[t ^ bit] = sign * c
        terms = nxt
    return StateVector(psi.basis, psi.n - q, terms)


def split(phi: StateVector, m: int) -> list[tuple[complex, int, int]]:
    """Coproduct split of a p-particle state at degree m.

    For every term of phi and every size-m position subset I of the term's
    index sequence, emits ``(sign * coefficient, left mask, right mask)``
    where the sign reorders the concatenation I // complement(I).  The
    conventions for the empty and full subsets (left part the scalar 1,
    respectively the whole term) fall out of the same rule with mask 0.
    """
    if not 0 <= m <= phi.n:
        raise ValueError(f"split degree {m} outside 0..{phi.n}")
    out: list[tuple[complex, int, int]] = []
    for t, c in sorted(phi.terms.items()):
        for sub in combinations(indices_of(t), m):
            left = mask_of(sub)
            right = t ^ left
            out.append((merge_sign(left, right) * c, left, right))
    return out
