"""Antisymmetrized group functions: overlaps and q-particle matrix elements.

A group function is an ordered wedge product Psi_1 ^ ... ^ Psi_r of
multi-particle factors.  Overlaps between two such products are evaluated
without ever expanding the full wedge, by peeling one bra factor at a
time: every way of drawing its particles from the ket factors contributes
a reordering sign, a coproduct split of each ket factor, and a smaller
overlap of the same shape.  Matrix elements of a q-particle operator add
one outer level that routes q particles of the ket through the operator
before the same contraction runs over r + 1 ket groups.

When the first bra factor (the active group) is q-orthogonal to the
product of the remaining ket factors (the spectator groups), every plan
drawing q or more active particles from the spectators contributes zero,
so the enumeration can skip them.  The pruned evaluators implement
exactly those reduced index ranges; their agreement with the unpruned
values, and of both with a brute-force expansion, is enforced in tests.

Plan enumeration order is fixed (lexicographic over per-factor draw
counts, then over position subsets, then over sorted occupation terms)
so results are reproducible; comparisons against oracles are tolerance
based, never bitwise.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Mapping, Sequence

from .fock import (
    OrbitalBasis,
    StateVector,
    determinant,
    indices_of,
    inner,
    merge_sign,
    split,
    vacuum,
    wedge_all,
)
from .ortho import is_p_orthogonal, max_internal_overlap


class OrthogonalityError(ValueError):
    """A declared q-orthogonality assumption failed verification."""


@dataclass(frozen=True)
class GroupProduct:
    """Ordered list of wedge factors Psi_1, ..., Psi_r over one basis."""

    factors: tuple[StateVector, ...]

    def __post_init__(self) -> None:
        if not self.factors:
            raise ValueError("group product needs at least one factor")
        basis = self.factors[0].basis
        for f in self.factors:
            if f.basis != basis:
                raise ValueError("group factors must share one orbital basis")
            if f.n < 1:
                raise ValueError("group factors must carry at least one particle")

    @classmethod
    def of(cls, *factors: StateVector) -> "GroupProduct":
        return cls(tuple(factors))

    @property
    def basis(self) -> OrbitalBasis:
        return self.factors[0].basis

    @property
    def r(self) -> int:
        return len(self.factors)

    @property
    def total(self) -> int:
        return sum(f.n for f in self.factors)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(f.n for f in self.factors)


def rotate_active(group: GroupProduct, index: int) -> tuple[GroupProduct, int]:
    """Move the factor at ``index`` to the front.

    Returns the relabeled product and the wedge reordering sign
    (-1)**(moved size * total size of the factors it crosses).
    """
    if not 0 <= index < group.r:
        raise ValueError(f"factor index {index} outside 0..{group.r - 1}")
    crossed = sum(f.n for f in group.factors[:index])
    sign = -1 if (group.factors[index].n * crossed) & 1 else 1
    factors = (group.factors[index],) + group.factors[:index] + group.factors[index + 1 :]
    return GroupProduct(factors), sign


class QOperator:
    """Hermitian q-particle operator given by coefficients over ordered
    creation/annihilation index tuples.

    Terms map (I, J) with I and J strictly increasing q-tuples to the
    coefficient of the string a+_{i1} ... a+_{iq} a_{jq} ... a_{j1}.
    Hermiticity is enforced at construction: a missing transpose entry is
    filled with the conjugate, a present one must match within 1e-12.
    """

    __slots__ = ("basis", "q", "terms")

    def __init__(self, basis: OrbitalBasis, q: int, terms: Mapping[tuple[tuple[int, ...], tuple[int, ...]], complex]):
        if q < 1:
            raise ValueError(f"operator rank must be >= 1, got {q}")
        full: dict[tuple[tuple[int, ...], tuple[int, ...]], complex] = {}
        for (i_tup, j_tup), lam in terms.items():
            i_tup, j_tup = tuple(i_tup), tuple(j_tup)
            for tup in (i_tup, j_tup):
                if len(tup) != q:
                    raise ValueError(f"index tuple {tup} does not have rank {q}")
                if any(not 1 <= x <= basis.dim for x in tup):
                    raise ValueError(f"index tuple {tup} outside 1..{basis.dim}")
                if any(a >= b for a, b in zip(tup, tup[1:])):
                    raise ValueError(f"index tuple {tup} is not strictly increasing")
            full[(i_tup, j_tup)] = complex(lam)
        for (i_tup, j_tup), lam in list(full.items()):
            mirror = (j_tup, i_tup)
            if mirror in full:
                if abs(full[mirror] - lam.conjugate()) > 1e-12:
                    raise ValueError(f"Hermiticity violated between {(i_tup, j_tup)} and {mirror}")
            else:
                full[mirror] = lam.conjugate()
        self.basis = basis
        self.q = q
        self.terms = full

    @classmethod
    def number(cls, basis: OrbitalBasis) -> "QOperator":
        """Particle-number operator: rank 1, unit diagonal coefficients."""
        return cls(basis, 1, {((i,), (i,)): 1.0 for i in range(1, basis.dim + 1)})

    def apply(self, psi: StateVector) -> StateVector:
        """Direct second-quantized action on a state of any particle number
        >= q: annihilate the J string, then create the I string, with the
        usual occupancy-parity signs."""
        if psi.n < self.q:
            raise ValueError(f"operator rank {self.q} exceeds particle number {psi.n}")
        out: dict[int, complex] = {}
        for (i_tup, j_tup), lam in sorted(self.terms.items()):
            imask = sum(1 << (i - 1) for i in i_tup)
            jmask = sum(1 << (j - 1) for j in j_tup)
            for t, c in psi.terms.items():
                if jmask & ~t:
                    continue
                reduced = t ^ jmask
                if imask & reduced:
                    continue
                sign = merge_sign(jmask, reduced) * merge_sign(imask, reduced)
                m = imask | reduced
                out[m] = out.get(m, 0j) + lam * c * sign
        return StateVector(psi.basis, psi.n, out)


def rho_sign(lengths: Sequence[int]) -> int:
    """Reordering sign for interleaved draw/remainder lengths
    (|I_1|, n_1 - |I_1|, ..., |I_r|, n_r - |I_r|): parity of
    sum over j > k of |I_j| * (n_k - |I_k|)."""
    if len(lengths) % 2:
        raise ValueError("lengths must interleave draw and remainder counts")
    if any(x < 0 for x in lengths):
        raise ValueError("lengths must be nonnegative")
    draws = lengths[0::2]
    rests = lengths[1::2]
    exponent = 0
    rest_prefix = 0
    for j in range(len(draws)):
        if j:
            exponent += draws[j] * rest_prefix
        rest_prefix += rests[j]
    return -1 if exponent & 1 else 1


def rho_twist(block_lengths: Sequence[Sequence[int]]) -> int:
    """General multi-row reordering sign.

    ``block_lengths[i][j]`` is the number of particles block (i, j) carries,
    rows i = 1..p, columns j = 1..q.  The sign is the parity of
    sum over column pairs j < l and row pairs i > k of n[k][l] * n[i][j].
    Reduces to :func:`rho_sign` for two rows (draws in row 1, remainders in
    row 2), which is tested exhaustively.
    """
    rows = [list(r) for r in block_lengths]
    if not rows:
        return 1
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("block length rows must have equal width")
    if any(x < 0 for r in rows for x in r):
        raise ValueError("block lengths must be nonnegative")
    exponent = 0
    p = len(rows)
    for j in range(width):
        for l in range(j + 1, width):
            for i in range(p):
                for k in range(i):
                    exponent += rows[k][l] * rows[i][j]
    return -1 if exponent & 1 else 1


def term_count(n: int, n1: int, q: int) -> tuple[int, int]:
    """Number of first-factor draw plans in the overlap expansion, without
    and with the q-orthogonality restriction.

    total  = C(n, n1) = sum_i C(n1, i) C(n - n1, n1 - i)
    pruned = sum over i from n1 - q + 1 to n1 of the same summand.
    """
    if not 1 <= q <= n1 <= n:
        raise ValueError(f"need 1 <= q <= n1 <= n, got q={q}, n1={n1}, n={n}")
    total = sum(math.comb(n1, i) * math.comb(n - n1, n1 - i) for i in range(0, n1 + 1))
    pruned = sum(math.comb(n1, i) * math.comb(n - n1, n1 - i) for i in range(n1 - q + 1, n1 + 1))
    return total, pruned


@dataclass
class PlanCounter:
    """Mutable tally of enumerated index-subset plans.

    ``plans`` counts draw plans at the contraction's top peel (for matrix
    elements, aggregated over outer terms); ``outer_plans`` counts the
    operator-routing plans of the outer level.
    """

    plans: int = 0
    outer_plans: int = 0


def _compositions(total: int, caps: Sequence[int], first_min: int = 0) -> Iterator[tuple[int, ...]]:
    """Lexicographic compositions of ``total`` with per-slot caps; the first
    slot is additionally bounded below by ``first_min``."""
    suffix = [0] * (len(caps) + 1)
    for i in range(len(caps) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + caps[i]

    def rec(i: int, remaining: int):
        if i == len(caps) - 1:
            lo = first_min if i == 0 else 0
            if lo <= remaining <= caps[i]:
                yield (remaining,)
            return
        lo = max(first_min if i == 0 else 0, remaining - suffix[i + 1])
        for v in range(lo, min(caps[i], remaining) + 1):
            for rest in rec(i + 1, remaining - v):
                yield (v,) + rest

    if total < 0:
        return iter(())
    return rec(0, total)


def _wedge_masks(masks: Sequence[int]) -> tuple[int, int]:
    """Wedge an ordered list of occupation masks: (mask, sign), sign 0 on
    a Pauli collision."""
    acc = 0
    sign = 1
    for m in masks:
        if acc & m:
            return 0, 0
        sign *= merge_sign(acc, m)
        acc |= m
    return acc, sign


def _count_plans(sizes: Sequence[int], comp: Sequence[int]) -> int:
    c = 1
    for cap, take in zip(sizes, comp):
        c *= math.comb(cap, take)
    return c


def _peel(bra: Sequence[StateVector], kets: Sequence[StateVector], q_first: int | None = None,
          counter: PlanCounter | None = None, threads: int = 1) -> complex:
    """Contract <B_1 ^ ... ^ B_s | X_1 ^ ... ^ X_t> by peeling B_1.

    ``q_first`` restricts the draw count from the first ket piece to
    strictly more than size(X_1) - q, the pruned range valid under the
    declared q-orthogonality.  It applies to this peel only; the recursion
    below runs unrestricted.
    """
    basis = bra[0].basis
    if len(bra) == 1:
        total = wedge_all(kets) if kets else vacuum(basis)
        return inner(bra[0], total)
    b1 = bra[0]
    sizes = [k.n for k in kets]
    first_min = 0 if q_first is None else max(0, sizes[0] - q_first + 1)
    comps = list(_compositions(b1.n, sizes, first_min))
    if counter is not None:
        counter.plans += sum(_count_plans(sizes, c) for c in comps)

    def eval_comp(comp: tuple[int, ...]) -> complex:
        inter = []
        for take, size in zip(comp, sizes):
            inter.extend((take, size - take))
        rho = rho_sign(inter)
        subtotal = 0j
        split_lists = [split(kets[j], comp[j]) for j in range(len(kets))]
        for combo in product(*split_lists):
            coeff = 1.0 + 0j
            for c, _, _ in combo:
                coeff *= c
            left_mask, left_sign = _wedge_masks([lm for _, lm, _ in combo])
            if left_sign == 0:
                continue
            amp = b1.terms.get(left_mask)
            if amp is None:
                continue
            rights = [determinant(basis, indices_of(rm)) for _, _, rm in combo if rm]
            sub = _peel(bra[1:], rights)
            if sub:
                subtotal += coeff * left_sign * amp.conjugate() * sub
        return rho * subtotal

    if threads <= 1 or len(comps) < 2:
        return sum((eval_comp(c) for c in comps), 0j)

    def worker(widx: int) -> complex:
        return sum((eval_comp(c) for c in comps[widx::threads]), 0j)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        partials = list(pool.map(worker, range(threads)))
    return sum(partials, 0j)


def _check_partition_match(bra: GroupProduct, ket: GroupProduct) -> None:
    if bra.basis != ket.basis:
        raise ValueError("bra and ket live over different orbital bases")
    if bra.total != ket.total:
        raise ValueError(f"total particle numbers differ: {bra.total} vs {ket.total}")
    if bra.sizes != ket.sizes:
        raise ValueError(
            f"factor partitions differ: {bra.sizes} vs {ket.sizes}; "
            "unequal partitions are not supported"
        )


def _spectator_product(group: GroupProduct) -> StateVector:
    if group.r == 1:
        raise ValueError("group has no spectator factors")
    return wedge_all(group.factors[1:])


def _verify_q_orthogonality(active: StateVector, spectators: StateVector, q: int, tol: float | None) -> None:
    if spectators.is_zero():
        raise OrthogonalityError("spectator product vanishes; orthogonality is undefined")
    pmax = min(active.n, spectators.n)
    if q > pmax:
        raise OrthogonalityError(f"declared grade {q} exceeds min particle number {pmax}")
    if not is_p_orthogonal(active, spectators, q, tol):
        overlap = max_internal_overlap(active, spectators, q)
        raise OrthogonalityError(
            f"declared {q}-orthogonality between active and spectator groups fails at p={q}: "
            f"max {q}-internal overlap {overlap:.3e}"
        )


def overlap_group(bra: GroupProduct, ket: GroupProduct, counter: PlanCounter | None = None,
                  threads: int = 1) -> complex:
    """Overlap of two group functions by the peel-one-factor expansion.

    Agrees with the inner product of the fully expanded wedges (tested
    against the brute-force oracle)."""
    _check_partition_match(bra, ket)
    if bra.r == 1:
        if counter is not None:
            counter.plans += 1
        return inner(bra.factors[0], ket.factors[0])
    return _peel(bra.factors, ket.factors, None, counter, threads)


def overlap_group_pruned(bra: GroupProduct, ket: GroupProduct, q: int, verify: bool = False,
                         tol: float | None = None, counter: PlanCounter | None = None,
                         threads: int = 1) -> complex:
    """Overlap under a declared q-orthogonality between the bra's first
    factor and the ket's spectator product: first-factor draw plans keeping
    fewer than n1 - q + 1 of its own particles are skipped.

    The caller asserts the orthogonality; with ``verify=True`` it is
    checked first (at the cost of building internal spaces) and an
    :class:`OrthogonalityError` names the failing order.
    """
    _check_partition_match(bra, ket)
    n1 = bra.factors[0].n
    if not 1 <= q <= n1:
        raise ValueError(f"pruning grade {q} outside 1..{n1}")
    if bra.r == 1:
        if counter is not None:
            counter.plans += 1
        return inner(bra.factors[0], ket.factors[0])
    if verify:
        _verify_q_orthogonality(bra.factors[0], _spectator_product(ket), q, tol)
    return _peel(bra.factors, ket.factors, q, counter, threads)


def _operator_routings(op: QOperator, ket: GroupProduct) -> Iterator[tuple[complex, tuple[int, ...], int]]:
    """Outer expansion of an operator acting on a group product.

    Yields ``(coefficient, kept masks per factor, routed mask)`` for every
    way of keeping n - q particles in place and routing q of them (as one
    determinant) through the operator.  The coefficient carries the
    reordering sign, the split coefficients, and the sign of wedging the
    routed parts together.
    """
    sizes = list(ket.sizes)
    keep_total = ket.total - op.q
    if keep_total < 0:
        raise ValueError(f"operator rank {op.q} exceeds particle number {ket.total}")
    for comp in _compositions(keep_total, sizes):
        inter = []
        for take, size in zip(comp, sizes):
            inter.extend((take, size - take))
        rho = rho_sign(inter)
        split_lists = [split(ket.factors[j], comp[j]) for j in range(ket.r)]
        for combo in product(*split_lists):
            coeff = rho + 0j
            for c, _, _ in combo:
                coeff *= c
            routed_mask, routed_sign = _wedge_masks([rm for _, _, rm in combo])
            if routed_sign == 0:
                continue
            yield coeff * routed_sign, tuple(lm for _, lm, _ in combo), routed_mask


def apply_operator(op: QOperator, ket: GroupProduct) -> StateVector:
    """Action of a q-particle operator on a group product, assembled from
    the outer routing expansion: kept factor parts are wedged back in
    factor order, the operator image of the routed part goes last."""
    if op.basis != ket.basis:
        raise ValueError("operator and state live over different bases")
    basis = ket.basis
    out: dict[int, complex] = {}
    image_cache: dict[int, StateVector] = {}
    for coeff, kept, routed in _operator_routings(op, ket):
        img = image_cache.get(routed)
        if img is None:
            img = image_cache[routed] = op.apply(determinant(basis, indices_of(routed)))
        if img.is_zero():
            continue
        kept_mask, kept_sign = _wedge_masks([m for m in kept if m])
        if kept_sign == 0:
            continue
        base = coeff * kept_sign
        for hmask, hc in img.terms.items():
            if kept_mask & hmask:
                continue
            m = kept_mask | hmask
            out[m] = out.get(m, 0j) + base * hc * merge_sign(kept_mask, hmask)
    return StateVector(basis, ket.total, out)


def _matelem_eval(bra: GroupProduct, op: QOperator, ket: GroupProduct, q: int | None,
                  counter: PlanCounter | None, threads: int) -> complex:
    basis = ket.basis
    total = 0j
    image_cache: dict[int, StateVector] = {}
    for coeff, kept, routed in _operator_routings(op, ket):
        if counter is not None:
            counter.outer_plans += 1
        img = image_cache.get(routed)
        if img is None:
            img = image_cache[routed] = op.apply(determinant(basis, indices_of(routed)))
        if img.is_zero():
            continue
        kets = [determinant(basis, indices_of(m)) for m in kept if m]
        kets.append(img)
        q_first = q if (q is not None and kept[0]) else None
        val = _peel(bra.factors, kets, q_first, counter, threads)
        total += coeff * val
    return total


def matelem(bra: GroupProduct, op: QOperator, ket: GroupProduct,
            counter: PlanCounter | None = None, threads: int = 1) -> complex:
    """Matrix element <bra | op | ket> through the routing-plus-peel
    expansion, without any orthogonality pruning."""
    _check_partition_match(bra, ket)
    if op.basis != ket.basis:
        raise ValueError("operator and states live over different bases")
    return _matelem_eval(bra, op, ket, None, counter, threads)


def matelem_pruned(bra: GroupProduct, op: QOperator, ket: GroupProduct, q: int,
                   verify: bool = False, tol: float | None = None,
                   counter: PlanCounter | None = None, threads: int = 1) -> complex:
    """Matrix element under a declared q-orthogonality between active and
    spectator groups.

    In every inner contraction the draw count from the first kept group
    piece is restricted to strictly more than (kept size) - q.  Equals the
    unpruned value within 1e-10 whenever the declared orthogonality holds
    (tested).  ``verify=True`` checks the declaration on both orientations
    (bra active against ket spectators and ket active against bra
    spectators, which coincide in the usual shared-spectator setting).
    """
    _check_partition_match(bra, ket)
    if op.basis != ket.basis:
        raise ValueError("operator and states live over different bases")
    n1 = bra.factors[0].n
    if not 1 <= q <= n1:
        raise ValueError(f"pruning grade {q} outside 1..{n1}")
    if verify and bra.r > 1:
        _verify_q_orthogonality(bra.factors[0], _spectator_product(ket), q, tol)
        _verify_q_orthogonality(ket.factors[0], _spectator_product(bra), q, tol)
    return _matelem_eval(bra, op, ket, q, counter, threads)
