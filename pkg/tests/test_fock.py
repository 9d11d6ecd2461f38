"""The exterior-algebra core: products, interior products, annihilation,
coproduct splits, and the sign conventions tying them together."""

import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fermigrade import (
    OrbitalBasis,
    StateVector,
    annihilate_sequence,
    determinant,
    indices_of,
    inner,
    interior_left,
    interior_right,
    mask_of,
    split,
    vacuum,
    wedge,
    zero_state,
)

B6 = OrbitalBasis(6)


@st.composite
def states(draw, n=None, dim=6, max_terms=3):
    basis = OrbitalBasis(dim)
    nn = n if n is not None else draw(st.integers(1, 3))
    occs = draw(
        st.lists(
            st.sampled_from(list(combinations(range(1, dim + 1), nn))),
            min_size=1,
            max_size=max_terms,
            unique=True,
        )
    )
    coeffs = draw(
        st.lists(
            st.tuples(st.floats(-2, 2), st.floats(-2, 2)),
            min_size=len(occs),
            max_size=len(occs),
        )
    )
    return StateVector.from_occupations(basis, {o: complex(a, b) for o, (a, b) in zip(occs, coeffs)})


# ---------------------------------------------------------------- wedge

def test_wedge_orders_and_signs():
    f1, f2 = determinant(B6, (1,)), determinant(B6, (2,))
    assert wedge(f1, f2).occupations() == {(1, 2): 1 + 0j}
    assert wedge(f2, f1).occupations() == {(1, 2): -1 + 0j}
    assert wedge(f1, f1).is_zero()


def test_wedge_rejects_basis_mismatch():
    with pytest.raises(ValueError, match="basis"):
        wedge(determinant(B6, (1,)), determinant(OrbitalBasis(4), (1,)))


def test_wedge_graded_anticommutativity_exhaustive():
    # every disjoint basis pair with p + q <= 8, exact integer signs
    basis = OrbitalBasis(8)
    full = (1 << 8) - 1
    for a in range(1 << 8):
        pa = a.bit_count()
        sa = StateVector(basis, pa, {a: 1.0})
        rem = full & ~a
        b = rem
        while True:
            pb = b.bit_count()
            sb = StateVector(basis, pb, {b: 1.0})
            lhs = wedge(sa, sb)
            rhs = wedge(sb, sa)
            sign = -1 if (pa * pb) & 1 else 1
            assert lhs.terms == {m: sign * c for m, c in rhs.terms.items()}
            if b == 0:
                break
            b = (b - 1) & rem


def test_wedge_associative_on_random_states():
    rng = np.random.default_rng(3)
    from conftest import random_state

    a = random_state(rng, B6, 1)
    b = random_state(rng, B6, 1)
    c = random_state(rng, B6, 2)
    assert (wedge(wedge(a, b), c) - wedge(a, wedge(b, c))).norm() < 1e-12


# ---------------------------------------------------------------- inner

def test_inner_orthonormal_occupations():
    d12, d13 = determinant(B6, (1, 2)), determinant(B6, (1, 3))
    assert inner(d12, d12) == 1
    assert inner(d12, d13) == 0
    both = StateVector.from_occupations(B6, {(1, 2): 1, (3, 4): 1})
    assert inner(both, determinant(B6, (3, 4))) == 1


def test_inner_conjugates_first_argument():
    a = StateVector.from_occupations(B6, {(1, 2): 1j})
    b = StateVector.from_occupations(B6, {(1, 2): 2.0})
    assert inner(a, b) == -2j
    assert inner(b, a) == 2j


def test_inner_rejects_sector_mismatch():
    with pytest.raises(ValueError, match="particle number"):
        inner(determinant(B6, (1,)), determinant(B6, (1, 2)))


# ---------------------------------------------------------------- interior products

def _interior_left_reference(psi, phi):
    # direct expansion of the adjointness relation over all basis residues
    basis, m = phi.basis, phi.n - psi.n
    out = zero_state(basis, m)
    for occ in combinations(range(1, basis.dim + 1), m):
        theta = determinant(basis, occ)
        out = out + inner(wedge(psi, theta), phi) * theta
    return out


def _interior_right_reference(phi, psi):
    basis, m = phi.basis, phi.n - psi.n
    out = zero_state(basis, m)
    for occ in combinations(range(1, basis.dim + 1), m):
        theta = determinant(basis, occ)
        out = out + inner(wedge(theta, psi), phi) * theta
    return out


def test_interior_left_reference_values():
    d12 = determinant(B6, (1, 2))
    assert _interior_left_reference(determinant(B6, (1,)), d12).occupations() == {(2,): 1 + 0j}
    assert interior_left(determinant(B6, (1,)), d12).occupations() == {(2,): 1 + 0j}
    assert interior_left(determinant(B6, (2,)), d12).occupations() == {(1,): -1 + 0j}
    assert interior_left(determinant(B6, (3,)), d12).is_zero()


def test_interior_right_reference_values():
    d12 = determinant(B6, (1, 2))
    assert _interior_right_reference(d12, determinant(B6, (2,))).occupations() == {(1,): 1 + 0j}
    assert interior_right(d12, determinant(B6, (2,))).occupations() == {(1,): 1 + 0j}
    assert interior_right(d12, determinant(B6, (1,))).occupations() == {(2,): -1 + 0j}
    assert interior_right(d12, determinant(B6, (3,))).is_zero()


@settings(max_examples=60, deadline=None)
@given(psi=states(n=1), phi=states(n=3), theta=states(n=2))
def test_adjointness_identities(psi, phi, theta):
    assert abs(inner(theta, interior_left(psi, phi)) - inner(wedge(psi, theta), phi)) < 1e-12
    assert abs(inner(theta, interior_right(phi, psi)) - inner(wedge(theta, psi), phi)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(psi=states(n=2), phi=states(n=3))
def test_interior_matches_reference(psi, phi):
    assert (interior_left(psi, phi) - _interior_left_reference(psi, phi)).norm() < 1e-12
    assert (interior_right(phi, psi) - _interior_right_reference(phi, psi)).norm() < 1e-12


def test_interior_sign_relation_on_basis_pairs():
    # left and right products agree up to (-1)**(p*(q-p)) on basis elements
    basis = OrbitalBasis(5)
    for q in range(1, 5):
        for t_occ in combinations(range(1, 6), q):
            for p in range(0, q + 1):
                for s_occ in combinations(t_occ, p):
                    s, t = determinant(basis, s_occ), determinant(basis, t_occ)
                    left = interior_left(s, t)
                    right = interior_right(t, s)
                    sign = -1 if (p * (q - p)) & 1 else 1
                    assert left.terms == {m: sign * c for m, c in right.terms.items()}


def test_interior_rejects_oversized_psi():
    with pytest.raises(ValueError, match="p <= q"):
        interior_left(determinant(B6, (1, 2)), determinant(B6, (1,)))


@settings(max_examples=40, deadline=None)
@given(phi=states(n=1), omega=states(n=1), psi=states(n=3))
def test_nested_interior_composition(phi, omega, psi):
    # phi -| (omega -| psi) equals (omega ^ phi) -| psi
    lhs = interior_left(phi, interior_left(omega, psi))
    rhs = interior_left(wedge(omega, phi), psi)
    assert (lhs - rhs).norm() < 1e-12


# ---------------------------------------------------------------- annihilation

def _annihilation_matrix(basis, j, n):
    # matrix of a_j from the n- to the (n-1)-particle sector, per the stated convention
    cols = [mask_of(o) for o in combinations(range(1, basis.dim + 1), n)]
    rows = [mask_of(o) for o in combinations(range(1, basis.dim + 1), n - 1)]
    ridx = {m: i for i, m in enumerate(rows)}
    mat = np.zeros((len(rows), len(cols)), dtype=complex)
    bit = 1 << (j - 1)
    for c, t in enumerate(cols):
        if t & bit:
            sign = -1 if (t & (bit - 1)).bit_count() & 1 else 1
            mat[ridx[t ^ bit], c] = sign
    return rows, cols, mat


def _annihilate_by_matrix(ops, psi):
    basis, n = psi.basis, psi.n
    cols = [mask_of(o) for o in combinations(range(1, basis.dim + 1), n)]
    vec = np.zeros(len(cols), dtype=complex)
    cidx = {m: i for i, m in enumerate(cols)}
    for m, c in psi.terms.items():
        vec[cidx[m]] = c
    occs = cols
    for k, j in enumerate(ops):
        rows, _, mat = _annihilation_matrix(basis, j, n - k)
        vec = mat @ vec
        occs = rows
    return StateVector(basis, n - len(ops), {m: v for m, v in zip(occs, vec)})


def test_annihilate_matches_matrix_oracle():
    rng = np.random.default_rng(11)
    from conftest import random_state

    for _ in range(20):
        n = int(rng.integers(1, 4))
        psi = random_state(rng, B6, n)
        q = int(rng.integers(1, n + 1))
        ops = tuple(int(x) for x in rng.choice(range(1, 7), size=q, replace=False))
        got = annihilate_sequence(ops, psi)
        want = _annihilate_by_matrix(ops, psi)
        assert (got - want).norm() < 1e-12


def test_annihilate_reference_values():
    d12 = determinant(B6, (1, 2))
    assert annihilate_sequence((1, 2), d12).occupations() == {(): 1 + 0j}
    assert annihilate_sequence((3,), d12).is_zero()
    psi = StateVector.from_occupations(B6, {(1, 2): 1, (1, 3): 1})
    assert annihilate_sequence((1,), psi).occupations() == {(2,): 1 + 0j, (3,): 1 + 0j}


def test_annihilate_repeated_index_gives_zero():
    out = annihilate_sequence((2, 2), determinant(B6, (1, 2)))
    assert out.is_zero() and out.n == 0


def test_annihilate_antisymmetric_in_the_tuple():
    psi = StateVector.from_occupations(B6, {(1, 2, 3): 1.0, (2, 3, 4): 0.5j})
    a = annihilate_sequence((1, 3), psi)
    b = annihilate_sequence((3, 1), psi)
    assert (a + b).norm() < 1e-14


@settings(max_examples=40, deadline=None)
@given(psi=states(n=3))
def test_annihilation_string_equals_left_interior(psi):
    # for an ascending index tuple the string equals the left interior
    # product with the corresponding determinant, with no extra sign
    for ops in combinations(range(1, 7), 2):
        got = annihilate_sequence(ops, psi)
        want = interior_left(determinant(psi.basis, ops), psi)
        assert (got - want).norm() < 1e-12


# ---------------------------------------------------------------- coproduct split

def test_split_reference_values():
    d12 = determinant(B6, (1, 2))
    assert split(d12, 0) == [(1 + 0j, 0, mask_of((1, 2)))]
    assert split(d12, 1) == [
        (1 + 0j, mask_of((1,)), mask_of((2,))),
        (-1 + 0j, mask_of((2,)), mask_of((1,))),
    ]
    assert split(d12, 2) == [(1 + 0j, mask_of((1, 2)), 0)]


def test_split_degree_out_of_range():
    with pytest.raises(ValueError, match="split degree"):
        split(determinant(B6, (1, 2)), 3)


@settings(max_examples=40, deadline=None)
@given(phi=states())
def test_split_rewedges_to_original_term(phi):
    # each split entry rebuilds exactly its source term: sign * left ^ right
    # has the original coefficient on the original occupation
    for m in range(0, phi.n + 1):
        for coeff, left, right in split(phi, m):
            occ = left | right
            lstate = StateVector(phi.basis, m, {left: 1.0}) if left else vacuum(phi.basis)
            rstate = StateVector(phi.basis, phi.n - m, {right: 1.0}) if right else vacuum(phi.basis)
            rebuilt = wedge(lstate, rstate)
            assert set(rebuilt.terms) == {occ}
            assert abs(coeff * rebuilt.terms[occ] - phi.terms[occ]) < 1e-14


@settings(max_examples=30, deadline=None)
@given(phi=states())
def test_split_sums_to_binomial_multiple(phi):
    for m in range(0, phi.n + 1):
        acc = zero_state(phi.basis, phi.n)
        for coeff, left, right in split(phi, m):
            lstate = StateVector(phi.basis, m, {left: 1.0}) if left else vacuum(phi.basis)
            rstate = StateVector(phi.basis, phi.n - m, {right: 1.0}) if right else vacuum(phi.basis)
            acc = acc + coeff * wedge(lstate, rstate)
        assert (acc - math.comb(phi.n, m) * phi).norm() < 1e-12


# ---------------------------------------------------------------- containers

def test_mask_helpers_validate():
    with pytest.raises(ValueError, match="strictly increasing"):
        mask_of((2, 1))
    with pytest.raises(ValueError, match="exceeds"):
        mask_of((1, 9), dim=6)
    assert indices_of(mask_of((1, 4, 6))) == (1, 4, 6)


def test_state_constructor_validates_occupations():
    with pytest.raises(ValueError, match="particles"):
        StateVector(B6, 2, {mask_of((1, 2, 3)): 1.0})
    with pytest.raises(ValueError, match="exceeds"):
        StateVector(B6, 1, {1 << 10: 1.0})
    with pytest.raises(ValueError, match="mixed particle numbers"):
        StateVector.from_occupations(B6, {(1,): 1.0, (1, 2): 1.0})


def test_norm_and_normalized():
    psi = StateVector.from_occupations(B6, {(1, 2): 3.0, (3, 4): 4.0})
    assert abs(psi.norm() - 5.0) < 1e-14
    assert abs(psi.normalized().norm() - 1.0) < 1e-14
    with pytest.raises(ValueError, match="zero state"):
        zero_state(B6, 2).normalized()


def test_tiny_coefficients_are_pruned():
    psi = StateVector.from_occupations(B6, {(1, 2): 1e-15})
    assert psi.is_zero()
