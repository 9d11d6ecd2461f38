"""Shared builders for randomized instances."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from fermigrade import GroupProduct, MixedState, OrbitalBasis, QOperator, StateVector


def random_state(rng, basis, n, orbitals=None, max_terms=3, real=False):
    """Random sparse n-particle state supported on the given orbitals."""
    orbitals = list(orbitals) if orbitals is not None else list(range(1, basis.dim + 1))
    occs = list(combinations(orbitals, n))
    picks = rng.choice(len(occs), size=min(max_terms, len(occs)), replace=False)
    terms = {}
    for k in picks:
        c = rng.normal() if real else complex(rng.normal(), rng.normal())
        terms[occs[k]] = c
    return StateVector.from_occupations(basis, terms)


def random_mixed(rng, basis, n, orbitals=None, components=2, max_terms=3):
    comps = []
    weights = rng.dirichlet(np.ones(components))
    for w in weights:
        comps.append((float(w), random_state(rng, basis, n, orbitals, max_terms)))
    return MixedState.mix(comps)


def random_state_or_mixed(rng, basis, n, orbitals=None, max_terms=3):
    if rng.integers(3) == 0:
        return random_mixed(rng, basis, n, orbitals, max_terms=max_terms)
    return MixedState.pure(random_state(rng, basis, n, orbitals, max_terms))


def random_operator(rng, basis, q, orbitals=None, max_terms=3):
    """Random sparse Hermitian q-particle operator (mirrors auto-filled)."""
    orbitals = list(orbitals) if orbitals is not None else list(range(1, basis.dim + 1))
    tuples = list(combinations(orbitals, q))
    terms = {}
    while len(terms) < max_terms:
        i_tup = tuples[rng.integers(len(tuples))]
        j_tup = tuples[rng.integers(len(tuples))]
        if (i_tup, j_tup) in terms or (j_tup, i_tup) in terms:
            continue
        lam = complex(rng.normal(), rng.normal())
        if i_tup == j_tup:
            lam = complex(lam.real, 0.0)
        terms[(i_tup, j_tup)] = lam
    return QOperator(basis, q, terms)


def random_group(rng, basis, sizes, orbitals=None, max_terms=2):
    return GroupProduct(tuple(random_state(rng, basis, s, orbitals, max_terms) for s in sizes))


def block_group(rng, basis, block_orbitals, sizes, max_terms=3):
    """Group product whose factors live on pairwise disjoint orbital blocks."""
    factors = tuple(
        random_state(rng, basis, s, blk, max_terms) for s, blk in zip(sizes, block_orbitals)
    )
    return GroupProduct(factors)
