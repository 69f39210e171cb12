from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from conftest import C5, PALEY13, PATH3, circulant, two_fiber_fixtures
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import brute_intersection_numbers

from ccprime.core import (
    ColorMatrix,
    canonical_form,
    complex_product,
    intersection_identity_violations,
    matching_structure,
    restrict,
    tensor_product,
    trivial_configuration,
    u_set,
    validate_configuration,
)
from ccprime.errors import (
    DiagonalNotUnion,
    EmptySelection,
    MalformedMatrix,
    NonConstantIntersection,
    NotOffDiagonal,
    TransposeNotClosed,
    UnequalFibers,
    WrongFiberCount,
)
from ccprime.orbitals import ActionSpec, affine_action, orbital_configuration

TWO_FIBER = two_fiber_fixtures()


def tensor_matches_oracle(cc) -> bool:
    ref = brute_intersection_numbers(cc.matrix.tolist())
    assert ref is not None
    t = cc.num_relations
    return all(cc.tensor.values[r, s, u] == ref[(r, s, u)] for r in range(t) for s in range(t) for u in range(t))


# --- color matrices -------------------------------------------------------


@pytest.mark.parametrize(
    "rows",
    [[], [[0, 1]], [[0, 1], [1]], [[0, 2], [2, 0]], [[0, -1], [-1, 0]]],
)
def test_malformed(rows):
    with pytest.raises(MalformedMatrix):
        ColorMatrix.from_rows(rows)


def test_color_matrix_copies_input():
    arr = np.array(C5)
    ColorMatrix.from_rows(arr)
    arr[0, 0] = 9
    assert arr.flags.writeable


def test_relabel_first_occurrence():
    m = ColorMatrix.from_rows([[1, 0], [2, 1]])
    assert m.relabeled().tolist() == [[0, 1], [2, 0]]


# --- validation -------------------------------------------------------------


def test_single_point():
    cc = validate_configuration([[0]])
    assert cc.num_relations == 1 and cc.degrees == (1,) and len(cc.fibers) == 1


def test_pentagon_tensor(c5):
    assert c5.is_homogeneous
    assert sorted(c5.degrees) == [1, 2, 2]
    assert tensor_matches_oracle(c5)


def test_paley13_tensor(paley13):
    assert sorted(paley13.degrees) == [1, 6, 6]
    assert tensor_matches_oracle(paley13)


@pytest.mark.parametrize("name,cc", TWO_FIBER[:4])
def test_two_fiber_tensor_oracle(name, cc):
    assert tensor_matches_oracle(cc)


def test_path_rejected_with_witness():
    assert brute_intersection_numbers(PATH3) is None
    with pytest.raises(NonConstantIntersection) as info:
        validate_configuration(PATH3)
    w = info.value.witness
    r, s = w["R"], w["S"]
    # Recount the witness pairs by hand.
    counts = [sum(1 for z in range(3) if PATH3[u][z] == r and PATH3[z][v] == s) for u, v in w["pairs"]]
    assert counts == w["counts"] and counts[0] != counts[1]


def test_diagonal_not_union():
    with pytest.raises(DiagonalNotUnion):
        validate_configuration([[0, 0], [1, 0]])


def test_transpose_not_closed():
    with pytest.raises(TransposeNotClosed):
        validate_configuration([[0, 1, 2], [1, 0, 1], [3, 2, 0]])


def test_relation_crossing_blocks_rejected():
    # Two singleton fibers, but one relation covers both (0,1) and (1,0).
    with pytest.raises(NonConstantIntersection):
        validate_configuration([[0, 2], [2, 1]])


def test_fibers_and_blocks(f21_pair):
    assert [len(f) for f in f21_pair.fibers] == [7, 7]
    assert len(f21_pair.block(0, 1)) == 3
    for x, y in itertools.product(range(2), repeat=2):
        assert sum(f21_pair.degrees[r] for r in f21_pair.block(x, y)) == 7


def test_transpose_involution(f21_pair):
    for r, t in enumerate(f21_pair.transpose):
        assert f21_pair.transpose[t] == r
        assert f21_pair.size_of(r) == f21_pair.size_of(t)


# --- operators -------------------------------------------------------------


def test_restrict_identity_and_factor(c5, c5_t2):
    assert canonical_form(restrict(c5, [0])) == canonical_form(c5)
    assert canonical_form(restrict(c5_t2, [0])) == canonical_form(c5)
    with pytest.raises(EmptySelection):
        restrict(c5, [])


def test_complex_product_diagonal(f21_pair):
    for s in f21_pair.block(0, 1):
        prod = complex_product(f21_pair, [s], [f21_pair.transpose[s]])
        assert f21_pair.diagonal(0) in prod


def test_complex_product_associative(f21_pair):
    rels = range(f21_pair.num_relations)
    for a, b, c in itertools.product(rels, repeat=3):
        ab = complex_product(f21_pair, [a], [b])
        bc = complex_product(f21_pair, [b], [c])
        assert complex_product(f21_pair, ab, [c]) == complex_product(f21_pair, [a], bc)


def test_complex_product_size_bound(f21_pair):
    for s in f21_pair.block(0, 1):
        for r in f21_pair.block(1, 0):
            assert len(complex_product(f21_pair, [s], [r])) <= math.gcd(f21_pair.degrees[s], f21_pair.degrees[r])


def test_u_set_matching_is_everything(c5_t2):
    match = next(s for s in c5_t2.block(0, 1) if c5_t2.degrees[s] == 1)
    assert u_set(c5_t2, match) == frozenset(c5_t2.block(0, 0))


def test_u_set_fano_trivial(fano):
    assert fano.num_relations == 8
    for s in fano.block(0, 1):
        assert u_set(fano, s) == frozenset({fano.diagonal(0)})


@pytest.mark.parametrize("name,cc", TWO_FIBER)
def test_u_set_rank_bound(name, cc):
    r = len(cc.block(0, 0))
    k = max(cc.degrees[t] for t in cc.block(0, 0))
    for s in cc.block(0, 1):
        u = u_set(cc, s)
        assert cc.diagonal(0) in u
        assert r - len(u) <= (cc.degrees[s] - 1) * (k - 1)


def test_u_set_rejects_diagonal_block(c5):
    with pytest.raises(NotOffDiagonal):
        u_set(c5, 1)


def test_tensor_with_single_point_is_identity(c5):
    assert canonical_form(tensor_product(c5, trivial_configuration(1))) == canonical_form(c5)


def test_trivial_configurations():
    t2 = trivial_configuration(2)
    assert t2.num_relations == 4 and len(t2.fibers) == 2
    t22 = tensor_product(t2, t2)
    assert t22.size == 4 and t22.num_relations == 16 and set(t22.degrees) == {1}


def test_tensor_degrees_multiply(c5, f21):
    prod = tensor_product(c5, f21)
    assert prod.num_relations == c5.num_relations * f21.num_relations
    assert sorted(prod.degrees) == sorted(a * b for a in c5.degrees for b in f21.degrees)


# --- matching structure ------------------------------------------------------


@pytest.mark.parametrize("name,cc", TWO_FIBER)
def test_matching_isomorphism(name, cc):
    v = matching_structure(cc)
    assert v.kind == "matching"
    # psi sends x_i to 2i and its partner to 2i+1; colours must correspond
    # bijectively to (colour of (x_i, x_j), side of u, side of v).
    psi = v.point_map
    assert sorted(psi) == list(range(cc.size))
    inv = {p: u for u, p in enumerate(psi)}
    xs = [inv[2 * i] for i in range(cc.size // 2)]
    fwd, back = {}, {}
    for u, w in itertools.product(range(cc.size), repeat=2):
        key = (int(cc.colors[xs[psi[u] // 2], xs[psi[w] // 2]]), psi[u] % 2, psi[w] % 2)
        col = int(cc.colors[u, w])
        assert fwd.setdefault(col, key) == key
        assert back.setdefault(key, col) == col
    assert cc.size_of(v.matching_relation) == cc.size // 2


def test_direct_sum_like(direct_sum):
    v = matching_structure(direct_sum)
    assert v.kind == "direct_sum_like" and v.block_degrees == (5,)


def test_no_matching(fano):
    assert matching_structure(fano).kind == "no_matching"


def test_matching_requires_two_fibers(c5):
    with pytest.raises(WrongFiberCount):
        matching_structure(c5)


def test_matching_requires_equal_fibers():
    cc = orbital_configuration(ActionSpec.from_lists(3, [[0, 2, 1]]))
    with pytest.raises(UnequalFibers):
        matching_structure(cc)


# --- identities ----------------------------------------------------------------


@pytest.mark.parametrize("name,cc", TWO_FIBER)
def test_identities_two_fiber(name, cc):
    assert intersection_identity_violations(cc) == []


def test_identities_misc(fano, direct_sum, paley13):
    for cc in (fano, direct_sum, paley13):
        assert intersection_identity_violations(cc) == []


def test_prime_order_valencies_equal():
    # A homogeneous scheme on a prime number of points with rank > 2 has equal valencies.
    for p in (5, 7, 11, 13):
        for k in range(1, p - 1):
            if (p - 1) % k == 0:
                cc = orbital_configuration(affine_action(p, k))
                assert {d for r, d in enumerate(cc.degrees) if r != cc.diagonal(0)} == {k}


# --- properties ------------------------------------------------------------------


@st.composite
def small_actions(draw):
    n = draw(st.integers(1, 8))
    gens = draw(st.lists(st.permutations(range(n)), max_size=3))
    return ActionSpec.from_lists(n, gens)


@settings(max_examples=60, deadline=None)
@given(small_actions())
def test_orbitals_tensor_matches_oracle(action):
    cc = orbital_configuration(action)
    assert tensor_matches_oracle(cc)
    assert intersection_identity_violations(cc) == []


@settings(max_examples=40, deadline=None)
@given(st.permutations(range(13)))
def test_permuting_points_preserves_validity(perm):
    arr = np.array(PALEY13)[np.ix_(perm, perm)]
    cc = validate_configuration(arr)
    assert sorted(cc.degrees) == [1, 6, 6]


@st.composite
def symmetric_colourings(draw):
    n = draw(st.integers(2, 7))
    colors = [[0] * n for _ in range(n)]
    for u in range(n):
        for w in range(u + 1, n):
            colors[u][w] = colors[w][u] = draw(st.integers(1, 3))
    used = sorted({c for row in colors for c in row})
    dense = {c: i for i, c in enumerate(used)}
    return [[dense[c] for c in row] for row in colors]


@settings(max_examples=150, deadline=None)
@given(symmetric_colourings())
def test_validation_agrees_with_brute_force(rows):
    brute = brute_intersection_numbers(rows)
    try:
        validate_configuration(rows)
        ok = True
    except NonConstantIntersection:
        ok = False
    assert ok == (brute is not None)
