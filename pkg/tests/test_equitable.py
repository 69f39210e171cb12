from __future__ import annotations

import pytest
from conftest import C5, PALEY7, quadratic_residues, two_fiber_fixtures
from oracles import is_equitable, set_partitions

from ccprime.core import validate_configuration
from ccprime.equitable import (
    congruence_summary,
    enumerate_equitable,
    max_points_from_env,
    point_partition,
    verify_equitable,
)
from ccprime.errors import NotAPartition, NotEquitable, TooLarge
from ccprime.orbitals import affine_action, orbital_configuration


def test_single_cell_parameters_are_valencies(paley13):
    part = verify_equitable(paley13, [list(range(13))])
    assert {r: part.parameters[r][0][0] for r in part.parameters} == dict(enumerate(paley13.degrees))


def test_singletons_are_equitable(c5):
    part = verify_equitable(c5, [[i] for i in range(5)])
    for r, mat in part.parameters.items():
        assert mat == tuple(tuple(int(C5[i][j] == r) for j in range(5)) for i in range(5))


def test_paley13_residue_partition(paley13):
    qr = sorted(quadratic_residues(13))
    nqr = sorted(set(range(1, 13)) - set(qr))
    part = verify_equitable(paley13, [[0], qr, nqr])
    assert part.cell_sizes == (1, 6, 6)
    r_qr = paley13.colors[0, qr[0]]
    # Independent count for one row: a residue point x sees how many residues along R?
    x = qr[0]
    expect = sum(1 for z in qr if paley13.colors[x, z] == r_qr)
    assert part.parameters[int(r_qr)][1][1] == expect


def test_not_a_partition(c5):
    with pytest.raises(NotAPartition):
        verify_equitable(c5, [[0, 1], [1, 2, 3, 4]])
    with pytest.raises(NotAPartition):
        verify_equitable(c5, [[0, 1], [2, 3]])
    with pytest.raises(NotAPartition):
        verify_equitable(c5, [[0, 1, 2, 3, 4], []])


def test_not_equitable_witness(c5):
    with pytest.raises(NotEquitable) as info:
        verify_equitable(c5, [[0, 1], [2, 3, 4]])
    w = info.value.witness
    a, b = w["points"]
    cells = [[0, 1], [2, 3, 4]]
    target = cells[w["target_cell"]]
    got = [sum(1 for z in target if C5[p][z] == w["relation"]) for p in (a, b)]
    assert got == w["counts"] and got[0] != got[1]


@pytest.mark.parametrize("name,cc", two_fiber_fixtures())
def test_point_partitions(name, cc):
    fx, fy = cc.fibers
    for y in fy:
        part = point_partition(cc, y, 0)
        assert part.num_cells == len(cc.block(1, 0))
        assert sorted(part.cell_sizes) == sorted(cc.degrees[t] for t in cc.block(1, 0))


def _oracle_partitions(cc):
    pts = list(cc.fibers[0])
    rows = cc.matrix.tolist()
    rels = list(cc.block(0, 0))
    return sorted(
        sorted(tuple(sorted(c)) for c in part) for part in set_partitions(pts) if is_equitable(rows, rels, part)
    )


@pytest.mark.parametrize(
    "cc",
    [
        validate_configuration([[0, 1, 1], [1, 0, 1], [1, 1, 0]]),
        validate_configuration(C5),
        validate_configuration(PALEY7),
        orbital_configuration(affine_action(7, 1)),
    ],
    ids=["K3", "C5", "Paley7", "Z7"],
)
def test_enumeration_matches_oracle(cc):
    got = sorted(sorted(p.cells) for p in enumerate_equitable(cc))
    assert got == _oracle_partitions(cc)


def test_enumeration_small_counts():
    k3 = validate_configuration([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    parts = enumerate_equitable(k3)
    # Rank 2: every partition of three points is equitable.
    assert len(parts) == 5


@pytest.mark.parametrize("p,k", [(7, 3), (11, 5), (11, 2), (13, 4)])
def test_congruence(p, k):
    cc = orbital_configuration(affine_action(p, k))
    parts = enumerate_equitable(cc, max_points=13)
    s = congruence_summary(cc, parts)
    assert s.holds and s.modulus == (p - 1) // k
    assert 1 in s.cell_counts and p in s.cell_counts


def test_too_large(paley13):
    with pytest.raises(TooLarge):
        enumerate_equitable(paley13)


def test_env_limit(monkeypatch):
    monkeypatch.setenv("CC_MAX_POINTS", "5")
    assert max_points_from_env() == 5
    monkeypatch.delenv("CC_MAX_POINTS")
    assert max_points_from_env() == 12
