"""Coherent configurations encoded as color matrices.

A configuration on ``n`` points is an ``n x n`` integer table whose entry
``(u, v)`` names the relation containing the pair.  :func:`validate_configuration`
checks the three axioms exhaustively and returns a :class:`CoherentConfig`
carrying fibers, transposes, degrees and the full table of intersection numbers.

Conventions
-----------
* Relations and fibers are plain integers.  Fibers are numbered by their
  smallest point.
* For ``R`` contained in ``X x Y`` the degree ``d_R`` is the out-degree
  ``|R(x)|`` of a point ``x`` of ``X``; then ``|R| = d_R |X| = d_{R^t} |Y|``.
* Constructed configurations (restrictions, tensor products, orbitals) index
  relations in row-major order of first occurrence.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from typing import Union

import numpy as np

from ccprime.errors import (
    ConsistencyError,
    DiagonalNotUnion,
    EmptySelection,
    MalformedMatrix,
    NonConstantIntersection,
    NotOffDiagonal,
    TransposeNotClosed,
    UnequalFibers,
    WrongFiberCount,
)

@dataclass(frozen=True, eq=False)
class ColorMatrix:
    """Square table of relation indices, dense in ``0..t-1``."""

    colors: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.colors, dtype=np.int64)
        object.__setattr__(self, "colors", arr)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise MalformedMatrix("color table must be square", {"shape": list(arr.shape)})
        if arr.shape[0] == 0:
            raise MalformedMatrix("the empty configuration is not allowed", {"size": 0})
        if arr.min() < 0:
            raise MalformedMatrix("relation indices must be nonnegative", {"min": int(arr.min())})
        t = int(arr.max()) + 1
        present = np.zeros(t, dtype=bool)
        present[arr.ravel()] = True
        if not present.all():
            missing = [int(i) for i in np.flatnonzero(~present)]
            raise MalformedMatrix("relation indices must be dense", {"missing": missing})
        arr.setflags(write=False)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]] | np.ndarray) -> ColorMatrix:
        if isinstance(rows, np.ndarray):
            if not np.issubdtype(rows.dtype, np.integer):
                raise MalformedMatrix("color table must contain integers")
            return cls(np.array(rows, dtype=np.int64))
        rows = list(rows)
        n = len(rows)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise MalformedMatrix("color table must be square", {"row": i, "length": len(row), "size": n})
            for v in row:
                if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                    raise MalformedMatrix("color table must contain integers", {"row": i, "value": repr(v)})
        return cls(np.array(rows, dtype=np.int64).reshape(n, n))

    @property
    def size(self) -> int:
        return self.colors.shape[0]

    @property
    def num_relations(self) -> int:
        return int(self.colors.max()) + 1

    def relabeled(self) -> ColorMatrix:
        """Return the same partition with relations indexed by first occurrence."""
        flat = self.colors.ravel()
        _, first = np.unique(flat, return_index=True)
        order = np.argsort(first)
        mapping = np.empty(len(order), dtype=np.int64)
        mapping[order] = np.arange(len(order))
        return ColorMatrix(mapping[self.colors])

    def tolist(self) -> list[list[int]]:
        return self.colors.tolist()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ColorMatrix):
            return NotImplemented
        return self.colors.shape == other.colors.shape and bool((self.colors == other.colors).all())

    def __hash__(self) -> int:
        return hash(self.colors.tobytes())


class IntersectionTensor:
    """Intersection numbers ``c_RS^T`` of a validated configuration.

    Entries are defined for every triple but only composable triples
    (``R`` in ``X x Y``, ``S`` in ``Y x Z``, ``T`` in ``X x Z``) can be nonzero;
    :meth:`items` iterates exactly those.
    """

    def __init__(self, values: np.ndarray, fiber_of_relation: Sequence[tuple[int, int]]):
        values.setflags(write=False)
        self.values = values
        self._fib = tuple(fiber_of_relation)

    def __getitem__(self, key: tuple[int, int, int]) -> int:
        r, s, t = key
        return int(self.values[r, s, t])

    def is_composable(self, r: int, s: int, t: int) -> bool:
        (x, y), (y2, z), (x2, z2) = self._fib[r], self._fib[s], self._fib[t]
        return y == y2 and x == x2 and z == z2

    def items(self) -> Iterator[tuple[tuple[int, int, int], int]]:
        n_rel = len(self._fib)
        for r in range(n_rel):
            x, y = self._fib[r]
            for s in range(n_rel):
                if self._fib[s][0] != y:
                    continue
                z = self._fib[s][1]
                for t in range(n_rel):
                    if self._fib[t] == (x, z):
                        yield (r, s, t), int(self.values[r, s, t])

    def support(self, r: int, s: int) -> frozenset[int]:
        return frozenset(int(t) for t in np.flatnonzero(self.values[r, s]))


@dataclass(frozen=True, eq=False)
class CoherentConfig:
    matrix: ColorMatrix
    fibers: tuple[tuple[int, ...], ...]
    fiber_index: tuple[int, ...]
    diagonal_colors: frozenset[int]
    transpose: tuple[int, ...]
    degrees: tuple[int, ...]
    fiber_of_relation: tuple[tuple[int, int], ...]
    tensor: IntersectionTensor

    @property
    def size(self) -> int:
        return self.matrix.size

    @property
    def num_relations(self) -> int:
        return len(self.transpose)

    @property
    def colors(self) -> np.ndarray:
        return self.matrix.colors

    @property
    def is_homogeneous(self) -> bool:
        return len(self.fibers) == 1

    def block(self, x: int, y: int) -> tuple[int, ...]:
        """Relations contained in ``fibers[x] x fibers[y]``, in index order."""
        return tuple(r for r, fy in enumerate(self.fiber_of_relation) if fy == (x, y))

    def diagonal(self, x: int) -> int:
        return int(self.colors[self.fibers[x][0], self.fibers[x][0]])

    def neighbors(self, relation: int, point: int) -> tuple[int, ...]:
        """``R(u)``: the points ``v`` with ``(u, v)`` in ``R``."""
        return tuple(int(v) for v in np.flatnonzero(self.colors[point] == relation))

    def size_of(self, relation: int) -> int:
        return self.degrees[relation] * len(self.fibers[self.fiber_of_relation[relation][0]])


ConfigInput = Union[ColorMatrix, Sequence[Sequence[int]], np.ndarray]


def _as_matrix(matrix: ConfigInput) -> ColorMatrix:
    return matrix if isinstance(matrix, ColorMatrix) else ColorMatrix.from_rows(matrix)


def validate_configuration(matrix: ConfigInput) -> CoherentConfig:
    """Check the coherent-configuration axioms on every pair and build the config.

    Raises DiagonalNotUnion, TransposeNotClosed or NonConstantIntersection
    with a witness naming the offending relations and pairs.
    """
    cm = _as_matrix(matrix)
    colors = cm.colors
    n, t = cm.size, cm.num_relations

    diag = np.diagonal(colors)
    diag_set = frozenset(int(c) for c in diag)
    on_diag_color = np.isin(colors, list(diag_set))
    np.fill_diagonal(on_diag_color, False)
    if on_diag_color.any():
        u, v = (int(a) for a in np.argwhere(on_diag_color)[0])
        raise DiagonalNotUnion(
            f"relation {int(colors[u, v])} meets the diagonal but also contains ({u}, {v})",
            {"relation": int(colors[u, v]), "pair": [u, v]},
        )

    transpose = [-1] * t
    pairs = np.stack([colors.ravel(), colors.T.ravel()], axis=1)
    uniq = np.unique(pairs, axis=0)
    for r, rt in uniq:
        if transpose[r] != -1:
            idx = np.flatnonzero(colors.ravel() == r)
            partners = colors.T.ravel()[idx]
            a = idx[np.flatnonzero(partners == transpose[r])[0]]
            b = idx[np.flatnonzero(partners == rt)[0]]
            raise TransposeNotClosed(
                f"transpose of relation {int(r)} meets relations {transpose[r]} and {int(rt)}",
                {
                    "relation": int(r),
                    "transposes": [transpose[r], int(rt)],
                    "pairs": [[int(a // n), int(a % n)], [int(b // n), int(b % n)]],
                },
            )
        transpose[r] = int(rt)

    fibers: list[tuple[int, ...]] = []
    fiber_of_diag: dict[int, int] = {}
    for u in range(n):
        c = int(diag[u])
        if c not in fiber_of_diag:
            fiber_of_diag[c] = len(fibers)
            fibers.append(tuple(int(p) for p in np.flatnonzero(diag == c)))
    fiber_index = np.empty(n, dtype=np.int64)
    for i, fib in enumerate(fibers):
        fiber_index[list(fib)] = i

    fiber_of_relation: list[tuple[int, int]] = []
    src = fiber_index[:, None].repeat(n, axis=1)
    dst = fiber_index[None, :].repeat(n, axis=0)
    for r in range(t):
        mask = colors == r
        sources, targets = np.unique(src[mask]), np.unique(dst[mask])
        cells = np.argwhere(mask)
        if len(sources) > 1:
            x = int(sources[0])
            good = next(c for c in cells if fiber_index[c[0]] == x)
            bad = next(c for c in cells if fiber_index[c[0]] != x)
            dx = int(diag[fibers[x][0]])
            raise NonConstantIntersection(
                f"relation {r} leaves more than one fiber",
                {"R": dx, "S": r, "T": r, "pairs": [good.tolist(), bad.tolist()], "counts": [1, 0]},
            )
        if len(targets) > 1:
            y = int(targets[0])
            good = next(c for c in cells if fiber_index[c[1]] == y)
            bad = next(c for c in cells if fiber_index[c[1]] != y)
            dy = int(diag[fibers[y][0]])
            raise NonConstantIntersection(
                f"relation {r} enters more than one fiber",
                {"R": r, "S": dy, "T": r, "pairs": [good.tolist(), bad.tolist()], "counts": [1, 0]},
            )
        fiber_of_relation.append((int(sources[0]), int(targets[0])))

    values = _intersection_numbers(colors, fibers, fiber_of_relation, t)

    degrees = []
    for r in range(t):
        x = fiber_of_relation[r][0]
        d = int(values[r, transpose[r], int(diag[fibers[x][0]])])
        if d != int((colors[fibers[x][0]] == r).sum()):
            raise ConsistencyError("degree disagrees with row count", {"relation": r})
        degrees.append(d)

    for r in range(t):
        x, y = fiber_of_relation[r]
        if degrees[r] * len(fibers[x]) != degrees[transpose[r]] * len(fibers[y]):
            raise ConsistencyError("two-way count of |R| failed", {"relation": r})

    return CoherentConfig(
        matrix=cm,
        fibers=tuple(fibers),
        fiber_index=tuple(int(i) for i in fiber_index),
        diagonal_colors=diag_set,
        transpose=tuple(transpose),
        degrees=tuple(degrees),
        fiber_of_relation=tuple(fiber_of_relation),
        tensor=IntersectionTensor(values, fiber_of_relation),
    )


def _intersection_numbers(
    colors: np.ndarray,
    fibers: Sequence[tuple[int, ...]],
    fiber_of_relation: Sequence[tuple[int, int]],
    t: int,
) -> np.ndarray:
    # c_RS^T(u, v) = (A_R A_S)[u, v]; only blocks X x Y x Z can be nonzero, and
    # every cell of every T is compared, so constancy is checked exhaustively.
    nf = len(fibers)
    blocks = {(x, y): [r for r in range(t) if fiber_of_relation[r] == (x, y)] for x in range(nf) for y in range(nf)}
    local = {(x, y): colors[np.ix_(fibers[x], fibers[y])] for x in range(nf) for y in range(nf)}
    values = np.zeros((t, t, t), dtype=np.int64)

    for (y, z), rels_yz in blocks.items():
        if not rels_yz:
            continue
        a_yz = np.stack([(local[y, z] == s).astype(np.int64) for s in rels_yz])
        for x in range(nf):
            rels_xz = blocks[x, z]
            cells = {tt: np.nonzero(local[x, z] == tt) for tt in rels_xz}
            for r in blocks[x, y]:
                a_r = (local[x, y] == r).astype(np.int64)
                prod = np.tensordot(a_r, a_yz, axes=([1], [1]))  # (|X|, s, |Z|)
                for tt, (rows, cols) in cells.items():
                    vals = prod[rows, :, cols]  # (cells of T, s)
                    lo, hi = vals.min(axis=0), vals.max(axis=0)
                    bad = np.flatnonzero(lo != hi)
                    if len(bad):
                        j = int(bad[0])
                        i_lo, i_hi = int(vals[:, j].argmin()), int(vals[:, j].argmax())
                        px, pz = fibers[x], fibers[z]
                        raise NonConstantIntersection(
                            f"c_RS^T not constant for R={r}, S={rels_yz[j]}, T={tt}",
                            {
                                "R": r,
                                "S": rels_yz[j],
                                "T": tt,
                                "pairs": [
                                    [px[rows[i_lo]], pz[cols[i_lo]]],
                                    [px[rows[i_hi]], pz[cols[i_hi]]],
                                ],
                                "counts": [int(lo[j]), int(hi[j])],
                            },
                        )
                    values[r, rels_yz, tt] = lo
    return values


def fibers(cc: CoherentConfig) -> list[frozenset[int]]:
    return [frozenset(f) for f in cc.fibers]


def restrict(cc: CoherentConfig, fiber_indices: Iterable[int]) -> CoherentConfig:
    """Configuration induced on the union of the chosen fibers.

    Points keep their relative order; relations are re-indexed densely.
    """
    chosen = sorted(set(fiber_indices))
    if not chosen:
        raise EmptySelection("at least one fiber must be selected")
    for f in chosen:
        if not 0 <= f < len(cc.fibers):
            raise EmptySelection(f"no fiber with index {f}", {"fiber": f})
    points = sorted(p for f in chosen for p in cc.fibers[f])
    sub = cc.colors[np.ix_(points, points)]
    _, dense = np.unique(sub, return_inverse=True)
    return validate_configuration(ColorMatrix(dense.reshape(sub.shape)).relabeled())


def complex_product(cc: CoherentConfig, left: Iterable[int], right: Iterable[int]) -> frozenset[int]:
    """``{T : c_ST^T > 0 for some S in left, T in right}``."""
    left, right = list(left), list(right)
    if not left or not right:
        return frozenset()
    vals = cc.tensor.values[np.ix_(left, right)]
    return frozenset(int(t) for t in np.flatnonzero(vals.any(axis=(0, 1))))


def u_set(cc: CoherentConfig, s: int) -> frozenset[int]:
    """Relations ``R`` of the source fiber with ``R^t R`` meeting ``S S^t`` only in the diagonal."""
    x, y = cc.fiber_of_relation[s]
    if x == y:
        raise NotOffDiagonal(f"relation {s} lies in a diagonal block", {"relation": s, "fiber": x})
    delta = frozenset({cc.diagonal(x)})
    sst = complex_product(cc, [s], [cc.transpose[s]])
    return frozenset(
        r for r in cc.block(x, x) if complex_product(cc, [cc.transpose[r]], [r]) & sst == delta
    )


def trivial_configuration(n: int) -> CoherentConfig:
    """``T_n``: every pair is its own relation."""
    return validate_configuration(ColorMatrix(np.arange(n * n, dtype=np.int64).reshape(n, n)))


def tensor_product(cc1: CoherentConfig, cc2: CoherentConfig) -> CoherentConfig:
    """Tensor product on ``V1 x V2``; the point ``(u1, u2)`` gets index ``u1 * n2 + u2``."""
    n1, n2 = cc1.size, cc2.size
    t2 = cc2.num_relations
    prod = cc1.colors[:, None, :, None] * t2 + cc2.colors[None, :, None, :]
    return validate_configuration(ColorMatrix(prod.reshape(n1 * n2, n1 * n2)).relabeled())


def canonical_form(cc: CoherentConfig | ColorMatrix) -> ColorMatrix:
    """Relabeled color matrix; equal forms mean the same partition on the same points."""
    cm = cc.matrix if isinstance(cc, CoherentConfig) else cc
    return cm.relabeled()


@dataclass(frozen=True)
class MatchingVerdict:
    kind: str  # "matching" | "direct_sum_like" | "no_matching"
    block_size: int
    block_degrees: tuple[int, ...]
    unit_degree_xy: bool
    unit_degree_yx: bool
    matching_relation: int | None = None
    point_map: tuple[int, ...] | None = None
    relation_map: tuple[int, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "block_size": self.block_size,
            "block_degrees": list(self.block_degrees),
            "unit_degree_xy": self.unit_degree_xy,
            "unit_degree_yx": self.unit_degree_yx,
            "matching_relation": self.matching_relation,
            "point_map": None if self.point_map is None else list(self.point_map),
            "relation_map": None if self.relation_map is None else list(self.relation_map),
        }


def matching_structure(cc: CoherentConfig) -> MatchingVerdict:
    """Classify the off-diagonal block of a two-fiber configuration.

    When a relation of X x Y has size |X| = |Y| it is used as the pairing
    ``x -> y`` and the resulting map onto ``C_X (x) T_2`` is checked on all
    pairs before being returned.
    """
    if len(cc.fibers) != 2:
        raise WrongFiberCount(f"expected two fibers, found {len(cc.fibers)}", {"fibers": len(cc.fibers)})
    fx, fy = cc.fibers
    if len(fx) != len(fy):
        raise UnequalFibers("fibers have different sizes", {"sizes": [len(fx), len(fy)]})

    rxy, ryx = cc.block(0, 1), cc.block(1, 0)
    unit_xy = any(cc.degrees[r] == 1 for r in rxy)
    unit_yx = any(cc.degrees[r] == 1 for r in ryx)
    common = dict(
        block_size=len(rxy),
        block_degrees=tuple(sorted(cc.degrees[r] for r in rxy)),
        unit_degree_xy=unit_xy,
        unit_degree_yx=unit_yx,
    )
    if len(rxy) == 1:
        return MatchingVerdict(kind="direct_sum_like", **common)
    match = next((r for r in rxy if cc.size_of(r) == len(fx)), None)
    if match is None:
        return MatchingVerdict(kind="no_matching", **common)

    point_map, relation_map = _matching_isomorphism(cc, match)
    return MatchingVerdict(
        kind="matching", matching_relation=match, point_map=point_map, relation_map=relation_map, **common
    )


def _matching_isomorphism(cc: CoherentConfig, match: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    fx = cc.fibers[0]
    target = tensor_product(restrict(cc, [0]), trivial_configuration(2))
    psi = [-1] * cc.size
    for i, x in enumerate(fx):
        (y,) = cc.neighbors(match, x)
        psi[x], psi[y] = 2 * i, 2 * i + 1
    if sorted(psi) != list(range(cc.size)):
        raise ConsistencyError("matching relation does not pair the two fibers", {"relation": match})
    image = target.colors[np.ix_(psi, psi)]
    rel_map = [-1] * cc.num_relations
    for r, img in np.unique(np.stack([cc.colors.ravel(), image.ravel()], axis=1), axis=0):
        if rel_map[r] != -1:
            raise ConsistencyError("relation splits under the matching map", {"relation": int(r)})
        rel_map[r] = int(img)
    if sorted(rel_map) != list(range(target.num_relations)):
        raise ConsistencyError("matching map is not a bijection on relations", {"map": rel_map})
    return tuple(psi), tuple(rel_map)


def intersection_identity_violations(cc: CoherentConfig) -> list[str]:
    """Recompute the standard intersection-number identities on equal-size fiber triples.

    Returns human-readable descriptions of every failure (empty when all hold).
    The block-sum identity is checked on every fiber pair.
    """
    out: list[str] = []
    tens, deg, tr = cc.tensor, cc.degrees, cc.transpose
    nf = len(cc.fibers)
    sizes = [len(f) for f in cc.fibers]

    for x in range(nf):
        for y in range(nf):
            total = sum(deg[r] for r in cc.block(x, y))
            if total != sizes[y]:
                out.append(f"block ({x},{y}): degree sum {total} != {sizes[y]}")

    for x in range(nf):
        for y in range(nf):
            for z in range(nf):
                if not sizes[x] == sizes[y] == sizes[z]:
                    continue
                rxz = cc.block(x, z)
                for r in cc.block(x, y):
                    for s in cc.block(y, z):
                        lhs = deg[r] * deg[s]
                        rhs = sum(tens[r, s, t] * deg[t] for t in rxz)
                        if lhs != rhs:
                            out.append(f"d_R d_S != sum c d_T for R={r}, S={s}")
                        support = [t for t in rxz if tens[r, s, t] > 0]
                        if len(support) > math.gcd(deg[r], deg[s]):
                            out.append(f"|RS| = {len(support)} > gcd for R={r}, S={s}")
                        for t in rxz:
                            a = tens[r, s, t] * deg[t]
                            b = tens[t, tr[s], r] * deg[r]
                            c = tens[tr[r], t, s] * deg[s]
                            if not a == b == c:
                                out.append(f"rotation identity fails for ({r},{s},{t}): {a},{b},{c}")
                            if a % math.lcm(deg[r], deg[s]):
                                out.append(f"lcm(d_R,d_S) does not divide c d_T for ({r},{s},{t})")
    return out
