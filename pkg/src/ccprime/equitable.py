"""Equitable partitions of homogeneous components.

A partition ``{C_1, ..., C_s}`` of a fiber ``X`` is equitable when
``|R(x) & C_j|`` depends only on the cell of ``x``, for every relation ``R``
of ``X x X``.  The constant counts form one ``s x s`` parameter matrix per
relation.
"""

from __future__ import annotations

import os
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from ccprime.core import CoherentConfig
from ccprime.errors import ConsistencyError, NotAPartition, NotEquitable, TooLarge

DEFAULT_MAX_POINTS = 12


@dataclass(frozen=True)
class EquitablePartition:
    cells: tuple[tuple[int, ...], ...]
    fiber: int
    parameters: dict[int, tuple[tuple[int, ...], ...]] = field(compare=False)

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    @property
    def cell_sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.cells)

    def matrix(self, relation: int) -> np.ndarray:
        return np.array(self.parameters[relation], dtype=np.int64)

    def to_dict(self) -> dict:
        return {
            "cells": [list(c) for c in self.cells],
            "parameters": {str(r): [list(row) for row in m] for r, m in sorted(self.parameters.items())},
        }


def _resolve_fiber(cc: CoherentConfig, cells: Sequence[Sequence[int]], fiber: int | None) -> int:
    if fiber is not None:
        return fiber
    if cc.is_homogeneous:
        return 0
    for cell in cells:
        for p in cell:
            if 0 <= p < cc.size:
                return cc.fiber_index[p]
    raise NotAPartition("cannot infer the fiber from an empty cell list")


def verify_equitable(
    cc: CoherentConfig, cells: Iterable[Iterable[int]], fiber: int | None = None
) -> EquitablePartition:
    """Check that ``cells`` is an equitable partition of the fiber and return its parameters.

    ``fiber`` defaults to the only fiber of a homogeneous configuration, or to
    the fiber of the first listed point otherwise.
    """
    cells = [tuple(int(p) for p in c) for c in cells]
    x = _resolve_fiber(cc, cells, fiber)
    points = cc.fibers[x]
    cell_of = np.full(cc.size, -1, dtype=np.int64)
    for i, cell in enumerate(cells):
        if not cell:
            raise NotAPartition(f"cell {i} is empty", {"cell": i})
        for p in cell:
            if not 0 <= p < cc.size or cc.fiber_index[p] != x:
                raise NotAPartition(f"point {p} is not in fiber {x}", {"cell": i, "point": p})
            if cell_of[p] != -1:
                raise NotAPartition(f"point {p} lies in two cells", {"cells": [int(cell_of[p]), i], "point": p})
            cell_of[p] = i
    uncovered = [p for p in points if cell_of[p] == -1]
    if uncovered:
        raise NotAPartition("cells do not cover the fiber", {"uncovered": uncovered})

    s = len(cells)
    pts = np.array(points)
    local_cell = cell_of[pts]
    params: dict[int, tuple[tuple[int, ...], ...]] = {}
    for r in cc.block(x, x):
        rows = []
        for i, cell in enumerate(cells):
            ref = None
            for p in cell:
                counts = np.bincount(local_cell[cc.colors[p, pts] == r], minlength=s)
                if ref is None:
                    ref, ref_point = counts, p
                elif (counts != ref).any():
                    j = int(np.flatnonzero(counts != ref)[0])
                    raise NotEquitable(
                        f"relation {r}: points {ref_point} and {p} of cell {i} see cell {j} differently",
                        {
                            "relation": r,
                            "cell": i,
                            "target_cell": j,
                            "points": [ref_point, p],
                            "counts": [int(ref[j]), int(counts[j])],
                        },
                    )
            rows.append(tuple(int(c) for c in ref))
        params[r] = tuple(rows)
    return EquitablePartition(cells=tuple(cells), fiber=x, parameters=params)


def point_partition(cc: CoherentConfig, y: int, x: int) -> EquitablePartition:
    """The partition ``{T(y) : T in R_{Y,X}}`` of fiber ``x`` seen from the point ``y``."""
    fy = cc.fiber_index[y]
    cells = [cc.neighbors(t, y) for t in cc.block(fy, x)]
    try:
        return verify_equitable(cc, cells, fiber=x)
    except (NotAPartition, NotEquitable) as exc:
        raise ConsistencyError("point partition of a validated configuration is not equitable", exc.witness) from exc


def max_points_from_env(default: int = DEFAULT_MAX_POINTS) -> int:
    raw = os.environ.get("CC_MAX_POINTS")
    return int(raw) if raw else default


def enumerate_equitable(
    cc: CoherentConfig, max_points: int = DEFAULT_MAX_POINTS, fiber: int = 0
) -> list[EquitablePartition]:
    """All equitable partitions of one fiber, by exhaustive search.

    Cells are generated in order of their smallest point; each new cell is
    checked against itself and every earlier cell before the search descends.
    """
    points = cc.fibers[fiber]
    n = len(points)
    if n > max_points:
        raise TooLarge(f"fiber has {n} points, limit is {max_points}", {"points": n, "max_points": max_points})

    rels = [r for r in cc.block(fiber, fiber) if r != cc.diagonal(fiber)]
    local = cc.colors[np.ix_(points, points)]
    nbr = [[sum(1 << j for j in np.flatnonzero(local[i] == r)) for i in range(n)] for r in rels]
    members = [tuple(j for j in range(n) if m >> j & 1) for m in range(1 << n)] if n <= 16 else None

    def bits(mask: int) -> tuple[int, ...]:
        return members[mask] if members is not None else tuple(j for j in range(n) if mask >> j & 1)

    def constant(nb: list[int], src: int, dst: int) -> bool:
        it = iter(bits(src))
        first = (nb[next(it)] & dst).bit_count()
        return all((nb[i] & dst).bit_count() == first for i in it)

    found: list[list[int]] = []

    def extend(cells: list[int], unassigned: int) -> None:
        if not unassigned:
            found.append(list(cells))
            return
        low = unassigned & -unassigned
        rest = unassigned ^ low
        sub = rest
        while True:
            cell = low | sub
            if all(
                constant(nb, cell, cell) and all(constant(nb, c, cell) and constant(nb, cell, c) for c in cells)
                for nb in nbr
            ):
                cells.append(cell)
                extend(cells, rest & ~sub)
                cells.pop()
            if not sub:
                break
            sub = (sub - 1) & rest

    extend([], (1 << n) - 1)
    out = []
    for masks in found:
        cells = [tuple(points[j] for j in bits(m)) for m in masks]
        out.append(verify_equitable(cc, cells, fiber=fiber))
    out.sort(key=lambda ep: (ep.num_cells, ep.cells))
    return out


@dataclass(frozen=True)
class CongruenceSummary:
    rank: int
    modulus: int
    cell_counts: dict[int, int]
    holds: bool

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "modulus": self.modulus,
            "cell_counts": {str(k): v for k, v in sorted(self.cell_counts.items())},
            "holds": self.holds,
        }


def congruence_summary(cc: CoherentConfig, partitions: Sequence[EquitablePartition], fiber: int = 0) -> CongruenceSummary:
    """Tally ``|Pi|`` over the partitions and test ``|Pi| = 1 (mod rank - 1)``."""
    rank = len(cc.block(fiber, fiber))
    modulus = max(rank - 1, 1)
    counts = Counter(p.num_cells for p in partitions)
    return CongruenceSummary(
        rank=rank,
        modulus=modulus,
        cell_counts=dict(counts),
        holds=all(c % modulus == 1 % modulus for c in counts),
    )
