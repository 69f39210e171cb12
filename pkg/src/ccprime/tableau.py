"""Integer tableaux for a 3-cell equitable partition of a symmetric rank-3 scheme.

Let the fiber carry symmetric relations ``R``, ``R'`` of valency ``k`` besides
the diagonal, and let ``{C_1, C_2, C_3}`` be equitable.  Writing
``beta_ij = |R(y) & C_j|`` for ``y`` in ``C_i`` (and ``gamma`` for ``R'``),
the matrix must satisfy

* row sums ``sum_j beta_ij = k``;
* ``beta_ij + gamma_ij = |C_j|`` off the diagonal, ``beta_ii + gamma_ii = |C_i| - 1``;
* ``|C_i| beta_ij = beta_ji |C_j|``;
* ``beta_11 + beta_22 + beta_33 = k - 1``.

:func:`solve` lists every integer solution.  The search fixes ``beta_12`` and
``beta_13`` on their scaling grids; row sums and the trace then force
``beta_23 + beta_32``, and scaling splits that sum in at most one way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from sympy import isprime

from ccprime.errors import BadInstance

Matrix3 = tuple[tuple[int, int, int], tuple[int, int, int], tuple[int, int, int]]


@dataclass(frozen=True)
class TableauInstance:
    cells: tuple[int, int, int]
    k: int

    def __post_init__(self) -> None:
        cells = tuple(self.cells)
        object.__setattr__(self, "cells", cells)
        if len(cells) != 3 or any(isinstance(c, bool) or not isinstance(c, int) or c < 1 for c in cells):
            raise BadInstance("cells must be three positive integers", {"cells": list(cells)})
        if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 1:
            raise BadInstance("k must be a positive integer", {"k": self.k})
        m = sum(cells)
        if m != 2 * self.k + 1:
            raise BadInstance(f"cell sizes sum to {m}, expected 2k + 1 = {2 * self.k + 1}", {"sum": m, "k": self.k})
        if not isprime(m):
            raise BadInstance(f"{m} is not prime", {"m": m})

    @property
    def m(self) -> int:
        return sum(self.cells)

    def to_dict(self) -> dict[str, Any]:
        return {"cells": list(self.cells), "k": self.k, "m": self.m}


@dataclass(frozen=True)
class BetaTableau:
    beta: Matrix3
    gamma: Matrix3
    swap_class: int = 0

    @property
    def self_swapped(self) -> bool:
        return self.beta == self.gamma

    def singleton_blocks(self) -> list[tuple[int, int]]:
        """Off-diagonal cell pairs lying entirely in one of ``R``, ``R'``."""
        sizes = [self.beta[j][j] + self.gamma[j][j] + 1 for j in range(3)]
        return [
            (i, j)
            for i in range(3)
            for j in range(3)
            if i != j and self.beta[i][j] in (0, sizes[j])
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "beta": [list(r) for r in self.beta],
            "gamma": [list(r) for r in self.gamma],
            "swap_class": self.swap_class,
            "self_swapped": self.self_swapped,
            "singleton_blocks": [list(p) for p in self.singleton_blocks()],
        }


@dataclass(frozen=True)
class Branch:
    """One dead or live branch of the search, keyed by the chosen entries."""

    beta12: int
    beta13: int
    outcome: str
    detail: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"beta12": self.beta12, "beta13": self.beta13, "outcome": self.outcome, **self.detail}


def complement(beta: Matrix3, cells: tuple[int, int, int]) -> Matrix3:
    return tuple(
        tuple(cells[j] - beta[i][j] - (1 if i == j else 0) for j in range(3)) for i in range(3)
    )  # type: ignore[return-value]


def _search(inst: TableauInstance) -> tuple[list[Matrix3], list[Branch]]:
    c1, c2, c3 = inst.cells
    k = inst.k
    sols: list[Matrix3] = []
    trace: list[Branch] = []
    step12 = c2 // math.gcd(c1, c2)
    step13 = c3 // math.gcd(c1, c3)
    for b12 in range(0, c2 + 1, step12):
        b21 = c1 * b12 // c2
        for b13 in range(0, c3 + 1, step13):
            b31 = c1 * b13 // c3
            b11 = k - b12 - b13
            if not 0 <= b11 <= c1 - 1:
                trace.append(Branch(b12, b13, "bound beta11", {"beta11": b11}))
                continue
            # beta22 + beta33 = k - 1 - beta11 together with rows 2 and 3
            sigma = k + 1 + b11 - b21 - b31
            if sigma < 0 or (sigma * c3) % (c2 + c3):
                trace.append(
                    Branch(b12, b13, "scaling beta23/beta32", {"beta11": b11, "beta21": b21, "beta31": b31, "sum23": sigma})
                )
                continue
            b23 = sigma * c3 // (c2 + c3)
            b32 = sigma - b23
            if b23 > c3 or b32 > c2:
                trace.append(Branch(b12, b13, "bound beta23", {"beta11": b11, "beta23": b23, "beta32": b32}))
                continue
            b22 = k - b21 - b23
            b33 = k - b31 - b32
            if not 0 <= b22 <= c2 - 1:
                trace.append(Branch(b12, b13, "bound beta22", {"beta11": b11, "beta22": b22}))
                continue
            if not 0 <= b33 <= c3 - 1:
                trace.append(Branch(b12, b13, "bound beta33", {"beta11": b11, "beta33": b33}))
                continue
            beta = ((b11, b12, b13), (b21, b22, b23), (b31, b32, b33))
            trace.append(Branch(b12, b13, "solution", {"beta11": b11, "beta23": b23}))
            sols.append(beta)
    return sols, trace


def solve(instance: TableauInstance) -> list[BetaTableau]:
    """Every integer tableau for the instance, sorted by ``beta``.

    ``beta -> gamma`` is an involution on the solution set; the two members of
    each orbit share ``swap_class``.
    """
    sols, _ = _search(instance)
    return _package(instance, sols)


def _package(instance: TableauInstance, sols: list[Matrix3]) -> list[BetaTableau]:
    sols = sorted(sols)
    classes: dict[Matrix3, int] = {}
    out = []
    for beta in sols:
        gamma = complement(beta, instance.cells)
        key = min(beta, gamma)
        cls = classes.setdefault(key, len(classes))
        out.append(BetaTableau(beta=beta, gamma=gamma, swap_class=cls))
    return out


@dataclass(frozen=True)
class Elimination:
    instance: TableauInstance
    feasible: bool
    solutions: tuple[BetaTableau, ...]
    trace: tuple[Branch, ...]

    @property
    def solution(self) -> BetaTableau | None:
        return self.solutions[0] if self.solutions else None

    def to_dict(self) -> dict[str, Any]:
        return {
            "instance": self.instance.to_dict(),
            "feasible": self.feasible,
            "solutions": [s.to_dict() for s in self.solutions],
            "trace": [b.to_dict() for b in self.trace],
        }


def eliminate(instance: TableauInstance) -> Elimination:
    sols, trace = _search(instance)
    packaged = _package(instance, sols)
    return Elimination(instance=instance, feasible=bool(packaged), solutions=tuple(packaged), trace=tuple(trace))
