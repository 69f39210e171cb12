"""Coherent configurations of permutation-group actions.

The relations are the orbits of the group on ordered pairs.  They are found
as connected components of the graph joining ``(u, v)`` to ``(g(u), g(v))``
for each generator ``g``, so the group itself is never enumerated.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from sympy import isprime, primitive_root

from ccprime.core import CoherentConfig, ColorMatrix, validate_configuration
from ccprime.errors import NotBijection


@dataclass(frozen=True)
class ActionSpec:
    domain_size: int
    generators: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n = self.domain_size
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise NotBijection("domain size must be a positive integer", {"domain": n})
        for i, g in enumerate(self.generators):
            if len(g) != n or sorted(g) != list(range(n)):
                raise NotBijection(f"generator {i} is not a bijection of 0..{n - 1}", {"generator": i})

    @classmethod
    def from_lists(cls, domain_size: int, generators: Sequence[Sequence[int]]) -> ActionSpec:
        gens = []
        for i, g in enumerate(generators):
            if not isinstance(g, (list, tuple)) or any(isinstance(v, bool) or not isinstance(v, int) for v in g):
                raise NotBijection(f"generator {i} must be a list of integers", {"generator": i})
            gens.append(tuple(g))
        return cls(domain_size, tuple(gens))


def pair_orbits(action: ActionSpec) -> np.ndarray:
    """Label each ordered pair by its orbit; labels follow row-major first occurrence."""
    n = action.domain_size
    idx = np.arange(n * n)
    rows, cols = [], []
    for g in action.generators:
        perm = np.asarray(g, dtype=np.int64)
        u, v = divmod(idx, n)
        rows.append(idx)
        cols.append(perm[u] * n + perm[v])
    if rows:
        r, c = np.concatenate(rows), np.concatenate(cols)
    else:
        r = c = np.empty(0, dtype=np.int64)
    graph = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(n * n, n * n))
    _, labels = connected_components(graph, directed=True, connection="weak")
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    relabel = np.empty(len(order), dtype=np.int64)
    relabel[order] = np.arange(len(order))
    return relabel[labels].reshape(n, n)


def orbital_configuration(action: ActionSpec) -> CoherentConfig:
    return validate_configuration(ColorMatrix(pair_orbits(action)))


def affine_action(p: int, k: int, copies: int = 1, shift: int = 0) -> ActionSpec:
    """Action of ``{x -> a x + b : a^k = 1}`` on ``copies`` disjoint copies of ``Z_p``.

    Copy ``c`` is conjugated by the translation ``x -> x + c * shift``, which
    keeps every copy equivalent to the first.  ``p`` must be prime and ``k``
    must divide ``p - 1``.
    """
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    if k < 1 or (p - 1) % k:
        raise ValueError(f"{k} does not divide {p - 1}")
    gen = int(primitive_root(p))
    a = pow(gen, (p - 1) // k, p)
    translate, scale = [], []
    for c in range(copies):
        off = c * shift
        translate.extend(c * p + (x + 1) % p for x in range(p))
        scale.extend(c * p + ((a * ((x - off) % p)) + off) % p for x in range(p))
    return ActionSpec(copies * p, (tuple(translate), tuple(scale)))

