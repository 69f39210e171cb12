from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ccprime.core import CoherentConfig, tensor_product, trivial_configuration, validate_configuration
from ccprime.orbitals import affine_action, orbital_configuration


def circulant(n: int, classes: list[set[int]]) -> list[list[int]]:
    """Color ``(u, v)`` by the class of ``v - u mod n``; class 0 is ``{0}``."""
    cls = {0: 0}
    for i, c in enumerate(classes, start=1):
        for d in c:
            cls[d % n] = i
    return [[cls[(v - u) % n] for v in range(n)] for u in range(n)]


def quadratic_residues(p: int) -> set[int]:
    return {x * x % p for x in range(1, p)}


PATH3 = [[0, 1, 2], [1, 0, 1], [2, 1, 0]]
C5 = circulant(5, [{1, 4}, {2, 3}])
PALEY13 = circulant(13, [quadratic_residues(13), set(range(1, 13)) - quadratic_residues(13)])
PALEY7 = circulant(7, [quadratic_residues(7), set(range(1, 7)) - quadratic_residues(7)])


def fano_configuration() -> CoherentConfig:
    """Points and lines of the Fano plane: two fibers of size 7 and eight relations."""
    lines = [{(i + s) % 7 for s in (0, 1, 3)} for i in range(7)]
    n = 14
    colors = np.zeros((n, n), dtype=int)
    for u in range(n):
        for v in range(n):
            if u < 7 and v < 7:
                colors[u, v] = 0 if u == v else 1
            elif u >= 7 and v >= 7:
                colors[u, v] = 2 if u == v else 3
            elif u < 7:
                colors[u, v] = 4 if u in lines[v - 7] else 5
            else:
                colors[u, v] = 6 if v in lines[u - 7] else 7
    return validate_configuration(colors)


def direct_sum_configuration() -> CoherentConfig:
    """Two copies of the 5-cycle scheme, with ``X x Y`` and ``Y x X`` each one relation."""
    n = 10
    colors = np.zeros((n, n), dtype=int)
    for u in range(n):
        for v in range(n):
            if u < 5 and v < 5:
                colors[u, v] = C5[u][v]
            elif u >= 5 and v >= 5:
                colors[u, v] = 3 + C5[u - 5][v - 5]
            else:
                colors[u, v] = 6 if u < 5 else 7
    return validate_configuration(colors)


def prime_order_schemes(primes=(5, 7, 11, 13)) -> list[tuple[int, int, CoherentConfig]]:
    """Cyclotomic schemes ``(p, k, C)`` with rank ``> 2``."""
    out = []
    for p in primes:
        for k in range(1, p - 1):
            if (p - 1) % k == 0:
                out.append((p, k, orbital_configuration(affine_action(p, k))))
    return out


def two_fiber_fixtures() -> list[tuple[str, CoherentConfig]]:
    """Two-fiber prime-order configurations with a rank > 2 homogeneous component."""
    out = [("f21_pair", orbital_configuration(affine_action(7, 3, copies=2, shift=3)))]
    t2 = trivial_configuration(2)
    for p, k, cc in prime_order_schemes():
        out.append((f"cyclotomic_{p}_{k}_x_T2", tensor_product(cc, t2)))
    return out


@pytest.fixture(scope="session")
def c5() -> CoherentConfig:
    return validate_configuration(C5)


@pytest.fixture(scope="session")
def f21() -> CoherentConfig:
    return orbital_configuration(affine_action(7, 3))


@pytest.fixture(scope="session")
def f21_pair() -> CoherentConfig:
    return orbital_configuration(affine_action(7, 3, copies=2, shift=3))


@pytest.fixture(scope="session")
def c5_t2(c5) -> CoherentConfig:
    return tensor_product(c5, trivial_configuration(2))


@pytest.fixture(scope="session")
def paley13() -> CoherentConfig:
    return validate_configuration(PALEY13)


@pytest.fixture(scope="session")
def fano() -> CoherentConfig:
    return fano_configuration()


@pytest.fixture(scope="session")
def direct_sum() -> CoherentConfig:
    return direct_sum_configuration()


# One summary line per acceptance criterion.
_ACCEPTANCE: list[tuple[str, str]] = []


def pytest_runtest_makereport(item, call):
    if call.when != "call" or item.module.__name__ != "test_acceptance":
        return
    label = getattr(item.function, "criterion", item.name)
    outcome = "PASS" if call.excinfo is None else "FAIL"
    _ACCEPTANCE.append((label, outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome in _ACCEPTANCE:
        terminalreporter.write_line(f"{outcome}  {label}")
