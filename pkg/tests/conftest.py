import numpy as np
import pytest

from polyxl.field import make_field
from polyxl.polyring import Polynomial, QuadraticSystem


def _poly(F, n, terms):
    return Polynomial(F, n, terms)


@pytest.fixture(scope="session")
def gf7():
    return make_field(7)


@pytest.fixture(scope="session")
def gf16():
    return make_field(2, 4)


@pytest.fixture(scope="session")
def gf256():
    return make_field(2, 8)


@pytest.fixture(scope="session")
def integer_example():
    """Three quadratics in two variables with small integer coefficients, read over GF(101)."""
    F = make_field(101)
    f1 = _poly(F, 2, {(2, 0): 5, (1, 1): 6, (1, 0): 4, (0, 1): 5, (0, 0): 3})
    f2 = _poly(F, 2, {(2, 0): 4, (1, 1): 5, (0, 2): 3, (1, 0): 6, (0, 1): 2, (0, 0): 2})
    f3 = _poly(F, 2, {(2, 0): 2, (1, 1): 4, (0, 2): 2, (1, 0): 6, (0, 1): 1, (0, 0): 2})
    return QuadraticSystem(F, 2, [f1, f2, f3])


@pytest.fixture(scope="session")
def gf7_example():
    """Three quadratics in three variables over GF(7), used for the block matrix with k = 1."""
    F = make_field(7)
    g1 = _poly(F, 3, {(2, 0, 0): 5, (1, 1, 0): 6, (1, 0, 1): 4, (0, 1, 1): 1, (0, 0, 2): 5,
                      (1, 0, 0): 4, (0, 1, 0): 5, (0, 0, 0): 3})
    g2 = _poly(F, 3, {(2, 0, 0): 4, (1, 1, 0): 5, (1, 0, 1): 4, (0, 2, 0): 3, (0, 1, 1): 5, (0, 0, 2): 1,
                      (1, 0, 0): 6, (0, 1, 0): 2, (0, 0, 1): 3, (0, 0, 0): 2})
    g3 = _poly(F, 3, {(2, 0, 0): 2, (1, 1, 0): 4, (0, 2, 0): 2, (0, 0, 2): 6, (1, 0, 0): 6, (0, 1, 0): 1,
                      (0, 0, 1): 3, (0, 0, 0): 2})
    return QuadraticSystem(F, 3, [g1, g2, g3])


# Worked-example matrices, typed in by hand.
INTEGER_MAC = [
    [5, 6, 0, 0, 4, 5, 0, 3, 0, 0],
    [4, 5, 3, 0, 6, 2, 0, 2, 0, 0],
    [2, 4, 2, 0, 6, 1, 0, 2, 0, 0],
    [0, 5, 6, 0, 0, 4, 5, 0, 3, 0],
    [0, 4, 5, 3, 0, 6, 2, 0, 2, 0],
    [0, 2, 4, 2, 0, 6, 1, 0, 2, 0],
]

BLOCK_ROWS = ["x2*f1", "x2*f2", "x2*f3", "x3*f1", "x3*f2", "x3*f3", "f1", "f2", "f3"]
BLOCK_MAC = [
    ["0", "1", "5", "0", "6*x1+5", "4*x1", "0", "5*x1^2+4*x1+3", "0", "0"],
    ["3", "5", "1", "0", "5*x1+2", "4*x1+3", "0", "4*x1^2+6*x1+2", "0", "0"],
    ["2", "0", "6", "0", "4*x1+1", "3", "0", "2*x1^2+6*x1+2", "0", "0"],
    ["0", "0", "1", "5", "0", "6*x1+5", "4*x1", "0", "5*x1^2+4*x1+3", "0"],
    ["0", "3", "5", "1", "0", "5*x1+2", "4*x1+3", "0", "4*x1^2+6*x1+2", "0"],
    ["0", "2", "0", "6", "0", "4*x1+1", "3", "0", "2*x1^2+6*x1+2", "0"],
    ["0", "0", "0", "0", "0", "1", "5", "6*x1+5", "4*x1", "5*x1^2+4*x1+3"],
    ["0", "0", "0", "0", "3", "5", "1", "5*x1+2", "4*x1+3", "4*x1^2+6*x1+2"],
    ["0", "0", "0", "0", "2", "0", "6", "4*x1+1", "3", "2*x1^2+6*x1+2"],
]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def fix_then_eliminate_rank(F, pm, guess):
    """Rank of the full block matrix specialised at ``guess``, eliminated directly."""
    from polyxl.linalg import rank

    full, _ = pm.dense()
    pw = np.asarray(pm.gbasis.powers_at(F, guess, pm.D), dtype=F.dtype)
    fixed = F.matmul(pw[None], full.reshape(full.shape[0], -1)).reshape(full.shape[1], -1)
    return rank(F, fixed), fixed


# Acceptance verdicts, one line per criterion, echoed at the end of the run.
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
