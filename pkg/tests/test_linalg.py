import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyxl.field import make_field
from polyxl.linalg import (
    Inconsistent,
    NonUnitPivot,
    SparseMatrix,
    berlekamp_massey,
    echelon,
    eliminate_columns,
    inverse,
    left_kernel,
    minimal_polynomial,
    rank,
    rref,
    solve_dense,
    wiedemann_solve,
)

FIELDS = [(7, 1), (2, 4), (2, 8), (3, 2), (2, 11)]


def random_invertible(F, n, rng):
    while True:
        A = F.random(rng, (n, n))
        if rank(F, A) == n:
            return A


def det(F, A):
    """Determinant by cofactor-free elimination on Python ints."""
    M = [[int(v) for v in row] for row in A]
    n = len(M)
    d = 1
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c]), None)
        if p is None:
            return 0
        if p != c:
            M[c], M[p] = M[p], M[c]
            d = F.neg(d)
        d = F.mul(d, M[c][c])
        inv = F.inv(M[c][c])
        for r in range(c + 1, n):
            f = F.mul(M[r][c], inv)
            if f:
                M[r] = [F.sub(a, F.mul(f, b)) for a, b in zip(M[r], M[c])]
    return d


def minor_rank(F, A):
    """Rank as the largest size of a nonzero minor (small matrices only)."""
    rows, cols = A.shape
    for s in range(min(rows, cols), 0, -1):
        for ri in itertools.combinations(range(rows), s):
            for ci in itertools.combinations(range(cols), s):
                if det(F, A[np.ix_(ri, ci)]):
                    return s
    return 0


def test_rref_small_cases(gf7):
    res = rref(gf7, np.array([[1, 2], [2, 4]]))
    assert res.matrix.tolist() == [[1, 2], [0, 0]] and res.rank == 1
    eye = np.eye(4, dtype=np.uint8)
    assert np.array_equal(rref(gf7, eye).matrix, eye)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_rank_matches_minor_oracle_gf16(seed):
    F = make_field(2, 4)
    rng = np.random.default_rng(seed)
    # low-rank products make the oracle non-trivial
    r = int(rng.integers(1, 5))
    A = F.matmul(F.random(rng, (5, r)), F.random(rng, (r, 6)))
    assert rank(F, A) == minor_rank(F, A)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(FIELDS), st.integers(1, 30), st.integers(1, 30), st.integers(0, 2**32))
def test_rref_transform_idempotence(field, rows, cols, seed):
    F = make_field(*field)
    rng = np.random.default_rng(seed)
    A = F.random(rng, (rows, cols))
    if rows > 2:
        A[-1] = F.add(A[0], A[1])
    res = rref(F, A, transform=True)
    assert np.array_equal(F.matmul(res.transform, A), res.matrix)
    assert np.array_equal(rref(F, res.matrix).matrix, res.matrix)
    for i, c in enumerate(res.pivots):
        col = res.matrix[:, c]
        assert col[i] == 1 and np.count_nonzero(col) == 1
    ech = echelon(F, A, transform=True)
    assert ech.rank == res.rank and ech.pivots == res.pivots
    assert np.array_equal(F.matmul(ech.transform, A), ech.matrix)


def test_blocked_rref_on_wide_matrix():
    # large enough to go through the recursive panel path
    F = make_field(2, 4)
    rng = np.random.default_rng(3)
    A = F.matmul(F.random(rng, (300, 250)), F.random(rng, (250, 400)))
    res = rref(F, A, transform=True)
    assert res.rank == 250
    assert np.array_equal(F.matmul(res.transform, A), res.matrix)
    assert rank(F, A.T) == 250


def test_inverse_and_solve(gf256, rng):
    A = random_invertible(gf256, 12, rng)
    Ainv = inverse(gf256, A)
    assert np.array_equal(gf256.matmul(A, Ainv), np.eye(12, dtype=np.uint8))
    b = gf256.random(rng, 12)
    x = solve_dense(gf256, A, b)
    assert np.array_equal(gf256.matvec(A, x), b)


def test_solve_inconsistent(gf7):
    A = np.array([[1, 1], [2, 2]])
    with pytest.raises(Inconsistent):
        solve_dense(gf7, A, [1, 0])


def test_left_kernel(gf16, rng):
    B = gf16.random(rng, (9, 5))
    K, piv = left_kernel(gf16, B)
    assert K.shape == (4, 9) and len(piv) == 5
    assert not gf16.matmul(K, B).any()
    assert rank(gf16, K) == 4


def test_eliminate_columns(gf7):
    out = eliminate_columns(gf7, [0, 2, 5], [0, 1, 3], [1])
    assert out.tolist() == [0, 0, 6]
    with pytest.raises(NonUnitPivot):
        eliminate_columns(gf7, [0, 2, 5], [0, 2, 3], [1])


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(FIELDS), st.integers(2, 25), st.integers(0, 2**32))
def test_rank_invariant_under_row_mixing(field, n, seed):
    F = make_field(*field)
    rng = np.random.default_rng(seed)
    A = F.matmul(F.random(rng, (n, 3)), F.random(rng, (3, n + 2)))
    U = random_invertible(F, n, rng)
    assert rank(F, F.matmul(U, A)) == rank(F, A)


def test_sparse_matrix_round_trip(gf16, rng):
    A = gf16.random(rng, (20, 15))
    A[A < 12] = 0
    S = SparseMatrix.from_dense(gf16, A)
    assert np.array_equal(S.to_dense(), A)
    assert S.nnz == np.count_nonzero(A)
    x = gf16.random(rng, 15)
    assert np.array_equal(S.matvec(x), gf16.matvec(A, x))


def test_berlekamp_massey_known(gf7):
    assert minimal_polynomial(gf7, [1] * 10) == [6, 1]
    fib = [0, 1]
    for _ in range(12):
        fib.append((fib[-1] + fib[-2]) % 7)
    assert minimal_polynomial(gf7, fib) == [6, 6, 1]
    assert berlekamp_massey(gf7, fib) == [1, 6, 6]


def _polymod(F, a, b):
    a = list(a)
    while len(a) >= len(b) and any(a):
        if a[-1] == 0:
            a.pop()
            continue
        c = F.mul(a[-1], F.inv(b[-1]))
        shift = len(a) - len(b)
        for i, v in enumerate(b):
            a[shift + i] = F.sub(a[shift + i], F.mul(c, v))
        a.pop()
    return [v for v in a]


def _charpoly(F, A):
    """det(xI - A) by evaluation at N+1 points and Lagrange interpolation."""
    N = A.shape[0]
    xs = list(range(N + 1))
    ys = [det(F, F.sub(np.eye(N, dtype=np.int64) * x, A)) for x in xs]
    coeffs = [0] * (N + 1)
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        basis = [1]
        denom = 1
        for j, xj in enumerate(xs):
            if j == i:
                continue
            basis = [F.sub(a, F.mul(xj, b)) for a, b in zip([0] + basis, basis + [0])]
            denom = F.mul(denom, F.sub(xi, xj))
        scale = F.mul(yi, F.inv(denom))
        coeffs = [F.add(c, F.mul(scale, v)) for c, v in zip(coeffs, basis)]
    return coeffs


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32))
def test_krylov_recurrence_divides_charpoly(N, seed):
    F = make_field(7)
    rng = np.random.default_rng(seed)
    A = F.random(rng, (N, N))
    u, v = F.random(rng, N), F.random(rng, N)
    seq = []
    for _ in range(2 * N):
        seq.append(F.dot(u, v))
        v = F.matvec(A, v)
    f = minimal_polynomial(F, seq)
    chi = _charpoly(F, A)
    assert chi[-1] == 1
    assert not any(_polymod(F, chi, f))


def test_wiedemann_small(gf7):
    S = SparseMatrix.from_dense(gf7, np.diag([2, 3, 5]))
    assert wiedemann_solve(S, [1, 1, 1]).tolist() == [4, 5, 3]
    eye = SparseMatrix.from_dense(gf7, np.eye(4, dtype=np.uint8))
    assert wiedemann_solve(eye, [3, 1, 4, 1]).tolist() == [3, 1, 4, 1]


@pytest.mark.parametrize("field", [(2, 4), (7, 1), (2, 8)])
def test_wiedemann_matches_dense(field):
    F = make_field(*field)
    rng = np.random.default_rng(30)
    done = 0
    while done < 15:
        N = int(rng.integers(5, 31))
        A = F.random(rng, (N, N))
        A[rng.random((N, N)) > 0.15] = 0
        np.fill_diagonal(A, F.random(rng, N, nonzero=True))
        if rank(F, A) < N:
            continue
        b = F.random(rng, N)
        x = wiedemann_solve(SparseMatrix.from_dense(F, A), b, seed=done)
        assert np.array_equal(x, solve_dense(F, A, b))
        done += 1
