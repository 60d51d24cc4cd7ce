"""Plain XL, hybrid XL and hybrid Wiedemann-XL solvers."""

from __future__ import annotations

import itertools
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Iterable, Iterator, Sequence

import numpy as np

from .estimator import (
    WXL_CONSTANT,
    NonTerminating,
    k_sweep,
    xl_solving_degree,
)
from .field import FieldContext
from .linalg import (
    Inconsistent,
    SingularOrUnlucky,
    SparseMatrix,
    echelon,
    rref,
    wiedemann_solve,
)
from .macaulay import build_macaulay, build_shift
from .polyring import (
    KOutOfRange,
    Polynomial,
    QuadraticSystem,
    XLElimination,
    count_monomials,
    enumerate_monomials,
)

__all__ = [
    "Status",
    "SolverConfig",
    "SolveOutcome",
    "ZeroPolynomial",
    "ResourceLimit",
    "ConfigError",
    "xl_solve",
    "hybrid_solve",
    "find_univariate_roots",
    "iter_guesses",
    "brute_force_roots",
]

# Geometric-series scans at m = n reach 2^m; this cap keeps them finite.
_GEOMETRIC_CAP = 1 << 16


class Status(str, Enum):
    SOLVED = "Solved"
    NO_SOLUTION = "NoSolution"
    DEGREE_TOO_LOW = "DegreeTooLow"


class ZeroPolynomial(ValueError):
    pass


class ResourceLimit(RuntimeError):
    """The Macaulay matrix would exceed the configured column budget."""


class ConfigError(ValueError):
    pass


@dataclass
class SolverConfig:
    algorithm: str = "xl"
    k: int | None = None
    D: int | None = None
    seed: int = 0
    elim_var: int = -1
    guess_order: str = "lex"
    jobs: int = 1
    escalate: int = 3
    max_columns: int = 20000
    find_all: bool = False
    row_budget: object = None
    omega: float = 2.37
    trace: object = None  # path or file-like for the PXL trace

    def describe(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "k": self.k,
            "D": self.D,
            "seed": self.seed,
            "elim_var": self.elim_var,
            "guess_order": self.guess_order,
            "jobs": self.jobs,
            "escalate": self.escalate,
            "max_columns": self.max_columns,
            "omega": self.omega,
        }


@dataclass
class SolveOutcome:
    status: Status
    solution: list | None = None
    stats: dict = dc_field(default_factory=dict)
    solutions: list = dc_field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status == Status.SOLVED


def find_univariate_roots(p, ctx: FieldContext | None = None) -> set[int]:
    """Roots in F_q of a univariate polynomial by exhaustive evaluation.

    ``p`` is a one-variable Polynomial or a coefficient list (low degree first,
    then ``ctx`` is required).
    """
    if isinstance(p, Polynomial):
        ctx = p.ctx
        if p.nvars != 1:
            raise ValueError("expected a polynomial in one variable")
        coeffs = p.univariate_coeffs(0)
    else:
        coeffs = [int(c) for c in p]
    if ctx is None:
        raise ValueError("field context required for a coefficient list")
    if not any(coeffs):
        raise ZeroPolynomial("the zero polynomial has every element as a root")
    xs = np.arange(ctx.q, dtype=np.int64)
    acc = np.zeros(ctx.q, dtype=np.int64)
    for c in reversed(coeffs):
        acc = np.asarray(ctx.add(ctx.mul(acc, xs), c), dtype=np.int64)
    return set(int(x) for x in np.flatnonzero(acc == 0))


def brute_force_roots(sys: QuadraticSystem) -> list[tuple[int, ...]]:
    """Every root in F_q^n by vectorised exhaustive evaluation (small q^n only)."""
    F = sys.ctx
    n = sys.n
    total = F.q**n
    if total > 1 << 24:
        raise ResourceLimit(f"q^n = {total} points is too many to enumerate")
    grid = np.indices((F.q,) * n).reshape(n, -1).T.astype(np.int64) if n else np.zeros((1, 0), dtype=np.int64)
    alive = np.ones(len(grid), dtype=bool)
    for f in sys.polys:
        val = np.zeros(len(grid), dtype=np.int64)
        for t, c in f.terms.items():
            term = np.full(len(grid), c, dtype=np.int64)
            for i, e in enumerate(t):
                if e:
                    term = np.asarray(F.mul(term, F.pow(grid[:, i], e)), dtype=np.int64)
            val = np.asarray(F.add(val, term), dtype=np.int64)
        alive &= val == 0
    return [tuple(int(v) for v in row) for row in grid[alive]]


def _solving_degree(nvars: int, m: int) -> int:
    return xl_solving_degree(nvars, m, allow_geometric=True, cap=_GEOMETRIC_CAP)


def _univariate_rows(ctx, M: np.ndarray, pivots: list, width: int, D: int) -> np.ndarray:
    """Echelon rows whose leading column lies in the trailing pure-power block, fully reduced."""
    block0 = width - (D + 1)
    sel = [i for i, c in enumerate(pivots) if c >= block0]
    if not sel:
        return np.zeros((0, D + 1), dtype=ctx.dtype)
    sub = M[sel][:, block0:]
    return rref(ctx, sub).matrix


def _trailing_to_coeffs(row: np.ndarray, D: int) -> list[int]:
    # trailing block columns are x^D, ..., x, 1
    return [int(v) for v in row[::-1]]


def xl_solve(sys: QuadraticSystem, cfg: SolverConfig | None = None) -> SolveOutcome:
    """Multiply, linearize, extract a univariate equation, find roots and repeat."""
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    stats: dict = {"stages": []}
    if sys.n > sys.m and sys.n > 0:
        raise ConfigError(f"XL needs n <= m (got n={sys.n}, m={sys.m})")
    polys = [f for f in sys.polys if not f.is_zero()]
    found: list = []
    status = _xl_recursive(sys.ctx, sys.n, polys, cfg, cfg.D, stats, found)
    # done: verify everything against the caller's system
    verified = [s for s in found if sys.is_root(s)]
    if len(verified) != len(found):  # pragma: no cover - guarded by recursion checks
        raise AssertionError("XL produced a non-root")
    stats["elapsed"] = time.perf_counter() - t0
    if verified:
        return SolveOutcome(Status.SOLVED, list(verified[0]), stats, [list(s) for s in verified])
    return SolveOutcome(status, None, stats)


def _xl_recursive(ctx, n, polys, cfg, D_fixed, stats, found) -> Status:
    if n == 0:
        if all(f.is_zero() for f in polys):
            found.append(())
            return Status.SOLVED
        return Status.NO_SOLUTION
    polys = [f for f in polys if not f.is_zero()]
    if not polys:
        # every point is a root; report the all-zero one (or all points if asked)
        if cfg.find_all:
            found.extend(itertools.product(range(ctx.q), repeat=n))
        else:
            found.append((0,) * n)
        return Status.SOLVED
    if any(f.degree() == 0 for f in polys):
        return Status.NO_SOLUTION
    m = len(polys)
    sys_ = QuadraticSystem(ctx, n, polys)
    e = cfg.elim_var % n
    if D_fixed is not None:
        D0 = D_fixed
    else:
        try:
            D0 = max(2, _solving_degree(n, m))
        except NonTerminating:
            return Status.DEGREE_TOO_LOW
    last = Status.DEGREE_TOO_LOW
    for D in range(D0, D0 + cfg.escalate + 1):
        if D >= ctx.q:
            warnings.warn(f"D={D} >= q={ctx.q}: the degree estimate is outside its validity window", stacklevel=2)
        width = count_monomials(n, 0, D)
        if width > cfg.max_columns:
            raise ResourceLimit(f"XL at n={n}, D={D} needs {width} columns (> {cfg.max_columns})")
        cols = enumerate_monomials(n, 0, D, XLElimination(e))
        shift = build_shift(sys_, D)
        mac = build_macaulay(shift, cols, sys_)
        ech = echelon(ctx, mac.rows)
        stage = {"n": n, "D": D, "rows": mac.shape[0], "cols": mac.shape[1], "rank": ech.rank}
        stats["stages"].append(stage)
        uni = _univariate_rows(ctx, ech.matrix, ech.pivots, width, D)
        if len(uni) == 0:
            continue
        nz = [r for r in uni if r.any()]
        if not nz:
            continue
        row = nz[-1]
        coeffs = _trailing_to_coeffs(row, D)
        if coeffs and coeffs[0] and not any(coeffs[1:]):
            return Status.NO_SOLUTION  # 1 lies in the ideal
        roots = sorted(find_univariate_roots(coeffs, ctx))
        stage["univariate_degree"] = max(i for i, c in enumerate(coeffs) if c)
        stage["roots"] = roots
        if not roots:
            return Status.NO_SOLUTION
        any_solved = False
        for r in roots:
            sub = [f.substitute({e: r}) for f in polys]
            inner: list = []
            st = _xl_recursive(ctx, n - 1, sub, cfg, None, stats, inner)
            for s in inner:
                full = tuple(s[:e]) + (r,) + tuple(s[e:])
                if all(f.evaluate(full) == 0 for f in polys):
                    found.append(full)
                    any_solved = True
            if any_solved and not cfg.find_all:
                return Status.SOLVED
        return Status.SOLVED if any_solved else Status.NO_SOLUTION
    return last


# -- guessing ------------------------------------------------------------------


def _check_k(sys: QuadraticSystem, k: int, lo: int = 1):
    if not lo <= k < sys.n:
        raise KOutOfRange(f"k={k} outside [{lo}, {sys.n})")


def auto_k(algorithm: str, sys: QuadraticSystem, omega: float = 2.37) -> int:
    alg = {"hxl": "hxl", "hwxl": "hwxl", "pxl": "pxl"}[algorithm]
    rep = k_sweep(alg, sys.n, sys.m, sys.ctx.q, omega, WXL_CONSTANT)
    k = rep.argmin_k
    if k is None or k < 1:
        k = 1
    return min(k, sys.n - 1)


def iter_guesses(q: int, k: int, start: int = 0, order: str = "lex") -> Iterator[tuple[int, ...]]:
    """All of F_q^k in lexicographic order beginning at index ``start`` (wrapping)."""
    total = q**k
    if order not in ("lex", "reverse"):
        raise ConfigError(f"unknown guess order {order!r}")
    for j in range(total):
        idx = (start + j) % total if order == "lex" else (start - j) % total
        digits = []
        for _ in range(k):
            digits.append(idx % q)
            idx //= q
        yield tuple(reversed(digits))


def _guess_start(cfg: SolverConfig, q: int, k: int) -> int:
    return int(np.random.default_rng(cfg.seed).integers(0, q**k))


def _solve_fixed(kind: str, sys: QuadraticSystem, k: int, guess, cfg: SolverConfig, stats: dict):
    """Solutions of the system after fixing x_1..x_k = guess (list of full tuples)."""
    fixed = sys.substitute({i: int(g) for i, g in enumerate(guess)})
    if kind == "hxl":
        sub_cfg = SolverConfig(algorithm="xl", D=cfg.D, elim_var=cfg.elim_var, escalate=cfg.escalate,
                               max_columns=cfg.max_columns, find_all=cfg.find_all)
        out = xl_solve(fixed, sub_cfg)
        stats.setdefault("inner_stages", []).append(out.stats.get("stages", [])[:1])
        if out.status == Status.DEGREE_TOO_LOW:
            stats["degree_too_low"] = stats.get("degree_too_low", 0) + 1
        return [tuple(guess) + tuple(s) for s in out.solutions]
    sols = _wxl_linear_solve(fixed, cfg, stats)
    full = [tuple(guess) + tuple(s) for s in sols]
    return [s for s in full if sys.is_root(s)]


def _wxl_linear_solve(fixed: QuadraticSystem, cfg: SolverConfig, stats: dict) -> list:
    """Linearised solve of the fixed system with Wiedemann; returns verified roots (usually one)."""
    F = fixed.ctx
    n = fixed.n
    polys = [f for f in fixed.polys if not f.is_zero()]
    if any(f.degree() == 0 for f in polys):
        return []
    sys_ = QuadraticSystem(F, n, polys)
    D = cfg.D if cfg.D is not None else max(2, _solving_degree(n, len(polys)))
    # the linear solve needs at least as many rows as non-constant monomials
    for _ in range(cfg.escalate + 1):
        nrows = len(polys) * count_monomials(n, 0, D - 2)
        if nrows >= count_monomials(n, 1, D):
            break
        D += 1
    cols = enumerate_monomials(n, 0, D)
    if len(cols) > cfg.max_columns:
        raise ResourceLimit(f"WXL at n={n}, D={D} needs {len(cols)} columns")
    mac = build_macaulay(build_shift(sys_, D), cols, sys_).rows
    A = mac[:, :-1]
    rhs = np.asarray(F.neg(mac[:, -1])).astype(F.dtype)
    N = A.shape[1]
    nrows = A.shape[0]
    stats.setdefault("wxl_dims", (nrows, N, D))
    if nrows < N:
        return []
    rng = np.random.default_rng(cfg.seed)
    var_cols = [cols.index(tuple(1 if j == i else 0 for j in range(n))) for i in range(n)]
    degenerate = False
    for attempt in range(3):
        sel = rng.permutation(nrows)[:N]
        extra = rng.integers(0, nrows, size=(N, 2))
        cf = F.random(rng, (N, 2))
        Asq = A[sel].copy()
        bsq = rhs[sel].copy()
        for t in range(2):
            Asq = np.asarray(F.add(Asq, F.mul(cf[:, t : t + 1], A[extra[:, t]]))).astype(F.dtype)
            bsq = np.asarray(F.add(bsq, F.mul(cf[:, t], rhs[extra[:, t]]))).astype(F.dtype)
        try:
            x = wiedemann_solve(SparseMatrix.from_dense(F, Asq), bsq, seed=cfg.seed + attempt, retries=4)
        except (SingularOrUnlucky, Inconsistent):
            stats["wiedemann_retries"] = stats.get("wiedemann_retries", 0) + 1
            continue
        sol = tuple(int(x[c]) for c in var_cols)
        if fixed.is_root(sol):
            if not cfg.find_all:
                return [sol]
            # other roots may share this guess; the exact solution set settles it
            return _affine_roots(fixed, A, rhs, var_cols)
        if np.array_equal(F.matvec(A, x), rhs):
            # consistent but not a root: the solution set has positive dimension
            degenerate = True
            break
    if not degenerate:
        return []
    # Several roots share this guess, so Wiedemann only sees one point of an affine space.
    stats["dense_fallbacks"] = stats.get("dense_fallbacks", 0) + 1
    return _affine_roots(fixed, A, rhs, var_cols)


def _affine_roots(fixed: QuadraticSystem, A: np.ndarray, rhs: np.ndarray, var_cols, cap: int = 1 << 16) -> list:
    """Roots among the points of {x : A x = rhs}, by exact elimination and enumeration."""
    F = fixed.ctx
    N = A.shape[1]
    ech = rref(F, np.concatenate([A, rhs[:, None]], axis=1), pivot_cols_limit=N + 1)
    if N in ech.pivots:
        return []
    piv = ech.pivots
    free = sorted(set(range(N)) - set(piv))
    if F.q ** len(free) > cap:
        raise ResourceLimit(f"WXL solution space of dimension {len(free)} is too large to enumerate")
    x0 = np.zeros(N, dtype=F.dtype)
    x0[piv] = ech.matrix[: len(piv), N]
    pts = x0[var_cols][None, :]
    if free:
        V = np.zeros((len(free), N), dtype=F.dtype)
        for j, f in enumerate(free):
            V[j, f] = 1
            V[j, piv] = F.neg(ech.matrix[: len(piv), f])
        coeffs = np.array(list(itertools.product(range(F.q), repeat=len(free))), dtype=F.dtype)
        pts = np.unique(F.add(F.matmul(coeffs, V[:, var_cols]), pts).astype(F.dtype), axis=0)
    return [tuple(int(v) for v in p) for p in pts if fixed.is_root([int(v) for v in p])]


def _guess_worker(args):
    kind, sys_json, k, guesses, cfg = args
    sys = QuadraticSystem.from_json(sys_json)
    stats: dict = {}
    found = []
    tried = 0
    for g in guesses:
        tried += 1
        sols = _solve_fixed(kind, sys, k, g, cfg, stats)
        if sols:
            found.extend(sols)
            if not cfg.find_all:
                break
    return found, tried


def hybrid_solve(sys: QuadraticSystem, cfg: SolverConfig) -> SolveOutcome:
    """Guess x_1..x_k over F_q^k and solve the rest by XL (hxl) or Wiedemann XL (hwxl)."""
    kind = cfg.algorithm.lower()
    if kind not in ("hxl", "hwxl"):
        raise ConfigError(f"hybrid_solve handles hxl/hwxl, not {cfg.algorithm!r}")
    t0 = time.perf_counter()
    k = cfg.k if cfg.k is not None else auto_k(kind, sys, cfg.omega)
    _check_k(sys, k)
    if sys.n > sys.m + k:
        raise ConfigError("too few equations for the number of unguessed variables")
    q = sys.ctx.q
    start = _guess_start(cfg, q, k)
    guesses = iter_guesses(q, k, start, cfg.guess_order)
    stats: dict = {"k": k, "guess_start": start}
    found: list = []
    tried = 0
    if cfg.jobs <= 1:
        for g in guesses:
            tried += 1
            sols = _solve_fixed(kind, sys, k, g, cfg, stats)
            if sols:
                found.extend(sols)
                if not cfg.find_all:
                    break
    else:
        allg = list(guesses)
        size = -(-len(allg) // cfg.jobs)
        chunks = [allg[i : i + size] for i in range(0, len(allg), size)]
        payload = sys.to_json()
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            futs = [ex.submit(_guess_worker, (kind, payload, k, ch, cfg)) for ch in chunks]
            for fut in futs:
                sols, t = fut.result()
                tried += t
                found.extend(sols)
                if found and not cfg.find_all:
                    for other in futs:
                        other.cancel()
                    break
    stats["guesses_tried"] = tried
    stats["elapsed"] = time.perf_counter() - t0
    found = [s for s in found if sys.is_root(s)]
    if found:
        uniq = sorted(set(found))
        return SolveOutcome(Status.SOLVED, list(found[0]), stats, [list(s) for s in uniq])
    return SolveOutcome(Status.NO_SOLUTION, None, stats)
