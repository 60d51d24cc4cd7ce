"""Polynomial XL: eliminate once over F_q[x_1..x_k], then solve a small residual per guess."""

from __future__ import annotations

import json
import multiprocessing as mp
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .estimator import alpha_estimate, degree_of_regularity
from .field import FieldContext
from .linalg import echelon, rref
from .macaulay import BlockMacaulay, build_block_macaulay, poly_matmul
from .polyring import KOutOfRange, Monomial, QuadraticSystem, XLElimination
from .xl import (
    ConfigError,
    ResourceLimit,
    SolveOutcome,
    SolverConfig,
    Status,
    _guess_start,
    auto_k,
    find_univariate_roots,
    iter_guesses,
    xl_solve,
)

__all__ = [
    "DegreeBoundViolation",
    "Linearize1Result",
    "linearize1",
    "fix",
    "linearize2",
    "Linearize2Result",
    "pxl_solve",
    "pxl_degree",
]


class DegreeBoundViolation(AssertionError):
    """An entry above the degree bound D - d appeared at elimination time."""


class _Trace:
    def __init__(self, target):
        self._own = False
        if target is None:
            self._fh = None
        elif hasattr(target, "write"):
            self._fh = target
        else:
            self._fh = open(target, "w")
            self._own = True

    def emit(self, **rec):
        if self._fh is not None:
            self._fh.write(json.dumps(rec, default=_jsonable) + "\n")

    def close(self):
        if self._own:
            self._fh.close()


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x).__name__)


@dataclass
class Linearize1Result:
    pm: BlockMacaulay
    ranks: dict  # d -> rank of the constant block PM[I_d, T_d]
    pivots: dict  # d -> pivot columns (indices into T_d)
    nonpivot: dict  # e -> surviving column indices into T_e
    residual: dict  # e -> planes (P_e, rows_e, |nonpivot[e]|); rows_e <= nrows
    nrows: int
    row_degree: list  # degree d whose kernel produced each residual row
    max_degree: dict = dc_field(default_factory=dict)  # d -> max entry degree seen at (d)-3
    violations: list = dc_field(default_factory=list)
    timings: dict = dc_field(default_factory=dict)
    pivot_rows: dict | None = None  # d -> {e: planes}, only when kept

    @property
    def alpha_actual(self) -> int:
        return sum(len(v) for v in self.nonpivot.values())

    @property
    def residual_columns(self) -> list[Monomial]:
        cols = []
        for e in range(self.pm.D, -1, -1):
            mon = self.pm.col_monomials(e)
            cols.extend(mon[j] for j in self.nonpivot[e])
        return cols


def _max_degree(basis, planes: np.ndarray) -> int:
    nz = np.flatnonzero(planes.reshape(planes.shape[0], -1).any(axis=1))
    return int(basis.degrees[nz].max()) if len(nz) else -1


def _pad(planes: np.ndarray, P: int, rows: int) -> np.ndarray:
    p0, r0, w = planes.shape
    if p0 == P and r0 == rows:
        return planes
    out = np.zeros((P, rows, w), dtype=planes.dtype)
    out[:p0, :r0] = planes[:P]
    return out


def linearize1(pm: BlockMacaulay, trace=None, keep_pivot_rows: bool = False, strict: bool = True) -> Linearize1Result:
    """Partial elimination of PM degree by degree, from D down to 2.

    For each d the constant block PM[I_d, T_d] is reduced over F_q with an
    explicit transform E.  The same E is applied to the polynomial blocks in
    T_{d-1} and T_{d-2}; rows of E that annihilate the constant block become
    residual rows.  Residual rows coming from higher degrees then have their
    entries in the pivot columns of T_d cleared using the pivot rows.
    """
    F = pm.ctx
    D = pm.D
    basis = pm.gbasis
    tr = trace if isinstance(trace, _Trace) else _Trace(trace)
    P = {e: basis.size(pm.cap(e)) for e in range(D + 1)}
    width = {e: len(pm.col_monomials(e)) for e in range(D + 1)}
    res = {e: np.zeros((P[e], 0, width[e]), dtype=F.dtype) for e in range(D + 1)}
    nrows = 0
    row_degree: list = []
    ranks, pivots, nonpivot, max_deg = {}, {}, {}, {}
    violations: list = []
    timings: dict = {}
    kept = {} if keep_pivot_rows else None
    for d in range(D, 1, -1):
        t0 = time.perf_counter()
        target = pm.targets.get(d, 0)
        while True:
            B = pm.const_block(d)
            if d == D and not keep_pivot_rows:
                ech = echelon(F, B, transform=True)
            else:
                ech = rref(F, B, transform=True)
            r = ech.rank
            if r >= target or not pm.pool[d]:
                break
            pm.add_rows(d, target - r + 2)
        E = ech.transform
        pc = np.asarray(ech.pivots, dtype=np.int64)
        npc = np.setdiff1d(np.arange(width[d]), pc)
        ranks[d], pivots[d], nonpivot[d] = r, pc, npc
        L1 = pm.block(d, d - 1, cap=1)
        L2 = pm.block(d, d - 2, cap=2)
        Epiv = E[:r][None]
        K = E[r:][None]
        # (d)-2: the pivot rows' polynomial parts below T_d (unused at d = D)
        if d < D or kept is not None:
            PL1 = poly_matmul(F, basis, Epiv, L1, 1)
            PL2 = poly_matmul(F, basis, Epiv, L2, 2)
        if kept is not None:
            kept[d] = {d: ech.matrix[:r][None], d - 1: PL1, d - 2: PL2}
        # (d)-3: clear pivot columns from rows that carry no leading coefficient
        if d < D and nrows:
            Rd = _pad(res[d], P[d], nrows)
            deg = _max_degree(basis, Rd)
            max_deg[d] = deg
            if deg > D - d:
                msg = f"(d)-3 at d={d}: entry of degree {deg} > D-d={D - d}"
                violations.append(msg)
                if strict:
                    raise DegreeBoundViolation(msg)
            C = Rd[:, :, pc][: basis.size(D - d)]
            Rp = ech.matrix[:r][None]
            res[d] = np.asarray(F.sub(Rd[:, :, npc], poly_matmul(F, basis, C, Rp[:, :, npc], pm.cap(d))), dtype=F.dtype)
            res[d - 1] = np.asarray(
                F.sub(_pad(res[d - 1], P[d - 1], nrows), poly_matmul(F, basis, C, PL1, pm.cap(d - 1))), dtype=F.dtype
            )
            res[d - 2] = np.asarray(
                F.sub(_pad(res[d - 2], P[d - 2], nrows), poly_matmul(F, basis, C, PL2, pm.cap(d - 2))), dtype=F.dtype
            )
        else:
            res[d] = _pad(res[d], P[d], nrows)[:, :, npc]
        # new residual rows from the kernel of the constant block
        nk = K.shape[1]
        if nk:
            KL1 = poly_matmul(F, basis, K, L1, pm.cap(d - 1))
            KL2 = poly_matmul(F, basis, K, L2, pm.cap(d - 2))
            res[d - 1] = np.concatenate([_pad(res[d - 1], P[d - 1], nrows), KL1], axis=1)
            res[d - 2] = np.concatenate([_pad(res[d - 2], P[d - 2], nrows), KL2], axis=1)
            nrows += nk
            row_degree.extend([d] * nk)
        timings[d] = time.perf_counter() - t0
        tr.emit(step="linearize1", d=d, rows=int(B.shape[0]), cols=int(width[d]), rank=int(r),
                eliminated=int(len(pc)), new_residual_rows=int(nk), max_entry_degree=max_deg.get(d),
                seconds=round(timings[d], 6))
    for e in (1, 0):
        nonpivot[e] = np.arange(width[e])
    if trace is not None and not isinstance(trace, _Trace):
        tr.close()
    return Linearize1Result(
        pm=pm,
        ranks=ranks,
        pivots=pivots,
        nonpivot=nonpivot,
        residual=res,
        nrows=nrows,
        row_degree=row_degree,
        max_degree=max_deg,
        violations=violations,
        timings=timings,
        pivot_rows=kept,
    )


def fix(res: Linearize1Result, guess: Sequence[int]) -> np.ndarray:
    """Residual matrix over F_q at x_1..x_k = guess; columns follow ``res.residual_columns``."""
    pm = res.pm
    F = pm.ctx
    if len(guess) != pm.k:
        raise ValueError(f"need {pm.k} guessed values, got {len(guess)}")
    blocks = []
    for e in range(pm.D, -1, -1):
        planes = res.residual[e]
        Pn, rows_e, w = planes.shape
        out = np.zeros((res.nrows, w), dtype=F.dtype)
        if rows_e and w:
            pw = np.asarray(pm.gbasis.powers_at(F, guess, pm.cap(e)), dtype=F.dtype)[:Pn]
            val = F.matmul(pw[None, :], planes.reshape(Pn, -1)).reshape(rows_e, w)
            out[:rows_e] = val
        blocks.append(out)
    return np.concatenate(blocks, axis=1) if blocks else np.zeros((res.nrows, 0), dtype=F.dtype)


def fix_pivot_rows(res: Linearize1Result, guess: Sequence[int]) -> np.ndarray:
    """Fixed pivot rows over the full column set T_D..T_0 (needs keep_pivot_rows)."""
    if res.pivot_rows is None:
        raise ValueError("linearize1 was run without keep_pivot_rows")
    pm = res.pm
    F = pm.ctx
    total = len(pm.columns)
    out = []
    for d in range(pm.D, 1, -1):
        r = res.ranks[d]
        row = np.zeros((r, total), dtype=F.dtype)
        for e, planes in res.pivot_rows[d].items():
            sl = pm.degree_slice(e)
            Pn = planes.shape[0]
            pw = np.asarray(pm.gbasis.powers_at(F, guess, pm.D), dtype=F.dtype)[:Pn]
            if r and planes.shape[2]:
                row[:, sl] = F.matmul(pw[None, :], planes.reshape(Pn, -1)).reshape(r, -1)
        out.append(row)
    return np.concatenate(out, axis=0)


def residual_full_columns(res: Linearize1Result) -> np.ndarray:
    """Position of each residual column inside T_{<=D} (column order of the PM)."""
    pm = res.pm
    idx = []
    for e in range(pm.D, -1, -1):
        start = pm.degree_slice(e).start
        idx.extend(start + int(j) for j in res.nonpivot[e])
    return np.array(idx, dtype=np.int64)


@dataclass
class Linearize2Result:
    echelon: object
    columns: list
    univariate: list  # coefficient lists (low degree first), one per univariate row
    inconsistent: bool


def linearize2(ctx: FieldContext, M: np.ndarray, columns: Sequence[Monomial], elim_var: int = -1) -> Linearize2Result:
    """RREF with the pure powers of the elimination variable placed last."""
    nv = len(columns[0]) if columns else 0
    order = XLElimination(elim_var)
    perm = sorted(range(len(columns)), key=lambda j: tuple(-x for x in order.key(columns[j])))
    cols = [columns[j] for j in perm]
    ech = rref(ctx, M[:, perm]) if len(perm) else rref(ctx, M)
    e = elim_var % nv if nv else 0
    pure = [order.is_pure(t) for t in cols]
    const_col = cols.index((0,) * nv) if (0,) * nv in cols else -1
    inconsistent = False
    uni = []
    for i, c in enumerate(ech.pivots):
        if not pure[c]:
            continue
        row = ech.matrix[i]
        coeffs: dict = {}
        for j in np.flatnonzero(row):
            coeffs[cols[j][e]] = int(row[j])
        if c == const_col:
            inconsistent = True
        deg = max(coeffs)
        uni.append([coeffs.get(t, 0) for t in range(deg + 1)])
    return Linearize2Result(ech, cols, uni, inconsistent)


def pxl_degree(n: int, m: int, k: int) -> int:
    return max(2, degree_of_regularity(n - k, m))


def _continue(sys: QuadraticSystem, k: int, guess, e_glob: int, root: int, find_all: bool) -> list:
    """Finish a partial assignment with XL on the variables still free."""
    vals = {i: int(g) for i, g in enumerate(guess)}
    vals[e_glob] = int(root)
    rest = sys.substitute(vals)
    free = [i for i in range(sys.n) if i not in vals]
    out = xl_solve(rest, SolverConfig(algorithm="xl", find_all=find_all)) if rest.n else None
    sols = []
    inner = out.solutions if out is not None else ([[]] if rest.is_root(()) else [])
    for s in inner:
        full = [0] * sys.n
        for i, v in vals.items():
            full[i] = v
        for i, v in zip(free, s):
            full[i] = int(v)
        if sys.is_root(full):
            sols.append(tuple(full))
    return sols


def _process_guess(res: Linearize1Result, sys: QuadraticSystem, guess, e_main: int, find_all: bool):
    F = sys.ctx
    k = res.pm.k
    M = fix(res, guess)
    l2 = linearize2(F, M, res.residual_columns, e_main)
    info = {"guess": list(map(int, guess)), "residual_rank": int(l2.echelon.rank),
            "univariate": bool(l2.univariate) and not l2.inconsistent}
    if l2.inconsistent:
        return [], info
    if not l2.univariate:
        # Consistent but no univariate row: the fixed system has several solutions over
        # the closure and its eliminant is longer than the residual columns can hold.
        # Raising D does not change those columns, so this guess is finished by XL.
        vals = {i: int(g) for i, g in enumerate(guess)}
        try:
            out = xl_solve(sys.substitute(vals), SolverConfig(algorithm="xl", find_all=find_all))
        except ResourceLimit:
            info["xl_fallback"] = "resource_limit"
            return [], info
        info["xl_fallback"] = out.status.value
        sols = [tuple(map(int, guess)) + tuple(map(int, t)) for t in out.solutions]
        return [t for t in sols if sys.is_root(t)], info
    coeffs = l2.univariate[-1]
    roots = sorted(find_univariate_roots(coeffs, F)) if any(coeffs) else []
    sols = []
    for r in roots:
        sols.extend(_continue(sys, k, guess, k + e_main, r, find_all))
        if sols and not find_all:
            break
    return sols, info


def _resolved(info: dict) -> bool:
    """The guess was decided, either by a univariate row or by the XL fallback."""
    return info["univariate"] or info.get("xl_fallback") in (Status.SOLVED.value, Status.NO_SOLUTION.value)


_WORKER: dict = {}


def _init_worker(res, sys, e_main, find_all):
    _WORKER.update(res=res, sys=sys, e_main=e_main, find_all=find_all)


def _guess_chunk(guesses):
    w = _WORKER
    found, infos = [], []
    for g in guesses:
        sols, info = _process_guess(w["res"], w["sys"], g, w["e_main"], w["find_all"])
        infos.append(info)
        if sols:
            found.extend(sols)
            if not w["find_all"]:
                break
    return found, infos


def pxl_solve(sys: QuadraticSystem, cfg: SolverConfig | None = None) -> SolveOutcome:
    cfg = cfg or SolverConfig(algorithm="pxl")
    t_start = time.perf_counter()
    n, m = sys.n, sys.m
    k = cfg.k if cfg.k is not None else auto_k("pxl", sys, cfg.omega)
    if not 1 <= k < n:
        raise KOutOfRange(f"PXL needs 1 <= k < n (got k={k}, n={n})")
    if m <= n - k:
        raise ConfigError(f"PXL needs m > n - k (got m={m}, n-k={n - k})")
    e_glob = cfg.elim_var % n
    if e_glob < k:
        raise ConfigError("the elimination variable must be one of the unguessed variables")
    e_main = e_glob - k
    D0 = cfg.D if cfg.D is not None else pxl_degree(n, m, k)
    tr = _Trace(cfg.trace)
    stats: dict = {"k": k, "attempts": []}
    found: list = []
    try:
        for D in range(D0, D0 + cfg.escalate + 1):
            t0 = time.perf_counter()
            pm = build_block_macaulay(sys, k, D, row_budget=cfg.row_budget, seed=cfg.seed)
            t1 = time.perf_counter()
            res = linearize1(pm, trace=tr)
            t2 = time.perf_counter()
            try:
                a_est = alpha_estimate(n, m, k, D)
            except KOutOfRange:
                a_est = None
            attempt = {"D": D, "rows": pm.row_count(), "alpha_actual": res.alpha_actual,
                       "alpha_estimate": a_est, "residual_rows": res.nrows,
                       "ranks": {int(d): int(r) for d, r in res.ranks.items()},
                       "multiply_seconds": t1 - t0, "linearize1_seconds": t2 - t1}
            stats["attempts"].append(attempt)
            tried, with_uni = 0, 0
            guesses = iter_guesses(sys.ctx.q, k, _guess_start(cfg, sys.ctx.q, k), cfg.guess_order)
            if cfg.jobs <= 1:
                for g in guesses:
                    tried += 1
                    sols, info = _process_guess(res, sys, g, e_main, cfg.find_all)
                    with_uni += _resolved(info)
                    tr.emit(step="guess", D=D, **info)
                    if sols:
                        found.extend(sols)
                        if not cfg.find_all:
                            break
            else:
                allg = list(guesses)
                size = -(-len(allg) // cfg.jobs)
                chunks = [allg[i : i + size] for i in range(0, len(allg), size)]
                ctx = mp.get_context("fork")
                with ProcessPoolExecutor(cfg.jobs, mp_context=ctx, initializer=_init_worker,
                                         initargs=(res, sys, e_main, cfg.find_all)) as ex:
                    futs = [ex.submit(_guess_chunk, ch) for ch in chunks]
                    for fut in futs:
                        sols, infos = fut.result()
                        tried += len(infos)
                        with_uni += sum(_resolved(i) for i in infos)
                        for info in infos:
                            tr.emit(step="guess", D=D, **info)
                        found.extend(sols)
                        if found and not cfg.find_all:
                            for f in futs:
                                f.cancel()
                            break
            attempt["guesses_tried"] = tried
            attempt["guesses_with_univariate"] = with_uni
            attempt["guess_loop_seconds"] = time.perf_counter() - t2
            if found or with_uni:
                break
    finally:
        tr.close()
    stats["guesses_tried"] = sum(a.get("guesses_tried", 0) for a in stats["attempts"])
    stats["D"] = stats["attempts"][-1]["D"]
    stats["elapsed"] = time.perf_counter() - t_start
    found = [s for s in found if sys.is_root(s)]
    if found:
        uniq = sorted(set(found))
        return SolveOutcome(Status.SOLVED, list(found[0]), stats, [list(s) for s in uniq])
    if not any(a.get("guesses_with_univariate") for a in stats["attempts"]):
        return SolveOutcome(Status.DEGREE_TOO_LOW, None, stats)
    return SolveOutcome(Status.NO_SOLUTION, None, stats)
