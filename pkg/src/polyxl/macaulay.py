"""Macaulay matrices over F_q and the degree-blocked matrix over F_q[x_1..x_k].

Row labels are ``(multiplier, poly_index)`` pairs.  Rows are ordered by
descending product degree, then multiplier in graded-lex descending order,
then polynomial index ascending.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field as dc_field
from math import ceil, comb
from pathlib import Path
from typing import Sequence

import numpy as np

from .field import FieldContext
from .polyring import (
    GradedLex,
    KOutOfRange,
    Monomial,
    Polynomial,
    QuadraticSystem,
    count_monomials,
    enumerate_monomials,
    format_monomial,
    mono_mul,
    monomial_index,
    split_variables,
)

__all__ = [
    "DegreeTooSmall",
    "SupportNotCovered",
    "MacaulayMatrix",
    "MonomialSpace",
    "GuessedBasis",
    "BlockMacaulay",
    "build_shift",
    "build_macaulay",
    "mac_inverse",
    "nonzero_generators",
    "build_block_macaulay",
    "series_coeff",
]


class DegreeTooSmall(ValueError):
    pass


class SupportNotCovered(ValueError):
    pass


def series_coeff(a: int, m: int, d: int) -> int:
    """coeff((1-t)^a (1+t)^m, t^d) for a >= 0."""
    return sum((-1) ** i * comb(a, i) * comb(m, d - i) for i in range(min(a, d) + 1))


@dataclass
class MacaulayMatrix:
    ctx: FieldContext
    rows: np.ndarray
    row_labels: list
    columns: list

    @property
    def shape(self):
        return self.rows.shape


def build_shift(sys: QuadraticSystem, D: int, k: int = 0) -> list[tuple[Monomial, int]]:
    """All (t, i) with deg(t) <= D-2, t over the main variables x_{k+1..n}."""
    if D < 2:
        raise DegreeTooSmall(f"D={D} < 2")
    if not 0 <= k < max(sys.n, 1):
        raise KOutOfRange(f"k={k} outside [0, {sys.n})")
    nm = sys.n - k
    out = []
    for e in range(D - 2, -1, -1):
        for t in enumerate_monomials(nm, e, e):
            out.extend((t, i) for i in range(sys.m))
    return out


def build_macaulay(rows, T: Sequence[Monomial], sys: QuadraticSystem | None = None,
                   ctx: FieldContext | None = None) -> MacaulayMatrix:
    """Mac(F, T).  ``rows`` is either a shift (needs ``sys``) or a list of Polynomials."""
    if sys is not None:
        ctx = sys.ctx
        polys = [sys.polys[i].mul_monomial(t) for t, i in rows]
        labels = list(rows)
    else:
        polys = list(rows)
        labels = list(range(len(polys)))
        if ctx is None:
            if not polys:
                raise ValueError("field context required for an empty row list")
            ctx = polys[0].ctx
    T = list(T)
    index = monomial_index(T)
    A = np.zeros((len(polys), len(T)), dtype=ctx.dtype)
    for r, f in enumerate(polys):
        for t, c in f.terms.items():
            j = index.get(t)
            if j is None:
                raise SupportNotCovered(f"monomial {format_monomial(t)} of row {r} not in T")
            A[r, j] = c
    return MacaulayMatrix(ctx, A, labels, T)


def mac_inverse(A: np.ndarray, T: Sequence[Monomial], ctx: FieldContext) -> list[Polynomial]:
    """Rows back to polynomials.  Zero rows become zero polynomials so the round trip is exact."""
    A = np.asarray(A)
    T = list(T)
    if A.ndim != 2 or A.shape[1] != len(T):
        raise ValueError("matrix width does not match |T|")
    nvars = len(T[0]) if T else 0
    out = []
    for row in A:
        nz = np.flatnonzero(row)
        out.append(Polynomial(ctx, nvars, {T[j]: int(row[j]) for j in nz}))
    return out


def nonzero_generators(polys: Sequence[Polynomial]) -> list[Polynomial]:
    zero = sum(1 for f in polys if f.is_zero())
    if zero:
        warnings.warn(f"dropping {zero} zero polynomial(s) from the generator set", stacklevel=2)
    return [f for f in polys if not f.is_zero()]


class MonomialSpace:
    """T_{<=D} in a fixed column order with multiply-by-variable tables."""

    def __init__(self, nvars: int, D: int, order=None):
        self.nvars = nvars
        self.D = D
        self.order = order or GradedLex()
        if isinstance(self.order, GradedLex):
            # degree blocks T_D, ..., T_0, each graded-lex descending
            self.monos = [t for e in range(D, -1, -1) for t in enumerate_monomials(nvars, e, e, self.order)]
        else:
            self.monos = enumerate_monomials(nvars, 0, D, self.order)
        self.index = monomial_index(self.monos)
        self.degrees = np.array([sum(t) for t in self.monos], dtype=np.int64)
        up = np.full((max(nvars, 1), len(self.monos)), -1, dtype=np.int64)
        for c, t in enumerate(self.monos):
            if sum(t) == D:
                continue
            for j in range(nvars):
                u = list(t)
                u[j] += 1
                up[j, c] = self.index[tuple(u)]
        self.up = up

    def __len__(self):
        return len(self.monos)

    def shift_index(self, idx: np.ndarray, s: Monomial) -> np.ndarray:
        """Column of t*s for every column index t in ``idx``."""
        out = np.asarray(idx, dtype=np.int64)
        for j, e in enumerate(s):
            for _ in range(e):
                out = self.up[j, out]
        return out


class GuessedBasis:
    """Monomials in the guessed variables, ascending degree, so a degree cap is a prefix."""

    def __init__(self, k: int, D: int):
        self.k = k
        self.D = D
        self.monos = [t for e in range(D + 1) for t in enumerate_monomials(k, e, e)]
        self.index = monomial_index(self.monos)
        self.degrees = np.array([sum(t) for t in self.monos], dtype=np.int64)
        self._mul_cache: dict = {}

    def size(self, cap: int) -> int:
        """Number of monomials of degree <= cap."""
        cap = max(min(cap, self.D), -1)
        return count_monomials(self.k, 0, cap) if cap >= 0 else 0

    def mul_table(self, pa: int, pb: int) -> np.ndarray:
        """index of monos[a]*monos[b] for a < pa, b < pb (-1 beyond degree D)."""
        key = (pa, pb)
        if key not in self._mul_cache:
            tab = np.full((pa, pb), -1, dtype=np.int64)
            for a in range(pa):
                for b in range(pb):
                    tab[a, b] = self.index.get(mono_mul(self.monos[a], self.monos[b]), -1)
            self._mul_cache[key] = tab
        return self._mul_cache[key]

    def to_vector(self, f: Polynomial, cap: int) -> np.ndarray:
        v = np.zeros(self.size(cap), dtype=f.ctx.dtype)
        for t, c in f.terms.items():
            v[self.index[t]] = c
        return v

    def to_polynomial(self, ctx: FieldContext, v: np.ndarray) -> Polynomial:
        return Polynomial(ctx, self.k, {self.monos[i]: int(v[i]) for i in np.flatnonzero(v)})

    def powers_at(self, ctx: FieldContext, point: Sequence[int], cap: int) -> np.ndarray:
        """Values of the first size(cap) monomials at ``point``."""
        P = self.size(cap)
        vals = np.empty(P, dtype=np.int64)
        for i in range(P):
            v = 1
            for x, e in zip(point, self.monos[i]):
                if e:
                    v = ctx.mul(v, ctx.pow(int(x), e))
            vals[i] = v
        return vals


def poly_matmul(ctx: FieldContext, basis: GuessedBasis, A: np.ndarray, B: np.ndarray, cap: int) -> np.ndarray:
    """Product of polynomial matrices stored as planes ``(P, rows, cols)``.

    Terms above ``cap`` are dropped; callers size ``cap`` so nothing is lost.
    """
    pa, pb = A.shape[0], B.shape[0]
    P = basis.size(cap)
    out = np.zeros((P, A.shape[1], B.shape[2]), dtype=np.int64)
    if A.shape[1] == 0 or B.shape[2] == 0 or A.shape[2] == 0:
        return out.astype(ctx.dtype)
    tab = basis.mul_table(pa, pb)
    Bflat = np.concatenate(list(B), axis=1)
    w = B.shape[2]
    for a in range(pa):
        if not A[a].any():
            continue
        targets = tab[a]
        live = [b for b in range(pb) if 0 <= targets[b] < P]
        if not live:
            continue
        prod = ctx.matmul(A[a], Bflat)
        for b in live:
            blk = prod[:, b * w : (b + 1) * w]
            if blk.any():
                out[targets[b]] = ctx.add(out[targets[b]], blk)
    return out.astype(ctx.dtype)


@dataclass
class BlockMacaulay:
    """PM over F_q[x_1..x_k] at degree D, rows grouped by product degree.

    Guessed variables are x_1..x_k, main variables x_{k+1}..x_n.  Columns are the
    main-variable monomials T_D, ..., T_0.  Entries are stored on demand as dense
    planes over the guessed monomials of degree <= cap.
    """

    ctx: FieldContext
    sys: QuadraticSystem
    k: int
    D: int
    columns: MonomialSpace
    gbasis: GuessedBasis
    selected: dict  # d -> list of row labels (t, i), canonical order
    pool: dict  # d -> unused row labels in random order
    targets: dict = dc_field(default_factory=dict)  # d -> expected generic rank
    split: list = dc_field(default_factory=list)

    @property
    def nmain(self) -> int:
        return self.sys.n - self.k

    def degree_slice(self, e: int) -> slice:
        # T_D comes first
        start = count_monomials(self.nmain, e + 1, self.D) if e < self.D else 0
        return slice(start, start + count_monomials(self.nmain, e, e))

    def col_monomials(self, e: int) -> list[Monomial]:
        return self.columns.monos[self.degree_slice(e)]

    def cap(self, e: int) -> int:
        """Storage degree for entries in column degree ``e`` (one above the bound it must satisfy)."""
        return min(self.D, self.D - e + 1)

    def row_count(self) -> int:
        return sum(len(v) for v in self.selected.values())

    def add_rows(self, d: int, count: int) -> int:
        """Move up to ``count`` rows of degree d from the pool into the selection."""
        take = self.pool[d][:count]
        if not take:
            return 0
        self.pool[d] = self.pool[d][count:]
        self.selected[d] = _canonical(self.selected[d] + take, self.sys.m)
        return len(take)

    def block(self, d: int, e: int, rows: Sequence | None = None, cap: int | None = None) -> np.ndarray:
        """Dense planes ``(P, |rows|, |T_e|)`` of PM[rows, T_e] for rows of degree d."""
        rows = self.selected[d] if rows is None else rows
        cap = self.cap(e) if cap is None else cap
        P = self.gbasis.size(cap)
        sl = self.degree_slice(e)
        width = sl.stop - sl.start
        out = np.zeros((P, len(rows), width), dtype=self.ctx.dtype)
        s_deg = e - (d - 2)
        if s_deg not in (0, 1, 2) or not rows:
            return out
        mult_idx = np.array([self.columns.index[t] for t, _ in rows], dtype=np.int64)
        poly_idx = np.array([i for _, i in rows], dtype=np.int64)
        for i in np.unique(poly_idx):
            sel = np.flatnonzero(poly_idx == i)
            for s, c in self.split[i].terms.items():
                if sum(s) != s_deg:
                    continue
                cols = self.columns.shift_index(mult_idx[sel], s) - sl.start
                for gt, v in c.terms.items():
                    g = self.gbasis.index[gt]
                    if g < P:
                        out[g, sel, cols] = v
        return out

    def const_block(self, d: int, rows: Sequence | None = None) -> np.ndarray:
        return self.block(d, d, rows, cap=0)[0]

    def entry(self, label: tuple, col: Monomial) -> Polynomial:
        """Entry of row ``label`` = (t, i) at main-variable column ``col`` as a polynomial."""
        t, i = label
        d = sum(t) + 2
        e = sum(col)
        blk = self.block(d, e, [label], cap=self.D)
        j = self.columns.index[tuple(col)] - self.degree_slice(e).start
        return self.gbasis.to_polynomial(self.ctx, blk[:, 0, j])

    def dense(self) -> tuple[np.ndarray, list]:
        """Whole selected matrix as planes ``(P, rows, |T_<=D|)`` (small instances only)."""
        labels = [lab for d in range(self.D, 1, -1) for lab in self.selected[d]]
        P = self.gbasis.size(self.D)
        out = np.zeros((P, len(labels), len(self.columns)), dtype=self.ctx.dtype)
        r0 = 0
        for d in range(self.D, 1, -1):
            rows = self.selected[d]
            for e in range(d, -1, -1):
                sl = self.degree_slice(e)
                blk = np.zeros((P, len(rows), sl.stop - sl.start), dtype=self.ctx.dtype)
                if e >= d - 2:
                    b = self.block(d, e, rows, cap=self.D)
                    blk[: b.shape[0]] = b
                out[:, r0 : r0 + len(rows), sl] = blk
            r0 += len(rows)
        return out, labels

    def check_block_structure(self) -> list[str]:
        """Structural audit from the row supports; returns a list of violations."""
        bad = []
        for i, lp in enumerate(self.split):
            for s, c in lp.terms.items():
                if sum(s) > 2:
                    bad.append(f"poly {i}: main monomial {s} of degree > 2")
                if c.degree() + sum(s) > 2:
                    bad.append(f"poly {i}: term of total degree > 2 at {s}")
                if sum(s) == 2 and c.degree() > 0:
                    bad.append(f"poly {i}: non-constant coefficient on degree-2 monomial {s}")
        for d, rows in self.selected.items():
            for t, _ in rows:
                if sum(t) != d - 2:
                    bad.append(f"row {t} placed at degree {d}")
        return bad

    def to_csv(self, d: int, e: int) -> str:
        """One block as CSV: header of column monomials, one line per row."""
        names = [f"x{j + 1}" for j in range(self.sys.n)]
        main_names = names[self.k :]
        guess_names = names[: self.k]
        rows = self.selected[d]
        blk = self.block(d, e, rows, cap=self.D)
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["row"] + [format_monomial(t, main_names) for t in self.col_monomials(e)])
        for r, (t, i) in enumerate(rows):
            label = f"f{i + 1}" if not any(t) else f"{format_monomial(t, main_names)}*f{i + 1}"
            cells = []
            for j in range(blk.shape[2]):
                p = self.gbasis.to_polynomial(self.ctx, blk[:, r, j])
                cells.append(p.to_string(guess_names))
            w.writerow([label] + cells)
        return buf.getvalue()

    def dump(self, directory) -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for d in range(self.D, 1, -1):
            for e in (d, d - 1, d - 2):
                path = directory / f"block_I{d}_T{e}.csv"
                path.write_text(self.to_csv(d, e))
                written.append(path)
        return written


def _canonical(labels, m):
    order = GradedLex()
    return sorted(labels, key=lambda lab: (tuple(-x for x in order.key(lab[0])), lab[1]))


def default_row_budget(n: int, m: int, k: int, D: int, slack: float = 0.05, min_slack: int = 2) -> dict:
    """Rows per degree: |T_d| - c_d below D, the remainder up to |T_<=D| at D, plus slack."""
    nm = n - k
    a = m - nm
    avail = {d: m * comb(nm + d - 3, d - 2) for d in range(2, D + 1)}
    base = {}
    for d in range(2, D):
        base[d] = max(0, min(avail[d], count_monomials(nm, d) - series_coeff(a, m, d)))
    total = count_monomials(nm, 0, D)
    need = total - sum(base.values())
    for d in range(D, 1, -1):
        have = base.get(d, 0)
        extra = max(0, min(avail[d] - have, need))
        base[d] = have + extra
        need -= extra
        if need <= 0:
            break
    return {d: min(avail[d], b + max(min_slack, ceil(slack * b))) for d, b in base.items()}


def build_block_macaulay(sys: QuadraticSystem, k: int, D: int, row_budget=None, seed=0) -> BlockMacaulay:
    """PM for the split x_1..x_k | x_{k+1}..x_n.

    ``row_budget`` is None (default policy), ``"full"`` (every row) or a dict
    ``{d: count}``.  Selection within a degree is uniform and seeded.
    """
    if not 1 <= k < sys.n:
        raise KOutOfRange(f"k={k} outside [1, {sys.n})")
    if D < 2:
        raise DegreeTooSmall(f"D={D} < 2")
    nm = sys.n - k
    rng = np.random.default_rng(seed)
    if row_budget is None:
        budget = default_row_budget(sys.n, sys.m, k, D)
    elif row_budget == "full":
        budget = None
    else:
        budget = dict(row_budget)
    selected, pool = {}, {}
    for d in range(2, D + 1):
        labels = [(t, i) for t in enumerate_monomials(nm, d - 2, d - 2) for i in range(sys.m)]
        want = len(labels) if budget is None else min(len(labels), int(budget.get(d, 0)))
        perm = rng.permutation(len(labels)) if want < len(labels) else np.arange(len(labels))
        selected[d] = _canonical([labels[j] for j in perm[:want]], sys.m)
        pool[d] = [labels[j] for j in perm[want:]]
    a = sys.m - nm
    targets = {}
    for d in range(2, D + 1):
        T_d = count_monomials(nm, d)
        expect = T_d - max(series_coeff(a, sys.m, d), 0) if a >= 0 else T_d
        targets[d] = min(expect, m_rows(sys.m, nm, d))
    return BlockMacaulay(
        ctx=sys.ctx,
        sys=sys,
        k=k,
        D=D,
        columns=MonomialSpace(nm, D),
        gbasis=GuessedBasis(k, D),
        selected=selected,
        pool=pool,
        targets=targets,
        split=split_variables(sys, k),
    )


def m_rows(m: int, nm: int, d: int) -> int:
    return m * comb(nm + d - 3, d - 2)
