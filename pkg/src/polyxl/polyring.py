"""Sparse multivariate polynomials, monomial orders and quadratic systems.

A monomial is a tuple of exponents.  Polynomials store ``{monomial: coeff}``
with nonzero coefficients only.  Variables are numbered from 0 internally and
printed 1-based (``x1, x2, ...``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .estimator import KOutOfRange
from .field import FieldContext, field_from_dict

__all__ = [
    "Monomial",
    "GradedLex",
    "XLElimination",
    "Polynomial",
    "LayeredPolynomial",
    "QuadraticSystem",
    "KOutOfRange",
    "enumerate_monomials",
    "monomial_index",
    "count_monomials",
    "split_variables",
    "recombine",
    "multiply",
    "evaluate_guessed",
    "random_system",
    "format_monomial",
]

Monomial = tuple



def degree(t: Monomial) -> int:
    return sum(t)


def format_monomial(t: Monomial, names: Sequence[str] | None = None) -> str:
    parts = []
    for i, e in enumerate(t):
        if e == 0:
            continue
        name = names[i] if names else f"x{i + 1}"
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts) or "1"


@dataclass(frozen=True)
class GradedLex:
    """Degree first, then lexicographic under ``priority`` (most significant variable first)."""

    priority: tuple[int, ...] | None = None

    def key(self, t: Monomial):
        pri = self.priority if self.priority is not None else range(len(t))
        return (sum(t),) + tuple(t[i] for i in pri)

    def sort(self, monos: Iterable[Monomial]) -> list[Monomial]:
        return sorted(monos, key=self.key, reverse=True)


@dataclass(frozen=True)
class XLElimination:
    """Column order placing the pure powers of ``elim_var`` (and 1) last.

    Not a monomial order; it only guarantees that the trailing columns of a
    ``T_{<=D}`` enumeration are ``x_e^D, ..., x_e, 1``.  ``elim_var=-1`` means
    the last variable.
    """

    elim_var: int = -1
    priority: tuple[int, ...] | None = None

    def _e(self, nvars: int) -> int:
        return self.elim_var % nvars if nvars else 0

    def is_pure(self, t: Monomial) -> bool:
        e = self._e(len(t))
        return all(x == 0 for i, x in enumerate(t) if i != e)

    def key(self, t: Monomial):
        return (0 if self.is_pure(t) else 1,) + GradedLex(self.priority).key(t)

    def sort(self, monos: Iterable[Monomial]) -> list[Monomial]:
        return sorted(monos, key=self.key, reverse=True)


@lru_cache(maxsize=None)
def _monomials_of_degree(nvars: int, d: int) -> tuple[Monomial, ...]:
    out = []
    for combo in combinations_with_replacement(range(nvars), d):
        e = [0] * nvars
        for v in combo:
            e[v] += 1
        out.append(tuple(e))
    # combinations come out in lex-descending order already; sort to be explicit
    out.sort(reverse=True)
    return tuple(out)


def count_monomials(nvars: int, a: int, b: int | None = None) -> int:
    """|T_{a;b}| (or |T_a| when ``b`` is None)."""
    if b is None:
        b = a
    if nvars == 0:
        return 1 if a == 0 else 0
    return sum(comb(nvars + d - 1, d) for d in range(a, b + 1))


def enumerate_monomials(nvars: int, a: int, b: int, order=None) -> list[Monomial]:
    """T_{a;b} sorted descending under ``order`` (GradedLex by default)."""
    if a < 0 or b < a:
        raise ValueError("need 0 <= a <= b")
    order = order or GradedLex()
    if nvars == 0:
        return [()] if a == 0 else []
    monos = [t for d in range(a, b + 1) for t in _monomials_of_degree(nvars, d)]
    if isinstance(order, GradedLex) and order.priority is None:
        return sorted(monos, key=order.key, reverse=True)
    return order.sort(monos)


def monomial_index(monos: Sequence[Monomial]) -> dict[Monomial, int]:
    return {t: i for i, t in enumerate(monos)}


def mono_mul(s: Monomial, t: Monomial) -> Monomial:
    return tuple(a + b for a, b in zip(s, t))


class Polynomial:
    """Polynomial over a field: ``terms`` maps monomials to nonzero ints."""

    __slots__ = ("ctx", "nvars", "terms")

    def __init__(self, ctx: FieldContext, nvars: int, terms: dict | None = None):
        self.ctx = ctx
        self.nvars = nvars
        self.terms = {}
        for t, c in (terms or {}).items():
            c = int(c) % ctx.q if ctx.r == 1 else int(c)
            if c:
                if len(t) != nvars:
                    raise ValueError(f"monomial {t} has wrong arity for {nvars} variables")
                self.terms[tuple(t)] = c

    @classmethod
    def constant(cls, ctx, nvars, c):
        return cls(ctx, nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, ctx, nvars, i):
        e = [0] * nvars
        e[i] = 1
        return cls(ctx, nvars, {tuple(e): 1})

    def copy(self) -> "Polynomial":
        p = Polynomial(self.ctx, self.nvars)
        p.terms = dict(self.terms)
        return p

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(t) for t in self.terms), default=-1)

    def support(self) -> list[Monomial]:
        return list(self.terms)

    def coeff(self, t: Monomial) -> int:
        return self.terms.get(tuple(t), 0)

    def leading_monomial(self, order=None) -> Monomial:
        if not self.terms:
            raise ValueError("zero polynomial has no leading monomial")
        order = order or GradedLex()
        return max(self.terms, key=order.key)

    def leading_coefficient(self, order=None) -> int:
        return self.terms[self.leading_monomial(order)]

    def leading_term(self, order=None):
        lm = self.leading_monomial(order)
        return lm, self.terms[lm]

    def _check(self, other):
        self.ctx.check_same(other.ctx)
        if other.nvars != self.nvars:
            raise ValueError("variable count mismatch")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        F = self.ctx
        out = dict(self.terms)
        for t, c in other.terms.items():
            v = F.add(out.get(t, 0), c)
            if v:
                out[t] = v
            else:
                out.pop(t, None)
        p = Polynomial(F, self.nvars)
        p.terms = out
        return p

    def __neg__(self) -> "Polynomial":
        p = Polynomial(self.ctx, self.nvars)
        p.terms = {t: self.ctx.neg(c) for t, c in self.terms.items()}
        return p

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def scale(self, c: int) -> "Polynomial":
        F = self.ctx
        p = Polynomial(F, self.nvars)
        if c:
            p.terms = {t: F.mul(v, c) for t, v in self.terms.items()}
        return p

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        F = self.ctx
        out: dict = {}
        for s, a in self.terms.items():
            for t, b in other.terms.items():
                u = mono_mul(s, t)
                v = F.add(out.get(u, 0), F.mul(a, b))
                if v:
                    out[u] = v
                else:
                    out.pop(u, None)
        p = Polynomial(F, self.nvars)
        p.terms = out
        return p

    def mul_monomial(self, t: Monomial) -> "Polynomial":
        p = Polynomial(self.ctx, self.nvars)
        p.terms = {mono_mul(s, t): c for s, c in self.terms.items()}
        return p

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.ctx == other.ctx
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def evaluate(self, point: Sequence[int]) -> int:
        return evaluate_guessed(self, point)

    def substitute(self, values: dict[int, int]) -> "Polynomial":
        """Fix variables ``{index: value}``; the remaining ones are renumbered in order."""
        F = self.ctx
        keep = [i for i in range(self.nvars) if i not in values]
        out: dict = {}
        for t, c in self.terms.items():
            v = c
            for i, a in values.items():
                if t[i]:
                    v = F.mul(v, F.pow(a, t[i]))
            if not v:
                continue
            u = tuple(t[i] for i in keep)
            w = F.add(out.get(u, 0), v)
            if w:
                out[u] = w
            else:
                out.pop(u, None)
        p = Polynomial(F, len(keep))
        p.terms = out
        return p

    def univariate_coeffs(self, var: int) -> list[int]:
        """Coefficient list (low degree first) of a polynomial in ``var`` only."""
        deg = max((t[var] for t in self.terms), default=0)
        out = [0] * (deg + 1)
        for t, c in self.terms.items():
            if any(e for i, e in enumerate(t) if i != var):
                raise ValueError("polynomial is not univariate in the requested variable")
            out[t[var]] = c
        return out

    def to_string(self, names=None, order=None) -> str:
        if not self.terms:
            return "0"
        order = order or GradedLex()
        parts = []
        for t in sorted(self.terms, key=order.key, reverse=True):
            c = self.terms[t]
            ms = format_monomial(t, names)
            if ms == "1":
                parts.append(str(c))
            elif c == 1:
                parts.append(ms)
            else:
                parts.append(f"{c}*{ms}")
        return "+".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({self.to_string()})"


@dataclass
class LayeredPolynomial:
    """A polynomial in main variables whose coefficients are polynomials in the guessed ones."""

    ctx: FieldContext
    k: int
    nmain: int
    terms: dict = dc_field(default_factory=dict)

    def coeff(self, t: Monomial) -> Polynomial:
        return self.terms.get(tuple(t), Polynomial(self.ctx, self.k))

    def degree(self) -> int:
        return max((sum(t) + c.degree() for t, c in self.terms.items()), default=-1)

    def mul_monomial(self, t: Monomial) -> "LayeredPolynomial":
        return LayeredPolynomial(
            self.ctx, self.k, self.nmain, {mono_mul(s, t): c for s, c in self.terms.items()}
        )


def split_variables(poly_or_sys, k: int):
    """Rewrite polynomials over (F[x_1..x_k])[x_{k+1}..x_n].

    Accepts a single Polynomial or a QuadraticSystem and returns a
    LayeredPolynomial or a list of them.
    """
    if isinstance(poly_or_sys, QuadraticSystem):
        if not 0 <= k < poly_or_sys.n:
            raise KOutOfRange(f"k={k} outside [0, {poly_or_sys.n})")
        return [split_variables(f, k) for f in poly_or_sys.polys]
    f: Polynomial = poly_or_sys
    if not 0 <= k < max(f.nvars, 1) and not (f.nvars == 0 and k == 0):
        raise KOutOfRange(f"k={k} outside [0, {f.nvars})")
    groups: dict = {}
    for t, c in f.terms.items():
        main = t[k:]
        groups.setdefault(main, {})[t[:k]] = c
    terms = {main: Polynomial(f.ctx, k, g) for main, g in groups.items()}
    return LayeredPolynomial(f.ctx, k, f.nvars - k, terms)


def recombine(lp: LayeredPolynomial) -> Polynomial:
    out: dict = {}
    for main, c in lp.terms.items():
        for g, v in c.terms.items():
            out[g + main] = v
    return Polynomial(lp.ctx, lp.k + lp.nmain, out)


def multiply(p, t: Monomial):
    """t * p for a Polynomial or LayeredPolynomial (t over the matching variables)."""
    return p.mul_monomial(tuple(t))


def evaluate_guessed(c: Polynomial, point: Sequence[int]) -> int:
    """Naive term-by-term evaluation of ``c`` at ``point``."""
    point = list(point)
    if len(point) != c.nvars:
        raise ValueError(f"point has length {len(point)}, expected {c.nvars}")
    F = c.ctx
    acc = 0
    for t, v in c.terms.items():
        term = v
        for x, e in zip(point, t):
            if e:
                term = F.mul(term, F.pow(x, e))
        acc = F.add(acc, term)
    return int(acc)


class QuadraticSystem:
    """m quadratic polynomials in n variables over a finite field."""

    def __init__(self, ctx: FieldContext, n: int, polys: Sequence[Polynomial], planted=None):
        self.ctx = ctx
        self.n = n
        self.polys = list(polys)
        self.planted = list(planted) if planted is not None else None
        for f in self.polys:
            ctx.check_same(f.ctx)
            if f.nvars != n:
                raise ValueError("polynomial variable count does not match n")
            if f.degree() > 2:
                raise ValueError("system contains a polynomial of degree > 2")

    @property
    def m(self) -> int:
        return len(self.polys)

    def evaluate(self, point: Sequence[int]) -> list[int]:
        return [evaluate_guessed(f, point) for f in self.polys]

    def is_root(self, point: Sequence[int]) -> bool:
        return all(v == 0 for v in self.evaluate(point))

    def substitute(self, values: dict[int, int]) -> "QuadraticSystem":
        keep = [i for i in range(self.n) if i not in values]
        planted = [self.planted[i] for i in keep] if self.planted is not None else None
        return QuadraticSystem(
            self.ctx, len(keep), [f.substitute(values) for f in self.polys], planted
        )

    # -- instance files -----------------------------------------------------------

    def to_dict(self) -> dict:
        order = GradedLex()
        polys = []
        for f in self.polys:
            terms = sorted(f.terms.items(), key=lambda kv: order.key(kv[0]), reverse=True)
            polys.append([[",".join(map(str, t)), int(c)] for t, c in terms])
        d = {"field": self.ctx.to_dict(), "n": self.n, "m": self.m, "polys": polys}
        if self.planted is not None:
            d["planted"] = [int(v) for v in self.planted]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "QuadraticSystem":
        ctx = field_from_dict(d["field"])
        n = int(d["n"])
        polys = []
        for raw in d["polys"]:
            terms: dict = {}
            for es, c in raw:
                t = tuple(int(x) for x in es.split(",")) if n else ()
                c = int(c)
                if not 0 <= c < ctx.q:
                    raise ValueError(f"coefficient {c} outside [0, {ctx.q})")
                if len(t) != n:
                    raise ValueError(f"exponent string {es!r} does not have {n} entries")
                terms[t] = ctx.add(terms.get(t, 0), c)
            polys.append(Polynomial(ctx, n, terms))
        if "m" in d and int(d["m"]) != len(polys):
            raise ValueError("m does not match the number of polynomials")
        return cls(ctx, n, polys, d.get("planted"))

    @classmethod
    def from_json(cls, s: str) -> "QuadraticSystem":
        return cls.from_dict(json.loads(s))

    def __repr__(self) -> str:
        return f"QuadraticSystem({self.ctx!r}, n={self.n}, m={self.m})"


def random_system(ctx: FieldContext, n: int, m: int, rng: np.random.Generator, planted: bool = True):
    """Uniform random dense quadratic system; optionally shifted so a random point is a root."""
    monos = enumerate_monomials(n, 0, 2)
    point = [int(v) for v in ctx.random(rng, n)] if planted else None
    polys = []
    for _ in range(m):
        coeffs = ctx.random(rng, len(monos))
        f = Polynomial(ctx, n, dict(zip(monos, (int(c) for c in coeffs))))
        if planted:
            v = evaluate_guessed(f, point)
            f = f - Polynomial.constant(ctx, n, v)
        polys.append(f)
    sys_ = QuadraticSystem(ctx, n, polys, point)
    if planted:
        assert sys_.is_root(point)
    return sys_
