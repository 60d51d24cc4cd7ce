"""Finite fields GF(p^r) with q <= 2**16.

Elements are plain integers in ``[0, q)``.  For ``r > 1`` an element packs the
coefficient vector of its residue polynomial base ``p``, lowest degree first,
so for ``p = 2`` bit ``i`` is the coefficient of ``x**i``.

Every arithmetic method accepts Python ints or numpy integer arrays and
broadcasts like numpy.  Scalars come back as ints.
"""

from __future__ import annotations

from functools import cached_property
from itertools import product

import numpy as np

__all__ = [
    "FieldError",
    "NotPrime",
    "ReducibleModulus",
    "FieldTooLarge",
    "DivisionByZero",
    "MixedFields",
    "FieldContext",
    "make_field",
    "DEFAULT_MODULI",
]

MAX_ORDER = 1 << 16
# Exact float64 integers stop at 2**53.
_FLOAT_BITS = 53


class FieldError(ValueError):
    pass


class NotPrime(FieldError):
    pass


class ReducibleModulus(FieldError):
    pass


class FieldTooLarge(FieldError):
    pass


class DivisionByZero(ZeroDivisionError):
    pass


class MixedFields(FieldError):
    pass


# Low-weight irreducible moduli for GF(2^r), coefficients low degree first.
DEFAULT_MODULI: dict[tuple[int, int], tuple[int, ...]] = {}


def _from_exponents(r: int, exps: tuple[int, ...]) -> tuple[int, ...]:
    coeffs = [0] * (r + 1)
    for e in exps:
        coeffs[e] = 1
    coeffs[r] = 1
    return tuple(coeffs)


for _r, _exps in {
    2: (0, 1),
    3: (0, 1),
    4: (0, 1),
    5: (0, 2),
    6: (0, 1),
    7: (0, 1),
    8: (0, 1, 3, 4),
    9: (0, 4),
    10: (0, 3),
    11: (0, 2),
    12: (0, 1, 4, 6),
    13: (0, 1, 3, 4),
    14: (0, 1, 6, 10),
    15: (0, 1),
    16: (0, 1, 3, 12),
}.items():
    DEFAULT_MODULI[(2, _r)] = _from_exponents(_r, _exps)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


# -- polynomial helpers over GF(p), coefficient lists low degree first --------


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    a = _trim(list(a))
    m = _trim(list(m))
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) >= len(m):
        c = a[-1] * inv_lead % p
        shift = len(a) - len(m)
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mc) % p
        _trim(a)
    return a


def _poly_mulmod(a: list[int], b: list[int], m: list[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b))
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _poly_mod(out, m, p)


def _is_irreducible(modulus: tuple[int, ...], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..r//2."""
    r = len(modulus) - 1
    for deg in range(1, r // 2 + 1):
        for low in product(range(p), repeat=deg):
            if not _poly_mod(list(modulus), list(low) + [1], p):
                return False
    return True


def _search_modulus(p: int, r: int) -> tuple[int, ...]:
    # smallest-weight first, then lexicographic on the packed value
    candidates = sorted(
        (tuple(low) + (1,) for low in product(range(p), repeat=r) if low[0] != 0),
        key=lambda c: (sum(1 for x in c if x), c[::-1]),
    )
    for cand in candidates:
        if _is_irreducible(cand, p):
            return cand
    raise FieldError(f"no irreducible polynomial of degree {r} over GF({p})")


class FieldContext:
    """Arithmetic in GF(p^r).  Immutable once built; use :func:`make_field`."""

    def __init__(self, p: int, r: int, modulus: tuple[int, ...] | None):
        self.p = p
        self.r = r
        self.q = p**r
        self.modulus = modulus
        self.dtype = np.uint8 if self.q <= 256 else np.uint16
        self.exp: np.ndarray | None = None
        self.log: np.ndarray | None = None
        if r > 1:
            self._build_tables()
        self._inv = self._build_inverse_table()

    # -- construction --------------------------------------------------------

    def _encode(self, coeffs: list[int]) -> int:
        v = 0
        for c in reversed(coeffs):
            v = v * self.p + c
        return v

    def _decode(self, v: int) -> list[int]:
        out = []
        for _ in range(self.r):
            out.append(v % self.p)
            v //= self.p
        return out

    def _build_tables(self) -> None:
        q, p, mod = self.q, self.p, list(self.modulus)
        # find a generator of the multiplicative group
        for g in range(2, q):
            gc = self._decode(g)
            seen = np.zeros(q, dtype=bool)
            cur = [1]
            order = 0
            powers = []
            while True:
                v = self._encode(cur + [0] * (self.r - len(cur)))
                if seen[v]:
                    break
                seen[v] = True
                powers.append(v)
                order += 1
                cur = _poly_mulmod(cur, gc, mod, p) or [0]
            if order == q - 1:
                break
        else:  # pragma: no cover - a finite field always has a generator
            raise FieldError("no generator found")
        exp = np.array(powers + powers, dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        log[exp[: q - 1]] = np.arange(q - 1)
        self.generator = g
        self.exp = exp
        self.log = log

    def _build_inverse_table(self) -> np.ndarray:
        q = self.q
        inv = np.zeros(q, dtype=np.int64)
        if self.r == 1:
            a = np.arange(1, q, dtype=object)
            inv[1:] = [pow(int(x), q - 2, q) for x in a]
        else:
            nz = np.arange(1, q)
            inv[1:] = self.exp[(q - 1 - self.log[nz]) % (q - 1)]
        return inv

    # -- helpers ------------------------------------------------------------------

    def __repr__(self) -> str:
        if self.r == 1:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.r})"

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FieldContext)
            and (self.p, self.r, self.modulus) == (other.p, other.r, other.modulus)
        )

    def __hash__(self) -> int:
        return hash((self.p, self.r, self.modulus))

    def check_same(self, other: "FieldContext") -> None:
        if other != self:
            raise MixedFields(f"{self!r} vs {other!r}")

    @property
    def char2(self) -> bool:
        return self.p == 2

    def asarray(self, a) -> np.ndarray:
        return np.asarray(a, dtype=self.dtype)

    @staticmethod
    def _out(x):
        if isinstance(x, np.ndarray) and x.ndim == 0:
            return int(x)
        if np.isscalar(x):
            return int(x)
        return x

    def to_dict(self) -> dict:
        d = {"p": self.p, "r": self.r}
        if self.modulus is not None:
            d["modulus"] = list(self.modulus)
        return d

    @cached_property
    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=self.dtype)

    @cached_property
    def _digit_weights(self) -> np.ndarray:
        return self.p ** np.arange(self.r, dtype=np.int64)

    def _digits(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        return (a[..., None] // self._digit_weights) % self.p

    def _undigits(self, d: np.ndarray) -> np.ndarray:
        return (d * self._digit_weights).sum(axis=-1)

    # -- elementwise arithmetic -------------------------------------------------

    def add(self, a, b):
        if self.r == 1:
            out = (np.asarray(a, dtype=np.int64) + b) % self.p
        elif self.char2:
            out = np.bitwise_xor(np.asarray(a, dtype=np.int64), b)
        else:
            out = self._undigits((self._digits(a) + self._digits(b)) % self.p)
        return self._cast(out, a, b)

    def neg(self, a):
        if self.char2:
            return self._out(a) if np.isscalar(a) else np.asarray(a).copy()
        if self.r == 1:
            out = (-np.asarray(a, dtype=np.int64)) % self.p
        else:
            out = self._undigits((-self._digits(a)) % self.p)
        return self._cast(out, a)

    def sub(self, a, b):
        if self.char2:
            return self.add(a, b)
        if self.r == 1:
            out = (np.asarray(a, dtype=np.int64) - b) % self.p
            return self._cast(out, a, b)
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        a64 = np.asarray(a, dtype=np.int64)
        b64 = np.asarray(b, dtype=np.int64)
        if self.r == 1:
            out = (a64 * b64) % self.p
        else:
            out = self.exp[self.log[a64] + self.log[b64]]
            out = np.where((a64 == 0) | (b64 == 0), 0, out)
        return self._cast(out, a, b)

    def inv(self, a):
        a64 = np.asarray(a, dtype=np.int64)
        if np.any(a64 == 0):
            raise DivisionByZero("inverse of zero")
        return self._cast(self._inv[a64], a)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e: int):
        a64 = np.asarray(a, dtype=np.int64)
        if e < 0:
            a64 = np.asarray(self.inv(a64), dtype=np.int64)
            e = -e
        if self.r == 1:
            out = np.vectorize(lambda x: pow(int(x), e, self.p), otypes=[np.int64])(a64)
        else:
            out = self.exp[(self.log[a64] * (e % (self.q - 1))) % (self.q - 1)]
            if e == 0:
                out = np.ones_like(a64)
            else:
                out = np.where(a64 == 0, 0, out)
        return self._cast(out, a)

    def _cast(self, out, *inputs):
        if all(np.isscalar(x) or (isinstance(x, np.ndarray) and x.ndim == 0) for x in inputs):
            return int(out)
        return np.asarray(out).astype(self.dtype, copy=False)

    def sum(self, a: np.ndarray, axis=None):
        """Field sum along ``axis``."""
        a = np.asarray(a)
        if self.r == 1:
            out = np.asarray(a, dtype=np.int64).sum(axis=axis) % self.p
        elif self.char2:
            out = np.bitwise_xor.reduce(np.asarray(a, dtype=np.int64), axis=axis)
        else:
            if axis is None:
                a, axis = a.reshape(-1), 0
            digits = np.moveaxis(self._digits(a), a.ndim, 0)
            out = self._undigits(np.moveaxis(digits.sum(axis=axis + 1 if axis >= 0 else axis) % self.p, 0, -1))
        if np.ndim(out) == 0:
            return int(out)
        return np.asarray(out).astype(self.dtype)

    def random(self, rng: np.random.Generator, shape=None, nonzero: bool = False):
        low = 1 if nonzero else 0
        out = rng.integers(low, self.q, size=shape)
        if shape is None:
            return int(out)
        return out.astype(self.dtype)

    # -- matrix products --------------------------------------------------------

    def matmul(self, A, B) -> np.ndarray:
        """Matrix product over the field; exact, float64 BLAS underneath."""
        return self.matmul_sub(None, A, B, negate=False)

    def matmul_sub(self, C, A, B, negate: bool = True) -> np.ndarray:
        """``C - A @ B`` (or ``C + A @ B`` with ``negate=False``); ``C=None`` means zero.

        Returns a new array; ``C`` is not modified.
        """
        A = np.asarray(A)
        B = np.asarray(B)
        if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
            raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
        a, n = A.shape
        b = B.shape[1]
        if C is None:
            out = np.zeros((a, b), dtype=self.dtype)
        else:
            out = np.array(C, dtype=self.dtype, copy=True)
            if out.shape != (a, b):
                raise ValueError(f"accumulator shape {out.shape} != {(a, b)}")
        if a == 0 or b == 0 or n == 0:
            return out
        if self.r == 1:
            return self._matmul_prime(out, A, B, negate)
        if self.char2:
            return self._matmul_char2(out, A, B)
        prod = self._matmul_generic(A, B)
        return np.asarray(self.sub(out, prod) if negate else self.add(out, prod)).astype(self.dtype)

    _MEM_BUDGET = 1 << 27  # bytes of float64 scratch per block

    def _matmul_prime(self, out, A, B, negate):
        p = self.p
        n = A.shape[1]
        chunk = max(1, ((1 << _FLOAT_BITS) - 1) // max((p - 1) ** 2, 1))
        # single precision is exact when the whole inner sum stays below 2^24, and twice as fast
        ft = np.float32 if n * (p - 1) ** 2 < (1 << 24) else np.float64
        # tile the output columns so the float copies of B stay within budget
        cb = max(1, min(B.shape[1], self._MEM_BUDGET // (8 * n)))
        for j0 in range(0, B.shape[1], cb):
            Bj = B[:, j0 : j0 + cb]
            b = Bj.shape[1]
            Bf = [Bj[s : s + chunk].astype(ft) for s in range(0, n, chunk)]
            rc = max(1, self._MEM_BUDGET // (8 * b))
            for r0 in range(0, A.shape[0], rc):
                Ablk = A[r0 : r0 + rc].astype(ft)
                acc = np.zeros((Ablk.shape[0], b), dtype=np.int64)
                for t, s in enumerate(range(0, n, chunk)):
                    part = Ablk[:, s : s + chunk] @ Bf[t]
                    acc += np.remainder(part, p).astype(np.int64)
                acc %= p
                blk = out[r0 : r0 + rc, j0 : j0 + cb].astype(np.int64)
                blk = (blk - acc) if negate else (blk + acc)
                out[r0 : r0 + rc, j0 : j0 + cb] = blk % p
        return out

    def _matmul_char2(self, out, A, B):
        from ._kernels import combine_char2

        r = self.r
        n = A.shape[1]
        b = B.shape[1]
        inner = min(n, (1 << 12) - 1)
        modmask = np.int64(sum(c << i for i, c in enumerate(self.modulus[:r])))
        A64 = A.astype(np.int64, copy=False)
        cb = max(1, min(b, self._MEM_BUDGET // (8 * inner)))
        for c, j0 in ((c, j0) for c in range(0, n, inner) for j0 in range(0, b, cb)):
            Ac = A64[:, c : c + inner]
            Bc = B[c : c + inner, j0 : j0 + cb].astype(np.int64)
            s = max(4, int(Ac.shape[1]).bit_length())
            # fields of s bits must fit a float and survive the gather multiply,
            # which is collision-free only for group sizes up to s
            G = max(1, min(_FLOAT_BITS // s, 63 // (2 * s - 1) + 1, s))
            gstart = np.arange(0, r, G, dtype=np.int64)
            gsize = np.minimum(G, r - gstart).astype(np.int64)
            packed = []
            for g0, gs in zip(gstart, gsize):
                pk = np.zeros(Bc.shape, dtype=np.float64)
                for t in range(gs):
                    pk += ((Bc >> (g0 + t)) & 1).astype(np.float64) * float(1 << (s * t))
                packed.append(pk)
            nplanes = r * len(packed)
            bw = Bc.shape[1]
            rc = max(1, self._MEM_BUDGET // (8 * bw * nplanes))
            for r0 in range(0, A.shape[0], rc):
                Ablk = Ac[r0 : r0 + rc]
                X = np.empty((nplanes, Ablk.shape[0], bw), dtype=np.float64)
                idx = 0
                for i in range(r):
                    ai = ((Ablk >> i) & 1).astype(np.float64)
                    for pk in packed:
                        np.matmul(ai, pk, out=X[idx])
                        idx += 1
                blk = out[r0 : r0 + rc, j0 : j0 + cb]
                combine_char2(X, blk, r, s, gstart, gsize, self._reduce_tab, modmask)
        return out

    @cached_property
    def mul_table(self) -> np.ndarray:
        """Full q x q product table (q <= 2^12; larger fields map products through log/exp)."""
        if self.q > 4096:
            raise FieldTooLarge("product table only built for q <= 4096")
        a = np.arange(self.q)
        return np.asarray(self.mul(a[:, None], a[None, :]), dtype=np.int64)

    @cached_property
    def _reduce_tab(self) -> np.ndarray:
        """Carry-less products of up to 2r-1 bits reduced mod the modulus (r <= 8)."""
        r = self.r
        if r > 8:
            return np.arange(1 << r, dtype=np.int64)
        size = 1 << (2 * r - 1)
        tab = np.arange(size, dtype=np.int64)
        mod = sum(c << i for i, c in enumerate(self.modulus))
        for ell in range(2 * r - 2, r - 1, -1):
            hit = (tab >> ell) & 1 == 1
            tab[hit] ^= mod << (ell - r)
        return tab

    def _matmul_generic(self, A, B):
        out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        for j in range(A.shape[1]):
            out = self.add(out, self.mul(A[:, j : j + 1], B[j : j + 1, :]))
        return np.asarray(out).astype(self.dtype)

    def matvec(self, A, x) -> np.ndarray:
        return self.matmul(A, np.asarray(x).reshape(-1, 1)).reshape(-1)

    def dot(self, a, b) -> int:
        return int(self.sum(self.mul(a, b)))


def make_field(p: int, r: int = 1, modulus=None) -> FieldContext:
    """Build GF(p^r).

    ``modulus`` is a monic coefficient sequence of length ``r + 1``, low degree
    first.  When omitted a fixed default is used so instances stay reproducible.
    """
    if not _is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if r < 1:
        raise FieldError("extension degree must be >= 1")
    if p**r > MAX_ORDER:
        raise FieldTooLarge(f"q = {p}^{r} exceeds {MAX_ORDER}")
    if r == 1:
        return FieldContext(p, 1, None)
    if modulus is None:
        modulus = DEFAULT_MODULI.get((p, r)) or _search_modulus(p, r)
    modulus = tuple(int(c) % p for c in modulus)
    if len(modulus) != r + 1 or modulus[-1] != 1:
        raise FieldError(f"modulus must be monic of degree {r}")
    if not _is_irreducible(modulus, p):
        raise ReducibleModulus(f"{modulus} is reducible over GF({p})")
    return FieldContext(p, r, modulus)


def field_from_dict(d: dict) -> FieldContext:
    return make_field(int(d["p"]), int(d.get("r", 1)), d.get("modulus"))
