"""Compiled inner loops (numba) for the dense finite-field kernels."""

import numpy as np
from numba import njit


@njit(cache=True)
def combine_char2(X, T, r, s, gstart, gsize, reduce_tab, modmask):
    """XOR the product encoded in the float planes ``X`` into ``T``.

    ``X[i * ngroups + g]`` holds A_i @ packed(B, group g); bit-plane counts sit
    ``s`` bits apart.  The low bit of each count is gathered with one multiply
    (the fields are spaced so the partial products never collide), giving a
    carry-less product of up to 2r-1 bits that is then reduced by the modulus.
    """
    ngroups = gstart.shape[0]
    nplanes = X.shape[0]
    rows, cols = T.shape
    lowmask = np.zeros(nplanes, dtype=np.int64)
    magic = np.zeros(nplanes, dtype=np.int64)
    land = np.zeros(nplanes, dtype=np.int64)
    keep = np.zeros(nplanes, dtype=np.int64)
    dest = np.zeros(nplanes, dtype=np.int64)
    for i in range(r):
        for g in range(ngroups):
            k = i * ngroups + g
            for t in range(gsize[g]):
                lowmask[k] |= np.int64(1) << (s * t)
                magic[k] |= np.int64(1) << ((s - 1) * (gsize[g] - 1 - t))
            land[k] = (gsize[g] - 1) * (s - 1)
            keep[k] = (np.int64(1) << gsize[g]) - 1
            dest[k] = i + gstart[g]
    ntab = reduce_tab.shape[0]
    for a in range(rows):
        for b in range(cols):
            u = np.int64(0)
            for k in range(nplanes):
                v = np.int64(X[k, a, b]) & lowmask[k]
                u ^= (((v * magic[k]) >> land[k]) & keep[k]) << dest[k]
            if u < ntab:
                T[a, b] ^= reduce_tab[u]
            else:
                for ell in range(2 * r - 2, r - 1, -1):
                    if (u >> ell) & 1:
                        u ^= (modmask << (ell - r)) | (np.int64(1) << ell)
                T[a, b] ^= u


@njit(cache=True)
def panel_pivots_table(P, mul, inv):
    """Forward elimination of ``P`` in place for GF(2^r) with a full product table.

    Returns (pivot rows, pivot cols): leftmost pivot, first eligible row.
    """
    rows, cols = P.shape
    used = np.zeros(rows, dtype=np.bool_)
    prow = np.empty(min(rows, cols), dtype=np.int64)
    pcol = np.empty(min(rows, cols), dtype=np.int64)
    rank = 0
    for j in range(cols):
        piv = -1
        for i in range(rows):
            if not used[i] and P[i, j] != 0:
                piv = i
                break
        if piv < 0:
            continue
        used[piv] = True
        prow[rank] = piv
        pcol[rank] = j
        rank += 1
        c = inv[P[piv, j]]
        for jj in range(j, cols):
            P[piv, jj] = mul[P[piv, jj], c]
        for i in range(rows):
            if used[i]:
                continue
            f = P[i, j]
            if f == 0:
                continue
            for jj in range(j, cols):
                P[i, jj] ^= mul[f, P[piv, jj]]
        if rank == rows:
            break
    return prow[:rank], pcol[:rank]


@njit(cache=True)
def panel_pivots_prime(P, p, inv):
    rows, cols = P.shape
    used = np.zeros(rows, dtype=np.bool_)
    prow = np.empty(min(rows, cols), dtype=np.int64)
    pcol = np.empty(min(rows, cols), dtype=np.int64)
    rank = 0
    for j in range(cols):
        piv = -1
        for i in range(rows):
            if not used[i] and P[i, j] != 0:
                piv = i
                break
        if piv < 0:
            continue
        used[piv] = True
        prow[rank] = piv
        pcol[rank] = j
        rank += 1
        c = inv[P[piv, j]]
        for jj in range(j, cols):
            P[piv, jj] = (P[piv, jj] * c) % p
        for i in range(rows):
            if used[i]:
                continue
            f = P[i, j]
            if f == 0:
                continue
            for jj in range(j, cols):
                P[i, jj] = (P[i, jj] + (p - f) * P[piv, jj]) % p
        if rank == rows:
            break
    return prow[:rank], pcol[:rank]
