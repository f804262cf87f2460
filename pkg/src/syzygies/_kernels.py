"""Compiled inner loops for modular elimination.

Dense matrices hold residues in ``[0, p)`` as float64.  For ``p < 2**26`` every
product of two residues and every sum of up to ``2**26`` such products is an
exact float64 integer, so BLAS matrix products can be used and reduced
afterwards.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True, inline="always")
def _red(y, pf, inv):
    # y is an exact integer with |y| < 2**53; result in [0, p)
    t = y - np.trunc(y * inv) * pf
    if t < 0.0:
        t += pf
    if t >= pf:
        t -= pf
    return t


@njit(cache=True, nogil=True)
def modinv(x, p):
    e = p - 2
    res = 1
    base = x % p
    while e > 0:
        if e & 1:
            res = (res * base) % p
        base = (base * base) % p
        e >>= 1
    return res


@njit(cache=True, nogil=True, fastmath=True)
def panel_eliminate(a, r0, c0, c1, p, pivcols):
    """Row-echelon elimination of ``a[r0:, c0:c1]`` in place.

    Rows are swapped whole.  Below each pivot the eliminated entry is
    overwritten with its multiplier.  Pivot columns are written to
    ``pivcols``; the number of pivots is returned.
    """
    rows = a.shape[0]
    pf = float(p)
    inv = 1.0 / pf
    ncols = a.shape[1]
    r = r0
    k = 0
    for c in range(c0, c1):
        if r == rows:
            break
        piv = -1
        for i in range(r, rows):
            if a[i, c] != 0.0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(ncols):
                t = a[r, j]
                a[r, j] = a[piv, j]
                a[piv, j] = t
        pinv = float(modinv(int(a[r, c]), p))
        for i in range(r + 1, rows):
            x = a[i, c]
            if x != 0.0:
                f = _red(x * pinv, pf, inv)
                for j in range(c + 1, c1):
                    a[i, j] = _red(a[i, j] - f * a[r, j], pf, inv)
                a[i, c] = f
        pivcols[k] = c
        k += 1
        r += 1
    return k


@njit(cache=True, nogil=True, fastmath=True)
def unit_lower_solve(L, X, p):
    """Overwrite ``X`` with ``L^{-1} X`` mod ``p`` for unit lower triangular ``L``."""
    k, n = X.shape
    pf = float(p)
    inv = 1.0 / pf
    for t in range(1, k):
        for s in range(t):
            f = L[t, s]
            if f != 0.0:
                for j in range(n):
                    X[t, j] = _red(X[t, j] - f * X[s, j], pf, inv)


@njit(cache=True, nogil=True)
def rank_int64(a, p):
    """Plain elimination with integer residues, for primes too large for float64."""
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = -1
        for i in range(r, rows):
            if a[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(c, cols):
                t = a[r, j]
                a[r, j] = a[piv, j]
                a[piv, j] = t
        pinv = modinv(a[r, c], p)
        for i in range(r + 1, rows):
            x = a[i, c]
            if x != 0:
                f = (x * pinv) % p
                for j in range(c, cols):
                    a[i, j] = (a[i, j] - f * a[r, j]) % p
        r += 1
    return r


@njit(cache=True, nogil=True)
def singleton_peel(nrows, ncols, rptr, rcol, cptr, crow):
    """Remove pivots that cause no fill: rows or columns with one live entry.

    Each such pivot raises the rank by one and deletes its row and column
    without changing any other value.  Candidates are taken in index order,
    columns before rows.  Returns ``(rank, row_alive, col_alive)``.
    """
    row_alive = np.ones(nrows, dtype=np.bool_)
    col_alive = np.ones(ncols, dtype=np.bool_)
    rcount = np.empty(nrows, dtype=np.int64)
    ccount = np.empty(ncols, dtype=np.int64)
    for i in range(nrows):
        rcount[i] = rptr[i + 1] - rptr[i]
    for j in range(ncols):
        ccount[j] = cptr[j + 1] - cptr[j]
    stack = np.empty(nrows + ncols + 1, dtype=np.int64)
    top = 0
    # encode columns as j, rows as ncols + i; pushed in reverse so the lowest pops first
    for i in range(nrows - 1, -1, -1):
        if rcount[i] == 1:
            stack[top] = ncols + i
            top += 1
    for j in range(ncols - 1, -1, -1):
        if ccount[j] == 1:
            stack[top] = j
            top += 1
    rank = 0
    pending = np.zeros(nrows + ncols, dtype=np.bool_)
    for t in range(top):
        pending[stack[t]] = True
    while top > 0:
        top -= 1
        item = stack[top]
        pending[item] = False
        if item < ncols:
            j = item
            if not col_alive[j] or ccount[j] != 1:
                continue
            i = -1
            for t in range(cptr[j], cptr[j + 1]):
                if row_alive[crow[t]]:
                    i = crow[t]
                    break
        else:
            i = item - ncols
            if not row_alive[i] or rcount[i] != 1:
                continue
            j = -1
            for t in range(rptr[i], rptr[i + 1]):
                if col_alive[rcol[t]]:
                    j = rcol[t]
                    break
        rank += 1
        row_alive[i] = False
        col_alive[j] = False
        for t in range(rptr[i], rptr[i + 1]):
            c = rcol[t]
            if col_alive[c]:
                ccount[c] -= 1
                if ccount[c] == 1 and not pending[c]:
                    pending[c] = True
                    stack[top] = c
                    top += 1
        for t in range(cptr[j], cptr[j + 1]):
            r = crow[t]
            if row_alive[r]:
                rcount[r] -= 1
                if rcount[r] == 1 and not pending[ncols + r]:
                    pending[ncols + r] = True
                    stack[top] = ncols + r
                    top += 1
    return rank, row_alive, col_alive
