"""Exact rank over prime fields.

``rank`` works on sparse triplet matrices: it first removes every pivot that
causes no fill (a row or column with one live entry), then splits what is left
into connected components and eliminates each component densely.  Dense
elimination is a recursive row-echelon factorisation whose trailing updates are
float64 matrix products, exact because residues are small.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernels as K
from .errors import ArgumentError, ResourceError
from .multilinear import is_prime

DEFAULT_PRIME = 32003
DENSE_CAP = 4_000_000
FILL_CAP = 25_000_000
_EXACT = 2.0**53
_BASE = 48


@dataclass(frozen=True)
class PrimeField:
    prime: int = DEFAULT_PRIME

    def __post_init__(self):
        if not isinstance(self.prime, (int, np.integer)) or not is_prime(int(self.prime)):
            raise ArgumentError(f"{self.prime} is not a prime")
        if self.prime >= 2**31:
            raise ArgumentError(f"prime {self.prime} does not fit half a machine word")


@dataclass(frozen=True)
class SparseMatrix:
    """Triplets ``(row, col, value)`` over ``GF(prime)``, sorted column-major.

    Build with :meth:`from_triplets`, which sums duplicates and drops zeros.
    """

    nrows: int
    ncols: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    prime: int = DEFAULT_PRIME
    label: str = field(default="", compare=False)

    @classmethod
    def from_triplets(cls, nrows, ncols, rows, cols, vals, prime=DEFAULT_PRIME, label=""):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.int64).ravel() % prime
        if rows.size and (rows.min() < 0 or rows.max() >= nrows or cols.min() < 0 or cols.max() >= ncols):
            raise ArgumentError("triplet index outside the matrix shape")
        if rows.size:
            key = cols * max(nrows, 1) + rows
            order = np.argsort(key, kind="stable")
            key, vals = key[order], vals[order]
            uniq, start = np.unique(key, return_index=True)
            if uniq.size != key.size:
                vals = np.add.reduceat(vals, start) % prime
                key = uniq
            keep = vals != 0
            key, vals = key[keep], vals[keep]
            rows, cols = key % max(nrows, 1), key // max(nrows, 1)
        for a in (rows, cols, vals):
            a.flags.writeable = False
        return cls(int(nrows), int(ncols), rows, cols, vals, int(prime), label)

    @classmethod
    def from_dense(cls, a, prime=DEFAULT_PRIME, label=""):
        a = np.asarray(a, dtype=np.int64) % prime
        r, c = np.nonzero(a)
        return cls.from_triplets(a.shape[0], a.shape[1], r, c, a[r, c], prime, label)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return int(self.vals.size)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.int64)
        out[self.rows, self.cols] = self.vals
        return out

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix.from_triplets(
            self.ncols, self.nrows, self.cols, self.rows, self.vals, self.prime, self.label
        )

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows or self.prime != other.prime:
            raise ArgumentError("incompatible product")
        a = coo_matrix((self.vals, (self.rows, self.cols)), shape=self.shape).tocsr()
        b = coo_matrix((other.vals, (other.rows, other.cols)), shape=other.shape).tocsr()
        c = (a @ b).tocoo()
        return SparseMatrix.from_triplets(self.nrows, other.ncols, c.row, c.col, c.data, self.prime)


def _float_safe(p: int, inner: int) -> bool:
    return (p - 1) ** 2 * max(inner, 1) + p < _EXACT


def _mod_inplace(x: np.ndarray, p: int) -> None:
    np.fmod(x, p, out=x)
    x[x < 0] += p


def _lower_solve(a: np.ndarray, rows: np.ndarray, pcols: np.ndarray, X: np.ndarray, p: int) -> None:
    """``X <- L^{-1} X`` with ``L`` the unit lower factor stored at ``a[rows][:, pcols]``."""
    k = len(rows)
    if k <= _BASE:
        L = np.ascontiguousarray(a[np.ix_(rows, pcols)])
        K.unit_lower_solve(L, X, p)
        return
    h = k // 2
    _lower_solve(a, rows[:h], pcols[:h], X[:h], p)
    L21 = a[np.ix_(rows[h:], pcols[:h])]
    X[h:] -= L21 @ X[:h]
    _mod_inplace(X[h:], p)
    _lower_solve(a, rows[h:], pcols[h:], X[h:], p)


def _factor(a: np.ndarray, r0: int, c0: int, c1: int, p: int) -> list[int]:
    """Echelon-factor columns ``[c0, c1)`` of ``a`` from row ``r0``; return pivot columns."""
    if c1 - c0 <= _BASE:
        piv = np.empty(c1 - c0, dtype=np.int64)
        k = K.panel_eliminate(a, r0, c0, c1, p, piv)
        return [int(c) for c in piv[:k]]
    cm = (c0 + c1) // 2
    left = _factor(a, r0, c0, cm, p)
    k1 = len(left)
    if k1:
        rows = np.arange(r0, r0 + k1)
        pc = np.array(left)
        X = np.ascontiguousarray(a[r0 : r0 + k1, cm:c1])
        _lower_solve(a, rows, pc, X, p)
        if r0 + k1 < a.shape[0]:
            L21 = a[r0 + k1 :, pc]
            block = a[r0 + k1 :, cm:c1]
            block -= L21 @ X
            _mod_inplace(block, p)
    right = _factor(a, r0 + k1, cm, c1, p)
    return left + right


def _dense_rank_residues(a: np.ndarray, p: int) -> int:
    """Rank of an integer matrix with entries already reduced into ``[0, p)``."""
    m, n = a.shape
    if m == 0 or n == 0:
        return 0
    if n > m:
        a = a.T
        m, n = n, m
    if _float_safe(p, min(m, n)):
        work = np.array(a, dtype=np.float64, order="C")
        return len(_factor(work, 0, 0, n, p))
    work = np.array(a, dtype=np.int64, order="C")
    return int(K.rank_int64(work, p))


def dense_rank(M, F: PrimeField | None = None, cap: int = DENSE_CAP) -> int:
    """Rank over ``GF(p)`` of a dense integer matrix (array-like or SparseMatrix)."""
    F = F or PrimeField()
    if isinstance(M, SparseMatrix):
        if M.prime != F.prime:
            raise ArgumentError(f"matrix is over GF({M.prime}), field is GF({F.prime})")
        size = M.nrows * M.ncols
        if size > cap:
            raise ResourceError(f"dense view of {M.label or 'matrix'} needs {size} entries, cap {cap}",
                                required=size, where=M.label or None)
        a = M.to_dense()
    else:
        a = np.asarray(M, dtype=np.int64)
        if a.ndim != 2:
            raise ArgumentError("dense_rank expects a 2-d matrix")
        if a.size > cap:
            raise ResourceError(f"dense matrix needs {a.size} entries, cap {cap}", required=a.size)
        a = a % F.prime
    return _dense_rank_residues(a, F.prime)


def rank(M: SparseMatrix, F: PrimeField | None = None, fill_cap: int = FILL_CAP) -> int:
    """Exact rank of a sparse matrix over ``GF(p)``."""
    F = F or PrimeField(M.prime)
    if M.prime != F.prime:
        raise ArgumentError(f"matrix is over GF({M.prime}), field is GF({F.prime})")
    p = F.prime
    if M.nnz == 0:
        return 0
    nr, nc = M.nrows, M.ncols
    # CSR (row-major) and CSC (column-major) index views
    rorder = np.lexsort((M.cols, M.rows))
    rptr = np.zeros(nr + 1, dtype=np.int64)
    np.cumsum(np.bincount(M.rows, minlength=nr), out=rptr[1:])
    rcol = np.ascontiguousarray(M.cols[rorder])
    cptr = np.zeros(nc + 1, dtype=np.int64)
    np.cumsum(np.bincount(M.cols, minlength=nc), out=cptr[1:])
    crow = np.ascontiguousarray(M.rows)
    peeled, row_alive, col_alive = K.singleton_peel(nr, nc, rptr, rcol, cptr, crow)
    live = row_alive[M.rows] & col_alive[M.cols]
    if not live.any():
        return int(peeled)
    rr, cc, vv = M.rows[live], M.cols[live], M.vals[live]
    # bipartite components: rows are vertices 0..nr-1, columns nr..nr+nc-1
    g = coo_matrix((np.ones(rr.size), (rr, cc + nr)), shape=(nr + nc, nr + nc))
    _, labels = connected_components(g, directed=False)
    comp = labels[rr]
    order = np.argsort(comp, kind="stable")
    rr, cc, vv, comp = rr[order], cc[order], vv[order], comp[order]
    bounds = np.flatnonzero(np.diff(comp)) + 1
    total = int(peeled)
    for lo, hi in zip(np.r_[0, bounds], np.r_[bounds, comp.size]):
        ur, ri = np.unique(rr[lo:hi], return_inverse=True)
        uc, ci = np.unique(cc[lo:hi], return_inverse=True)
        size = ur.size * uc.size
        if size > fill_cap:
            raise ResourceError(
                f"{M.label or 'matrix'}: a {ur.size}x{uc.size} component exceeds the fill cap {fill_cap}",
                required=size, where=M.label or None)
        block = np.zeros((ur.size, uc.size), dtype=np.int64)
        block[ri, ci] = vv[lo:hi]
        total += _dense_rank_residues(block, p)
    return total


@dataclass
class MultiPrimeReport:
    ranks: dict[int, int]

    @property
    def agree(self) -> bool:
        return len(set(self.ranks.values())) <= 1

    @property
    def max_rank(self) -> int:
        """Lower bound for the rank over the rationals."""
        return max(self.ranks.values())

    @property
    def disagreeing(self) -> list[int]:
        return [p for p, r in self.ranks.items() if r != self.max_rank]


def rank_multiprime(builder: Callable[[int], SparseMatrix], primes: Iterable[int]) -> MultiPrimeReport:
    """Rebuild the matrix over each prime and compare ranks."""
    primes = list(dict.fromkeys(int(p) for p in primes))
    if len(primes) < 2:
        raise ArgumentError("multi-prime mode needs at least two distinct primes")
    ranks = {}
    for p in primes:
        F = PrimeField(p)
        ranks[p] = rank(builder(p), F)
    return MultiPrimeReport(ranks)


def rank_of(blocks: Sequence[SparseMatrix], F: PrimeField) -> int:
    return sum(rank(b, F) for b in blocks)
