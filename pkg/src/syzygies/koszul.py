"""Koszul cohomology of line bundles on products of projective spaces.

For ``V = H^0(X, L)`` and ``R_m = H^0(X, B + mL)`` the group ``K_{p,q}`` is the
middle cohomology of

    wedge^{p+1} V (x) R_{q-1}  ->  wedge^p V (x) R_q  ->  wedge^{p-1} V (x) R_{q+1}

with ``d(e_S (x) f) = sum_j (-1)^(j-1) e_{S - s_j} (x) x_{s_j} f``.  Every basis
vector has a torus weight (its total exponent vector) and the differential
preserves it, so each term splits into strands that are ranked separately.

An instance may carry a *regular sequence*: monomials of ``V`` with pairwise
disjoint variable supports.  They are nonzerodivisors on the section module in
every characteristic, so dividing them out (dropping them from ``V`` and every
monomial of ``R`` they divide) changes no graded Betti number while shrinking
the complex, often to a finite-dimensional one.
"""

from __future__ import annotations

import math
import os
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from dataclasses import field as _field
from functools import cached_property
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .errors import ArgumentError, InvariantViolation, ResourceError
from .exactla import DENSE_CAP, FILL_CAP, PrimeField, SparseMatrix, dense_rank, rank
from .multilinear import binomial_table
from .multiproj import (
    MultiProjSpace,
    enumerate_monomials,
    first_nonzero_degree,
    hilbert_function,
    line_bundle_cohomology,
    section_dimension,
)

BASIS_CAP = 20_000_000


@dataclass(frozen=True)
class KoszulInstance:
    """``(X, B, L, field)``, optionally with a monomial regular sequence divided out."""

    X: MultiProjSpace
    B: tuple[int, ...]
    L: tuple[int, ...]
    field: PrimeField = PrimeField()
    regular: tuple[tuple[int, ...], ...] = ()
    basis_cap: int = BASIS_CAP
    _cache: dict = _field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        X = self.X if isinstance(self.X, MultiProjSpace) else MultiProjSpace(self.X)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "B", X.degree(self.B))
        object.__setattr__(self, "L", X.degree(self.L))
        if any(d < 1 for d in self.L):
            raise ArgumentError(f"L = {self.L} is not very ample: every coordinate must be >= 1")
        reg = tuple(tuple(int(x) for x in m) for m in self.regular)
        object.__setattr__(self, "regular", reg)
        if reg:
            V = set(enumerate_monomials(X, self.L))
            support = set()
            for m in reg:
                if m not in V:
                    raise ArgumentError(f"{m} is not a monomial of H^0(L)")
                s = {i for i, x in enumerate(m) if x}
                if s & support:
                    raise ArgumentError("regular monomials must have disjoint supports")
                support |= s

    @classmethod
    def create(cls, spaces, B, L, prime: int = 32003, **kw) -> "KoszulInstance":
        return cls(MultiProjSpace(spaces), B, L, PrimeField(prime), **kw)

    # -- derived data -------------------------------------------------------

    @property
    def n(self) -> int:
        return self.X.dim

    @property
    def r(self) -> int:
        """``h^0(L) - 1`` of the unreduced embedding."""
        return section_dimension(self.X, self.L) - 1

    @property
    def prime(self) -> int:
        return self.field.prime

    @property
    def b(self) -> int:
        return min(self.B)

    @property
    def d(self) -> int:
        return min(self.L)

    def with_prime(self, prime: int) -> "KoszulInstance":
        return replace(self, field=PrimeField(prime), _cache={})

    def literal(self) -> "KoszulInstance":
        return replace(self, regular=(), _cache={}) if self.regular else self

    def reduced(self) -> "KoszulInstance":
        """Divide out ``x_{i,j}^{d_i}`` products over ``j = 0..min n_i``."""
        if self.regular:
            return self
        seq = []
        for j in range(min(self.X.factors) + 1):
            e: list[int] = []
            for n, d in zip(self.X.factors, self.L):
                blk = [0] * (n + 1)
                blk[j] = d
                e += blk
            seq.append(tuple(e))
        return replace(self, regular=tuple(seq), _cache={})

    def regularity_hypothesis(self) -> bool:
        """Whether ``H^i(B + mL) = 0`` for all ``i > 0`` and ``m > 0``."""
        m = 1
        while True:
            a = tuple(b + m * d for b, d in zip(self.B, self.L))
            if any(i > 0 for i in line_bundle_cohomology(self.X, a)):
                return False
            if all(x >= -n for x, n in zip(a, self.X.factors)):
                return True
            m += 1

    def first_degree(self) -> int:
        return first_nonzero_degree(self.B, self.L)

    def hilbert(self, m: int) -> int:
        return hilbert_function(self.X, self.B, self.L, m)

    @cached_property
    def V(self) -> np.ndarray:
        mons = [m for m in enumerate_monomials(self.X, self.L) if m not in self.regular]
        return np.array(mons, dtype=np.int64).reshape(len(mons), self.X.nvars)

    @property
    def N(self) -> int:
        return self.V.shape[0]

    def R(self, m: int) -> np.ndarray:
        """Monomial basis of the degree-``m`` piece of the (reduced) section module."""
        if ("R", m) not in self._cache:
            a = tuple(b + m * d for b, d in zip(self.B, self.L))
            mons = enumerate_monomials(self.X, a, cap=self.basis_cap)
            arr = np.array(mons, dtype=np.int64).reshape(len(mons), self.X.nvars)
            if self.regular and len(arr):
                keep = np.ones(len(arr), dtype=bool)
                for g in self.regular:
                    keep &= ~np.all(arr >= np.array(g), axis=1)
                arr = arr[keep]
            arr.flags.writeable = False
            self._cache[("R", m)] = arr
        return self._cache[("R", m)]

    def term_dim(self, p: int, m: int) -> int:
        if p < 0:
            return 0
        return math.comb(self.N, p) * len(self.R(m)) if p <= self.N else 0

    def wedges(self, p: int) -> np.ndarray:
        """All ``p``-subsets of ``range(N)``, row ``i`` being the subset of colex rank ``i``."""
        if ("W", p) not in self._cache:
            N = self.N
            count = math.comb(N, p) if 0 <= p <= N else 0
            if count > self.basis_cap:
                raise ResourceError(f"wedge^{p} of a {N}-dimensional space has {count} elements",
                                    required=count, where=f"wedge^{p}")
            if count == 0:
                W = np.zeros((0, max(p, 0)), dtype=np.int64)
            else:
                W = _colex_subsets(N, p)
            W.flags.writeable = False
            self._cache[("W", p)] = W
        return self._cache[("W", p)]

    def describe(self) -> dict[str, Any]:
        return {"spaces": list(self.X.factors), "b": list(self.B), "l": list(self.L), "prime": self.prime}


def _colex_subsets(N: int, p: int) -> np.ndarray:
    if p == 0:
        return np.zeros((1, 0), dtype=np.int64)
    # colex order: build by the largest element
    blocks = []
    for top in range(p - 1, N):
        rest = _colex_subsets(top, p - 1)
        blocks.append(np.hstack([rest, np.full((rest.shape[0], 1), top, dtype=np.int64)]))
    return np.vstack(blocks)


# -- weight keys ---------------------------------------------------------------


class _Weights:
    """Integer encoding of torus weights with total degree ``t`` in the grading by ``L``."""

    def __init__(self, inst: KoszulInstance, t: int):
        radix, weights = [], []
        w = 1
        for blk, n, b, d in zip(inst.X.blocks(), inst.X.factors, inst.B, inst.L):
            total = b + t * d
            for _ in range(n):
                weights.append(w)
                w *= max(total, 0) + 1
            weights.append(0)
            radix.append(total)
        if w >= 2**62:
            raise ResourceError("torus weights do not fit a 64-bit key", required=w)
        self.vector = np.array(weights, dtype=np.int64)
        self.totals = radix
        self.inst = inst

    def of(self, exps: np.ndarray) -> np.ndarray:
        return exps @ self.vector if len(exps) else np.zeros(0, dtype=np.int64)

    def decode(self, key: int) -> tuple[int, ...]:
        out = []
        for n, total in zip(self.inst.X.factors, self.totals):
            blk = []
            for _ in range(n):
                base = total + 1
                blk.append(key % base)
                key //= base
            blk.append(total - sum(blk))
            out += blk
        return tuple(int(x) for x in out)


def _term_keys(inst: KoszulInstance, wt: _Weights, p: int, m: int) -> np.ndarray:
    W = inst.wedges(p)
    R = inst.R(m)
    if len(W) == 0 or len(R) == 0:
        return np.zeros(0, dtype=np.int64)
    wkey = wt.of(inst.V[W].sum(axis=1)) if p else np.zeros(1, dtype=np.int64)
    return (wkey[:, None] + wt.of(R)[None, :]).ravel()


def _linear_code(inst: KoszulInstance, m: int) -> np.ndarray:
    """Per-variable weights making exponent vectors of degree ``<= B + mL`` distinct integers.

    The code is linear, so ``code(u + v) = code(u) + code(v)``.
    """
    weights, w = [], 1
    for n, b, d in zip(inst.X.factors, inst.B, inst.L):
        radix = max(b + m * d, 0) + 1
        for _ in range(n + 1):
            weights.append(w)
            w *= radix
    if w >= 2**62:
        raise ResourceError("monomial codes do not fit a 64-bit integer", required=w)
    return np.array(weights, dtype=np.int64)


def _multiplication_table(inst: KoszulInstance, q: int) -> np.ndarray:
    """``table[s, f]`` is the index of ``x_s * f`` in the degree ``q+1`` basis, or -1 if zero."""
    Rq, Rn = inst.R(q), inst.R(q + 1)
    if len(Rn) == 0 or len(Rq) == 0 or inst.N == 0:
        return np.full((inst.N, len(Rq)), -1, dtype=np.int64)
    w = _linear_code(inst, q + 1)
    mine = Rn @ w
    order = np.argsort(mine, kind="stable")
    srt = mine[order]
    target = (inst.V @ w)[:, None] + (Rq @ w)[None, :]
    pos = np.searchsorted(srt, target).clip(max=len(srt) - 1)
    return np.where(srt[pos] == target, order[pos], -1)


def assemble_differential(inst: KoszulInstance, p: int, q: int) -> SparseMatrix:
    """The matrix of ``d: wedge^p V (x) R_q -> wedge^{p-1} V (x) R_{q+1}``.

    Columns index ``e_S (x) f`` as ``rank(S) * dim R_q + index(f)``, rows likewise.
    """
    rows, cols, vals, nrows, ncols = _differential_triplets(inst, p, q)
    return SparseMatrix.from_triplets(nrows, ncols, rows, cols, vals, inst.prime, label=f"d[{p},{q}]")


def _differential_triplets(inst: KoszulInstance, p: int, q: int):
    if p < 0:
        raise ArgumentError(f"p must be nonnegative, got {p}")
    ncols = inst.term_dim(p, q)
    nrows = inst.term_dim(p - 1, q + 1)
    for size, where in ((ncols, f"wedge^{p} V (x) R_{q}"), (nrows, f"wedge^{p - 1} V (x) R_{q + 1}")):
        if size > inst.basis_cap:
            raise ResourceError(f"{where} has {size} basis elements, cap {inst.basis_cap}",
                                required=size, where=f"({p},{q})")
    empty = np.zeros(0, dtype=np.int64)
    if ncols == 0 or nrows == 0:
        return empty, empty, empty, nrows, ncols
    W = inst.wedges(p)
    Rq, Rn = inst.R(q), inst.R(q + 1)
    nq, nn = len(Rq), len(Rn)
    mult = _multiplication_table(inst, q)
    T = binomial_table(inst.N + 1).table
    idx = np.arange(p)
    full = T[W, idx + 1]      # C(s_i, i+1): contribution at its own position
    shifted = T[W, idx]       # C(s_i, i): contribution after one earlier deletion
    pre = np.cumsum(full, axis=1) - full
    suf = np.cumsum(shifted[:, ::-1], axis=1)[:, ::-1] - shifted
    minus_rank = pre + suf                      # rank of S minus its j-th element
    col_w = np.arange(len(W), dtype=np.int64)
    rows_l, cols_l, vals_l = [], [], []
    fidx = np.arange(nq, dtype=np.int64)
    for j in range(p):
        target = mult[W[:, j]]                  # (C, nq)
        ok = target >= 0
        r = minus_rank[:, j][:, None] * nn + target
        c = col_w[:, None] * nq + fidx[None, :]
        rows_l.append(r[ok])
        cols_l.append(np.broadcast_to(c, ok.shape)[ok])
        vals_l.append(np.full(int(ok.sum()), 1 if j % 2 == 0 else -1, dtype=np.int64))
    return np.concatenate(rows_l), np.concatenate(cols_l), np.concatenate(vals_l), nrows, ncols


# -- strands -------------------------------------------------------------------


def _group(keys: np.ndarray):
    """Sorted distinct keys and, per element, its position inside its key group."""
    order = np.argsort(keys, kind="stable")
    sk = keys[order]
    uniq, start, counts = np.unique(sk, return_index=True, return_counts=True)
    local = np.empty(len(keys), dtype=np.int64)
    local[order] = np.arange(len(keys)) - np.repeat(start, counts)
    return uniq, counts, local, order, start


@dataclass
class MapBlocks:
    """One differential cut into its weight blocks."""

    p: int
    q: int
    keys: np.ndarray                 # weights with a nonempty domain block
    blocks: list[SparseMatrix]
    domain_sizes: np.ndarray
    codomain_sizes: np.ndarray


def split_differential(inst: KoszulInstance, p: int, q: int, wt: _Weights | None = None) -> MapBlocks:
    wt = wt or _Weights(inst, p + q)
    rows, cols, vals, nrows, ncols = _differential_triplets(inst, p, q)
    dkeys = _term_keys(inst, wt, p, q)
    ckeys = _term_keys(inst, wt, p - 1, q + 1) if p >= 1 else np.zeros(0, dtype=np.int64)
    if ncols == 0:
        return MapBlocks(p, q, np.zeros(0, dtype=np.int64), [], np.zeros(0, np.int64), np.zeros(0, np.int64))
    duniq, dcounts, dlocal, _, _ = _group(dkeys)
    if nrows:
        cuniq, ccounts, clocal, _, _ = _group(ckeys)
    else:
        cuniq, ccounts, clocal = np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, np.int64)
    if rows.size and not np.array_equal(ckeys[rows], dkeys[cols]):
        raise InvariantViolation(f"d[{p},{q}] does not preserve torus weights")
    csize = np.zeros(len(duniq), dtype=np.int64)
    if len(cuniq):
        pos = np.searchsorted(cuniq, duniq).clip(max=len(cuniq) - 1)
        match = cuniq[pos] == duniq
        csize[match] = ccounts[pos[match]]
    ekey = dkeys[cols]
    order = np.argsort(ekey, kind="stable")
    ekey, er, ec, ev = ekey[order], clocal[rows[order]] if rows.size else rows, dlocal[cols[order]], vals[order]
    cut = np.searchsorted(ekey, duniq, side="left")
    end = np.searchsorted(ekey, duniq, side="right")
    blocks = []
    for i, key in enumerate(duniq):
        lo, hi = cut[i], end[i]
        blocks.append(SparseMatrix.from_triplets(
            int(csize[i]), int(dcounts[i]), er[lo:hi], ec[lo:hi], ev[lo:hi], inst.prime,
            label=f"d[{p},{q}] weight {wt.decode(int(key))}"))
    return MapBlocks(p, q, duniq, blocks, dcounts, csize)


@dataclass
class Strand:
    """One torus weight of the three-term complex around ``wedge^p V (x) R_q``."""

    key: tuple[int, ...]
    incoming: np.ndarray      # indices into wedge^{p+1} V (x) R_{q-1}
    middle: np.ndarray        # indices into wedge^p V (x) R_q
    outgoing: np.ndarray      # indices into wedge^{p-1} V (x) R_{q+1}
    d_in: SparseMatrix        # middle x incoming
    d_out: SparseMatrix       # outgoing x middle

    @property
    def dims(self) -> tuple[int, int, int]:
        return (len(self.incoming), len(self.middle), len(self.outgoing))


def strand_decompose(inst: KoszulInstance, p: int, q: int) -> list[Strand]:
    """Strands of the complex at ``(p, q)``, one per torus weight occurring in any of the three terms."""
    if p < 0:
        raise ArgumentError(f"p must be nonnegative, got {p}")
    wt = _Weights(inst, p + q)
    keys = {
        "in": _term_keys(inst, wt, p + 1, q - 1),
        "mid": _term_keys(inst, wt, p, q),
        "out": _term_keys(inst, wt, p - 1, q + 1) if p >= 1 else np.zeros(0, dtype=np.int64),
    }
    members = {}
    for name, k in keys.items():
        order = np.argsort(k, kind="stable")
        uniq, start, counts = np.unique(k[order], return_index=True, return_counts=True)
        members[name] = {int(u): order[s:s + c] for u, s, c in zip(uniq, start, counts)}
    into = split_differential(inst, p + 1, q - 1, wt)
    out = split_differential(inst, p, q, wt)
    in_blocks = dict(zip((int(k) for k in into.keys), into.blocks))
    out_blocks = dict(zip((int(k) for k in out.keys), out.blocks))
    empty = np.zeros(0, dtype=np.int64)
    strands = []
    # keyed over all three terms so that every basis element lands in some strand
    for key in sorted(set(members["mid"]) | set(members["in"]) | set(members["out"])):
        mid = members["mid"].get(key, empty)
        inc = members["in"].get(key, empty)
        outg = members["out"].get(key, empty)
        d_in = in_blocks.get(key) or SparseMatrix.from_triplets(len(mid), len(inc), [], [], [], inst.prime)
        d_out = out_blocks.get(key) or SparseMatrix.from_triplets(len(outg), len(mid), [], [], [], inst.prime)
        strands.append(Strand(wt.decode(key), inc, mid, outg, d_in, d_out))
    return strands


# -- scheduling ----------------------------------------------------------------


@dataclass
class TaskFailure:
    index: int
    error: BaseException
    trace: str = ""

    def __str__(self):
        return f"task {self.index}: {type(self.error).__name__}: {self.error}"


def parallel_schedule(tasks: Sequence[Callable[[], Any]], budget: int = 1,
                      cost: Sequence[float] | None = None) -> list[Any]:
    """Run independent tasks on ``budget`` threads; results come back in task order.

    A task that raises yields a :class:`TaskFailure` in its slot instead of
    stopping the others.  Larger tasks (by ``cost``) are submitted first.
    """
    if budget < 1:
        raise ArgumentError("worker budget must be at least 1")
    n = len(tasks)
    results: list[Any] = [None] * n

    def run(i):
        try:
            return tasks[i]()
        except Exception as exc:  # isolated per task
            return TaskFailure(i, exc, traceback.format_exc())

    order = sorted(range(n), key=lambda i: -cost[i]) if cost is not None else list(range(n))
    if budget == 1 or n <= 1:
        for i in order:
            results[i] = run(i)
        return results
    with ThreadPoolExecutor(max_workers=budget) as pool:
        futures = {i: pool.submit(run, i) for i in order}
        for i, fut in futures.items():
            results[i] = fut.result()
    return results


def default_workers() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1))


# -- the engine ----------------------------------------------------------------


@dataclass
class EntryResult:
    p: int
    q: int
    dim: int
    strands: int
    seconds: float


class KoszulEngine:
    """Computes ``k_{p,q}`` with a cache of differential ranks.

    ``reduce=True`` works with :meth:`KoszulInstance.reduced`; the answers are
    the same as for the literal complex.
    """

    def __init__(self, inst: KoszulInstance, workers: int = 1, reduce: bool = True,
                 dense_cap: int = DENSE_CAP, fill_cap: int = FILL_CAP):
        self.source = inst
        self.inst = inst.reduced() if reduce else inst
        self.workers = workers
        self.dense_cap = dense_cap
        self.fill_cap = fill_cap
        self._ranks: dict[tuple[int, int], tuple[int, int]] = {}

    def _block_rank(self, M: SparseMatrix) -> int:
        if M.nnz == 0:
            return 0
        if M.nrows * M.ncols <= self.dense_cap:
            return dense_rank(M, self.inst.field, cap=self.dense_cap)
        return rank(M, self.inst.field, fill_cap=self.fill_cap)

    def map_rank(self, p: int, q: int) -> tuple[int, int]:
        """``(rank of d[p,q], number of weight blocks)``."""
        if p < 0:
            return (0, 0)
        if (p, q) not in self._ranks:
            mb = split_differential(self.inst, p, q)
            live = [b for b in mb.blocks if b.nnz]
            res = parallel_schedule([lambda b=b: self._block_rank(b) for b in live], self.workers,
                                    cost=[b.nrows * b.ncols for b in live])
            for r in res:
                if isinstance(r, TaskFailure):
                    err = r.error
                    if isinstance(err, ResourceError):
                        raise ResourceError(f"{live[r.index].label}: {err}",
                                            required=err.required, where=live[r.index].label) from err
                    raise err
            self._ranks[(p, q)] = (int(sum(res)), len(mb.blocks))
        return self._ranks[(p, q)]

    def dimension(self, p: int, q: int) -> EntryResult:
        if p < 0:
            raise ArgumentError(f"p must be nonnegative, got {p}")
        t0 = time.perf_counter()
        try:
            mid = self.inst.term_dim(p, q)
            if mid > self.inst.basis_cap:
                raise ResourceError(f"wedge^{p} V (x) R_{q} has {mid} basis elements, cap {self.inst.basis_cap}",
                                    required=mid, where=f"({p},{q})")
            if mid == 0:
                return EntryResult(p, q, 0, 0, time.perf_counter() - t0)
            r_out, blocks = self.map_rank(p, q)
            r_in, _ = self.map_rank(p + 1, q - 1)
        except ResourceError as exc:
            raise ResourceError(f"entry ({p},{q}): {exc}", required=exc.required, where=exc.where) from exc
        k = mid - r_out - r_in
        if k < 0:
            raise InvariantViolation(f"negative dimension at ({p},{q}): {mid} - {r_out} - {r_in}")
        return EntryResult(p, q, k, blocks, time.perf_counter() - t0)


def koszul_dimension(inst: KoszulInstance, p: int, q: int, workers: int = 1, reduce: bool = True) -> int:
    return KoszulEngine(inst, workers=workers, reduce=reduce).dimension(p, q).dim


@dataclass
class MultiPrimeDimension:
    """``k_{p,q}`` over several primes.  The minimum is an upper bound for characteristic 0."""

    p: int
    q: int
    values: dict[int, int]

    @property
    def agree(self) -> bool:
        return len(set(self.values.values())) == 1

    @property
    def minimum(self) -> int:
        return min(self.values.values())


def koszul_dimension_multiprime(inst: KoszulInstance, p: int, q: int, primes: Sequence[int],
                                workers: int = 1) -> MultiPrimeDimension:
    primes = list(dict.fromkeys(int(x) for x in primes))
    if len(primes) < 2:
        raise ArgumentError("multi-prime mode needs at least two distinct primes")
    vals = {pr: koszul_dimension(inst.with_prime(pr), p, q, workers=workers) for pr in primes}
    return MultiPrimeDimension(p, q, vals)


def whole_matrix_dimension(inst: KoszulInstance, p: int, q: int) -> int:
    """``k_{p,q}`` from the two global differentials, without any weight splitting."""
    F = inst.field
    mid = inst.term_dim(p, q)
    r_out = rank(assemble_differential(inst, p, q), F)
    r_in = rank(assemble_differential(inst, p + 1, q - 1), F) if inst.term_dim(p + 1, q - 1) else 0
    return mid - r_out - r_in


# -- Betti tables -----------------------------------------------------------------


@dataclass
class BettiTable:
    """``k_{p,q}`` for the computed entries; absent means not computed."""

    spaces: tuple[int, ...]
    B: tuple[int, ...]
    L: tuple[int, ...]
    prime: int
    entries: dict[tuple[int, int], int] = field(default_factory=dict)
    errors: dict[tuple[int, int], str] = field(default_factory=dict)
    seconds: dict[tuple[int, int], float] = field(default_factory=dict)
    strands: dict[tuple[int, int], int] = field(default_factory=dict)
    meta: dict[str, Any] = field(default_factory=dict)

    def get(self, p: int, q: int) -> int | None:
        return self.entries.get((p, q))

    def __getitem__(self, pq: tuple[int, int]) -> int:
        return self.entries[pq]

    def row(self, q: int) -> dict[int, int]:
        return {p: k for (p, qq), k in sorted(self.entries.items()) if qq == q}

    @property
    def qs(self) -> list[int]:
        return sorted({q for _, q in self.entries} | {q for _, q in self.errors})

    @property
    def ps(self) -> list[int]:
        return sorted({p for p, _ in self.entries} | {p for p, _ in self.errors})

    def nonzero(self) -> dict[tuple[int, int], int]:
        return {pq: k for pq, k in sorted(self.entries.items()) if k}


def default_qrange(inst: KoszulInstance) -> range:
    """Rows that can be nonzero when the regularity hypothesis holds."""
    return range(min(inst.first_degree(), 0), inst.n + 2)


def betti_table(inst: KoszulInstance, pmax: int, qrange: Iterable[int] | None = None,
                workers: int | None = None, reduce: bool = True,
                on_entry: Callable[[EntryResult], None] | None = None,
                lookup: Callable[[int, int], int | None] | None = None) -> BettiTable:
    """Compute ``k_{p,q}`` for ``0 <= p <= pmax`` and ``q`` in ``qrange``.

    ``lookup`` may supply already-known values (a cache); ``on_entry`` sees each
    freshly computed entry.  Resource errors are recorded per entry.
    """
    if pmax < 0:
        raise ArgumentError("pmax must be nonnegative")
    qs = sorted(set(qrange if qrange is not None else default_qrange(inst)))
    workers = workers or default_workers()
    engine = KoszulEngine(inst, workers=workers, reduce=reduce)
    table = BettiTable(inst.X.factors, inst.B, inst.L, inst.prime)
    table.meta.update({
        "engine": __version__, "pmax": pmax, "qrange": qs, "reduced": reduce,
        "regular_sequence": [list(m) for m in engine.inst.regular],
    })
    hyp = inst.regularity_hypothesis()
    for q in qs:
        for p in range(pmax + 1):
            known = lookup(p, q) if lookup else None
            if known is not None:
                table.entries[(p, q)] = known
                continue
            try:
                res = engine.dimension(p, q)
            except ResourceError as exc:
                table.errors[(p, q)] = str(exc)
                continue
            table.entries[(p, q)] = res.dim
            table.seconds[(p, q)] = res.seconds
            table.strands[(p, q)] = res.strands
            if on_entry:
                on_entry(res)
            if hyp and q >= inst.n + 2 and res.dim:
                raise InvariantViolation(f"k_{p},{q} = {res.dim} although q >= n + 2")
    return table


def hilbert_betti_check(table: BettiTable, inst: KoszulInstance, upto: int | None = None) -> dict[int, tuple[int, int]]:
    """Compare ``sum (-1)^p k_{p,q} t^{p+q}`` with ``(1-t)^{r+1} HS_R(t)`` coefficientwise.

    Returns ``{degree: (betti side, hilbert side)}``; equality everywhere is the
    identity.  Only meaningful for a full table.
    """
    N = inst.r + 1
    m0 = inst.first_degree()
    pmax = max(p for p, _ in table.entries)
    qmax = max(q for _, q in table.entries)
    upto = pmax + qmax if upto is None else upto
    out = {}
    for j in range(m0, upto + 1):
        lhs = sum((-1) ** p * k for (p, q), k in table.entries.items() if p + q == j)
        rhs = sum((-1) ** i * math.comb(N, i) * inst.hilbert(j - i) for i in range(N + 1) if j - i >= m0)
        out[j] = (lhs, rhs)
    return out
