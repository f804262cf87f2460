"""Exterior, divided and symmetric power combinatorics.

Wedge monomials ``e_{s_1} ^ ... ^ e_{s_p}`` are indexed by strictly increasing
tuples and ranked colexicographically, so ``rank(S) = sum_j C(s_j, j)`` with
``j`` counted from one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ArgumentError
from .multiproj import binom, checked


class BinomialTable:
    """Read-only table of ``C(n, k)`` for ``0 <= n < size``, ``0 <= k <= kmax``."""

    def __init__(self, size: int, kmax: int | None = None):
        kmax = size if kmax is None else kmax
        table = np.zeros((size + 1, kmax + 2), dtype=np.int64)
        for n in range(size + 1):
            for k in range(min(n, kmax + 1) + 1):
                table[n, k] = checked(math.comb(n, k))
        table.flags.writeable = False
        self.table = table

    def __call__(self, n: int, k: int) -> int:
        return int(self.table[n, k])


@lru_cache(maxsize=None)
def binomial_table(size: int) -> BinomialTable:
    return BinomialTable(size)


def wedge_rank(w: Sequence[int]) -> int:
    prev = -1
    for s in w:
        if s <= prev:
            raise ArgumentError(f"wedge index {tuple(w)} is not strictly increasing")
        prev = s
    if w and w[0] < 0:
        raise ArgumentError(f"wedge index {tuple(w)} has a negative entry")
    return sum(math.comb(s, j + 1) for j, s in enumerate(w))


def wedge_unrank(r: int, p: int, N: int) -> tuple[int, ...]:
    """Inverse of :func:`wedge_rank` on ``p``-subsets of ``range(N)``."""
    if p < 0 or N < 0 or not 0 <= r < binom(N, p):
        raise ArgumentError(f"rank {r} out of range for {p}-subsets of {N} elements")
    out = [0] * p
    n = N
    for k in range(p, 0, -1):
        n -= 1
        while math.comb(n, k) > r:
            n -= 1
        out[k - 1] = n
        r -= math.comb(n, k)
    return tuple(out)


def koszul_sign(w: Sequence[int], j: int) -> int:
    """Sign ``(-1)^(j-1)`` for deleting the ``j``-th factor (1-based) of ``w``."""
    if not 1 <= j <= len(w):
        raise ArgumentError(f"position {j} outside 1..{len(w)}")
    return 1 if j % 2 == 1 else -1


def divided_power_dim(dimV: int, n: int) -> int:
    if dimV < 1 or n < 0:
        raise ArgumentError(f"need dimV >= 1 and n >= 0, got {dimV}, {n}")
    return checked(binom(dimV + n - 1, n))


symmetric_power_dim = divided_power_dim


def exponent_vectors(dimV: int, n: int) -> list[tuple[int, ...]]:
    """Monomial basis of ``S^n V`` (and of ``D^n V``), largest first exponent first."""
    if dimV == 1:
        return [(n,)]
    return [(e,) + rest for e in range(n, -1, -1) for rest in exponent_vectors(dimV - 1, n - e)]


def multinomial(e: Sequence[int]) -> int:
    out = math.factorial(sum(e))
    for x in e:
        out //= math.factorial(x)
    return out


def is_prime(p: int) -> bool:
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


@dataclass(frozen=True)
class PowerMap:
    """The natural map ``D^n V -> S^n V`` over ``GF(prime)``.

    The monomial bases of both sides diagonalise it; ``diagonal[i]`` is the
    multinomial coefficient of ``basis[i]`` reduced mod ``prime``.
    """

    source: str
    n: int
    dimV: int
    prime: int
    basis: tuple[tuple[int, ...], ...]
    diagonal: tuple[int, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.basis), len(self.basis))

    @property
    def rank(self) -> int:
        return sum(1 for x in self.diagonal if x)

    @property
    def kernel_dim(self) -> int:
        return len(self.basis) - self.rank

    @property
    def cokernel_dim(self) -> int:
        return len(self.basis) - self.rank

    def dense(self) -> np.ndarray:
        return np.diag(np.array(self.diagonal, dtype=np.int64))


def divided_to_symmetric(dimV: int, n: int, prime: int) -> PowerMap:
    if not is_prime(prime):
        raise ArgumentError(f"{prime} is not prime")
    basis = tuple(exponent_vectors(dimV, n))
    if len(basis) != divided_power_dim(dimV, n):
        raise AssertionError("monomial count disagrees with C(dimV+n-1, n)")
    diag = tuple(multinomial(e) % prime for e in basis)
    return PowerMap("divided", n, dimV, prime, basis, diag)


def hermite_dimension_check(n: int, d: int) -> bool:
    """Both sides of ``D^n(S^d k^2) = S^d(D^n k^2)`` have dimension ``C(n+d, n)``."""
    if n < 0 or d < 0:
        raise ArgumentError("n and d must be nonnegative")
    lhs = binom(symmetric_power_dim(2, d) + n - 1, n)
    rhs = binom(divided_power_dim(2, n) + d - 1, d)
    return lhs == rhs == binom(n + d, n)


def filtration_dimension_check(dimU: int, dimW: int, kmax: int) -> bool:
    """Dimension count of the filtration of ``wedge^k V`` for ``0 -> U -> V -> W -> 0``."""
    return all(
        binom(dimU + dimW, k) == sum(binom(dimU, k - p) * binom(dimW, p) for p in range(k + 1))
        for k in range(kmax + 1)
    )
