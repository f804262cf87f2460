"""Line bundles on products of projective spaces.

A product ``P^{n_1} x ... x P^{n_k}`` is a :class:`MultiProjSpace`; a line
bundle ``O(a_1) x ... x O(a_k)`` is given by its multidegree, a tuple of
integers.  Cohomology follows from Bott's formula on each factor and the
Kunneth formula on the product.  Everything is exact integer arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import ArgumentError, ResourceError

WORD_MAX = 2**63 - 1

MultiDegree = tuple[int, ...]
Monomial = tuple[int, ...]


def checked(value: int, what: str = "count") -> int:
    """Return ``value`` unchanged, raising if it does not fit a signed 64-bit word."""
    if abs(value) > WORD_MAX:
        raise ResourceError(f"{what} {value} exceeds the 64-bit word", required=value, where=what)
    return value


def binom(n: int, k: int) -> int:
    """Binomial coefficient, zero outside ``0 <= k <= n``."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def signed_binom(x: int, k: int) -> int:
    """``x (x-1) ... (x-k+1) / k!`` for any integer ``x`` (polynomial in ``x``)."""
    if k < 0:
        return 0
    num = 1
    for i in range(k):
        num *= x - i
    return num // math.factorial(k)


@dataclass(frozen=True)
class MultiProjSpace:
    """The product ``P^{n_1} x ... x P^{n_k}``."""

    factors: tuple[int, ...]

    def __init__(self, factors: Sequence[int] | int):
        if isinstance(factors, int):
            factors = (factors,)
        factors = tuple(int(n) for n in factors)
        if not factors:
            raise ArgumentError("a product of projective spaces needs at least one factor")
        if any(n < 1 for n in factors):
            raise ArgumentError(f"factor dimensions must be positive, got {factors}")
        object.__setattr__(self, "factors", factors)

    @property
    def k(self) -> int:
        return len(self.factors)

    @property
    def dim(self) -> int:
        return sum(self.factors)

    @property
    def nvars(self) -> int:
        """Length of a concatenated exponent vector, ``sum(n_i + 1)``."""
        return sum(n + 1 for n in self.factors)

    def blocks(self) -> list[slice]:
        out, start = [], 0
        for n in self.factors:
            out.append(slice(start, start + n + 1))
            start += n + 1
        return out

    def canonical(self) -> MultiDegree:
        """Multidegree of the canonical bundle, ``(-n_1-1, ..., -n_k-1)``."""
        return tuple(-n - 1 for n in self.factors)

    def degree(self, a: Sequence[int] | int) -> MultiDegree:
        """Validate and normalise a multidegree for this space."""
        if isinstance(a, int):
            a = (a,)
        a = tuple(int(x) for x in a)
        if len(a) != self.k:
            raise ArgumentError(f"multidegree {a} has {len(a)} entries, space has {self.k} factors")
        return a

    def __str__(self) -> str:
        return " x ".join(f"P^{n}" for n in self.factors)


def projective_cohomology(n: int, a: int) -> dict[int, int]:
    """Nonzero cohomology of ``O(a)`` on ``P^n`` (``n = 0`` is a point)."""
    if n == 0:
        return {0: 1}
    out = {}
    if a >= 0:
        out[0] = binom(a + n, n)
    if a <= -n - 1:
        out[n] = binom(-a - 1, n)
    return out


def kunneth(tables: Sequence[dict[int, int]]) -> dict[int, int]:
    """Convolve per-factor cohomology tables."""
    total = {0: 1}
    for table in tables:
        nxt: dict[int, int] = {}
        for i, x in total.items():
            for j, y in table.items():
                nxt[i + j] = nxt.get(i + j, 0) + x * y
        total = nxt
    return {i: checked(v, "cohomology dimension") for i, v in sorted(total.items()) if v}


def product_cohomology(dims: Sequence[int], degs: Sequence[int]) -> dict[int, int]:
    """Cohomology of a box product over factors of the given dimensions (0 allowed)."""
    return kunneth([projective_cohomology(n, a) for n, a in zip(dims, degs)])


def line_bundle_cohomology(X: MultiProjSpace, a: Sequence[int]) -> dict[int, int]:
    """``{i: h^i(X, O(a))}`` for the nonzero groups."""
    a = X.degree(a)
    return product_cohomology(X.factors, a)


def euler_characteristic(X: MultiProjSpace, a: Sequence[int]) -> int:
    """Product of the Hilbert polynomials ``C(a_i + n_i, n_i)`` as polynomials in ``a_i``."""
    a = X.degree(a)
    out = 1
    for n, ai in zip(X.factors, a):
        out *= signed_binom(ai + n, n)
    return out


def section_dimension(X: MultiProjSpace, a: Sequence[int]) -> int:
    a = X.degree(a)
    if any(x < 0 for x in a):
        return 0
    out = 1
    for n, ai in zip(X.factors, a):
        out *= binom(ai + n, n)
    return checked(out, "section dimension")


def hilbert_function(X: MultiProjSpace, B: Sequence[int], L: Sequence[int], m: int) -> int:
    """``dim H^0(X, B + m L)``, the degree-``m`` piece of the section module."""
    B, L = X.degree(B), X.degree(L)
    if any(x < 1 for x in L):
        raise ArgumentError(f"L = {L} must have all coordinates >= 1")
    return section_dimension(X, tuple(b + m * d for b, d in zip(B, L)))


def first_nonzero_degree(B: Sequence[int], L: Sequence[int]) -> int:
    """Least ``m`` with ``B + m L`` effective."""
    return max(-(b // d) for b, d in zip(B, L))


def _block_monomials(n: int, a: int) -> Iterator[tuple[int, ...]]:
    # exponents of x_0..x_n summing to a, largest x_0 power first
    if n == 0:
        yield (a,)
        return
    for e in range(a, -1, -1):
        for rest in _block_monomials(n - 1, a - e):
            yield (e,) + rest


def enumerate_monomials(X: MultiProjSpace, a: Sequence[int], cap: int | None = None) -> list[Monomial]:
    """Monomial basis of ``H^0(X, O(a))`` in canonical order.

    The order is lexicographic on the concatenated exponent vector with the
    largest exponent of the first variable first, e.g. ``x^2, xy, y^2``.
    """
    a = X.degree(a)
    if any(x < 0 for x in a):
        return []
    size = section_dimension(X, a)
    if cap is not None and size > cap:
        raise ResourceError(
            f"H^0(O{a}) on {X} has {size} monomials, cap is {cap}", required=size, where=f"O{a}"
        )
    blocks = [list(_block_monomials(n, ai)) for n, ai in zip(X.factors, a)]
    return [sum(parts, ()) for parts in itertools.product(*blocks)]
