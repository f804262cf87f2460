"""Tautological bundles on ``P^n`` via the degree-``n`` cover ``P^{n-1} x P^1 -> P^n``.

``E_{n,O(k)}`` is the pushforward of ``O boxtimes O(k)``.  Because the cover is
finite, ``E(m)`` has the cohomology of ``O(m) boxtimes O(m+k)`` upstairs, which
is all this module ever uses: the bundle itself is never constructed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ArgumentError
from .multiproj import MultiProjSpace, binom, product_cohomology, projective_cohomology

INF = math.inf


def _check_n(n: int) -> None:
    if n < 1:
        raise ArgumentError(f"n must be at least 1, got {n}")


def taut_cohomology(n: int, k: int, m: int, i: int) -> int:
    """``h^i(P^n, E_{n,O(k)}(m))``.  For ``n = 1`` this is ``h^i(P^1, O(m+k))``."""
    _check_n(n)
    base = projective_cohomology(n - 1, m)
    line = projective_cohomology(1, m + k)
    return base.get(i - 1, 0) * line.get(1, 0) + base.get(i, 0) * line.get(0, 0)


def euler_char(n: int, k: int, m: int) -> int:
    return sum((-1) ** i * taut_cohomology(n, k, m, i) for i in range(n + 1))


@dataclass(frozen=True)
class TautBundle:
    n: int
    k: int

    def __post_init__(self):
        _check_n(self.n)
        if self.rank() != self.n:
            raise AssertionError(f"E_{self.n},O({self.k}) has rank {self.rank()}, expected {self.n}")

    def h(self, i: int, m: int = 0) -> int:
        return taut_cohomology(self.n, self.k, m, i)

    def rank(self) -> int:
        """Leading coefficient of ``chi(E(m))`` times ``n!``: the ``n``-th finite difference."""
        n = self.n
        return sum((-1) ** (n - j) * math.comb(n, j) * euler_char(n, self.k, j) for j in range(n + 1))


def _support(n: int, i: int) -> tuple[float, float]:
    """Twists ``m`` with ``h^i(P^n, O(m)) != 0``, as a (possibly unbounded) interval."""
    if n == 0:
        return (-INF, INF) if i == 0 else (1, 0)
    if i == 0:
        return (0, INF)
    if i == n:
        return (-INF, -n - 1)
    return (1, 0)


def nonvanishing_windows(n: int, k: int, i: int) -> list[tuple[int, int]]:
    """Finite twist windows outside of which ``h^i(E_{n,O(k)}(m))`` vanishes, for ``0 < i < n``."""
    if not 0 < i < n:
        raise ArgumentError(f"windows are for intermediate degrees 0 < i < {n}")
    out = []
    # h^{i-1}(P^{n-1}, O(m)) h^1(P^1, O(m+k)) and h^i(P^{n-1}, O(m)) h^0(P^1, O(m+k))
    for a, b in ((i - 1, 1), (i, 0)):
        lo1, hi1 = _support(n - 1, a)
        lo2, hi2 = _support(1, b)
        lo, hi = max(lo1, lo2 - k), min(hi1, hi2 - k)
        if lo > hi:
            continue
        if math.isinf(lo) or math.isinf(hi):
            raise AssertionError(f"unbounded window for i={i}")
        out.append((int(lo), int(hi)))
    return out


@dataclass(frozen=True)
class SplitVerdict:
    n: int
    k: int
    splits: bool
    summands: dict[int, int] = field(default_factory=dict)  # twist -> multiplicity
    witness: tuple[int, int, int] | None = None             # (i, m, h^i(E(m)))
    windows: dict[int, list[tuple[int, int]]] = field(default_factory=dict)

    def __str__(self) -> str:
        if not self.splits:
            i, m, h = self.witness
            return f"does not split: h^{i}(E({m})) = {h}"
        parts = [f"O({t})^{mult}" if t else f"O^{mult}" for t, mult in sorted(self.summands.items(), reverse=True)]
        return "splits: " + " + ".join(parts)


def _split_summands(n: int, k: int) -> dict[int, int]:
    """Recover ``E = sum O(e)^{mult}`` from ``h^0(E(m))``, assuming ``E`` splits."""
    found: dict[int, int] = {}
    m = -(abs(k) + n + 2)
    while taut_cohomology(n, k, m, 0):
        m -= 1
    total = 0
    while total < n:
        expected = sum(mult * binom(m + e + n, n) for e, mult in found.items())
        extra = taut_cohomology(n, k, m, 0) - expected
        if extra < 0:
            raise AssertionError("h^0 is smaller than the summands already found")
        if extra:
            found[-m] = extra
            total += extra
        m += 1
    if total != n:
        raise AssertionError(f"recovered rank {total}, expected {n}")
    return found


def splitting_test(n: int, k: int) -> SplitVerdict:
    """Decide whether ``E_{n,O(k)}`` splits, by checking intermediate cohomology on finite windows."""
    if n < 2:
        raise ArgumentError(f"n must be at least 2, got {n}")
    windows = {i: nonvanishing_windows(n, k, i) for i in range(1, n)}
    for i, wins in windows.items():
        for lo, hi in wins:
            for m in range(lo, hi + 1):
                h = taut_cohomology(n, k, m, i)
                if h:
                    return SplitVerdict(n, k, False, witness=(i, m, h), windows=windows)
    return SplitVerdict(n, k, True, summands=_split_summands(n, k), windows=windows)


@dataclass(frozen=True)
class IdentityCheck:
    """Both sides of a numeric identity, with the parameters that produced them."""

    name: str
    params: dict
    lhs: int
    rhs: int

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs

    @property
    def verdict(self) -> str:
        return "confirmed" if self.holds else "refuted"

    @property
    def exit_code(self) -> int:
        return 0 if self.holds else 3

    def render(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.name}: {self.verdict} ({self.lhs} vs {self.rhs}; {params})"


def verify_lemma23_linebundle(Y: MultiProjSpace | None, aY, n: int, a: int, q: int) -> IdentityCheck:
    """``n h^q(Y x P^n, O(aY, a)) = h^q(Y x P^{n-1} x P^1, O(aY, a, a + n - 1))``.

    ``Y = None`` stands for a point.
    """
    _check_n(n)
    dims = Y.factors if Y is not None else ()
    aY = tuple(aY) if Y is not None else ()
    if len(aY) != len(dims):
        raise ArgumentError(f"aY = {aY} does not match Y with {len(dims)} factors")
    lhs = n * product_cohomology(dims + (n,), aY + (a,)).get(q, 0)
    rhs = product_cohomology(dims + (n - 1, 1), aY + (a, a + n - 1)).get(q, 0)
    return IdentityCheck("cover-pushforward", {"Y": dims or "point", "aY": aY, "n": n, "a": a, "q": q}, lhs, rhs)


def ses24_dimension_check(v: int, k: int) -> bool:
    """Dimension count of ``0 -> D^{k+1} U -> D^{k+1} V -> D^k V (x) W -> 0`` with ``dim W = 1``."""
    if v < 1 or k < 0:
        raise ArgumentError("need v >= 1 and k >= 0")
    return binom(v - 1 + k, k + 1) + binom(v + k - 1, k) == binom(v + k, k + 1)


def ses31_rank_check(n: int, d: int, h0Y: int, divided: bool = False) -> bool:
    """Rank additivity of the three-term sequence of kernel bundles on ``Y x P^{n-1} x P^1``.

    With ``divided=True`` also checks the divided-power dimension count for
    ``V = H^0(P^1, O(d))`` and ``D^n``.
    """
    if n < 1 or d < 1 or h0Y < 1:
        raise ArgumentError("need n >= 1, d >= 1 and h0Y >= 1")
    ok = h0Y * binom(d + n - 1, n) + (h0Y * binom(d + n - 1, n - 1) - 1) == h0Y * binom(d + n, n) - 1
    if divided:
        ok = ok and ses24_dimension_check(d + 1, n - 1)
    return ok
