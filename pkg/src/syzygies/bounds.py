"""Closed-form vanishing and nonvanishing ranges, and checks against computed tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, NamedTuple

from .errors import ArgumentError, PreconditionError, ResourceError
from .koszul import BettiTable, KoszulEngine, KoszulInstance
from .multiproj import MultiProjSpace, binom, line_bundle_cohomology, section_dimension

CONFIRMED = "confirmed"
REFUTED = "refuted"
PARTIAL = "partially-checked"
NOT_EVALUATED = "not-evaluated"

EXIT_CODES = {CONFIRMED: 0, REFUTED: 3, PARTIAL: 4}


class Interval(NamedTuple):
    """Closed integer interval ``[lo, hi]``; empty when ``lo > hi``."""

    lo: int
    hi: int

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    def __contains__(self, p) -> bool:  # type: ignore[override]
        return self.lo <= p <= self.hi

    def points(self) -> range:
        return range(self.lo, self.hi + 1)

    def clip(self, lo: int, hi: int) -> "Interval":
        return Interval(max(self.lo, lo), min(self.hi, hi))

    def __str__(self) -> str:
        return "[]" if self.empty else f"[{self.lo}, {self.hi}]"


# -- formulas ------------------------------------------------------------------


def theorem_main_bound(nvec: Iterable[int], b: int, d: int, q: int) -> int:
    """``floor((d^(q-1) + b d^(q-2)) / (n_1! ... n_k!))``: the largest ``p`` of the vanishing range."""
    nvec = tuple(nvec)
    if not nvec or any(n < 1 for n in nvec):
        raise ArgumentError(f"factor dimensions must be positive, got {nvec}")
    if d < 1:
        raise ArgumentError(f"d must be positive, got {d}")
    if d + b < 0:
        raise PreconditionError(f"the vanishing theorem needs d + b >= 0, got d + b = {d + b}")
    if not 2 <= q <= sum(nvec) + 1:
        raise PreconditionError(f"q must lie in [2, {sum(nvec) + 1}], got {q}")
    num = d ** (q - 1) + b * d ** (q - 2)
    return num // math.prod(math.factorial(n) for n in nvec)


def conjecture_EL_bound(n: int, b: int, d: int, q: int) -> int:
    """Predicted end of the vanishing range of ``K_{p,q}(P^n, O(b); O(d))``."""
    if n < 1 or b < 0 or not 0 <= q <= n:
        raise PreconditionError(f"need n >= 1, b >= 0, 0 <= q <= n; got n={n}, b={b}, q={q}")
    if d < b + q + 1:
        raise PreconditionError(f"need d >= b + q + 1 = {b + q + 1}, got d = {d}")
    return binom(d + q, q) - binom(d - b - 1, q) - q - 1


def eel_nonvanishing_range(n: int, b: int, d: int, q: int) -> Interval:
    """Proven nonvanishing range of ``K_{p,q}(P^n, O(b); O(d))``."""
    if n < 1 or b < 0 or not 1 <= q <= n:
        raise PreconditionError(f"need n >= 1, b >= 0, 1 <= q <= n; got n={n}, b={b}, q={q}")
    if d < b + 1:
        # C(d - b - 1, q) would need a negative top argument
        raise PreconditionError(f"need d >= b + 1 = {b + 1}, got d = {d}")
    lo = binom(d + q, q) - binom(d - b - 1, q) - q
    hi = binom(d + n, n) + binom(d + n - q, n - q) - binom(n + b, q + b) - q - 1
    return Interval(lo, hi)


def veronese_r(n: int, d: int) -> int:
    return binom(d + n, n) - 1


def op_range(d: int) -> Interval:
    """Nonvanishing range of ``K_{p,2}(P^2, O(d))``: ``[3d-2, r_d-2]``."""
    if d < 1:
        raise PreconditionError(f"need d >= 1, got {d}")
    return Interval(3 * d - 2, veronese_r(2, d) - 2)


def duality_pair(n: int, b: int, d: int, p: int, q: int) -> tuple[int, int, int]:
    """Indices ``(p', q', b')`` of the dual group of ``K_{p,q}(P^n, O(b); O(d))``."""
    if n < 1 or d < 1:
        raise ArgumentError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    coh = line_bundle_cohomology(MultiProjSpace(n), (b,))
    if any(1 <= i <= n - 1 for i in coh):
        raise PreconditionError(f"O({b}) has intermediate cohomology on P^{n}")
    return (veronese_r(n, d) - n - p, n + 1 - q, -b - n - 1)


def kpq_cover_formula_check(n: int, d: int, p: int, q: int, engine=None) -> str:
    """Placeholder for the cover-based expression of ``k_{p,q}(P^n, O(d))``.

    That expression is ``(1/n) h^q(P^{n-1} x P^1, wedge^{p+q} sigma^* M (x) (O boxtimes O(n-1)))``
    for the kernel bundle ``M`` of ``O(d)``.  Evaluating it needs cohomology of a
    non-split bundle, which this package does not compute; always returns
    ``"not-evaluated"``.
    """
    return NOT_EVALUATED


# -- claims and reports --------------------------------------------------------


@dataclass(frozen=True)
class VanishingClaim:
    kind: str
    params: Mapping[str, object]
    q: int
    zero: tuple[Interval, ...] = ()
    nonzero: tuple[Interval, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "zero", tuple(i for i in self.zero if not i.empty))
        object.__setattr__(self, "nonzero", tuple(i for i in self.nonzero if not i.empty))
        for z in self.zero:
            for nz in self.nonzero:
                if max(z.lo, nz.lo) <= min(z.hi, nz.hi):
                    raise ArgumentError(f"zero range {z} overlaps nonzero range {nz}")

    def describe(self) -> str:
        parts = []
        if self.zero:
            parts.append("k_{p,%d} = 0 for p in %s" % (self.q, " u ".join(map(str, self.zero))))
        if self.nonzero:
            parts.append("k_{p,%d} != 0 for p in %s" % (self.q, " u ".join(map(str, self.nonzero))))
        return "; ".join(parts) or "no prediction"


@dataclass
class VerificationReport:
    claim: VanishingClaim
    verdict: str
    entries: dict[tuple[int, int], int] = field(default_factory=dict)
    witnesses: list[tuple[int, int, int]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.verdict not in EXIT_CODES:
            raise ArgumentError(f"unknown verdict {self.verdict!r}")
        if self.verdict == REFUTED and not self.witnesses:
            raise ArgumentError("a refutation needs a witness entry")

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    @property
    def confirmed(self) -> bool:
        return self.verdict == CONFIRMED

    def render(self) -> str:
        lines = [f"{self.claim.kind}: {self.verdict}", f"  claim: {self.claim.describe()}"]
        for k, v in self.claim.params.items():
            lines.append(f"  {k} = {v}")
        for (p, q), k in sorted(self.entries.items(), key=lambda t: (t[0][1], t[0][0])):
            lines.append(f"  k[{p},{q}] = {k}")
        for p, q, k in self.witnesses:
            lines.append(f"  witness: k[{p},{q}] = {k}")
        lines += [f"  note: {n}" for n in self.notes]
        return "\n".join(lines)


Compute = Callable[[KoszulInstance, int, int], int]


class _Engines:
    def __init__(self, workers: int):
        self.workers = workers
        self._by_inst: dict[KoszulInstance, KoszulEngine] = {}

    def __call__(self, inst: KoszulInstance, p: int, q: int) -> int:
        if inst not in self._by_inst:
            self._by_inst[inst] = KoszulEngine(inst, workers=self.workers)
        return self._by_inst[inst].dimension(p, q).dim


def check_claim(claim: VanishingClaim, inst: KoszulInstance, compute: Compute | None = None,
                workers: int = 1, notes: Iterable[str] = ()) -> VerificationReport:
    """Compute every entry the claim speaks about and compare."""
    compute = compute or _Engines(workers)
    entries, witnesses, notes = {}, [], list(notes)
    partial = False
    q = claim.q
    for expect_zero, ranges in ((True, claim.zero), (False, claim.nonzero)):
        for iv in ranges:
            for p in iv.points():
                if p < 0:
                    continue
                try:
                    k = compute(inst, p, q)
                except ResourceError as exc:
                    partial = True
                    notes.append(f"k[{p},{q}] not computed: {exc}")
                    continue
                entries[(p, q)] = k
                if (k == 0) != expect_zero:
                    witnesses.append((p, q, k))
    if witnesses:
        notes.append("a refutation points to an engine defect or an unlucky prime")
        verdict = REFUTED
    else:
        verdict = PARTIAL if partial else CONFIRMED
    return VerificationReport(claim, verdict, entries, witnesses, notes)


def _pn(n: int, b: int, d: int, prime: int) -> KoszulInstance:
    return KoszulInstance.create([n], [b], [d], prime)


def verify_theorem_main(inst: KoszulInstance, q: int, compute: Compute | None = None,
                        workers: int = 1) -> VerificationReport:
    bound = theorem_main_bound(inst.X.factors, inst.b, inst.d, q)
    claim = VanishingClaim("theorem-main", {"spaces": inst.X.factors, "B": inst.B, "L": inst.L,
                                            "b": inst.b, "d": inst.d, "bound": bound}, q,
                           zero=(Interval(0, bound),))
    return check_claim(claim, inst, compute, workers)


def verify_conjecture_EL(n: int, b: int, d: int, q: int, prime: int = 32003,
                         compute: Compute | None = None, workers: int = 1) -> VerificationReport:
    bound = conjecture_EL_bound(n, b, d, q)
    claim = VanishingClaim("conjecture-EL", {"n": n, "b": b, "d": d, "bound": bound}, q,
                           zero=(Interval(0, bound),))
    return check_claim(claim, _pn(n, b, d, prime), compute, workers)


def verify_eel_range(n: int, b: int, d: int, q: int, prime: int = 32003,
                     compute: Compute | None = None, workers: int = 1) -> VerificationReport:
    iv = eel_nonvanishing_range(n, b, d, q)
    claim = VanishingClaim("EEL-range", {"n": n, "b": b, "d": d, "range": str(iv)}, q, nonzero=(iv,))
    if q == 1:
        # the formula can run past the projective dimension for q = 1
        return VerificationReport(claim, PARTIAL, notes=["q = 1 is excluded from verification by design"])
    return check_claim(claim, _pn(n, b, d, prime), compute, workers)


def verify_op_range(d: int, prime: int = 32003, compute: Compute | None = None,
                    workers: int = 1) -> VerificationReport:
    iv = op_range(d)
    claim = VanishingClaim("OP-range", {"d": d, "r_d": veronese_r(2, d)}, 2,
                           zero=(Interval(0, iv.lo - 1),), nonzero=(iv,))
    return check_claim(claim, _pn(2, 0, d, prime), compute, workers)


def verify_duality(inst: KoszulInstance, p: int, q: int, compute: Compute | None = None,
                   workers: int = 1) -> VerificationReport:
    if inst.X.k != 1:
        raise ArgumentError("duality is checked on a single projective space")
    n, b, d = inst.n, inst.B[0], inst.L[0]
    p2, q2, b2 = duality_pair(n, b, d, p, q)
    compute = compute or _Engines(workers)
    dual = _pn(n, b2, d, inst.prime)
    params = {"n": n, "b": b, "d": d, "p": p, "q": q, "dual": (p2, q2, b2)}
    try:
        k1 = compute(inst, p, q)
        k2 = compute(dual, p2, q2) if p2 >= 0 else 0
    except ResourceError as exc:
        claim = VanishingClaim("duality", params, q)
        return VerificationReport(claim, PARTIAL, notes=[str(exc)])
    iv = (Interval(p, p),)
    claim = VanishingClaim("duality", params, q, zero=iv if k2 == 0 else (), nonzero=iv if k2 else ())
    entries = {(p, q): k1}
    notes = [f"dual side k[{p2},{q2}](P^{n}, O({b2}); O({d})) = {k2}"]
    if k1 != k2:
        return VerificationReport(claim, REFUTED, entries, [(p, q, k1)], notes)
    return VerificationReport(claim, CONFIRMED, entries, [], notes)


def regularity_row_check(inst: KoszulInstance, pmax: int, compute: Compute | None = None,
                         workers: int = 1) -> VerificationReport:
    """Rows ``q = n+2`` and ``n+3`` vanish through ``pmax``."""
    compute = compute or _Engines(workers)
    reports = []
    hyp = inst.regularity_hypothesis()
    for q in (inst.n + 2, inst.n + 3):
        claim = VanishingClaim("regularity", {"spaces": inst.X.factors, "B": inst.B, "L": inst.L}, q,
                               zero=(Interval(0, pmax),))
        reports.append(check_claim(claim, inst, compute))
    out = reports[0]
    out.entries.update(reports[1].entries)
    out.witnesses += reports[1].witnesses
    out.notes += reports[1].notes
    if out.witnesses and not hyp:
        out.verdict = PARTIAL
        out.notes.append("H^i(B + mL) = 0 fails for some i, m > 0, so the rows are not predicted to vanish")
    elif any(r.verdict == PARTIAL for r in reports) and not out.witnesses:
        out.verdict = PARTIAL
    elif out.witnesses:
        out.verdict = REFUTED
    return out


def row_support_claim(inst: KoszulInstance, q: int, pmax: int) -> VanishingClaim:
    """Predicted support of row ``q = 0`` (``B`` effective) or ``q = n + 1``."""
    X = inst.X
    r = inst.r
    params = {"spaces": X.factors, "B": inst.B, "L": inst.L, "r": r}
    if q == 0:
        if any(b < 0 for b in inst.B):
            raise PreconditionError(f"row 0 support needs B effective, got {inst.B}")
        support = Interval(0, section_dimension(X, inst.B) - 1)
    elif q == X.dim + 1:
        KB = tuple(k - b for k, b in zip(X.canonical(), inst.B))
        h = section_dimension(X, KB)
        support = Interval(r - X.dim - h + 1, r - X.dim)
        params["h0(K-B)"] = h
    else:
        raise ArgumentError(f"row supports are predicted for q = 0 and q = {X.dim + 1}, not {q}")
    support = support.clip(0, pmax)
    zero = (Interval(0, min(pmax, support.lo - 1)), Interval(support.hi + 1, pmax)) if not support.empty \
        else (Interval(0, pmax),)
    return VanishingClaim("row-support", params, q, zero=zero, nonzero=(support,))


def row_support_check(inst: KoszulInstance, q: int, pmax: int, compute: Compute | None = None,
                      workers: int = 1) -> VerificationReport:
    return check_claim(row_support_claim(inst, q, pmax), inst, compute, workers)


# -- property N_k --------------------------------------------------------------


@dataclass(frozen=True)
class NkVerdict:
    """Outcome of reading property ``N_k`` off a finite table.

    ``status`` is ``"not-N0"``, ``"N_k"`` (holds for ``k`` and fails for ``k+1``),
    ``"all-computed"`` (holds for every computed ``p``) or ``"partially-checked"``
    (holds through ``k`` but the next column is incomplete).
    """

    status: str
    k: int | None
    witness: tuple[int, int, int] | None = None

    def holds(self, k: int) -> bool | None:
        if self.status == "not-N0":
            return False
        if self.k is not None and k <= self.k:
            return True
        if self.status == "N_k":
            return False
        return None

    def __str__(self) -> str:
        if self.status == "not-N0":
            return "not N_0"
        if self.status == "N_k":
            return f"N_{self.k} and not N_{self.k + 1}"
        suffix = "" if self.k is None else f" N_{self.k}"
        return f"{self.status}:{suffix}" if self.k is not None else self.status


def property_Nk(table: BettiTable) -> NkVerdict:
    if any(b != 0 for b in table.B):
        raise ArgumentError("property N_k is read from tables with B = O")
    n = sum(table.spaces)
    k01 = table.get(0, 1)
    if k01 is None:
        return NkVerdict(PARTIAL, None)
    if k01:
        return NkVerdict("not-N0", None, (0, 1, k01))
    pmax = max(p for p, _ in table.entries)
    for p in range(pmax + 1):
        col = [(q, table.get(p, q)) for q in range(2, n + 2)]
        for q, k in col:
            if k:
                return NkVerdict("not-N0", None, (p, q, k)) if p == 0 else NkVerdict("N_k", p - 1, (p, q, k))
        if any(k is None for _, k in col):
            return NkVerdict(PARTIAL, p - 1 if p else None)
    return NkVerdict("all-computed", pmax)


# -- row statistics ------------------------------------------------------------


@dataclass(frozen=True)
class RowStats:
    q: int | None
    d: int | None
    masses: dict[int, float]
    mean: float
    variance: float
    sup_deviation: float


def row_distribution_stats(row: Mapping[int, int], d: int | None = None, q: int | None = None) -> RowStats:
    """Normalised masses of one Betti row and their distance from a moment-matched Gaussian.

    The Gaussian is discretised on unit cells around each ``p``.  Purely
    descriptive: no convergence is claimed.
    """
    if not row:
        raise ArgumentError("empty row")
    total = sum(row.values())
    if total <= 0:
        raise ArgumentError("row has no mass")
    ps = sorted(row)
    masses = {p: row[p] / total for p in ps}
    mean = sum(p * m for p, m in masses.items())
    var = sum((p - mean) ** 2 * m for p, m in masses.items())
    sd = math.sqrt(var)

    def cell(p):
        if sd == 0:
            return 1.0 if abs(p - mean) < 0.5 else 0.0
        z = lambda x: 0.5 * (1 + math.erf((x - mean) / (sd * math.sqrt(2))))
        return z(p + 0.5) - z(p - 0.5)

    sup = max(abs(masses[p] - cell(p)) for p in ps)
    return RowStats(q, d, masses, mean, var, sup)
