"""Command line: ``syzygies betti | verify | taut | stats | cache``.

Exit codes: 0 success or confirmed, 1 argument error, 2 resource cap hit,
3 claim refuted, 4 claim only partially checked.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

from . import __version__
from .bounds import (
    property_Nk,
    regularity_row_check,
    row_distribution_stats,
    row_support_check,
    verify_conjecture_EL,
    verify_duality,
    verify_eel_range,
    verify_op_range,
    verify_theorem_main,
)
from .cache import ResultCache
from .errors import ArgumentError, ResourceError, SyzygyError
from .koszul import BASIS_CAP, BettiTable, KoszulEngine, KoszulInstance, betti_table, default_qrange, default_workers
from .multilinear import is_prime
from .multiproj import MultiProjSpace
from .taut import splitting_test, ses31_rank_check, taut_cohomology, verify_lemma23_linebundle

EXIT_OK, EXIT_ARGS, EXIT_RESOURCE, EXIT_REFUTED, EXIT_PARTIAL = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ARGS, f"{self.prog}: error: {message}\n")


def int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


@dataclass
class JobSpec:
    command: str
    spaces: list[int] = field(default_factory=list)
    b: list[int] = field(default_factory=list)
    l: list[int] = field(default_factory=list)
    prime: int = 32003
    pmax: int | None = None
    qs: list[int] | None = None
    threads: int = 1
    basis_cap: int = BASIS_CAP
    fmt: str = "table"
    cache_dir: str | None = None
    use_cache: bool = True

    def validate(self) -> None:
        if not (len(self.spaces) == len(self.b) == len(self.l)):
            raise ArgumentError(f"--spaces, --b and --l need equal lengths, got "
                                f"{len(self.spaces)}, {len(self.b)}, {len(self.l)}")
        if not self.spaces:
            raise ArgumentError("--spaces is required")
        if not is_prime(self.prime) or self.prime >= 2**31:
            raise ArgumentError(f"--prime {self.prime} is not a prime below 2^31")
        if self.pmax is not None and self.pmax < 0:
            raise ArgumentError("--pmax must be nonnegative")
        if self.threads < 1:
            raise ArgumentError("--threads must be positive")

    def instance(self) -> KoszulInstance:
        self.validate()
        return KoszulInstance.create(self.spaces, self.b, self.l, self.prime, basis_cap=self.basis_cap)


class CachedCompute:
    """``k_{p,q}`` through the cache, one engine per instance."""

    def __init__(self, cache: ResultCache | None, workers: int):
        self.cache = cache
        self.workers = workers
        self._engines: dict[KoszulInstance, KoszulEngine] = {}

    def __call__(self, inst: KoszulInstance, p: int, q: int) -> int:
        args = (inst.X.factors, inst.B, inst.L, inst.prime, p, q)
        if self.cache:
            hit = self.cache.get(*args)
            if hit is not None:
                return hit
        if inst not in self._engines:
            self._engines[inst] = KoszulEngine(inst, workers=self.workers)
        res = self._engines[inst].dimension(p, q)
        if self.cache:
            self.cache.put(*args, res.dim, res.seconds)
        return res.dim


# -- rendering -----------------------------------------------------------------


def table_json(table: BettiTable) -> str:
    entries = [{"p": p, "q": q, "dim": k} for (p, q), k in sorted(table.entries.items())]
    meta = dict(table.meta)
    meta["failed"] = [{"p": p, "q": q, "error": e} for (p, q), e in sorted(table.errors.items())]
    doc = {"spaces": list(table.spaces), "b": list(table.B), "l": list(table.L), "prime": table.prime,
           "entries": entries, "meta": meta}
    return json.dumps(doc, sort_keys=True, indent=2)


def table_csv(table: BettiTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "q", "dim"])
    for (p, q), k in sorted(table.entries.items()):
        w.writerow([p, q, k])
    return buf.getvalue()


def table_text(table: BettiTable) -> str:
    """Rows are ``q``, columns ``p``; ``.`` is zero and ``?`` is not computed."""
    ps, qs = table.ps, table.qs
    cells = {pq: str(k) if k else "." for pq, k in table.entries.items()}
    for pq in table.errors:
        cells[pq] = "?"
    width = max([len(c) for c in cells.values()] + [len(str(p)) for p in ps] + [1])
    label = max(len(f"q={q}") for q in qs) if qs else 3
    lines = [" " * (label + 1) + " ".join(str(p).rjust(width) for p in ps)]
    for q in qs:
        row = " ".join(cells.get((p, q), "?").rjust(width) for p in ps)
        lines.append(f"q={q}".rjust(label) + " " + row)
    deg = lambda a: "O(" + ", ".join(map(str, a)) + ")"
    head = (f"{MultiProjSpace(table.spaces)}, B = {deg(table.B)}, L = {deg(table.L)}, "
            f"GF({table.prime})")
    return head + "\n" + "\n".join(lines) + "\n"


def render_table(table: BettiTable, fmt: str) -> str:
    return {"json": table_json, "csv": table_csv, "table": table_text}[fmt](table)


# -- commands ------------------------------------------------------------------


def _job(args, command: str) -> JobSpec:
    job = JobSpec(command=command, spaces=args.spaces or [], b=args.b or [], l=args.l or [],
                  prime=args.prime, pmax=getattr(args, "pmax", None), qs=getattr(args, "q", None),
                  threads=args.threads or default_workers(), basis_cap=args.basis_cap, fmt=args.format,
                  cache_dir=args.cache_dir, use_cache=not args.no_cache)
    job.validate()
    return job


def _cache(job: JobSpec) -> ResultCache | None:
    return ResultCache(job.cache_dir) if job.use_cache else None


def cmd_betti(args) -> int:
    job = _job(args, "betti")
    inst = job.instance()
    pmax = job.pmax if job.pmax is not None else inst.r
    cache = _cache(job)
    lookup = (lambda p, q: cache.get(inst.X.factors, inst.B, inst.L, inst.prime, p, q)) if cache else None
    store = (lambda res: cache.put(inst.X.factors, inst.B, inst.L, inst.prime, res.p, res.q,
                                   res.dim, res.seconds)) if cache else None
    table = betti_table(inst, pmax, job.qs if job.qs else default_qrange(inst), workers=job.threads,
                        reduce=not args.literal, on_entry=store, lookup=lookup)
    if cache:
        cache.save_session()
    sys.stdout.write(render_table(table, job.fmt))
    if table.errors:
        for (p, q), err in sorted(table.errors.items()):
            print(f"resource cap: {err}", file=sys.stderr)
        return EXIT_RESOURCE
    return EXIT_OK


def _report_out(report, fmt: str) -> int:
    if fmt == "json":
        doc = {"kind": report.claim.kind, "verdict": report.verdict, "claim": report.claim.describe(),
               "params": {k: (list(v) if isinstance(v, tuple) else v) for k, v in report.claim.params.items()},
               "entries": [{"p": p, "q": q, "dim": k} for (p, q), k in sorted(report.entries.items())],
               "witnesses": [{"p": p, "q": q, "dim": k} for p, q, k in report.witnesses],
               "notes": report.notes}
        print(json.dumps(doc, sort_keys=True, indent=2, default=str))
    else:
        print(report.render())
    return report.exit_code


def cmd_verify(args) -> int:
    claim = args.claim
    job = JobSpec("verify", spaces=args.spaces or [], b=args.b or [], l=args.l or [], prime=args.prime,
                  threads=args.threads or default_workers(), basis_cap=args.basis_cap, fmt=args.format,
                  cache_dir=args.cache_dir, use_cache=not args.no_cache)
    compute = CachedCompute(_cache(job), job.threads)

    def need(*names):
        missing = [n for n in names if getattr(args, n) is None]
        if missing:
            raise ArgumentError(f"verify {claim} needs " + ", ".join("--" + m for m in missing))

    def single():
        # a single P^n given either by --n/--b/--d or by --spaces/--b/--l
        if args.spaces:
            job.validate()
            return job.instance()
        need("n", "d")
        b = args.b[0] if args.b else 0
        return KoszulInstance.create([args.n], [b], [args.d], args.prime)

    if claim == "thm-main":
        need("q")
        report = verify_theorem_main(single(), args.q, compute)
    elif claim == "conj-el":
        need("n", "d", "q")
        report = verify_conjecture_EL(args.n, (args.b or [0])[0], args.d, args.q, args.prime, compute)
    elif claim == "eel-range":
        need("n", "d", "q")
        report = verify_eel_range(args.n, (args.b or [0])[0], args.d, args.q, args.prime, compute)
    elif claim == "op-range":
        need("d")
        report = verify_op_range(args.d, args.prime, compute)
    elif claim == "duality":
        need("p", "q")
        report = verify_duality(single(), args.p, args.q, compute)
    elif claim == "regularity":
        need("pmax")
        report = regularity_row_check(single(), args.pmax, compute)
    elif claim == "row-support":
        need("q", "pmax")
        report = row_support_check(single(), args.q, args.pmax, compute)
    elif claim == "nk":
        need("pmax")
        inst = single()
        table = betti_table(inst, args.pmax, range(1, inst.n + 2), workers=job.threads)
        verdict = property_Nk(table)
        print(f"property N_k: {verdict}")
        if table.errors:
            return EXIT_RESOURCE
        return EXIT_OK if verdict.status in ("N_k", "all-computed", "not-N0") else EXIT_PARTIAL
    else:  # pragma: no cover - argparse restricts choices
        raise ArgumentError(f"unknown claim {claim}")
    if compute.cache:
        compute.cache.save_session()
    return _report_out(report, job.fmt)


def cmd_taut(args) -> int:
    what = args.what
    if what == "cohomology":
        for name in ("n", "k", "m", "i"):
            if getattr(args, name) is None:
                raise ArgumentError(f"taut cohomology needs --{name}")
        print(taut_cohomology(args.n, args.k, args.m, args.i))
        return EXIT_OK
    if what == "split":
        if args.n is None or args.k is None:
            raise ArgumentError("taut split needs --n and --k")
        print(splitting_test(args.n, args.k))
        return EXIT_OK
    if what == "cover":
        if args.n is None or args.a is None or args.q is None:
            raise ArgumentError("taut cover needs --n, --a and --q")
        Y = MultiProjSpace(args.y_spaces) if args.y_spaces else None
        check = verify_lemma23_linebundle(Y, tuple(args.ay or ()), args.n, args.a, args.q)
        print(check.render())
        return check.exit_code
    if what == "ses":
        if args.n is None or args.d is None:
            raise ArgumentError("taut ses needs --n and --d")
        ok = ses31_rank_check(args.n, args.d, args.h0y, divided=args.divided)
        print("rank additivity holds" if ok else "rank additivity FAILS")
        return EXIT_OK if ok else EXIT_REFUTED
    raise ArgumentError(f"unknown taut query {what}")


def cmd_stats(args) -> int:
    job = _job(args, "stats")
    if not job.qs or len(job.qs) != 1:
        raise ArgumentError("stats needs exactly one row, e.g. --q 1")
    q = job.qs[0]
    inst = job.instance()
    pmax = job.pmax if job.pmax is not None else inst.r
    compute = CachedCompute(_cache(job), job.threads)
    row = {p: compute(inst, p, q) for p in range(pmax + 1)}
    if compute.cache:
        compute.cache.save_session()
    st = row_distribution_stats(row, d=min(inst.L), q=q)
    if job.fmt == "json":
        print(json.dumps({"q": q, "row": {str(p): k for p, k in row.items()}, "mean": st.mean,
                          "variance": st.variance, "sup_deviation": st.sup_deviation}, sort_keys=True, indent=2))
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["p", "k", "mass"])
        for p, k in row.items():
            w.writerow([p, k, f"{st.masses[p]:.10g}"])
        if job.fmt == "table":
            print(f"# mean {st.mean:.6g}, variance {st.variance:.6g}, "
                  f"sup deviation from Gaussian {st.sup_deviation:.6g}")
    return EXIT_OK


def cmd_cache(args) -> int:
    cache = ResultCache(args.cache_dir, enabled=True)
    if args.action == "list":
        for e in cache.entries():
            print(f"{e['key'][:16]}  spaces={e.get('spaces')} b={e.get('b')} l={e.get('l')} "
                  f"prime={e.get('prime')} p={e.get('p')} q={e.get('q')} dim={e.get('dim')}")
    elif args.action == "clear":
        n = cache.clear()
        print(f"removed {n} entries")
    else:
        last = cache.last_session()
        print(f"directory: {cache.dir}")
        print(f"entries: {len(cache.entries())}")
        print(f"last session: {last.get('hits', 0)} hits, {last.get('misses', 0)} misses")
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="syzygies", description="Koszul cohomology of line bundles on products of projective spaces.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, instance=True):
        if instance:
            p.add_argument("--spaces", type=int_list, help="factor dimensions, e.g. 1,1")
            p.add_argument("--b", type=int_list, help="multidegree of B")
            p.add_argument("--l", type=int_list, help="multidegree of L")
        p.add_argument("--prime", type=int, default=32003)
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
        p.add_argument("--basis-cap", type=int, default=BASIS_CAP)
        p.add_argument("--format", choices=("table", "csv", "json"), default="table")
        p.add_argument("--cache-dir", default=None, help="overrides KOSZUL_CACHE_DIR")
        p.add_argument("--no-cache", action="store_true")

    p = sub.add_parser("betti", help="compute a Betti table")
    common(p)
    p.add_argument("--pmax", type=int, default=None)
    p.add_argument("--q", type=int_list, default=None, help="rows to compute")
    p.add_argument("--literal", action="store_true", help="skip the regular-sequence reduction")
    p.set_defaults(func=cmd_betti)

    p = sub.add_parser("verify", help="check a vanishing or nonvanishing claim")
    p.add_argument("claim", choices=("thm-main", "conj-el", "eel-range", "op-range", "duality",
                                     "regularity", "row-support", "nk"))
    common(p)
    for name in ("n", "d", "p", "q", "pmax"):
        p.add_argument(f"--{name}", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("taut", help="tautological bundle cohomology")
    p.add_argument("what", choices=("cohomology", "split", "cover", "ses"))
    for name in ("n", "k", "m", "i", "a", "q", "d"):
        p.add_argument(f"--{name}", type=int, default=None)
    p.add_argument("--h0y", type=int, default=1)
    p.add_argument("--divided", action="store_true")
    p.add_argument("--y-spaces", type=int_list, default=None)
    p.add_argument("--ay", type=int_list, default=None)
    p.set_defaults(func=cmd_taut)

    p = sub.add_parser("stats", help="shape of one Betti row")
    common(p)
    p.add_argument("--pmax", type=int, default=None)
    p.add_argument("--q", type=int_list, default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("cache", help="inspect the result cache")
    p.add_argument("action", choices=("list", "clear", "stat"))
    p.add_argument("--cache-dir", default=None)
    p.set_defaults(func=cmd_cache)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ArgumentError as exc:
        parser.print_usage(sys.stderr)
        print(f"syzygies: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except ResourceError as exc:
        print(f"syzygies: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except SyzygyError as exc:
        print(f"syzygies: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
