from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from syzygies.errors import ArgumentError, InvariantViolation, ResourceError
from syzygies.exactla import SparseMatrix, rank
from syzygies.koszul import (
    KoszulEngine,
    KoszulInstance,
    TaskFailure,
    assemble_differential,
    betti_table,
    hilbert_betti_check,
    koszul_dimension,
    koszul_dimension_multiprime,
    parallel_schedule,
    strand_decompose,
    whole_matrix_dimension,
)
from syzygies.multilinear import wedge_unrank


def inst(spaces, B, L, **kw):
    return KoszulInstance.create(spaces, B, L, **kw)


CUBIC = inst([1], [0], [3])
P2_3 = inst([2], [0], [3])

# small instances where the literal complex is cheap
DESK = [
    ([1], [0], [2]), ([1], [0], [3]), ([1], [-1], [2]), ([1], [1], [3]), ([1], [-2], [3]),
    ([2], [0], [2]), ([2], [-1], [2]), ([1, 1], [0, 0], [1, 1]), ([1, 1], [0, 1], [1, 2]),
]


def test_instance_validation():
    with pytest.raises(ArgumentError):
        inst([1], [0], [0])
    with pytest.raises(ArgumentError):
        inst([1, 1], [0], [1, 1])
    with pytest.raises(ArgumentError):
        KoszulInstance.create([1], [0], [2], regular=[(2, 1)])
    with pytest.raises(ArgumentError):
        KoszulInstance.create([1], [0], [2], regular=[(2, 0), (1, 1)])


def test_section_bases_match_hilbert():
    I = inst([1, 2], [-1, 1], [2, 1])
    for m in range(-1, 4):
        assert len(I.R(m)) == I.hilbert(m)
    assert I.N == I.r + 1 == 9


def test_reduced_instance():
    R = P2_3.reduced()
    assert R.regular == ((3, 0, 0), (0, 3, 0), (0, 0, 3))
    assert R.N == 7
    # quotient of R by x^3, y^3, z^3 in degree 3 is the 7 monomials with all exponents < 3
    assert len(R.R(1)) == 7
    assert R.reduced() is R and R.literal() == P2_3


def test_differential_examples():
    M = assemble_differential(inst([1], [0], [2]), 1, 0)
    assert M.shape == (3, 3) and rank(M) == 3
    assert np.array_equal(np.abs(M.to_dense()), np.eye(3, dtype=np.int64))
    M = assemble_differential(CUBIC, 1, 1)
    assert M.shape == (7, 16) and rank(M) == 7
    M = assemble_differential(CUBIC, 2, 0)
    assert M.shape == (16, 6) and rank(M) == 6


def test_differential_matches_oracle_layout():
    # same basis order as the brute-force builder: colex wedges times lex monomials
    for spaces, B, L in DESK[:6]:
        I = inst(spaces, B, L)
        for p in range(1, 3):
            for q in range(0, 2):
                A = assemble_differential(I, p, q).to_dense() % I.prime
                O, _ = oracle.differential(spaces, B, L, p, q)
                assert A.shape == O.shape
                assert oracle.gf_rank(A, I.prime) == oracle.gf_rank(O, I.prime)


def test_empty_codomain_and_p0():
    M = assemble_differential(CUBIC, 0, 1)
    assert M.shape == (0, 4)
    M = assemble_differential(inst([1], [-3], [1]), 1, 1)
    assert M.shape[1] == 0
    with pytest.raises(ArgumentError):
        assemble_differential(CUBIC, -1, 0)


def test_differential_entries_and_column_counts():
    for spaces, B, L in DESK:
        I = inst(spaces, B, L)
        for p in range(1, 4):
            for q in range(-1, 3):
                M = assemble_differential(I, p, q)
                assert set(np.unique(M.vals)) <= {1, I.prime - 1}
                if M.nrows:
                    counts = np.bincount(M.cols, minlength=M.ncols)
                    assert np.all(counts == p)


def test_composition_is_zero():
    for spaces, B, L in DESK:
        for red in (False, True):
            I = inst(spaces, B, L)
            I = I.reduced() if red else I
            for p in range(1, I.N + 1):
                for q in range(-1, 3):
                    a, b = assemble_differential(I, p, q), assemble_differential(I, p + 1, q - 1)
                    if a.ncols and b.ncols and a.nrows:
                        assert (a @ b).nnz == 0


def test_basis_cap():
    I = inst([2], [0], [3], basis_cap=100)
    with pytest.raises(ResourceError, match="basis elements"):
        assemble_differential(I, 2, 1)
    with pytest.raises(ResourceError, match=r"entry \(2,1\)"):
        KoszulEngine(I, reduce=False).dimension(2, 1)


def _fine_degree(I, p, m, index):
    w, f = divmod(int(index), len(I.R(m)))
    S = wedge_unrank(w, p, I.N) if p else ()
    return tuple(int(x) for x in I.V[list(S)].sum(axis=0) + I.R(m)[f]) if p else tuple(int(x) for x in I.R(m)[f])


def test_strand_example():
    strands = strand_decompose(CUBIC, 1, 1)
    by_key = {s.key: s for s in strands}
    # e_a (x) f with a + f = (3, 3): four choices of a among x^3, x^2y, xy^2, y^3
    assert len(by_key[(3, 3)].middle) == 4
    assert sum(s.dims[1] for s in strands) == 16
    assert len(strands) <= 16


def test_strand_partition_and_blocks():
    for I, p, q in [(P2_3, 2, 1), (CUBIC, 1, 1), (inst([1, 1], [0, 1], [1, 2]), 2, 1), (P2_3.reduced(), 3, 1)]:
        strands = strand_decompose(I, p, q)
        dims = [I.term_dim(p + 1, q - 1), I.term_dim(p, q), I.term_dim(p - 1, q + 1)]
        for t, name in enumerate(("incoming", "middle", "outgoing")):
            allidx = np.concatenate([getattr(s, name) for s in strands])
            assert len(allidx) == dims[t] and len(np.unique(allidx)) == dims[t]
        r_in = sum(rank(s.d_in) for s in strands)
        r_out = sum(rank(s.d_out) for s in strands)
        assert r_in == rank(assemble_differential(I, p + 1, q - 1)) if dims[0] else r_in == 0
        assert r_out == rank(assemble_differential(I, p, q)) if dims[2] else r_out == 0
        for s in strands:
            for idx in s.middle[:3]:
                assert _fine_degree(I, p, q, idx) == s.key
            for idx in s.outgoing[:3]:
                assert _fine_degree(I, p - 1, q + 1, idx) == s.key
            for idx in s.incoming[:3]:
                assert _fine_degree(I, p + 1, q - 1, idx) == s.key
            if s.d_in.ncols and s.d_out.nrows:
                assert (s.d_out @ s.d_in).nnz == 0


def test_strand_middle_total_p2():
    strands = strand_decompose(P2_3, 2, 1)
    assert sum(len(s.middle) for s in strands) == math.comb(10, 2) * 10 == 450


def test_dimension_examples():
    assert koszul_dimension(CUBIC, 1, 1) == 3
    assert koszul_dimension(CUBIC, 1, 1, reduce=False) == 3
    assert koszul_dimension(P2_3, 7, 2) == 1
    assert koszul_dimension(P2_3, 7, 2, reduce=False) == 1
    assert koszul_dimension(inst([2], [-3], [3]), 0, 1) == 1
    for spaces, L in [([1], [2]), ([2], [2]), ([1, 1], [1, 2]), ([3], [1])]:
        I = inst(spaces, [0] * len(spaces), L)
        assert koszul_dimension(I, 0, 0) == 1
        assert koszul_dimension(I, 0, I.n + 2) == 0


@pytest.mark.parametrize("spaces,B,L", DESK)
def test_engine_matches_oracle(spaces, B, L):
    I = inst(spaces, B, L)
    for q in range(-1, I.n + 2):
        for p in range(0, I.N + 1):
            if I.term_dim(p, q) * max(I.term_dim(p - 1, q + 1), 1) > 400_000:
                continue
            expect = oracle.kpq(spaces, B, L, p, q)
            assert koszul_dimension(I, p, q) == expect
            assert koszul_dimension(I, p, q, reduce=False) == expect


# frozen from the brute-force oracle
FROZEN = {
    ((2,), (0,), (2,)): {(0, 0): 1, (1, 1): 6, (2, 1): 8, (3, 1): 3},
    ((2,), (0,), (3,)): {(0, 0): 1, (1, 1): 27, (2, 1): 105, (3, 1): 189, (4, 1): 189, (5, 1): 105,
                         (6, 1): 27, (7, 2): 1},
    ((2,), (1,), (3,)): {(0, 0): 3, (1, 0): 15, (2, 0): 21},
    ((1, 1), (0, 0), (2, 2)): {(0, 0): 1, (1, 1): 20, (2, 1): 64, (3, 1): 90, (4, 1): 64, (5, 1): 20,
                               (6, 2): 1},
    ((1,), (-1,), (2,)): {(0, 1): 2, (1, 1): 2},
    ((2,), (-3,), (3,)): {(0, 1): 1, (1, 2): 27, (2, 2): 105},
}


@pytest.mark.parametrize("key", list(FROZEN))
def test_frozen_tables(key):
    spaces, B, L = key
    I = inst(spaces, B, L)
    qs = [0] if B == (1,) else range(0, I.n + 2)
    pmax = 2 if B == (-3,) else I.r
    T = betti_table(I, pmax, qs, workers=1)
    assert T.nonzero() == FROZEN[key]


def test_literal_equals_reduced_on_grid():
    for spaces, B, L in DESK + [([2], [0], [3]), ([1, 1], [0, 0], [2, 2])]:
        I = inst(spaces, B, L)
        a = betti_table(I, min(I.r, 6), workers=1, reduce=True)
        b = betti_table(I, min(I.r, 6), workers=1, reduce=False)
        assert a.entries == b.entries


def test_betti_examples():
    T = betti_table(CUBIC, 3, range(0, 3))
    assert T.nonzero() == {(0, 0): 1, (1, 1): 3, (2, 1): 2}
    assert len(T.entries) == 12 and T.get(3, 1) == 0
    T = betti_table(inst([1], [0], [4]), 4, [1])
    assert [T.get(p, 1) for p in (1, 2, 3)] == [6, 8, 3]
    T = betti_table(inst([2], [0], [2]), 6)
    assert [T.get(p, 1) for p in range(1, 6)] == [6, 8, 3, 0, 0]
    assert all(T.get(p, 2) == 0 for p in range(6))
    assert T.meta["pmax"] == 6 and set(T.seconds) == set(T.entries)
    assert set(T.strands) == set(T.entries)


def test_betti_absent_vs_zero_and_errors():
    I = inst([2], [0], [3], basis_cap=200)
    T = betti_table(I, 4, [1], reduce=False)
    assert T.errors and all(pq not in T.entries for pq in T.errors)
    assert T.get(0, 1) == 0 and (0, 1) in T.entries
    with pytest.raises(ArgumentError):
        betti_table(I, -1)


def test_betti_lookup_skips_computation():
    calls = []
    T = betti_table(CUBIC, 2, [1], lookup=lambda p, q: 99 if p == 1 else None, on_entry=calls.append)
    assert T.get(1, 1) == 99 and {c.p for c in calls} == {0, 2}


def test_regularity_hypothesis():
    assert P2_3.regularity_hypothesis()
    assert inst([2], [-3], [3]).regularity_hypothesis()
    assert not inst([2], [-6], [1]).regularity_hypothesis()
    assert not inst([1, 1], [-3, 0], [1, 1]).regularity_hypothesis()


def test_high_rows_vanish_and_are_asserted():
    T = betti_table(inst([1, 1], [0, 0], [2, 2]), 8, [4, 5])
    assert not T.nonzero()


def test_invariant_violation_raised(monkeypatch):
    monkeypatch.setattr(KoszulEngine, "map_rank", lambda self, p, q: (0, 1))
    with pytest.raises(InvariantViolation):
        betti_table(inst([1], [0], [2]), 1, [3], reduce=False)


def test_hilbert_betti_identity():
    for spaces, B, L in [([1], [0], [3]), ([2], [0], [3]), ([1, 1], [0, 0], [2, 2]), ([2], [1], [2])]:
        I = inst(spaces, B, L)
        T = betti_table(I, I.r + 1)
        check = hilbert_betti_check(T, I)
        assert all(a == b for a, b in check.values()), check


def test_row_support_facts():
    for spaces, B, L in [([2], [1], [3]), ([1], [2], [3]), ([1, 1], [1, 0], [2, 2])]:
        I = inst(spaces, B, L)
        T = betti_table(I, I.r, [0, I.n + 1])
        h0B = I.hilbert(0)
        assert {p for p, k in T.row(0).items() if k} == set(range(h0B))
        KB = tuple(k - b for k, b in zip(I.X.canonical(), I.B))
        from syzygies.multiproj import section_dimension
        h = section_dimension(I.X, KB)
        lo, hi = I.r - I.n - h + 1, I.r - I.n
        assert {p for p, k in T.row(I.n + 1).items() if k} == set(range(max(lo, 0), hi + 1))


def test_parallel_schedule_examples():
    assert parallel_schedule([], 4) == []
    M = assemble_differential(P2_3, 3, 1)
    assert parallel_schedule([lambda: rank(M)], 1) == [rank(M)]
    tasks = [lambda i=i: i * i for i in range(20)]
    assert parallel_schedule(tasks, 1) == parallel_schedule(tasks, 8) == [i * i for i in range(20)]
    with pytest.raises(ArgumentError):
        parallel_schedule(tasks, 0)


def test_parallel_failure_isolated():
    def boom():
        raise RuntimeError("bad strand")
    res = parallel_schedule([lambda: 1, boom, lambda: 3], 3)
    assert res[0] == 1 and res[2] == 3
    assert isinstance(res[1], TaskFailure) and "bad strand" in str(res[1])


def test_worker_budget_determinism():
    I = inst([2], [0], [4])
    assert KoszulEngine(I, workers=1).dimension(10, 2).dim == KoszulEngine(I, workers=8).dimension(10, 2).dim == 55


def test_strand_sum_equals_whole_matrix():
    for spaces, B, L in DESK:
        I = inst(spaces, B, L)
        for q in range(0, 3):
            for p in range(0, 5):
                if I.term_dim(p, q) <= 5000:
                    assert koszul_dimension(I, p, q, reduce=False) == whole_matrix_dimension(I, p, q)


def test_multiprime_dimension():
    res = koszul_dimension_multiprime(P2_3, 7, 2, [2, 3, 32003])
    assert res.agree and res.minimum == 1
    with pytest.raises(ArgumentError):
        koszul_dimension_multiprime(P2_3, 7, 2, [3])


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([([1], 2), ([1], 4), ([2], 1), ([2], 2), ([1, 1], 1)]), st.integers(-2, 2),
       st.integers(0, 5), st.integers(-1, 3))
def test_reduction_is_exact(case, b, p, q):
    spaces, d = case
    I = inst(spaces, [b] * len(spaces), [d] * len(spaces))
    if I.term_dim(p, q) * max(I.term_dim(p - 1, q + 1), 1) > 2_000_000:
        return
    assert koszul_dimension(I, p, q, reduce=True) == koszul_dimension(I, p, q, reduce=False)
