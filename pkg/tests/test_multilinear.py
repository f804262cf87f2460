from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from syzygies.errors import ArgumentError
from syzygies.multilinear import (
    binomial_table,
    divided_power_dim,
    divided_to_symmetric,
    filtration_dimension_check,
    hermite_dimension_check,
    koszul_sign,
    symmetric_power_dim,
    wedge_rank,
    wedge_unrank,
)


def test_wedge_examples():
    assert wedge_rank((0, 1)) == 0
    assert wedge_rank((1, 3)) == 4
    assert wedge_unrank(5, 2, 4) == (2, 3)


def test_wedge_errors():
    with pytest.raises(ArgumentError):
        wedge_unrank(6, 2, 4)
    with pytest.raises(ArgumentError):
        wedge_rank((3, 1))


def test_round_trip_exhaustive():
    for N in range(13):
        for p in range(N + 1):
            seen = set()
            for w in itertools.combinations(range(N), p):
                r = wedge_rank(w)
                assert 0 <= r < math.comb(N, p)
                assert wedge_unrank(r, p, N) == w
                seen.add(r)
            assert len(seen) == math.comb(N, p)


def test_koszul_sign_examples():
    assert [koszul_sign((3, 7, 9), j) for j in (1, 2, 3)] == [1, -1, 1]
    with pytest.raises(ArgumentError):
        koszul_sign((3, 7, 9), 4)


def test_power_dims():
    assert divided_power_dim(2, 2) == 3
    assert divided_power_dim(3, 3) == 10
    assert divided_power_dim(5, 0) == 1
    assert symmetric_power_dim(4, 3) == 20


def test_binomial_table_read_only():
    T = binomial_table(10)
    assert T(10, 3) == 120
    with pytest.raises(ValueError):
        T.table[0, 0] = 5


def test_divided_to_symmetric_examples():
    m = divided_to_symmetric(2, 2, 2)
    assert m.diagonal == (1, 0, 1)
    assert (m.rank, m.kernel_dim, m.cokernel_dim) == (2, 1, 1)
    assert m.basis[1] == (1, 1)   # the mixed monomial spans the kernel
    assert divided_to_symmetric(2, 2, 3).rank == 3
    for dimV, prime in [(1, 2), (4, 3), (6, 5)]:
        ident = divided_to_symmetric(dimV, 1, prime)
        assert np.array_equal(ident.dense(), np.eye(dimV, dtype=np.int64))


def test_divided_to_symmetric_rejects_composite():
    with pytest.raises(ArgumentError):
        divided_to_symmetric(2, 2, 4)


@given(st.integers(1, 5), st.integers(0, 6), st.sampled_from([7, 11, 13, 101]))
def test_full_rank_above_n(dimV, n, prime):
    m = divided_to_symmetric(dimV, n, prime)
    assert m.shape == (divided_power_dim(dimV, n),) * 2
    assert m.rank == len(m.basis)


def test_hermite_examples():
    assert hermite_dimension_check(2, 3)
    assert all(hermite_dimension_check(1, d) for d in range(10))
    assert hermite_dimension_check(4, 2)


def test_filtration_examples():
    assert filtration_dimension_check(3, 2, 5)
    assert filtration_dimension_check(1, 1, 2)
    assert filtration_dimension_check(10, 7, 17)
