import numpy as np
import pytest

from errors import ArgumentError, DimensionError, UnderdeterminedError
from gf2 import Gf2Basis, Gf2Vector, InsertResult, dot, parity


def vec(text):
    return Gf2Vector.from_string(text)


def test_vector_basics():
    v = vec("110")
    assert (v.n, v.bits, int(v), str(v)) == (3, 6, 6, "110")
    assert v.dot(vec("011")) == 1
    assert v.dot(vec("111")) == 0
    with pytest.raises(ArgumentError):
        Gf2Vector(2, 4)
    with pytest.raises(DimensionError):
        v.dot(vec("01"))


def test_parity_matches_popcount():
    xs = np.array([0, 1, 3, 7, 0b1011, (1 << 40) + 1, (1 << 62) - 1], dtype=np.int64)
    assert parity(xs).tolist() == [bin(int(x)).count("1") % 2 for x in xs]
    assert dot(0b1101, 0b0111) == 0


def test_insert_then_solve_two_bits():
    basis = Gf2Basis(2)
    assert basis.insert(vec("10"), 1) is InsertResult.EXTENDED
    assert basis.insert(vec("11"), 0) is InsertResult.EXTENDED
    assert basis.rank == 2
    assert str(basis.solve()) == "11"


def test_redundant_and_inconsistent():
    basis = Gf2Basis(2)
    basis.insert(vec("10"), 1)
    assert basis.insert(vec("10"), 1) is InsertResult.REDUNDANT
    assert basis.insert(vec("00"), 0) is InsertResult.REDUNDANT
    assert basis.insert(vec("10"), 0) is InsertResult.INCONSISTENT
    assert basis.rank == 1


def test_solve_identity_rows():
    basis = Gf2Basis(3)
    for u, b in (("100", 1), ("010", 0), ("001", 1)):
        basis.insert(vec(u), b)
    assert str(basis.solve()) == "101"


def test_solve_needs_full_rank():
    basis = Gf2Basis(3)
    basis.insert(vec("100"), 1)
    with pytest.raises(UnderdeterminedError) as err:
        basis.solve()
    assert (err.value.rank, err.value.n) == (1, 3)
    assert err.value.exit_code == 1


def test_dimension_mismatch():
    basis = Gf2Basis(3)
    with pytest.raises(DimensionError):
        basis.insert(vec("10"), 0)
    with pytest.raises(DimensionError):
        basis.insert(8, 0)


def test_in_span_and_hyperplane():
    basis = Gf2Basis(2)
    basis.insert(vec("10"), 0)
    assert basis.in_span(vec("10"))
    assert not basis.in_span(vec("11"))
    assert str(basis.member_hyperplane_check()) == "01"

    basis = Gf2Basis(3)
    basis.insert(vec("110"), 0)
    basis.insert(vec("011"), 0)
    assert str(basis.member_hyperplane_check()) == "111"
    basis.insert(vec("001"), 0)
    assert basis.member_hyperplane_check() is None


def test_rows_stay_fully_reduced():
    rng = np.random.default_rng(3)
    basis = Gf2Basis(12)
    while basis.rank < 12:
        basis.insert(int(rng.integers(0, 1 << 12)), int(rng.integers(0, 2)))
        pivots = [p for p, _, _ in basis.rows]
        assert pivots == sorted(pivots, reverse=True)
        for pivot, v, _ in basis.rows:
            assert v.bit_length() - 1 == pivot
            assert all((other >> pivot) & 1 == 0 for p, other, _ in basis.rows if p != pivot)


def test_rank_never_decreases_and_redundant_is_idempotent():
    rng = np.random.default_rng(8)
    s = 0b1011001
    basis = Gf2Basis(7)
    last = 0
    for _ in range(60):
        u = int(rng.integers(0, 1 << 7))
        before = basis.rows
        result = basis.insert(u, dot(u, s))
        assert result is not InsertResult.INCONSISTENT
        if result is InsertResult.REDUNDANT:
            assert basis.rows == before
        assert basis.rank >= last
        last = basis.rank
    assert basis.solve().bits == s


def test_random_full_rank_systems():
    rng = np.random.default_rng(21)
    for _ in range(200):
        n = int(rng.integers(1, 17))
        s = int(rng.integers(0, 1 << n))
        basis = Gf2Basis(n)
        equations = []
        while basis.rank < n:
            u = int(rng.integers(0, 1 << n))
            equations.append((u, dot(u, s)))
            basis.insert(u, dot(u, s))
        found = basis.solve()
        assert found.bits == s
        assert all(dot(u, found.bits) == b for u, b in equations)


def test_span_mask():
    basis = Gf2Basis(3)
    assert np.flatnonzero(basis.span_mask()).tolist() == [0]
    basis.insert(vec("110"), 0)
    basis.insert(vec("011"), 1)
    assert np.flatnonzero(basis.span_mask()).tolist() == [0, 3, 5, 6]
