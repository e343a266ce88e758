import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import gf2_rank, left_kernel_size
from rainbowlcc.errors import PreconditionError
from rainbowlcc.gf import BitMatrix, BitRow, FqElement, is_prime, kernel_basis, rank, solve_combination, xor_rows


def matrices(max_n=10, max_k=10):
    return st.integers(1, max_n).flatmap(
        lambda n: st.integers(1, max_k).flatmap(
            lambda k: st.lists(st.integers(0, (1 << k) - 1), min_size=n, max_size=n).map(lambda rows: BitMatrix(tuple(rows), k))
        )
    )


class TestBitRow:
    def test_bit_order_is_lsb_first(self):
        row = BitRow.from_bits([1, 0, 1, 1])
        assert row.bits == 0b1101
        assert list(row) == [1, 0, 1, 1]
        assert row.support() == [0, 2, 3]
        assert row.weight == 3

    @pytest.mark.parametrize("k", [1, 7, 8, 9, 64, 65])
    def test_hex_round_trip(self, k):
        row = BitRow((1 << k) - 1 - (1 << (k // 2)), k)
        assert BitRow.from_hex(row.to_hex(), k) == row

    def test_hex_is_little_endian(self):
        assert BitRow.from_hex("0100", 9) == BitRow.unit(0, 9)
        assert BitRow.from_hex("0001", 9) == BitRow.unit(8, 9)

    def test_xor_and_dimension_checks(self):
        a, b = BitRow(0b101, 3), BitRow(0b011, 3)
        assert (a ^ b).bits == 0b110
        assert a + b == a ^ b
        with pytest.raises(ValueError):
            a ^ BitRow(1, 4)
        with pytest.raises(ValueError):
            BitRow(0b1000, 3)

    def test_from_indices_cancels_repeats(self):
        assert BitRow.from_indices([0, 2, 2, 5], 6).support() == [0, 5]


class TestMatrix:
    def test_identity_rank(self):
        for k in (1, 5, 70):
            assert rank(BitMatrix.identity(k)) == k

    def test_array_round_trip(self):
        a = np.array([[1, 0, 1], [0, 1, 1], [1, 1, 0]], dtype=np.uint8)
        m = BitMatrix.from_array(a)
        assert np.array_equal(m.to_array(), a)
        assert rank(m) == 2

    def test_words_layout(self):
        m = BitMatrix(((1 << 64) | 1, 1 << 65), 70)
        assert m.words.shape == (2, 2)
        assert int(m.words[0, 0]) == 1 and int(m.words[0, 1]) == 1
        assert int(m.words[1, 1]) == 2
        assert not m.words.flags.writeable

    @settings(max_examples=150, deadline=None)
    @given(matrices())
    def test_rank_matches_oracle(self, m):
        assert rank(m) == gf2_rank(m.to_array())

    @settings(max_examples=80, deadline=None)
    @given(matrices(max_n=9, max_k=6))
    def test_kernel_basis(self, m):
        basis = kernel_basis(m)
        assert len(basis) == m.n - rank(m)
        for y in basis:
            assert y.k == m.n
            assert xor_rows(m.rows, y.support()) == 0
        # the basis spans the whole left kernel
        assert 1 << len(basis) == left_kernel_size(m.to_array())
        if basis:
            assert gf2_rank(np.array([list(y) for y in basis])) == len(basis)

    @settings(max_examples=150, deadline=None)
    @given(matrices(), st.integers(0, (1 << 10) - 1))
    def test_solve_combination(self, m, raw):
        x = BitRow(raw & ((1 << m.k) - 1), m.k)
        y = solve_combination(m, x)
        in_span = gf2_rank(np.vstack([m.to_array(), np.array(list(x), dtype=np.uint8)])) == rank(m)
        assert (y is not None) == in_span
        if y is not None:
            assert xor_rows(m.rows, y.support()) == x.bits
            assert y.weight <= rank(m)

    def test_solve_dimension_mismatch(self):
        with pytest.raises(PreconditionError):
            solve_combination(BitMatrix.identity(3), BitRow(1, 4))


class TestField:
    @pytest.mark.parametrize("q,expected", [(2, True), (3, True), (4, False), (65521, True), (65536, False), (1, False)])
    def test_is_prime(self, q, expected):
        assert is_prime(q) is expected

    @pytest.mark.parametrize("q", [2, 3, 5, 7, 65521])
    def test_inverses(self, q):
        for v in range(1, min(q, 200)):
            a = FqElement(v, q)
            assert (a * a.inv()).value == 1
            assert (a / a).value == 1
            assert (a + (-a)).value == 0

    def test_zero_has_no_inverse(self):
        with pytest.raises(ZeroDivisionError):
            FqElement(0, 5).inv()

    def test_reduces_and_rejects(self):
        assert FqElement(-1, 7).value == 6
        with pytest.raises(PreconditionError):
            FqElement(1, 6)
        with pytest.raises(ValueError):
            FqElement(1, 5) + FqElement(1, 7)
