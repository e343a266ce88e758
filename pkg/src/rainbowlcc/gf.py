"""Bit-packed GF(2) vectors and matrices, elimination helpers, and prime-field scalars.

Bit ``j`` of a packed row is the coefficient of ``e_j`` (least significant bit
first).  Rows are stored as Python ints, which makes XOR of arbitrary width a
single operation; :attr:`BitMatrix.words` exposes the same data as a numpy
``uint64`` array for vectorised checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import PreconditionError

__all__ = [
    "BitRow",
    "BitMatrix",
    "FqElement",
    "is_prime",
    "rank",
    "kernel_basis",
    "solve_combination",
    "xor_rows",
]


@dataclass(frozen=True)
class BitRow:
    """A vector of F_2^k packed into an int."""

    bits: int
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"dimension must be positive, got {self.k}")
        if self.bits < 0 or self.bits >> self.k:
            raise ValueError(f"bits set at or above position k={self.k}")

    @classmethod
    def zero(cls, k: int) -> BitRow:
        return cls(0, k)

    @classmethod
    def unit(cls, j: int, k: int) -> BitRow:
        return cls(1 << j, k)

    @classmethod
    def from_indices(cls, indices: Iterable[int], k: int) -> BitRow:
        bits = 0
        for j in indices:
            bits ^= 1 << j
        return cls(bits, k)

    @classmethod
    def from_bits(cls, values: Sequence[int]) -> BitRow:
        """Build from a 0/1 sequence where ``values[j]`` is coordinate ``j``."""
        bits = 0
        for j, b in enumerate(values):
            if b & 1:
                bits |= 1 << j
        return cls(bits, len(values))

    @classmethod
    def from_hex(cls, text: str, k: int) -> BitRow:
        data = bytes.fromhex(text)
        if len(data) != (k + 7) // 8:
            raise ValueError(f"expected {(k + 7) // 8} bytes for k={k}, got {len(data)}")
        return cls(int.from_bytes(data, "little"), k)

    def to_hex(self) -> str:
        return self.bits.to_bytes((self.k + 7) // 8, "little").hex()

    def __xor__(self, other: BitRow) -> BitRow:
        if self.k != other.k:
            raise ValueError("dimension mismatch")
        return BitRow(self.bits ^ other.bits, self.k)

    __add__ = __xor__

    def __getitem__(self, j: int) -> int:
        if not 0 <= j < self.k:
            raise IndexError(j)
        return (self.bits >> j) & 1

    def __iter__(self):
        return (self[j] for j in range(self.k))

    def __len__(self) -> int:
        return self.k

    def __bool__(self) -> bool:
        return self.bits != 0

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def support(self) -> list[int]:
        return _bit_positions(self.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in self)


def _bit_positions(x: int) -> list[int]:
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


@dataclass(frozen=True)
class BitMatrix:
    """``n`` rows of dimension ``k``; ``rows[i]`` is the packed int of row ``i``."""

    rows: tuple[int, ...]
    k: int

    def __post_init__(self):
        if not isinstance(self.rows, tuple):
            object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        if not self.rows:
            raise ValueError("a BitMatrix needs at least one row")
        if self.k < 1:
            raise ValueError(f"dimension must be positive, got {self.k}")
        bad = [i for i, r in enumerate(self.rows) if r < 0 or r >> self.k]
        if bad:
            raise ValueError(f"row {bad[0]} has bits at or above position k={self.k}")

    @classmethod
    def from_bitrows(cls, rows: Sequence[BitRow]) -> BitMatrix:
        ks = {r.k for r in rows}
        if len(ks) != 1:
            raise ValueError("rows must share one dimension")
        return cls(tuple(r.bits for r in rows), ks.pop())

    @classmethod
    def from_array(cls, array) -> BitMatrix:
        a = np.asarray(array, dtype=np.uint8) & 1
        n, k = a.shape
        weights = [1 << j for j in range(k)]
        rows = tuple(sum(w for w, b in zip(weights, row) if b) for row in a.tolist())
        return cls(rows, k)

    @classmethod
    def identity(cls, k: int) -> BitMatrix:
        return cls(tuple(1 << j for j in range(k)), k)

    @property
    def n(self) -> int:
        return len(self.rows)

    def row(self, i: int) -> BitRow:
        return BitRow(self.rows[i], self.k)

    def __len__(self) -> int:
        return len(self.rows)

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.n, self.k), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            for j in _bit_positions(r):
                out[i, j] = 1
        return out

    @cached_property
    def words(self) -> np.ndarray:
        """Rows as an ``(n, ceil(k/64))`` read-only ``uint64`` array."""
        nwords = (self.k + 63) // 64
        out = np.zeros((self.n, nwords), dtype=np.uint64)
        mask = (1 << 64) - 1
        for w in range(nwords):
            out[:, w] = [(r >> (64 * w)) & mask for r in self.rows]
        out.setflags(write=False)
        return out

    def sum_rows(self, indices: Iterable[int]) -> int:
        return xor_rows(self.rows, indices)


def xor_rows(rows: Sequence[int], indices: Iterable[int]) -> int:
    acc = 0
    for i in indices:
        acc ^= rows[i]
    return acc


class _Elimination:
    """Row-by-row elimination in index order, tracking which original rows make each basis vector."""

    def __init__(self, rows: Sequence[int]):
        self.basis: list[tuple[int, int, int]] = []  # (pivot bit, vector, row combination)
        self.kernel: list[int] = []
        for i, v in enumerate(rows):
            vec, combo = self.reduce(v, 1 << i)
            if vec:
                self.basis.append((vec & -vec, vec, combo))
            else:
                self.kernel.append(combo)

    def reduce(self, vec: int, combo: int = 0) -> tuple[int, int]:
        for pivot, bvec, bcombo in self.basis:
            if vec & pivot:
                vec ^= bvec
                combo ^= bcombo
        return vec, combo


@lru_cache(maxsize=16)
def _eliminate(m: BitMatrix) -> _Elimination:
    return _Elimination(m.rows)


def rank(m: BitMatrix) -> int:
    """Dimension of the row span of ``m`` over F_2."""
    return len(_eliminate(m).basis)


def kernel_basis(m: BitMatrix) -> list[BitRow]:
    """Basis of the left kernel ``{y : y^T m = 0}`` as length-``n`` vectors.

    One vector per row that is dependent on the rows before it, so the basis
    has ``n - rank(m)`` elements.
    """
    return [BitRow(c, m.n) for c in _eliminate(m).kernel]


def solve_combination(m: BitMatrix, x: BitRow) -> BitRow | None:
    """Indicator ``y`` of rows summing to ``x``, supported on pivot rows; ``None`` if ``x`` is not in the span."""
    if x.k != m.k:
        raise PreconditionError(f"target has dimension {x.k}, matrix has {m.k}")
    vec, combo = _eliminate(m).reduce(x.bits)
    if vec:
        return None
    return BitRow(combo, m.n)


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    d = 3
    while d * d <= q:
        if q % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class FqElement:
    """An element of the prime field F_q, ``2 <= q <= 2**16``."""

    value: int
    q: int

    def __post_init__(self):
        if not 2 <= self.q <= 1 << 16 or not is_prime(self.q):
            raise PreconditionError(f"q={self.q} is not a prime in [2, 2^16]")
        if not 0 <= self.value < self.q:
            object.__setattr__(self, "value", self.value % self.q)

    def _coerce(self, other) -> int:
        if isinstance(other, FqElement):
            if other.q != self.q:
                raise ValueError(f"mixing F_{self.q} and F_{other.q}")
            return other.value
        return int(other) % self.q

    def __add__(self, other) -> FqElement:
        return FqElement((self.value + self._coerce(other)) % self.q, self.q)

    def __sub__(self, other) -> FqElement:
        return FqElement((self.value - self._coerce(other)) % self.q, self.q)

    def __mul__(self, other) -> FqElement:
        return FqElement(self.value * self._coerce(other) % self.q, self.q)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self) -> FqElement:
        return FqElement(-self.value % self.q, self.q)

    def inv(self) -> FqElement:
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.q}")
        return FqElement(pow(self.value, -1, self.q), self.q)

    def __truediv__(self, other) -> FqElement:
        return self * FqElement(self._coerce(other), self.q).inv()

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value
