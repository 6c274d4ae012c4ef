"""
HiddenShift — GF(2) linear algebra
Bit-packed vectors and an incrementally reduced row-echelon basis that
carries right-hand sides, so the shift falls out as soon as rank hits n.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from errors import ArgumentError, DimensionError, UnderdeterminedError


def parity(x: np.ndarray) -> np.ndarray:
    """Elementwise parity of non-negative int64 words."""
    x = np.asarray(x, dtype=np.int64)
    x = x ^ (x >> 32)
    x ^= x >> 16
    x ^= x >> 8
    x ^= x >> 4
    x ^= x >> 2
    x ^= x >> 1
    return x & 1


def dot(u: int, v: int) -> int:
    return (int(u) & int(v)).bit_count() & 1


@dataclass(frozen=True)
class Gf2Vector:
    n: int
    bits: int

    def __post_init__(self):
        if self.n < 1:
            raise ArgumentError(f"vector length must be positive, got {self.n}")
        if not 0 <= self.bits < (1 << self.n):
            raise ArgumentError(f"{self.bits} does not fit in {self.n} bits")

    @classmethod
    def from_string(cls, text: str) -> Gf2Vector:
        """Binary string, most significant coordinate first: '110' is 6."""
        return cls(len(text), int(text, 2))

    def dot(self, other: Gf2Vector) -> int:
        if other.n != self.n:
            raise DimensionError(f"length {self.n} vs {other.n}")
        return dot(self.bits, other.bits)

    def __int__(self):
        return self.bits

    def __str__(self):
        return f"{self.bits:0{self.n}b}"


class InsertResult(Enum):
    EXTENDED = "extended"
    REDUNDANT = "redundant"
    INCONSISTENT = "inconsistent"


class Gf2Basis:
    """
    Rows (pivot, vector, rhs) kept fully reduced: pivot is the highest set
    bit, pivots strictly decrease down the rows, and every pivot column is
    zero in all other rows. Single writer.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ArgumentError(f"basis dimension must be positive, got {n}")
        self.n = n
        self._rows: list[list[int]] = []
        self._equations: list[tuple[int, int]] = []

    @property
    def rank(self) -> int:
        return len(self._rows)

    @property
    def rows(self) -> list[tuple[int, int, int]]:
        return [tuple(row) for row in self._rows]

    def _bits(self, u) -> int:
        if isinstance(u, Gf2Vector):
            if u.n != self.n:
                raise DimensionError(f"vector has length {u.n}, basis has {self.n}")
            return u.bits
        u = int(u)
        if not 0 <= u < (1 << self.n):
            raise DimensionError(f"{u} does not fit in {self.n} bits")
        return u

    def _reduce(self, u: int, b: int) -> tuple[int, int]:
        for pivot, vec, rhs in self._rows:
            if (u >> pivot) & 1:
                u ^= vec
                b ^= rhs
        return u, b

    def insert(self, u, b: int) -> InsertResult:
        u = self._bits(u)
        reduced, rhs = self._reduce(u, int(b) & 1)
        if reduced == 0:
            return InsertResult.REDUNDANT if rhs == 0 else InsertResult.INCONSISTENT

        pivot = reduced.bit_length() - 1
        for row in self._rows:
            if (row[1] >> pivot) & 1:
                row[1] ^= reduced
                row[2] ^= rhs
        at = 0
        while at < len(self._rows) and self._rows[at][0] > pivot:
            at += 1
        self._rows.insert(at, [pivot, reduced, rhs])
        self._equations.append((u, int(b) & 1))
        return InsertResult.EXTENDED

    def in_span(self, u) -> bool:
        return self._reduce(self._bits(u), 0)[0] == 0

    def solve(self) -> Gf2Vector:
        """The unique s with <u_i, s> = b_i; needs full rank."""
        if self.rank < self.n:
            raise UnderdeterminedError(self.rank, self.n)
        s = 0
        for pivot, vec, rhs in self._rows:
            # full rank and fully reduced: vec == 1 << pivot
            if rhs:
                s |= 1 << pivot
        for u, b in self._equations:
            if dot(u, s) != b:
                raise ArithmeticError(f"back-substitution failed on equation ({u:b}, {b})")
        return Gf2Vector(self.n, s)

    def member_hyperplane_check(self) -> Gf2Vector | None:
        """At rank n-1, the nonzero v orthogonal to every row; otherwise None."""
        if self.rank != self.n - 1:
            return None
        pivots = {row[0] for row in self._rows}
        free = next(col for col in range(self.n) if col not in pivots)
        v = 1 << free
        for pivot, vec, _ in self._rows:
            if (vec >> free) & 1:
                v |= 1 << pivot
        return Gf2Vector(self.n, v)

    def span_mask(self) -> np.ndarray:
        """Boolean array of length 2^n marking the members of the span."""
        members = np.zeros(1, dtype=np.int64)
        for _, vec, _ in self._rows:
            members = np.concatenate([members, members ^ vec])
        mask = np.zeros(1 << self.n, dtype=bool)
        mask[members] = True
        return mask

    def __repr__(self):
        body = ", ".join(f"({vec:0{self.n}b},{rhs})" for _, vec, rhs in self._rows)
        return f"Gf2Basis(n={self.n}, rank={self.rank}, rows=[{body}])"
