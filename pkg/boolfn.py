"""
HiddenShift — Boolean functions on Z_2^n
Truth tables, Walsh-Hadamard spectra, influences, test families and the
BHSP instance with its counted oracles.

Index convention: bit i of an integer x is coordinate x_i, and
<u, v> is the parity of (u AND v). Files list f(0) first.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from cli.config import MAX_N, EXACT_WHT_MAX_N
from errors import SizeError, ArgumentError, ParseError
from gf2 import parity


def _check_n(n: int, low: int = 1):
    if not isinstance(n, (int, np.integer)) or not low <= n <= MAX_N:
        raise SizeError(f"n must be in [{low}, {MAX_N}], got {n}")


def _check_point(n: int, x: int, what: str = "vector"):
    if not 0 <= int(x) < (1 << n):
        raise ArgumentError(f"{what} {x} out of range for n={n}")


@functools.lru_cache(maxsize=32)
def indices(n: int) -> np.ndarray:
    """Read-only arange(2^n) shared by every table of size n."""
    idx = np.arange(1 << n, dtype=np.int64)
    idx.flags.writeable = False
    return idx


# ── Truth tables ────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class TruthTable:
    """f : Z_2^n -> {0,1}, stored as a little-endian packed bit array."""
    n: int
    packed: np.ndarray

    def __post_init__(self):
        _check_n(self.n)
        expected = ((1 << self.n) + 7) // 8
        if self.packed.dtype != np.uint8 or self.packed.shape != (expected,):
            raise SizeError(f"packed table for n={self.n} must be {expected} bytes")

    @classmethod
    def from_bits(cls, bits) -> TruthTable:
        bits = np.asarray(bits, dtype=np.uint8)
        size = bits.shape[0]
        if size < 2 or size & (size - 1):
            raise SizeError(f"table length must be a power of two >= 2, got {size}")
        if bits.max(initial=0) > 1:
            raise ArgumentError("truth table entries must be 0 or 1")
        n = size.bit_length() - 1
        return cls(n, np.packbits(bits, bitorder="little"))

    @classmethod
    def from_string(cls, text: str) -> TruthTable:
        return cls.from_bits([int(ch) for ch in text])

    @functools.cached_property
    def values(self) -> np.ndarray:
        vals = np.unpackbits(self.packed, count=1 << self.n, bitorder="little")
        vals.flags.writeable = False
        return vals

    @property
    def size(self) -> int:
        return 1 << self.n

    def __call__(self, x: int) -> int:
        return int(self.values[x])

    def __eq__(self, other):
        return isinstance(other, TruthTable) and self.n == other.n and np.array_equal(self.packed, other.packed)

    def __hash__(self):
        return hash((self.n, self.packed.tobytes()))

    def signs(self, dtype=np.int64) -> np.ndarray:
        """F(x) = (-1)^f(x)."""
        return 1 - 2 * self.values.astype(dtype)

    def shifted(self, s: int) -> TruthTable:
        """x -> f(x XOR s)."""
        _check_point(self.n, s, "shift")
        return TruthTable.from_bits(self.values[indices(self.n) ^ s])

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self.values)

    def __repr__(self):
        body = self.to_string() if self.n <= 6 else f"{self.to_string()[:64]}…"
        return f"TruthTable(n={self.n}, {body})"


# ── Spectra ─────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class Spectrum:
    """coeffs[u] = 2^-n * sum_x (-1)^(f(x) + <u,x>).

    `raw` holds the integer sums (2^n * coeffs) when the exact path ran.
    """
    n: int
    coeffs: np.ndarray
    raw: np.ndarray | None = None

    def parseval_error(self) -> float:
        return abs(float(np.dot(self.coeffs, self.coeffs)) - 1.0)

    def lattice_error(self) -> float:
        """Distance of the coefficients from the 2^(1-n) grid."""
        scaled = self.coeffs * (1 << (self.n - 1))
        return float(np.max(np.abs(scaled - np.round(scaled))))

    def squared(self) -> np.ndarray:
        return self.coeffs * self.coeffs


_BLOCK_BITS = 8
_BLOCK = 1 << _BLOCK_BITS


@functools.lru_cache(maxsize=None)
def _sylvester(dtype: np.dtype) -> np.ndarray:
    """H[i, j] = (-1)^<i, j> on 8 bits."""
    h = np.ones((1, 1), dtype=dtype)
    for _ in range(_BLOCK_BITS):
        h = np.block([[h, h], [h, -h]])
    h.flags.writeable = False
    return h


def fwht_inplace(a: np.ndarray) -> np.ndarray:
    """
    Unnormalized Walsh-Hadamard transform over the first axis, in place.

    Float vectors take the transform eight bits at a time as a BLAS product
    with the 256x256 Sylvester matrix; whatever bits remain, and every integer
    array, go through the radix-2 butterfly.
    """
    size = a.shape[0]
    if size & (size - 1):
        raise SizeError(f"butterfly length must be a power of two, got {size}")
    h = 1
    if a.ndim == 1 and a.dtype.kind == "f" and size >= _BLOCK:
        block = _sylvester(a.dtype)
        a[...] = (a.reshape(-1, _BLOCK) @ block).reshape(size)
        h = _BLOCK
        while h * _BLOCK <= size:
            strided = a.reshape(-1, _BLOCK, h)
            strided[...] = np.matmul(block, strided)
            h *= _BLOCK
    while h < size:
        view = a.reshape(-1, 2, h)
        top = view[:, 0, :].copy()
        view[:, 0, :] += view[:, 1, :]
        np.subtract(top, view[:, 1, :], out=view[:, 1, :])
        h *= 2
    return a


def wht(t: TruthTable) -> Spectrum:
    """Walsh-Hadamard spectrum of the ±1 version of t in O(n 2^n)."""
    _check_n(t.n)
    if t.n <= EXACT_WHT_MAX_N:
        raw = fwht_inplace(t.signs(np.int64))
        raw.flags.writeable = False
        return Spectrum(t.n, raw / float(1 << t.n), raw)
    # Every partial sum is an integer below 2^53, so floats stay exact.
    coeffs = fwht_inplace(t.signs(np.float64))
    coeffs /= float(1 << t.n)
    return Spectrum(t.n, coeffs)


def spectrum_to_csv(sp: Spectrum, stream):
    """Write `u,coeff` rows, u as zero-padded binary (most significant bit first)."""
    stream.write("u,coeff\n")
    for u, c in enumerate(sp.coeffs):
        stream.write(f"{u:0{sp.n}b},{float(c)!r}\n")


# ── Influence ───────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class InfluenceProfile:
    n: int
    gamma: np.ndarray
    gamma_min: float
    argmin: int


def influence_of(t: TruthTable, v: int) -> float:
    """|{x : f(x) != f(x ^ v)}| / 2^n, counted directly."""
    _check_point(t.n, v)
    vals = t.values
    flips = np.count_nonzero(vals != vals[indices(t.n) ^ v])
    return flips / float(t.size)


def influence_spectral(sp: Spectrum, v: int) -> float:
    """Sum of coeffs[u]^2 over u with <v,u> = 1."""
    _check_point(sp.n, v)
    if v == 0:
        return 0.0
    odd = parity(indices(sp.n) & v).astype(bool)
    return float(np.sum(sp.coeffs[odd] ** 2))


def autocorrelation(t: TruthTable) -> np.ndarray:
    """A[v] = sum_x F(x) F(x ^ v), exact, via the WHT of the squared spectrum."""
    _check_n(t.n)
    raw = fwht_inplace(t.signs(np.int64))
    power = raw * raw
    fwht_inplace(power)
    return power >> t.n


def influence_profile(t: TruthTable) -> InfluenceProfile:
    """gamma[v] for every v with one pair of butterflies: gamma = (1 - r(v)) / 2."""
    corr = autocorrelation(t)
    gamma = ((1 << t.n) - corr) / float(1 << (t.n + 1))
    argmin = int(np.argmin(gamma[1:])) + 1
    return InfluenceProfile(t.n, gamma, float(gamma[argmin]), argmin)


def well_posed(t: TruthTable) -> bool:
    """True iff no nonzero v leaves f invariant."""
    return influence_profile(t).gamma_min > 0


def is_bent(t: TruthTable, tol: float = 1e-12) -> bool:
    if t.n % 2:
        return False
    flat = 2.0 ** (-t.n / 2)
    return float(np.max(np.abs(np.abs(wht(t).coeffs) - flat))) <= tol


# ── Families ────────────────────────────────────────────────────────────────

def make_bent(n: int, variant: int = 0) -> TruthTable:
    """
    Maiorana-McFarland bent function f(x, y) = <x, pi(y)> XOR h(y), with x the
    low n/2 bits and y the high n/2 bits. Variant 0 is pi = id, h = 0; any
    other variant seeds a random permutation pi and a random h.
    """
    if n % 2 or n < 2:
        raise ArgumentError(f"bent functions need an even n >= 2, got {n}")
    _check_n(n)
    half = n // 2
    width = 1 << half
    if variant == 0:
        perm = np.arange(width, dtype=np.int64)
        h = np.zeros(width, dtype=np.uint8)
    else:
        rng = np.random.default_rng(variant)
        perm = rng.permutation(width).astype(np.int64)
        h = rng.integers(0, 2, size=width, dtype=np.uint8)
    z = indices(n)
    xs = z & (width - 1)
    ys = z >> half
    return TruthTable.from_bits(parity(xs & perm[ys]).astype(np.uint8) ^ h[ys])


def make_delta(n: int, x0: int = 0) -> TruthTable:
    _check_n(n)
    _check_point(n, x0, "marked point")
    bits = np.zeros(1 << n, dtype=np.uint8)
    bits[x0] = 1
    return TruthTable.from_bits(bits)


def make_random(n: int, seed: int) -> TruthTable:
    _check_n(n)
    rng = np.random.default_rng(seed)
    return TruthTable.from_bits(rng.integers(0, 2, size=1 << n, dtype=np.uint8))


def make_affine(n: int, a: int, c: int = 0) -> TruthTable:
    """<a, x> XOR c. Ill-posed for n >= 2: any v with <a,v> = 0 is a self-shift."""
    _check_n(n)
    _check_point(n, a)
    return TruthTable.from_bits(parity(indices(n) & a).astype(np.uint8) ^ (c & 1))


# ── Files ───────────────────────────────────────────────────────────────────

def from_file(path) -> TruthTable:
    """
    Parse a truth-table file:
        # optional comments
        n=<int>
        <2^n characters of 0/1, index 0 first>
    """
    data = Path(path).read_bytes()
    n = None
    table = None
    offset = 0
    for raw_line in data.splitlines(keepends=True):
        start = offset
        offset += len(raw_line)
        line = raw_line.rstrip(b"\r\n")
        body = line.strip()
        if not body or body.startswith(b"#"):
            continue
        start += len(line) - len(line.lstrip())

        if n is None:
            if not body.startswith(b"n="):
                raise ParseError("expected header 'n=<int>'", start)
            try:
                n = int(body[2:])
            except ValueError:
                raise ParseError(f"bad bit count {body[2:]!r}", start + 2)
            if not 1 <= n <= MAX_N:
                raise ParseError(f"n must be in [1, {MAX_N}], got {n}", start + 2)
            continue

        if table is None:
            expected = 1 << n
            chars = np.frombuffer(body, dtype=np.uint8) - ord("0")
            bad = np.flatnonzero(chars > 1)
            if bad.size and bad[0] < expected:
                pos = int(bad[0])
                raise ParseError(f"invalid table character {chr(body[pos])!r}", start + pos)
            if len(body) != expected:
                raise ParseError(f"expected {expected} table characters, got {len(body)}",
                                 start + min(len(body), expected))
            table = chars
            continue

        raise ParseError("unexpected content after the truth table", start)

    if n is None:
        raise ParseError("missing header 'n=<int>'", offset)
    if table is None:
        raise ParseError("missing truth table line", offset)
    return TruthTable.from_bits(table)


def to_file(t: TruthTable, path, comment: str = None):
    lines = []
    if comment:
        lines.extend(f"# {line}" for line in comment.splitlines())
    lines.append(f"n={t.n}")
    lines.append(t.to_string())
    Path(path).write_text("\n".join(lines) + "\n")


# ── Instances ───────────────────────────────────────────────────────────────

class BhspInstance:
    """
    A hidden shift instance (O_f, O_g) with g(x) = f(x ^ s).

    Solvers see f and g only through the query_* / apply_oracle_* methods,
    each of which bumps the counters. `planted_shift` is for the harness.
    """

    def __init__(self, f: TruthTable, shift: int, allow_ill_posed: bool = False):
        _check_point(f.n, shift, "shift")
        if not allow_ill_posed and not well_posed(f):
            raise ArgumentError("f has a nontrivial self-shift, so the hidden shift is not unique")
        self.f = f
        self._shift = int(shift)
        self._g = f.shifted(self._shift)
        self.f_queries = 0
        self.g_queries = 0

    @property
    def n(self) -> int:
        return self.f.n

    @property
    def planted_shift(self) -> int:
        return self._shift

    @property
    def queries(self) -> int:
        return self.f_queries + self.g_queries

    def query_f(self, x: int) -> int:
        self.f_queries += 1
        return int(self.f.values[x])

    def query_g(self, x: int) -> int:
        self.g_queries += 1
        return int(self._g.values[x])

    def apply_oracle_f(self, amps: np.ndarray):
        """|b>|x> -> |b ^ f(x)>|x> on a (2, 2^n) amplitude array, one query."""
        self.f_queries += 1
        _xor_ancilla(amps, self.f.values)

    def apply_oracle_g(self, amps: np.ndarray):
        self.g_queries += 1
        _xor_ancilla(amps, self._g.values)

    def charge_runs(self, runs: int = 1):
        """Bill `runs` further executions of a circuit holding one O_f and one O_g."""
        self.f_queries += runs
        self.g_queries += runs

    def simulation_tables(self) -> tuple[TruthTable, TruthTable]:
        """(f, g) for the direct-sampling simulator path. Not for solvers."""
        return self.f, self._g


def _xor_ancilla(amps: np.ndarray, values: np.ndarray):
    mask = values.astype(bool)
    amps[:, mask] = amps[::-1, mask]
