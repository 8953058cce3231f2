"""Stochastic number encoding and decoding.

A fixed-point value x (an integer code in [0, 2**n]) is carried as a
bitstream of length 2**n whose bits are 1 with probability x/2**n.
Encoding compares x against draws from a pluggable random source (D/S
conversion); decoding counts ones (S/D conversion).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_PRECISION = 16

# SplitMix64 increment and mixing constants.
_GOLDEN = 0x9E3779B97F4A7C15
_LEAF = 0xD1B54A32D192ED03
_MASK64 = (1 << 64) - 1


def _mix64(x: int) -> int:
    """SplitMix64 finalizer on one 64-bit word."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


_NP_M1 = np.uint64(0xBF58476D1CE4E5B9)
_NP_M2 = np.uint64(0x94D049BB133111EB)
_NP_GOLDEN = np.uint64(_GOLDEN)


def _mix64_np(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer vectorized over a uint64 array."""
    x = np.asarray(x, dtype=np.uint64).copy()
    x ^= x >> np.uint64(30)
    x *= _NP_M1
    x ^= x >> np.uint64(27)
    x *= _NP_M2
    x ^= x >> np.uint64(31)
    return x


def derive_seed(seed: int, index: int) -> int:
    """Child seed for substream `index`, a pure function of (seed, index)."""
    return _mix64(_mix64(seed) + ((index + 1) * _LEAF & _MASK64))


@dataclass(frozen=True)
class Precision:
    """Fixed-point bit width n; streams at this width have length 2**n."""

    n: int

    def __post_init__(self):
        n = self.n
        if n != int(n) or not 1 <= int(n) <= MAX_PRECISION:
            raise ValueError(f"precision must be an integer in [1, {MAX_PRECISION}], got {n!r}")
        object.__setattr__(self, "n", int(n))

    @property
    def stream_length(self) -> int:
        return 1 << self.n


def _as_precision(n) -> Precision:
    return n if isinstance(n, Precision) else Precision(n)


@dataclass(frozen=True)
class Bitstream:
    """Packed unary stream; position i of the stream is bit i of `bits`."""

    bits: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("stream length must be positive")
        if not 0 <= self.bits < (1 << self.length):
            raise ValueError("bits do not fit the declared stream length")

    def __len__(self) -> int:
        return self.length

    def popcount(self) -> int:
        return self.bits.bit_count()

    def bit(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(f"bit index {i} out of range for length {self.length}")
        return (self.bits >> i) & 1

    def __and__(self, other: "Bitstream") -> "Bitstream":
        if self.length != other.length:
            raise ValueError("cannot AND streams of different lengths")
        return Bitstream(self.bits & other.bits, self.length)

    def to01(self) -> str:
        """Bit characters in position order, position 0 first."""
        return format(self.bits, f"0{self.length}b")[::-1]

    @classmethod
    def from01(cls, s: str) -> "Bitstream":
        if not s or s.strip("01"):
            raise ValueError(f"not a 01-string: {s!r}")
        return cls(int(s[::-1], 2), len(s))

    def to_array(self) -> np.ndarray:
        """Stream bits as a uint8 array of 0/1, position 0 first."""
        raw = self.bits.to_bytes((self.length + 7) // 8, "little")
        unpacked = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        return unpacked[: self.length]

    @classmethod
    def from_array(cls, arr) -> "Bitstream":
        arr = np.asarray(arr).ravel() != 0
        packed = np.packbits(arr, bitorder="little").tobytes()
        return cls(int.from_bytes(packed, "little"), arr.size)


class RngSource:
    """Deterministic source of draws in [0, 2**n).

    Sources are plain values with explicit state: safe to hand between
    threads, not safe for unsynchronized shared mutation.
    """

    def next_value(self, n) -> int:
        raise NotImplementedError

    def next_block(self, n, count: int) -> np.ndarray:
        """`count` successive draws as an array (same stream as next_value)."""
        return np.array([self.next_value(n) for _ in range(count)], dtype=np.int64)


def rng_next(rng: RngSource, n) -> int:
    """Advance `rng` and return its next draw in [0, 2**n)."""
    return rng.next_value(n)


class Counter(RngSource):
    """Deterministic source cycling 0..2**n-1 in order from a start offset."""

    def __init__(self, start_offset: int = 0):
        self.start_offset = int(start_offset)
        self._state = self.start_offset

    def next_value(self, n) -> int:
        p = _as_precision(n)
        value = self._state % p.stream_length
        self._state += 1
        return value

    def next_block(self, n, count: int) -> np.ndarray:
        p = _as_precision(n)
        start = self._state % p.stream_length
        self._state += count
        return (start + np.arange(count, dtype=np.int64)) % p.stream_length


# Verified maximal-period tap sets (taps given as bit positions into the
# shift register); each entry is exercised by an exhaustive period test.
MAXIMAL_TAPS = {
    1: (1,),
    2: (2, 1),
    3: (3, 1),
    4: (4, 1),
    5: (5, 4, 3, 1),
    6: (6, 1),
    7: (7, 1),
    8: (8, 7, 2, 1),
    9: (9, 8, 3, 1),
    10: (10, 9, 6, 1),
    11: (11, 10, 8, 1),
    12: (12, 11, 5, 1),
    13: (13, 12, 9, 1),
    14: (14, 13, 3, 1),
    15: (15, 1),
    16: (16, 14, 5, 1),
}

# A second maximal tap set per width, for pairing two nominally independent
# hardware streams; equals the primary set at widths with no cheap second
# polynomial, where callers should separate streams by phase instead.
MAXIMAL_TAPS_ALT = {
    1: (1,),
    2: (2, 1),
    3: (3, 1),
    4: (4, 1),
    5: (5, 4, 2, 1),
    6: (6, 5, 2, 1),
    7: (7, 6, 5, 1),
    8: (8, 6, 4, 1),
    9: (9, 7, 6, 1),
    10: (10, 8, 7, 1),
    11: (11, 10, 6, 1),
    12: (12, 11, 3, 1),
    13: (13, 12, 3, 1),
    14: (14, 12, 10, 1),
    15: (15, 14, 12, 1),
    16: (16, 13, 11, 1),
}


@lru_cache(maxsize=None)
def _lfsr_cycle(width: int, taps: tuple):
    """Full state cycle from state 1 and a state->position lookup table.

    Returns (seq, pos) where seq visits each reachable state once and
    pos[state] is its index in seq, or -1 for unreachable states.
    """
    tapmask = 0
    for t in taps:
        tapmask |= 1 << (t - 1)
    msb = width - 1
    state = 1
    seq = []
    for _ in range(1 << width):
        feedback = (state & tapmask).bit_count() & 1
        state = (state >> 1) | (feedback << msb)
        seq.append(state)
        if state == 1:
            break
    seq_arr = np.array(seq, dtype=np.int64)
    pos = np.full(1 << width, -1, dtype=np.int64)
    pos[seq_arr] = np.arange(len(seq))
    return seq_arr, pos


class Lfsr(RngSource):
    """Fibonacci LFSR; maximal taps visit every nonzero state before repeating."""

    def __init__(self, width: int, seed: int, taps=None):
        if not 1 <= width <= MAX_PRECISION:
            raise ValueError(f"LFSR width must be in [1, {MAX_PRECISION}], got {width}")
        self.width = int(width)
        self.taps = tuple(taps) if taps is not None else MAXIMAL_TAPS[self.width]
        if any(not 1 <= t <= self.width for t in self.taps):
            raise ValueError(f"taps out of range for width {self.width}: {self.taps}")
        self.state = int(seed) & ((1 << self.width) - 1)
        if self.state == 0:
            raise ValueError("LFSR seed must be nonzero (all-zero state never leaves itself)")
        self._tapmask = 0
        for t in self.taps:
            self._tapmask |= 1 << (t - 1)

    def _step(self) -> int:
        feedback = (self.state & self._tapmask).bit_count() & 1
        self.state = (self.state >> 1) | (feedback << (self.width - 1))
        return self.state

    def next_value(self, n) -> int:
        p = _as_precision(n)
        return self._step() & (p.stream_length - 1)

    def next_block(self, n, count: int) -> np.ndarray:
        p = _as_precision(n)
        seq, pos = _lfsr_cycle(self.width, self.taps)
        start = pos[self.state]
        if start < 0:
            return super().next_block(n, count)
        idx = (start + 1 + np.arange(count, dtype=np.int64)) % len(seq)
        self.state = int(seq[idx[-1]]) if count else self.state
        return seq[idx] & (p.stream_length - 1)


class SeededUniform(RngSource):
    """Counter-mode uniform stream (SplitMix64 under the hood).

    Draw k is a pure function of (seed, stream_id, k), so distinct
    stream ids give independent sequences and blocks can be generated
    in any order or in parallel without changing the values.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._base = stream_base(self.seed, self.stream_id)
        self._pos = 0

    def next_value(self, n) -> int:
        p = _as_precision(n)
        word = _mix64(self._base + (self._pos + 1) * _GOLDEN)
        self._pos += 1
        return word >> (64 - p.n)

    def next_block(self, n, count: int) -> np.ndarray:
        p = _as_precision(n)
        ks = np.arange(self._pos + 1, self._pos + count + 1, dtype=np.uint64)
        self._pos += count
        words = _mix64_np(np.uint64(self._base) + ks * _NP_GOLDEN)
        return (words >> np.uint64(64 - p.n)).astype(np.int64)


def stream_base(seed: int, stream_id: int) -> int:
    """Internal 64-bit state shared by SeededUniform and its bulk variants."""
    return _mix64(_mix64(seed) + ((stream_id + 1) * _GOLDEN & _MASK64))


def uniform_code_matrix(bases, n, count: int) -> np.ndarray:
    """Draws 0..count-1 of SeededUniform streams with the given bases.

    `bases` is an array of stream_base values; the result has shape
    (len(bases), count) and row r equals the stream with base bases[r].
    """
    p = _as_precision(n)
    bases = np.asarray(bases, dtype=np.uint64).reshape(-1, 1)
    ks = np.arange(1, count + 1, dtype=np.uint64).reshape(1, -1)
    words = _mix64_np(bases + ks * _NP_GOLDEN)
    return (words >> np.uint64(64 - p.n)).astype(np.int64)


def ds_encode(x: int, n, rng: RngSource) -> Bitstream:
    """Digital-to-stochastic conversion: bit i is 1 iff x > draw i."""
    p = _as_precision(n)
    length = p.stream_length
    if not 0 <= x <= length:
        raise ValueError(f"value {x} outside [0, {length}] for precision {p.n}")
    draws = np.asarray(rng.next_block(p, length))
    return Bitstream.from_array(draws < x)


def ds_encode_ideal(x: int, n) -> Bitstream:
    """Deterministic encoding with exactly x ones (counter comparator)."""
    p = _as_precision(n)
    length = p.stream_length
    if not 0 <= x <= length:
        raise ValueError(f"value {x} outside [0, {length}] for precision {p.n}")
    return Bitstream((1 << x) - 1, length)


def sd_decode(s: Bitstream, n) -> int:
    """Stochastic-to-digital conversion: the stream's popcount."""
    p = _as_precision(n)
    if s.length != p.stream_length:
        raise ValueError(f"stream length {s.length} does not match 2**{p.n}")
    return s.popcount()
