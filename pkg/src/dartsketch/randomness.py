"""Seeded pseudo-random function family over dart index tuples.

All randomness in the library flows through :class:`HashFamily`, which maps
fixed-width packed index tuples to 64-bit values via byte-wise tabulation
hashing followed by an avalanche finalizer.  The tables are filled from a
Mersenne Twister generator, so the same seed reproduces bit-identical
outputs across runs and platforms.
Because keys never contain per-set state, any two weighted sets probing the
same (element, nu, rho, w, r) area observe identical Poisson counts and
uniform draws, which is what makes minhash collisions meaningful.

Key packing is fixed-width little-endian: element 8 bytes, nu/rho 1 byte
each, w/r 4 bytes each, j/stream 2 bytes each (22 bytes, one table per
byte position).  Uniform variates take the top 53 hash bits.
"""

from __future__ import annotations

import bisect
import math
import struct

import numpy as np

from .core import ValidationError

# Stream tags keep draws at the same index tuple independent.
STREAM_V = 1
STREAM_U = 2
STREAM_POISSON = 3
STREAM_FINGERPRINT = 4
STREAM_BUCKET = 5
STREAM_ICWS_R1 = 6
STREAM_ICWS_R2 = 7
STREAM_ICWS_C1 = 8
STREAM_ICWS_C2 = 9
STREAM_ICWS_BETA = 10
STREAM_ICWS_FINGERPRINT = 11
STREAM_KEY_MIX = 12

_KEY_STRUCT = struct.Struct("<QBBIIHH")
KEY_BYTES = _KEY_STRUCT.size  # 22
_POISSON_TABLE_LEN = 64
_TOP53 = np.uint64(11)
_INV_2_53 = 2.0**-53

# Output finalizer constants (splitmix64).  Raw byte-table XORs leave keys
# that differ in a single byte related by a constant XOR, which correlates
# draws at neighboring keys and across streams; the avalanche step breaks
# that structure while keeping the family a bijection of the table hash.
_MIX_MUL1 = 0xBF58476D1CE4E5B9
_MIX_MUL2 = 0x94D049BB133111EB
_U64_MASK = 0xFFFFFFFFFFFFFFFF
_NP_MIX_MUL1 = np.uint64(_MIX_MUL1)
_NP_MIX_MUL2 = np.uint64(_MIX_MUL2)


def _mix64(h: int) -> int:
    h ^= h >> 30
    h = (h * _MIX_MUL1) & _U64_MASK
    h ^= h >> 27
    h = (h * _MIX_MUL2) & _U64_MASK
    return h ^ (h >> 31)


def _poisson1_cdf() -> np.ndarray:
    """Cumulative probabilities of Poisson(1), saturating to 1.0 in float64.

    The final entry is forced to 1.0 so inverse-CDF lookups always land in
    the table; counts therefore cap at the table length minus one with
    distortion below the resolution of a 53-bit uniform draw.
    """
    cdf = np.empty(_POISSON_TABLE_LEN, dtype=np.float64)
    term = math.exp(-1.0)
    total = term
    cdf[0] = total
    for n in range(1, _POISSON_TABLE_LEN):
        term /= n
        total += term
        cdf[n] = total
    cdf[-1] = 1.0
    return cdf


POISSON1_CDF = _poisson1_cdf()
_POISSON1_CDF_LIST = POISSON1_CDF.tolist()


def derive_seed(base: int, *indices: int) -> int:
    """Deterministically derive an independent 64-bit seed from a base seed."""
    seq = np.random.SeedSequence(base, spawn_key=tuple(indices))
    return int(seq.generate_state(1, np.uint64)[0])


class HashFamily:
    """Deterministic tabulation-hash family seeded by a 64-bit value.

    Immutable after construction; every operation is pure, so instances can
    be shared freely across threads.
    """

    __slots__ = ("seed", "_tables", "_tables_list", "poisson_cdf")

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed <= 2**64 - 1:
            raise ValidationError("seed must fit in 64 bits")
        self.seed = seed
        rng = np.random.Generator(np.random.MT19937(np.random.SeedSequence(seed)))
        self._tables = rng.integers(0, 2**64, size=(KEY_BYTES, 256), dtype=np.uint64)
        self._tables_list = None  # built lazily for the scalar path
        self.poisson_cdf = POISSON1_CDF

    # -- scalar path -------------------------------------------------------

    def _scalar_tables(self) -> list[list[int]]:
        if self._tables_list is None:
            self._tables_list = self._tables.tolist()
        return self._tables_list

    def hash64(self, element: int, nu: int = 0, rho: int = 0, w: int = 0,
               r: int = 0, j: int = 0, stream: int = 0) -> int:
        """Tabulation hash of one packed index tuple."""
        key = _KEY_STRUCT.pack(
            element & 0xFFFFFFFFFFFFFFFF, nu & 0xFF, rho & 0xFF,
            w & 0xFFFFFFFF, r & 0xFFFFFFFF, j & 0xFFFF, stream & 0xFFFF)
        tables = self._scalar_tables()
        h = 0
        for pos in range(KEY_BYTES):
            h ^= tables[pos][key[pos]]
        return _mix64(h)

    def _unpack_key(self, key) -> tuple[int, int, int, int, int, int]:
        fields = list(key)
        if len(fields) > 6:
            raise ValidationError("index tuples have at most 6 fields")
        fields += [0] * (6 - len(fields))
        return tuple(int(f) for f in fields)

    def uniform(self, key, stream: int) -> float:
        """Deterministic uniform draw on [0, 1) for (seed, key, stream)."""
        element, nu, rho, w, r, j = self._unpack_key(key)
        return (self.hash64(element, nu, rho, w, r, j, stream) >> 11) * _INV_2_53

    def poisson1(self, key) -> int:
        """Poisson(1) count for a key, via inverse CDF on a dedicated stream."""
        return bisect.bisect_right(_POISSON1_CDF_LIST, self.uniform(key, STREAM_POISSON))

    def fingerprint(self, index) -> int:
        """64-bit token identifying a dart; pure function of (seed, index)."""
        element, nu, rho, w, r, j = self._unpack_key(index)
        return self.hash64(element, nu, rho, w, r, j, STREAM_FINGERPRINT)

    def bucket(self, fp: int, k: int) -> int:
        """Uniform bucket in [0, k) for a fingerprint."""
        if k < 1:
            raise ValidationError("bucket count must be positive")
        return self.hash64(fp, stream=STREAM_BUCKET) % k

    def mix64(self, values) -> int:
        """Order-sensitive 64-bit combination of a sequence of 64-bit values."""
        mixed = 0
        for pos, value in enumerate(values):
            mixed = self.hash64((int(value) ^ mixed) & 0xFFFFFFFFFFFFFFFF,
                                w=pos, stream=STREAM_KEY_MIX)
        return mixed

    # -- vectorized path (bit-identical to the scalar path) ----------------

    def hash64_array(self, element, nu=0, rho=0, w=0, r=0, j=0, stream: int = 0) -> np.ndarray:
        element = np.asarray(element, dtype=np.uint64)
        tab = self._tables
        # stream and any scalar fields fold into a constant XOR
        out = tab[20, stream & 0xFF] ^ tab[21, (stream >> 8) & 0xFF]
        out = np.broadcast_to(out, element.shape).copy()
        for pos in range(8):
            out ^= tab[pos][((element >> np.uint64(8 * pos)) & np.uint64(0xFF)).astype(np.intp)]
        out ^= self._field_lookup(8, nu, 1, element.shape)
        out ^= self._field_lookup(9, rho, 1, element.shape)
        out ^= self._field_lookup(10, w, 4, element.shape)
        out ^= self._field_lookup(14, r, 4, element.shape)
        out ^= self._field_lookup(18, j, 2, element.shape)
        out ^= out >> np.uint64(30)
        out *= _NP_MIX_MUL1
        out ^= out >> np.uint64(27)
        out *= _NP_MIX_MUL2
        out ^= out >> np.uint64(31)
        return out

    def _field_lookup(self, table_offset: int, values, width: int, shape):
        tab = self._tables
        if np.isscalar(values) or np.ndim(values) == 0:
            v = int(values)
            acc = tab[table_offset, v & 0xFF]
            for pos in range(1, width):
                acc ^= tab[table_offset + pos, (v >> (8 * pos)) & 0xFF]
            return acc
        values = np.asarray(values, dtype=np.uint64)
        acc = tab[table_offset][(values & np.uint64(0xFF)).astype(np.intp)]
        for pos in range(1, width):
            acc = acc ^ tab[table_offset + pos][
                ((values >> np.uint64(8 * pos)) & np.uint64(0xFF)).astype(np.intp)]
        return acc

    def uniform_array(self, element, nu=0, rho=0, w=0, r=0, j=0, stream: int = 0) -> np.ndarray:
        h = self.hash64_array(element, nu, rho, w, r, j, stream)
        return (h >> _TOP53).astype(np.float64) * _INV_2_53

    def poisson1_array(self, element, nu=0, rho=0, w=0, r=0) -> np.ndarray:
        u = self.uniform_array(element, nu, rho, w, r, 0, STREAM_POISSON)
        return np.searchsorted(self.poisson_cdf, u, side="right")

    def fingerprint_array(self, element, nu=0, rho=0, w=0, r=0, j=0) -> np.ndarray:
        return self.hash64_array(element, nu, rho, w, r, j, STREAM_FINGERPRINT)

    def bucket_array(self, fps: np.ndarray, k: int) -> np.ndarray:
        if k < 1:
            raise ValidationError("bucket count must be positive")
        return (self.hash64_array(fps, stream=STREAM_BUCKET) % np.uint64(k)).astype(np.int64)
