"""User-facing sketches built from darts, plus estimators and serialization.

k independent minhashes come from hashing darts into k buckets and keeping
the minimum-rank dart per bucket, growing the rank horizon until every
bucket is filled.  Bottom-k sketches keep the k first darts outright.
One-bit sketches compress each minhash value to its lowest bit.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .core import Dart, ValidationError, WeightedSet, minhash_density
from .darthash import DartBatch, DartHasher
from .randomness import HashFamily

# The chance that any bucket is still empty after step phi decays like
# e^-phi, so this cap is unreachable in practice.
_MAX_PHI_STEPS = 64


@dataclass(eq=False)
class MinHashSketch:
    """k independent 64-bit minhash values of one weighted set."""

    values: np.ndarray
    k: int
    seed: int

    def __eq__(self, other):
        return (isinstance(other, MinHashSketch) and self.k == other.k
                and self.seed == other.seed and np.array_equal(self.values, other.values))

    def __len__(self) -> int:
        return self.k


@dataclass(eq=False)
class BottomKSketch:
    """The k smallest-rank darts hitting a set, ascending by rank."""

    darts: list[Dart]
    k: int
    seed: int

    @property
    def fingerprints(self) -> np.ndarray:
        return np.asarray([d.fingerprint for d in self.darts], dtype=np.uint64)

    def __eq__(self, other):
        return (isinstance(other, BottomKSketch) and self.k == other.k
                and self.seed == other.seed and self.darts == other.darts)

    def __len__(self) -> int:
        return self.k


@dataclass(eq=False)
class OneBitSketch:
    """One bit per minhash value (the fingerprint's lowest bit)."""

    bits: np.ndarray
    k: int
    seed: int

    def __eq__(self, other):
        return (isinstance(other, OneBitSketch) and self.k == other.k
                and self.seed == other.seed and np.array_equal(self.bits, other.bits))

    def __len__(self) -> int:
        return self.k


@dataclass(frozen=True)
class BottomKFingerprints:
    """Deserialized bottom-k record: rank-ordered dart fingerprints only."""

    values: np.ndarray = field(compare=False)
    k: int = 0
    seed: int = 0


def _check_sketchable(x: WeightedSet, k: int) -> None:
    if x.is_empty():
        raise ValidationError("cannot sketch an empty set")
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")


def _bucket_minima(batch: DartBatch, buckets: np.ndarray, k: int) -> np.ndarray:
    """Fingerprint of the minimum-rank dart per bucket; rank ties break by
    lexicographic index tuple order."""
    order = np.lexsort(batch.index_sort_keys() + (batch.rank, buckets))
    sorted_buckets = buckets[order]
    first = np.searchsorted(sorted_buckets, np.arange(k), side="left")
    return batch.fingerprint[order[first]]


def _minhash_values(x: WeightedSet, k: int, hashes: HashFamily) -> tuple[np.ndarray, int]:
    """Minhash values plus the number of rank-horizon steps taken."""
    hasher = DartHasher(minhash_density(k), hashes)
    for phi in range(1, _MAX_PHI_STEPS + 1):
        batch = hasher.dart_batch(x, phi / x.l1)
        if batch.size < k:
            continue
        buckets = hashes.bucket_array(batch.fingerprint, k)
        if np.bincount(buckets, minlength=k).all():
            return _bucket_minima(batch, buckets, k), phi
    raise RuntimeError("bucket filling did not converge; hash family is broken")


def dart_minhash(x: WeightedSet, k: int, hashes: HashFamily) -> MinHashSketch:
    """k independent weighted minhash values of x.

    Per coordinate, two sketches built with the same seed collide with
    probability equal to the weighted Jaccard similarity of their sets.
    """
    _check_sketchable(x, k)
    values, _ = _minhash_values(x, k, hashes)
    return MinHashSketch(values, k, hashes.seed)


def _bottom_indices(batch: DartBatch, k: int, limit: float) -> list[int]:
    """Indices of the k smallest-rank darts via a bucket sort on rank."""
    n = batch.size
    scale = n / limit
    buckets: list[list[int]] = [[] for _ in range(n)]
    ranks = batch.rank.tolist()
    for i, rank in enumerate(ranks):
        b = int(rank * scale)
        buckets[b if b < n else n - 1].append(i)
    elements = batch.element.tolist()
    nus = batch.nu.tolist()
    rhos = batch.rho.tolist()
    ws = batch.w.tolist()
    rs = batch.r.tolist()
    js = batch.j.tolist()
    out: list[int] = []
    for bucket in buckets:
        if len(bucket) > 1:
            bucket.sort(key=lambda i: (ranks[i], elements[i], nus[i], rhos[i], ws[i], rs[i], js[i]))
        out.extend(bucket)
        if len(out) >= k:
            break
    return out[:k]


def bottom_k(x: WeightedSet, k: int, hashes: HashFamily) -> BottomKSketch:
    """The first k darts hitting x, in ascending rank order (density t = k)."""
    _check_sketchable(x, k)
    hasher = DartHasher(k, hashes)
    for phi in range(1, _MAX_PHI_STEPS + 1):
        limit = phi / x.l1
        batch = hasher.dart_batch(x, limit)
        if batch.size >= k:
            chosen = _bottom_indices(batch, k, limit)
            return BottomKSketch(batch.take(chosen).to_darts(), k, hashes.seed)
    raise RuntimeError("dart accumulation did not converge; hash family is broken")


def one_bit(sketch: MinHashSketch) -> OneBitSketch:
    """Compress each minhash value to its lowest bit."""
    bits = (sketch.values & np.uint64(1)).astype(np.uint8)
    return OneBitSketch(bits, sketch.k, sketch.seed)


def _check_comparable(a, b) -> None:
    if a.k != b.k:
        raise ValidationError(f"sketch lengths differ: {a.k} != {b.k}")
    if a.seed != b.seed:
        raise ValidationError("sketches built with different seeds are not comparable")


def estimate_jaccard(a: MinHashSketch, b: MinHashSketch) -> float:
    """Fraction of colliding coordinates; k * estimate ~ Binomial(k, J)."""
    _check_comparable(a, b)
    return float(np.mean(a.values == b.values))


def estimate_jaccard_1bit(a: OneBitSketch, b: OneBitSketch, clamp: bool = True) -> float:
    """Invert the one-bit collision law (1 + J)/2.

    With clamp=False the raw value is returned, which can be negative for
    dissimilar sets and is the right input for statistical tests.
    """
    _check_comparable(a, b)
    agreement = float(np.mean(a.bits == b.bits))
    estimate = 2.0 * agreement - 1.0
    if clamp:
        estimate = min(1.0, max(0.0, estimate))
    return estimate


def estimate_jaccard_bottom_k(a: BottomKSketch, b: BottomKSketch) -> float:
    """Bottom-k estimate: fraction of the union's first k darts present in both."""
    _check_comparable(a, b)
    seen_a = {d.index for d in a.darts}
    seen_b = {d.index for d in b.darts}
    merged = {d.index: d.rank for d in a.darts}
    for d in b.darts:
        merged[d.index] = d.rank
    union_bottom = sorted(merged.items(), key=lambda kv: (kv[1], kv[0]))[:a.k]
    shared = sum(1 for index, _ in union_bottom if index in seen_a and index in seen_b)
    return shared / a.k


# -- serialization ----------------------------------------------------------
#
# Little-endian fixed-width records: header (magic, version, kind, k, seed)
# followed by k 64-bit fingerprints, or ceil(k/8) bytes for one-bit sketches
# (bit j is byte j//8, LSB first).

SKETCH_MAGIC = b"DSK1"
SKETCH_VERSION = 1
KIND_MINHASH = 1
KIND_ONEBIT = 2
KIND_BOTTOMK = 3
_HEADER = struct.Struct("<4sBBHIQ")  # magic, version, kind, reserved, k, seed


def dump_sketch(sketch) -> bytes:
    """Serialize a sketch to bytes; records are self-delimiting."""
    if isinstance(sketch, MinHashSketch):
        kind, payload = KIND_MINHASH, sketch.values.astype("<u8").tobytes()
    elif isinstance(sketch, OneBitSketch):
        kind, payload = KIND_ONEBIT, np.packbits(sketch.bits, bitorder="little").tobytes()
    elif isinstance(sketch, (BottomKSketch, BottomKFingerprints)):
        values = sketch.fingerprints if isinstance(sketch, BottomKSketch) else sketch.values
        kind, payload = KIND_BOTTOMK, values.astype("<u8").tobytes()
    else:
        raise ValidationError(f"cannot serialize object of type {type(sketch).__name__}")
    header = _HEADER.pack(SKETCH_MAGIC, SKETCH_VERSION, kind, 0, sketch.k, sketch.seed)
    return header + payload


def _payload_size(kind: int, k: int) -> int:
    return (k + 7) // 8 if kind == KIND_ONEBIT else 8 * k


def load_sketch(data: bytes, offset: int = 0):
    """Deserialize one sketch record starting at offset."""
    sketch, _ = _load_record(data, offset)
    return sketch


def iter_sketches(data: bytes):
    """Yield every sketch in a concatenated record stream."""
    offset = 0
    while offset < len(data):
        sketch, offset = _load_record(data, offset)
        yield sketch


def _load_record(data: bytes, offset: int):
    if len(data) - offset < _HEADER.size:
        raise ValidationError("truncated sketch record")
    magic, version, kind, _, k, seed = _HEADER.unpack_from(data, offset)
    if magic != SKETCH_MAGIC:
        raise ValidationError(f"bad sketch magic {magic!r}")
    if version != SKETCH_VERSION:
        raise ValidationError(f"unsupported sketch version {version}")
    offset += _HEADER.size
    size = _payload_size(kind, k)
    if len(data) - offset < size:
        raise ValidationError("truncated sketch payload")
    payload = data[offset:offset + size]
    offset += size
    if kind == KIND_MINHASH:
        values = np.frombuffer(payload, dtype="<u8").astype(np.uint64)
        return MinHashSketch(values, k, seed), offset
    if kind == KIND_ONEBIT:
        bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8),
                             count=k, bitorder="little")
        return OneBitSketch(bits, k, seed), offset
    if kind == KIND_BOTTOMK:
        values = np.frombuffer(payload, dtype="<u8").astype(np.uint64)
        return BottomKFingerprints(values, k, seed), offset
    raise ValidationError(f"unknown sketch kind {kind}")
