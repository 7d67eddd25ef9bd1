"""(L, K) locality-sensitive hash index for weighted Jaccard similarity.

Points are partitioned into weight classes ||x||_1 in [2^c, 2^(c+1)) and
normalized by 2^c before hashing, so every indexed vector has unit-scale
weight.  Within a class, each point is stored in L tables keyed by the
fingerprints of its K smallest-rank darts per table; two same-class points
share a table key with probability J^K, independently across tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ValidationError, WeightedSet, exact_jaccard, read_sets
from .darthash import DartHasher
from .randomness import HashFamily

_MAX_PHI_STEPS = 64


@dataclass(frozen=True)
class LshParams:
    """L tables, K hashes per table, and the target similarity threshold j1."""

    L: int
    K: int
    j1: float = 0.5

    def __post_init__(self):
        if self.L < 1 or self.K < 1:
            raise ValidationError("L and K must be positive")
        if not 0.0 < self.j1 <= 1.0:
            raise ValidationError("j1 must lie in (0, 1]")


def weight_class(l1: float) -> int:
    """Exponent c with l1 in [2^c, 2^(c+1)); exact for all positive doubles."""
    if not l1 > 0:
        raise ValidationError("weight class requires a positive norm")
    _, exponent = math.frexp(l1)
    return exponent - 1


def probe_classes(l1: float, j1: float) -> list[int]:
    """Weight classes intersecting the half-open norm interval [j1*l1, l1/j1).

    A candidate with J >= j1 must have a norm ratio in [j1, 1/j1]; classes
    are probed over the half-open version of that interval, so a class whose
    left edge equals l1/j1 exactly is excluded.
    """
    lo = j1 * l1
    hi = l1 / j1
    c = weight_class(lo)
    out = []
    while math.ldexp(1.0, c) < hi:
        out.append(c)
        c += 1
    return out


def lsh_key(x: WeightedSet, params: LshParams, hashes: HashFamily) -> list[tuple[int, ...]]:
    """L table keys for x, each the K smallest-rank dart fingerprints of one
    of L independent dart sequences (density t = L*K), in ascending rank."""
    if x.is_empty():
        raise ValidationError("cannot key an empty set")
    hasher = DartHasher(params.L * params.K, hashes)
    for phi in range(1, _MAX_PHI_STEPS + 1):
        batch = hasher.dart_batch(x, phi / x.l1)
        if batch.size < params.L * params.K:
            continue
        buckets = hashes.bucket_array(batch.fingerprint, params.L)
        if np.bincount(buckets, minlength=params.L).min() < params.K:
            continue
        order = np.lexsort(batch.index_sort_keys() + (batch.rank, buckets))
        sorted_buckets = buckets[order]
        fps = batch.fingerprint[order]
        bounds = np.searchsorted(sorted_buckets, np.arange(params.L), side="left")
        return [tuple(fps[b:b + params.K].tolist()) for b in bounds.tolist()]
    raise RuntimeError("bucket filling did not converge; hash family is broken")


class LshIndex:
    """Near-neighbor index over weighted sets.

    Construction is single-writer; queries are read-only and may run
    concurrently with each other but not with inserts.
    """

    def __init__(self, params: LshParams, hashes: HashFamily, debug: bool = False):
        self.params = params
        self.hashes = hashes
        self._classes: dict[int, list[dict[int, list]]] = {}
        self._points: dict = {}
        self._debug_keys: dict | None = {} if debug else None

    def __len__(self) -> int:
        return len(self._points)

    def __contains__(self, point_id) -> bool:
        return point_id in self._points

    def point(self, point_id) -> WeightedSet:
        return self._points[point_id]

    def bulk_load(self, path) -> list[int]:
        """Insert every set from a text file (one per line, id:weight tokens).

        Points get consecutive integer ids starting after the current size;
        the assigned ids are returned in file order.
        """
        ids = []
        next_id = len(self._points)
        for x in read_sets(path):
            while next_id in self._points:
                next_id += 1
            self.insert(next_id, x)
            ids.append(next_id)
            next_id += 1
        return ids

    def insert(self, point_id, x: WeightedSet) -> None:
        """Index x under point_id in the weight class of its norm."""
        if point_id in self._points:
            raise ValidationError(f"duplicate point id {point_id!r}")
        if x.is_empty():
            raise ValidationError("cannot index an empty set")
        c = weight_class(x.l1)
        keys = lsh_key(x.scale_pow2(-c), self.params, self.hashes)
        tables = self._classes.setdefault(
            c, [{} for _ in range(self.params.L)])
        for table, key in zip(tables, keys):
            table.setdefault(self.hashes.mix64(key), []).append(point_id)
        self._points[point_id] = x
        if self._debug_keys is not None:
            self._debug_keys[point_id] = (c, keys)

    def query(self, q: WeightedSet) -> list[tuple[object, float]]:
        """Candidates colliding with q in any probed class, scored with exact
        Jaccard on the stored (unnormalized) vectors, best first."""
        if q.is_empty():
            raise ValidationError("cannot query with an empty set")
        candidates = set()
        for c in probe_classes(q.l1, self.params.j1):
            tables = self._classes.get(c)
            if tables is None:
                continue
            keys = lsh_key(q.scale_pow2(-c), self.params, self.hashes)
            for table, key in zip(tables, keys):
                hit = table.get(self.hashes.mix64(key))
                if hit:
                    candidates.update(hit)
        scored = [(point_id, exact_jaccard(q, self._points[point_id]))
                  for point_id in candidates]
        scored.sort(key=lambda item: (-item[1], item[0]))
        return scored
