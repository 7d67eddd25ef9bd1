"""Domain types shared by every module: weighted sets, darts, sketch parameters.

A weighted set is a sparse nonnegative vector stored as (id, weight) pairs
with cached L0/L1 norms.  Ids are 64-bit unsigned integers, weights are
positive doubles.  Sets are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_ID = 2**64 - 1


class ValidationError(ValueError):
    """Raised when input data violates a construction contract."""


class WeightedSet:
    """Immutable sparse vector of strictly positive weights with unique ids."""

    __slots__ = ("ids", "weights", "l1")

    def __init__(self, ids: np.ndarray, weights: np.ndarray, l1: float):
        self.ids = ids
        self.weights = weights
        self.l1 = l1

    @classmethod
    def from_arrays(cls, ids: np.ndarray, weights: np.ndarray) -> "WeightedSet":
        """Build from parallel arrays; zero weights must already be stripped."""
        ids = np.ascontiguousarray(ids, dtype=np.uint64)
        weights = np.ascontiguousarray(weights, dtype=np.float64)
        if ids.shape != weights.shape or ids.ndim != 1:
            raise ValidationError("ids and weights must be parallel 1-d arrays")
        if weights.size and not (np.isfinite(weights).all() and (weights > 0).all()):
            raise ValidationError("weights must be finite and strictly positive")
        if np.unique(ids).size != ids.size:
            raise ValidationError("duplicate element id")
        return cls(ids, weights, float(np.sum(weights)))

    @property
    def l0(self) -> int:
        return int(self.ids.size)

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.ids.tolist(), self.weights.tolist()))

    def is_empty(self) -> bool:
        return self.ids.size == 0

    def scale_pow2(self, exponent: int) -> "WeightedSet":
        """Return a copy with every weight multiplied by 2**exponent (exact)."""
        weights = np.ldexp(self.weights, exponent)
        return WeightedSet(self.ids, weights, float(np.sum(weights)))

    def __len__(self) -> int:
        return self.l0

    def __repr__(self) -> str:
        return f"WeightedSet(l0={self.l0}, l1={self.l1!r})"


def make_weighted_set(pairs) -> WeightedSet:
    """Validate (id, weight) pairs and build a WeightedSet.

    Zero-weight pairs are dropped; negative or non-finite weights and
    duplicate ids (after stripping) are rejected.
    """
    ids: list[int] = []
    weights: list[float] = []
    for entry in pairs:
        try:
            element, weight = entry
        except (TypeError, ValueError):
            raise ValidationError(f"expected (id, weight) pair, got {entry!r}") from None
        element = int(element)
        weight = float(weight)
        if not 0 <= element <= MAX_ID:
            raise ValidationError(f"element id {element} outside 64-bit range")
        if math.isnan(weight) or math.isinf(weight):
            raise ValidationError(f"weight for id {element} is not finite")
        if weight < 0:
            raise ValidationError(f"negative weight {weight} for id {element}")
        if weight == 0.0:
            continue
        ids.append(element)
        weights.append(weight)
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate element id")
    return WeightedSet(
        np.asarray(ids, dtype=np.uint64),
        np.asarray(weights, dtype=np.float64),
        float(np.sum(np.asarray(weights, dtype=np.float64))) if weights else 0.0,
    )


def exact_jaccard(x: WeightedSet, y: WeightedSet) -> float:
    """Weighted Jaccard similarity: sum of minima over sum of maxima.

    Symmetric, in [0, 1].  Undefined (raises) when both sets are empty.
    """
    if x.is_empty() and y.is_empty():
        raise ValidationError("Jaccard similarity is undefined for two empty sets")
    xmap = dict(zip(x.ids.tolist(), x.weights.tolist()))
    ymap = dict(zip(y.ids.tolist(), y.weights.tolist()))
    min_sum = 0.0
    max_sum = 0.0
    # canonical union order makes the result bitwise symmetric in (x, y)
    for element in sorted(xmap.keys() | ymap.keys()):
        wx = xmap.get(element, 0.0)
        wy = ymap.get(element, 0.0)
        min_sum += min(wx, wy)
        max_sum += max(wx, wy)
    return min_sum / max_sum


@dataclass(frozen=True)
class Dart:
    """A single hit of the random dart sequence on a weighted set.

    (element, nu, rho, w, r, j) is the full area index tuple: region
    coordinates (nu, rho), area cell (w, r) within the region, and the dart
    ordinal j within the area.  weight/rank are the dart's position in the
    weight-rank plane, and fingerprint is a 64-bit token that is a pure
    function of the index tuple and the hash family seed.
    """

    element: int
    nu: int
    rho: int
    w: int
    r: int
    j: int
    weight: float
    rank: float
    fingerprint: int

    @property
    def index(self) -> tuple[int, int, int, int, int, int]:
        """Index tuple used for identity and deterministic tie-breaking."""
        return (self.element, self.nu, self.rho, self.w, self.r, self.j)


def minhash_density(k: int) -> int:
    """Dart density parameter for k independent minhashes: ceil(k ln k) + k."""
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    if k == 1:
        return 1
    return math.ceil(k * math.log(k)) + k


@dataclass(frozen=True)
class SketchParams:
    """Sketch configuration: hash count k, dart density t, family seed."""

    k: int
    t: int
    seed: int

    def __post_init__(self):
        if self.k < 1 or self.t < 1:
            raise ValidationError("k and t must be positive")

    @classmethod
    def for_minhash(cls, k: int, seed: int) -> "SketchParams":
        return cls(k=k, t=minhash_density(k), seed=seed)


def format_set(x: WeightedSet) -> str:
    """One-line text form: space-separated id:weight tokens."""
    return " ".join(f"{i}:{w!r}" for i, w in zip(x.ids.tolist(), x.weights.tolist()))


def parse_set(line: str) -> WeightedSet:
    """Parse the one-line text form produced by format_set."""
    pairs = []
    for token in line.split():
        element, sep, weight = token.partition(":")
        if not sep:
            raise ValidationError(f"malformed token {token!r}: expected id:weight")
        try:
            pairs.append((int(element), float(weight)))
        except ValueError:
            raise ValidationError(f"malformed token {token!r}: expected id:weight") from None
    return make_weighted_set(pairs)


def read_sets(path) -> list[WeightedSet]:
    """Read one set per line from a text file; blank lines are skipped."""
    sets = []
    with open(path, "r", encoding="ascii") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                sets.append(parse_set(line))
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    return sets


def write_sets(path, sets) -> None:
    with open(path, "w", encoding="ascii") as handle:
        for x in sets:
            handle.write(format_set(x) + "\n")
