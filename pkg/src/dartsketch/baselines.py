"""Reference algorithms: a naive dart-enumeration oracle and ICWS.

naive_darts is a straight-line transcription of the region/area loops with
no precomputation; it is the correctness gate for the optimized enumerator.
IcwsSketcher implements Ioffe-style consistent weighted sampling as a
baseline for cross-algorithm agreement and timing comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Dart, ValidationError, WeightedSet
from .randomness import (
    STREAM_ICWS_BETA,
    STREAM_ICWS_C1,
    STREAM_ICWS_C2,
    STREAM_ICWS_FINGERPRINT,
    STREAM_ICWS_R1,
    STREAM_ICWS_R2,
    STREAM_U,
    STREAM_V,
    HashFamily,
)

# Cap on cells hashed per vectorized block; keeps the working set of the
# per-block matrices cache-resident so cost stays proportional to k * l0.
_ICWS_BLOCK_CELLS = 1 << 14


def naive_darts(x: WeightedSet, phi: float, t: int, hashes: HashFamily) -> list[Dart]:
    """Literal scalar enumeration of every dart with rank <= phi / ||x||_1.

    Intentionally unoptimized: iterates every region and area one by one,
    relying only on the loop break conditions.  Output must equal
    DartHasher(t, hashes).darts(x, phi) tuple for tuple.
    """
    if x.is_empty():
        raise ValidationError("cannot throw darts at an empty set")
    phi = float(phi)
    if not phi > 0 or math.isinf(phi):
        raise ValidationError(f"phi must be positive and finite, got {phi}")
    if t < 1:
        raise ValidationError(f"density parameter t must be positive, got {t}")
    limit = phi / x.l1
    darts: list[Dart] = []
    for element, xi in zip(x.ids.tolist(), x.weights.tolist()):
        for nu in range(math.floor(math.log2(1.0 + t * xi)) + 1):
            for rho in range(math.floor(math.log2(1.0 + limit)) + 1):
                w0 = (2.0**nu - 1.0) / t
                r0 = 2.0**rho - 1.0
                dnu = 2.0**nu / (t * 2.0**rho)
                drho = 2.0**rho / 2.0**nu
                for w in range(2**rho):
                    if xi < w0 + w * dnu:
                        break
                    for r in range(2**nu):
                        if limit < r0 + r * drho:
                            break
                        count = hashes.poisson1((element, nu, rho, w, r))
                        for j in range(count):
                            key = (element, nu, rho, w, r, j)
                            v = hashes.uniform(key, STREAM_V)
                            u = hashes.uniform(key, STREAM_U)
                            weight = w0 + (w + v) * dnu
                            rank = r0 + (r + u) * drho
                            if weight <= xi and rank <= limit:
                                darts.append(Dart(element, nu, rho, w, r, j,
                                                  weight, rank, hashes.fingerprint(key)))
    return darts


@dataclass(frozen=True)
class IcwsHashValue:
    """A consistent weighted sample: element id plus quantized log-weight tick."""

    element: int
    tick: int


class IcwsSketcher:
    """Ioffe consistent weighted sampling with HashFamily-backed randomness.

    Per coordinate and element, r and c are Gamma(2,1) draws (sum of two
    exponentials) and beta is uniform, all keyed by (element, coordinate) so
    sketches of different sets are consistent.  The fast variant computes
    log(x_i) once per set instead of once per coordinate; outputs are
    identical.
    """

    __slots__ = ("k", "hashes", "fast")

    def __init__(self, k: int, hashes: HashFamily, fast: bool = False):
        if k < 1:
            raise ValidationError(f"k must be positive, got {k}")
        self.k = k
        self.hashes = hashes
        self.fast = fast

    @property
    def seed(self) -> int:
        return self.hashes.seed

    def minhash(self, x: WeightedSet) -> list[IcwsHashValue]:
        if x.is_empty():
            raise ValidationError("cannot sketch an empty set")
        n = x.l0
        ids = x.ids
        log_weights = np.log(x.weights) if self.fast else None
        block = max(1, _ICWS_BLOCK_CELLS // n)
        values: list[IcwsHashValue] = []
        for j_lo in range(0, self.k, block):
            j_hi = min(j_lo + block, self.k)
            rows = j_hi - j_lo
            elem = np.broadcast_to(ids, (rows, n))
            coord = np.broadcast_to(
                np.arange(j_lo, j_hi, dtype=np.uint64)[:, None], (rows, n))
            draw = self.hashes.uniform_array
            r = -(np.log1p(-draw(elem, w=coord, stream=STREAM_ICWS_R1))
                  + np.log1p(-draw(elem, w=coord, stream=STREAM_ICWS_R2)))
            c = -(np.log1p(-draw(elem, w=coord, stream=STREAM_ICWS_C1))
                  + np.log1p(-draw(elem, w=coord, stream=STREAM_ICWS_C2)))
            beta = draw(elem, w=coord, stream=STREAM_ICWS_BETA)
            if self.fast:
                lnx = log_weights
            else:
                lnx = np.log(np.broadcast_to(x.weights, (rows, n)))
            tick = np.floor(lnx / r + beta)
            ln_y = r * (tick - beta)
            ln_a = np.log(c) - ln_y - r
            winner = np.argmin(ln_a, axis=1)
            win_ids = ids[winner].tolist()
            win_ticks = tick[np.arange(rows), winner].tolist()
            values.extend(IcwsHashValue(e, int(t)) for e, t in zip(win_ids, win_ticks))
        return values


def icws_minhash(x: WeightedSet, k: int, hashes: HashFamily,
                 fast: bool = False) -> list[IcwsHashValue]:
    """k consistent weighted samples of x; coordinate j depends only on (seed, j)."""
    return IcwsSketcher(k, hashes, fast=fast).minhash(x)


def icws_estimate_jaccard(a: list[IcwsHashValue], b: list[IcwsHashValue]) -> float:
    """Fraction of coordinates whose (element, tick) samples collide."""
    if len(a) != len(b):
        raise ValidationError("sketch lengths differ")
    return sum(u == v for u, v in zip(a, b)) / len(a)


def icws_fingerprints(values: list[IcwsHashValue], hashes: HashFamily) -> np.ndarray:
    """64-bit fingerprints of ICWS samples, equal iff the samples are equal."""
    out = np.empty(len(values), dtype=np.uint64)
    for pos, value in enumerate(values):
        tick = value.tick & 0xFFFFFFFFFFFFFFFF
        out[pos] = hashes.hash64(value.element, w=tick & 0xFFFFFFFF,
                                 r=tick >> 32, stream=STREAM_ICWS_FINGERPRINT)
    return out
