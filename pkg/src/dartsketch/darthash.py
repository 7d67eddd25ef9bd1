"""Recover the first darts hitting a weighted set.

The weight-rank plane of each element is carved into dyadic regions: region
(nu, rho) spans weights [(2^nu - 1)/t, (2^(nu+1) - 1)/t) and ranks
[2^rho - 1, 2^(rho+1) - 1), and is split into 2^rho weight subdivisions and
2^nu rank subdivisions.  Each resulting area receives a Poisson(1) number of
darts whose exact positions come from per-area uniform draws, all keyed by
the area index so that different sets observe a consistent dart sequence.
Enumerating the areas below a rank limit and filtering darts against the
element weight yields exactly the darts hitting the set, in expected time
proportional to the number of darts plus a logarithmic per-element term.

The enumeration here is batch-oriented: per (nu, rho) region shape it
computes the surviving rectangle of areas for all elements at once, then
expands areas, Poisson counts, and dart positions as flat numpy arrays.
Every floating-point expression matches the scalar reference loop
(baselines.naive_darts) operation for operation, so the two
implementations agree tuple-for-tuple, not just statistically.
"""

from __future__ import annotations

import math

import numpy as np

from .core import Dart, ValidationError, WeightedSet
from .randomness import STREAM_U, STREAM_V, HashFamily

# Hard cap on enumerated areas per call; a legitimate call needs ~phi*t areas,
# so this only trips on wildly oversized rank limits.
MAX_AREAS_PER_CALL = 1 << 27

_POW2 = np.ldexp(1.0, np.arange(256)).astype(np.float64)  # exact powers of two
_CAND_DELTAS = (2.0, 1.0, 0.0, -1.0, -2.0)
_CAND_CLIP = float(1 << 40)


class DartBatch:
    """Column-oriented dart set: parallel arrays, one row per dart."""

    __slots__ = ("element", "nu", "rho", "w", "r", "j", "weight", "rank", "fingerprint")

    def __init__(self, element, nu, rho, w, r, j, weight, rank, fingerprint):
        self.element = element
        self.nu = nu
        self.rho = rho
        self.w = w
        self.r = r
        self.j = j
        self.weight = weight
        self.rank = rank
        self.fingerprint = fingerprint

    @property
    def size(self) -> int:
        return int(self.element.size)

    @classmethod
    def empty(cls) -> "DartBatch":
        return cls(
            np.empty(0, np.uint64), np.empty(0, np.uint16), np.empty(0, np.uint16),
            np.empty(0, np.uint32), np.empty(0, np.uint32), np.empty(0, np.uint16),
            np.empty(0, np.float64), np.empty(0, np.float64), np.empty(0, np.uint64))

    def take(self, indices) -> "DartBatch":
        return DartBatch(*(getattr(self, name)[indices] for name in self.__slots__))

    def index_sort_keys(self) -> tuple:
        """Lexsort keys ordering darts by index tuple, least significant first."""
        return (self.j, self.r, self.w, self.rho, self.nu, self.element)

    def to_darts(self) -> list[Dart]:
        rows = zip(self.element.tolist(), self.nu.tolist(), self.rho.tolist(),
                   self.w.tolist(), self.r.tolist(), self.j.tolist(),
                   self.weight.tolist(), self.rank.tolist(), self.fingerprint.tolist())
        return [Dart(*row) for row in rows]


def _largest_passing(quotient: float, limit_idx: int, origin: float, step: float,
                     bound: float) -> int:
    """Largest integer c in [0, limit_idx] with origin + c*step <= bound.

    `quotient` is a float estimate of the answer; the true value is within
    two of it because the comparison is monotone in c and each side carries
    at most a couple of ulps of rounding.
    """
    base = math.floor(min(quotient, float(min(limit_idx, 1 << 40))))
    for delta in (2, 1, 0, -1, -2):
        c = base + delta
        if c < 0 or c > limit_idx:
            continue
        if origin + c * step <= bound:
            return c
    return -1


class DartHasher:
    """Enumerates darts for weighted sets at a fixed density parameter t."""

    __slots__ = ("t", "hashes", "_tf")

    def __init__(self, t: int, hashes: HashFamily):
        t = int(t)
        if t < 1:
            raise ValidationError(f"density parameter t must be positive, got {t}")
        self.t = t
        self.hashes = hashes
        self._tf = float(t)

    def darts(self, x: WeightedSet, phi: float) -> list[Dart]:
        """All darts hitting x with normalized rank at most phi / ||x||_1.

        Expected count is phi * t.  Darts are returned unsorted.
        """
        phi = float(phi)
        if not phi > 0 or math.isinf(phi):
            raise ValidationError(f"phi must be positive and finite, got {phi}")
        self._check_set(x)
        return self.dart_batch(x, phi / x.l1).to_darts()

    def darts_below_rank(self, x: WeightedSet, rank_limit: float) -> list[Dart]:
        """All darts hitting x with rank at most an absolute limit.

        darts(x, phi) is equivalent to darts_below_rank(x, phi / ||x||_1);
        the absolute form lets two sets be cut at the same rank.
        """
        self._check_set(x)
        self._check_limit(rank_limit)
        return self.dart_batch(x, float(rank_limit)).to_darts()

    def _check_set(self, x: WeightedSet) -> None:
        if x.is_empty():
            raise ValidationError("cannot throw darts at an empty set")

    def _check_limit(self, rank_limit: float) -> None:
        if not rank_limit > 0 or math.isinf(rank_limit):
            raise ValidationError(f"rank limit must be positive and finite, got {rank_limit}")

    # -- batch enumeration --------------------------------------------------

    def dart_batch(self, x: WeightedSet, rank_limit: float) -> DartBatch:
        """Vectorized enumeration; the bulk interface used by the sketchers."""
        self._check_set(x)
        self._check_limit(rank_limit)
        t = self.t
        tf = self._tf
        limit = float(rank_limit)
        weights = x.weights
        ids = x.ids

        # Region depth per element; scalar math.log2 keeps the loop bounds
        # identical to the reference loop on every platform.
        depth = np.asarray(
            [math.floor(math.log2(1.0 + t * xi)) for xi in weights.tolist()],
            dtype=np.int64)
        rank_depth = math.floor(math.log2(1.0 + limit))
        max_depth = int(depth.max())
        if max_depth > 255 or rank_depth > 255:
            raise ValidationError("weights or rank limit outside the supported norm range")

        order = np.argsort(-depth, kind="stable")
        depth_asc_neg = -depth[order]  # ascending; prefix of length c has depth >= nu
        ids_order = ids[order]
        weights_order = weights[order]

        # Per-region accumulators (one region = one element at one (nu, rho)).
        parts_elem: list[np.ndarray] = []
        parts_xi: list[np.ndarray] = []
        parts_whi: list[np.ndarray] = []
        combo_nu: list[int] = []
        combo_rho: list[int] = []
        combo_rhi: list[int] = []
        combo_w0: list[float] = []
        combo_dnu: list[float] = []
        combo_r0: list[float] = []
        combo_drho: list[float] = []
        combo_len: list[int] = []

        for nu in range(max_depth + 1):
            cut = int(np.searchsorted(depth_asc_neg, -nu, side="right"))
            if cut == 0:
                break
            xi = weights_order[:cut]
            elem = ids_order[:cut]
            p2nu = _POW2[nu]
            for rho in range(rank_depth + 1):
                p2rho = _POW2[rho]
                w0 = (p2nu - 1.0) / tf
                r0 = p2rho - 1.0
                dnu = p2nu / (tf * p2rho)
                drho = p2rho / p2nu

                r_hi = _largest_passing(
                    (limit - r0) / drho if limit >= r0 else -1.0,
                    (1 << nu) - 1, r0, drho, limit)
                if r_hi < 0:
                    continue

                wmax = (1 << rho) - 1
                base = np.floor((xi - w0) / dnu)
                np.minimum(base, min(float(wmax), _CAND_CLIP), out=base)
                np.maximum(base, 0.0, out=base)
                w_hi = np.full(cut, -1.0)
                for delta in _CAND_DELTAS:
                    cand = base + delta
                    ok = (w_hi < 0.0) & (cand >= 0.0) & (cand <= wmax)
                    ok &= w0 + cand * dnu <= xi
                    np.copyto(w_hi, cand, where=ok)
                keep = w_hi >= 0.0
                n_keep = int(np.count_nonzero(keep))
                if n_keep == 0:
                    continue

                parts_elem.append(elem[keep])
                parts_xi.append(xi[keep])
                parts_whi.append(w_hi[keep].astype(np.int64))
                combo_nu.append(nu)
                combo_rho.append(rho)
                combo_rhi.append(r_hi)
                combo_w0.append(w0)
                combo_dnu.append(dnu)
                combo_r0.append(r0)
                combo_drho.append(drho)
                combo_len.append(n_keep)

        if not parts_elem:
            return DartBatch.empty()

        sizes = np.asarray(combo_len, dtype=np.int64)
        reg_elem = np.concatenate(parts_elem)
        reg_xi = np.concatenate(parts_xi)
        reg_whi = np.concatenate(parts_whi)
        reg_nu = np.repeat(np.asarray(combo_nu, dtype=np.uint16), sizes)
        reg_rho = np.repeat(np.asarray(combo_rho, dtype=np.uint16), sizes)
        reg_rhi = np.repeat(np.asarray(combo_rhi, dtype=np.int64), sizes)
        reg_w0 = np.repeat(np.asarray(combo_w0, dtype=np.float64), sizes)
        reg_dnu = np.repeat(np.asarray(combo_dnu, dtype=np.float64), sizes)
        reg_r0 = np.repeat(np.asarray(combo_r0, dtype=np.float64), sizes)
        reg_drho = np.repeat(np.asarray(combo_drho, dtype=np.float64), sizes)

        counts_f = (reg_whi + 1).astype(np.float64) * (reg_rhi + 1).astype(np.float64)
        if float(counts_f.sum()) > MAX_AREAS_PER_CALL:
            raise ValidationError("rank limit enumerates too many areas for this density")
        counts = (reg_whi + 1) * (reg_rhi + 1)
        total = int(counts.sum())

        # Expand each region's (w_hi+1) x (r_hi+1) rectangle of areas.
        nregions = counts.size
        starts = np.zeros(nregions, dtype=np.int64)
        np.cumsum(counts[:-1], out=starts[1:])
        area_reg = np.repeat(np.arange(nregions, dtype=np.int64), counts)
        offs = np.arange(total, dtype=np.int64) - np.repeat(starts, counts)
        rcnt = reg_rhi[area_reg] + 1
        area_w = offs // rcnt
        area_r = offs - area_w * rcnt

        hashes = self.hashes
        a_elem = reg_elem[area_reg]
        a_nu = reg_nu[area_reg]
        a_rho = reg_rho[area_reg]
        n_darts = hashes.poisson1_array(a_elem, a_nu, a_rho, area_w, area_r)

        dart_total = int(n_darts.sum())
        if dart_total == 0:
            return DartBatch.empty()
        jstarts = np.zeros(total, dtype=np.int64)
        np.cumsum(n_darts[:-1], out=jstarts[1:])
        dart_area = np.repeat(np.arange(total, dtype=np.int64), n_darts)
        d_j = np.arange(dart_total, dtype=np.int64) - np.repeat(jstarts, n_darts)

        d_elem = a_elem[dart_area]
        d_nu = a_nu[dart_area]
        d_rho = a_rho[dart_area]
        d_w = area_w[dart_area]
        d_r = area_r[dart_area]
        d_reg = area_reg[dart_area]

        v = hashes.uniform_array(d_elem, d_nu, d_rho, d_w, d_r, d_j, STREAM_V)
        u = hashes.uniform_array(d_elem, d_nu, d_rho, d_w, d_r, d_j, STREAM_U)
        d_weight = reg_w0[d_reg] + (d_w.astype(np.float64) + v) * reg_dnu[d_reg]
        d_rank = reg_r0[d_reg] + (d_r.astype(np.float64) + u) * reg_drho[d_reg]

        hit = (d_weight <= reg_xi[d_reg]) & (d_rank <= limit)
        if not hit.any():
            return DartBatch.empty()
        d_elem = d_elem[hit]
        d_nu = d_nu[hit]
        d_rho = d_rho[hit]
        d_w = d_w[hit].astype(np.uint32)
        d_r = d_r[hit].astype(np.uint32)
        d_j = d_j[hit].astype(np.uint16)
        fingerprints = hashes.fingerprint_array(d_elem, d_nu, d_rho, d_w, d_r, d_j)
        return DartBatch(d_elem, d_nu, d_rho, d_w, d_r, d_j,
                         d_weight[hit], d_rank[hit], fingerprints)
