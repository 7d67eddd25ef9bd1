"""Synthetic data generation and the estimation/timing experiments.

Synthetic sets are scaled random points of the probability simplex assigned
to random 64-bit element ids.  Pairs with an exact target Jaccard
similarity come from shrinking one set by b = 2J/(1+J) and giving the freed
mass to one fresh element, which preserves the L1 norm.
"""

from __future__ import annotations

import csv
import math
import sys
import time
from dataclasses import dataclass
from statistics import median
from typing import NamedTuple

import numpy as np

from .baselines import IcwsSketcher, icws_estimate_jaccard
from .core import ValidationError, WeightedSet
from .randomness import HashFamily, derive_seed
from .sketching import (
    bottom_k,
    dart_minhash,
    estimate_jaccard,
    estimate_jaccard_bottom_k,
)

ALGORITHMS = ("dartminhash", "icws", "icws-fast", "bottomk")

ESTIMATION_COLUMNS = ("k", "target_j", "estimate", "in_ci")
TIMING_COLUMNS = ("algorithm", "k", "l0", "l1", "mean_ms")


class EstimationRow(NamedTuple):
    k: int
    target_j: float
    estimate: float
    in_ci: int


class TimingRow(NamedTuple):
    algorithm: str
    k: int
    l0: int
    l1: float
    mean_ms: float


@dataclass
class ExperimentConfig:
    """One experiment cell; defaults match the common benchmark setting."""

    algorithm: str = "dartminhash"
    k: int = 256
    l0: int = 256
    l1: float = 1.0
    pairs: int = 100
    target_j: float = 0.5
    seed: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValidationError(f"unknown algorithm {self.algorithm!r}")
        if self.k < 1 or self.l0 < 1 or self.pairs < 1:
            raise ValidationError("k, l0 and pairs must be positive")
        if not self.l1 > 0:
            raise ValidationError("l1 must be positive")
        if not 0.0 < self.target_j < 1.0:
            raise ValidationError("target_j must lie in (0, 1)")


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.MT19937(np.random.SeedSequence(seed)))


def gen_set(l0: int, l1: float, seed) -> WeightedSet:
    """Random weighted set with exactly l0 entries and L1 norm l1.

    Weights are a uniform draw from the (l0-1)-simplex scaled to l1;
    element ids are distinct uniform 64-bit integers.
    """
    if l0 < 1:
        raise ValidationError("l0 must be positive")
    if not l1 > 0:
        raise ValidationError("l1 must be positive")
    rng = _rng(seed)
    ids = rng.integers(0, 2**64, size=l0, dtype=np.uint64)
    while np.unique(ids).size != l0:
        ids = rng.integers(0, 2**64, size=l0, dtype=np.uint64)
    expo = -np.log1p(-rng.random(l0))
    while not (expo > 0).all():  # u == 0 draws are astronomically rare
        expo = -np.log1p(-rng.random(l0))
    weights = expo / expo.sum() * l1
    return WeightedSet.from_arrays(ids, weights)


def gen_pair(x: WeightedSet, target_j: float, seed) -> WeightedSet:
    """Companion set with exact_jaccard(x, result) == target_j and equal norm.

    Solving J = b/(2-b) gives b = 2J/(1+J): the companion keeps b*x plus one
    fresh element carrying the remaining (1-b) fraction of the norm.
    """
    if x.is_empty():
        raise ValidationError("cannot derive a pair from an empty set")
    if not 0.0 < target_j < 1.0:
        raise ValidationError("target_j must lie in (0, 1)")
    rng = _rng(seed)
    b = 2.0 * target_j / (1.0 + target_j)
    existing = set(x.ids.tolist())
    fresh = int(rng.integers(0, 2**64, dtype=np.uint64))
    while fresh in existing:
        fresh = int(rng.integers(0, 2**64, dtype=np.uint64))
    ids = np.concatenate([x.ids, np.asarray([fresh], dtype=np.uint64)])
    weights = np.concatenate([x.weights * b, [(1.0 - b) * x.l1]])
    return WeightedSet.from_arrays(ids, weights)


def sketch_and_estimate(algorithm: str, x: WeightedSet, y: WeightedSet,
                        k: int, hashes: HashFamily) -> float:
    if algorithm == "dartminhash":
        return estimate_jaccard(dart_minhash(x, k, hashes), dart_minhash(y, k, hashes))
    if algorithm in ("icws", "icws-fast"):
        sketcher = IcwsSketcher(k, hashes, fast=algorithm == "icws-fast")
        return icws_estimate_jaccard(sketcher.minhash(x), sketcher.minhash(y))
    if algorithm == "bottomk":
        return estimate_jaccard_bottom_k(bottom_k(x, k, hashes), bottom_k(y, k, hashes))
    raise ValidationError(f"unknown algorithm {algorithm!r}")


def run_estimation_experiment(config: ExperimentConfig) -> list[EstimationRow]:
    """Fresh pair and fresh hash seed per trial; flags whether the estimate
    falls inside the 95% binomial confidence interval around the target."""
    ci = 1.96 * math.sqrt(config.target_j * (1.0 - config.target_j) / config.k)
    rows = []
    for trial in range(config.pairs):
        rng = _rng(derive_seed(config.seed, trial, 0))
        x = gen_set(config.l0, config.l1, rng)
        y = gen_pair(x, config.target_j, rng)
        hashes = HashFamily(derive_seed(config.seed, trial, 1))
        estimate = sketch_and_estimate(config.algorithm, x, y, config.k, hashes)
        rows.append(EstimationRow(config.k, config.target_j, estimate,
                                  int(abs(estimate - config.target_j) <= ci)))
    return rows


def _sketcher(algorithm: str, k: int, hashes: HashFamily):
    if algorithm == "dartminhash":
        return lambda x: dart_minhash(x, k, hashes)
    if algorithm in ("icws", "icws-fast"):
        return IcwsSketcher(k, hashes, fast=algorithm == "icws-fast").minhash
    if algorithm == "bottomk":
        return lambda x: bottom_k(x, k, hashes)
    raise ValidationError(f"unknown algorithm {algorithm!r}")


def median_of_means(samples: list[float], groups: int = 5) -> float:
    """Robust location estimate: median over group means."""
    if not samples:
        raise ValidationError("no samples")
    groups = max(1, min(groups, len(samples)))
    size = len(samples) / groups
    means = []
    for g in range(groups):
        chunk = samples[round(g * size):round((g + 1) * size)]
        means.append(sum(chunk) / len(chunk))
    return median(means)


def run_timing_experiment(cells, sets_per_cell: int = 100, warmup: int = 3,
                          seed: int = 1) -> list[TimingRow]:
    """Wall-clock sketching time per cell (algorithm, k, l0, l1).

    Each cell times `sets_per_cell` fresh sets on a monotonic clock after
    warm-up sketches that are excluded from the result; the reported value
    is a median-of-means in milliseconds.  Cells run sequentially.
    """
    rows = []
    for index, (algorithm, k, l0, l1) in enumerate(cells):
        if algorithm not in ALGORITHMS:
            raise ValidationError(f"unknown algorithm {algorithm!r}")
        rng = _rng(derive_seed(seed, index, 0))
        hashes = HashFamily(derive_seed(seed, index, 1))
        build = _sketcher(algorithm, k, hashes)
        sets = [gen_set(l0, l1, rng) for _ in range(sets_per_cell)]
        for x in sets[:warmup]:
            build(x)
        elapsed = []
        for x in sets:
            start = time.perf_counter()
            build(x)
            elapsed.append(time.perf_counter() - start)
        rows.append(TimingRow(algorithm, k, l0, l1, median_of_means(elapsed) * 1e3))
    return rows


def write_csv(rows, columns, seed: int, out: str | None) -> None:
    """Write rows with a header line, echoing the seed as a comment line.

    `out` of None or "-" writes to stdout.  Timing values are rendered with
    three significant digits; other floats keep full precision.
    """
    handle = sys.stdout if out in (None, "-") else open(out, "w", newline="", encoding="ascii")
    try:
        handle.write(f"# seed={seed}\n")
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_render(name, value) for name, value in zip(columns, row)])
    except OSError as exc:
        raise ValidationError(f"cannot write {out!r}: {exc}") from exc
    finally:
        if handle is not sys.stdout:
            handle.close()


def _render(name: str, value) -> str:
    if name == "mean_ms":
        return f"{value:.3g}"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)
