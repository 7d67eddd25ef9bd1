"""Shared test utilities: goodness-of-fit checks and scalar oracles."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from dartsketch import Dart
from dartsketch.randomness import STREAM_U, STREAM_V


def chi2_gof_pvalue(samples, pmf, support) -> float:
    """Chi-square goodness-of-fit p-value against a discrete distribution.

    Bins with expected count below 5 are merged left to right; mass outside
    the given support is folded into the edge bins.
    """
    samples = np.asarray(samples)
    n = samples.size
    support = np.asarray(support)
    lo, hi = int(support[0]), int(support[-1])
    clipped = np.clip(samples, lo, hi)
    counts = np.bincount(clipped - lo, minlength=hi - lo + 1).astype(float)
    probs = np.asarray([pmf(int(v)) for v in support], dtype=float)
    probs[0] += max(0.0, 1.0 - probs.sum())  # tail mass below/above support
    expected = probs * n
    expected[-1] += max(0.0, n - expected.sum())

    merged_obs: list[float] = []
    merged_exp: list[float] = []
    acc_obs = acc_exp = 0.0
    for o, e in zip(counts, expected):
        acc_obs += o
        acc_exp += e
        if acc_exp >= 5.0:
            merged_obs.append(acc_obs)
            merged_exp.append(acc_exp)
            acc_obs = acc_exp = 0.0
    if acc_exp > 0.0 and merged_exp:
        merged_obs[-1] += acc_obs
        merged_exp[-1] += acc_exp
    merged_obs = np.asarray(merged_obs)
    merged_exp = np.asarray(merged_exp)
    merged_exp *= merged_obs.sum() / merged_exp.sum()
    chi2 = float(((merged_obs - merged_exp) ** 2 / merged_exp).sum())
    dof = merged_obs.size - 1
    if dof < 1:
        return 1.0
    return float(stats.chi2.sf(chi2, dof))


def naive_darts_below_rank(x, rank_limit: float, t: int, hashes) -> list[Dart]:
    """Scalar enumeration with an absolute rank limit (test-side oracle)."""
    limit = float(rank_limit)
    darts = []
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
                        for j in range(hashes.poisson1((element, nu, rho, w, r))):
                            key = (element, nu, rho, w, r, j)
                            weight = w0 + (w + hashes.uniform(key, STREAM_V)) * dnu
                            rank = r0 + (r + hashes.uniform(key, STREAM_U)) * drho
                            if weight <= xi and rank <= limit:
                                darts.append(Dart(element, nu, rho, w, r, j, weight,
                                                  rank, hashes.fingerprint(key)))
    return darts


def mt_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.MT19937(np.random.SeedSequence(seed)))
