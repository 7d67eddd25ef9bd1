"""Weighted minwise hashing from simulated dart processes.

Recovers the first darts hitting a weighted set in time roughly linear in
the number of darts, and builds on that primitive: k independent weighted
minhashes, bottom-k sketches, one-bit compression, an ICWS baseline, an
(L, K) LSH index for weighted Jaccard search, and a benchmark CLI.
"""

from .annindex import LshIndex, LshParams, lsh_key, probe_classes, weight_class
from .baselines import (
    IcwsHashValue,
    IcwsSketcher,
    icws_estimate_jaccard,
    icws_minhash,
    naive_darts,
)
from .bench import (
    ExperimentConfig,
    gen_pair,
    gen_set,
    run_estimation_experiment,
    run_timing_experiment,
)
from .core import (
    Dart,
    SketchParams,
    ValidationError,
    WeightedSet,
    exact_jaccard,
    make_weighted_set,
    minhash_density,
)
from .darthash import DartBatch, DartHasher
from .randomness import HashFamily, derive_seed
from .sketching import (
    BottomKSketch,
    MinHashSketch,
    OneBitSketch,
    bottom_k,
    dart_minhash,
    dump_sketch,
    estimate_jaccard,
    estimate_jaccard_1bit,
    estimate_jaccard_bottom_k,
    iter_sketches,
    load_sketch,
    one_bit,
)

__version__ = "0.1.0"

__all__ = [
    "BottomKSketch",
    "Dart",
    "DartBatch",
    "DartHasher",
    "ExperimentConfig",
    "HashFamily",
    "IcwsHashValue",
    "IcwsSketcher",
    "LshIndex",
    "LshParams",
    "MinHashSketch",
    "OneBitSketch",
    "SketchParams",
    "ValidationError",
    "WeightedSet",
    "bottom_k",
    "dart_minhash",
    "derive_seed",
    "dump_sketch",
    "estimate_jaccard",
    "estimate_jaccard_1bit",
    "estimate_jaccard_bottom_k",
    "exact_jaccard",
    "gen_pair",
    "gen_set",
    "icws_estimate_jaccard",
    "icws_minhash",
    "iter_sketches",
    "load_sketch",
    "lsh_key",
    "make_weighted_set",
    "minhash_density",
    "naive_darts",
    "one_bit",
    "probe_classes",
    "run_estimation_experiment",
    "run_timing_experiment",
    "weight_class",
]
