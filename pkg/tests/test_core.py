import numpy as np
import pytest

from dartsketch import (
    SketchParams,
    ValidationError,
    exact_jaccard,
    make_weighted_set,
    minhash_density,
)
from dartsketch.core import format_set, parse_set, read_sets, write_sets

from helpers import mt_rng


def test_make_weighted_set_basic():
    x = make_weighted_set([(7, 0.5), (9, 0.5)])
    assert x.l0 == 2
    assert x.l1 == 1.0
    assert x.entries == [(7, 0.5), (9, 0.5)]


def test_zero_weights_stripped():
    x = make_weighted_set([(7, 0.5), (9, 0.0)])
    assert x.l0 == 1
    assert x.l1 == 0.5


def test_negative_weight_rejected():
    with pytest.raises(ValidationError):
        make_weighted_set([(7, -1.0)])


def test_duplicate_id_rejected():
    with pytest.raises(ValidationError):
        make_weighted_set([(7, 0.5), (7, 0.25)])


def test_non_finite_weight_rejected():
    with pytest.raises(ValidationError):
        make_weighted_set([(1, float("nan"))])
    with pytest.raises(ValidationError):
        make_weighted_set([(1, float("inf"))])


def test_id_range_checked():
    with pytest.raises(ValidationError):
        make_weighted_set([(2**64, 1.0)])
    with pytest.raises(ValidationError):
        make_weighted_set([(-1, 1.0)])


def test_empty_set_constructible():
    x = make_weighted_set([])
    assert x.is_empty()
    assert x.l0 == 0 and x.l1 == 0.0


def test_norms_recompute_consistently():
    rng = mt_rng(11)
    for _ in range(20):
        n = int(rng.integers(1, 50))
        pairs = list(zip(rng.choice(10**6, size=n, replace=False).tolist(),
                         rng.random(n).tolist()))
        x = make_weighted_set(pairs)
        assert x.l0 == len(x.ids)
        assert x.l1 == float(np.sum(x.weights))


def test_exact_jaccard_identity():
    x = make_weighted_set([(1, 0.3), (2, 0.7)])
    assert exact_jaccard(x, x) == 1.0


def test_exact_jaccard_disjoint():
    x = make_weighted_set([(1, 1.0)])
    y = make_weighted_set([(2, 1.0)])
    assert exact_jaccard(x, y) == 0.0


def test_exact_jaccard_partial_overlap():
    x = make_weighted_set([(10, 1.0)])
    y = make_weighted_set([(10, 0.5), (11, 0.5)])
    assert exact_jaccard(x, y) == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_exact_jaccard_both_empty_rejected():
    e = make_weighted_set([])
    with pytest.raises(ValidationError):
        exact_jaccard(e, e)


def test_exact_jaccard_one_empty():
    x = make_weighted_set([(1, 1.0)])
    assert exact_jaccard(x, make_weighted_set([])) == 0.0
    assert exact_jaccard(make_weighted_set([]), x) == 0.0


def test_exact_jaccard_symmetric_and_bounded():
    rng = mt_rng(23)
    for _ in range(50):
        nx, ny = int(rng.integers(1, 20)), int(rng.integers(1, 20))
        ids = rng.choice(30, size=30, replace=False)
        x = make_weighted_set(zip(ids[:nx].tolist(), rng.random(nx).tolist()))
        y = make_weighted_set(zip(ids[10:10 + ny].tolist(), rng.random(ny).tolist()))
        j = exact_jaccard(x, y)
        assert j == exact_jaccard(y, x)
        assert 0.0 <= j <= 1.0


@pytest.mark.parametrize("c", [0.25, 0.5, 1.0, 2.0, 7.5])
def test_exact_jaccard_of_scaled_copy(c):
    rng = mt_rng(31)
    pairs = list(zip(range(12), rng.random(12).tolist()))
    x = make_weighted_set(pairs)
    y = make_weighted_set([(i, w * c) for i, w in pairs])
    assert exact_jaccard(x, y) == pytest.approx(min(c, 1.0 / c), rel=1e-12)


def test_minhash_density_values():
    assert minhash_density(1) == 1
    assert minhash_density(256) == 1676
    assert minhash_density(2) == 4  # ceil(2 ln 2) + 2


def test_sketch_params():
    p = SketchParams.for_minhash(256, seed=9)
    assert (p.k, p.t, p.seed) == (256, 1676, 9)
    with pytest.raises(ValidationError):
        SketchParams(k=0, t=1, seed=0)


def test_text_format_roundtrip(tmp_path):
    rng = mt_rng(5)
    sets = []
    for _ in range(8):
        n = int(rng.integers(1, 12))
        ids = rng.integers(0, 2**64, size=n, dtype=np.uint64)
        while np.unique(ids).size != n:
            ids = rng.integers(0, 2**64, size=n, dtype=np.uint64)
        sets.append(make_weighted_set(zip(ids.tolist(), rng.random(n).tolist())))
    path = tmp_path / "sets.txt"
    write_sets(path, sets)
    loaded = read_sets(path)
    assert len(loaded) == len(sets)
    for a, b in zip(sets, loaded):
        assert a.entries == b.entries


def test_parse_set_rejects_garbage():
    with pytest.raises(ValidationError):
        parse_set("1:0.5 nonsense")
    with pytest.raises(ValidationError):
        parse_set("1:x")


def test_format_set_is_exact():
    x = make_weighted_set([(3, 0.1), (5, 1.0 / 3.0)])
    assert parse_set(format_set(x)).entries == x.entries


def test_scale_pow2_exact():
    x = make_weighted_set([(1, 0.3), (2, 0.7)])
    y = x.scale_pow2(-2)
    assert y.weights.tolist() == [0.3 / 4, 0.7 / 4]
    assert x.scale_pow2(3).weights.tolist() == [0.3 * 8, 0.7 * 8]
