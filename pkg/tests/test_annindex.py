import math

import numpy as np
import pytest

from dartsketch import (
    HashFamily,
    LshIndex,
    LshParams,
    ValidationError,
    dart_minhash,
    exact_jaccard,
    gen_pair,
    gen_set,
    lsh_key,
    make_weighted_set,
    probe_classes,
    weight_class,
)

from helpers import mt_rng


@pytest.fixture(scope="module")
def family():
    return HashFamily(0x10B)


def test_params_validation():
    with pytest.raises(ValidationError):
        LshParams(L=0, K=1)
    with pytest.raises(ValidationError):
        LshParams(L=1, K=0)
    with pytest.raises(ValidationError):
        LshParams(L=1, K=1, j1=0.0)
    LshParams(L=1, K=1, j1=1.0)


@pytest.mark.parametrize("l1,expected", [
    (1.0, 0), (1.5, 0), (2.0, 1), (3.0, 1), (0.5, -1), (0.75, -1),
    (2.0**64, 64), (2.0**-64, -64), (1.999999, 0),
])
def test_weight_class(l1, expected):
    assert weight_class(l1) == expected


def test_probe_classes_example():
    # j1 = 0.5 and a unit-norm query probe exactly classes -1 and 0: the
    # upper edge 2.0 falls on class 1's left boundary, which is excluded
    assert probe_classes(1.0, 0.5) == [-1, 0]


def test_probe_classes_brute_force():
    rng = mt_rng(77)
    for _ in range(200):
        l1 = float(2.0 ** rng.uniform(-6, 6))
        j1 = float(rng.uniform(0.05, 1.0))
        got = probe_classes(l1, j1)
        lo, hi = j1 * l1, l1 / j1
        expected = [c for c in range(-40, 40)
                    if math.ldexp(1.0, c) < hi and lo < math.ldexp(1.0, c + 1)]
        assert got == expected


def test_lsh_key_shape_and_determinism(family):
    params = LshParams(L=6, K=3)
    x = gen_set(16, 1.3, 5)
    keys = lsh_key(x, params, family)
    assert len(keys) == 6
    assert all(len(key) == 3 for key in keys)
    assert keys == lsh_key(x, params, family)


def test_lsh_key_l1_k1_matches_minhash(family):
    x = gen_set(10, 1.2, 8)
    keys = lsh_key(x, LshParams(L=1, K=1), family)
    sketch = dart_minhash(x, 1, family)
    assert keys[0][0] == int(sketch.values[0])


def test_lsh_key_collision_rate():
    params = LshParams(L=1, K=2)
    hits = 0
    pairs = 1000
    for i in range(pairs):
        rng = mt_rng(3000 + i)
        x = gen_set(16, 1.0, rng)
        y = gen_pair(x, 0.5, rng)
        fam = HashFamily(40000 + i)
        hits += lsh_key(x, params, fam) == lsh_key(y, params, fam)
    rate = hits / pairs
    sigma = (0.25 * 0.75 / pairs) ** 0.5
    assert abs(rate - 0.25) <= 3.5 * sigma


def test_insert_and_self_query(family):
    index = LshIndex(LshParams(L=4, K=2), family)
    rng = mt_rng(4)
    xs = [gen_set(12, float(2.0 ** rng.uniform(-3, 3)), rng) for _ in range(20)]
    for i, x in enumerate(xs):
        index.insert(i, x)
    assert len(index) == 20
    for i, x in enumerate(xs):
        results = index.query(x)
        assert results and results[0] == (i, 1.0)


def test_insert_validation(family):
    index = LshIndex(LshParams(L=2, K=1), family)
    x = gen_set(4, 1.0, 1)
    index.insert("a", x)
    with pytest.raises(ValidationError):
        index.insert("a", x)
    with pytest.raises(ValidationError):
        index.insert("b", make_weighted_set([]))
    with pytest.raises(ValidationError):
        index.query(make_weighted_set([]))


def test_query_empty_index(family):
    index = LshIndex(LshParams(L=2, K=1), family)
    assert index.query(gen_set(4, 1.0, 2)) == []


def test_weight_class_placement(family):
    # ||x||_1 = 3 lives in class 1 and is normalized to norm 1.5
    index = LshIndex(LshParams(L=2, K=1), family, debug=True)
    x = gen_set(8, 3.0, 3)
    index.insert("p", x)
    c, keys = index._debug_keys["p"]
    assert c == 1
    assert len(keys) == 2
    assert x.scale_pow2(-c).l1 == pytest.approx(1.5, rel=1e-12)


def test_normalization_preserves_similarity():
    rng = mt_rng(15)
    x = gen_set(16, 5.0, rng)
    y = gen_pair(x, 0.6, rng)
    c = weight_class(x.l1)
    assert weight_class(y.l1) == c
    before = exact_jaccard(x, y)
    after = exact_jaccard(x.scale_pow2(-c), y.scale_pow2(-c))
    assert after == pytest.approx(before, rel=1e-12)


def test_query_scores_with_exact_jaccard(family):
    index = LshIndex(LshParams(L=8, K=1), family)
    rng = mt_rng(6)
    base = gen_set(16, 1.0, rng)
    index.insert("base", base)
    near = gen_pair(base, 0.8, rng)
    results = dict(index.query(near))
    assert results.get("base") == pytest.approx(exact_jaccard(near, base), rel=1e-12)


def test_planted_recall(family):
    params = LshParams(L=16, K=2)
    found = 0
    trials = 200
    for i in range(trials):
        rng = mt_rng(9000 + i)
        fam = HashFamily(70000 + i)
        index = LshIndex(params, fam)
        planted = gen_set(12, 1.0, rng)
        index.insert("planted", planted)
        for d in range(3):
            index.insert(d, gen_set(12, 1.0, rng))
        q = gen_pair(planted, 0.7, rng)
        found += any(pid == "planted" for pid, _ in index.query(q))
    # miss probability (1 - 0.7^2)^16 ~ 2e-5
    assert found / trials >= 0.97


def test_bulk_load(tmp_path, family):
    from dartsketch.core import write_sets

    sets = [gen_set(6, 1.0, seed) for seed in range(5)]
    path = tmp_path / "points.txt"
    write_sets(path, sets)
    index = LshIndex(LshParams(L=4, K=1), family)
    ids = index.bulk_load(path)
    assert ids == [0, 1, 2, 3, 4]
    assert len(index) == 5
    assert index.point(2).entries == sets[2].entries
    # appending more points continues the id sequence
    more = tmp_path / "more.txt"
    write_sets(more, [gen_set(6, 1.0, 99)])
    assert index.bulk_load(more) == [5]
    results = index.query(sets[3])
    assert results[0] == (3, 1.0)


def test_cross_class_candidates_scored(family):
    # a neighbor in an adjacent weight class is still reachable via probing
    index = LshIndex(LshParams(L=12, K=1, j1=0.5), family)
    x = gen_set(8, 1.9, 11)
    y = x.scale_pow2(1)  # norm 3.8, class 1 vs class 0
    index.insert("x", x)
    index.insert("y", y)
    results = dict(index.query(x))
    assert "x" in results
    assert results["x"] == 1.0
    # y sits in a probed class; if its tables collide it must carry J = 0.5
    if "y" in results:
        assert results["y"] == pytest.approx(0.5, rel=1e-12)
