import numpy as np
import pytest
from scipy import stats
from hypothesis import given, settings, strategies as st

from saltstore.errors import DecodeError, InvalidInputError
from saltstore.exemplar import (ClusterModel, DriftCase, case_for_distance, classify_drift,
                                default_thresholds, fit, kmeans_cluster, kmeanspp_seed,
                                nearest_center, select_exemplars)

from oracles import brute_force_kmeans_cost, kmeanspp_split_probability

FOUR = np.array([0.0, 1.0, 10.0, 11.0])


def model(centers, tau1=1.0, tau2=2.0):
    return ClusterModel(np.asarray(centers, dtype=float), tau1, tau2)


def test_seed_full_k_is_permutation():
    pts = np.arange(6.0)[:, None]
    c = kmeanspp_seed(pts, 6, seed=4)
    assert sorted(c.ravel().tolist()) == pts.ravel().tolist()


def test_seed_deterministic():
    pts = np.random.default_rng(0).normal(size=(20, 3))
    assert np.array_equal(kmeanspp_seed(pts, 4, 9), kmeanspp_seed(pts, 4, 9))


def test_seed_duplicates_fall_back_to_uniform():
    c = kmeanspp_seed(np.ones((5, 2)), 3, seed=1)
    assert c.shape == (3, 2) and (c == 1).all()


def test_seed_rejects_too_many():
    with pytest.raises(InvalidInputError):
        kmeanspp_seed(FOUR, 5)


def test_seed_split_probability_oracle():
    # exact D^2 chance; the >= 97% bound in the acceptance run is conservative
    p = kmeanspp_split_probability(FOUR.tolist())
    assert float(p) > 0.995


def test_seed_first_center_uniform():
    n = 4000
    firsts = np.array([kmeanspp_seed(FOUR, 1, s)[0, 0] for s in range(n)])
    counts = [(firsts == v).sum() for v in FOUR]
    assert stats.chisquare(counts).pvalue > 0.001


def test_seed_second_center_d2_weights_within_3_sigma():
    # conditional on first center 0: D^2 = (0, 1, 100, 121) / 222
    n, hits = 0, np.zeros(4)
    for s in range(8000):
        c = kmeanspp_seed(FOUR, 2, s)
        if c[0, 0] == 0.0:
            n += 1
            hits[np.where(FOUR == c[1, 0])[0][0]] += 1
    w = np.array([0, 1, 100, 121]) / 222
    for h, p in zip(hits, w):
        assert abs(h - n * p) <= 3 * np.sqrt(n * p * (1 - p)) + 1e-9


def test_lloyd_on_four_points():
    m = kmeans_cluster(FOUR, [[0.0], [11.0]])
    assert sorted(m.centers.ravel().tolist()) == [0.5, 10.5]
    assert m.cost == pytest.approx(1.0)
    assert m.counts.tolist() == [2, 2]
    assert m.mean_distance.tolist() == [0.5, 0.5]


def test_points_at_centers_converge_at_once():
    pts = np.array([[1.0, 2.0], [5.0, 5.0]])
    m = kmeans_cluster(pts, pts)
    assert m.iterations == 1 and m.cost == 0.0


def test_single_point():
    m = kmeans_cluster([[3.0, 4.0]], [[0.0, 0.0]])
    assert m.centers.tolist() == [[3.0, 4.0]]


def test_empty_cluster_reseeded_to_farthest_point():
    pts = np.array([[0.0], [1.0], [10.0]])
    # the far center wins nothing; it is moved onto 10, the worst-served point
    one = kmeans_cluster(pts, [[0.5], [100.0]], max_iter=1)
    assert one.centers[1].tolist() == [10.0]
    m = kmeans_cluster(pts, [[0.5], [100.0]])
    assert sorted(m.centers.ravel().tolist()) == [0.5, 10.0]


def test_lloyd_rejects_bad_tol():
    with pytest.raises(InvalidInputError):
        kmeans_cluster(FOUR, [[0.0]], tol=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4))
def test_lloyd_cost_non_increasing(seed, k):
    pts = np.random.default_rng(seed).normal(size=(30, 2))
    m = kmeans_cluster(pts, kmeanspp_seed(pts, k, seed))
    hist = m.cost_history
    assert all(b <= a + 1e-12 for a, b in zip(hist, hist[1:]))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 8), st.integers(1, 3))
def test_fit_reaches_brute_force_optimum(seed, n, k):
    k = min(k, n)
    pts = np.random.default_rng(seed).normal(size=(n, 2)) * 3
    best = fit(pts, k, seed=seed, restarts=10)
    assert best.cost == pytest.approx(brute_force_kmeans_cost(pts, k), abs=1e-9)


def test_default_thresholds():
    d = np.array([1.0, 2.0, 3.0])
    t1, t2 = default_thresholds(d)
    assert t1 == pytest.approx(2 + 2 * np.std(d))
    assert t2 == pytest.approx(2 + 4 * np.std(d))
    z1, z2 = default_thresholds(np.zeros(4))
    assert 0 < z1 < z2


def test_model_invariants():
    with pytest.raises(InvalidInputError):
        model([[0.0]], 2.0, 1.0)
    with pytest.raises(InvalidInputError):
        model(np.zeros((0, 2)))


def test_classify_cases():
    m = model([[0.0, 0.0], [10.0, 0.0]], 1.0, 2.0)
    assert classify_drift([10.0, 0.0], m) is DriftCase.KNOWN
    assert classify_drift([1.5, 0.0], m) is DriftCase.DRIFTED
    assert classify_drift([0.0, 20.0], m) is DriftCase.NOVEL


def test_nearest_center_tie_prefers_low_index():
    m = model([[-1.0], [1.0]])
    assert nearest_center([0.0], m) == (0, 1.0)


@given(st.floats(0, 1e6, allow_nan=False))
def test_cases_partition_distance(d):
    case = case_for_distance(d, 1.0, 2.0)
    expect = (DriftCase.KNOWN if d <= 1.0 else
              DriftCase.DRIFTED if d <= 2.0 else DriftCase.NOVEL)
    assert case is expect


def test_select_exemplars():
    m = model([[0.0], [10.0]], 1.0, 2.0)
    feats = [[0.0], [5.0], [10.0], [1.5], [9.9]]
    assert select_exemplars(feats, m) == [1, 3]
    assert select_exemplars([[0.0], [10.0]], m) == []
    assert select_exemplars([], m) == []


def test_model_serialization():
    m = model([[1.0, 2.0], [3.0, 4.5]], 0.25, 0.75)
    raw = m.to_bytes()
    assert raw[:4] == b"SKMN" and raw[4] == 1
    assert len(raw) == 4 + 1 + 4 + 4 + 4 * 8 + 16
    back = ClusterModel.from_bytes(raw)
    assert np.array_equal(back.centers, m.centers)
    assert (back.tau1, back.tau2) == (0.25, 0.75)
    with pytest.raises(DecodeError):
        ClusterModel.from_bytes(raw[:-1])
    with pytest.raises(DecodeError):
        ClusterModel.from_bytes(b"XXXX" + raw[4:])
