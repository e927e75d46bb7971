import math
import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import SIX_TRACK, six_track_histories, mahalanobis_mp
from trackassoc.association import (
    NO_GATES,
    Gates,
    NoOverlapError,
    SingularCovarianceError,
    TrackHistory,
    TtdMatrix,
    associate_tick,
    build_ttd_matrix,
    cluster_tracks,
    gate_check,
    mahalanobis_step,
    order_histories,
    track_distance,
)
from trackassoc.records import Sensor
from trackassoc.state_estimation import TrackState

V, C = Sensor.V2V, Sensor.CAMERA


def spd(rng, scale=1.0):
    A = rng.normal(size=(4, 4))
    return scale * (A @ A.T) + 0.1 * np.eye(4)


def history(key, states, n=10, speed=0.0, heading=0.0):
    h = TrackHistory(key, n)
    for s in states:
        h.push(s)
    h.speed, h.relative_heading = speed, heading
    return h


def test_mahalanobis_matches_extended_precision():
    rng = np.random.default_rng(11)
    for _ in range(50):
        a = TrackState(rng.normal(size=4) * 5, spd(rng), 0.0)
        b = TrackState(rng.normal(size=4) * 5, spd(rng), 0.0)
        assert mahalanobis_step(a, b) == pytest.approx(mahalanobis_mp(a.x, a.P, b.x, b.P), abs=1e-9)


def test_mahalanobis_identity_covariance_is_euclidean():
    a = TrackState(np.array([3.0, 4.0, 0.0, 0.0]), np.eye(4) / 2, 0.0)
    b = TrackState(np.zeros(4), np.eye(4) / 2, 0.0)
    assert mahalanobis_step(a, b) == pytest.approx(5.0)


def test_singular_sum_raises():
    P = np.zeros((4, 4))
    a = TrackState(np.ones(4), P, 0.0)
    with pytest.raises(SingularCovarianceError, match="singular"):
        mahalanobis_step(a, TrackState(np.zeros(4), P, 0.0))


def test_track_distance_is_mean_over_aligned_ticks():
    rng = np.random.default_rng(5)
    sa = [TrackState(rng.normal(size=4), spd(rng), t) for t in (0.1, 0.2, 0.3, 0.4)]
    sb = [TrackState(rng.normal(size=4), spd(rng), t) for t in (0.2, 0.3, 0.4, 0.5)]
    a, b = history((V, "a"), sa), history((C, "b"), sb)
    expected = np.mean([mahalanobis_step(x, y) for x, y in zip(sa[1:], sb[:3])])
    assert track_distance(a, b) == pytest.approx(expected, abs=1e-12)
    assert track_distance(b, a) == pytest.approx(expected, abs=1e-12)


def test_no_overlap():
    a = history((V, "a"), [TrackState(np.zeros(4), np.eye(4), 0.1)])
    b = history((C, "b"), [TrackState(np.zeros(4), np.eye(4), 0.2)])
    with pytest.raises(NoOverlapError):
        track_distance(a, b)
    m = build_ttd_matrix([a, b], threshold=math.inf, gates=NO_GATES)
    assert not np.isfinite(m.values).any()


def test_history_ring_buffer_and_order():
    h = TrackHistory((V, "a"), n=3)
    for t in (0.1, 0.2, 0.3, 0.4):
        h.push(TrackState(np.zeros(4), np.eye(4), t))
    assert h.times() == [0.2, 0.3, 0.4]
    with pytest.raises(ValueError, match="strictly increasing"):
        h.push(TrackState(np.zeros(4), np.eye(4), 0.4))
    with pytest.raises(ValueError):
        TrackHistory((V, "a"), n=0)


def test_gates():
    a = history((V, "a"), [], speed=10.0, heading=170.0)
    b = history((C, "b"), [], speed=12.0, heading=-170.0)
    assert gate_check(a, b, Gates(3.0, 45.0)) == (True, None)
    assert gate_check(a, b, Gates(1.0, 45.0)) == (False, "speed")
    assert gate_check(a, b, Gates(3.0, 15.0)) == (False, "heading")
    assert gate_check(a, b, NO_GATES) == (True, None)


def test_ttd_matrix_structure():
    hs = order_histories(six_track_histories())
    m = build_ttd_matrix(hs, threshold=math.inf, gates=NO_GATES)
    assert m.labels[:2] == [(V, "1"), (V, "2")]
    assert np.all(np.isinf(m.values[np.triu_indices(len(m))]))  # diagonal and above
    assert np.all(np.isinf(m.values[:2, :2])) and np.all(np.isinf(m.values[2:, 2:]))
    for (j, i), d in SIX_TRACK.items():
        assert m.values[1 + j, i - 1] == pytest.approx(d, abs=1e-9)


def test_threshold_and_gate_rejections():
    hs = six_track_histories()
    m = build_ttd_matrix(order_histories(hs), threshold=8.0, gates=NO_GATES)
    assert sorted(np.round(m.values[np.isfinite(m.values)], 2)) == [2.92, 4.31]
    for h in hs:
        h.speed = 10.0 if h.sensor is V else 20.0
    m = build_ttd_matrix(order_histories(hs), threshold=math.inf, gates=Gates(3.0, None))
    assert not np.isfinite(m.values).any()
    assert len(m.rejected) == 8 and {r[2] for r in m.rejected} == {"speed"}


def test_six_track_stage_trace():
    m = build_ttd_matrix(order_histories(six_track_histories()), threshold=math.inf, gates=NO_GATES)
    clusters = cluster_tracks(m)
    assert [c.members for c in clusters] == [
        [(V, "2"), (C, "2")],
        [(V, "1"), (C, "1")],
        [(C, "3")],
        [(C, "4")],
    ]
    assert clusters[0].distance == pytest.approx(2.92, abs=1e-9)
    assert clusters[1].distance == pytest.approx(4.31, abs=1e-9)


def test_tie_break_lowest_row_then_column():
    labels = [(V, "a"), (V, "b"), (C, "x"), (C, "y")]
    values = np.full((4, 4), np.inf)
    values[2, 0] = values[2, 1] = values[3, 0] = 1.0
    clusters = cluster_tracks(TtdMatrix(values, labels))
    assert clusters[0].members == [(V, "a"), (C, "x")]
    assert clusters[1].members == [(V, "b")] or clusters[1].members == [(C, "y")]


def test_third_sensor_joins_existing_cluster():
    # unreachable with two sensors; a radar-like third sensor exercises it
    labels = [(V, "a"), (C, "x"), (3, "r")]
    values = np.full((3, 3), np.inf)
    values[1, 0], values[2, 0], values[2, 1] = 1.0, 2.0, 3.0
    clusters = cluster_tracks(TtdMatrix(values, labels))
    assert len(clusters) == 1
    assert clusters[0].members == labels
    assert clusters[0].distance == 1.0


def test_empty_and_single():
    assert associate_tick([], 0.0).clusters == []
    h = history((C, "1"), [TrackState(np.zeros(4), np.eye(4), 0.0)])
    res = associate_tick([h], 0.0)
    assert [c.members for c in res.clusters] == [[(C, "1")]]
    assert res.pairs() == {}


@st.composite
def ttd_matrices(draw):
    n_v = draw(st.integers(0, 4))
    n_c = draw(st.integers(0, 5))
    labels = [(V, str(i)) for i in range(n_v)] + [(C, str(i)) for i in range(n_c)]
    n = len(labels)
    values = np.full((n, n), np.inf)
    for i in range(n):
        for j in range(i):
            if labels[i][0] != labels[j][0] and draw(st.booleans()):
                values[i, j] = draw(st.floats(0.0, 20.0))
    return TtdMatrix(values, labels)


@given(ttd_matrices())
def test_clustering_partition_properties(m):
    clusters = cluster_tracks(m)
    members = [x for c in clusters for x in c.members]
    # every track exactly once
    assert sorted(members) == sorted(m.labels)
    for c in clusters:
        sensors = [x[0] for x in c.members]
        assert len(sensors) == len(set(sensors))
        if len(c.members) == 2:
            i, j = m.labels.index(c.members[0]), m.labels.index(c.members[1])
            assert np.isfinite(m.values[max(i, j), min(i, j)])
    # pair clusters are picked in nondecreasing distance
    ds = [c.distance for c in clusters if c.distance is not None]
    assert ds == sorted(ds)


@given(ttd_matrices())
def test_clustering_matches_brute_force_greedy(m):
    """Against a plain greedy matcher over the sorted list of finite cells."""
    n = len(m.labels)
    cells = sorted(
        (m.values[i, j], i, j) for i in range(n) for j in range(i) if np.isfinite(m.values[i, j])
    )
    used, pairs = set(), []
    for d, i, j in cells:
        if i not in used and j not in used:
            used |= {i, j}
            pairs.append({m.labels[i], m.labels[j]})
    got = [set(c.members) for c in cluster_tracks(m) if len(c.members) > 1]
    assert got == pairs


def test_associate_tick_confidence():
    hs = six_track_histories()
    res = associate_tick(hs, 0.0, threshold=math.inf, gates=NO_GATES, confidence_th=8.0)
    pairs = res.pairs()
    assert pairs["2"] == ("2", pytest.approx(100 * (8 - 2.92) / 8))
    assert pairs["1"] == ("1", pytest.approx(100 * (8 - 4.31) / 8))
    assert res.cluster_of((C, "3")).is_singleton


def test_six_track_runtime():
    hs = six_track_histories()
    best = math.inf
    for _ in range(20):
        t0 = time.perf_counter()
        associate_tick(hs, 0.0, threshold=math.inf, gates=NO_GATES)
        best = min(best, time.perf_counter() - t0)
    assert best < 1e-3
