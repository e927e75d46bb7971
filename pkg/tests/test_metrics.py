import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from trackassoc.association import AssociationResult, Cluster
from trackassoc.metrics import NO_DECISIONS, CoverageError, GroundTruthMap, TmaReport, VehicleTma, confidence, tma
from trackassoc.records import Sensor

V, C = Sensor.V2V, Sensor.CAMERA


def test_confidence_examples():
    assert confidence(0.0, 8.0) == 100.0
    assert confidence(8.0, 8.0) == 0.0
    assert confidence(12.0, 8.0) == 0.0
    assert confidence(4.0, 8.0) == 50.0


@pytest.mark.parametrize("D,th", [(-0.1, 1.0), (1.0, 0.0), (1.0, -2.0), (float("nan"), 1.0)])
def test_confidence_domain(D, th):
    with pytest.raises(ValueError):
        confidence(D, th)


positive = st.floats(1e-6, 1e6)


@given(st.floats(0, 1e6), st.floats(0, 1e6), positive)
def test_confidence_monotone_and_bounded(d1, d2, th):
    lo, hi = sorted((d1, d2))
    assert 0.0 <= confidence(hi, th) <= confidence(lo, th) <= 100.0


@given(st.floats(0.01, 0.99), positive)
def test_confidence_strictly_decreasing_inside(u, th):
    assert confidence(u * th * 0.99, th) > confidence(u * th, th)


@given(st.floats(0, 100), positive, st.floats(0.01, 100))
def test_confidence_scale_invariant(D, th, k):
    assert confidence(D * k, th * k) == pytest.approx(confidence(D, th), abs=1e-9)


def result(t, *clusters):
    return AssociationResult(t, [Cluster(list(m)) for m in clusters])


def test_all_correct():
    truth = GroundTruthMap({0.0: {"A": "1"}, 0.1: {"A": "1"}})
    res = [result(0.0, [(V, "A"), (C, "1")]), result(0.1, [(V, "A"), (C, "1")])]
    assert tma(res, truth).aggregate == 100.0


def test_one_wrong_of_fifty():
    ticks = [round(0.1 * k, 1) for k in range(50)]
    truth = GroundTruthMap({t: {"A": "1"} for t in ticks})
    res = [result(t, [(V, "A"), (C, "1")]) for t in ticks[:-1]]
    res.append(result(ticks[-1], [(V, "A"), (C, "2")], [(C, "1")]))
    rep = tma(res, truth)
    assert rep.per_vehicle["A"].tma == 98.0
    assert rep.mismatches == [(ticks[-1], "A", "1")]


def test_truth_none_requires_singleton():
    truth = GroundTruthMap({0.0: {"A": None}, 0.1: {"A": None}})
    res = [result(0.0, [(V, "A")], [(C, "9")]), result(0.1, [(V, "A"), (C, "9")])]
    rep = tma(res, truth)
    assert (rep.correct, rep.total) == (1, 2)


def test_no_decision_when_track_missing():
    truth = GroundTruthMap({0.0: {"A": "1"}, 0.1: {"A": "1"}})
    # t=0: the V2V track is not live; t=0.1: the true camera track is not live
    res = [result(0.0, [(C, "1")]), result(0.1, [(V, "A")])]
    rep = tma(res, truth)
    assert rep.total == 0 and rep.per_vehicle["A"].no_decision == 2
    d = rep.to_dict()
    assert d["aggregate_tma"] == NO_DECISIONS
    assert d["per_vehicle"]["A"]["tma"] == NO_DECISIONS


def test_coverage_error_lists_ticks():
    truth = GroundTruthMap({0.0: {}, 0.1: {}})
    with pytest.raises(CoverageError, match="0.100") as exc:
        tma([result(0.0)], truth)
    assert exc.value.missing == [0.1]


def test_truth_must_be_injective():
    with pytest.raises(ValueError, match="injective|two vehicles"):
        GroundTruthMap({0.0: {"A": "1", "B": "1"}})


def test_to_dict_one_decimal():
    rep = TmaReport({"RV2": VehicleTma(correct=494, total=500)})
    assert rep.to_dict()["per_vehicle"]["RV2"]["tma"] == 98.8
    assert rep.to_dict()["aggregate_tma"] == 98.8


@st.composite
def scored_fixtures(draw):
    n_ticks = draw(st.integers(1, 10))
    vehicles = ["A", "B"]
    cams = ["1", "2", "3"]
    truth, results = {}, []
    for k in range(n_ticks):
        t = k / 10
        true_cams = draw(st.permutations(cams + [None, None]))
        truth[t] = {v: c for v, c in zip(vehicles, true_cams)}
        live_v = [v for v in vehicles if draw(st.booleans())]
        live_c = [c for c in cams if draw(st.booleans())]
        assign = draw(st.permutations(live_c + [None] * len(live_v)))
        clusters, used = [], set()
        for v, c in zip(live_v, assign):
            clusters.append([(V, v)] + ([(C, c)] if c else []))
            used.add(c)
        clusters += [[(C, c)] for c in live_c if c not in used]
        results.append(result(t, *clusters))
    return results, GroundTruthMap(truth)


def brute_force(results, truth):
    correct = total = 0
    for r in results:
        for v, cam in truth[r.t].items():
            cluster = next((c for c in r.clusters if (V, v) in c.members), None)
            if cluster is None:
                continue
            others = [m for m in cluster.members if m != (V, v)]
            if cam is None:
                total += 1
                correct += others == []
                continue
            if not any((C, cam) in c.members for c in r.clusters):
                continue
            total += 1
            correct += others == [(C, cam)]
    return correct, total


@given(scored_fixtures(), st.randoms(use_true_random=False))
def test_tma_brute_force_and_order_invariance(fixture, rnd):
    results, truth = fixture
    rep = tma(results, truth)
    assert (rep.correct, rep.total) == brute_force(results, truth)
    shuffled = list(results)
    rnd.shuffle(shuffled)
    assert tma(shuffled, truth).to_dict() == rep.to_dict()
    for v in rep.per_vehicle.values():
        assert 0 <= v.correct <= v.total
