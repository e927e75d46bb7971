import csv
import json
import math

import pytest

from trackassoc.config import IN_MEMORY, RunConfig
from trackassoc.logio import SensorLog, write_log, write_truth
from trackassoc.metrics import TmaReport, VehicleTma
from trackassoc.pipeline import RunReport, associate_log, emit_report, run_pipeline, tick_count
from trackassoc.records import BsmRecord, CameraRecord, HostState
from trackassoc.sim.scenarios import ScenarioConfig, gen_ima

CFG = RunConfig(input_dir=IN_MEMORY)


@pytest.fixture(scope="module")
def ima():
    return gen_ima(ScenarioConfig(seed=5))


@pytest.fixture(scope="module")
def ima_report(ima):
    return associate_log(ima.log, CFG, ima.truth)


def test_empty_log(tmp_path):
    rep = associate_log(SensorLog(), CFG, None)
    assert rep.ticks == [] and rep.results == []
    from trackassoc.metrics import GroundTruthMap

    rep = associate_log(SensorLog(), CFG, GroundTruthMap())
    assert rep.summary()["tma"]["aggregate_tma"] == "no decisions"
    emit_report(rep, tmp_path)
    assert (tmp_path / "timeline.csv").read_text().strip() == "tick_s"


def test_tick_accounting(ima, ima_report):
    t0, t1 = ima.log.time_span()
    assert len(ima_report.ticks) == tick_count(t1 - t0, CFG.sync_rate) == 300
    assert len(ima_report.results) == len(ima_report.ticks)


def test_every_detection_is_accounted_for(ima_report):
    c = ima_report.counters
    consumed = c["tracks_created"] + c["track_updates"]
    dropped = c["dropped_out_of_order"] + c["dropped_no_host_pose"] + c["dropped_stale_host_pose"]
    assert consumed + dropped == c["camera_detections"] + c["v2v_messages"]


def test_scenario_two_matches_truth_with_two_camera_ids(ima, ima_report):
    assert ima_report.tma.mismatches == []
    cams = [pairs["RV2"][0] for pairs in ima_report.timeline() if "RV2" in pairs and pairs["RV2"][0]]
    ids = list(dict.fromkeys(cams))
    assert ids == ima.camera_ids("RV2")


def test_stale_host_pose_counter():
    log = SensorLog(
        host=[HostState(0.0, 40.0, -83.0, 0.0, 0.0)],
        v2v=[BsmRecord(0.05, "RV1", 40.0001, -83.0, 0.0, 0.0), BsmRecord(0.5, "RV1", 40.0001, -83.0, 0.0, 0.0)],
    )
    rep = associate_log(log, CFG)
    assert rep.counters["dropped_stale_host_pose"] == 1
    log = SensorLog(v2v=[BsmRecord(0.05, "RV1", 40.0001, -83.0, 0.0, 0.0)])
    assert associate_log(log, CFG).counters["dropped_no_host_pose"] == 1


def test_events_after_last_tick_are_consumed():
    cams = [CameraRecord(0.0, "1", 10, 0, 0, 0, 4.8, 1.9), CameraRecord(0.25, "1", 10, 0, 0, 0, 4.8, 1.9)]
    rep = associate_log(SensorLog(camera=cams), CFG)
    assert rep.ticks == [0.0, 0.1, 0.2]
    assert rep.counters["track_updates"] == 1


def small_report():
    from trackassoc.association import AssociationResult, Cluster
    from trackassoc.records import Sensor

    results = [
        AssociationResult(t, [Cluster([(Sensor.V2V, "RV1"), (Sensor.CAMERA, "3")], 1.0, 87.5)])
        for t in (0.0, 0.1, 0.2)
    ]
    return RunReport([0.0, 0.1, 0.2], results, {"x": 1}, TmaReport({"RV1": VehicleTma(494, 500)}))


def test_emit_report_files(tmp_path):
    emit_report(small_report(), tmp_path)
    rows = list(csv.reader(open(tmp_path / "timeline.csv")))
    assert rows[0] == ["tick_s", "RV1_camera_id", "RV1_confidence"]
    assert len(rows) == 4
    assert rows[1] == ["0.000000", "3", "87.50"]
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["tma"]["per_vehicle"]["RV1"]["tma"] == 98.8
    assert "98.8" in (tmp_path / "report.json").read_text()
    conf = list(csv.reader(open(tmp_path / "confidence.csv")))
    assert conf[1] == ["0.000000", "RV1", "3", "1.0000", "87.50"]


def test_emit_report_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="cannot write report"):
        emit_report(small_report(), blocker / "sub")


def test_rerun_is_byte_identical(tmp_path):
    cfg = RunConfig(scenario="ima", seed=7, scenario_params={"duration": 12.0})
    for name in ("a", "b"):
        emit_report(run_pipeline(cfg), tmp_path / name)
    for f in ("report.json", "timeline.csv", "confidence.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_file_input_matches_in_memory(ima, ima_report, tmp_path):
    write_log(ima.log, tmp_path)
    write_truth(ima.truth, tmp_path / "truth.csv")
    rep = run_pipeline(RunConfig(input_dir=str(tmp_path)))
    assert rep.timeline() == ima_report.timeline()
    assert rep.tma.to_dict() == ima_report.tma.to_dict()


def test_file_input_without_truth(ima, tmp_path):
    write_log(ima.log, tmp_path)
    rep = run_pipeline(RunConfig(input_dir=str(tmp_path)))
    assert rep.tma is None and rep.summary()["tma"] is None


def test_confidence_trace_bounds(ima_report):
    confs = ima_report.confidences("RV1")
    assert confs and all(0.0 <= c <= 100.0 for c in confs)
    assert not math.isnan(min(confs))
