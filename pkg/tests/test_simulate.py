import pytest

from autodirector.detections import format_detections
from autodirector.model import FrameGeometry
from autodirector.simulate import (
    SCENARIOS,
    format_ground_truth,
    parse_ground_truth,
    simulate_scene,
)

GEOM = FrameGeometry(1920, 1080, 30.0)


def test_noiseless_equals_ground_truth():
    dset, truth = simulate_scene("crossing", 100, GEOM, noise_sigma=0, drop_rate=0)
    by_frame = truth.by_frame()
    for frame, dets in dset.frames.items():
        true_boxes = {(e.bbox.cx, e.bbox.cy, e.bbox.w, e.bbox.h) for e in by_frame[frame]}
        got = {(d.bbox.cx, d.bbox.cy, d.bbox.w, d.bbox.h) for d in dets}
        assert got == true_boxes


def test_same_seed_identical_bytes():
    a = simulate_scene("bouncing", 120, GEOM, noise_sigma=2, drop_rate=0.1, seed=9)
    b = simulate_scene("bouncing", 120, GEOM, noise_sigma=2, drop_rate=0.1, seed=9)
    assert format_detections(a[0]) == format_detections(b[0])
    assert format_ground_truth(a[1]) == format_ground_truth(b[1])


def test_different_seed_differs():
    a = simulate_scene("bouncing", 120, GEOM, noise_sigma=2, seed=1)
    b = simulate_scene("bouncing", 120, GEOM, noise_sigma=2, seed=2)
    assert format_detections(a[0]) != format_detections(b[0])


def test_crossing_two_entities_meet_mid_screen():
    _, truth = simulate_scene("crossing", 300, GEOM)
    assert truth.entity_ids() == [0, 1]
    mid = truth.at(150)
    assert len(mid) == 2
    for entry in mid:
        assert abs(entry.bbox.cx - 960) < 10
        assert abs(entry.bbox.cy - 540) < 10


def test_enter_exit_entity_windows():
    _, truth = simulate_scene("enter_exit", 300, GEOM)
    assert truth.entity_ids() == [0, 1, 2]
    frames = {e: [t.frame for t in truth.entries if t.entity == e] for e in (0, 1, 2)}
    assert frames[0][0] == 0 and frames[0][-1] == 179
    assert frames[1][0] == 60 and frames[1][-1] == 299
    assert frames[2][0] == 135 and frames[2][-1] == 284


def test_boxes_stay_inside_frame():
    for scenario in SCENARIOS:
        dset, truth = simulate_scene(scenario, 200, GEOM, noise_sigma=3, seed=4)
        for det in dset.all_detections():
            b = det.bbox
            assert b.x0 >= 0 and b.y0 >= 0
            assert b.x1 <= GEOM.width and b.y1 <= GEOM.height
        for e in truth.entries:
            assert 0 <= e.bbox.x0 and e.bbox.x1 <= GEOM.width


def test_drop_rate_thins_detections():
    full, _ = simulate_scene("crossing", 300, GEOM, drop_rate=0.0, seed=3)
    thinned, _ = simulate_scene("crossing", 300, GEOM, drop_rate=0.4, seed=3)
    assert thinned.count() < full.count()


def test_ground_truth_round_trip():
    _, truth = simulate_scene("group_drift", 50, GEOM)
    again = parse_ground_truth(format_ground_truth(truth))
    assert [(e.frame, e.entity) for e in again.entries] == [
        (e.frame, e.entity) for e in truth.entries
    ]


def test_bad_arguments():
    with pytest.raises(ValueError):
        simulate_scene("crossing", 0, GEOM)
    with pytest.raises(ValueError):
        simulate_scene("nope", 10, GEOM)
    with pytest.raises(ValueError):
        simulate_scene("crossing", 10, GEOM, drop_rate=1.0)
