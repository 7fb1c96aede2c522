import itertools

import pytest

from vpp.errors import FormatError
from vpp.scene import (
    Detection,
    SceneRule,
    classify_scene,
    load_detections,
    save_detections,
    score_classifier,
)


def det(label, score):
    return Detection(label, score, (0.0, 0.0, 10.0, 10.0))


class TestClassifyScene:
    def test_person_and_artifact(self):
        out = classify_scene([det("person", 0.96), det("bowl", 0.85)])
        assert out.is_kitchen
        assert [d.label for d in out.persons] == ["person"]
        assert [d.label for d in out.artifacts] == ["bowl"]

    def test_person_without_artifacts(self):
        assert not classify_scene([det("person", 0.96)]).is_kitchen

    def test_person_below_threshold(self):
        assert not classify_scene([det("person", 0.89), det("knife", 0.99)]).is_kitchen

    def test_thresholds_inclusive(self):
        assert classify_scene([det("person", 0.90), det("cup", 0.80)]).is_kitchen

    def test_truth_table(self):
        rule = SceneRule()
        for ps, ks in itertools.product((0.89, 0.90, 0.91), (0.79, 0.80, 0.81)):
            out = classify_scene([det("person", ps), det("spoon", ks)], rule)
            assert out.is_kitchen == (ps >= 0.90 and ks >= 0.80)

    def test_case_insensitive_labels(self):
        assert classify_scene([det("Person", 0.95), det("Wine Glass", 0.9)]).is_kitchen

    def test_non_artifact_class_ignored(self):
        assert not classify_scene([det("person", 0.99), det("car", 0.99)]).is_kitchen

    def test_monotone_under_added_detections(self, rng):
        labels = ["person", "bowl", "cup", "car", "dog", "knife"]
        for _ in range(200):
            dets = [
                det(labels[rng.integers(len(labels))], float(rng.random()))
                for _ in range(rng.integers(0, 6))
            ]
            before = classify_scene(dets).is_kitchen
            extra = det(labels[rng.integers(len(labels))], float(rng.random()))
            after = classify_scene(dets + [extra]).is_kitchen
            assert after >= before

    def test_order_invariant(self):
        dets = [det("bowl", 0.85), det("person", 0.96), det("car", 0.5)]
        assert classify_scene(dets).is_kitchen == classify_scene(dets[::-1]).is_kitchen

    def test_strict_preset(self):
        dets = [det("person", 0.93), det("bowl", 0.9)]
        assert classify_scene(dets, SceneRule()).is_kitchen
        assert not classify_scene(dets, SceneRule.strict_person()).is_kitchen

    def test_rule_validation(self):
        with pytest.raises(FormatError):
            SceneRule(person_threshold=0.0)
        with pytest.raises(FormatError):
            SceneRule(artifact_classes=frozenset())


class TestScoreClassifier:
    def test_identical(self):
        assert score_classifier([True, False, True], [True, False, True]) == 1.0

    def test_complementary(self):
        assert score_classifier([True, False], [False, True]) == 0.0

    def test_27_of_30(self):
        pred = [True] * 30
        truth = [True] * 27 + [False] * 3
        assert score_classifier(pred, truth) == pytest.approx(0.9)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            score_classifier([True], [True, False])

    def test_empty(self):
        with pytest.raises(ValueError):
            score_classifier([], [])


class TestDetectionsJson:
    def test_round_trip(self, tmp_path):
        dets = [Detection("person", 0.97, (1.0, 2.0, 30.0, 40.0))]
        p = tmp_path / "d.json"
        save_detections(dets, p)
        assert load_detections(p) == dets

    def test_clipping(self, tmp_path):
        p = tmp_path / "d.json"
        save_detections([Detection("person", 0.9, (-5.0, -5.0, 30.0, 20.0))], p)
        clipped = load_detections(p, frame_size=(20, 12))[0]
        assert clipped.bbox == (0.0, 0.0, 20.0, 12.0)

    def test_bad_score(self):
        with pytest.raises(FormatError):
            Detection("person", 1.5, (0, 0, 1, 1))

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"detections": [{"label": "x"}]}')
        with pytest.raises(FormatError):
            load_detections(p)
