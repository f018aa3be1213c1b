import json
import math

import numpy as np
import pytest

import _segcurate as sc


def test_default_config_round_trips_as_json():
    cfg = json.loads(sc.default_config())
    assert cfg["train"]["embed_dim"] == 256
    assert cfg["vote"]["k"] == 64
    assert cfg["vote"]["delta_c"] == 0.5
    assert cfg["augment"]["n_positive"] == 500
    assert cfg["augment"]["n_negative"] == 500
    assert cfg["train"]["learning_rate"] == 0.005
    assert cfg["optimize"]["delta_theta_deg"] == 75.0


def test_greedy_retention_collinear_keeps_all():
    pts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]])
    assert sc.greedy_retention(pts) == [1, 2, 3, 4]


def test_greedy_retention_cuts_detour():
    pts = np.array(
        [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 2.0, 0.0],
            [2.0, 0.0, 0.0],
            [3.0, 0.0, 0.0],
        ]
    )
    assert sc.greedy_retention(pts) == [1, 2, 4, 5]


def test_relabel_targets_skips_dropped_rows():
    targets = np.array([[float(i), 0.0, 0.0] for i in range(1, 6)])
    out = sc.relabel_targets(targets, [1, 2, 4, 5])
    # sources: 1, 3, 3, 4, 5 in 1-based step indexing
    np.testing.assert_allclose(out[:, 0], [1.0, 3.0, 3.0, 4.0, 5.0])


def test_supcon_loss_identical_pair_with_one_negative():
    Z = np.array([[1.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])
    loss, grads = sc.supcon_loss(Z, [1, 1, 0], 1.0)
    assert loss == pytest.approx(math.log(1.0 + math.exp(-2.0)), abs=1e-12)
    assert grads.shape == (3, 2)


def test_vote_score_matches_formula():
    query = np.zeros(2)
    refs = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 2.0]])
    score, label = sc.vote_score(query, refs, [1, 1, 0], k=3)
    expected = 2.0 * math.exp(-1.0) / (2.0 * math.exp(-1.0) + math.exp(-2.0))
    assert score == pytest.approx(expected, abs=1e-12)
    assert label == 1


def test_keyframes_pick_up_gripper_toggle():
    n = 12
    pts = np.array([[0.05 * i, 0.0, 0.1] for i in range(n)])
    grip = [1.0] * 6 + [0.0] * 6
    kfs = sc.keyframes(pts, grip, dt=0.05)
    assert kfs[0] == 1 and kfs[-1] == n
    assert 6 in kfs  # last step of the open state

    spans = sc.segment_spans(pts, grip, dt=0.05)
    assert spans[0][0] == 1 and spans[-1][1] == n
    for (a, b), (c, d) in zip(spans, spans[1:]):
        assert c == b + 1


def test_bad_labels_raise():
    with pytest.raises(ValueError):
        sc.supcon_loss(np.eye(2), [1, 7], 0.1)


def test_config_error_surfaces():
    pts = np.zeros((3, 3))
    with pytest.raises(sc.ConfigError):
        sc.greedy_retention(pts, delta_theta_deg=-5.0)


def test_end_to_end_curation(tmp_path):
    cfg = {
        "seed": 11,
        "threads": 2,
        "render": {"width": 24, "height": 24, "focal": 30.0},
        "augment": {"n_positive": 12, "n_negative": 12},
        "train": {"epochs": 2, "batch_size": 16, "hidden": [32], "embed_dim": 16},
        "vote": {"k": 8},
        "synth": {
            "n_expert": 5,
            "n_suboptimal": 2,
            "subtasks": 2,
            "hz": 10.0,
            "subtask_duration": 1.2,
            "noise": {"corrupt_prob": 1.0},
        },
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(cfg))

    mixed = tmp_path / "mixed.jsonl"
    expert = tmp_path / "expert.jsonl"
    truth = tmp_path / "truth.json"
    sc.synth_dataset(str(cfg_path), str(mixed), str(truth), str(expert), 3)
    assert mixed.exists() and expert.exists() and truth.exists()

    out_dir = tmp_path / "run"
    report = json.loads(sc.curate(str(cfg_path), str(mixed), str(expert), str(out_dir), str(truth)))
    assert report["utilization"] == 1.0
    assert report["counts"]["emitted_demos"] == 4
    assert report["counts"]["emitted_steps"] == report["counts"]["input_steps"]
    assert "classification" in report
    assert (out_dir / "curated.jsonl").exists()
    assert (out_dir / "report.json").exists()
