"""CLI behavior: subcommands, exit codes, diagnostics."""

import json

import pytest

from imigame.cli import main
from imigame.iostream import serialize_openpose_frame

from conftest import skeleton_from_pose


def scenario(tmp_path, participant="F", duration_ms=4000, timeline=()):
    doc = {"participant": participant, "fps": 15, "seed": 4,
           "duration_ms": duration_ms, "timeline": list(timeline)}
    path = tmp_path / f"{participant}.json"
    path.write_text(json.dumps(doc))
    return path


def test_simulate_report_exit_zero(tmp_path, capsys):
    path = scenario(tmp_path, timeline=[
        {"at_ms": 500, "action": "command", "kind": "AdvancePhase"},
        {"at_ms": 1000, "action": "observe", "kind": "HandReach"},
        {"at_ms": 1500, "action": "command", "kind": "AdvancePhase"},
    ])
    code = main(["--store", str(tmp_path / "store"), "simulate",
                 "--scenario", str(path), "--seed", "1", "--report"])
    out = capsys.readouterr().out
    assert code == 0
    assert "F" in out and "|" in out


def test_simulate_unknown_participant(tmp_path, capsys):
    path = scenario(tmp_path, participant="Z")
    code = main(["--store", str(tmp_path / "store"), "simulate",
                 "--scenario", str(path)])
    assert code == 1
    assert "UnknownParticipant" in capsys.readouterr().err


def test_validate_good_file(tmp_path, capsys):
    f = tmp_path / "frame.json"
    f.write_text(serialize_openpose_frame([skeleton_from_pose("neutral")]))
    assert main(["validate", "--file", str(f)]) == 0
    assert "1 skeleton" in capsys.readouterr().out


def test_validate_body25_exit_one(tmp_path, capsys):
    f = tmp_path / "body25.json"
    f.write_text(json.dumps({"people": [{"pose_keypoints_2d": [0.0] * 75}]}))
    assert main(["validate", "--file", str(f)]) == 1
    assert "WrongKeypointCount" in capsys.readouterr().err


def test_replay_empty_directory_exit_one(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    code = main(["--store", str(tmp_path / "store"), "replay",
                 "--dir", str(empty), "--fps", "15"])
    assert code == 1
    assert "EmptyDirectory" in capsys.readouterr().err


def test_replay_counts_frames(tmp_path, capsys):
    d = tmp_path / "frames"
    d.mkdir()
    doc = serialize_openpose_frame([skeleton_from_pose("neutral")])
    for i in range(4):
        (d / f"x_{i:03d}_keypoints.json").write_text(doc)
    code = main(["--store", str(tmp_path / "store"), "replay",
                 "--dir", str(d), "--fps", "15"])
    assert code == 0
    assert "4 frames" in capsys.readouterr().out


def test_replay_with_script_runs_session(tmp_path, capsys):
    d = tmp_path / "frames"
    d.mkdir()
    doc = serialize_openpose_frame([skeleton_from_pose("neutral")])
    for i in range(30):
        (d / f"x_{i:03d}_keypoints.json").write_text(doc)
    script = scenario(tmp_path, timeline=[
        {"at_ms": 100, "action": "command", "kind": "AdvancePhase"},
        {"at_ms": 500, "action": "observe", "kind": "Smile"},
        {"at_ms": 900, "action": "command", "kind": "AdvancePhase"},
    ])
    code = main(["--store", str(tmp_path / "store"), "replay",
                 "--dir", str(d), "--fps", "15", "--script", str(script),
                 "--report"])
    out = capsys.readouterr().out
    assert code == 0
    assert "| 2" in out  # greetings scored 2 from the Smile


def test_report_reads_store(tmp_path, capsys):
    path = scenario(tmp_path)
    store = str(tmp_path / "store")
    main(["--store", store, "simulate", "--scenario", str(path)])
    capsys.readouterr()
    assert main(["--store", store, "report"]) == 0
    assert "participant" in capsys.readouterr().out
    assert main(["--store", store, "report", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert rows[0]["participant"] == "F"


def test_report_empty_store(tmp_path, capsys):
    assert main(["--store", str(tmp_path / "store"), "report"]) == 1


def test_usage_error_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["simulate"])  # missing --scenario
    assert exc.value.code == 2


def test_config_roundtrip_behavior(tmp_path, capsys):
    from imigame.config import dump_config, load_config
    cfg = load_config()
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(dump_config(cfg))
    path = scenario(tmp_path, timeline=[
        {"at_ms": 500, "action": "command", "kind": "AdvancePhase"},
        {"at_ms": 1500, "action": "command", "kind": "AdvancePhase"},
    ])
    store_a = str(tmp_path / "store_a")
    store_b = str(tmp_path / "store_b")
    assert main(["--store", store_a, "simulate", "--scenario", str(path),
                 "--report"]) == 0
    out_a = capsys.readouterr().out
    assert main(["--config", str(cfg_path), "--store", store_b, "simulate",
                 "--scenario", str(path), "--report"]) == 0
    out_b = capsys.readouterr().out
    assert out_a == out_b


def test_env_store_override(tmp_path, capsys, monkeypatch):
    path = scenario(tmp_path)
    env_store = tmp_path / "env-store"
    monkeypatch.setenv("IMIGAME_STORE", str(env_store))
    assert main(["simulate", "--scenario", str(path)]) == 0
    assert (env_store / "sessions").exists()
