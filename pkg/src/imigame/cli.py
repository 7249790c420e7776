"""Command-line entry points.

    imigame replay   --dir DIR --fps N [--script S.json] [--report]
    imigame simulate --scenario S.json [--seed K] [--report]
    imigame serve    --listen HOST:PORT --source live:HOST:PORT|simulate:S.json
    imigame report   --store PATH [--json]
    imigame validate --file F.json

Every subcommand accepts --config (YAML) and --store; IMIGAME_STORE and
IMIGAME_LISTEN environment variables override their config values.
Exit codes: 0 success, 1 failure with a one-line diagnostic, 2 usage.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .errors import ImigameError
from .iostream import parse_openpose_frame, replay_directory
from .pipeline import run_session
from .simulate import ScenarioScript, simulate
from .store import (
    SessionStore, ensure_default_participants, render_report, report_json,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imigame",
        description="Gesture-imitation game session engine")
    parser.add_argument("--config", help="YAML config file")
    parser.add_argument("--store", help="session store directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p_replay = sub.add_parser("replay", help="run frames from keypoint files")
    p_replay.add_argument("--dir", required=True)
    p_replay.add_argument("--fps", type=float, default=15.0)
    p_replay.add_argument("--script", help="scenario supplying operator events")
    p_replay.add_argument("--report", action="store_true")

    p_sim = sub.add_parser("simulate", help="run a scripted synthetic session")
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--report", action="store_true")

    p_serve = sub.add_parser("serve", help="run the operator gateway service")
    p_serve.add_argument("--listen", default=None, help="HOST:PORT")
    p_serve.add_argument("--source", required=True,
                         help="live:HOST:PORT or simulate:SCENARIO.json")
    p_serve.add_argument("--pace", choices=("real", "fast"), default="real")

    p_report = sub.add_parser("report", help="print stored session results")
    p_report.add_argument("--json", action="store_true")

    p_val = sub.add_parser("validate", help="parse-check a keypoint file")
    p_val.add_argument("--file", required=True)
    return parser


def _store_from(args, cfg) -> SessionStore:
    path = args.store or cfg.store_path
    store = SessionStore(path)
    ensure_default_participants(store)
    return store


def _print_report(records, as_json=False) -> None:
    print(report_json(records) if as_json else render_report(records))


def cmd_replay(args, cfg) -> int:
    store = _store_from(args, cfg)
    frames = replay_directory(args.dir, args.fps)
    if args.script:
        script = ScenarioScript.load(args.script)
        _, events = simulate(script)
        result = run_session(frames, events, cfg, store, script.participant)
    else:
        n_frames = 0
        n_skeletons = 0
        for frame in frames:
            n_frames += 1
            n_skeletons += len(frame.skeletons)
        print(f"{n_frames} frames, {n_skeletons} skeletons parsed OK")
        return 0
    _print_report([result.record])
    return 0


def cmd_simulate(args, cfg) -> int:
    store = _store_from(args, cfg)
    script = ScenarioScript.load(args.scenario)
    frames, events = simulate(script, seed=args.seed)
    result = run_session(frames, events, cfg, store, script.participant)
    if args.report:
        _print_report([result.record])
    else:
        print(f"session {result.record.session_id}: {result.record.status}")
    return 0


def cmd_serve(args, cfg) -> int:
    from .gateway import serve  # heavy import, keep it off other paths
    serve(cfg, source=args.source, listen=args.listen or cfg.listen,
          store=_store_from(args, cfg), pace=args.pace)
    return 0


def cmd_report(args, cfg) -> int:
    store = _store_from(args, cfg)
    records = store.records()
    if not records:
        print("no stored sessions", file=sys.stderr)
        return 1
    _print_report(records, as_json=args.json)
    return 0


def cmd_validate(args, cfg) -> int:
    data = Path(args.file).read_bytes()
    skeletons = parse_openpose_frame(data)
    print(f"OK: {len(skeletons)} skeleton(s)")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        handler = {
            "replay": cmd_replay,
            "simulate": cmd_simulate,
            "serve": cmd_serve,
            "report": cmd_report,
            "validate": cmd_validate,
        }[args.command]
        return handler(args, cfg)
    except ImigameError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
