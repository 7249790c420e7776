"""Pose stream ingestion: keypoint-file replay and the live wire.

Only the 18-joint COCO layout is accepted; 25-joint documents are
rejected with WrongKeypointCount rather than silently converted. The
live wire is newline-delimited JSON, one frame document per LF-ended
line, with an optional "t_ms" integer; malformed lines are counted and
skipped, never fatal.
"""

from __future__ import annotations

import json
import math
import socket
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import (
    BindFailure, EmptyDirectory, MalformedJson, WrongKeypointCount,
)
from .kernels import N_JOINTS
from .model import Frame, Skeleton

KEYPOINT_FILE_GLOB = "*_keypoints.json"
FPS_DEFAULT = 15.0


def parse_openpose_frame(data) -> list:
    """Parse one keypoint-frame JSON document into Skeletons.

    The document needs a top-level "people" array whose entries carry
    "pose_keypoints_2d": a flat array of exactly 54 numbers, read as
    (x, y, confidence) triples in COCO-18 order. Confidences are clamped
    to [0, 1]; persons whose every confidence is zero are dropped.
    Extra keys are ignored.
    """
    try:
        if isinstance(data, (bytes, bytearray)):
            data = data.decode("utf-8", errors="strict")
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedJson(str(exc)) from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("people"), list):
        raise MalformedJson('document must be an object with a "people" array')

    skeletons = []
    for person in doc["people"]:
        if not isinstance(person, dict):
            raise MalformedJson("person entries must be objects")
        flat = person.get("pose_keypoints_2d")
        if not isinstance(flat, list):
            raise MalformedJson('person lacks a "pose_keypoints_2d" array')
        if len(flat) != N_JOINTS * 3:
            raise WrongKeypointCount(
                f"expected {N_JOINTS * 3} values (COCO-18), got {len(flat)}")
        try:
            arr = np.array(flat, dtype=np.float64).reshape(N_JOINTS, 3)
        except (TypeError, ValueError) as exc:
            raise MalformedJson(f"non-numeric keypoint value: {exc}") from exc
        if not np.isfinite(arr).all():
            raise MalformedJson("keypoint values must be finite numbers")
        arr[:, 2] = np.clip(arr[:, 2], 0.0, 1.0)
        if (arr[:, 2] == 0.0).all():
            continue
        skeletons.append(Skeleton(arr))
    return skeletons


def serialize_openpose_frame(skeletons, t_ms: Optional[int] = None) -> str:
    """Render Skeletons back to the frame-document format (floats keep
    full precision, so parse/serialize round-trips are lossless)."""
    doc = {"people": [
        {"pose_keypoints_2d": [float(v) for v in s.data.reshape(-1)]}
        for s in skeletons
    ]}
    if t_ms is not None:
        doc["t_ms"] = int(t_ms)
    return json.dumps(doc)


def replay_directory(directory, fps: float = FPS_DEFAULT) -> Iterator[Frame]:
    """Stream frames from a directory of *_keypoints.json files.

    Files are taken in lexicographic order; frame i is stamped
    round(i * 1000 / fps) ms. A malformed file surfaces as an error
    naming it, after all prior frames were delivered.
    """
    if fps <= 0:
        raise ValueError("fps must be > 0")
    root = Path(directory)
    files = sorted(root.glob(KEYPOINT_FILE_GLOB))
    if not files:
        raise EmptyDirectory(f"no {KEYPOINT_FILE_GLOB} files in {root}")
    for i, path in enumerate(files):
        try:
            skeletons = parse_openpose_frame(path.read_bytes())
        except (MalformedJson, WrongKeypointCount) as exc:
            raise type(exc)(f"{path.name}: {exc}") from exc
        yield Frame(timestamp_ms=round(i * 1000.0 / fps),
                    skeletons=tuple(skeletons), source="replay")


@dataclass
class StreamCounters:
    """Soft-failure tallies for a live stream."""
    frames: int = 0
    malformed: int = 0
    clock_skew: int = 0
    dropped_people: int = 0


def iter_ndjson_frames(lines: Iterable, counters: StreamCounters,
                       clock=None) -> Iterator[Frame]:
    """Decode newline-delimited frame documents into Frames.

    Malformed lines (bad JSON, wrong keypoint count, bad t_ms) bump
    counters.malformed and are skipped. Timestamps come from the
    optional "t_ms" field, else from the clock callback (arrival time);
    regressions are clamped to keep the stream non-decreasing and bump
    counters.clock_skew. This function must never raise on hostile
    input.
    """
    if clock is None:
        start = time.monotonic()
        clock = lambda: int((time.monotonic() - start) * 1000)  # noqa: E731
    last_t = None
    for line in lines:
        stripped = line.strip()
        if not stripped:
            continue
        try:
            skeletons = parse_openpose_frame(stripped)
            doc_t = json.loads(stripped).get("t_ms")
            if doc_t is not None and (not isinstance(doc_t, (int, float))
                                      or isinstance(doc_t, bool)
                                      or not math.isfinite(doc_t)):
                raise MalformedJson("t_ms must be a finite number")
        except (MalformedJson, WrongKeypointCount):
            counters.malformed += 1
            continue
        t = int(doc_t) if doc_t is not None else int(clock())
        if last_t is not None and t < last_t:
            counters.clock_skew += 1
            t = last_t
        last_t = t
        counters.frames += 1
        yield Frame(timestamp_ms=t, skeletons=tuple(skeletons), source="live")


def _socket_lines(conn) -> Iterator[bytes]:
    buf = b""
    while True:
        chunk = conn.recv(65536)
        if not chunk:
            break
        buf += chunk
        while b"\n" in buf:
            line, buf = buf.split(b"\n", 1)
            yield line
    if buf.strip():
        yield buf


def live_listen(host: str, port: int, counters: Optional[StreamCounters] = None,
                clock=None) -> Iterator[Frame]:
    """Bind a TCP endpoint and stream Frames from one producer.

    Yields frames until the producer disconnects. Raises BindFailure
    when the endpoint cannot be bound.
    """
    counters = counters if counters is not None else StreamCounters()
    try:
        server = socket.create_server((host, port))
    except OSError as exc:
        raise BindFailure(f"cannot bind {host}:{port}: {exc}") from exc
    with server:
        conn, _addr = server.accept()
        with conn:
            yield from iter_ndjson_frames(_socket_lines(conn), counters, clock)
