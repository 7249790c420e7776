"""Operator gateway: one live session behind a websocket message channel.

Wire protocol (both directions): JSON messages

    {"type": <kind>, "seq": <monotone int per direction>, "body": {...}}

Server -> client kinds: hello (role ack), frame (decimated, with roles),
state, outcome (body.aggregate true for the session-level code),
suggestion, warning, error. Client -> server kinds: hello
{role: operator|observer}, observe {kind}, command {kind, ...}.

Exactly one connection may hold the operator role and send events;
further operator claims are rejected with a reason. Read-only observers
are unlimited. The session keeps running (windows keep expiring on the
engine clock) whether or not any console is connected.
"""

from __future__ import annotations

import asyncio
import json
import queue
import threading
import time
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import AppConfig
from .iostream import StreamCounters, live_listen
from .pipeline import RunHooks, SessionRunner
from .simulate import ScenarioScript, simulate
from .store import SessionStore


class _Client:
    def __init__(self, ws: WebSocket, role: str, loop):
        self.ws = ws
        self.role = role
        self.loop = loop
        self.out_seq = 0
        self.in_seq = 0
        self.queue: asyncio.Queue = asyncio.Queue()
        self.alive = True

    def enqueue(self, kind: str, body: dict) -> None:
        """Thread-safe ordered send (consumed by the sender task)."""
        if not self.alive:
            return
        self.loop.call_soon_threadsafe(self.queue.put_nowait, (kind, body))

    async def sender(self) -> None:
        while True:
            kind, body = await self.queue.get()
            self.out_seq += 1
            await self.ws.send_text(json.dumps(
                {"type": kind, "seq": self.out_seq, "body": body}))


class Hub:
    """Connection registry and fan-out broadcaster."""

    def __init__(self):
        self.clients: list = []
        self.lock = threading.Lock()
        self.operator: Optional[_Client] = None

    def add(self, client: _Client) -> None:
        with self.lock:
            self.clients.append(client)

    def remove(self, client: _Client) -> None:
        client.alive = False
        with self.lock:
            if client in self.clients:
                self.clients.remove(client)
            if self.operator is client:
                self.operator = None

    def claim_operator(self, client: _Client) -> bool:
        with self.lock:
            if self.operator is not None:
                return False
            self.operator = client
            return True

    def broadcast(self, kind: str, body: dict) -> None:
        with self.lock:
            targets = list(self.clients)
        for c in targets:
            c.enqueue(kind, body)


def _skeleton_body(tracks) -> list:
    out = []
    for t in tracks:
        out.append({
            "track_id": t.track_id,
            "role": t.role,
            "keypoints": [round(float(v), 2) for v in
                          t.last_skeleton.data.reshape(-1)],
            "last_seen_ms": t.last_seen_ms,
        })
    return out


class GatewaySession:
    """Runs the pipeline in a worker thread and bridges it to the hub."""

    def __init__(self, cfg: AppConfig, source: str, store: SessionStore,
                 pace: str = "real", participant: Optional[str] = None):
        self.cfg = cfg
        self.source = source
        self.store = store
        self.pace = pace
        self.participant = participant
        self.hub = Hub()
        self.events: "queue.Queue" = queue.Queue()
        self.counters = StreamCounters()
        self.record = None
        self.thread: Optional[threading.Thread] = None
        self._min_gap_ms = 1000.0 / max(cfg.broadcast_max_fps, 1e-6)
        self._last_frame_sent = -1e12

    # -- broadcasting hooks ----------------------------------------------

    def _on_output(self, out: dict) -> None:
        kind = out.get("type")
        if kind == "outcome":
            self.hub.broadcast("outcome", out)
        elif kind == "aggregate":
            body = dict(out)
            body["aggregate"] = True
            self.hub.broadcast("outcome", body)
        elif kind in ("state", "window_armed", "phase"):
            self.hub.broadcast("state", out)
        elif kind == "warning":
            self.hub.broadcast("warning", out)
        elif kind == "suggestion":
            self.hub.broadcast("suggestion", out)

    def _on_frame(self, frame, tracks) -> None:
        if frame.timestamp_ms - self._last_frame_sent < self._min_gap_ms:
            return
        self._last_frame_sent = frame.timestamp_ms
        self.hub.broadcast("frame", {
            "t_ms": frame.timestamp_ms,
            "source": frame.source,
            "skeletons": _skeleton_body(tracks),
        })

    def _on_pose_command(self, cmd) -> None:
        self.hub.broadcast("suggestion", {
            "type": "suggestion", "kind": "pose_command",
            "t_ms": cmd.t_ms, "targets": cmd.targets,
        })

    # -- frame sources ------------------------------------------------------

    def _frames(self):
        if self.source.startswith("simulate:"):
            script = ScenarioScript.load(self.source.split(":", 1)[1])
            frames, scripted = simulate(script)
            if self.participant is None:
                self.participant = script.participant
            for t, payload in scripted:
                self.events.put((t, payload))
            return frames
        if self.source.startswith("live:"):
            _, host, port = self.source.split(":")
            if self.participant is None:
                self.participant = "F"
            return live_listen(host, int(port), self.counters)
        raise ValueError(f"unknown source: {self.source!r}")

    # -- run loop -----------------------------------------------------------

    def _run(self) -> None:
        frames = self._frames()
        hooks = RunHooks(on_frame=self._on_frame, on_output=self._on_output,
                         on_pose_command=self._on_pose_command)
        engine, log = self.store.open_session(self.participant,
                                              self.cfg.rubric)
        runner = SessionRunner(engine, log, self.cfg, hooks)
        start_wall = time.monotonic()
        pending: list = []
        last_t = 0
        for frame in frames:
            if self.pace == "real":
                lag = frame.timestamp_ms / 1000.0 - (time.monotonic() - start_wall)
                if lag > 0:
                    time.sleep(lag)
            while True:
                try:
                    t, payload = self.events.get_nowait()
                except queue.Empty:
                    break
                # operator events carry no scripted time: they are due now
                pending.append((frame.timestamp_ms if t is None else t,
                                payload))
            pending.sort(key=lambda ev: ev[0])
            while (pending and pending[0][0] <= frame.timestamp_ms
                   and engine.status == "running"):
                t, payload = pending.pop(0)
                runner.tick(t)
                if engine.status == "running":
                    runner.apply_event(t, payload)
            if engine.status != "running":
                break
            runner.process_frame(frame)
            last_t = max(last_t, frame.timestamp_ms)
        for t, payload in pending:
            if engine.status != "running":
                break
            runner.tick(max(t, last_t))
            if engine.status == "running":
                runner.apply_event(max(t, last_t), payload)
        if engine.status == "running":
            runner.apply_event(last_t, {"type": "command", "kind": "Abort"})
        self.record = self.store.write_record(engine)
        log.close()
        self.hub.broadcast("state", {"type": "state", "phase": engine.phase,
                                     "status": engine.status,
                                     "t_ms": engine.clock_ms,
                                     "window_deadline_ms": None,
                                     "movement": None, "mode": None,
                                     "with_objects": engine.with_objects})

    def start(self) -> None:
        self.thread = threading.Thread(target=self._run, daemon=True)
        self.thread.start()

    def push_operator_event(self, payload: dict) -> None:
        """Events from the console enter the engine at session-clock time."""
        self.events.put((None, payload))


def create_app(cfg: AppConfig, source: str, store: SessionStore,
               pace: str = "real", participant: Optional[str] = None) -> FastAPI:
    from contextlib import asynccontextmanager

    session = GatewaySession(cfg, source, store, pace, participant)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.loop = asyncio.get_running_loop()
        session.start()
        yield

    app = FastAPI(title="imigame gateway", lifespan=lifespan)
    app.state.session = session

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        loop = asyncio.get_running_loop()
        try:
            raw = await ws.receive_text()
            hello = json.loads(raw)
        except (WebSocketDisconnect, json.JSONDecodeError):
            await ws.close()
            return
        role = (hello.get("body") or {}).get("role", "observer")
        client = _Client(ws, role, loop)
        if role == "operator" and not session.hub.claim_operator(client):
            await ws.send_text(json.dumps({
                "type": "error", "seq": 1,
                "body": {"reason": "SecondOperator: an operator is already "
                                   "connected"}}))
            await ws.close()
            return
        session.hub.add(client)
        sender = asyncio.create_task(client.sender())
        client.enqueue("hello", {"role": role,
                                 "participant": session.participant})
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    client.enqueue("warning",
                                   {"message": "unparseable message ignored"})
                    continue
                seq = msg.get("seq")
                if isinstance(seq, int):
                    if client.in_seq and seq != client.in_seq + 1:
                        client.enqueue("warning",
                                       {"message": f"seq gap: got {seq}, "
                                                   f"expected {client.in_seq + 1}"})
                    client.in_seq = seq
                kind = msg.get("type")
                if kind not in ("observe", "command"):
                    client.enqueue("warning",
                                   {"message": f"unsupported type {kind!r}"})
                    continue
                if client.role != "operator":
                    client.enqueue("warning",
                                   {"message": "observers cannot send events"})
                    continue
                body = msg.get("body") or {}
                payload = {"type": kind, **body}
                session.push_operator_event(payload)
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            session.hub.remove(client)

    return app


def serve(cfg: AppConfig, source: str, listen: str, store: SessionStore,
          pace: str = "real", participant: Optional[str] = None) -> None:
    """Blocking entry point used by the CLI."""
    import uvicorn

    host, _, port = listen.partition(":")
    app = create_app(cfg, source, store, pace, participant)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8787),
                log_level="warning")
