// View state is a pure fold over received wire messages. The console
// never invents data: every displayed code arrived in an outcome
// message, the countdown derives from engine-sent deadlines and engine
// clock (never the local clock), and a sequence gap only raises the
// resync flag.

import {
  FrameBody, OutcomeBody, StateBody, WireMessage,
} from "./protocol.js";

export interface Suggestion {
  id: number;
  kind: string;
  detail: string;
  dismissed: boolean;
}

export interface OutcomeRow {
  phase: string;
  code: string;
  movement: number | null;
  mode: string | null;
  withObjects: boolean;
  aggregate: boolean;
}

export interface ViewState {
  connection: "connecting" | "connected" | "closed";
  role: string | null;
  participant: string | null;
  lastSeq: number;
  seqGaps: number;
  needResync: boolean;
  frame: FrameBody | null;
  framesReceived: number;
  phase: string | null;
  movement: number | null;
  mode: string | null;
  status: string;
  withObjects: boolean;
  deadlineMs: number | null;
  engineClockMs: number;
  outcomes: OutcomeRow[];
  suggestions: Suggestion[];
  warning: string | null;
  errorReason: string | null;
  nextSuggestionId: number;
}

export function initialState(): ViewState {
  return {
    connection: "connecting",
    role: null,
    participant: null,
    lastSeq: 0,
    seqGaps: 0,
    needResync: false,
    frame: null,
    framesReceived: 0,
    phase: null,
    movement: null,
    mode: null,
    status: "running",
    withObjects: false,
    deadlineMs: null,
    engineClockMs: 0,
    outcomes: [],
    suggestions: [],
    warning: null,
    errorReason: null,
    nextSuggestionId: 1,
  };
}

export function applyMessage(state: ViewState, msg: WireMessage): ViewState {
  const next = { ...state, outcomes: [...state.outcomes],
                 suggestions: [...state.suggestions] };
  if (next.lastSeq > 0 && msg.seq !== next.lastSeq + 1) {
    next.seqGaps += 1;
    next.needResync = true; // duplicate or out-of-order delivery
  }
  next.lastSeq = Math.max(next.lastSeq, msg.seq);

  switch (msg.type) {
    case "hello": {
      next.connection = "connected";
      next.role = (msg.body.role as string) ?? null;
      next.participant = (msg.body.participant as string) ?? null;
      break;
    }
    case "frame": {
      next.frame = msg.body as unknown as FrameBody;
      next.framesReceived += 1;
      break;
    }
    case "state": {
      const body = msg.body as unknown as StateBody;
      if (body.phase !== undefined && body.phase !== null) {
        next.phase = body.phase;
      }
      if (body.movement !== undefined) next.movement = body.movement;
      if (body.mode !== undefined) next.mode = body.mode;
      if (body.status) next.status = body.status;
      if (body.with_objects !== undefined) {
        next.withObjects = !!body.with_objects;
      }
      if (body.window_deadline_ms !== undefined) {
        next.deadlineMs = body.window_deadline_ms;
      }
      if (typeof body.t_ms === "number") {
        next.engineClockMs = Math.max(next.engineClockMs, body.t_ms);
      }
      break;
    }
    case "outcome": {
      const body = msg.body as unknown as OutcomeBody;
      next.outcomes.push({
        phase: body.phase ?? "session",
        code: body.code,
        movement: body.movement ?? null,
        mode: body.mode ?? null,
        withObjects: !!body.with_objects,
        aggregate: !!body.aggregate,
      });
      break;
    }
    case "suggestion": {
      const kind = (msg.body.kind as string) ?? "suggestion";
      if (kind !== "pose_command") { // pose targets go to the robot, not the UI
        next.suggestions.push({
          id: next.nextSuggestionId,
          kind,
          detail: JSON.stringify(msg.body.stats ?? {}),
          dismissed: false,
        });
        next.nextSuggestionId += 1;
      }
      break;
    }
    case "warning": {
      next.warning = (msg.body.message as string) ?? "warning";
      break;
    }
    case "error": {
      next.errorReason = (msg.body.reason as string) ?? "error";
      next.connection = "closed";
      break;
    }
    default:
      break;
  }
  return next;
}

export function dismissSuggestion(state: ViewState, id: number): ViewState {
  return {
    ...state,
    suggestions: state.suggestions.map(
      (s) => (s.id === id ? { ...s, dismissed: true } : s)),
  };
}

// Seconds remaining in the current window, from engine-reported times
// only; never negative, null when no window is armed.
export function countdownSeconds(state: ViewState): number | null {
  if (state.deadlineMs === null || state.deadlineMs === undefined) {
    return null;
  }
  return Math.max(0, (state.deadlineMs - state.engineClockMs) / 1000);
}

export function displayedCodes(state: ViewState): string[] {
  return state.outcomes.map((o) => o.code);
}
