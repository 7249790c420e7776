// Wire protocol shared with the gateway: every message is
// {"type": kind, "seq": monotone-per-direction int, "body": {...}}.

export interface WireMessage {
  type: string;
  seq: number;
  body: Record<string, unknown>;
}

export interface SkeletonBody {
  track_id: number;
  role: "participant" | "model" | "unassigned";
  keypoints: number[]; // 54 floats: x, y, confidence per joint
  last_seen_ms: number;
}

export interface FrameBody {
  t_ms: number;
  source: string;
  skeletons: SkeletonBody[];
}

export interface StateBody {
  phase: string | null;
  movement: number | null;
  mode: string | null;
  with_objects: boolean;
  window_deadline_ms: number | null;
  status: string;
  t_ms: number;
}

export interface OutcomeBody {
  phase?: string;
  code: string;
  movement?: number | null;
  mode?: string | null;
  with_objects?: boolean;
  evidence?: number[];
  t_ms: number;
  aggregate?: boolean;
}

export function parseMessage(raw: string): WireMessage | null {
  try {
    const msg = JSON.parse(raw);
    if (typeof msg.type !== "string" || typeof msg.seq !== "number") {
      return null;
    }
    return msg as WireMessage;
  } catch {
    return null;
  }
}

export function encodeMessage(type: string, seq: number,
                              body: Record<string, unknown>): string {
  return JSON.stringify({ type, seq, body });
}
