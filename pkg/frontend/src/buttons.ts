// Button availability mirrors the engine's legal-event table exactly:
// showing a button the engine would reject (or hiding one it accepts)
// is a protocol bug, and the tests pin the mapping.

import { ViewState } from "./viewmodel.js";

export interface ButtonSpec {
  kind: string;       // event kind sent on the wire
  message: "observe" | "command";
  label: string;
}

const OBSERVE: Record<string, string[]> = {
  greetings: ["HandReach", "Smile", "HeadTowards"],
  pairing: ["HandHold", "Smile", "HeadTowards"],
  "imitation.demonstrate": ["ImitationAttempt", "JointAttention"],
  "imitation.mirroring": ["PositiveReaction", "IncreasedAttention"],
};

const LABELS: Record<string, string> = {
  HandReach: "Reached out",
  HandHold: "Held hand",
  Smile: "Smile",
  HeadTowards: "Head towards",
  JointAttention: "Joint attention",
  ImitationAttempt: "Imitation attempt",
  PositiveReaction: "Positive reaction",
  IncreasedAttention: "Increased attention",
  AdvancePhase: "Prompt given / advance",
  UseObjects: "Use objects",
  ReDemonstrate: "Re-demonstrate",
  StartMirroring: "Start mirroring",
  Abort: "Abort session",
};

function phaseKey(state: ViewState): string | null {
  if (state.phase === "imitation") {
    return state.mode ? `imitation.${state.mode}` : null;
  }
  return state.phase;
}

export function observationButtons(state: ViewState): ButtonSpec[] {
  const key = phaseKey(state);
  if (!key || state.status !== "running") return [];
  return (OBSERVE[key] ?? []).map((kind) => ({
    kind, message: "observe", label: LABELS[kind] ?? kind,
  }));
}

export function commandButtons(state: ViewState): ButtonSpec[] {
  if (state.status !== "running" || !state.phase) return [];
  const out: ButtonSpec[] = [];
  if (state.phase !== "closing" && state.phase !== "aborted") {
    out.push({ kind: "AdvancePhase", message: "command",
               label: LABELS.AdvancePhase });
  }
  if (state.phase === "imitation" && state.mode === "demonstrate") {
    out.push({ kind: "UseObjects", message: "command",
               label: LABELS.UseObjects });
    out.push({ kind: "ReDemonstrate", message: "command",
               label: LABELS.ReDemonstrate });
    out.push({ kind: "StartMirroring", message: "command",
               label: LABELS.StartMirroring });
  }
  out.push({ kind: "Abort", message: "command", label: LABELS.Abort });
  return out;
}
