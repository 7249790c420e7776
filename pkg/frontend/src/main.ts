// Operator console app: wires the connection, view state, and DOM.

import { commandButtons, observationButtons } from "./buttons.js";
import { GatewayConnection } from "./connection.js";
import { drawOverlay } from "./overlay.js";
import {
  applyMessage, countdownSeconds, dismissSuggestion, initialState,
  ViewState,
} from "./viewmodel.js";

const params = new URLSearchParams(window.location.search);
const wsUrl = params.get("ws")
  ?? `ws://${window.location.hostname || "127.0.0.1"}:8787/ws`;
const role = (params.get("role") === "observer") ? "observer" : "operator";

let state: ViewState = initialState();
let objectsLatched = false;

const canvas = document.getElementById("overlay") as HTMLCanvasElement;
const phaseEl = document.getElementById("phase")!;
const countdownEl = document.getElementById("countdown")!;
const statusEl = document.getElementById("status")!;
const warningEl = document.getElementById("warning")!;
const buttonsEl = document.getElementById("buttons")!;
const outcomesEl = document.getElementById("outcomes")!;
const suggestionsEl = document.getElementById("suggestions")!;

const connection = new GatewayConnection(
  wsUrl, role,
  (msg) => {
    state = applyMessage(state, msg);
    if (state.needResync) {
      // out-of-order delivery: drop the socket and resubscribe
      state = { ...state, needResync: false };
      connection.close();
      window.setTimeout(() => window.location.reload(), 500);
      return;
    }
    render();
  },
  (s) => {
    state = { ...state, connection: s };
    render();
  });

function phaseLabel(): string {
  if (!state.phase) return "connecting…";
  if (state.phase === "imitation") {
    const m = state.movement === null ? "" : ` #${state.movement + 1}`;
    return `imitation${m} (${state.mode ?? ""})`
      + (state.withObjects ? " + objects" : "");
  }
  return state.phase;
}

function render(): void {
  statusEl.textContent =
    `${state.connection} | role: ${state.role ?? "…"}`
    + ` | participant: ${state.participant ?? "…"} | ${state.status}`;
  phaseEl.textContent = phaseLabel();

  const remaining = countdownSeconds(state);
  countdownEl.textContent =
    remaining === null ? "window not armed" : `${remaining.toFixed(1)} s`;

  warningEl.textContent = state.warning ?? "";
  warningEl.style.display = state.warning ? "block" : "none";

  drawOverlay(canvas, state.frame);
  renderButtons();
  renderOutcomes();
  renderSuggestions();
}

function renderButtons(): void {
  buttonsEl.innerHTML = "";
  if (role !== "operator") return;
  for (const spec of observationButtons(state)) {
    addButton(spec.label, "observe", spec.kind);
  }
  for (const spec of commandButtons(state)) {
    if (spec.kind === "UseObjects" && objectsLatched) {
      addButton("objects in use", "command", spec.kind, true);
    } else {
      addButton(spec.label, "command", spec.kind);
    }
  }
}

function addButton(label: string, message: "observe" | "command",
                   kind: string, disabled = false): void {
  const btn = document.createElement("button");
  btn.textContent = label;
  btn.disabled = disabled;
  btn.className = message;
  btn.onclick = () => {
    const sent = connection.send(message, { kind });
    if (!sent) {
      btn.classList.add("retry");
      btn.textContent = `${label} (retry)`;
      return;
    }
    if (kind === "UseObjects") {
      objectsLatched = true;
      render();
    }
  };
  buttonsEl.appendChild(btn);
}

function renderOutcomes(): void {
  outcomesEl.innerHTML = "";
  for (const o of state.outcomes) {
    const li = document.createElement("li");
    const where = o.aggregate ? "session"
      : o.movement === null ? o.phase
      : `${o.phase} #${o.movement + 1} ${o.mode ?? ""}`;
    li.textContent = `${where}: ${o.code}`
      + (o.withObjects ? " (objects)" : "");
    if (o.aggregate) li.className = "aggregate";
    outcomesEl.appendChild(li);
  }
}

function renderSuggestions(): void {
  suggestionsEl.innerHTML = "";
  for (const s of state.suggestions) {
    if (s.dismissed) continue;
    const div = document.createElement("div");
    div.className = "suggestion";
    div.textContent = `${s.kind} ${s.detail} — operator confirms via buttons `;
    const dismiss = document.createElement("button");
    dismiss.textContent = "dismiss";
    dismiss.onclick = () => {
      state = dismissSuggestion(state, s.id);
      render();
    };
    div.appendChild(dismiss);
    suggestionsEl.appendChild(div);
  }
}

connection.open();
render();
