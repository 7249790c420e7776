// Gateway connection: seq-stamped sends, capped-backoff reconnect.

import { encodeMessage, parseMessage, WireMessage } from "./protocol.js";

export type MessageHandler = (msg: WireMessage) => void;

export class GatewayConnection {
  private ws: WebSocket | null = null;
  private sendSeq = 0;
  private retryMs = 1000;
  private closed = false;

  constructor(private url: string,
              private role: "operator" | "observer",
              private onMessage: MessageHandler,
              private onStatus: (s: "connecting" | "connected" | "closed")
                => void) {}

  open(): void {
    this.onStatus("connecting");
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => {
      this.retryMs = 1000;
      this.sendSeq = 0;
      this.send("hello", { role: this.role });
      this.onStatus("connected");
    };
    this.ws.onmessage = (ev) => {
      const msg = parseMessage(String(ev.data));
      if (msg) this.onMessage(msg);
    };
    this.ws.onclose = () => {
      this.onStatus("closed");
      if (!this.closed) {
        setTimeout(() => this.open(), this.retryMs);
        this.retryMs = Math.min(this.retryMs * 2, 8000);
      }
    };
    this.ws.onerror = () => { /* onclose handles retry */ };
  }

  send(type: string, body: Record<string, unknown>): boolean {
    if (!this.ws || this.ws.readyState !== WebSocket.OPEN) return false;
    this.sendSeq += 1;
    this.ws.send(encodeMessage(type, this.sendSeq, body));
    return true;
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
