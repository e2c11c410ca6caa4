// WebSocket client: parses frames, feeds the store, reconnects with
// capped exponential backoff, and exposes a single send(command) path so
// every user gesture maps to exactly one protocol command.

import { Command, parseFrame, ServerFrame } from "./protocol.js";

export interface LiveClientOptions {
  url: string;
  onFrame: (frame: ServerFrame) => void;
  onStatus: (connected: boolean) => void;
  socketFactory?: (url: string) => WebSocket;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
}

export class LiveClient {
  private ws: WebSocket | null = null;
  private closed = false;
  private backoff: number;
  private readonly initialBackoff: number;
  private readonly maxBackoff: number;
  private readonly makeSocket: (url: string) => WebSocket;

  constructor(private readonly opts: LiveClientOptions) {
    this.initialBackoff = opts.initialBackoffMs ?? 500;
    this.maxBackoff = opts.maxBackoffMs ?? 8000;
    this.backoff = this.initialBackoff;
    this.makeSocket = opts.socketFactory ?? ((url) => new WebSocket(url));
  }

  connect(): void {
    if (this.closed) return;
    const ws = this.makeSocket(this.opts.url);
    this.ws = ws;
    ws.onopen = () => {
      this.backoff = this.initialBackoff;
      this.opts.onStatus(true);
    };
    ws.onmessage = (ev: MessageEvent) => {
      const frame = parseFrame(String(ev.data));
      if (frame) this.opts.onFrame(frame);
    };
    ws.onclose = () => {
      this.opts.onStatus(false);
      this.ws = null;
      if (!this.closed) {
        setTimeout(() => this.connect(), this.backoff);
        this.backoff = Math.min(this.backoff * 2, this.maxBackoff);
      }
    };
    ws.onerror = () => {
      // onclose handles scheduling the retry
    };
  }

  send(command: Command): boolean {
    if (!this.ws || this.ws.readyState !== WebSocket.OPEN) return false;
    this.ws.send(JSON.stringify(command));
    return true;
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}

export function defaultWsUrl(loc: { protocol: string; host: string }): string {
  const scheme = loc.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${loc.host}/ws`;
}
