import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { defaultWsUrl, LiveClient } from "../src/client.js";
import { ServerFrame } from "../src/protocol.js";

class FakeSocket {
  static instances: FakeSocket[] = [];
  static OPEN = 1;
  readyState = 0;
  sent: string[] = [];
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;

  constructor(public url: string) {
    FakeSocket.instances.push(this);
  }

  open(): void {
    this.readyState = FakeSocket.OPEN;
    this.onopen?.();
  }

  emit(frame: object): void {
    this.onmessage?.({ data: JSON.stringify(frame) });
  }

  close(): void {
    this.readyState = 3;
    this.onclose?.();
  }

  send(text: string): void {
    this.sent.push(text);
  }
}

// LiveClient checks WebSocket.OPEN; point it at the fake's constant.
vi.stubGlobal("WebSocket", FakeSocket);

function makeClient(frames: ServerFrame[], status: boolean[]): LiveClient {
  return new LiveClient({
    url: "ws://test/ws",
    onFrame: (f) => frames.push(f),
    onStatus: (s) => status.push(s),
    socketFactory: (url) => new FakeSocket(url) as unknown as WebSocket,
    initialBackoffMs: 10,
    maxBackoffMs: 40,
  });
}

describe("LiveClient", () => {
  beforeEach(() => {
    FakeSocket.instances = [];
    vi.useFakeTimers();
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("delivers parsed frames and drops junk", () => {
    const frames: ServerFrame[] = [];
    const client = makeClient(frames, []);
    client.connect();
    const ws = FakeSocket.instances[0];
    ws.open();
    ws.emit({ type: "snapshot", seq: 1, time_ms: 50, order_parameter: 1, agents: [] });
    ws.onmessage?.({ data: "garbage" });
    expect(frames.length).toBe(1);
    expect(frames[0].type).toBe("snapshot");
  });

  it("reconnects with growing backoff and resets it on success", () => {
    const status: boolean[] = [];
    const client = makeClient([], status);
    client.connect();
    FakeSocket.instances[0].open();
    FakeSocket.instances[0].close();
    expect(FakeSocket.instances.length).toBe(1);
    vi.advanceTimersByTime(10);
    expect(FakeSocket.instances.length).toBe(2);
    FakeSocket.instances[1].close(); // failed attempt: backoff doubles to 20
    vi.advanceTimersByTime(10);
    expect(FakeSocket.instances.length).toBe(2);
    vi.advanceTimersByTime(10);
    expect(FakeSocket.instances.length).toBe(3);
    expect(status).toEqual([true, false, false]);
  });

  it("stops reconnecting after close()", () => {
    const client = makeClient([], []);
    client.connect();
    const ws = FakeSocket.instances[0];
    ws.open();
    client.close();
    vi.advanceTimersByTime(1000);
    expect(FakeSocket.instances.length).toBe(1);
  });

  it("send() only succeeds on an open socket", () => {
    const client = makeClient([], []);
    expect(client.send({ type: "pause" })).toBe(false);
    client.connect();
    const ws = FakeSocket.instances[0];
    ws.open();
    expect(client.send({ type: "pause" })).toBe(true);
    expect(JSON.parse(ws.sent[0])).toEqual({ type: "pause" });
  });
});

describe("defaultWsUrl", () => {
  it("maps http(s) to ws(s) on the same host", () => {
    expect(defaultWsUrl({ protocol: "http:", host: "localhost:8000" }))
      .toBe("ws://localhost:8000/ws");
    expect(defaultWsUrl({ protocol: "https:", host: "sim.example" }))
      .toBe("wss://sim.example/ws");
  });
});
