// Client-side session state: connection, the seq-ordered frame log, pending
// input, and the mode banner. The log is the single source of truth for the
// transcript; rendering is a pure function of it.

import { FrameParseError, parseFrame, PROTOCOL_VERSION, WireFrame } from "./protocol.js";

export type ConnectionState = "connecting" | "open" | "closed";

export interface ClientSessionView {
  connection: ConnectionState;
  frames: WireFrame[];
  pendingInput: string;
  mode: string | null;
  sessionId: string | null;
}

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string, protocols: string[]) => SocketLike;

const defaultFactory: SocketFactory = (url, protocols) =>
  new WebSocket(url, protocols) as unknown as SocketLike;

/**
 * Chat connection: speaks bloom-proto/1, keeps the frame log in seq order,
 * and resumes from the last acknowledged seq after a reconnect.
 */
export class ChatSocket {
  readonly view: ClientSessionView = {
    connection: "connecting",
    frames: [],
    pendingInput: "",
    mode: null,
    sessionId: null,
  };

  onChange: (view: ClientSessionView) => void = () => {};

  private socket: SocketLike;
  private outSeq = 0;
  private lastServerSeq = 0;
  private factory: SocketFactory;

  constructor(
    private url: string,
    factory: SocketFactory = defaultFactory,
  ) {
    this.factory = factory;
    this.socket = this.connect(factory);
  }

  /** Re-dial after a drop; the server replays frames past lastSeq. */
  reconnect(): void {
    this.view.connection = "connecting";
    this.socket = this.connect(this.factory);
  }

  private connect(factory: SocketFactory): SocketLike {
    const socket = factory(this.url, [PROTOCOL_VERSION]);
    socket.onopen = () => {
      this.view.connection = "open";
      if (this.view.sessionId !== null) {
        this.sendFrame("sessionControl", { action: "resume", lastSeq: this.lastServerSeq });
      }
      this.onChange(this.view);
    };
    socket.onmessage = (event) => this.receive(event.data);
    socket.onclose = () => {
      this.view.connection = "closed";
      this.onChange(this.view);
    };
    return socket;
  }

  get isOpen(): boolean {
    return this.view.connection === "open";
  }

  private sendFrame(type: WireFrame["type"], payload: Record<string, unknown>): void {
    this.outSeq += 1;
    this.socket.send(JSON.stringify({
      type,
      sessionId: this.view.sessionId,
      seq: this.outSeq,
      payload,
    }));
  }

  startSession(mode: string): void {
    this.sendFrame("sessionControl", { action: "start", mode });
  }

  endSession(): void {
    this.sendFrame("sessionControl", { action: "end" });
  }

  sendUserMessage(text: string): void {
    // Echo optimistically for input only; server frames own the transcript.
    this.appendFrame({
      type: "userMessage",
      sessionId: this.view.sessionId,
      seq: this.nextLocalSeq(),
      payload: { text },
    });
    this.sendFrame("userMessage", { text });
    this.view.pendingInput = "";
    this.onChange(this.view);
  }

  /** Local echo frames slot between server seqs without disturbing ordering. */
  private nextLocalSeq(): number {
    return this.lastServerSeq + 0.5;
  }

  private receive(raw: string): void {
    let frame: WireFrame;
    try {
      frame = parseFrame(raw);
    } catch (err) {
      if (err instanceof FrameParseError) {
        this.appendFrame({
          type: "error",
          sessionId: this.view.sessionId,
          seq: this.nextLocalSeq(),
          payload: { code: "client_parse", message: err.message },
        });
        this.onChange(this.view);
        return;
      }
      throw err;
    }
    if (frame.type === "sessionControl") {
      const action = frame.payload.action;
      if (action === "started") {
        this.view.sessionId = String(frame.payload.sessionId);
        this.view.mode = String(frame.payload.mode ?? "");
      }
      if (action === "ended") {
        this.view.mode = null;
      }
    }
    if (frame.seq > this.lastServerSeq) {
      this.lastServerSeq = Math.floor(frame.seq);
    }
    this.appendFrame(frame);
    this.onChange(this.view);
  }

  /** Insert keeping the log sorted by seq; duplicates (resume replays) drop. */
  private appendFrame(frame: WireFrame): void {
    const existing = this.view.frames.some(
      (f) => f.seq === frame.seq && f.type === frame.type && f.sessionId === frame.sessionId,
    );
    if (existing) {
      return;
    }
    const index = this.view.frames.findIndex((f) => f.seq > frame.seq);
    if (index === -1) {
      this.view.frames.push(frame);
    } else {
      this.view.frames.splice(index, 0, frame);
    }
  }
}
