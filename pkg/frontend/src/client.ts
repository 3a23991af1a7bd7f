/**
 * Session client: speaks the JSON protocol over any WebSocket-shaped
 * transport and routes server messages to the voxel store and to
 * registered listeners.
 *
 * The socket is injected (anything with send/onmessage), so tests can
 * drive the client with a recorded message log instead of a server.
 */
import { VoxelStore } from "./voxelStore";
import {
  type ClientMessage,
  type ServerMessage,
  parseServerMessage,
} from "./protocol";

export interface SocketLike {
  send(data: string): void;
  onmessage: ((ev: { data: string }) => void) | null;
}

export type MessageListener = (msg: ServerMessage) => void;

export class SessionClient {
  readonly store = new VoxelStore();
  private listeners: MessageListener[] = [];
  /** messages the client could not parse; surfaced for diagnostics */
  readonly rejectedLines: string[] = [];

  constructor(private readonly socket: SocketLike) {
    socket.onmessage = (ev) => this.handleLine(ev.data);
  }

  onMessage(listener: MessageListener): void {
    this.listeners.push(listener);
  }

  send(msg: ClientMessage): void {
    this.socket.send(JSON.stringify(msg));
  }

  sendPose(p: number[], q: number[], t: number): void {
    this.send({ type: "pose", p, q, t });
  }

  handleLine(line: string): void {
    const msg = parseServerMessage(line);
    if (msg === null) {
      this.rejectedLines.push(line);
      return;
    }
    switch (msg.type) {
      case "guidance_full":
        this.store.applyFull(msg);
        break;
      case "guidance_diff":
        this.store.applyDiff(msg);
        break;
      case "region_updated":
        // voxel set is void under the new region; a full frame follows
        this.store.invalidate();
        break;
    }
    for (const l of this.listeners) l(msg);
  }
}
