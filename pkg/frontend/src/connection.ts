// Gateway link. Wraps one websocket, stamps outgoing frames with a strictly
// increasing seq, decodes what comes back and feeds the view buffer. The
// socket constructor is injectable so tests can run over a node client.

import {
  decode,
  encode,
  errorTextFrom,
  forceFrom,
  PROTOCOL_VERSION,
  ProtocolError,
  SequenceSource,
  stateFrom,
  type ClientKind,
  type SessionSnapshot,
  type Vec3,
} from './protocol.js';
import type { ConnectionStatus } from './view.js';

// the subset of the browser WebSocket shape the console needs; the `ws`
// package used by the tests satisfies it too
export interface SocketLike {
  onopen: ((event: unknown) => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: ((event: unknown) => void) | null;
  onerror: ((event: unknown) => void) | null;
  send(data: string): void;
  close(code?: number, reason?: string): void;
}

export type SocketCtor = new (url: string) => SocketLike;

export interface ConnectionOptions {
  url: string;
  socketCtor?: SocketCtor;
  onState?: (state: SessionSnapshot, tMs: number) => void;
  onForce?: (force: Vec3, tMs: number) => void;
  onGatewayError?: (text: string) => void;
  onStatus?: (status: ConnectionStatus) => void;
  onProtocolTrouble?: (text: string) => void;
}

export interface Connection {
  /** Send one frame; lockstep callers pass the session period in ms. */
  send(kind: ClientKind, payload: Record<string, unknown>, tMs?: number): void;
  close(): void;
  readonly status: ConnectionStatus;
  /** Resolves once the socket opens (handy for scripted drives). */
  readonly opened: Promise<void>;
}

export function connect(options: ConnectionOptions): Connection {
  const Ctor =
    options.socketCtor ??
    ((globalThis as { WebSocket?: SocketCtor }).WebSocket as SocketCtor | undefined);
  if (!Ctor) throw new Error('no WebSocket implementation available');

  const socket = new Ctor(options.url);
  const seqs = new SequenceSource();
  let status: ConnectionStatus = 'connecting';
  let openedAtMs = 0;

  let resolveOpened: () => void = () => undefined;
  let rejectOpened: (err: Error) => void = () => undefined;
  const opened = new Promise<void>((resolve, reject) => {
    resolveOpened = resolve;
    rejectOpened = reject;
  });
  opened.catch(() => undefined); // observed via await by callers that care

  const setStatus = (next: ConnectionStatus) => {
    status = next;
    options.onStatus?.(next);
  };

  socket.onopen = () => {
    openedAtMs = Date.now();
    setStatus('connected');
    resolveOpened();
  };
  socket.onclose = () => {
    setStatus('closed');
    rejectOpened(new Error('socket closed before opening'));
  };
  socket.onerror = () => {
    // the close handler carries the terminal state; nothing to do here
  };
  socket.onmessage = (event: { data: unknown }) => {
    const raw = typeof event.data === 'string' ? event.data : String(event.data);
    let message;
    try {
      message = decode(raw);
    } catch (err) {
      if (err instanceof ProtocolError) {
        options.onProtocolTrouble?.(err.message);
        return;
      }
      throw err;
    }
    if (message.kind === 'state_update') {
      options.onState?.(stateFrom(message), message.t);
    } else if (message.kind === 'force_echo') {
      options.onForce?.(forceFrom(message), message.t);
    } else if (message.kind === 'error') {
      options.onGatewayError?.(errorTextFrom(message));
    }
  };

  return {
    get status() {
      return status;
    },
    opened,
    send(kind: ClientKind, payload: Record<string, unknown>, tMs?: number) {
      if (status !== 'connected') return;
      const t = tMs ?? Date.now() - openedAtMs;
      socket.send(encode({ v: PROTOCOL_VERSION, kind, seq: seqs.take(), t, payload }));
    },
    close() {
      socket.close(1000, 'operator left');
    },
  };
}
