// Wire frames shared with the gateway. Every message is one JSON object
// {"v": 1, "kind": ..., "seq": ..., "t": ..., "payload": {...}} with t in
// session milliseconds and seq strictly increasing per sender.

export const PROTOCOL_VERSION = 1;

export type Vec3 = [number, number, number];

export const CLIENT_KINDS = [
  'master_delta',
  'trigger',
  'pedal',
  'jog',
  'set_pressure',
  'set_vf_radius',
  'set_scale',
  'phase_event',
] as const;

export const SERVER_KINDS = ['state_update', 'force_echo', 'error'] as const;

export type ClientKind = (typeof CLIENT_KINDS)[number];
export type ServerKind = (typeof SERVER_KINDS)[number];
export type Kind = ClientKind | ServerKind;

export interface WireMessage {
  v: number;
  kind: Kind;
  seq: number;
  t: number;
  payload: Record<string, unknown>;
}

// mirror of the session snapshot the gateway publishes in state_update
export interface SessionSnapshot {
  t_s: number;
  step: number;
  phase: string;
  wrist: { alpha_rad: number; beta_rad: number; length_mm: number };
  tip_scene_mm: Vec3;
  rcm: { j1_mm: number; j2_deg: number; j3_deg: number };
  gripper: string;
  pressure_kpa: number;
  fixture: {
    enabled: boolean;
    r_throat_mm: number;
    l_button_mm: number;
    k_axial_effective_n_per_mm: number;
  };
  force_n: Vec3;
}

export class ProtocolError extends Error {}

export class ProtocolVersionError extends ProtocolError {}

const ALL_KINDS = new Set<string>([...CLIENT_KINDS, ...SERVER_KINDS]);

function isFiniteNumber(value: unknown): value is number {
  return typeof value === 'number' && Number.isFinite(value);
}

export function encode(message: WireMessage): string {
  if (!isFiniteNumber(message.seq) || !isFiniteNumber(message.t)) {
    throw new ProtocolError('seq and t must be finite numbers');
  }
  return JSON.stringify({
    v: message.v,
    kind: message.kind,
    seq: message.seq,
    t: message.t,
    payload: message.payload,
  });
}

export function decode(raw: string): WireMessage {
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch {
    throw new ProtocolError('frame is not valid JSON');
  }
  if (typeof parsed !== 'object' || parsed === null || Array.isArray(parsed)) {
    throw new ProtocolError('frame must be a JSON object');
  }
  const obj = parsed as Record<string, unknown>;
  if (obj.v !== PROTOCOL_VERSION) {
    throw new ProtocolVersionError(`unsupported protocol version ${String(obj.v)}`);
  }
  const { kind, seq, t, payload } = obj;
  if (typeof kind !== 'string' || !ALL_KINDS.has(kind)) {
    throw new ProtocolError(`unknown message kind '${String(kind)}'`);
  }
  if (!isFiniteNumber(seq) || !isFiniteNumber(t)) {
    throw new ProtocolError('seq and t must be finite numbers');
  }
  if (typeof payload !== 'object' || payload === null || Array.isArray(payload)) {
    throw new ProtocolError('payload must be a JSON object');
  }
  return { v: PROTOCOL_VERSION, kind: kind as Kind, seq, t, payload: payload as Record<string, unknown> };
}

// narrow the payloads this console actually consumes

export function stateFrom(message: WireMessage): SessionSnapshot {
  const state = message.payload.state;
  if (typeof state !== 'object' || state === null) {
    throw new ProtocolError('state_update payload carries no state object');
  }
  return state as unknown as SessionSnapshot;
}

export function forceFrom(message: WireMessage): Vec3 {
  const force = message.payload.force_n;
  if (!Array.isArray(force) || force.length !== 3 || !force.every(isFiniteNumber)) {
    throw new ProtocolError('force_echo payload needs force_n with three components');
  }
  return [force[0], force[1], force[2]] as Vec3;
}

export function errorTextFrom(message: WireMessage): string {
  const text = message.payload.message;
  return typeof text === 'string' ? text : 'unspecified gateway error';
}

/** Hands out 1, 2, 3, ... so outgoing seq is strictly increasing. */
export class SequenceSource {
  private next = 1;

  take(): number {
    return this.next++;
  }
}
