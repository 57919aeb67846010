// The console's model of the session: a latest-snapshot buffer fed by the
// connection and drained by the render loop. The view never runs ahead of
// the gateway; every displayed pose came out of a state_update.

import type { SessionSnapshot, Vec3 } from './protocol.js';
import { VF_DIAMETER_MAX_MM, VF_DIAMETER_MIN_MM } from './sliders.js';

export type ConnectionStatus = 'connecting' | 'connected' | 'closed';
export type InputMode = 'drag' | 'replay-preview';

export interface UiSessionView {
  status: ConnectionStatus;
  mode: InputMode;
  state: SessionSnapshot | null;
  forceEchoN: Vec3;
  lastError: string;
  statesReceived: number;
  statesDiscarded: number; // arrived while an older one was still unrendered
}

export interface ViewBuffer {
  readonly view: UiSessionView;
  offerState(state: SessionSnapshot): void;
  offerForce(force: Vec3): void;
  setStatus(status: ConnectionStatus): void;
  setMode(mode: InputMode): void;
  noteError(text: string): void;
  /** Pull the freshest snapshot for one render pass; null means no change. */
  pull(): UiSessionView | null;
}

/** Displayed fixture diameter is kept inside the legal band no matter what. */
export function displayedVfDiameterMm(state: SessionSnapshot | null): number {
  if (state === null) return VF_DIAMETER_MIN_MM;
  const diameter = 2.0 * state.fixture.r_throat_mm;
  return Math.min(VF_DIAMETER_MAX_MM, Math.max(VF_DIAMETER_MIN_MM, diameter));
}

export function createViewBuffer(mode: InputMode = 'drag'): ViewBuffer {
  const view: UiSessionView = {
    status: 'connecting',
    mode,
    state: null,
    forceEchoN: [0, 0, 0],
    lastError: '',
    statesReceived: 0,
    statesDiscarded: 0,
  };
  let dirty = false;
  let pendingUnrendered = false;

  return {
    view,
    offerState(state: SessionSnapshot) {
      if (pendingUnrendered) view.statesDiscarded += 1;
      view.state = state;
      view.statesReceived += 1;
      pendingUnrendered = true;
      dirty = true;
    },
    offerForce(force: Vec3) {
      view.forceEchoN = force;
      dirty = true;
    },
    setStatus(status: ConnectionStatus) {
      view.status = status;
      dirty = true;
    },
    setMode(nextMode: InputMode) {
      view.mode = nextMode;
      dirty = true;
    },
    noteError(text: string) {
      view.lastError = text;
      dirty = true;
    },
    pull(): UiSessionView | null {
      if (!dirty) return null;
      dirty = false;
      pendingUnrendered = false;
      return view;
    },
  };
}
