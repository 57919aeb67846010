// Pointer drags become master_delta frames. Pointer events arrive much
// faster than the control rate, so samples accumulate into one pending
// vector that is flushed at most every control period. Drags outside the
// sampling phase are swallowed and reported once per gesture.

import type { Vec3 } from './protocol.js';

export const CONTROL_PERIOD_MS = 40; // 25 Hz, the gateway's control rate

export interface DragCoalescerOptions {
  mmPerPx: number;
  canSend: () => boolean; // session in the sampling phase and connected
  send: (deltaMm: Vec3) => void;
  onSwallowed?: (reason: string) => void;
  periodMs?: number;
}

export interface DragCoalescer {
  /** Begin a gesture at pointer position (px). */
  start(xPx: number, yPx: number, nowMs: number): void;
  /** Pointer moved; pane decides which axes the screen motion drives. */
  move(xPx: number, yPx: number, axes: 'xy' | 'z', nowMs: number): void;
  end(): void;
  /** Emit the pending vector if a period elapsed; call from the render loop. */
  flush(nowMs: number): void;
  readonly dragging: boolean;
}

export function createDragCoalescer(options: DragCoalescerOptions): DragCoalescer {
  const periodMs = options.periodMs ?? CONTROL_PERIOD_MS;
  let dragging = false;
  let swallowedThisGesture = false;
  let lastX = 0;
  let lastY = 0;
  let lastSentMs = -Infinity;
  const pending: Vec3 = [0, 0, 0];

  function flush(nowMs: number): void {
    if (nowMs - lastSentMs < periodMs) return;
    if (pending[0] === 0 && pending[1] === 0 && pending[2] === 0) return;
    options.send([pending[0], pending[1], pending[2]]);
    pending[0] = pending[1] = pending[2] = 0;
    lastSentMs = nowMs;
  }

  return {
    get dragging() {
      return dragging;
    },
    start(xPx: number, yPx: number, nowMs: number) {
      dragging = true;
      swallowedThisGesture = false;
      lastX = xPx;
      lastY = yPx;
      // a fresh gesture may fire immediately on its first movement
      if (nowMs - lastSentMs >= periodMs) lastSentMs = nowMs - periodMs;
    },
    move(xPx: number, yPx: number, axes: 'xy' | 'z', nowMs: number) {
      if (!dragging) return;
      const dxMm = (xPx - lastX) * options.mmPerPx;
      const dyMm = (yPx - lastY) * options.mmPerPx;
      lastX = xPx;
      lastY = yPx;
      if (!options.canSend()) {
        if (!swallowedThisGesture) {
          swallowedThisGesture = true;
          options.onSwallowed?.('drag ignored: session is not in the sampling phase');
        }
        return;
      }
      if (axes === 'xy') {
        pending[0] += dxMm;
        pending[1] -= dyMm; // screen y grows downward
      } else {
        pending[2] += dyMm; // side pane: dragging down inserts deeper
      }
      flush(nowMs);
    },
    end() {
      dragging = false;
    },
    flush,
  };
}
