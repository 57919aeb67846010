// Browser entry: wires the DOM to the connection, the latest-snapshot view
// buffer and the drag coalescer, and repaints on a requestAnimationFrame
// loop that the 25 Hz state stream can never outrun.

import { connect, type Connection } from './connection.js';
import { FORCE_LIMIT_N, formatForce } from './forceGauge.js';
import { CONTROL_PERIOD_MS, createDragCoalescer } from './masterInput.js';
import { paintPane, sceneGeometry, type PaneCanvas } from './scene.js';
import {
  pressureAccepted,
  pressurePayload,
  scaleAccepted,
  scalePayload,
  vfDiameterAccepted,
  vfPayload,
} from './sliders.js';
import { createViewBuffer, displayedVfDiameterMm } from './view.js';

const MM_PER_PX = 0.25; // pointer calibration: 4 px of drag is 1 mm of master motion

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function toast(text: string): void {
  const box = byId<HTMLDivElement>('toast');
  box.textContent = text;
  box.classList.add('visible');
  window.setTimeout(() => box.classList.remove('visible'), 2200);
}

function paneFor(canvas: HTMLCanvasElement, mmSpan: number, flipY: boolean): PaneCanvas {
  const ctx = canvas.getContext('2d');
  if (!ctx) throw new Error('canvas 2d context unavailable');
  return { ctx, width: canvas.width, height: canvas.height, mmSpan, flipY };
}

function main(): void {
  const view = createViewBuffer('drag');
  let conn: Connection | null = null;

  const topPane = paneFor(byId<HTMLCanvasElement>('topView'), 160, false);
  const sidePane = paneFor(byId<HTMLCanvasElement>('sideView'), 220, true);

  const coalescer = createDragCoalescer({
    mmPerPx: MM_PER_PX,
    canSend: () =>
      conn?.status === 'connected' &&
      view.view.mode === 'drag' &&
      view.view.state?.phase === 'TeleopSampling',
    send: (delta) =>
      conn?.send('master_delta', { dx_mm: delta[0], dy_mm: delta[1], dz_mm: delta[2] }),
    onSwallowed: toast,
  });

  const wireDrag = (canvas: HTMLCanvasElement, axes: 'xy' | 'z') => {
    canvas.addEventListener('pointerdown', (ev) => {
      canvas.setPointerCapture(ev.pointerId);
      coalescer.start(ev.clientX, ev.clientY, performance.now());
    });
    canvas.addEventListener('pointermove', (ev) => {
      coalescer.move(ev.clientX, ev.clientY, axes, performance.now());
    });
    canvas.addEventListener('pointerup', () => coalescer.end());
    canvas.addEventListener('pointercancel', () => coalescer.end());
  };
  wireDrag(byId<HTMLCanvasElement>('topView'), 'xy');
  wireDrag(byId<HTMLCanvasElement>('sideView'), 'z');

  // phase and gripper controls
  const sendEvent = (event: string) => conn?.send('phase_event', { event });
  byId<HTMLButtonElement>('btnStart').onclick = () => sendEvent('start');
  byId<HTMLButtonElement>('btnAdvance').onclick = () => sendEvent('advance');
  byId<HTMLButtonElement>('btnLock').onclick = () => sendEvent('lock');
  byId<HTMLButtonElement>('btnAbort').onclick = () => sendEvent('abort');
  byId<HTMLButtonElement>('btnPedal').onclick = () => conn?.send('pedal', {});
  byId<HTMLButtonElement>('btnTrigger').onclick = () => conn?.send('trigger', {});

  // RCM jogs step the insertion or angle target relative to the live state
  const jog = (joint: string, field: 'j1_mm' | 'j2_deg' | 'j3_deg', step: number) => {
    const rcm = view.view.state?.rcm;
    if (!rcm) return;
    conn?.send('jog', { joint, target: rcm[field] + step });
  };
  byId<HTMLButtonElement>('jogInMinus').onclick = () => jog('j1', 'j1_mm', -5);
  byId<HTMLButtonElement>('jogInPlus').onclick = () => jog('j1', 'j1_mm', 5);
  byId<HTMLButtonElement>('jogSagMinus').onclick = () => jog('j2', 'j2_deg', -5);
  byId<HTMLButtonElement>('jogSagPlus').onclick = () => jog('j2', 'j2_deg', 5);
  byId<HTMLButtonElement>('jogFroMinus').onclick = () => jog('j3', 'j3_deg', -5);
  byId<HTMLButtonElement>('jogFroPlus').onclick = () => jog('j3', 'j3_deg', 5);

  // sliders reject out-of-band values before anything reaches the wire
  const vfSlider = byId<HTMLInputElement>('vfDiameter');
  vfSlider.onchange = () => {
    const value = Number(vfSlider.value);
    if (!vfDiameterAccepted(value)) {
      toast(`fixture diameter ${value} mm is outside 20 to 60 mm`);
      vfSlider.value = String(displayedVfDiameterMm(view.view.state));
      return;
    }
    conn?.send('set_vf_radius', vfPayload(value));
  };
  const pressureSlider = byId<HTMLInputElement>('pressure');
  pressureSlider.onchange = () => {
    const value = Number(pressureSlider.value);
    if (!pressureAccepted(value)) {
      toast(`pressure ${value} kPa is outside 0 to 90 kPa`);
      return;
    }
    conn?.send('set_pressure', pressurePayload(value));
  };
  const scaleSlider = byId<HTMLInputElement>('scale');
  scaleSlider.onchange = () => {
    const value = Number(scaleSlider.value);
    if (!scaleAccepted(value)) {
      toast(`motion scale ${value} is out of range`);
      return;
    }
    conn?.send('set_scale', scalePayload(value));
  };

  byId<HTMLButtonElement>('btnConnect').onclick = () => {
    conn?.close();
    const url = byId<HTMLInputElement>('gatewayUrl').value;
    conn = connect({
      url,
      onState: (state) => view.offerState(state),
      onForce: (force) => view.offerForce(force),
      onGatewayError: (text) => {
        view.noteError(text);
        toast(text);
      },
      onStatus: (status) => view.setStatus(status),
      onProtocolTrouble: (text) => view.noteError(text),
    });
  };

  const gaugeFill = byId<HTMLDivElement>('gaugeFill');
  const gaugeLine = byId<HTMLDivElement>('gaugeLine');
  const gaugeLabel = byId<HTMLSpanElement>('gaugeLabel');
  const phaseLabel = byId<HTMLSpanElement>('phaseLabel');
  const statusLabel = byId<HTMLSpanElement>('statusLabel');
  const errorLabel = byId<HTMLSpanElement>('errorLabel');

  const repaint = () => {
    const geometry = sceneGeometry(view.view);
    paintPane(topPane, geometry.top, geometry.greyed);
    paintPane(sidePane, geometry.side, geometry.greyed);
    gaugeFill.style.width = `${(geometry.gauge.fraction * 100).toFixed(1)}%`;
    gaugeFill.classList.toggle('over', geometry.gauge.over);
    gaugeLine.style.left = `${(geometry.gauge.limitFraction * 100).toFixed(1)}%`;
    gaugeLabel.textContent = `${formatForce(geometry.gauge.magnitudeN)} / ${FORCE_LIMIT_N} N`;
    phaseLabel.textContent = geometry.phase || 'no session';
    statusLabel.textContent = view.view.status;
    errorLabel.textContent = view.view.lastError;
    const state = view.view.state;
    if (state && document.activeElement !== vfSlider) {
      vfSlider.value = String(displayedVfDiameterMm(state));
    }
  };

  let lastFlushMs = 0;
  const frame = (nowMs: number) => {
    if (nowMs - lastFlushMs >= CONTROL_PERIOD_MS) {
      coalescer.flush(nowMs);
      lastFlushMs = nowMs;
    }
    if (view.pull() !== null) repaint();
    window.requestAnimationFrame(frame);
  };
  repaint();
  window.requestAnimationFrame(frame);
}

main();
