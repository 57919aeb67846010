// 2.5D scene: a top pane looking down the insertion axis (x right, y up)
// and a side pane (y right, z up, z is insertion depth). Geometry is
// computed here in wrist-frame millimetres; painting scales it to pixels.

import { FORCE_LIMIT_N, gaugeState, type GaugeState } from './forceGauge.js';
import type { UiSessionView } from './view.js';
import { arcPolyline, tipPosition } from './wrist.js';

export interface PaneGeometry {
  arc: Array<[number, number]>; // centerline polyline, pane coordinates
  tool: [[number, number], [number, number]]; // arc end to tool point
  disk: { center: [number, number]; radiusMm: number } | null;
  depthLineMm: number | null; // side pane only: the arc-length bound plane
}

export interface SceneGeometry {
  top: PaneGeometry;
  side: PaneGeometry;
  gauge: GaugeState;
  phase: string;
  greyed: boolean; // disconnected: draw everything, then the grey veil
}

const topOf = (p: [number, number, number]): [number, number] => [p[0], p[1]];
const sideOf = (p: [number, number, number]): [number, number] => [p[1], p[2]];

export function sceneGeometry(view: UiSessionView): SceneGeometry {
  const state = view.state;
  const greyed = view.status !== 'connected';
  const magnitude = Math.hypot(...view.forceEchoN);
  if (state === null) {
    const empty: PaneGeometry = {
      arc: [],
      tool: [
        [0, 0],
        [0, 0],
      ],
      disk: null,
      depthLineMm: null,
    };
    return { top: empty, side: { ...empty }, gauge: gaugeState(magnitude), phase: '', greyed };
  }

  const { alpha_rad, beta_rad, length_mm } = state.wrist;
  const line = arcPolyline(alpha_rad, beta_rad, length_mm);
  const end = line[line.length - 1] ?? [0, 0, 0];
  const tip = tipPosition(alpha_rad, beta_rad, length_mm);

  const fixture = state.fixture;
  const topDisk = fixture.enabled
    ? { center: [0, 0] as [number, number], radiusMm: fixture.r_throat_mm }
    : null;
  const sideDisk = fixture.enabled
    ? { center: [0, fixture.l_button_mm] as [number, number], radiusMm: fixture.r_throat_mm }
    : null;
  const depthLineMm = fixture.enabled
    ? fixture.l_button_mm + FORCE_LIMIT_N / fixture.k_axial_effective_n_per_mm
    : null;

  return {
    top: {
      arc: line.map(topOf),
      tool: [topOf(end), topOf(tip)],
      disk: topDisk,
      depthLineMm: null,
    },
    side: {
      arc: line.map(sideOf),
      tool: [sideOf(end), sideOf(tip)],
      disk: sideDisk,
      depthLineMm,
    },
    gauge: gaugeState(magnitude),
    phase: state.phase,
    greyed,
  };
}

// ------------------------------------------------------------- painting

export interface PaneCanvas {
  ctx: CanvasRenderingContext2D;
  width: number;
  height: number;
  mmSpan: number; // millimetres across the shorter pane dimension
  flipY: boolean; // side pane draws +z upward
}

function toPx(pane: PaneCanvas, point: [number, number]): [number, number] {
  const scale = Math.min(pane.width, pane.height) / pane.mmSpan;
  const x = pane.width / 2 + point[0] * scale;
  const y = pane.flipY
    ? pane.height - 20 - point[1] * scale
    : pane.height / 2 + point[1] * scale;
  return [x, y];
}

export function paintPane(pane: PaneCanvas, geometry: PaneGeometry, greyed: boolean): void {
  const { ctx } = pane;
  ctx.clearRect(0, 0, pane.width, pane.height);
  const scale = Math.min(pane.width, pane.height) / pane.mmSpan;

  if (geometry.disk) {
    const [cx, cy] = toPx(pane, geometry.disk.center);
    ctx.beginPath();
    ctx.arc(cx, cy, geometry.disk.radiusMm * scale, 0, 2 * Math.PI);
    ctx.fillStyle = 'rgba(80, 160, 255, 0.15)';
    ctx.fill();
    ctx.strokeStyle = 'rgba(80, 160, 255, 0.8)';
    ctx.stroke();
  }
  if (geometry.depthLineMm !== null) {
    const [, yPx] = toPx(pane, [0, geometry.depthLineMm]);
    ctx.beginPath();
    ctx.moveTo(0, yPx);
    ctx.lineTo(pane.width, yPx);
    ctx.strokeStyle = 'rgba(255, 120, 80, 0.7)';
    ctx.setLineDash([6, 4]);
    ctx.stroke();
    ctx.setLineDash([]);
  }

  if (geometry.arc.length > 1) {
    ctx.beginPath();
    const first = geometry.arc[0];
    if (first) ctx.moveTo(...toPx(pane, first));
    for (const point of geometry.arc.slice(1)) ctx.lineTo(...toPx(pane, point));
    ctx.strokeStyle = '#d8dee9';
    ctx.lineWidth = 3;
    ctx.stroke();
  }
  ctx.beginPath();
  ctx.moveTo(...toPx(pane, geometry.tool[0]));
  ctx.lineTo(...toPx(pane, geometry.tool[1]));
  ctx.strokeStyle = '#88c0d0';
  ctx.lineWidth = 2;
  ctx.stroke();
  const [tx, ty] = toPx(pane, geometry.tool[1]);
  ctx.beginPath();
  ctx.arc(tx, ty, 4, 0, 2 * Math.PI);
  ctx.fillStyle = '#88c0d0';
  ctx.fill();
  ctx.lineWidth = 1;

  if (greyed) {
    ctx.fillStyle = 'rgba(40, 40, 46, 0.75)';
    ctx.fillRect(0, 0, pane.width, pane.height);
  }
}
