// Constant-curvature wrist geometry, enough of it to draw the arm. The
// gateway is the authority on state; these maps only turn a published
// (alpha, beta, length) triple into points on screen.

import type { Vec3 } from './protocol.js';

export const TOOL_OFFSET_MM = 80.0;

// below this bend the closed form loses digits; same series the server uses
const SERIES_BEND_RAD = 1e-2;

function arcScalars(betaRad: number): [number, number] {
  if (Math.abs(betaRad) < SERIES_BEND_RAD) {
    const b2 = betaRad * betaRad;
    const radial = 0.5 * betaRad * (1.0 - (b2 / 12.0) * (1.0 - b2 / 30.0));
    const axial = 1.0 - (b2 / 6.0) * (1.0 - b2 / 20.0);
    return [radial, axial];
  }
  return [(1.0 - Math.cos(betaRad)) / betaRad, Math.sin(betaRad) / betaRad];
}

/** Point a fraction s in [0, 1] along the bent centerline, wrist base frame. */
export function arcPoint(alphaRad: number, betaRad: number, lengthMm: number, s: number): Vec3 {
  const [radial, axial] = arcScalars(s * betaRad);
  const reach = s * lengthMm;
  return [
    reach * radial * Math.cos(alphaRad),
    reach * radial * Math.sin(alphaRad),
    reach * axial,
  ];
}

/** Tool point: arc endpoint plus the rigid tip along the end tangent. */
export function tipPosition(alphaRad: number, betaRad: number, lengthMm: number): Vec3 {
  const end = arcPoint(alphaRad, betaRad, lengthMm, 1.0);
  const sb = Math.sin(betaRad);
  const cb = Math.cos(betaRad);
  return [
    end[0] + TOOL_OFFSET_MM * sb * Math.cos(alphaRad),
    end[1] + TOOL_OFFSET_MM * sb * Math.sin(alphaRad),
    end[2] + TOOL_OFFSET_MM * cb,
  ];
}

/** Centerline polyline from base to arc end, n segments. */
export function arcPolyline(alphaRad: number, betaRad: number, lengthMm: number, n = 24): Vec3[] {
  const points: Vec3[] = [];
  for (let i = 0; i <= n; i++) {
    points.push(arcPoint(alphaRad, betaRad, lengthMm, i / n));
  }
  return points;
}
