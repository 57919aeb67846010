// Constraint-force gauge. The wire publishes the capped haptic echo; the
// gauge shows its magnitude against the comfortable-contact limit and
// flips to the over state strictly above it.

export const FORCE_LIMIT_N = 0.588;

// full scale leaves headroom so the limit line sits inside the bar
export const GAUGE_FULL_SCALE_N = 1.2;

export interface GaugeState {
  magnitudeN: number;
  fraction: number; // 0..1 of full scale
  limitFraction: number;
  over: boolean; // true strictly above the limit
}

export function gaugeState(magnitudeN: number): GaugeState {
  const magnitude = Number.isFinite(magnitudeN) ? Math.max(0, magnitudeN) : 0;
  return {
    magnitudeN: magnitude,
    fraction: Math.min(1, magnitude / GAUGE_FULL_SCALE_N),
    limitFraction: FORCE_LIMIT_N / GAUGE_FULL_SCALE_N,
    over: magnitude > FORCE_LIMIT_N,
  };
}

export function formatForce(magnitudeN: number): string {
  return `${magnitudeN.toFixed(3)} N`;
}
