import { expect, test } from 'vitest';

import { FORCE_LIMIT_N, formatForce, gaugeState } from '../src/forceGauge.js';

test('gauge flips strictly above the contact limit', () => {
  // the next representable double above the limit must already read as over
  const justAbove = FORCE_LIMIT_N + Number.EPSILON;
  expect(gaugeState(FORCE_LIMIT_N).over).toBe(false);
  expect(gaugeState(justAbove).over).toBe(true);
});

test('gauge stays calm through the whole allowed band', () => {
  for (const magnitude of [0, 0.1, 0.3, 0.5, 0.5879999, FORCE_LIMIT_N]) {
    expect(gaugeState(magnitude).over).toBe(false);
  }
  for (const magnitude of [0.5880001, 0.6, 1.0, 57.0]) {
    expect(gaugeState(magnitude).over).toBe(true);
  }
});

test('fraction saturates at full scale and never goes negative', () => {
  expect(gaugeState(100).fraction).toBe(1);
  expect(gaugeState(-0.5).fraction).toBe(0);
  expect(gaugeState(Number.NaN).fraction).toBe(0);
  expect(gaugeState(0.6).fraction).toBeCloseTo(0.5, 10);
});

test('the limit line sits inside the bar', () => {
  const { limitFraction } = gaugeState(0);
  expect(limitFraction).toBeGreaterThan(0);
  expect(limitFraction).toBeLessThan(1);
});

test('force text shows millinewton resolution', () => {
  expect(formatForce(0.588)).toBe('0.588 N');
  expect(formatForce(0)).toBe('0.000 N');
});
