import { expect, test } from 'vitest';

import { sceneGeometry } from '../src/scene.js';
import { createViewBuffer } from '../src/view.js';
import { snapshotStub } from './view.test.js';

function viewWith(overrides = {}, status: 'connected' | 'closed' = 'connected') {
  const buffer = createViewBuffer();
  buffer.setStatus(status);
  buffer.offerState(snapshotStub(overrides));
  return buffer.view;
}

test('a straight wrist draws as a vertical segment of length l plus tool', () => {
  const geometry = sceneGeometry(viewWith());
  // top view: everything collapses onto the origin
  for (const [x, y] of geometry.top.arc) {
    expect(Math.abs(x)).toBeLessThan(1e-12);
    expect(Math.abs(y)).toBeLessThan(1e-12);
  }
  // side view: base at 0, arc end at 65 mm, tool point at 145 mm
  const arc = geometry.side.arc;
  expect(arc[0]).toEqual([0, 0]);
  expect(arc[arc.length - 1]).toEqual([0, 65]);
  expect(geometry.side.tool[1]).toEqual([0, 145]);
});

test('a bent wrist leaves the axis in both panes', () => {
  const geometry = sceneGeometry(
    viewWith({ wrist: { alpha_rad: 0.8, beta_rad: 0.6, length_mm: 70 } }),
  );
  const topTip = geometry.top.tool[1];
  expect(Math.hypot(topTip[0], topTip[1])).toBeGreaterThan(10);
});

test('no disk is drawn while the fixture is disabled', () => {
  const geometry = sceneGeometry(viewWith());
  expect(geometry.top.disk).toBeNull();
  expect(geometry.side.disk).toBeNull();
  expect(geometry.side.depthLineMm).toBeNull();
});

test('an enabled fixture draws the disk and the depth bound', () => {
  const geometry = sceneGeometry(
    viewWith({
      fixture: { enabled: true, r_throat_mm: 22, l_button_mm: 65, k_axial_effective_n_per_mm: 2.94 },
    }),
  );
  expect(geometry.top.disk).toEqual({ center: [0, 0], radiusMm: 22 });
  expect(geometry.side.disk?.center).toEqual([0, 65]);
  // arc-length bound: anchor depth plus force budget over effective stiffness
  expect(geometry.side.depthLineMm).toBeCloseTo(65 + 0.588 / 2.94, 12);
});

test('disconnection greys the scene but keeps the last pose', () => {
  const geometry = sceneGeometry(viewWith({}, 'closed'));
  expect(geometry.greyed).toBe(true);
  expect(geometry.side.arc.length).toBeGreaterThan(0);
  const live = sceneGeometry(viewWith({}, 'connected'));
  expect(live.greyed).toBe(false);
});

test('gauge state rides along with the scene', () => {
  const buffer = createViewBuffer();
  buffer.setStatus('connected');
  buffer.offerState(snapshotStub());
  buffer.offerForce([0, 0, 0.6]);
  const geometry = sceneGeometry(buffer.view);
  expect(geometry.gauge.over).toBe(true);
  expect(geometry.gauge.magnitudeN).toBeCloseTo(0.6, 12);
});
