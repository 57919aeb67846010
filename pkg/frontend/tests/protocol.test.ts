import { describe, expect, test } from 'vitest';

import {
  decode,
  encode,
  errorTextFrom,
  forceFrom,
  PROTOCOL_VERSION,
  ProtocolError,
  ProtocolVersionError,
  SequenceSource,
  stateFrom,
  type WireMessage,
} from '../src/protocol.js';

test('encode and decode round trip a frame', () => {
  const message: WireMessage = {
    v: PROTOCOL_VERSION,
    kind: 'master_delta',
    seq: 7,
    t: 280,
    payload: { dx_mm: 0.5, dy_mm: -0.25, dz_mm: 1.0 },
  };
  expect(decode(encode(message))).toEqual(message);
});

test('frame keys come out in the shared order', () => {
  const raw = encode({ v: 1, kind: 'pedal', seq: 1, t: 40, payload: {} });
  expect(raw).toBe('{"v":1,"kind":"pedal","seq":1,"t":40,"payload":{}}');
});

describe('decode rejects malformed frames', () => {
  test.each([
    ['not json at all', 'nonsense'],
    ['an array', '[1,2,3]'],
    ['missing kind', '{"v":1,"seq":1,"t":0,"payload":{}}'],
    ['unknown kind', '{"v":1,"kind":"telemetry","seq":1,"t":0,"payload":{}}'],
    ['string seq', '{"v":1,"kind":"pedal","seq":"1","t":0,"payload":{}}'],
    ['payload not an object', '{"v":1,"kind":"pedal","seq":1,"t":0,"payload":3}'],
  ])('%s', (_label, raw) => {
    expect(() => decode(raw)).toThrow(ProtocolError);
  });

  test('wrong version raises the version error, not the generic one', () => {
    const raw = '{"v":2,"kind":"pedal","seq":1,"t":0,"payload":{}}';
    expect(() => decode(raw)).toThrow(ProtocolVersionError);
  });
});

test('state extraction requires a state object', () => {
  const good = decode(
    '{"v":1,"kind":"state_update","seq":1,"t":40,"payload":{"state":{"phase":"Prepare"}}}',
  );
  expect(stateFrom(good).phase).toBe('Prepare');
  const bad = decode('{"v":1,"kind":"state_update","seq":1,"t":40,"payload":{}}');
  expect(() => stateFrom(bad)).toThrow(ProtocolError);
});

test('force extraction needs exactly three finite components', () => {
  const good = decode(
    '{"v":1,"kind":"force_echo","seq":2,"t":40,"payload":{"force_n":[0,0.5,-0.1]}}',
  );
  expect(forceFrom(good)).toEqual([0, 0.5, -0.1]);
  const short = decode('{"v":1,"kind":"force_echo","seq":2,"t":40,"payload":{"force_n":[1,2]}}');
  expect(() => forceFrom(short)).toThrow(ProtocolError);
});

test('error text falls back when the payload is odd', () => {
  const framed = decode(
    '{"v":1,"kind":"error","seq":3,"t":0,"payload":{"message":"period is stale"}}',
  );
  expect(errorTextFrom(framed)).toBe('period is stale');
  const odd = decode('{"v":1,"kind":"error","seq":3,"t":0,"payload":{}}');
  expect(errorTextFrom(odd)).toBe('unspecified gateway error');
});

test('sequence source hands out 1, 2, 3 in order', () => {
  const seqs = new SequenceSource();
  expect([seqs.take(), seqs.take(), seqs.take()]).toEqual([1, 2, 3]);
});
