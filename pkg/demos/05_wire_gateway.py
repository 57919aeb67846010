"""
Driving a session over the wire
===============================

The service wraps one session in a websocket gateway.  Clients send JSON
frames (master deltas, events, settings); the service answers every frame
with the session state and a force echo.  In lockstep mode the frame
timestamps drive the logical clock, which makes a wire-driven run land on
the exact same trace as an in-process replay.
"""

import asyncio
import tempfile
from pathlib import Path

from websockets.asyncio.client import connect

from opswab import (
    as_wire_messages,
    decode,
    default_config,
    encode,
    run_replay,
    sampling_script,
    save_trace,
    with_trace_out,
)
from opswab.service import Gateway

script = sampling_script(seed=1)
frames = as_wire_messages(script)
print(f"script becomes {len(frames)} wire frames (idle periods send nothing)")
print("first frame on the wire:")
print(" ", encode(frames[0]))


async def drive(trace_path: Path) -> None:
    config = with_trace_out(default_config(), trace_path)
    async with Gateway(config, port=0) as gateway:
        print(f"\ngateway listening on 127.0.0.1:{gateway.bound_port}")
        uri = f"ws://127.0.0.1:{gateway.bound_port}/lockstep"
        async with connect(uri) as ws:
            for frame in frames:
                await ws.send(encode(frame))
                state = decode(await ws.recv())
                decode(await ws.recv())  # force echo
            print(f"last reply: phase {state.payload['state']['phase']} "
                  f"at t={state.t_ms:.0f} ms")


with tempfile.TemporaryDirectory() as tmp:
    wire_trace = Path(tmp) / "wire.csv"
    asyncio.run(drive(wire_trace))

    # the wire trace is byte-identical to the in-process replay
    session, report = run_replay(default_config(), script)
    local_trace = Path(tmp) / "local.csv"
    save_trace(session.trace, local_trace)
    same = wire_trace.read_bytes() == local_trace.read_bytes()
    print(f"\nwire trace == in-process trace: {same}")
    print(f"sample collected: {report.success}")
