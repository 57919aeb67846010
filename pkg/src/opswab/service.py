"""Teleoperation service: a wire-protocol gateway around one live session.

One operator connection at a time drives the session with protocol frames;
the service publishes ``state_update`` and ``force_echo`` frames back.  Two
modes, chosen by the connection path:

``/`` (live)
    The control loop free-runs at the fixed 40 ms period on the wall
    clock.  Inbound frames land in a bounded queue drained once per
    period; under backpressure stale motion and jog frames are dropped,
    discrete events (trigger, pedal, phase_event) never are.  Outbound
    state is published through a latest-wins slot, so a slow client skips
    frames but can never delay the loop.

``/lockstep``
    The client's frame timestamps drive the logical clock: a frame
    stamped for period n first runs the idle periods up to n-1, then its
    own period, then gets its state reply.  A scripted session re-run
    this way produces the identical trace as the in-process replay.

A malformed frame gets an ``error`` reply and leaves the session alone; an
unsupported protocol version gets an ``error`` reply and a close.  When the
connection drops mid-procedure the session aborts to its safe homing phase
and the trace is flushed to the configured path, with one final row showing
the post-abort state; a session that completed its procedure is flushed
as-is, so a finished scripted run matches its in-process replay exactly.
"""

from __future__ import annotations

import asyncio
import logging
from collections import deque
from dataclasses import dataclass, field

from websockets.asyncio.server import ServerConnection, serve
from websockets.exceptions import ConnectionClosed

from .config import RunConfig
from .errors import OpswabError, ProtocolError, ProtocolVersionError
from .protocol import (
    SequenceSource,
    SequenceTracker,
    WireMessage,
    decode,
    encode,
    error_message,
    force_echo,
    state_update,
)
from .replay import apply_setting, session_from_config
from .teleop import (
    CONTROL_DT_S,
    Phase,
    JogCommand,
    SessionState,
    StepInput,
    control_step,
    fsm_advance,
    record_state,
    save_trace,
    snapshot,
    submit_jog,
)

log = logging.getLogger(__name__)

INBOUND_QUEUE_MAX = 64
_DROPPABLE_KINDS = frozenset({"master_delta", "jog"})

_SETTING_KINDS = {
    "set_pressure": ("pressure_kpa", "pressure_kpa"),
    "set_vf_radius": ("diameter_mm", "vf_diameter_mm"),
    "set_scale": ("k_scale", "k_scale"),
}


def _session_ms(session: SessionState) -> float:
    return session.t_s * 1000.0


async def _send(connection: ServerConnection, message: WireMessage) -> None:
    await connection.send(encode(message))


async def _send_state(
    connection: ServerConnection, session: SessionState, seqs: SequenceSource
) -> None:
    t_ms = _session_ms(session)
    await _send(connection, state_update(seqs.take(), t_ms, snapshot(session)))
    await _send(
        connection,
        force_echo(seqs.take(), t_ms, tuple(float(v) for v in session.last_master_force_n)),
    )


def _apply_frame(session: SessionState, message: WireMessage) -> StepInput | None:
    """Apply a frame's immediate effect; return step inputs if it carries any.

    Settings apply on the spot.  Events, jogs and motion deltas are returned
    for the caller to feed into a control step (lockstep runs one step per
    frame; live mode merges a whole queue into the next tick).
    """
    kind = message.kind
    if kind in _SETTING_KINDS:
        payload_key, setting_name = _SETTING_KINDS[kind]
        apply_setting(session, setting_name, float(message.payload[payload_key]))
        return None
    if kind in ("trigger", "pedal"):
        return StepInput(event=kind)
    if kind == "phase_event":
        return StepInput(event=message.payload["event"])
    if kind == "jog":
        return StepInput(
            jog=JogCommand(message.payload["joint"], float(message.payload["target"]))
        )
    if kind == "master_delta":
        p = message.payload
        return StepInput(
            master_delta_mm=(float(p["dx_mm"]), float(p["dy_mm"]), float(p["dz_mm"]))
        )
    raise ProtocolError(f"kind {kind!r} is not accepted inbound")


# ---------------------------------------------------------------- lockstep


def _lockstep_frame(session: SessionState, message: WireMessage) -> None:
    """Catch the session up to the frame's period, then run that period."""
    period_ms = CONTROL_DT_S * 1000.0
    exact = message.t_ms / period_ms
    period = round(exact)
    if abs(exact - period) > 1e-6:
        raise ProtocolError(
            f"t {message.t_ms:g} ms is not a whole {period_ms:g} ms period"
        )
    if period <= session.step_index:
        raise ProtocolError(
            f"frame period {period} is stale; session is at {session.step_index}"
        )
    while session.step_index < period - 1:
        control_step(session)
    inputs = _apply_frame(session, message)
    control_step(session, inputs)


async def _run_lockstep(
    connection: ServerConnection,
    session: SessionState,
    inbound: SequenceTracker,
    outbound: SequenceSource,
) -> None:
    async for raw in connection:
        try:
            message = decode(raw)
            inbound.check(message.seq)
            _lockstep_frame(session, message)
        except ProtocolVersionError as exc:
            await _send(
                connection, error_message(outbound.take(), _session_ms(session), str(exc))
            )
            await connection.close(code=1002, reason="protocol version")
            return
        except (ProtocolError, OpswabError, KeyError) as exc:
            await _send(
                connection, error_message(outbound.take(), _session_ms(session), str(exc))
            )
            continue
        await _send_state(connection, session, outbound)


# -------------------------------------------------------------------- live


@dataclass
class _LiveShared:
    """State handed between the reader, the control loop and the publisher."""

    queue: deque = field(default_factory=deque)
    errors: deque = field(default_factory=deque)
    latest: SessionState | None = None
    fresh: asyncio.Event = field(default_factory=asyncio.Event)
    stop: asyncio.Event = field(default_factory=asyncio.Event)
    # orders seq assignment with the actual send across tasks
    wire: asyncio.Lock = field(default_factory=asyncio.Lock)


def _enqueue(shared: _LiveShared, message: WireMessage) -> None:
    """Queue a frame, shedding the oldest stale motion first when full."""
    queue = shared.queue
    if len(queue) >= INBOUND_QUEUE_MAX:
        for i, waiting in enumerate(queue):
            if waiting.kind in _DROPPABLE_KINDS:
                del queue[i]
                break
        else:
            if message.kind in _DROPPABLE_KINDS:
                return  # shed the incoming motion; events always get through
    queue.append(message)


def _live_tick(session: SessionState, shared: _LiveShared) -> None:
    """Drain the queue in arrival order, then run exactly one period."""
    delta: list[float] | None = None
    while shared.queue:
        message = shared.queue.popleft()
        try:
            inputs = _apply_frame(session, message)
            if inputs is None:
                continue
            if inputs.event is not None:
                fsm_advance(session, inputs.event)
            elif inputs.jog is not None:
                submit_jog(session, inputs.jog)
            elif inputs.master_delta_mm is not None:
                if session.phase is not Phase.TELEOP_SAMPLING:
                    raise OpswabError(
                        f"master deltas are not accepted in phase {session.phase.value}"
                    )
                if delta is None:
                    delta = [0.0, 0.0, 0.0]
                for axis in range(3):
                    delta[axis] += inputs.master_delta_mm[axis]
        except (OpswabError, KeyError) as exc:
            shared.errors.append(str(exc))
    try:
        control_step(
            session, StepInput(master_delta_mm=tuple(delta) if delta else None)
        )
    except OpswabError as exc:  # never stall the loop on a bad period
        shared.errors.append(str(exc))
        control_step(session)
    shared.latest = session
    shared.fresh.set()


async def _run_live(
    connection: ServerConnection,
    session: SessionState,
    inbound: SequenceTracker,
    outbound: SequenceSource,
) -> None:
    shared = _LiveShared()

    async def reader() -> None:
        try:
            async for raw in connection:
                try:
                    message = decode(raw)
                    inbound.check(message.seq)
                except ProtocolVersionError as exc:
                    # reply directly: the close must not race the publisher
                    async with shared.wire:
                        await _send(
                            connection,
                            error_message(outbound.take(), _session_ms(session), str(exc)),
                        )
                    await connection.close(code=1002, reason="protocol version")
                    return
                except ProtocolError as exc:
                    shared.errors.append(str(exc))
                    shared.fresh.set()
                    continue
                _enqueue(shared, message)
        finally:
            shared.stop.set()
            shared.fresh.set()

    async def control() -> None:
        loop = asyncio.get_running_loop()
        next_tick = loop.time() + CONTROL_DT_S
        while not shared.stop.is_set():
            delay = next_tick - loop.time()
            next_tick += CONTROL_DT_S
            if delay > 0:
                try:
                    await asyncio.wait_for(shared.stop.wait(), timeout=delay)
                    break
                except asyncio.TimeoutError:
                    pass
            _live_tick(session, shared)

    async def publisher() -> None:
        while not (shared.stop.is_set() and not shared.errors and shared.latest is None):
            await shared.fresh.wait()
            shared.fresh.clear()
            try:
                async with shared.wire:
                    while shared.errors:
                        text = shared.errors.popleft()
                        await _send(
                            connection,
                            error_message(outbound.take(), _session_ms(session), text),
                        )
                    if shared.latest is not None:
                        shared.latest = None
                        await _send_state(connection, session, outbound)
            except ConnectionClosed:
                return
            if shared.stop.is_set() and shared.latest is None and not shared.errors:
                return

    tasks = [
        asyncio.create_task(reader()),
        asyncio.create_task(control()),
        asyncio.create_task(publisher()),
    ]
    try:
        await asyncio.gather(*tasks)
    finally:
        for task in tasks:
            task.cancel()
        await asyncio.gather(*tasks, return_exceptions=True)


# ----------------------------------------------------------------- server


class Gateway:
    """Owns the listening socket and at most one operator session."""

    def __init__(self, config: RunConfig, host: str = "127.0.0.1", port: int | None = None):
        self.config = config
        self.host = host
        self.port = config.port if port is None else port
        self.bound_port: int | None = None
        self._busy = False
        self._server = None

    async def _handle(self, connection: ServerConnection) -> None:
        if self._busy:
            try:
                await _send(
                    connection, error_message(1, 0.0, "another operator is connected")
                )
                await connection.close(code=1013, reason="busy")
            except ConnectionClosed:
                pass
            return
        self._busy = True
        path = (connection.request.path if connection.request else "/").split("?")[0]
        lockstep = path.rstrip("/").endswith("lockstep")
        session = session_from_config(self.config)
        record_state(session)
        inbound, outbound = SequenceTracker(), SequenceSource()
        try:
            if lockstep:
                await _run_lockstep(connection, session, inbound, outbound)
            else:
                await _run_live(connection, session, inbound, outbound)
        except ConnectionClosed:
            pass
        finally:
            self._busy = False
            if session.phase is not Phase.DONE:
                fsm_advance(session, "abort")
                record_state(session)  # the flushed trace shows the safe state
            try:
                save_trace(session.trace, self.config.trace_out)
            except OSError:
                log.exception("could not flush trace to %s", self.config.trace_out)

    async def __aenter__(self) -> "Gateway":
        self._server = await serve(self._handle, self.host, self.port)
        sockets = self._server.sockets or []
        self.bound_port = sockets[0].getsockname()[1] if sockets else self.port
        return self

    async def __aexit__(self, *exc_info) -> None:
        self._server.close()
        await self._server.wait_closed()

    async def serve_forever(self) -> None:
        async with self:
            log.info("serving on ws://%s:%d", self.host, self.bound_port)
            await asyncio.get_running_loop().create_future()


def run_service(config: RunConfig, host: str = "127.0.0.1", port: int | None = None) -> None:
    """Blocking entry point: serve until interrupted."""
    try:
        asyncio.run(Gateway(config, host, port).serve_forever())
    except KeyboardInterrupt:
        pass
