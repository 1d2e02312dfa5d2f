"""Deterministic discrete-event engine for light-speed signalling.

Parties are static. A party's callbacks return :class:`Signal` objects, which
the engine turns into timed send and delivery events. Events are processed in
order of (time, phase, sender id, per-sender sequence, receiver id) where the
phase orders sends before deliveries before ticks at equal times. Two runs
with equal scenarios and seeds produce identical logs.
"""

import heapq
import itertools
import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import NamedTuple

from spacetime import arrival_time, format_fixed, spatial

logger = logging.getLogger(__name__)

DIRECTIONAL = "directional"
BROADCAST = "broadcast"
VERIFIER_ROLE = "verifier"
PROVER_ROLE = "prover"

# equal times: sends, then deliveries, then ticks; within a phase by sender id and send seq
_SEND, _DELIVER, _TICK = range(3)


class SendIntoPastError(ValueError):
    """A signal was scheduled before the current simulation time."""


class UnknownPartyError(KeyError):
    """No party with this id is registered."""


@dataclass(frozen=True)
class Signal:
    """A timed message leaving a party's position."""

    send_time: int
    origin: tuple
    mode: str
    target: tuple = None
    payload: bytes = b""
    qubits: tuple = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "origin", spatial(self.origin))
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if self.mode == BROADCAST:
            if self.qubits:
                raise ValueError("broadcast signals carry classical payloads only")
        elif self.mode == DIRECTIONAL:
            if self.target is None:
                raise ValueError("directional signal needs a target point")
            object.__setattr__(self, "target", spatial(self.target))
        else:
            raise ValueError(f"unknown signal mode {self.mode!r}")


@dataclass(frozen=True)
class Delivery:
    """What a receiving party observes."""

    time: int
    sender: str
    receiver: str
    mode: str
    label: str
    payload: bytes
    qubits: tuple
    origin: tuple


class Event(NamedTuple):
    seq: int
    time: int
    kind: str
    party: str
    mode: str = ""
    label: str = ""
    payload: bytes = b""
    sender: str = ""
    ref: int = -1
    qubits: int = 0

    def to_json(self):
        return json.dumps(
            {
                "seq": self.seq,
                "time": format_fixed(self.time),
                "kind": self.kind,
                "party": self.party,
                "mode": self.mode,
                "label": self.label,
                "payload_hex": self.payload.hex(),
                "payload_len": len(self.payload),
                "sender": self.sender,
                "ref": self.ref,
                "qubits": self.qubits,
            },
            sort_keys=True,
            separators=(",", ":"),
        )


class Party:
    """A static party. Subclasses override the callbacks they need.

    Parties with ``intercepts`` set also receive directional signals whose
    straight path crosses their position; honest parties never intercept.
    ``role`` tells verifiers from everyone else, whatever the ids.
    """

    intercepts = False
    role = PROVER_ROLE
    wants_ticks = False

    def __init__(self, party_id, position):
        self.id = party_id
        self.position = spatial(position)

    def __repr__(self):
        coords = ", ".join(str(c) for c in self.position)
        return f"<{type(self).__name__} {self.id} at ({coords})>"

    def on_start(self, sim):
        return ()

    def on_deliver(self, sim, delivery):
        return ()

    def on_tick(self, sim, now, tag=None):
        return ()

    def directional(self, send_time, target, payload=b"", label="", qubits=()):
        return Signal(send_time, self.position, DIRECTIONAL, target, payload, qubits, label)

    def broadcast(self, send_time, payload=b"", label=""):
        return Signal(send_time, self.position, BROADCAST, None, payload, (), label)


def _between(point, origin, target):
    """True when point lies strictly inside the segment origin-target."""

    if point == origin or point == target:
        return False
    ratio = None
    for p, o, t in zip(point, origin, target):
        span = t - o
        if span == 0:
            if p != o:
                return False
            continue
        r = (p - o) / span
        if ratio is None:
            ratio = r
        elif r != ratio:
            return False
    return ratio is not None and 0 < ratio < 1


class Simulator:
    """Event engine for one scenario instance."""

    def __init__(self, start_time=0, tick_interval=None, tick_start=None, arena=None):
        self.start_time = start_time
        self.now = start_time
        self.tick_interval = tick_interval
        self.tick_start = start_time if tick_start is None else tick_start
        self.arena = arena
        self.parties = {}
        self.log = []
        self.ops = Counter()
        self._heap = []
        self._pushes = itertools.count()
        self._send_seq = defaultdict(itertools.count)
        self._tick_seq = defaultdict(itertools.count)
        self._started = False

    def __repr__(self):
        return f"<Simulator parties={len(self.parties)} events={len(self.log)}>"

    def add_party(self, party):
        if party.id in self.parties:
            raise ValueError(f"duplicate party id {party.id!r}")
        self.parties[party.id] = party
        return party

    def positions(self):
        return {pid: party.position for pid, party in self.parties.items()}

    def role_of(self, party_id):
        try:
            return self.parties[party_id].role
        except KeyError:
            raise UnknownPartyError(party_id) from None

    def ids_with_role(self, role):
        return frozenset(pid for pid, party in self.parties.items() if party.role == role)

    def count(self, party_id, op, n=1):
        """Record n primitive operations of kind op for party_id at the current time."""

        self.ops[(self.now, party_id, op)] += n

    def _push(self, key, item):
        heapq.heappush(self._heap, (key, next(self._pushes), item))

    def schedule_send(self, party_id, signal):
        """Enqueue a signal from party_id."""

        try:
            party = self.parties[party_id]
        except KeyError:
            raise UnknownPartyError(party_id) from None
        if signal.send_time < self.now:
            raise SendIntoPastError(
                f"{party_id} sends at {format_fixed(signal.send_time)} "
                f"but the clock reads {format_fixed(self.now)}"
            )
        if signal.origin != party.position:
            raise ValueError(f"{party_id} cannot send from {signal.origin}")
        seq = next(self._send_seq[party_id])
        self._push((signal.send_time, _SEND, party_id, seq, ""), (_SEND, party_id, signal))

    def wake(self, party_id, time, tag=None):
        """Ask for an on_tick call for party_id at time, carrying tag."""

        if time < self.now:
            raise SendIntoPastError(f"{party_id} cannot wake in the past")
        seq = next(self._tick_seq[party_id])
        self._push((time, _TICK, party_id, seq, ""), (_TICK, party_id, tag))

    def _emit(self, party_id, signals):
        for signal in signals or ():
            self.schedule_send(party_id, signal)

    def _start(self):
        self._started = True
        if self.tick_interval:
            for pid in sorted(self.parties):
                if self.parties[pid].wants_ticks:
                    self.wake(pid, self.tick_start, "tick")
        for pid in sorted(self.parties):
            self._emit(pid, self.parties[pid].on_start(self))

    def _record(self, kind, party, **fields):
        event = Event(len(self.log), self.now, kind, party, **fields)
        self.log.append(event)
        return event

    def _recipients(self, sender, signal):
        """(party, gets_qubits) pairs for a signal, nearest interceptor first."""

        if signal.mode == BROADCAST:
            return [(pid, False) for pid in sorted(self.parties) if pid != sender]

        at_target = [
            pid for pid in sorted(self.parties)
            if pid != sender and self.parties[pid].position == signal.target
        ]
        on_path = [
            pid for pid in sorted(self.parties)
            if pid != sender and self.parties[pid].intercepts
            and _between(self.parties[pid].position, signal.origin, signal.target)
        ]
        on_path.sort(key=lambda pid: arrival_time(0, signal.origin, self.parties[pid].position))
        ordered = on_path + at_target
        return [(pid, i == 0) for i, pid in enumerate(ordered)]

    def _process_send(self, sender, signal, key):
        send = self._record(
            "send", sender, mode=signal.mode, label=signal.label,
            payload=signal.payload, qubits=len(signal.qubits),
        )
        for receiver, gets_qubits in self._recipients(sender, signal):
            qubits = signal.qubits if gets_qubits else ()
            position = self.parties[receiver].position
            delivery = Delivery(
                arrival_time(signal.send_time, signal.origin, position),
                sender, receiver, signal.mode, signal.label,
                signal.payload, qubits, signal.origin,
            )
            self._push((delivery.time, _DELIVER, sender, key[3], receiver), (_DELIVER, send.seq, delivery))

    def run_until(self, t_end):
        """Process every event with time <= t_end; return the events processed."""

        if not self._started:
            self._start()
        first = len(self.log)
        while self._heap and self._heap[0][0][0] <= t_end:
            key, _, item = heapq.heappop(self._heap)
            self.now = key[0]
            kind = item[0]
            if kind == _SEND:
                _, sender, signal = item
                self._process_send(sender, signal, key)
            elif kind == _DELIVER:
                _, ref, delivery = item
                self._record(
                    "deliver", delivery.receiver, mode=delivery.mode, label=delivery.label,
                    payload=delivery.payload, sender=delivery.sender, ref=ref,
                    qubits=len(delivery.qubits),
                )
                self._emit(delivery.receiver, self.parties[delivery.receiver].on_deliver(self, delivery))
            else:
                _, pid, tag = item
                self._record("tick", pid, label="" if tag is None else str(tag))
                if tag == "tick" and self.tick_interval:
                    self.wake(pid, self.now + self.tick_interval, "tick")
                self._emit(pid, self.parties[pid].on_tick(self, self.now, tag))
        self.now = max(self.now, t_end)
        logger.debug("processed %d events up to %s", len(self.log) - first, format_fixed(t_end))
        return self.log[first:]

    def ndjson(self):
        return "".join(event.to_json() + "\n" for event in self.log)

    def write_ndjson(self, path):
        with open(path, "w") as out:
            out.write(self.ndjson())


def audit_causality(log, positions):
    """Delivery events whose time is not send time plus travel time."""

    sends = {event.seq: event for event in log if event.kind == "send"}
    violations = []
    for event in log:
        if event.kind != "deliver":
            continue
        send = sends.get(event.ref)
        if send is None or event.time != arrival_time(
            send.time, positions[send.party], positions[event.party]
        ):
            violations.append(event)
    return violations
