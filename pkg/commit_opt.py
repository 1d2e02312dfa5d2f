"""Optimized encrypt-then-verify: broadcast challenges on a tick schedule.

Every verifier broadcasts a fresh string x_{i,j} at each tick j. Wherever d+1
wavefronts (one per verifier) meet inside the hull there is a mesh point, and
the strings meeting there form its challenge. After committing to a key the
prover sends each verifier exactly one ciphertext per slot of the response
window, each timed to arrive on the slot time: Enc(sk, (y, mesh id)) in the
slot its answer is due, Enc(sk, dummy) in all others. Every ciphertext is
computed when it is sent, so the prover's work per tick is k encryptions no
matter how large the mesh is.
"""

import csv
import itertools
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor

import numpy as np

from commit import (
    PP_DOMAIN, PP_LABEL, PROVER_DOMAIN, VERIFIER_DOMAIN,
    CommitParams, CommittableSet, CommitVerifier, CommitmentState,
    RevealResult, canonical_transcript, commit_phase, commit_to_key, derive_seed,
    recorded_commitment,
)
from crypto import (
    DEFAULT_KAPPA, DEFAULT_LAMBDA, Ciphertext, Encryptor, bits_to_bytes, bytes_to_bits, com,
    com_setup, dec, random_bits,
)
from engine import PROVER_ROLE, VERIFIER_ROLE, Party, Simulator
from pv import SharedRandomness, f
from qsim import QArena
from spacetime import (
    GeometryError, SpacetimePoint, distance, from_fixed, in_convex_hull,
    max_travel_time, rational, rational_sqrt, solve_linear, spatial, to_fixed,
)

logger = logging.getLogger(__name__)

OPT_DOMAIN = 20
QUBIT_DOMAIN = 21
DELTA_MESH = Fraction(1, 1 << 20)
ID_BITS = 22

PROFILE_CSV_HEADERS = ["tick", "party", "ops"]


class DegeneratePlacementError(GeometryError):
    """Verifier positions are affinely dependent."""


def tick_label(verifier, tick):
    return f"x{verifier}@{tick}"


def slot_label(slot):
    return f"y@{slot}"


def qubit_label(mesh_id):
    return f"q@{mesh_id}"


def _label_number(label, head):
    prefix, sep, number = label.partition("@")
    if not sep or prefix != head or not number.isdigit():
        return None
    return int(number)


@dataclass(frozen=True)
class TickSchedule:
    """Ticks t_start, t_start + delta, ..., t_end."""

    delta: Fraction
    t_start: Fraction
    t_end: Fraction

    def __post_init__(self):
        for name in ("delta", "t_start", "t_end"):
            object.__setattr__(self, name, rational(getattr(self, name)))
        if self.delta <= 0:
            raise ValueError("tick interval must be positive")
        span = (self.t_end - self.t_start) / self.delta
        if span < 0 or span.denominator != 1:
            raise ValueError("the session window must hold a whole number of ticks")

    @classmethod
    def from_ticks(cls, ticks, delta, t_start=0):
        if ticks < 1:
            raise ValueError("a schedule needs at least one tick")
        delta, t_start = rational(delta), rational(t_start)
        return cls(delta, t_start, t_start + (ticks - 1) * delta)

    @property
    def count(self):
        return int((self.t_end - self.t_start) / self.delta) + 1

    def time_of(self, j):
        """Exact time of tick j (j may lie past the window)."""

        return self.t_start + j * self.delta

    def tick_time(self, j):
        return to_fixed(self.time_of(j))

    def tick_at(self, fixed_time):
        """Index j with tick_time(j) <= fixed_time < tick_time(j + 1)."""

        j = floor((from_fixed(fixed_time) - self.t_start) / self.delta)
        while self.tick_time(j) > fixed_time:
            j -= 1
        while self.tick_time(j + 1) <= fixed_time:
            j += 1
        return j

    def first_tick_from(self, fixed_time):
        """Smallest j with tick_time(j) >= fixed_time."""

        j = ceil((from_fixed(fixed_time) - self.t_start) / self.delta)
        while self.tick_time(j) < fixed_time:
            j += 1
        while self.tick_time(j - 1) >= fixed_time:
            j -= 1
        return j


def challenge_string(shared, verifier, tick, n):
    return random_bits(shared.stream(OPT_DOMAIN, verifier, tick), n)


def qubit_bit(shared, mesh_id):
    return int(shared.stream(QUBIT_DOMAIN, mesh_id).integers(0, 2))


@dataclass(frozen=True)
class MeshPoint:
    id: int
    L: tuple
    t: int
    ticks: tuple

    @property
    def point(self):
        return SpacetimePoint(self.L, from_fixed(self.t))


def _affine_columns(verifiers):
    origin = verifiers[0]
    d = len(origin)
    rows = [[2 * (x - o) for x, o in zip(v, origin)] for v in verifiers[1:]]
    return [[rows[i][j] for i in range(d)] for j in range(d)]


def _meet(verifiers, columns, times):
    """Smallest exact-or-fixed-point (L, t) where wavefronts sent at times meet."""

    X0, t0 = verifiers[0], times[0]
    norm0 = sum(x * x for x in X0)
    c = [sum(x * x for x in X) - norm0 - t * t + t0 * t0 for X, t in zip(verifiers[1:], times[1:])]
    e = [2 * (t - t0) for t in times[1:]]
    u = solve_linear(columns, c)
    v = solve_linear(columns, e)
    w = [a - x for a, x in zip(u, X0)]
    qa = sum(x * x for x in v) - 1
    qb = 2 * (sum(a * b for a, b in zip(w, v)) + t0)
    qc = sum(a * a for a in w) - t0 * t0

    latest = max(times)
    if qa == 0:
        if qb == 0:
            # identity: the wavefronts travel together once they first meet
            return [(tuple(a + b * latest for a, b in zip(u, v)), latest)] if qc == 0 else []
        roots = [-qc / qb]
    else:
        disc = qb * qb - 4 * qa * qc
        if disc < 0:
            return []
        root, _ = rational_sqrt(disc)
        roots = sorted({(-qb - root) / (2 * qa), (-qb + root) / (2 * qa)})
    return [
        (tuple(a + b * t for a, b in zip(u, v)), t)
        for t in roots if t >= latest
    ]


def mesh_points(verifiers, schedule, tolerance=DELTA_MESH):
    """Every point inside the hull where one wavefront per verifier coincides.

    A mesh point's time is the latest of the d+1 fixed-point arrivals; points
    whose arrivals spread by more than ``tolerance`` are dropped.
    """

    verifiers = [spatial(v) for v in verifiers]
    d = len(verifiers[0])
    if any(len(v) != d for v in verifiers) or len(verifiers) != d + 1:
        raise GeometryError(f"{d}-d meshes need {d + 1} verifiers")
    columns = _affine_columns(verifiers)
    if solve_linear(columns, [Fraction(0)] * d) is None:
        raise DegeneratePlacementError("verifier positions are affinely dependent")

    k = len(verifiers)
    gaps = {
        (a, b): distance(verifiers[a], verifiers[b]).value
        for a in range(k) for b in range(a + 1, k)
    }
    spread = to_fixed(tolerance)
    found = {}
    for ticks in itertools.product(range(schedule.count), repeat=k):
        fixed = [schedule.tick_time(j) for j in ticks]
        if any(abs(fixed[a] - fixed[b]) > gap for (a, b), gap in gaps.items()):
            continue
        times = [schedule.time_of(j) for j in ticks]
        for L, _ in _meet(verifiers, columns, times):
            if not in_convex_hull(L, verifiers):
                continue
            arrivals = [s + distance(X, L).value for s, X in zip(fixed, verifiers)]
            if max(arrivals) - min(arrivals) > spread:
                continue
            found.setdefault((max(arrivals), L), ticks)
            break
    mesh = [
        MeshPoint(i, L, t, ticks)
        for i, ((t, L), ticks) in enumerate(sorted(found.items()))
    ]
    logger.debug("%d ticks induce %d mesh points", schedule.count, len(mesh))
    return mesh


@dataclass(frozen=True)
class OptParams:
    n: int = 8
    kappa: int = DEFAULT_KAPPA
    lam: int = DEFAULT_LAMBDA
    id_bits: int = ID_BITS

    @property
    def payload_bits(self):
        return 1 + self.id_bits


class OptGeometry:
    """Verifiers, tick schedule, mesh and the slot table they induce."""

    def __init__(self, verifiers, schedule, mesh=None):
        self.verifiers = tuple(spatial(v) for v in verifiers)
        self.schedule = schedule
        self.mesh = mesh_points(self.verifiers, schedule) if mesh is None else list(mesh)
        if not self.mesh:
            raise GeometryError("the schedule induces no mesh points")
        self.T = max_travel_time(self.verifiers, self.verifiers)
        self.t1 = schedule.tick_time(0)
        self.t_init = self.t1 - 2 * self.T
        self.slots = [
            tuple(
                schedule.first_tick_from(m.t + distance(m.L, X).value)
                for X in self.verifiers
            )
            for m in self.mesh
        ]
        first = min(min(s) for s in self.slots)
        last = max(max(s) for s in self.slots)
        self.window = range(first, last + 1)
        self.t_final = schedule.tick_time(last)

    def __repr__(self):
        return f"<OptGeometry mesh={len(self.mesh)} ticks={self.schedule.count}>"

    def __len__(self):
        return len(self.mesh)

    @property
    def k(self):
        return len(self.verifiers)

    def locate(self, point, tolerance=DELTA_MESH):
        """Id of the mesh point within tolerance of point, else None."""

        if not isinstance(point, SpacetimePoint):
            point = SpacetimePoint(*point)
        tol = to_fixed(tolerance)
        for m in self.mesh:
            if abs(m.t - point.fixed_t) <= tol and distance(m.L, point.L).value <= tol:
                return m.id
        return None

    def challenge(self, shared, mesh_id, n):
        ticks = self.mesh[mesh_id].ticks
        return tuple(challenge_string(shared, i, j, n) for i, j in enumerate(ticks))

    def expected_answer(self, shared, mesh_id, n, quantum_target=None):
        if mesh_id == quantum_target:
            return qubit_bit(shared, mesh_id)
        return f(*self.challenge(shared, mesh_id, n))


@dataclass
class OptSession:
    geometry: OptGeometry
    params: OptParams
    shared: SharedRandomness
    arena: QArena
    rng: np.random.Generator
    pp: object
    quantum_target: int = None


class OptVerifier(CommitVerifier):
    """Broadcasts one challenge string per tick and records prover messages."""

    def on_start(self, sim):
        session = self.session
        geometry = session.geometry
        for j in range(geometry.schedule.count):
            sim.wake(self.id, geometry.schedule.tick_time(j), j)
        if self.index != 0:
            return ()
        signals = [self.broadcast(geometry.t_init, bits_to_bytes(session.pp.bits), PP_LABEL)]
        target = session.quantum_target
        if target is not None:
            m = geometry.mesh[target]
            xs = geometry.challenge(session.shared, target, session.params.n)
            qubit = session.arena.prepare_bb84(qubit_bit(session.shared, target), f(*xs))
            sim.count(self.id, "qubit")
            send = m.t - distance(self.position, m.L).value
            signals.append(self.directional(send, m.L, b"", qubit_label(target), (qubit,)))
        return signals

    def on_tick(self, sim, now, tag=None):
        x = challenge_string(self.session.shared, self.index, tag, self.session.params.n)
        sim.count(self.id, "prg")
        return [self.broadcast(now, bits_to_bytes(x), tick_label(self.index, tag))]


class OptProver(Party):
    """Answers one mesh point's challenge and keeps every verifier in lockstep."""

    def __init__(self, session, mesh_id, position=None, party_id="P"):
        geometry = session.geometry
        if position is None:
            if mesh_id is None:
                raise ValueError("a prover without a mesh point needs a position")
            position = geometry.mesh[mesh_id].L
        super().__init__(party_id, position)
        if not in_convex_hull(self.position, geometry.verifiers):
            raise GeometryError("the prover must sit inside the verifiers' hull")
        self.session = session
        self.mesh_id = mesh_id
        self.opening = None
        self.encryptor = None
        self.xs = {}
        self.qubit = None
        self.answer = None

    def on_start(self, sim):
        geometry = self.session.geometry
        for i, X in enumerate(geometry.verifiers):
            lead = distance(self.position, X).value
            for m in geometry.window:
                sim.wake(self.id, geometry.schedule.tick_time(m) - lead, (i, m))
        return ()

    def on_deliver(self, sim, delivery):
        session = self.session
        if delivery.label == PP_LABEL and self.opening is None:
            self.opening, signals = commit_to_key(sim, self, session, delivery.payload)
            self.encryptor = Encryptor(self.opening.sk, session.params.payload_bits)
            return signals
        if self.mesh_id is None or self.answer is not None:
            return ()
        if delivery.qubits and delivery.label == qubit_label(self.mesh_id):
            self.qubit = delivery.qubits[0]
        head = delivery.label.partition("@")[0]
        if head.startswith("x") and head[1:].isdigit():
            i, j = int(head[1:]), _label_number(delivery.label, head)
            if i < session.geometry.k and j == session.geometry.mesh[self.mesh_id].ticks[i]:
                n = session.params.n
                self.xs[i] = bytes_to_bits(delivery.payload[:(n + 7) // 8], n)
        self._maybe_answer()
        return ()

    def _maybe_answer(self):
        session = self.session
        if len(self.xs) < session.geometry.k:
            return
        xs = tuple(self.xs[i] for i in range(session.geometry.k))
        if session.quantum_target is None:
            self.answer = f(*xs)
        elif self.qubit is not None:
            self.answer = session.arena.measure(self.qubit, f(*xs), session.rng)

    def seal(self, sim, verifier, slot):
        session = self.session
        geometry, params = session.geometry, session.params
        payload = None
        if (
            self.mesh_id is not None and self.answer is not None
            and geometry.slots[self.mesh_id][verifier] == slot
        ):
            payload = (self.answer << params.id_bits) | self.mesh_id
        sim.count(self.id, "enc")
        return self.encryptor.enc(slot * geometry.k + verifier, payload).to_bytes()

    def on_tick(self, sim, now, tag=None):
        if self.encryptor is None:
            return ()
        i, m = tag
        X = self.session.geometry.verifiers[i]
        return [self.directional(now, X, self.seal(sim, i, m), slot_label(m))]


@dataclass
class OptRun:
    rho: CommitmentState
    opening: object
    geometry: OptGeometry
    params: OptParams
    mesh_id: int
    quantum_target: int
    sim: Simulator = field(repr=False)

    @property
    def log(self):
        return self.sim.log

    @property
    def schedule(self):
        return self.geometry.schedule


def run_optimized_commit(geometry, alpha=None, seed=0, params=OptParams(), quantum=False,
                         prover=None):
    """Run the optimized commit phase.

    ``alpha`` is a mesh id or a spacetime point; a point off the mesh puts an
    honest-but-unanswering prover there, whose reveal later fails. ``prover``
    optionally replaces the honest prover with a factory over the session.
    """

    position = None
    mesh_id = alpha
    if alpha is not None and not isinstance(alpha, int):
        point = alpha if isinstance(alpha, SpacetimePoint) else SpacetimePoint(*alpha)
        mesh_id = geometry.locate(point)
        if mesh_id is None:
            logger.warning("prover at %r is off the mesh", point)
            position = point.L
    if quantum and mesh_id is None:
        raise ValueError("quantum mode needs the prover on a mesh point")
    if mesh_id is not None and not 0 <= mesh_id < len(geometry):
        raise IndexError(f"mesh point {mesh_id} out of range")
    if len(geometry) >= 1 << params.id_bits:
        raise GeometryError("mesh ids do not fit the payload")

    verifier_seed = derive_seed(seed, VERIFIER_DOMAIN)
    shared = SharedRandomness(verifier_seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(PROVER_DOMAIN,)))
    arena = QArena(rng=rng)
    pp = com_setup(params.lam, params.kappa, shared.stream(PP_DOMAIN))
    session = OptSession(geometry, params, shared, arena, rng, pp, mesh_id if quantum else None)

    sim = Simulator(start_time=geometry.t_init, arena=arena)
    verifiers = [sim.add_party(OptVerifier(i, session)) for i in range(geometry.k)]
    if prover is not None:
        provers = list(prover(session))
    elif mesh_id is not None or position is not None:
        provers = [OptProver(session, mesh_id, position)]
    else:
        provers = []
    for party in provers:
        sim.add_party(party)
    sim.run_until(geometry.t_final)

    M = canonical_transcript(entry for v in verifiers for entry in v.entries)
    opening = next((p.opening for p in provers if getattr(p, "opening", None)), None)
    rho = CommitmentState(pp, recorded_commitment(verifiers[0].entries, params), M, verifier_seed)
    logger.info("optimized commit over %d mesh points recorded %d entries", len(geometry), len(M))
    return OptRun(rho, opening, geometry, params, mesh_id, session.quantum_target, sim)


def _decrypt_slots(rho, opening, geometry, params):
    """{(verifier, slot): payload} for every on-time, well-formed valid frame."""

    values = {}
    for (i, label), entry in rho.first_entries().items():
        slot = _label_number(label, "y")
        if slot is None or i >= geometry.k or entry.timestamp != geometry.schedule.tick_time(slot):
            continue
        if len(entry.payload) * 8 < params.payload_bits + 1:
            continue
        ct = Ciphertext.from_bytes(slot * geometry.k + i, entry.payload, params.payload_bits)
        value = dec(opening.sk, ct, params.payload_bits)
        if value is not None:
            values[i, slot] = value
    return values


def reveal_optimized(rho, req, geometry, params=OptParams(), quantum_target=None):
    """Accept iff the opening matches c and exactly the claimed mesh point verifies."""

    if not 0 <= req.alpha < len(geometry):
        return RevealResult(False, frozenset(), "claimed point is not on the mesh")
    sk, r = req.opening.sk, req.opening.r
    if (
        len(sk.bits) != params.kappa or len(r) != params.lam * params.kappa
        or rho.pp.lam != params.lam or not rho.c
        or com(rho.pp, sk.bits, r) != rho.c
    ):
        return RevealResult(False, frozenset(), "opening does not match the commitment")

    values = _decrypt_slots(rho, req.opening, geometry, params)
    mask = (1 << params.id_bits) - 1
    shared = SharedRandomness(rho.s)
    accepting = set()
    for candidate in sorted({value & mask for value in values.values()}):
        if candidate >= len(geometry):
            continue
        y = geometry.expected_answer(shared, candidate, params.n, quantum_target)
        expected = (y << params.id_bits) | candidate
        if all(values.get((i, m)) == expected for i, m in enumerate(geometry.slots[candidate])):
            accepting.add(candidate)
    accepting = frozenset(accepting)
    accepted = accepting == {req.alpha}
    logger.info("optimized reveal at %d: accepting set %s", req.alpha, sorted(accepting))
    return RevealResult(accepted, accepting, "" if accepted else "accepting set mismatch")


@dataclass
class WorkProfile:
    """Primitive-op counts per (tick, party, op); sends included."""

    counts: Counter
    verifiers: frozenset = frozenset()

    def table(self):
        """Sorted (tick, party, ops) rows."""

        totals = Counter()
        for (tick, party, _), n in self.counts.items():
            totals[tick, party] += n
        return sorted((tick, party, n) for (tick, party), n in totals.items())

    def per_tick(self, op=None):
        """{tick: {"prover": n, "verifier": n}}, optionally for one op."""

        out = {}
        for (tick, party, kind), n in self.counts.items():
            if op is not None and kind != op:
                continue
            role = VERIFIER_ROLE if party in self.verifiers else PROVER_ROLE
            row = out.setdefault(tick, {PROVER_ROLE: 0, VERIFIER_ROLE: 0})
            row[role] += n
        return dict(sorted(out.items()))

    def max_per_tick(self, role, op=None):
        return max((row[role] for row in self.per_tick(op).values()), default=0)


def per_tick_work_profile(run, schedule=None):
    """Bucket a run's counted operations and sends by tick of ``schedule``."""

    schedule = schedule or run.schedule
    counts = Counter()
    for (time, party, op), n in run.sim.ops.items():
        counts[schedule.tick_at(time), party, op] += n
    for event in run.sim.log:
        if event.kind == "send":
            counts[schedule.tick_at(event.time), event.party, "send"] += 1
    return WorkProfile(counts, run.sim.ids_with_role(VERIFIER_ROLE))


def write_profile_csv(profile, path):
    with open(path, "w", newline="") as profile_csv:
        writer = csv.DictWriter(profile_csv, fieldnames=PROFILE_CSV_HEADERS)
        writer.writeheader()
        for tick, party, ops in profile.table():
            writer.writerow(dict(tick=tick, party=party, ops=ops))


def baseline_geometry(geometry):
    """The unoptimized scheme run over S = the mesh."""

    return CommittableSet(geometry.verifiers, [m.point for m in geometry.mesh])


def run_baseline_commit(geometry, mesh_id, seed=0, params=CommitParams()):
    """Commit with the dummy-per-point scheme over the same mesh, for profiling."""

    return commit_phase(baseline_geometry(geometry), params, seed, prover_alpha=mesh_id)
