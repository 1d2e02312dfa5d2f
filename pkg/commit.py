"""Encrypt-then-verify position commitments.

Commit phase: the coordinator V1 broadcasts pp; the prover answers with a
commitment c to a fresh key, timed to reach every verifier at t1 = t_init + 2T.
The verifiers then run one f-BB84 session per committable point. The prover
answers its own session with Enc(sk, y) and sends Enc(sk, dummy) to every
verifier at the time each other session's answer is due. Verifiers record
every prover message; the record is the commitment state rho = (pp, c, M, s).

Reveal phase: given (sk, r), check c, decrypt every session and accept iff
exactly the claimed point's session verifies.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from crypto import (
    DEFAULT_KAPPA, DEFAULT_LAMBDA, PAYLOAD_BITS, Ciphertext, Encryptor, PublicParams,
    SecretKey, bits_to_bytes, bytes_to_bits, com, com_setup, dec, enc,
    gen_key, int_to_bits, random_bits,
)
from engine import VERIFIER_ROLE, Party, Simulator
from pv import (
    FBB84, ChallengeCollector, PvInstance, SharedRandomness, challenge_label,
    predicate_W, response_label, verifier_id,
)
from qsim import QArena
from records import MalformedRecordError, RecordReader, RecordWriter
from spacetime import (
    GeometryError, SpacetimePoint, distance, from_fixed, in_convex_hull,
    max_travel_time, spatial, to_fixed,
)
from toycipher import BLOCK_BITS

logger = logging.getLogger(__name__)

RHO_MAGIC = b"PCMT"
OPENING_MAGIC = b"PCOP"
FORMAT_VERSION = 1
COMMITMENT_LABEL = "c"
PP_LABEL = "pp"

VERIFIER_DOMAIN = 10
PROVER_DOMAIN = 11
PP_DOMAIN = 12


class MalformedStateError(MalformedRecordError):
    """A commitment state or opening cannot be decoded."""


@dataclass(frozen=True)
class CommitParams:
    n: int = 8
    r: int = 1
    kappa: int = DEFAULT_KAPPA
    lam: int = DEFAULT_LAMBDA
    payload_bits: int = PAYLOAD_BITS


class CommittableSet:
    """The committable points S and the timing they induce."""

    def __init__(self, verifiers, S, t_init=None):
        self.verifiers = tuple(spatial(v) for v in verifiers)
        self.S = tuple(p if isinstance(p, SpacetimePoint) else SpacetimePoint(*p) for p in S)
        if not self.S:
            raise GeometryError("the committable set is empty")
        d = self.S[0].d
        if any(p.d != d for p in self.S) or any(len(v) != d for v in self.verifiers):
            raise GeometryError("mixed dimensions in the committable set")
        if len(self.verifiers) != d + 1:
            raise GeometryError(f"{d}-d commitments need {d + 1} verifiers")
        for p in self.S:
            if not in_convex_hull(p.L, self.verifiers):
                raise GeometryError(f"{p!r} lies outside the verifiers' hull")

        self.T = max_travel_time([p.L for p in self.S], self.verifiers)
        earliest = min(
            self.challenge_send_time(a, i) for a in range(len(self.S)) for i in range(self.k)
        )
        if t_init is None:
            self.t_init = earliest - 2 * self.T
        else:
            self.t_init = to_fixed(t_init)
            if earliest < self.t_init + 2 * self.T:
                raise GeometryError("challenges for some point would precede t1")
        self.t1 = self.t_init + 2 * self.T
        self.t_final = max(
            [self.t1] + [self.expected_arrival(a, i) for a in range(len(self.S)) for i in range(self.k)]
        )
        self._instances = {}

    def __repr__(self):
        return f"<CommittableSet |S|={len(self.S)} k={self.k}>"

    def __len__(self):
        return len(self.S)

    @property
    def k(self):
        return len(self.verifiers)

    @property
    def d(self):
        return self.S[0].d

    def challenge_send_time(self, alpha, i):
        point = self.S[alpha]
        return point.fixed_t - distance(self.verifiers[i], point.L).value

    def expected_arrival(self, alpha, i):
        point = self.S[alpha]
        return point.fixed_t + distance(point.L, self.verifiers[i]).value

    def index_of(self, point):
        try:
            return self.S.index(point)
        except ValueError:
            return None

    def instance(self, alpha, params):
        """The singleton PV instance of one committable point."""

        key = (alpha, params.n, params.r)
        if key not in self._instances:
            self._instances[key] = PvInstance(
                self.verifiers, self.S[alpha], params.n, params.r, from_fixed(self.t_init)
            )
        return self._instances[key]


def cipher_index(alpha, verifier, rnd, k, r):
    """Canonical counter shared by prover and verifiers."""

    return (alpha * k + verifier) * r + rnd


@dataclass(frozen=True, order=True)
class TranscriptEntry:
    receiver: int
    timestamp: int
    label: str
    payload: bytes

    def shape(self):
        return (self.receiver, self.timestamp, self.label, len(self.payload))


def derive_seed(seed, domain):
    words = np.random.SeedSequence(seed, spawn_key=(domain,)).generate_state(2, np.uint64)
    return (int(words[0]) << 64) | int(words[1])


def canonical_transcript(entries):
    return tuple(sorted(entries))


@dataclass(frozen=True)
class CommitmentState:
    """rho = (pp, c, M, s)."""

    pp: PublicParams
    c: tuple
    M: tuple
    s: int

    def shape(self):
        return tuple(entry.shape() for entry in self.M)

    def first_entries(self):
        """First entry per (receiver, label); later duplicates are ignored."""

        first = {}
        for entry in sorted(self.M, key=lambda e: (e.receiver, e.timestamp)):
            first.setdefault((entry.receiver, entry.label), entry)
        return first

    def to_bytes(self):
        labels = sorted({entry.label for entry in self.M})
        positions = {label: i for i, label in enumerate(labels)}
        out = RecordWriter()
        out.raw(RHO_MAGIC)
        out.u16(FORMAT_VERSION)

        section = RecordWriter()
        section.u16(self.pp.lam)
        section.bits(self.pp.bits)
        out.blob(section.getvalue())

        section = RecordWriter()
        section.bits(self.c)
        out.blob(section.getvalue())

        out.blob(self.s.to_bytes(max(1, (self.s.bit_length() + 7) // 8), "big"))

        section = RecordWriter()
        section.u32(len(labels))
        for label in labels:
            section.text(label)
        out.blob(section.getvalue())

        section = RecordWriter()
        section.u32(len(self.M))
        for entry in self.M:
            section.u16(entry.receiver)
            section.i128(entry.timestamp)
            section.u32(positions[entry.label])
            section.blob(entry.payload)
        out.blob(section.getvalue())
        return out.getvalue()

    @classmethod
    def from_bytes(cls, data):
        try:
            reader = RecordReader(data)
            reader.expect(RHO_MAGIC)
            if reader.u16() != FORMAT_VERSION:
                raise MalformedStateError("unsupported commitment-state version")
            section = RecordReader(reader.blob())
            lam = section.u16()
            pp = PublicParams(section.bits(), lam)
            section.done()
            section = RecordReader(reader.blob())
            c = section.bits()
            section.done()
            s = int.from_bytes(reader.blob(), "big")
            section = RecordReader(reader.blob())
            labels = [section.text() for _ in range(section.u32())]
            section.done()
            section = RecordReader(reader.blob())
            entries = []
            for _ in range(section.u32()):
                receiver, timestamp, label = section.u16(), section.i128(), section.u32()
                entries.append(TranscriptEntry(receiver, timestamp, labels[label], section.blob()))
            section.done()
            reader.done()
        except (MalformedRecordError, IndexError, ValueError) as exc:
            raise MalformedStateError(f"bad commitment state: {exc}") from exc
        return cls(pp, c, tuple(entries), s)


@dataclass(frozen=True)
class Opening:
    sk: SecretKey
    r: tuple

    def to_bytes(self):
        out = RecordWriter()
        out.raw(OPENING_MAGIC)
        out.u16(FORMAT_VERSION)
        out.bits(self.sk.bits)
        out.bits(self.r)
        return out.getvalue()

    @classmethod
    def from_bytes(cls, data):
        try:
            reader = RecordReader(data)
            reader.expect(OPENING_MAGIC)
            if reader.u16() != FORMAT_VERSION:
                raise MalformedStateError("unsupported opening version")
            sk, r = SecretKey(reader.bits()), reader.bits()
            reader.done()
        except MalformedRecordError as exc:
            raise MalformedStateError(f"bad opening: {exc}") from exc
        return cls(sk, r)


@dataclass(frozen=True)
class RevealRequest:
    alpha: int
    opening: Opening


@dataclass
class CommitSession:
    """Shared context of one commit run."""

    geometry: CommittableSet
    params: CommitParams
    shared: SharedRandomness
    protocol: FBB84
    arena: QArena
    rng: np.random.Generator
    pp: PublicParams
    suppress: frozenset = frozenset()


def commit_to_key(sim, party, session, pp_payload):
    """Sample (sk, r) on receipt of pp; time c to reach every verifier at t1.

    Returns the opening and the commitment signals.
    """

    geometry, params = session.geometry, session.params
    pp = PublicParams(bytes_to_bits(pp_payload, 3 * params.lam * params.kappa), params.lam)
    sk = gen_key(session.rng, params.kappa)
    r = random_bits(session.rng, params.lam * params.kappa)
    c = bits_to_bytes(com(pp, sk.bits, r))
    sim.count(party.id, "prg", params.kappa * -(-3 * params.lam // BLOCK_BITS))
    signals = [
        party.directional(
            max(sim.now, geometry.t1 - distance(party.position, X).value), X, c, COMMITMENT_LABEL
        )
        for X in geometry.verifiers
    ]
    return Opening(sk, r), signals


def recorded_commitment(entries, params):
    """c as first recorded by one verifier, or () when it never arrived intact."""

    c_bits = 3 * params.lam * params.kappa
    first = next((e for e in entries if e.label == COMMITMENT_LABEL), None)
    if first is None or len(first.payload) * 8 < c_bits:
        return ()
    return bytes_to_bits(first.payload, c_bits)


class CommitVerifier(Party):
    """Honest verifier: V1 coordinates, everyone challenges from t1 and records."""

    role = VERIFIER_ROLE

    def __init__(self, index, session):
        super().__init__(verifier_id(index), session.geometry.verifiers[index])
        self.index = index
        self.session = session
        self.entries = []

    def on_start(self, sim):
        geometry = self.session.geometry
        sim.wake(self.id, geometry.t1, "challenge")
        if self.index == 0:
            return [self.broadcast(geometry.t_init, bits_to_bytes(self.session.pp.bits), PP_LABEL)]
        return ()

    def on_tick(self, sim, now, tag=None):
        if tag != "challenge":
            return ()
        session, i = self.session, self.index
        geometry, params = session.geometry, session.params
        signals = []
        for alpha, point in enumerate(geometry.S):
            if alpha in session.suppress:
                continue
            for rnd in range(params.r):
                xs, b = session.shared.round_values(alpha, rnd, geometry.k, params.n)
                sim.count(self.id, "prg")
                qubits = ()
                if i == 0:
                    qubit = session.protocol.prepare(session.arena, xs, b)
                    qubits = () if qubit is None else (qubit,)
                    sim.count(self.id, "qubit")
                signals.append(self.directional(
                    geometry.challenge_send_time(alpha, i), point.L,
                    session.protocol.challenge_payload(i, xs, b),
                    challenge_label(i, alpha, rnd), qubits,
                ))
        return signals

    def on_deliver(self, sim, delivery):
        if sim.role_of(delivery.sender) != VERIFIER_ROLE:
            self.entries.append(TranscriptEntry(self.index, delivery.time, delivery.label, delivery.payload))
        return ()


class CommitProver(ChallengeCollector):
    """Honest prover at its committed point (or anywhere, with alpha None)."""

    def __init__(self, session, alpha, position=None, party_id="P"):
        geometry = session.geometry
        if position is None:
            if alpha is None:
                raise ValueError("a prover without a point needs a position")
            position = geometry.S[alpha].L
        super().__init__(party_id, position, geometry.k, session.protocol)
        self.session = session
        self.alpha = alpha
        self.opening = None
        self.encryptor = None

    def seal(self, sim, alpha, verifier, rnd, m):
        """Ciphertext bytes for one transcript slot."""

        params = self.session.params
        index = cipher_index(alpha, verifier, rnd, self.session.geometry.k, params.r)
        sim.count(self.id, "enc")
        return self.encryptor.enc(index, m).to_bytes()

    def on_deliver(self, sim, delivery):
        if delivery.label == PP_LABEL and self.opening is None:
            return self._commit(sim, delivery)
        done = self.collect(delivery)
        if done is None or self.opening is None:
            return ()
        alpha, rnd, xs, qubit, extras = done
        if alpha != self.alpha:
            return ()
        y = self.protocol.answer(self.session.arena, xs, qubit, extras, self.session.rng)
        return [
            self.directional(sim.now, X, self.seal(sim, alpha, i, rnd, y), response_label(alpha, rnd))
            for i, X in enumerate(self.session.geometry.verifiers)
        ]

    def _commit(self, sim, delivery):
        geometry, params = self.session.geometry, self.session.params
        self.opening, signals = commit_to_key(sim, self, self.session, delivery.payload)
        self.encryptor = Encryptor(self.opening.sk, params.payload_bits)
        for alpha in range(len(geometry)):
            if alpha == self.alpha:
                continue
            for i, X in enumerate(geometry.verifiers):
                # a prover off S may already be too late; it sends at once
                send = max(
                    sim.now, geometry.expected_arrival(alpha, i) - distance(self.position, X).value
                )
                for rnd in range(params.r):
                    signals.append(self.directional(
                        send, X, self.seal(sim, alpha, i, rnd, None), response_label(alpha, rnd)
                    ))
        return signals


class PlaintextProver(CommitProver):
    """Negative control: transmits frames without encrypting them."""

    def seal(self, sim, alpha, verifier, rnd, m):
        bits = self.session.params.payload_bits
        frame = (0,) * (1 + bits) if m is None else (1,) + int_to_bits(m, bits)
        return bits_to_bytes(frame)


@dataclass
class CommitRun:
    rho: CommitmentState
    opening: Opening
    geometry: CommittableSet
    params: CommitParams
    sim: Simulator = field(repr=False)

    @property
    def log(self):
        return self.sim.log


def commit_phase(geometry, params=CommitParams(), seed=0, prover_alpha=None, prover=None,
                 suppress=frozenset()):
    """Run the commit phase and return the verifiers' commitment state.

    With ``prover`` None an honest prover sits at S[prover_alpha] (no prover
    at all when prover_alpha is also None). Otherwise ``prover`` is a factory
    taking the :class:`CommitSession` and returning the prover-side parties.
    """

    verifier_seed = derive_seed(seed, VERIFIER_DOMAIN)
    shared = SharedRandomness(verifier_seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(PROVER_DOMAIN,)))
    arena = QArena(rng=rng)
    pp = com_setup(params.lam, params.kappa, shared.stream(PP_DOMAIN))
    session = CommitSession(geometry, params, shared, FBB84(params.n), arena, rng, pp, frozenset(suppress))

    sim = Simulator(start_time=geometry.t_init, arena=arena)
    verifiers = [sim.add_party(CommitVerifier(i, session)) for i in range(geometry.k)]
    provers = []
    if prover is not None:
        provers = list(prover(session))
    elif prover_alpha is not None:
        provers = [CommitProver(session, prover_alpha)]
    for party in provers:
        sim.add_party(party)
    sim.run_until(geometry.t_final)

    M = canonical_transcript(entry for v in verifiers for entry in v.entries)
    opening = next((p.opening for p in provers if getattr(p, "opening", None)), None)
    rho = CommitmentState(pp, recorded_commitment(verifiers[0].entries, params), M, verifier_seed)
    logger.info("commit phase over %d points recorded %d entries", len(geometry), len(M))
    return CommitRun(rho, opening, geometry, params, sim)


@dataclass
class RevealResult:
    accepted: bool
    accepting: frozenset
    reason: str = ""


def decrypt_session(first, opening, geometry, params, alpha):
    """Per-round lists of (payload, timestamp) per verifier for one point.

    Missing or malformed entries decrypt to None.
    """

    rounds = []
    for rnd in range(params.r):
        received = []
        for i in range(geometry.k):
            entry = first.get((i, response_label(alpha, rnd)))
            if entry is None or len(entry.payload) * 8 < 1 + params.payload_bits:
                received.append(None)
                continue
            index = cipher_index(alpha, i, rnd, geometry.k, params.r)
            ct = Ciphertext.from_bytes(index, entry.payload, params.payload_bits)
            received.append((dec(opening.sk, ct, params.payload_bits), entry.timestamp))
        rounds.append(received)
    return rounds


def accepting_set(rho, opening, geometry, params):
    """Points whose session decrypts consistently and passes W."""

    first = rho.first_entries()
    shared = SharedRandomness(rho.s)
    protocol = FBB84(params.n)
    accepted = set()
    for alpha in range(len(geometry)):
        inst = geometry.instance(alpha, params)
        ok = True
        for rnd, received in enumerate(decrypt_session(first, opening, geometry, params, alpha)):
            values = [None if item is None else item[0] for item in received]
            if None in values or len(set(values)) != 1:
                ok = False
                break
            if not predicate_W(shared, inst, rnd, received, protocol, alpha):
                ok = False
                break
        if ok:
            accepted.add(alpha)
    return frozenset(accepted)


def reveal_phase(rho, req, geometry, params=CommitParams()):
    """Accept iff the opening matches c and the accepting set is {req.alpha}."""

    if not 0 <= req.alpha < len(geometry):
        return RevealResult(False, frozenset(), "claimed point is not committable")
    sk, r = req.opening.sk, req.opening.r
    if (
        len(sk.bits) != params.kappa or len(r) != params.lam * params.kappa
        or rho.pp.lam != params.lam or not rho.c
        or com(rho.pp, sk.bits, r) != rho.c
    ):
        return RevealResult(False, frozenset(), "opening does not match the commitment")
    accepting = accepting_set(rho, req.opening, geometry, params)
    accepted = accepting == {req.alpha}
    logger.info("reveal at %d: accepting set %s", req.alpha, sorted(accepting))
    return RevealResult(accepted, accepting, "" if accepted else "accepting set mismatch")


@dataclass(frozen=True)
class VerifierView:
    """The verifiers' state at time tau.

    ``simulator_seed`` is set on simulated views only and replays them.
    """

    pp: PublicParams
    seed: int
    entries: tuple
    tau: int
    simulator_seed: int = None

    def shape(self):
        return tuple(entry.shape() for entry in self.entries)

    def ciphertext_bytes(self):
        return b"".join(e.payload for e in self.entries if e.label != COMMITMENT_LABEL)


def view_at(rho, tau):
    return VerifierView(rho.pp, rho.s, tuple(e for e in rho.M if e.timestamp <= tau), tau)


class ScriptedSender(Party):
    """Sends a fixed list of (send time, target, payload, label) and ignores replies."""

    def __init__(self, party_id, position, script):
        super().__init__(party_id, position)
        self.script = tuple(script)

    def on_start(self, sim):
        return [self.directional(t, target, payload, label) for t, target, payload, label in self.script]


def dummy_scripts(pp, geometry, params, rng):
    """Dummy messages under a fresh key, one script per committable point.

    Each point's script reaches every verifier when that point's answers are
    due; the script at S[0] also carries c, timed to arrive at t1.
    """

    sk = gen_key(rng, params.kappa)
    r = random_bits(rng, params.lam * params.kappa)
    c = com(pp, sk.bits, r)
    origin = geometry.S[0].L
    scripts = {0: [
        (geometry.t1 - distance(origin, X).value, X, bits_to_bytes(c), COMMITMENT_LABEL)
        for X in geometry.verifiers
    ]}
    for alpha, point in enumerate(geometry.S):
        script = scripts.setdefault(alpha, [])
        for i, X in enumerate(geometry.verifiers):
            for rnd in range(params.r):
                index = cipher_index(alpha, i, rnd, geometry.k, params.r)
                body = enc(sk, index, None, params.payload_bits).to_bytes()
                script.append((point.fixed_t, X, body, response_label(alpha, rnd)))
    return scripts, c


def replay_verifiers(pp, geometry, params, verifier_seed, scripts, t_end, rng):
    """Run the honest verifier program against scripted senders up to t_end."""

    arena = QArena(rng=rng)
    session = CommitSession(
        geometry, params, SharedRandomness(verifier_seed), FBB84(params.n), arena, rng, pp
    )
    sim = Simulator(start_time=geometry.t_init, arena=arena)
    verifiers = [sim.add_party(CommitVerifier(i, session)) for i in range(geometry.k)]
    for alpha, script in sorted(scripts.items()):
        sim.add_party(ScriptedSender(f"S{alpha}", geometry.S[alpha].L, script))
    sim.run_until(max(geometry.t_init, min(t_end, geometry.t_final)))
    return canonical_transcript(e for v in verifiers for e in v.entries if e.timestamp <= t_end)


def simulator_seed(seed):
    """An int seed as given, or one drawn from a Generator."""

    if isinstance(seed, np.random.Generator):
        return int(seed.integers(0, 2 ** 63))
    if seed < 0:
        raise ValueError("seeds are non-negative integers")
    return int(seed)


def _simulate(pp, geometry, params, seed, t_end):
    sim_seed = simulator_seed(seed)
    rng = np.random.default_rng(np.random.SeedSequence(sim_seed, spawn_key=(PROVER_DOMAIN,)))
    verifier_seed = derive_seed(sim_seed, VERIFIER_DOMAIN)
    scripts, c = dummy_scripts(pp, geometry, params, rng)
    entries = replay_verifiers(pp, geometry, params, verifier_seed, scripts, t_end, rng)
    return entries, c, verifier_seed, sim_seed


def hiding_simulator(pp, geometry, params, tau, seed):
    """Simulated verifier view at tau, built without the prover's position.

    ``seed`` is an int or a Generator to draw one from. The view records it;
    the same seed gives the same view.
    """

    entries, _, verifier_seed, sim_seed = _simulate(pp, geometry, params, seed, tau)
    logger.debug("simulated view at %d from seed %d: %d entries", tau, sim_seed, len(entries))
    return VerifierView(pp, verifier_seed, entries, tau, sim_seed)


def simulated_state(pp, geometry, params, seed):
    """A complete simulated commitment state and the seed that produced it."""

    entries, c, verifier_seed, sim_seed = _simulate(pp, geometry, params, seed, geometry.t_final)
    return CommitmentState(pp, c, entries, verifier_seed), sim_seed
