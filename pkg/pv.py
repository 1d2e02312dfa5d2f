"""Singleton position verification with f-BB84 challenges.

Verifiers V1..Vk (k = d+1) send classical strings x_i timed to meet at the
target point (L, t); V1's signal also carries a qubit H^f(x)|b>. A prover at
(L, t) measures in basis f(x) and answers b. The verifiers accept a round when
every one of them received b at exactly t + distance(X_i, L).
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from crypto import bits_to_bytes, bytes_to_bits, random_bits
from engine import VERIFIER_ROLE, Party, Simulator
from qsim import QArena
from spacetime import (
    GeometryError, SpacetimePoint, distance, enclosing_simplex, in_convex_hull,
    spatial, to_fixed,
)

logger = logging.getLogger(__name__)

PV_DOMAIN = 1
PROVER_DOMAIN = 2


def challenge_label(verifier, alpha, rnd):
    return f"x{verifier}.{alpha}.{rnd}"


def response_label(alpha, rnd):
    return f"y.{alpha}.{rnd}"


def parse_label(label):
    """("x", verifier, alpha, round), ("y", alpha, round) or None."""

    head, _, rest = label.partition(".")
    try:
        numbers = tuple(int(part) for part in rest.split("."))
    except ValueError:
        return None
    if head == "y" and len(numbers) == 2:
        return ("y",) + numbers
    if head.startswith("x") and head[1:].isdigit() and len(numbers) == 2:
        return ("x", int(head[1:])) + numbers
    return None


def f(*xs):
    """Inner product of (x_1 ^ ... ^ x_{k-1}) with x_k, mod 2."""

    if len(xs) < 2:
        raise ValueError("f needs at least two strings")
    n = len(xs[0])
    if any(len(x) != n for x in xs):
        raise ValueError("challenge strings must have equal length")
    folded = list(xs[0])
    for x in xs[1:-1]:
        folded = [a ^ b for a, b in zip(folded, x)]
    return sum(a & b for a, b in zip(folded, xs[-1])) & 1


class SharedRandomness:
    """Verifiers' shared random string, addressed by disjoint segments."""

    def __init__(self, seed):
        if seed < 0:
            raise ValueError("seeds are non-negative integers")
        self.seed = seed

    def __repr__(self):
        return f"<SharedRandomness seed={self.seed}>"

    def stream(self, *key):
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=key))

    def round_values(self, alpha, rnd, k, n):
        """(x_1..x_k, b) for one round of one session."""

        rng = self.stream(PV_DOMAIN, alpha, rnd)
        xs = tuple(random_bits(rng, n) for _ in range(k))
        return xs, int(rng.integers(0, 2))


class FBB84:
    """The f-BB84 challenge family: basis f(x), answer b."""

    name = "f-bb84"

    def __init__(self, n):
        self.n = n

    def __repr__(self):
        return f"<{type(self).__name__} n={self.n}>"

    def basis(self, xs):
        return f(*xs)

    def prepare(self, arena, xs, b):
        """V1's quantum payload, or None for classical variants."""

        return arena.prepare_bb84(b, self.basis(xs))

    def challenge_payload(self, verifier, xs, b):
        return bits_to_bytes(xs[verifier])

    def read_challenge(self, payload):
        """(x bits, extra bytes) from a challenge payload."""

        size = (self.n + 7) // 8
        return bytes_to_bits(payload[:size], self.n), payload[size:]

    def expected_answer(self, xs, b):
        return b

    def answer(self, arena, xs, qubit, extras, rng):
        """Honest answer from the gathered challenge."""

        return honest_respond(xs, qubit, arena, rng, self)


@dataclass(frozen=True)
class PvInstance:
    verifiers: tuple
    target: SpacetimePoint
    n: int = 8
    r: int = 1
    start_time: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "verifiers", tuple(spatial(v) for v in self.verifiers))
        if not isinstance(self.target, SpacetimePoint):
            object.__setattr__(self, "target", SpacetimePoint(*self.target))
        object.__setattr__(self, "start_time", Fraction(self.start_time))
        if len(self.verifiers) != self.d + 1:
            raise GeometryError(f"{self.d}-d verification needs {self.d + 1} verifiers")
        if not in_convex_hull(self.target.L, self.verifiers):
            raise GeometryError("target lies outside the verifiers' convex hull")
        if min(self.send_time(i) for i in range(self.k)) < to_fixed(self.start_time):
            raise GeometryError("challenges would have to be sent before the scenario starts")
        if self.n < 1 or self.r < 1:
            raise ValueError("n and r must be positive")

    @property
    def d(self):
        return self.target.d

    @property
    def k(self):
        return len(self.verifiers)

    def send_time(self, i):
        return self.target.fixed_t - distance(self.verifiers[i], self.target.L).value

    def expected_time(self, i):
        return self.target.fixed_t + distance(self.verifiers[i], self.target.L).value

    def end_time(self):
        return max(self.expected_time(i) for i in range(self.k)) + to_fixed(1)


@dataclass
class PvChallengeRound:
    round: int
    xs: tuple
    b: int
    basis: int
    qubit: object
    send_times: tuple


def gen_challenge(s, inst, rnd, arena, protocol=None, alpha=0):
    protocol = protocol or FBB84(inst.n)
    if not 0 <= rnd < inst.r:
        raise IndexError(f"round {rnd} outside 0..{inst.r - 1}")
    xs, b = s.round_values(alpha, rnd, inst.k, inst.n)
    qubit = protocol.prepare(arena, xs, b)
    return PvChallengeRound(
        rnd, xs, b, protocol.basis(xs), qubit,
        tuple(inst.send_time(i) for i in range(inst.k)),
    )


def honest_respond(xs, q, arena, rng=None, protocol=None):
    basis = protocol.basis(xs) if protocol else f(*xs)
    return arena.measure(q, basis, rng)


def predicate_W(s, inst, rnd, received, protocol=None, alpha=0):
    """1 iff every verifier got the correct bit at exactly its expected time.

    ``received`` holds one (bit, fixed time) pair or None per verifier.
    """

    protocol = protocol or FBB84(inst.n)
    if len(received) != inst.k or any(item is None for item in received):
        return 0
    xs, b = s.round_values(alpha, rnd, inst.k, inst.n)
    expected = protocol.expected_answer(xs, b)
    for i, (bit, time) in enumerate(received):
        if bit != expected or time != inst.expected_time(i):
            return 0
    return 1


def verifier_id(i):
    return f"V{i + 1}"


@dataclass
class PvContext:
    """Everything a prover factory may use."""

    inst: PvInstance
    protocol: FBB84
    shared: SharedRandomness
    arena: QArena
    rng: np.random.Generator
    seed: int


class PvVerifier(Party):
    role = VERIFIER_ROLE

    def __init__(self, index, ctx):
        super().__init__(verifier_id(index), ctx.inst.verifiers[index])
        self.index = index
        self.ctx = ctx
        self.responses = {}

    def on_start(self, sim):
        ctx, i = self.ctx, self.index
        signals = []
        for rnd in range(ctx.inst.r):
            xs, b = ctx.shared.round_values(0, rnd, ctx.inst.k, ctx.inst.n)
            qubits = ()
            if i == 0:
                qubit = ctx.protocol.prepare(ctx.arena, xs, b)
                qubits = () if qubit is None else (qubit,)
            signals.append(self.directional(
                ctx.inst.send_time(i), ctx.inst.target.L,
                ctx.protocol.challenge_payload(i, xs, b), challenge_label(i, 0, rnd), qubits,
            ))
        return signals

    def on_deliver(self, sim, delivery):
        parsed = parse_label(delivery.label)
        if parsed is None or parsed[0] != "y" or sim.role_of(delivery.sender) == VERIFIER_ROLE:
            return ()
        _, alpha, rnd = parsed
        if alpha == 0 and rnd not in self.responses and delivery.payload:
            self.responses[rnd] = (delivery.payload[0], delivery.time)
        return ()


class ChallengeCollector(Party):
    """Gathers the k challenge components of each (alpha, round)."""

    def __init__(self, party_id, position, k, protocol):
        super().__init__(party_id, position)
        self.k = k
        self.protocol = protocol
        self.pending = {}

    def collect(self, delivery):
        """Completed (alpha, round, xs, qubit, extras) or None."""

        parsed = parse_label(delivery.label)
        if parsed is None or parsed[0] != "x":
            return None
        _, verifier, alpha, rnd = parsed
        x, extra = self.protocol.read_challenge(delivery.payload)
        slot = self.pending.setdefault((alpha, rnd), {"xs": {}, "extras": {}, "qubit": None})
        slot["xs"].setdefault(verifier, x)
        slot["extras"].setdefault(verifier, extra)
        if delivery.qubits:
            slot["qubit"] = delivery.qubits[0]
        if len(slot["xs"]) < self.k:
            return None
        del self.pending[alpha, rnd]
        xs = tuple(slot["xs"][i] for i in range(self.k))
        return alpha, rnd, xs, slot["qubit"], slot["extras"]


class HonestPvProver(ChallengeCollector):
    """Answers each complete challenge by broadcasting the measured bit."""

    def __init__(self, ctx, party_id="P", position=None):
        position = ctx.inst.target.L if position is None else position
        super().__init__(party_id, position, ctx.inst.k, ctx.protocol)
        self.ctx = ctx

    def on_deliver(self, sim, delivery):
        done = self.collect(delivery)
        if done is None:
            return ()
        alpha, rnd, xs, qubit, extras = done
        y = self.protocol.answer(self.ctx.arena, xs, qubit, extras, self.ctx.rng)
        return [self.broadcast(sim.now, bytes([y]), response_label(alpha, rnd))]


def honest_prover(ctx):
    return [HonestPvProver(ctx)]


@dataclass
class PvResult:
    accepted: bool
    rounds: list
    sim: Simulator = field(repr=False)

    @property
    def log(self):
        return self.sim.log


def run_singleton_pv(inst, prover=honest_prover, seed=0, protocol=None):
    """Run all r rounds in parallel; accept iff every round passes W.

    ``prover`` is a factory taking a :class:`PvContext` and returning the
    parties that play the prover side (possibly none, possibly a coalition).
    """

    protocol = protocol or FBB84(inst.n)
    shared = SharedRandomness(seed)
    rng = shared.stream(PROVER_DOMAIN)
    arena = QArena(rng=rng)
    ctx = PvContext(inst, protocol, shared, arena, rng, seed)

    sim = Simulator(start_time=to_fixed(inst.start_time), arena=arena)
    verifiers = [sim.add_party(PvVerifier(i, ctx)) for i in range(inst.k)]
    if prover is not None:
        for party in (prover(ctx) if callable(prover) else [prover]):
            sim.add_party(party)
    sim.run_until(inst.end_time())

    rounds = []
    for rnd in range(inst.r):
        received = [v.responses.get(rnd) for v in verifiers]
        rounds.append(predicate_W(shared, inst, rnd, received, protocol))
    accepted = all(rounds)
    logger.info("singleton PV at %r: %s", inst.target, "accept" if accepted else "reject")
    return PvResult(accepted, rounds, sim)


def place_verifiers(points, margin=1):
    """Verifier positions covering every point via enclosing_simplex."""

    return enclosing_simplex([spatial(p) for p in points], margin)
