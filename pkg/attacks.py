"""Spoofer coalitions, insecure protocol variants and the attack registry."""

import concurrent.futures
import itertools
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from commit import (
    COMMITMENT_LABEL, PP_LABEL, CommitParams, CommittableSet, Opening, RevealRequest,
    cipher_index, commit_phase, reveal_phase,
)
from crypto import (
    Encryptor, PublicParams, SecretKey, bits_to_bytes, bytes_to_bits, com, gen_key, int_to_bits,
    random_bits,
)
from engine import VERIFIER_ROLE, audit_causality
from pv import (
    FBB84, ChallengeCollector, PvInstance, parse_label, response_label, run_singleton_pv,
)
from spacetime import GeometryError, SpacetimePoint, distance, spatial
from stats import wilson_interval
from toycipher import prg_table
from zkpv import zk_position_verify

logger = logging.getLogger(__name__)

FORWARD = "fwd|"
NOTE = "note|"
EQUIVOCATION_WORK = 1 << 20
EQUIVOCATION_RADIUS = 2

DEFAULT_VERIFIERS = ((0,), (6,))
DEFAULT_TARGET = SpacetimePoint((3,), 3)
DEFAULT_SPOOFERS = ((1,), (5,))


class StraddleError(GeometryError):
    """No straddling coalition exists for this placement."""


class UnknownStrategyError(KeyError):
    """No attack is registered under this name."""


##############################################################################
# Insecure protocol variants


class ClassicalVariant(FBB84):
    """f-BB84 with the qubit replaced by the bit b sent in the clear by V1."""

    name = "classical"

    def prepare(self, arena, xs, b):
        return None

    def challenge_payload(self, verifier, xs, b):
        payload = super().challenge_payload(verifier, xs, b)
        return payload + bytes([b]) if verifier == 0 else payload

    def answer(self, arena, xs, qubit, extras, rng):
        return extras[0][0]


class PlainBB84(FBB84):
    """BB84 whose basis is V2's one-bit string, announced in the clear."""

    name = "plain-bb84"

    def __init__(self, n=1):
        super().__init__(n)

    def basis(self, xs):
        return xs[1][0]


##############################################################################
# Coalitions


class PvChannel:
    """How spoofers answer a singleton PV instance."""

    targets = frozenset({0})

    def __init__(self, inst):
        self.inst = inst
        self.verifiers = inst.verifiers

    def deadline(self, alpha, rnd, verifier, position):
        return self.inst.expected_time(verifier) - distance(position, self.inst.verifiers[verifier]).value

    def payload(self, sim, member, alpha, rnd, verifier, y):
        return bytes([y])

    def on_other(self, sim, member, delivery):
        return ()


class CommitChannel:
    """How spoofers take part in a commit phase while claiming one point.

    The coalition agrees on (sk, r) before the run; every member commits to
    its near verifiers and seals dummy frames for every other point.
    """

    def __init__(self, session, claim):
        self.session = session
        self.targets = frozenset({claim})
        self.verifiers = session.geometry.verifiers
        params = session.params
        self.opening = Opening(
            gen_key(session.rng, params.kappa), random_bits(session.rng, params.lam * params.kappa)
        )
        self.encryptors = {}

    def deadline(self, alpha, rnd, verifier, position):
        geometry = self.session.geometry
        return geometry.expected_arrival(alpha, verifier) - distance(position, geometry.verifiers[verifier]).value

    def seal(self, sim, member, alpha, rnd, verifier, m):
        params, geometry = self.session.params, self.session.geometry
        encryptor = self.encryptors.setdefault(
            member.id, Encryptor(self.opening.sk, params.payload_bits)
        )
        sim.count(member.id, "enc")
        index = cipher_index(alpha, verifier, rnd, geometry.k, params.r)
        return encryptor.enc(index, m).to_bytes()

    def payload(self, sim, member, alpha, rnd, verifier, y):
        return self.seal(sim, member, alpha, rnd, verifier, y)

    def on_other(self, sim, member, delivery):
        if delivery.label != PP_LABEL or member.opening is not None:
            return ()
        params, geometry = self.session.params, self.session.geometry
        member.opening = self.opening
        pp = PublicParams(bytes_to_bits(delivery.payload, 3 * params.lam * params.kappa), params.lam)
        c = bits_to_bytes(com(pp, self.opening.sk.bits, self.opening.r))
        signals = []
        for i in member.near:
            X = geometry.verifiers[i]
            signals.append(member.directional(
                geometry.t1 - distance(member.position, X).value, X, c, COMMITMENT_LABEL
            ))
            for alpha in range(len(geometry)):
                if alpha in self.targets:
                    continue
                for rnd in range(params.r):
                    signals.append(member.directional(
                        self.deadline(alpha, rnd, i, member.position), X,
                        self.seal(sim, member, alpha, rnd, i, None), response_label(alpha, rnd),
                    ))
        return signals


class Coalition:
    """Spoofers sharing classical notes and a budget of pre-shared EPR pairs."""

    def __init__(self, arena, rng, protocol, k, channel, epr_budget=0):
        self.arena = arena
        self.rng = rng
        self.protocol = protocol
        self.k = k
        self.channel = channel
        self.epr_budget = epr_budget
        self.members = []
        self.epr = {}

    def __repr__(self):
        return f"<Coalition members={len(self.members)} E={self.epr_budget}>"

    def add(self, member):
        self.members.append(member)
        return member

    def partners(self, member):
        return [m for m in self.members if m is not member]

    def share_epr(self, rounds):
        for rnd in range(min(self.epr_budget, rounds)):
            self.epr[rnd] = self.arena.make_epr()

    def assign(self, verifiers):
        """Give each verifier to its closest member; the member near V1 plays part A."""

        for member in self.members:
            member.near = []
        for i, X in enumerate(verifiers):
            closest = min(self.members, key=lambda m: (distance(m.position, X).value, m.id))
            closest.near.append(i)
        for member in self.members:
            member.part = "A" if 0 in member.near else "B"


class Spoofer(ChallengeCollector):
    """Coalition member: copies challenges to partners and answers its near verifiers."""

    intercepts = True

    def __init__(self, party_id, position, coalition):
        super().__init__(party_id, position, coalition.k, coalition.protocol)
        self.coalition = coalition
        self.near = []
        self.part = "B"
        self.notes = {}
        self.ready = {}
        self.answered = set()
        self.opening = None

    @property
    def channel(self):
        return self.coalition.channel

    def on_deliver(self, sim, delivery):
        label = delivery.label
        signals = []
        if label.startswith(FORWARD):
            self._gather(replace(delivery, label=label[len(FORWARD):], qubits=()))
        elif label.startswith(NOTE):
            sender_part, _, key = label[len(NOTE):].partition(".")
            alpha, rnd = (int(part) for part in key.split("."))
            self.notes.setdefault((alpha, rnd), {}).setdefault(sender_part, delivery.payload)
        else:
            parsed = parse_label(label)
            if parsed is None or parsed[0] != "x" or sim.role_of(delivery.sender) != VERIFIER_ROLE:
                return self.channel.on_other(sim, self, delivery)
            _, verifier, alpha, rnd = parsed
            if alpha not in self.channel.targets:
                return ()
            partners = self.coalition.partners(self)
            signals += [
                self.directional(sim.now, p.position, delivery.payload, FORWARD + label)
                for p in partners
            ]
            note = self.observe(sim, verifier, alpha, rnd, delivery)
            if note is not None:
                self.notes.setdefault((alpha, rnd), {})[self.part] = note
                signals += [
                    self.directional(sim.now, p.position, note, f"{NOTE}{self.part}.{alpha}.{rnd}")
                    for p in partners
                ]
            self._gather(delivery)
        return signals + self._respond(sim)

    def _gather(self, delivery):
        done = self.collect(delivery)
        if done is not None:
            alpha, rnd, xs, _, extras = done
            self.ready[alpha, rnd] = (xs, extras)

    def _respond(self, sim):
        signals = []
        for key in sorted(self.ready):
            if key in self.answered or not self.can_answer(key):
                continue
            self.answered.add(key)
            alpha, rnd = key
            xs, extras = self.ready[key]
            y = self.decide(key, xs, extras)
            for i in self.near:
                send = max(sim.now, self.channel.deadline(alpha, rnd, i, self.position))
                signals.append(self.directional(
                    send, self.channel.verifiers[i],
                    self.channel.payload(sim, self, alpha, rnd, i, y), response_label(alpha, rnd),
                ))
        return signals

    # strategy hooks

    def observe(self, sim, verifier, alpha, rnd, delivery):
        """Note for the partners about a directly received challenge, or None."""

        return None

    def can_answer(self, key):
        return True

    def decide(self, key, xs, extras):
        return self.protocol.answer(self.coalition.arena, xs, None, extras, self.coalition.rng)


class CopySpoofer(Spoofer):
    """Classical challenges only: copying them is enough."""


class InterceptResendSpoofer(Spoofer):
    """Member A measures the qubit in the computational basis and shares the outcome."""

    def observe(self, sim, verifier, alpha, rnd, delivery):
        if not delivery.qubits:
            return None
        sim.count(self.id, "measure")
        return bytes([self.coalition.arena.measure(delivery.qubits[0], 0, self.coalition.rng)])

    def can_answer(self, key):
        return "A" in self.notes.get(key, {})

    def decide(self, key, xs, extras):
        return self.notes[key]["A"][0]


class EprSpoofer(Spoofer):
    """Teleports the challenge qubit from A to B's side of a shared EPR pair.

    A Bell-measures (challenge, its half) and shares the correction bits. B
    measures its half in the basis it can guess from its own challenge and
    shares the outcome. Without a pair for the round A falls back to a
    computational-basis measurement.
    """

    def observe(self, sim, verifier, alpha, rnd, delivery):
        arena, pair = self.coalition.arena, self.coalition.epr.get(rnd)
        if delivery.qubits:
            if pair is None:
                return bytes([0, arena.measure(delivery.qubits[0], 0, self.coalition.rng)])
            x, z = arena.bell_measure(delivery.qubits[0], pair[0], self.coalition.rng)
            sim.count(self.id, "bell")
            return bytes([1, x, z])
        if self.part == "B" and pair is not None and verifier != 0:
            x, _ = self.protocol.read_challenge(delivery.payload)
            theta = self.guess_basis(verifier, x)
            return bytes([theta, arena.measure(pair[1], theta, self.coalition.rng)])
        return None

    def guess_basis(self, verifier, x):
        if isinstance(self.protocol, PlainBB84) and verifier == 1:
            return x[0]
        return 0

    def can_answer(self, key):
        notes = self.notes.get(key, {})
        if "A" not in notes:
            return False
        return notes["A"][0] == 0 or "B" in notes

    def decide(self, key, xs, extras):
        a = self.notes[key]["A"]
        if a[0] == 0:
            return a[1]
        theta, m = self.notes[key]["B"]
        return m ^ (a[1] if theta == 0 else a[2])


##############################################################################
# Placement checks


def check_straddle(inst, positions):
    """Raise StraddleError unless the members straddle L between the verifiers."""

    if inst.d != 1:
        raise StraddleError("straddling coalitions are defined on the line")
    lo, hi = sorted(v[0] for v in inst.verifiers)
    L = inst.target.L[0]
    if not lo < L < hi:
        logger.warning("target %s is not inside the verifier segment", L)
        raise StraddleError(f"L = {L} is not strictly between the verifiers")
    for p in positions:
        if spatial(p) == inst.target.L:
            raise StraddleError("a spoofer may not sit at the target")


def members_outside(sim, forbidden):
    """True when no party other than a verifier sits at a forbidden position."""

    forbidden = {spatial(p) for p in forbidden}
    return all(
        party.position not in forbidden
        for party in sim.parties.values() if party.role != VERIFIER_ROLE
    )


def spoofer_factory(cls, positions, epr_budget=0):
    """run_singleton_pv prover factory building a coalition of cls members."""

    def build(ctx):
        coalition = Coalition(ctx.arena, ctx.rng, ctx.protocol, ctx.inst.k, PvChannel(ctx.inst),
                              epr_budget)
        for j, position in enumerate(positions):
            coalition.add(cls(f"S{j + 1}", position, coalition))
        coalition.assign(ctx.inst.verifiers)
        coalition.share_epr(ctx.inst.r)
        return coalition.members

    return build


def commit_coalition_factory(cls, positions, claim):
    """commit_phase prover factory: a coalition claiming S[claim]."""

    def build(session):
        coalition = Coalition(session.arena, session.rng, session.protocol, session.geometry.k,
                              CommitChannel(session, claim))
        for j, position in enumerate(positions):
            coalition.add(cls(f"S{j + 1}", position, coalition))
        coalition.assign(session.geometry.verifiers)
        return coalition.members

    return build


##############################################################################
# Reports


@dataclass
class AttackReport:
    name: str
    trials: int
    successes: int
    extra: dict = field(default_factory=dict)

    @property
    def rate(self):
        return self.successes / self.trials if self.trials else 0.0

    @property
    def ci95(self):
        return wilson_interval(self.successes, self.trials)

    def to_dict(self):
        out = {
            "name": self.name,
            "trials": self.trials,
            "successes": self.successes,
            "rate": self.rate,
            "ci95": list(self.ci95),
        }
        out.update(self.extra)
        return out


def trial_seeds(seed, trials):
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(trials, np.uint64)]


def _pv_trial(inst, protocol, cls, positions, epr_budget, seed):
    check_straddle(inst, positions)
    result = run_singleton_pv(inst, spoofer_factory(cls, positions, epr_budget), seed, protocol)
    arena = result.sim.arena
    if arena.epr_pairs > epr_budget:
        raise RuntimeError(f"coalition used {arena.epr_pairs} EPR pairs with budget {epr_budget}")
    if not members_outside(result.sim, [inst.target.L]):
        raise RuntimeError("a coalition member sat at the target")
    return result


def _count(trial, trials, seed):
    return sum(bool(trial(s)) for s in trial_seeds(seed, trials))


##############################################################################
# Attack operations


def classical_copy_attack(inst, positions=DEFAULT_SPOOFERS, trials=1000, seed=0):
    """Acceptance rate of two copying spoofers against the classical variant."""

    protocol = ClassicalVariant(inst.n)

    def trial(s):
        return _pv_trial(inst, protocol, CopySpoofer, positions, 0, s).accepted

    return AttackReport("classical-copy", trials, _count(trial, trials, seed))


def intercept_resend_attack(inst, positions=DEFAULT_SPOOFERS, trials=1000, seed=0, protocol=None):
    """Computational-basis intercept-resend against f-BB84.

    ``successes`` counts accepted r-round runs; ``extra`` carries the per-round
    tally.
    """

    protocol = protocol or FBB84(inst.n)
    rounds_won = 0
    accepted = 0
    for s in trial_seeds(seed, trials):
        result = _pv_trial(inst, protocol, InterceptResendSpoofer, positions, 0, s)
        rounds_won += sum(result.rounds)
        accepted += result.accepted
    total_rounds = trials * inst.r
    return AttackReport("intercept-resend", trials, accepted, {
        "round_successes": rounds_won,
        "rounds": total_rounds,
        "round_rate": rounds_won / total_rounds if total_rounds else 0.0,
    })


def epr_attack_plain_bb84(inst=None, positions=DEFAULT_SPOOFERS, trials=1000, seed=0,
                          epr_budget=1, protocol=None):
    """Teleportation attack; plain BB84 by default, any variant by ``protocol``."""

    if inst is None:
        inst = PvInstance(DEFAULT_VERIFIERS, DEFAULT_TARGET, n=1)
    protocol = protocol or PlainBB84(inst.n)
    rounds_won = 0
    accepted = 0
    for s in trial_seeds(seed, trials):
        result = _pv_trial(inst, protocol, EprSpoofer, positions, epr_budget, s)
        rounds_won += sum(result.rounds)
        accepted += result.accepted
    total_rounds = trials * inst.r
    return AttackReport(f"epr-{protocol.name}", trials, accepted, {
        "epr_budget": epr_budget,
        "round_successes": rounds_won,
        "rounds": total_rounds,
        "round_rate": rounds_won / total_rounds if total_rounds else 0.0,
    })


def denial_privacy_attack(geometry, zone, trials=1000, seed=0, params=None, reps=4):
    """Accuracy of reading "prover in zone" off the verdict when the zone is denied service.

    The prover sits at a uniformly drawn point of S and proves membership of
    S itself; the verifiers withhold every challenge aimed into ``zone``.
    """

    params = params or CommitParams(n=4, kappa=8, lam=4)
    zone = frozenset(zone)
    R = frozenset(range(len(geometry)))
    correct = 0
    for s in trial_seeds(seed, trials):
        alpha = int(np.random.default_rng(s).integers(0, len(geometry)))
        verdict = zk_position_verify(geometry, R, alpha, params, reps, s, "honest", zone)
        correct += (not verdict.accepted) == (alpha in zone)
    return AttackReport("denial-privacy", trials, correct, {"zone": sorted(zone)})


##############################################################################
# Position binding


def equivocations(rho, opening, params, work=EQUIVOCATION_WORK, radius=EQUIVOCATION_RADIUS):
    """Openings of rho whose key differs from ``opening``'s in 1..radius bits.

    Each committed bit owns its own lambda-bit seed, so whether bit i can be
    flipped does not depend on the other bits. The search tries the 2**lambda
    seeds of every position once and then combines the per-bit hits into
    every opening inside the Hamming ball. Returns the alternate openings and
    the number of seeds tried.
    """

    lam = params.lam
    if (1 << lam) > work:
        raise ValueError(f"2**{lam} seeds exceed the work bound {work}")
    if radius < 1:
        raise ValueError("the search radius is at least one flipped bit")
    table = prg_table(lam, 3 * lam)
    hits = []
    tried = 0
    for i, bit in enumerate(opening.sk.bits):
        if tried + (1 << lam) > work:
            break
        tried += 1 << lam
        # the flipped bit needs G(r') = c_i xor (pp_i if the new bit is 1)
        target = np.array(rho.c[i * 3 * lam:(i + 1) * 3 * lam], dtype=np.uint8)
        if not bit:
            target = target ^ np.array(rho.pp.block(i), dtype=np.uint8)
        seeds = [int(s) for s in np.flatnonzero(np.all(table == target, axis=1))]
        if seeds:
            hits.append((i, seeds))

    found = []
    for size in range(1, radius + 1):
        for chosen in itertools.combinations(hits, size):
            for seeds in itertools.product(*(s for _, s in chosen)):
                sk, r = list(opening.sk.bits), list(opening.r)
                for (i, _), seed in zip(chosen, seeds):
                    sk[i] ^= 1
                    r[i * lam:(i + 1) * lam] = int_to_bits(seed, lam)
                found.append(Opening(SecretKey(tuple(sk)), tuple(r)))
    return found, tried


def default_committable_set():
    return CommittableSet(DEFAULT_VERIFIERS, [((2,), 3), ((3,), 3), ((4,), 3)])


def straddle_positions(geometry, claim):
    """Midpoints between each verifier and the claimed point."""

    L = geometry.S[claim].L
    return tuple(
        tuple((x + l) / 2 for x, l in zip(X, L)) for X in geometry.verifiers
    )


def binding_attack_suite(geometry=None, params=None, strategies=("honest", "intercept-resend", "equivocation"),
                         trials=100, seed=0, honest_alpha=0, claim=None, work=EQUIVOCATION_WORK,
                         radius=EQUIVOCATION_RADIUS):
    """Per-strategy, per-point reveal success counts.

    Returns {strategy: {"trials": n, "success": [count per alpha], ...}}.
    """

    geometry = geometry or default_committable_set()
    params = params or CommitParams(n=4, r=1, kappa=8, lam=8)
    claim = len(geometry) // 2 if claim is None else claim
    table = {}
    for strategy in strategies:
        success = [0] * len(geometry)
        extra = {}
        for s in trial_seeds(seed, trials):
            if strategy == "honest":
                run = commit_phase(geometry, params, s, prover_alpha=honest_alpha)
                openings = [run.opening]
            elif strategy == "intercept-resend":
                positions = straddle_positions(geometry, claim)
                run = commit_phase(geometry, params, s, prover=commit_coalition_factory(
                    InterceptResendSpoofer, positions, claim))
                if not members_outside(run.sim, [geometry.S[claim].L]):
                    raise RuntimeError("a coalition member sat at the claimed point")
                openings = [run.opening]
            elif strategy == "equivocation":
                run = commit_phase(geometry, params, s, prover_alpha=honest_alpha)
                openings, tried = equivocations(run.rho, run.opening, params, work, radius)
                extra["radius"] = radius
                extra["tries"] = extra.get("tries", 0) + tried
                extra["openings_found"] = extra.get("openings_found", 0) + len(openings)
            else:
                raise UnknownStrategyError(strategy)
            for alpha in range(len(geometry)):
                if any(
                    reveal_phase(run.rho, RevealRequest(alpha, o), geometry, params).accepted
                    for o in openings if o is not None
                ):
                    success[alpha] += 1
        table[strategy] = {"trials": trials, "success": success, **extra}
        logger.info("binding strategy %s: %s", strategy, success)
    return table


##############################################################################
# Registry


def _default_inst(r=1, n=8):
    return PvInstance(DEFAULT_VERIFIERS, DEFAULT_TARGET, n=n, r=r)


def _classical_copy(positions):
    def trial(seed):
        inst = _default_inst()
        return _pv_trial(inst, ClassicalVariant(inst.n), CopySpoofer, positions, 0, seed).accepted
    return trial


def classical_copy_trial(seed):
    return _classical_copy(DEFAULT_SPOOFERS)(seed)


def classical_copy_wide_trial(seed):
    return _classical_copy(((Fraction(1, 2),), (Fraction(11, 2),)))(seed)


def single_spoofer_trial(seed):
    return _classical_copy(((1,),))(seed)


def intercept_resend_trial(seed):
    return _pv_trial(_default_inst(), FBB84(8), InterceptResendSpoofer, DEFAULT_SPOOFERS, 0, seed).accepted


def intercept_resend_r20_trial(seed):
    return _pv_trial(_default_inst(r=20), FBB84(8), InterceptResendSpoofer, DEFAULT_SPOOFERS, 0,
                     seed).accepted


def epr_plain_trial(seed):
    return _pv_trial(_default_inst(n=1), PlainBB84(1), EprSpoofer, DEFAULT_SPOOFERS, 1, seed).accepted


def epr_inner_product_trial(seed):
    return _pv_trial(_default_inst(n=32), FBB84(32), EprSpoofer, DEFAULT_SPOOFERS, 1, seed).accepted


def epr_no_entanglement_trial(seed):
    return _pv_trial(_default_inst(n=1), PlainBB84(1), EprSpoofer, DEFAULT_SPOOFERS, 0, seed).accepted


def denial_privacy_trial(seed):
    geometry = default_committable_set()
    return denial_privacy_attack(geometry, {0}, trials=1, seed=seed).successes == 1


def honest_commit_trial(seed):
    geometry = default_committable_set()
    params = CommitParams(n=4, r=1, kappa=8, lam=8)
    run = commit_phase(geometry, params, seed, prover_alpha=1)
    return reveal_phase(run.rho, RevealRequest(1, run.opening), geometry, params).accepted


def intercept_resend_commit_trial(seed):
    geometry = default_committable_set()
    params = CommitParams(n=4, r=1, kappa=8, lam=8)
    run = commit_phase(geometry, params, seed, prover=commit_coalition_factory(
        InterceptResendSpoofer, straddle_positions(geometry, 1), 1))
    return reveal_phase(run.rho, RevealRequest(1, run.opening), geometry, params).accepted


STRATEGIES = {
    "classical-copy": classical_copy_trial,
    "classical-copy-wide": classical_copy_wide_trial,
    "single-spoofer": single_spoofer_trial,
    "intercept-resend": intercept_resend_trial,
    "intercept-resend-r20": intercept_resend_r20_trial,
    "epr-plain-bb84": epr_plain_trial,
    "epr-inner-product": epr_inner_product_trial,
    "epr-no-entanglement": epr_no_entanglement_trial,
    "denial-privacy": denial_privacy_trial,
    "honest-commit": honest_commit_trial,
    "intercept-resend-commit": intercept_resend_commit_trial,
}


def run_attack(name, trials, seed=0, jobs=1):
    """Run a registered attack; trials are split across ``jobs`` processes.

    Per-trial seeds come from the base seed alone, so the result does not
    depend on ``jobs``.
    """

    try:
        trial = STRATEGIES[name]
    except KeyError:
        raise UnknownStrategyError(name) from None
    seeds = trial_seeds(seed, trials)
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(trial, seeds, chunksize=max(1, trials // (4 * jobs))))
    else:
        outcomes = [trial(s) for s in seeds]
    report = AttackReport(name, trials, sum(bool(o) for o in outcomes))
    logger.info("attack %s: %d/%d", name, report.successes, trials)
    return report


def causality_clean(sim):
    """No delivery in the run violates the travel-time rule."""

    return not audit_causality(sim.log, sim.positions())
