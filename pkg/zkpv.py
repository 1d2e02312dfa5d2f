"""Zero-knowledge position verification.

The verifiers run the commit phase, hand the commitment state rho to the
prover, and both compile the statement "rho opens to a transcript whose
accepting set is a single point of R" into a circuit. The prover then proves
in zero knowledge that it knows the opening (sk, r).
"""

import itertools
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from circuits import CircuitBuilder, ZERO, circuit_eval, com_circuit, frame_circuit
from commit import (
    CommitParams, cipher_index, commit_phase, hiding_simulator,
    simulated_state, view_at,
)
from crypto import bytes_to_bits, com_setup, int_to_bits
from pv import FBB84, SharedRandomness, response_label
from stats import CheckResult, bonferroni, frequency_test, homogeneity_test, runs_test
from toycipher import prg_table
from zk import (
    CheatingProver, ZkProver, draw_challenges, soundness_experiment, zk_setup,
    zk_simulate, zk_verify,
)

logger = logging.getLogger(__name__)

DEFAULT_REPS = 40
MIN_SAMPLES = 100
ZK_VERIFIER_DOMAIN = 30
ZK_PROVER_DOMAIN = 31


class InsufficientSamplesError(ValueError):
    """Too few views for the distinguisher battery."""


@dataclass
class RevealStatement:
    """A compiled Reveal_R statement and the public constants baked into it."""

    R: frozenset
    circuit: object
    timing_ok: dict
    expected: dict
    kappa: int
    r_bits: int
    builder: CircuitBuilder = field(repr=False, default=None)
    outputs: dict = field(repr=False, default_factory=dict)

    @property
    def digest(self):
        return self.circuit.digest()

    def accepting_wires(self, witness):
        """Per-point w_alpha values for a witness."""

        alphas = sorted(self.outputs)
        values = self.builder.evaluate(witness, [self.outputs[a] for a in alphas])
        return dict(zip(alphas, values))


def compile_reveal_circuit(rho, R, geometry, params=CommitParams()):
    """Compile Reveal_R for rho into a circuit over the witness sk || r."""

    R = frozenset(R)
    if not R or any(not 0 <= a < len(geometry) for a in R):
        raise ValueError("R must be a nonempty subset of S")
    builder = CircuitBuilder()
    sk = builder.inputs(params.kappa)
    r = builder.inputs(params.lam * params.kappa)

    c_bits = 3 * params.lam * params.kappa
    if len(rho.c) == c_bits and rho.pp.lam == params.lam:
        committed = builder.equal(com_circuit(builder, rho.pp, sk, r), builder.consts(rho.c))
    else:
        committed = ZERO

    first = rho.first_entries()
    shared = SharedRandomness(rho.s)
    protocol = FBB84(params.n)
    timing_ok, expected, outputs = {}, {}, {}
    frame_bits = 1 + params.payload_bits
    for alpha in range(len(geometry)):
        checks = []
        ok = True
        bits = []
        for rnd in range(params.r):
            xs, b = shared.round_values(alpha, rnd, geometry.k, params.n)
            bits.append(protocol.expected_answer(xs, b))
            for i in range(geometry.k):
                entry = first.get((i, response_label(alpha, rnd)))
                if (
                    entry is None or len(entry.payload) * 8 < frame_bits
                    or entry.timestamp != geometry.expected_arrival(alpha, i)
                ):
                    ok = False
                    continue
                body = bytes_to_bits(entry.payload, frame_bits)
                index = cipher_index(alpha, i, rnd, geometry.k, params.r)
                frame = frame_circuit(builder, sk, index, body)
                want = builder.consts(int_to_bits(bits[-1], params.payload_bits))
                checks.append(frame[0])
                checks.append(builder.equal(frame[1:], want))
        timing_ok[alpha] = ok
        expected[alpha] = tuple(bits)
        outputs[alpha] = builder.all_of(checks) if ok else ZERO

    w = [outputs[a] for a in range(len(geometry))]
    selected = builder.any_of([outputs[a] for a in sorted(R)])
    out = builder.all_of([committed, builder.exactly_one(w), selected])
    circuit = builder.build(out)
    logger.debug("reveal circuit for |S|=%d: %s", len(geometry), circuit.stats())
    return RevealStatement(R, circuit, timing_ok, expected, params.kappa,
                           params.lam * params.kappa, builder, outputs)


def witness_bits(opening):
    return tuple(opening.sk.bits) + tuple(opening.r)


@dataclass
class ZkpvVerdict:
    accepted: bool
    reason: str
    proof: object = None
    challenges: tuple = ()
    statement_digest: str = ""
    commit_run: object = field(default=None, repr=False)

    @property
    def log(self):
        return self.commit_run.log if self.commit_run else []

    def to_dict(self):
        return {
            "accepted": self.accepted,
            "reason": self.reason,
            "reps": len(self.challenges),
            "statement_digest": self.statement_digest,
            "events": len(self.log),
        }


def _rng(seed, domain):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(domain,)))


def zk_position_verify(geometry, R, alpha=None, params=CommitParams(), reps=DEFAULT_REPS,
                       seed=0, strategy="cheat", suppress=frozenset()):
    """Commit, hand rho to the prover, and verify its proof of Reveal_R.

    ``strategy`` governs a prover holding no satisfying witness: "cheat" runs
    the canonical cheating prover, "honest" aborts. An absent prover
    (alpha None) never answers. Verifiers withhold the challenges of every
    point in ``suppress``.
    """

    run = commit_phase(geometry, params, seed, prover_alpha=alpha, suppress=suppress)
    statement = compile_reveal_circuit(run.rho, R, geometry, params)
    if run.opening is None:
        return ZkpvVerdict(False, "no prover answered", statement_digest=statement.digest,
                           commit_run=run)

    # the prover compiles its own copy of the statement from rho
    prover_statement = compile_reveal_circuit(run.rho, R, geometry, params)
    if prover_statement.digest != statement.digest:
        return ZkpvVerdict(False, "statement mismatch", statement_digest=statement.digest,
                           commit_run=run)

    verifier_rng = _rng(seed, ZK_VERIFIER_DOMAIN)
    prover_rng = _rng(seed, ZK_PROVER_DOMAIN)
    pp = zk_setup(verifier_rng)
    witness = witness_bits(run.opening)
    circuit = prover_statement.circuit
    if circuit_eval(circuit, witness):
        prover = ZkProver(circuit, witness, reps, prover_rng, pp)
    elif strategy == "cheat":
        prover = CheatingProver(circuit, witness, reps, prover_rng, pp)
    else:
        return ZkpvVerdict(False, "prover has no witness", statement_digest=statement.digest,
                           commit_run=run)

    prover.commit()
    challenges = draw_challenges(verifier_rng, reps)
    proof = prover.respond(challenges)
    accepted = zk_verify(statement.circuit, proof, challenges, pp)
    logger.info("ZK position verification over R=%s: %s", sorted(R), "accept" if accepted else "reject")
    return ZkpvVerdict(accepted, "" if accepted else "proof rejected", proof, challenges,
                       statement.digest, run)


def zkpv_soundness(geometry, R, alpha, params=CommitParams(), reps=8, commits=100,
                   challenges_per_commit=10, seed=0):
    """(accepted, total) for the canonical cheat from a point outside R."""

    run = commit_phase(geometry, params, seed, prover_alpha=alpha)
    statement = compile_reveal_circuit(run.rho, R, geometry, params)
    rng = _rng(seed, ZK_PROVER_DOMAIN)
    pp = zk_setup(_rng(seed, ZK_VERIFIER_DOMAIN))
    return soundness_experiment(statement.circuit, witness_bits(run.opening), reps, commits,
                                challenges_per_commit, rng, pp)


@dataclass(frozen=True)
class ZkpvView:
    """Verifier view of the composed protocol at time tau."""

    view: object
    proof: object = None
    challenges: tuple = ()

    @property
    def simulator_seed(self):
        return self.view.simulator_seed

    def shape(self):
        shape = self.view.shape()
        if self.proof is None:
            return shape
        return shape + (("proof", self.proof.reps, len(self.proof.to_bytes())),)

    def ciphertext_bytes(self):
        data = self.view.ciphertext_bytes()
        if self.proof is None:
            return data
        return data + b"".join(
            _bits_bytes(commitment) for rep in self.proof.repetitions for commitment in rep.commitments
        )


def _bits_bytes(bits):
    bits = np.asarray(bits, dtype=np.uint8)
    return np.packbits(bits).tobytes()


def zkpv_real_view(verdict, tau):
    rho = verdict.commit_run.rho
    if tau <= verdict.commit_run.geometry.t_final or verdict.proof is None:
        return ZkpvView(view_at(rho, tau))
    return ZkpvView(view_at(rho, tau), verdict.proof, tuple(verdict.challenges))


def zkpv_simulator(geometry, R, tau, rng, params=CommitParams(), reps=DEFAULT_REPS):
    """Simulated view at tau, produced without the prover's point or key."""

    pp = com_setup(params.lam, params.kappa, rng)
    if tau <= geometry.t_final:
        return ZkpvView(hiding_simulator(pp, geometry, params, tau, rng))
    state, sim_seed = simulated_state(pp, geometry, params, rng)
    statement = compile_reveal_circuit(state, R, geometry, params)
    zk_pp = zk_setup(rng)
    challenges = draw_challenges(rng, reps)
    proof = zk_simulate(statement.circuit, reps, challenges, rng, zk_pp)
    return ZkpvView(replace(view_at(state, tau), simulator_seed=sim_seed), proof, challenges)


@dataclass
class DistinguisherReport:
    results: list
    alpha: float
    simulator_seeds: tuple = ()

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "verdict": "PASS" if self.passed else "FAIL",
            "tests": [r.to_dict() for r in self.results],
            "simulator_seeds": list(self.simulator_seeds),
        }


def _bits_of(views):
    data = b"".join(view.ciphertext_bytes() for view in views)
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def _pair_checks(tag, first, second, names):
    """Structure, per-side frequency and runs, and homogeneity for two view groups."""

    shapes = {view.shape() for view in list(first) + list(second)}
    structure = CheckResult(f"structure[{tag}]", 1.0 if len(shapes) == 1 else 0.0)
    statistical = []
    sides = []
    for name, views in zip(names, (first, second)):
        bits = _bits_of(views)
        if bits.size < 2:
            raise InsufficientSamplesError(f"{name} views carry no ciphertext bits")
        statistical.append(CheckResult(f"frequency[{name}]", frequency_test(bits)))
        statistical.append(CheckResult(f"runs[{name}]", runs_test(bits)))
        sides.append(bits)
    statistical.append(CheckResult(
        f"homogeneity[{tag}]",
        homogeneity_test(int(sides[0].sum()), sides[0].size, int(sides[1].sum()), sides[1].size),
    ))
    return structure, statistical


def distinguisher_suite(real_views, sim_views, alpha=0.01, cross_alpha=None):
    """Structural equality plus bit statistics on ciphertext bodies.

    ``cross_alpha`` is an optional pair of real view groups taken at two
    different prover points; they get the same battery against each other.
    All p-values share one Bonferroni family.
    """

    groups = [("real", real_views), ("sim", sim_views)]
    if cross_alpha is not None:
        groups += [("alpha1", cross_alpha[0]), ("alpha2", cross_alpha[1])]
    for name, views in groups:
        if len(views) < MIN_SAMPLES:
            raise InsufficientSamplesError(f"need {MIN_SAMPLES} {name} views, got {len(views)}")

    structure, statistical = _pair_checks("sim", real_views, sim_views, ("real", "sim"))
    structures = [structure]
    if cross_alpha is not None:
        structure, more = _pair_checks("cross", *cross_alpha, ("alpha1", "alpha2"))
        structures.append(structure)
        statistical += more
    structures = [CheckResult(s.name, s.p_value, s.p_value == 1.0) for s in structures]
    seeds = tuple(view.simulator_seed for view in sim_views if view.simulator_seed is not None)
    report = DistinguisherReport(structures + bonferroni(statistical, alpha), alpha, seeds)
    logger.info("distinguisher suite: %s", "PASS" if report.passed else "FAIL")
    return report


def satisfying_witnesses(statement, rho, params):
    """Every witness satisfying the statement, for toy parameters.

    The commitment fixes each (sk_i, r_i) pair independently, so the search
    enumerates 2**lambda seeds per committed bit and then tries every
    combination of the per-bit candidates against the circuit.
    """

    lam = params.lam
    if lam > 20:
        raise ValueError("per-bit witness search is limited to lambda <= 20")
    if len(rho.c) != 3 * lam * params.kappa:
        return []
    table = prg_table(lam, 3 * lam)
    per_bit = []
    for i in range(params.kappa):
        target = np.array(rho.c[i * 3 * lam:(i + 1) * 3 * lam], dtype=np.uint8)
        block = np.array(rho.pp.block(i), dtype=np.uint8)
        candidates = []
        for bit, pad in ((0, 0), (1, block)):
            for seed in np.flatnonzero(np.all(table ^ pad == target, axis=1)):
                candidates.append((bit, int_to_bits(int(seed), lam)))
        if not candidates:
            return []
        per_bit.append(candidates)

    found = []
    for choice in itertools.product(*per_bit):
        sk = tuple(bit for bit, _ in choice)
        r = tuple(b for _, seed in choice for b in seed)
        if circuit_eval(statement.circuit, sk + r):
            found.append(sk + r)
    return found
