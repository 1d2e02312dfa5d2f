"""Honest-verifier zero-knowledge proofs of circuit satisfiability.

MPC-in-the-head with three parties holding XOR shares. XOR and NOT gates are
local (NOT flips party 0's share); an AND gate uses the (2,3)-decomposition

    z_i = x_i y_i ^ x_{i+1} y_i ^ x_i y_{i+1} ^ R_i ^ R_{i+1}

where R_i is party i's tape bit for the gate. The prover commits to each
party's view with the Naor commitment over a hash of the view, the verifier's
challenge e opens parties e and e+1.

All repetitions run at once: a wire value is one Python int of 3*reps bits,
bit ``party * reps + rep`` holding that party's share in that repetition.
"""

import hashlib
import logging
from dataclasses import dataclass

import numpy as np

from circuits import AND, NOT, XOR, circuit_eval
from crypto import DEFAULT_LAMBDA, bits_to_bytes, bytes_to_bits, com, com_setup, random_bits
from records import MalformedRecordError, RecordReader, RecordWriter

logger = logging.getLogger(__name__)

PARTIES = 3
SEED_BYTES = 16
DIGEST_BITS = 64
PROOF_MAGIC = b"ZKPF"
PROOF_VERSION = 1


def zk_setup(rng, lam=DEFAULT_LAMBDA, digest_bits=DIGEST_BITS):
    """Verifier-chosen public parameters for the view commitments."""

    return com_setup(lam, digest_bits, rng)


def draw_challenges(rng, reps):
    return tuple(int(e) for e in rng.integers(0, PARTIES, size=reps))


@dataclass(frozen=True)
class OpenedView:
    """One opened party. ``and_outputs`` is empty for the recomputed party."""

    party: int
    seed: bytes
    input_share: bytes
    and_outputs: bytes
    com_randomness: tuple


@dataclass(frozen=True)
class ZkRepetition:
    commitments: tuple
    output_shares: tuple
    challenge: int
    opened: tuple


@dataclass
class ZkProof:
    circuit_digest: str
    repetitions: list

    @property
    def reps(self):
        return len(self.repetitions)

    def to_bytes(self):
        out = RecordWriter()
        out.raw(PROOF_MAGIC)
        out.u16(PROOF_VERSION)
        out.raw(bytes.fromhex(self.circuit_digest))
        out.u32(len(self.repetitions))
        for rep in self.repetitions:
            body = RecordWriter()
            body.u8(rep.challenge)
            body.u8(sum(bit << i for i, bit in enumerate(rep.output_shares)))
            for commitment in rep.commitments:
                body.bits(commitment)
            for view in rep.opened:
                body.u8(view.party)
                body.blob(view.seed)
                body.blob(view.input_share)
                body.blob(view.and_outputs)
                body.bits(view.com_randomness)
            out.blob(body.getvalue())
        return out.getvalue()

    @classmethod
    def from_bytes(cls, data):
        reader = RecordReader(data)
        reader.expect(PROOF_MAGIC)
        if reader.u16() != PROOF_VERSION:
            raise MalformedRecordError("unsupported proof version")
        digest = reader.raw(32).hex()
        repetitions = []
        for _ in range(reader.u32()):
            body = RecordReader(reader.blob())
            challenge = body.u8()
            packed = body.u8()
            shares = tuple((packed >> i) & 1 for i in range(PARTIES))
            commitments = tuple(body.bits() for _ in range(PARTIES))
            opened = []
            for _ in range(2):
                opened.append(OpenedView(body.u8(), body.blob(), body.blob(), body.blob(), body.bits()))
            body.done()
            repetitions.append(ZkRepetition(commitments, shares, challenge, tuple(opened)))
        reader.done()
        return cls(digest, repetitions)


def _pack_rows(bits):
    """Rows of a 0/1 matrix as little-endian ints (column c is bit c)."""

    rows = bits.shape[0]
    if rows == 0:
        return []
    packed = np.packbits(np.ascontiguousarray(bits, dtype=np.uint8), axis=1, bitorder="little")
    width = packed.shape[1]
    raw = packed.tobytes()
    return [int.from_bytes(raw[i * width:(i + 1) * width], "little") for i in range(rows)]


def _unpack_rows(values, width):
    nbytes = (width + 7) // 8
    if not values:
        return np.zeros((0, width), dtype=np.uint8)
    raw = b"".join(v.to_bytes(nbytes, "little") for v in values)
    table = np.frombuffer(raw, dtype=np.uint8).reshape(len(values), nbytes)
    return np.unpackbits(table, axis=1, bitorder="little")[:, :width]


def _tape(seed, n_and):
    stream = hashlib.shake_256(b"tape" + seed).digest((n_and + 7) // 8)
    return np.unpackbits(np.frombuffer(stream, dtype=np.uint8))[:n_and]


def _column_bytes(column):
    return np.packbits(column).tobytes()


def _bits_from_bytes(data, n):
    if len(data) != (n + 7) // 8:
        raise MalformedRecordError("view field has the wrong length")
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))[:n]


def _view_digest(party, seed, input_share, and_outputs, digest_bits):
    h = hashlib.sha256()
    h.update(bytes([party]))
    h.update(seed)
    h.update(len(input_share).to_bytes(4, "big"))
    h.update(input_share)
    h.update(and_outputs)
    return bytes_to_bits(h.digest(), digest_bits)


def _evaluate(circuit, reps, inputs, tapes, recompute=None, given=None):
    """Run all parties over all repetitions.

    With ``recompute`` set, AND outputs keep only the recomputed bits and take
    the remaining opened party's bits from ``given``.
    """

    low = (1 << reps) - 1
    double = 2 * reps
    values = list(inputs)
    append = values.append
    ands = []
    t = 0
    for op, a, b in circuit.gates:
        if op == XOR:
            append(values[a] ^ values[b])
        elif op == AND:
            x, y, r = values[a], values[b], tapes[t]
            x_next = (x >> reps) | ((x & low) << double)
            y_next = (y >> reps) | ((y & low) << double)
            r_next = (r >> reps) | ((r & low) << double)
            z = (x & y) ^ (x_next & y) ^ (x & y_next) ^ r ^ r_next
            if recompute is not None:
                z = (z & recompute) | given[t]
            append(z)
            ands.append(z)
            t += 1
        elif op == NOT:
            append(values[a] ^ low)
        else:
            append(low if a else 0)
    return values, ands


def _output_index(circuit):
    """Position of the output gate among AND gates, or None."""

    gate = circuit.output - circuit.n_inputs
    if gate < 0 or circuit.gates[gate][0] != AND:
        return None
    return sum(1 for op, _, _ in circuit.gates[:gate] if op == AND)


class ZkProver:
    """Commit-then-respond prover for one circuit and witness."""

    def __init__(self, circuit, witness, reps, rng, pp, digest_bits=DIGEST_BITS, check=True):
        if reps < 1:
            raise ValueError("at least one repetition is required")
        if check and circuit_eval(circuit, witness) != 1:
            raise ValueError("witness does not satisfy the circuit")
        self.circuit = circuit
        self.witness = tuple(witness)
        self.reps = reps
        self.rng = rng
        self.pp = pp
        self.digest_bits = digest_bits
        self._run()

    def _corrupt(self, values, ands):
        """Hook for cheating strategies; honest provers change nothing."""

    def _run(self):
        circuit, reps, rng = self.circuit, self.reps, self.rng
        n, n_and = circuit.n_inputs, circuit.n_and
        width = PARTIES * reps

        self.seeds = [[rng.bytes(SEED_BYTES) for _ in range(reps)] for _ in range(PARTIES)]
        w = np.array(self.witness, dtype=np.uint8).reshape(n, 1)
        s0 = rng.integers(0, 2, size=(n, reps), dtype=np.uint8)
        s1 = rng.integers(0, 2, size=(n, reps), dtype=np.uint8)
        input_bits = np.concatenate([s0, s1, s0 ^ s1 ^ w], axis=1)
        tape_bits = np.zeros((n_and, width), dtype=np.uint8)
        for p in range(PARTIES):
            for j in range(reps):
                tape_bits[:, p * reps + j] = _tape(self.seeds[p][j], n_and)

        values, ands = _evaluate(circuit, reps, _pack_rows(input_bits), _pack_rows(tape_bits))
        self._corrupt(values, ands)
        out = values[circuit.output]
        and_bits = _unpack_rows(ands, width)

        self.inputs = {}
        self.views = {}
        self.randomness = {}
        self.commitments = []
        self.output_shares = []
        lam = self.pp.lam
        for j in range(reps):
            row = []
            for p in range(PARTIES):
                col = p * reps + j
                share = _column_bytes(input_bits[:, col])
                view = _column_bytes(and_bits[:, col])
                r = random_bits(rng, lam * self.digest_bits)
                digest = _view_digest(p, self.seeds[p][j], share, view, self.digest_bits)
                self.inputs[p, j] = share
                self.views[p, j] = view
                self.randomness[p, j] = r
                row.append(com(self.pp, digest, r))
            self.commitments.append(tuple(row))
            self.output_shares.append(tuple((out >> (p * reps + j)) & 1 for p in range(PARTIES)))

    def commit(self):
        return list(zip(self.commitments, self.output_shares))

    def respond(self, challenges):
        if len(challenges) != self.reps:
            raise ValueError("one challenge per repetition")
        repetitions = []
        for j, e in enumerate(challenges):
            first, second = e % PARTIES, (e + 1) % PARTIES
            opened = (
                OpenedView(first, self.seeds[first][j], self.inputs[first, j], b"",
                           self.randomness[first, j]),
                OpenedView(second, self.seeds[second][j], self.inputs[second, j],
                           self.views[second, j], self.randomness[second, j]),
            )
            repetitions.append(ZkRepetition(self.commitments[j], self.output_shares[j], e, opened))
        return ZkProof(self.circuit.digest(), repetitions)


class CheatingProver(ZkProver):
    """Canonical cheat for a witness that evaluates to 0.

    In each repetition one party c_j is corrupted: its share of the output
    AND gate is flipped, so the shares reconstruct 1. The repetition survives
    unless the challenge recomputes c_j, which happens with probability 1/3.
    When the output is not an AND gate only c_j's published output share is
    flipped and survival drops to 1/3.
    """

    def __init__(self, circuit, witness, reps, rng, pp, digest_bits=DIGEST_BITS):
        self.corrupted = tuple(int(c) for c in rng.integers(0, PARTIES, size=reps))
        super().__init__(circuit, witness, reps, rng, pp, digest_bits, check=False)

    def _corrupt(self, values, ands):
        reps = self.reps
        flip = sum(1 << (c * reps + j) for j, c in enumerate(self.corrupted))
        if circuit_eval(self.circuit, self.witness):
            return
        index = _output_index(self.circuit)
        if index is not None:
            ands[index] ^= flip
        values[self.circuit.output] ^= flip


def zk_prove(circuit, witness, reps, rng, pp, challenges, digest_bits=DIGEST_BITS):
    """Honest proof answering the given challenges."""

    return ZkProver(circuit, witness, reps, rng, pp, digest_bits).respond(challenges)


def _replay(circuit, reps, challenges, first_views, second_views):
    """Recompute the first opened party of every repetition.

    Views are (seed, input-share bits, and-output bits) triples; the and-output
    bits of first views are ignored. Returns the packed output wire and the
    recomputed and-output column of each first party.
    """

    n, n_and = circuit.n_inputs, circuit.n_and
    width = PARTIES * reps
    input_bits = np.zeros((n, width), dtype=np.uint8)
    tape_bits = np.zeros((n_and, width), dtype=np.uint8)
    given_bits = np.zeros((n_and, width), dtype=np.uint8)
    recompute = 0
    for j, e in enumerate(challenges):
        first, second = e * reps + j, ((e + 1) % PARTIES) * reps + j
        seed, share, _ = first_views[j]
        input_bits[:, first] = share
        tape_bits[:, first] = _tape(seed, n_and)
        seed, share, view = second_views[j]
        input_bits[:, second] = share
        tape_bits[:, second] = _tape(seed, n_and)
        given_bits[:, second] = view
        recompute |= 1 << first

    values, ands = _evaluate(
        circuit, reps, _pack_rows(input_bits), _pack_rows(tape_bits),
        recompute=recompute, given=_pack_rows(given_bits),
    )
    and_bits = _unpack_rows(ands, width)
    recomputed = [_column_bytes(and_bits[:, e * reps + j]) for j, e in enumerate(challenges)]
    return values[circuit.output], recomputed


def _check_repetitions(circuit, proof, challenges, pp, digest_bits):
    reps = len(challenges)
    if proof.circuit_digest != circuit.digest() or proof.reps != reps or reps < 1:
        return [False] * max(reps, 1)
    n, n_and = circuit.n_inputs, circuit.n_and
    firsts, seconds = [], []
    for j, (rep, e) in enumerate(zip(proof.repetitions, challenges)):
        first, second = rep.opened
        if rep.challenge != e or first.party != e or second.party != (e + 1) % PARTIES:
            raise MalformedRecordError(f"repetition {j} opens the wrong parties")
        firsts.append((first.seed, _bits_from_bytes(first.input_share, n), None))
        seconds.append((
            second.seed,
            _bits_from_bytes(second.input_share, n),
            _bits_from_bytes(second.and_outputs, n_and),
        ))

    out, recomputed = _replay(circuit, reps, challenges, firsts, seconds)
    results = []
    for j, (rep, e) in enumerate(zip(proof.repetitions, challenges)):
        first, second = rep.opened
        ok = len(rep.commitments) == PARTIES and len(rep.output_shares) == PARTIES
        ok = ok and rep.output_shares[0] ^ rep.output_shares[1] ^ rep.output_shares[2] == 1
        for view in (first, second):
            ok = ok and rep.output_shares[view.party] == (out >> (view.party * reps + j)) & 1
        digest = _view_digest(first.party, first.seed, first.input_share, recomputed[j], digest_bits)
        ok = ok and com(pp, digest, first.com_randomness) == rep.commitments[first.party]
        digest = _view_digest(second.party, second.seed, second.input_share, second.and_outputs, digest_bits)
        ok = ok and com(pp, digest, second.com_randomness) == rep.commitments[second.party]
        results.append(bool(ok))
    return results


def zk_verify(circuit, proof, challenges, pp, digest_bits=DIGEST_BITS):
    """True iff every repetition verifies. Malformed proofs are rejected."""

    try:
        results = _check_repetitions(circuit, proof, tuple(challenges), pp, digest_bits)
    except (ValueError, IndexError, TypeError, AttributeError) as exc:
        logger.info("rejecting malformed proof: %s", exc)
        return False
    return all(results)


def zk_simulate(circuit, reps, challenges, rng, pp, digest_bits=DIGEST_BITS):
    """Proof transcript for the given challenges, produced without a witness."""

    n, n_and = circuit.n_inputs, circuit.n_and
    firsts, seconds = [], []
    for _ in range(reps):
        firsts.append((rng.bytes(SEED_BYTES), rng.integers(0, 2, size=n, dtype=np.uint8), None))
        seconds.append((
            rng.bytes(SEED_BYTES),
            rng.integers(0, 2, size=n, dtype=np.uint8),
            rng.integers(0, 2, size=n_and, dtype=np.uint8),
        ))
    out, recomputed = _replay(circuit, reps, challenges, firsts, seconds)

    lam = pp.lam
    repetitions = []
    for j, e in enumerate(challenges):
        first, second = e, (e + 1) % PARTIES
        shares = [0, 0, 0]
        shares[first] = (out >> (first * reps + j)) & 1
        shares[second] = (out >> (second * reps + j)) & 1
        shares[(e + 2) % PARTIES] = 1 ^ shares[first] ^ shares[second]

        commitments = [None] * PARTIES
        opened = []
        for party, (seed, share, _), view in (
            (first, firsts[j], recomputed[j]),
            (second, seconds[j], _column_bytes(seconds[j][2])),
        ):
            share_bytes = _column_bytes(share)
            r = random_bits(rng, lam * digest_bits)
            digest = _view_digest(party, seed, share_bytes, view, digest_bits)
            commitments[party] = com(pp, digest, r)
            opened.append(OpenedView(party, seed, share_bytes, b"" if party == first else view, r))
        dummy = random_bits(rng, digest_bits)
        commitments[(e + 2) % PARTIES] = com(pp, dummy, random_bits(rng, lam * digest_bits))
        repetitions.append(ZkRepetition(tuple(commitments), tuple(shares), e, tuple(opened)))
    return ZkProof(circuit.digest(), repetitions)


def soundness_experiment(circuit, witness, reps, commits, challenges_per_commit, rng, pp,
                         digest_bits=DIGEST_BITS):
    """Acceptances of the canonical cheat over commits * challenges_per_commit trials.

    Repetitions verify independently, so each cheating commitment is checked
    once per challenge value and every drawn challenge vector is scored from
    that table.
    """

    accepted = 0
    for _ in range(commits):
        cheater = CheatingProver(circuit, witness, reps, rng, pp, digest_bits)
        table = [
            _check_repetitions(circuit, cheater.respond((e,) * reps), (e,) * reps, pp, digest_bits)
            for e in range(PARTIES)
        ]
        draws = rng.integers(0, PARTIES, size=(challenges_per_commit, reps))
        ok = np.array(table, dtype=bool)
        accepted += int(np.sum(np.all(ok[draws, np.arange(reps)], axis=1)))
    total = commits * challenges_per_commit
    logger.info("canonical cheat accepted %d of %d", accepted, total)
    return accepted, total
