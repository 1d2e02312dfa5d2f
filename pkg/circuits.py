"""Boolean circuits over {XOR, AND, NOT, CONST} and compilers for the primitives.

A circuit's wires are numbered: the first ``n_inputs`` wires are the witness,
wire ``n_inputs + g`` is the output of gate ``g``. Gates are ``(op, a, b)``
tuples in topological order; CONST gates keep their bit in ``a``.

Public values are folded into the circuit while it is built, so a statement
about known pp, commitments and ciphertexts only pays AND gates for the
witness-dependent part.
"""

import hashlib
import logging
from dataclasses import dataclass, field

import numpy as np

from crypto import int_to_bits
from toycipher import BLOCK_BITS, ROUNDS

logger = logging.getLogger(__name__)

XOR, AND, NOT, CONST = range(4)
OP_NAMES = {XOR: "XOR", AND: "AND", NOT: "NOT", CONST: "CONST"}

# builder constants, never real wire numbers
ZERO, ONE = -1, -2


class WitnessLengthError(ValueError):
    """Witness does not match the circuit's input count."""


def _run(n_inputs, gates, witness):
    if len(witness) != n_inputs:
        raise WitnessLengthError(f"circuit takes {n_inputs} input bits, got {len(witness)}")
    values = list(witness)
    append = values.append
    for op, a, b in gates:
        if op == XOR:
            append(values[a] ^ values[b])
        elif op == AND:
            append(values[a] & values[b])
        elif op == NOT:
            append(values[a] ^ 1)
        else:
            append(a)
    return values


@dataclass
class Circuit:
    n_inputs: int
    gates: list
    output: int
    _digest: str = field(default=None, repr=False, compare=False)

    @property
    def n_and(self):
        return sum(1 for op, _, _ in self.gates if op == AND)

    def stats(self):
        counts = {name: 0 for name in OP_NAMES.values()}
        for op, _, _ in self.gates:
            counts[OP_NAMES[op]] += 1
        counts["inputs"] = self.n_inputs
        counts["wires"] = self.n_inputs + len(self.gates)
        return counts

    def digest(self):
        """SHA-256 hex digest of the circuit structure."""

        if self._digest is None:
            table = np.array(self.gates, dtype=np.int64).reshape(-1, 3)
            h = hashlib.sha256()
            h.update(f"{self.n_inputs}:{self.output}:".encode())
            h.update(table.tobytes())
            self._digest = h.hexdigest()
        return self._digest


def circuit_eval(circuit, witness):
    """Plain evaluation; returns the output bit."""

    return _run(circuit.n_inputs, circuit.gates, witness)[circuit.output]


class CircuitBuilder:
    """Builds a circuit gate by gate, folding constants as it goes."""

    def __init__(self):
        self.n_inputs = 0
        self.gates = []
        self._negation_of = {}

    def inputs(self, n):
        if self.gates:
            raise RuntimeError("declare all inputs before adding gates")
        first = self.n_inputs
        self.n_inputs += n
        return list(range(first, first + n))

    def _gate(self, op, a, b=0):
        self.gates.append((op, a, b))
        return self.n_inputs + len(self.gates) - 1

    @staticmethod
    def const(bit):
        return ONE if bit else ZERO

    def consts(self, bits):
        return [ONE if bit else ZERO for bit in bits]

    def word(self, value, n=32):
        return self.consts(int_to_bits(value, n))

    def not_(self, a):
        if a == ZERO:
            return ONE
        if a == ONE:
            return ZERO
        if a in self._negation_of:
            return self._negation_of[a]
        out = self._gate(NOT, a)
        self._negation_of[out] = a
        return out

    def xor(self, a, b):
        if a == ZERO:
            return b
        if b == ZERO:
            return a
        if a == b:
            return ZERO
        if a == ONE:
            return self.not_(b)
        if b == ONE:
            return self.not_(a)
        return self._gate(XOR, a, b)

    def and_(self, a, b):
        if a == ZERO or b == ZERO:
            return ZERO
        if a == ONE:
            return b
        if b == ONE or a == b:
            return a
        return self._gate(AND, a, b)

    def or_(self, a, b):
        return self.xor(self.xor(a, b), self.and_(a, b))

    def xnor(self, a, b):
        return self.not_(self.xor(a, b))

    def all_of(self, wires):
        wires = [w for w in wires if w != ONE]
        if ZERO in wires:
            return ZERO
        if not wires:
            return ONE
        while len(wires) > 1:
            paired = [self.and_(wires[i], wires[i + 1]) for i in range(0, len(wires) - 1, 2)]
            if len(wires) % 2:
                paired.append(wires[-1])
            wires = paired
        return wires[0]

    def any_of(self, wires):
        return self.not_(self.all_of([self.not_(w) for w in wires]))

    def equal(self, left, right):
        if len(left) != len(right):
            raise ValueError("cannot compare words of different widths")
        return self.all_of([self.xnor(a, b) for a, b in zip(left, right)])

    def exactly_one(self, wires):
        """1 iff exactly one wire is set (linear prefix scan)."""

        seen, clash = ZERO, ZERO
        for w in wires:
            clash = self.or_(clash, self.and_(seen, w))
            seen = self.or_(seen, w)
        return self.and_(seen, self.not_(clash))

    def evaluate(self, witness, wires):
        """Values of arbitrary builder wires (constants included) for a witness."""

        values = _run(self.n_inputs, self.gates, witness)
        return [1 if w == ONE else 0 if w == ZERO else values[w] for w in wires]

    def build(self, output):
        if output in (ZERO, ONE):
            output = self._gate(CONST, 1 if output == ONE else 0)
        circuit = Circuit(self.n_inputs, list(self.gates), output)
        logger.debug("built circuit: %s", circuit.stats())
        return circuit


def _rotl(word, r):
    return word[r:] + word[:r]


def toy_cipher_circuit(builder, key, block):
    """ToyCipher on 128 key wires and 64 block wires, MSB first."""

    xor, and_ = builder.xor, builder.and_
    k = [key[32 * i:32 * (i + 1)] for i in range(4)]
    a, b = list(block[:32]), list(block[32:])
    for i in range(ROUNDS):
        r5, r1 = _rotl(a, 5), _rotl(a, 1)
        f = [xor(and_(x, y), z) for x, y, z in zip(a, r5, r1)]
        counter = builder.word(i)
        new = [
            xor(xor(xor(p, q), kw), c)
            for p, q, kw, c in zip(b, f, k[i & 3], counter)
        ]
        a, b = new, a
    return a + b


def toy_prg_circuit(builder, key, n_bits):
    out = []
    for j in range(-(-n_bits // BLOCK_BITS)):
        out.extend(toy_cipher_circuit(builder, key, builder.word(j, BLOCK_BITS)))
    return out[:n_bits]


def stretch_circuit(builder, seed, n_bits):
    key = [ZERO] * (128 - len(seed)) + list(seed)
    return toy_prg_circuit(builder, key, n_bits)


def com_circuit(builder, pp, message, randomness):
    """Naor commitment of message wires under public pp."""

    lam = pp.lam
    if len(randomness) != lam * len(message):
        raise ValueError("randomness must hold lambda wires per message bit")
    out = []
    for i, m in enumerate(message):
        g = stretch_circuit(builder, randomness[i * lam:(i + 1) * lam], 3 * lam)
        pad = builder.consts(pp.block(i))
        out.extend(builder.xor(gj, builder.and_(m, pj)) for gj, pj in zip(g, pad))
    return out


def frame_circuit(builder, sk, index, body):
    """Decrypted frame wires (validity first) for a public ciphertext body."""

    key = [ZERO] * (64 - len(sk)) + list(sk) + builder.consts(int_to_bits(index, 64))
    stream = toy_prg_circuit(builder, key, len(body))
    return [builder.xor(c, s) for c, s in zip(builder.consts(body), stream)]
