"""State-vector simulation of the few qubits the protocols exchange.

An arena holds independent tensor factors. Preparing a qubit or an EPR pair
creates a new factor; operations on qubits of different factors merge them
first. A factor never exceeds ``max_qubits`` qubits. Measured qubits are
removed from their factor and their handles become unusable; nothing copies a
live handle.
"""

import itertools
import logging
from typing import NamedTuple

import numpy as np

logger = logging.getLogger(__name__)

MAX_QUBITS = 8
NORM_TOLERANCE = 1e-9

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class QubitConsumedError(RuntimeError):
    """The handle was already measured (or never belonged to this arena)."""


class QuantumBudgetError(RuntimeError):
    """An operation would exceed the register budget."""


class QubitHandle(NamedTuple):
    id: int


class QState:
    """One tensor factor: amplitudes shaped (2,)*n in ``qubits`` order."""

    def __init__(self, amplitudes, qubits):
        self.amplitudes = amplitudes
        self.qubits = list(qubits)

    def __repr__(self):
        return f"<QState n={len(self.qubits)}>"

    def axis(self, handle):
        return self.qubits.index(handle.id)

    def norm(self):
        return float(np.sum(np.abs(self.amplitudes) ** 2))


class QArena:
    """All quantum registers of one simulation instance."""

    def __init__(self, rng=None, max_qubits=MAX_QUBITS, max_live=None):
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.max_qubits = max_qubits
        self.max_live = max_live
        self.epr_pairs = 0
        self._ids = itertools.count()
        self._factors = {}
        self._owner = {}

    def __repr__(self):
        return f"<QArena live={len(self._owner)} factors={len(self._factors)}>"

    @property
    def live_count(self):
        return len(self._owner)

    def is_live(self, q):
        return q.id in self._owner

    def _register(self, vector, n):
        if self.max_live is not None and len(self._owner) + n > self.max_live:
            raise QuantumBudgetError(f"arena limited to {self.max_live} live qubits")
        ids = [next(self._ids) for _ in range(n)]
        factor = ids[0]
        self._factors[factor] = QState(np.asarray(vector, dtype=complex).reshape((2,) * n), ids)
        for qid in ids:
            self._owner[qid] = factor
        return [QubitHandle(qid) for qid in ids]

    def _factor_of(self, q):
        try:
            factor = self._owner[q.id]
        except (KeyError, AttributeError):
            raise QubitConsumedError(f"qubit {q!r} is not live") from None
        return factor, self._factors[factor]

    def _join(self, q1, q2):
        f1, s1 = self._factor_of(q1)
        f2, s2 = self._factor_of(q2)
        if f1 == f2:
            return s1
        if len(s1.qubits) + len(s2.qubits) > self.max_qubits:
            raise QuantumBudgetError(f"entangled register would exceed {self.max_qubits} qubits")
        s1.amplitudes = np.multiply.outer(s1.amplitudes, s2.amplitudes)
        s1.qubits.extend(s2.qubits)
        for qid in s2.qubits:
            self._owner[qid] = f1
        del self._factors[f2]
        return s1

    def _apply(self, q, gate):
        _, state = self._factor_of(q)
        axis = state.axis(q)
        moved = np.tensordot(gate, state.amplitudes, axes=([1], [axis]))
        state.amplitudes = np.moveaxis(moved, 0, axis)
        self._check(state)

    def _cnot(self, control, target):
        state = self._join(control, target)
        c_axis, t_axis = state.axis(control), state.axis(target)
        amps = state.amplitudes.copy()
        index = [slice(None)] * amps.ndim
        index[c_axis] = 1
        sub = state.amplitudes[tuple(index)]
        amps[tuple(index)] = np.flip(sub, axis=t_axis - (t_axis > c_axis))
        state.amplitudes = amps

    def _check(self, state):
        if abs(state.norm() - 1.0) > NORM_TOLERANCE:
            raise ArithmeticError(f"state norm drifted to {state.norm()!r}")

    def prepare_bb84(self, b, theta):
        """Fresh qubit in H^theta |b>."""

        vector = np.zeros(2, dtype=complex)
        vector[b] = 1
        if theta:
            vector = _H @ vector
        (handle,) = self._register(vector, 1)
        return handle

    def make_epr(self):
        """Fresh pair in (|00> + |11>)/sqrt(2)."""

        vector = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        first, second = self._register(vector, 2)
        self.epr_pairs += 1
        return first, second

    def apply_pauli(self, q, x, z):
        """X^x then Z^z."""

        if x:
            self._apply(q, _X)
        if z:
            self._apply(q, _Z)
        if not (x or z):
            self._factor_of(q)

    def hadamard(self, q):
        self._apply(q, _H)

    def measure(self, q, basis, rng=None):
        """Projective measurement in the basis {H^basis|0>, H^basis|1>}.

        Consumes the handle.
        """

        rng = rng if rng is not None else self.rng
        if basis:
            self._apply(q, _H)
        factor, state = self._factor_of(q)
        axis = state.axis(q)
        zero = np.take(state.amplitudes, 0, axis=axis)
        p0 = min(max(float(np.sum(np.abs(zero) ** 2)), 0.0), 1.0)
        outcome = 0 if rng.random() < p0 else 1
        p = p0 if outcome == 0 else 1.0 - p0
        collapsed = np.take(state.amplitudes, outcome, axis=axis) / np.sqrt(p)

        del self._owner[q.id]
        state.qubits.remove(q.id)
        if state.qubits:
            state.amplitudes = collapsed
            self._check(state)
        else:
            del self._factors[factor]
        return outcome

    def bell_measure(self, q1, q2, rng=None):
        """Bell measurement returning the teleportation corrections (x, z).

        Applying X^x Z^z order-wise via :meth:`apply_pauli` to the partner of
        q2's EPR pair restores the state q1 carried.
        """

        self._cnot(q1, q2)
        self._apply(q1, _H)
        z = self.measure(q1, 0, rng)
        x = self.measure(q2, 0, rng)
        return x, z

    def state_of(self, q):
        """Flattened amplitudes of q's factor and the handle order of its axes."""

        _, state = self._factor_of(q)
        return state.amplitudes.reshape(-1).copy(), [QubitHandle(i) for i in state.qubits]
