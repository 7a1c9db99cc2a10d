"""Heisenberg-picture propagation for Clifford circuits.

Everything here works on raw symplectic triples (x, z, p) meaning
i^p * X^x * Z^z with integer bitmasks, which keeps 100-qubit propagation
cheap.  Three consumers build on the same kernel:

* exact ideal expectations of Clifford circuits (term back-propagation),
* exact noisy expectations of Clifford circuits under Pauli noise (the
  channel transfer matrix is diagonal on Pauli words, so each term picks up
  a scalar per channel),
* suffix conjugation maps, which record how a Pauli inserted mid-circuit
  looks at the end of the circuit (used by both the feature fast path and
  the shot sampler).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate, gate_conj_table, is_clifford
from .noise import NoisyCircuit
from .paulis import Observable, _mul_raw


class NonCliffordError(ValueError):
    pass


def conj_through_gate(x: int, z: int, p: int, gate: Gate, inverse: bool = False):
    """Image of i^p X^x Z^z under conjugation by the gate (or its inverse)."""
    qs = gate.qubits
    xs = zs = 0
    for i, q in enumerate(qs):
        xs |= ((x >> q) & 1) << i
        zs |= ((z >> q) & 1) << i
    if xs == 0 and zs == 0:
        return x, z, p
    xl, zl, pl = gate_conj_table(gate, inverse)[(xs, zs)]
    support = 0
    for q in qs:
        support |= 1 << q
    xg = zg = 0
    for i, q in enumerate(qs):
        xg |= ((xl >> i) & 1) << q
        zg |= ((zl >> i) & 1) << q
    return (x & ~support) | xg, (z & ~support) | zg, (p + pl) & 3


def backpropagate(circuit: Circuit, x: int, z: int, p: int):
    """Conjugate by the full circuit inverse: returns C^dag (i^p X^x Z^z) C."""
    for gate in reversed(circuit.gates):
        x, z, p = conj_through_gate(x, z, p, gate, inverse=True)
    return x, z, p


def _zero_state_value(x: int, p: int) -> float:
    """<0..0| i^p X^x Z^z |0..0>; nonzero only for Z-type words."""
    if x != 0:
        return 0.0
    if p & 1:
        raise ValueError("non-Hermitian Pauli reached expectation evaluation")
    return 1.0 if p == 0 else -1.0


def clifford_ideal_expectation(circuit: Circuit, obs: Observable) -> float:
    """Exact <0|C^dag O C|0> for a Clifford circuit via tableau back-propagation.

    Every Pauli term contributes -1, 0, or +1 times its coefficient.
    """
    if not is_clifford(circuit):
        raise NonCliffordError("circuit contains non-Clifford gates")
    total = 0.0
    for coef, pauli in obs.terms:
        x, z, p = backpropagate(circuit, *pauli.raw())
        total += coef * _zero_state_value(x, p)
    return total


def term_noise_sweep(noisy: NoisyCircuit, x: int, z: int, p: int):
    """Back-propagate one Pauli term through gates and Pauli channels.

    Returns (value_on_zero_state, channel_eigenvalues) where the noisy
    expectation contribution of the term is value * prod(eigenvalues).
    Channels acting trivially on the current word are skipped (eigenvalue 1).
    """
    lambdas: list[float] = []
    gates = noisy.circuit.gates
    channels = noisy.channels
    for i in reversed(range(len(gates))):
        channel = channels[i]
        if channel is not None:
            xs = zs = 0
            for j, q in enumerate(channel.qubits):
                xs |= ((x >> q) & 1) << j
                zs |= ((z >> q) & 1) << j
            if xs or zs:
                lambdas.append(channel.eigenvalue_at(xs, zs))
        x, z, p = conj_through_gate(x, z, p, gates[i], inverse=True)
    return _zero_state_value(x, p), np.asarray(lambdas)


def noisy_clifford_expectation(noisy: NoisyCircuit, obs: Observable) -> float:
    """Exact noisy expectation of a Clifford circuit under Pauli channels."""
    if not is_clifford(noisy.circuit):
        raise NonCliffordError("circuit contains non-Clifford gates")
    total = 0.0
    for coef, pauli in obs.terms:
        value, lambdas = term_noise_sweep(noisy, *pauli.raw())
        if value != 0.0:
            total += coef * value * float(np.prod(lambdas))
    return total


class SuffixMap:
    """Conjugation map of a growing suffix unitary, as generator images.

    Row q holds the image of X_q, row n+q the image of Z_q.  Prepending a
    gate extends the suffix at its front, so walking a circuit backwards and
    prepending each gate yields the conjugation action of everything
    downstream of the walk position.
    """

    __slots__ = ("n", "row_x", "row_z", "row_p")

    def __init__(self, n: int):
        self.n = n
        self.row_x = [1 << q for q in range(n)] + [0] * n
        self.row_z = [0] * n + [1 << q for q in range(n)]
        self.row_p = [0] * (2 * n)

    def row(self, kind: str, qubit: int) -> tuple[int, int, int]:
        idx = qubit if kind == "X" else self.n + qubit
        return self.row_x[idx], self.row_z[idx], self.row_p[idx]

    def _compose_local(self, xl: int, zl: int, pl: int, qubits) -> tuple[int, int, int]:
        x = z = 0
        p = pl
        for j, q in enumerate(qubits):
            if (xl >> j) & 1:
                x, z, p = _mul_raw(x, z, p, self.row_x[q], self.row_z[q], self.row_p[q])
        for j, q in enumerate(qubits):
            if (zl >> j) & 1:
                idx = self.n + q
                x, z, p = _mul_raw(x, z, p, self.row_x[idx], self.row_z[idx], self.row_p[idx])
        return x, z, p & 3

    def prepend_gate(self, gate: Gate) -> None:
        table = gate_conj_table(gate, inverse=False)
        qs = gate.qubits
        updates = {}
        for i, q in enumerate(qs):
            for row_idx, local in ((q, (1 << i, 0)), (self.n + q, (0, 1 << i))):
                xl, zl, pl = table[local]
                updates[row_idx] = self._compose_local(xl, zl, pl, qs)
        for idx, (x, z, p) in updates.items():
            self.row_x[idx], self.row_z[idx], self.row_p[idx] = x, z, p

    def image(self, x: int, z: int, p: int) -> tuple[int, int, int]:
        """Image of an arbitrary raw Pauli under the current suffix."""
        xo = zo = 0
        po = p
        for q in range(self.n):
            if (x >> q) & 1:
                xo, zo, po = _mul_raw(xo, zo, po, self.row_x[q], self.row_z[q], self.row_p[q])
        for q in range(self.n):
            if (z >> q) & 1:
                idx = self.n + q
                xo, zo, po = _mul_raw(xo, zo, po, self.row_x[idx], self.row_z[idx], self.row_p[idx])
        return xo, zo, po & 3


def suffix_images(
    noisy: NoisyCircuit,
    end_gates: tuple[Gate, ...] = (),
    record_all: bool = False,
):
    """Walk the circuit backwards collecting per-position conjugation rows.

    Returns (final_map, records) where ``records[i][q]`` holds the suffix
    images of X_q and Z_q at the point just after gate i (i.e. where a gate
    spliced after gate i, before its channel, would be conjugated to the
    circuit end).  By default only positions with a channel are recorded;
    ``record_all`` records every gate position.  ``end_gates`` are appended
    after the whole circuit (e.g. measurement basis changes) before the walk.
    """
    gates = noisy.circuit.gates
    channels = noisy.channels
    smap = SuffixMap(noisy.n_qubits)
    for gate in reversed(end_gates):
        smap.prepend_gate(gate)
    records: dict[int, dict[int, tuple]] = {}
    for i in reversed(range(len(gates))):
        if record_all or channels[i] is not None:
            qubits = set(gates[i].qubits)
            if channels[i] is not None:
                qubits.update(channels[i].qubits)
            records[i] = {
                q: (smap.row("X", q), smap.row("Z", q)) for q in qubits
            }
        smap.prepend_gate(gates[i])
    return smap, records


def propagated_insertion(records, gate_index: int, qubit: int, letter: str):
    """End-of-circuit image of a Pauli letter inserted after a gate."""
    from .paulis import _LETTER_BITS

    xb, zb = _LETTER_BITS[letter.upper()]
    img_x, img_z = records[gate_index][qubit]
    x = z = 0
    p = 0
    if xb:
        x, z, p = _mul_raw(x, z, p, *img_x)
    if zb:
        x, z, p = _mul_raw(x, z, p, *img_z)
    return x, z, p


@dataclass
class AffineSupport:
    """Computational-basis support of a stabilizer state: shift + GF(2) span."""

    shift: int
    basis: list[int]

    @property
    def dimension(self) -> int:
        return len(self.basis)


def stabilizer_affine_support(generators: list[tuple[int, int, int]], n: int) -> AffineSupport:
    """Support of the state stabilized by the given generator rows.

    The support of a stabilizer state in the computational basis is an affine
    subspace: the span of the generators' X-parts shifted by any solution of
    the pure-Z sign constraints.
    """
    reduced: list[tuple[int, int, int, int]] = []  # (pivot, x, z, p)
    pure_z: list[tuple[int, int]] = []
    for x, z, p in generators:
        for pivot, xr, zr, pr in reduced:
            if (x >> pivot) & 1:
                x, z, p = _mul_raw(x, z, p, xr, zr, pr)
        if x == 0:
            if p & 1:
                raise ValueError("stabilizer sign is not +/-1")
            pure_z.append((z, (p >> 1) & 1))
        else:
            pivot = (x & -x).bit_length() - 1
            reduced.append((pivot, x, z, p))

    solved: list[tuple[int, int, int]] = []  # (pivot, zrow, parity)
    for z, c in pure_z:
        for pivot, zr, cr in solved:
            if (z >> pivot) & 1:
                z ^= zr
                c ^= cr
        if z == 0:
            if c:
                raise ValueError("inconsistent stabilizer constraints")
            continue
        pivot = (z & -z).bit_length() - 1
        solved.append((pivot, z, c))
    # reduce to RREF so each row determines its pivot bit with free bits at 0
    for i in range(len(solved)):
        pivot, z, c = solved[i]
        for j in range(len(solved)):
            if i != j and (solved[j][1] >> pivot) & 1:
                pj, zj, cj = solved[j]
                solved[j] = (pj, zj ^ z, cj ^ c)
    shift = 0
    for pivot, _, c in solved:
        if c:
            shift |= 1 << pivot
    return AffineSupport(shift=shift, basis=[x for _, x, _, _ in reduced])
