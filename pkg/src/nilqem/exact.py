"""Exact reference engine: statevector ideal expectations, density-matrix
noisy expectations, shot-sampled group measurements, and the rotation
2-design residual check.

State tensors use shape (2,) * n with qubit q on axis n-1-q, so a flattened
index has qubit 0 as its least significant bit, matching the Pauli bitmask
convention.
"""

from __future__ import annotations

import math

import numpy as np

from .circuits import Circuit, Gate
from .noise import NoisyCircuit, PauliChannel
from .paulis import Observable, PauliString, group_commuting, group_measurement_basis
from . import cliffords

DEFAULT_QUBIT_CAP = 12


class QubitCapError(ValueError):
    pass


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise QubitCapError(f"{n} qubits exceed the dense-simulation cap of {cap}")


def _apply_on_axes(tensor: np.ndarray, mat: np.ndarray, axes: list[int]) -> np.ndarray:
    """Apply ``mat`` to the listed tensor axes; local bit i lives on axes[i]."""
    k = len(axes)
    op = mat.reshape((2,) * (2 * k))
    # matrix index = sum_i b_i 2^i, so after reshape the *last* axis of each
    # half is local bit 0; tensordot against axes listed MSB-first.
    in_axes = list(range(k, 2 * k))
    tensor_axes = [axes[i] for i in reversed(range(k))]
    out = np.tensordot(op, tensor, axes=(in_axes, tensor_axes))
    # tensordot puts the k output axes first (local MSB..LSB); restore order
    return np.moveaxis(out, list(range(k)), tensor_axes)


def _gate_axes(qubits: tuple[int, ...], n: int, offset: int = 0) -> list[int]:
    return [offset + (n - 1 - q) for q in qubits]


def statevector(circuit: Circuit) -> np.ndarray:
    """Final state of circuit acting on |0...0>, flattened to length 2^n."""
    n = circuit.n_qubits
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    for gate in circuit.gates:
        psi = _apply_on_axes(psi, gate.unitary(), _gate_axes(gate.qubits, n))
    return psi.reshape(-1)


def _pauli_apply_flat(vec: np.ndarray, pauli: PauliString) -> np.ndarray:
    x, z, p = pauli.raw()
    idx = np.arange(vec.size, dtype=np.uint64)
    signs = 1.0 - 2.0 * (np.bitwise_count((idx ^ x) & np.uint64(z)) & 1).astype(float)
    return (1j**p) * signs * vec[idx ^ np.uint64(x)]


def ideal_expectation(circuit: Circuit, obs: Observable, cap: int = DEFAULT_QUBIT_CAP) -> float:
    """<0|C^dag O C|0> evaluated exactly from the statevector."""
    _check_cap(circuit.n_qubits, cap)
    psi = statevector(circuit)
    total = 0.0 + 0.0j
    for coef, pauli in obs.terms:
        total += coef * np.vdot(psi, _pauli_apply_flat(psi, pauli))
    return float(total.real)


def initial_density(n: int) -> np.ndarray:
    rho = np.zeros((2,) * (2 * n), dtype=complex)
    rho[(0,) * (2 * n)] = 1.0
    return rho


def apply_gate_density(rho: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    mat = gate.unitary()
    rho = _apply_on_axes(rho, mat, _gate_axes(gate.qubits, n))
    return _apply_on_axes(rho, mat.conj(), _gate_axes(gate.qubits, n, offset=n))


def apply_channel_density(rho: np.ndarray, channel: PauliChannel, n: int) -> np.ndarray:
    if channel.is_identity():
        return rho
    axes = _gate_axes(channel.qubits, n) + _gate_axes(channel.qubits, n, offset=n)
    return _apply_on_axes(rho, channel.superoperator(), axes)


def density_matrix(noisy: NoisyCircuit, cap: int = DEFAULT_QUBIT_CAP) -> np.ndarray:
    """Final density matrix as a (2^n, 2^n) array."""
    n = noisy.n_qubits
    _check_cap(n, cap)
    rho = initial_density(n)
    for kind, payload in noisy.ops():
        if kind == "gate":
            rho = apply_gate_density(rho, payload, n)
        else:
            rho = apply_channel_density(rho, payload, n)
    dim = 1 << n
    return rho.reshape(dim, dim)


def pauli_trace(rho_flat: np.ndarray, pauli: PauliString) -> complex:
    """Tr[P rho] for a flattened (2^n, 2^n) density matrix."""
    x, z, p = pauli.raw()
    idx = np.arange(rho_flat.shape[0], dtype=np.uint64)
    signs = 1.0 - 2.0 * (np.bitwise_count((idx ^ x) & np.uint64(z)) & 1).astype(float)
    return (1j**p) * np.sum(signs * rho_flat[idx ^ np.uint64(x), idx])


def expectation_from_density(rho_flat: np.ndarray, obs: Observable) -> float:
    total = sum(coef * pauli_trace(rho_flat, pauli) for coef, pauli in obs.terms)
    return float(total.real)


def noisy_expectation(noisy: NoisyCircuit, obs: Observable, cap: int = DEFAULT_QUBIT_CAP) -> float:
    """Shot-noise-free noisy expectation under full density-matrix evolution."""
    return expectation_from_density(density_matrix(noisy, cap=cap), obs)


def validate_density(rho_flat: np.ndarray, atol: float = 1e-9) -> None:
    if abs(np.trace(rho_flat) - 1.0) > 1e-10:
        raise ValueError("density matrix trace drifted from 1")
    if not np.allclose(rho_flat, rho_flat.conj().T, atol=atol):
        raise ValueError("density matrix is not Hermitian")
    eig = np.linalg.eigvalsh(rho_flat)
    if eig.min() < -1e-9:
        raise ValueError("density matrix has a negative eigenvalue")


# ---------------------------------------------------------------------------
# shot-sampled group measurements (used for non-Clifford circuits)

_BASIS_CHANGE = {
    "X": cliffords.clifford1_matrix("H"),
    "Y": cliffords.clifford1_matrix("H") @ cliffords.clifford1_matrix("SDG"),
    "Z": None,
}


def _group_support_masks(obs: Observable, group: list[int]) -> list[int]:
    return [obs.terms[idx][1].x | obs.terms[idx][1].z for idx in group]


def measure_groups_sampled(
    noisy: NoisyCircuit,
    obs: Observable,
    shots_per_group: list[int],
    rng: np.random.Generator,
    cap: int = DEFAULT_QUBIT_CAP,
    rho_flat: np.ndarray | None = None,
) -> tuple[float, float]:
    """Estimate <O> by sampling measurement outcomes per commuting group.

    Each group is rotated to its shared product basis, bitstrings are drawn
    from the exact outcome distribution, and term outcomes are the parities
    over each term's support.  Returns (estimate, variance of the estimate).
    """
    n = noisy.n_qubits
    if rho_flat is None:
        rho_flat = density_matrix(noisy, cap=cap)
    groups = group_commuting(obs)
    if len(shots_per_group) != len(groups):
        raise ValueError("one shot budget per commuting group required")
    estimate = 0.0
    variance = 0.0
    for group, shots in zip(groups, shots_per_group):
        basis = group_measurement_basis(obs, group)
        rho = rho_flat.reshape((2,) * (2 * n))
        for q, letter in basis.items():
            mat = _BASIS_CHANGE[letter]
            if mat is None:
                continue
            rho = _apply_on_axes(rho, mat, _gate_axes((q,), n))
            rho = _apply_on_axes(rho, mat.conj(), _gate_axes((q,), n, offset=n))
        probs = np.real(np.diagonal(rho.reshape(1 << n, 1 << n))).copy()
        probs[probs < 0.0] = 0.0
        probs /= probs.sum()
        outcomes = rng.choice(1 << n, size=shots, p=probs).astype(np.uint64)
        coefs = np.array([obs.terms[idx][0] for idx in group])
        masks = _group_support_masks(obs, group)
        term_signs = np.empty((shots, len(group)))
        for col, mask in enumerate(masks):
            par = (np.bitwise_count(outcomes & np.uint64(mask)) & 1).astype(float)
            term_signs[:, col] = 1.0 - 2.0 * par
        per_shot = term_signs @ coefs
        estimate += float(per_shot.mean())
        if shots > 1:
            variance += float(per_shot.var(ddof=1)) / shots
    return estimate, variance


# ---------------------------------------------------------------------------
# rotation 2-design residual

def _axis_rotation(axis: np.ndarray, theta: float) -> np.ndarray:
    gen = (
        axis[0] * np.array([[0.0, 1.0], [1.0, 0.0]])
        + axis[1] * np.array([[0.0, -1.0j], [1.0j, 0.0]])
        + axis[2] * np.array([[1.0, 0.0], [0.0, -1.0]])
    )
    return math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * gen


def check_rotation_2design(
    axis,
    t: int,
    angles: tuple[float, ...] = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2),
    n_points: int = 64,
) -> float:
    """Frobenius residual between the finite angle-set moment and the uniform
    angle average of (R(theta) x R(-theta))^{x t}.

    The trapezoid rule on ``n_points`` uniform nodes is exact here because the
    integrand is a trigonometric polynomial of degree <= 2t.
    """
    axis = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
        raise ValueError("rotation axis must be a unit vector")
    if t not in (1, 2):
        raise ValueError("moment order t must be 1 or 2")

    def moment(theta: float) -> np.ndarray:
        r = _axis_rotation(axis, theta)
        block = np.kron(r, r.conj().T)
        return block if t == 1 else np.kron(block, block)

    finite = sum(moment(theta) for theta in angles) / len(angles)
    grid = [2 * math.pi * j / n_points for j in range(n_points)]
    integral = sum(moment(theta) for theta in grid) / n_points
    return float(np.linalg.norm(finite - integral))


# ---------------------------------------------------------------------------
# per-position sweeps powering exact insertion features

def insertion_sweep(noisy: NoisyCircuit, obs: Observable, cap: int = DEFAULT_QUBIT_CAP):
    """Forward states and backward observables at every insertion point.

    Position i sits after gate i and before channel i, which is where
    neighbor gates are spliced in.  Returns (rhos, obs_backs, rho_final):
    ``rhos[i]`` is the state at position i and ``obs_backs[i]`` the
    Heisenberg image of ``obs`` through everything downstream of position i,
    both as flat (2^n, 2^n) arrays.
    """
    n = noisy.n_qubits
    _check_cap(n, cap)
    dim = 1 << n
    gates = noisy.circuit.gates
    channels = noisy.channels

    rhos: list[np.ndarray] = []
    rho = initial_density(n)
    for gate, channel in zip(gates, channels):
        rho = apply_gate_density(rho, gate, n)
        rhos.append(rho.reshape(dim, dim))
        if channel is not None:
            rho = apply_channel_density(rho, channel, n)
    rho_final = rho.reshape(dim, dim)

    obs_backs: list[np.ndarray | None] = [None] * len(gates)
    back = obs.dense().reshape((2,) * (2 * n))
    for i in reversed(range(len(gates))):
        if channels[i] is not None:
            back = apply_channel_density(back, channels[i], n)
        obs_backs[i] = back.reshape(dim, dim)
        mat = gates[i].unitary()
        axes = _gate_axes(gates[i].qubits, n)
        back = _apply_on_axes(back, mat.conj().T, axes)
        back = _apply_on_axes(back, mat.T, _gate_axes(gates[i].qubits, n, offset=n))
    return rhos, obs_backs, rho_final


def inserted_gate_feature(
    rho_at: np.ndarray, obs_back: np.ndarray, gate: Gate, n: int
) -> float:
    """Tr[(g rho g^dag) O_back] for a single spliced gate."""
    rho = rho_at.reshape((2,) * (2 * n))
    mat = gate.unitary()
    rho = _apply_on_axes(rho, mat, _gate_axes(gate.qubits, n))
    rho = _apply_on_axes(rho, mat.conj(), _gate_axes(gate.qubits, n, offset=n))
    dim = 1 << n
    return float(np.sum(rho.reshape(dim, dim) * obs_back.T).real)
