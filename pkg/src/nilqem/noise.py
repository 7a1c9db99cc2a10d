"""Per-gate Pauli noise channels and analytic noise amplification.

A Pauli channel on k qubits is stored as a full probability vector over the
4^k raw Paulis of its support (index = x | z << k, identity at index 0).
Its Pauli-transfer representation is diagonal, so channel powers reduce to
exponentiating eigenvalues obtained by a +/-1 character transform.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .circuits import Circuit, Gate


class NoiseError(ValueError):
    pass


@lru_cache(maxsize=None)
def _character_matrix(k: int) -> np.ndarray:
    """chi[e, q] = +1 if local Paulis e and q commute else -1."""
    size = 1 << (2 * k)
    mask = (1 << k) - 1
    chi = np.empty((size, size), dtype=float)
    for e in range(size):
        ex, ez = e & mask, e >> k
        for q in range(size):
            qx, qz = q & mask, q >> k
            par = ((ex & qz).bit_count() + (ez & qx).bit_count()) & 1
            chi[e, q] = -1.0 if par else 1.0
    return chi


@dataclass(frozen=True)
class PauliChannel:
    """Probabilistic Pauli error acting on one or two qubits."""

    qubits: tuple[int, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        k = len(self.qubits)
        if k not in (1, 2):
            raise NoiseError("channels support one or two qubits")
        if len(set(self.qubits)) != k:
            raise NoiseError("channel qubits must be distinct")
        if len(self.probs) != 1 << (2 * k):
            raise NoiseError("probability vector has wrong length")
        arr = np.asarray(self.probs)
        if arr.min() < -1e-12 or arr.sum() > 1.0 + 1e-9:
            raise NoiseError("invalid Pauli error probabilities")

    @classmethod
    def from_error_probs(cls, qubits, error_probs: dict[tuple[int, int], float]) -> "PauliChannel":
        """Build from non-identity error probabilities keyed by local (x, z)."""
        qubits = tuple(qubits)
        k = len(qubits)
        vec = np.zeros(1 << (2 * k))
        for (x, z), p in error_probs.items():
            idx = x | (z << k)
            if idx == 0:
                raise NoiseError("identity is implied, not listed")
            vec[idx] = p
        vec[0] = 1.0 - vec.sum()
        return cls(qubits, tuple(float(v) for v in vec))

    @classmethod
    def depolarizing(cls, qubits, strength: float) -> "PauliChannel":
        """Uniform over the 4^k - 1 non-identity Paulis with total ``strength``."""
        qubits = tuple(qubits)
        k = len(qubits)
        n_err = (1 << (2 * k)) - 1
        vec = np.full(1 << (2 * k), strength / n_err)
        vec[0] = 1.0 - strength
        return cls(qubits, tuple(float(v) for v in vec))

    @classmethod
    def identity(cls, qubits) -> "PauliChannel":
        return cls.depolarizing(qubits, 0.0)

    @property
    def k(self) -> int:
        return len(self.qubits)

    @property
    def total_error_prob(self) -> float:
        return float(1.0 - self.probs[0])

    def is_identity(self) -> bool:
        return self.total_error_prob <= 0.0

    def error_terms(self) -> list[tuple[int, int, float]]:
        """Non-identity errors with positive probability as (x, z, p) locals."""
        k = self.k
        mask = (1 << k) - 1
        out = []
        for idx, p in enumerate(self.probs):
            if idx != 0 and p > 0.0:
                out.append((idx & mask, idx >> k, float(p)))
        return out

    def eigenvalues(self) -> np.ndarray:
        """Diagonal Pauli-transfer eigenvalues, indexed like ``probs``."""
        chi = _character_matrix(self.k)
        return chi.T @ np.asarray(self.probs)

    def eigenvalue_at(self, x: int, z: int) -> float:
        """Transfer eigenvalue for the local raw Pauli X^x Z^z."""
        lam = 1.0
        for xe, ze, p in self.error_terms():
            par = ((xe & z).bit_count() + (ze & x).bit_count()) & 1
            if par:
                lam -= 2.0 * p
        return lam

    @classmethod
    def from_eigenvalues(cls, qubits, eig: np.ndarray) -> "PauliChannel":
        qubits = tuple(qubits)
        k = len(qubits)
        chi = _character_matrix(k)
        vec = chi @ np.asarray(eig) / (1 << (2 * k))
        # clamp round-off-level negatives only; larger ones trip validation
        vec = np.where((vec < 0.0) & (vec >= -1e-12), 0.0, vec)
        return cls(qubits, tuple(float(v) for v in vec))

    def superoperator(self) -> np.ndarray:
        """Dense local superoperator sum_e p_e conj(E) x E (row index fast)."""
        from .cliffords import raw_pauli_matrix

        k = self.k
        mask = (1 << k) - 1
        dim = 1 << k
        out = np.zeros((dim * dim, dim * dim), dtype=complex)
        for idx, p in enumerate(self.probs):
            if p == 0.0:
                continue
            mat = raw_pauli_matrix(idx & mask, idx >> k, k)
            out += p * np.kron(mat.conj(), mat)
        return out


def amplify_channel(channel: PauliChannel, alpha: float) -> PauliChannel:
    """Raise a Pauli channel to the power ``alpha`` in its transfer eigenbasis."""
    if alpha < 0:
        raise NoiseError("amplification exponent must be >= 0")
    if alpha == 1.0:
        return channel
    eig = channel.eigenvalues()
    if np.any(eig < -1e-12):
        raise NoiseError("channel has a negative transfer eigenvalue; power undefined")
    eig = np.clip(eig, 0.0, None)
    with np.errstate(divide="ignore"):
        powered = np.where(eig > 0.0, eig**alpha, 0.0 if alpha > 0 else 1.0)
    if alpha == 0.0:
        powered = np.ones_like(eig)
    return PauliChannel.from_eigenvalues(channel.qubits, powered)


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing strengths per gate arity plus a global amplification."""

    p1: float = 0.001
    p2: float = 0.01
    alpha: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.p1 <= 1.0 and 0.0 <= self.p2 <= 1.0):
            raise NoiseError("depolarizing strengths must lie in [0, 1]")
        if self.alpha < 0:
            raise NoiseError("amplification exponent must be >= 0")

    def to_dict(self) -> dict:
        return {"p1": self.p1, "p2": self.p2, "alpha": self.alpha}

    @classmethod
    def from_dict(cls, obj: dict) -> "NoiseModel":
        return cls(
            p1=float(obj.get("p1", 0.001)),
            p2=float(obj.get("p2", 0.01)),
            alpha=float(obj.get("alpha", 1.0)),
        )


@dataclass(frozen=True)
class NoisyCircuit:
    """A circuit with one Pauli channel slot per gate.

    ``channels[i]`` acts immediately after ``circuit.gates[i]``; a None entry
    marks a noiseless (virtual) gate such as an inserted Pauli.
    """

    circuit: Circuit
    channels: tuple[PauliChannel | None, ...]

    def __post_init__(self):
        if len(self.channels) != len(self.circuit.gates):
            raise NoiseError("one channel slot per gate required")

    def ops(self):
        """Interleaved (kind, payload) stream: 'gate' entries and 'channel' entries."""
        for gate, channel in zip(self.circuit.gates, self.channels):
            yield "gate", gate
            if channel is not None:
                yield "channel", channel

    @property
    def n_qubits(self) -> int:
        return self.circuit.n_qubits


def attach_noise(circuit: Circuit, model: NoiseModel) -> NoisyCircuit:
    """Attach a depolarizing channel after every gate on that gate's support."""
    channels = []
    for gate in circuit.gates:
        strength = model.p1 if len(gate.qubits) == 1 else model.p2
        chan = PauliChannel.depolarizing(gate.qubits, strength)
        if model.alpha != 1.0:
            chan = amplify_channel(chan, model.alpha)
        channels.append(chan)
    return NoisyCircuit(circuit, tuple(channels))


def amplify_circuit(noisy: NoisyCircuit, alpha: float) -> NoisyCircuit:
    """Replace every channel by its alpha-power; gates are untouched."""
    channels = tuple(
        None if ch is None else amplify_channel(ch, alpha) for ch in noisy.channels
    )
    return replace(noisy, channels=channels)
