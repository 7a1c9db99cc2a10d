import numpy as np
import pytest

from nilqem.circuits import AnsatzSpec, build_ansatz
from nilqem.noise import (
    NoiseError,
    NoiseModel,
    NoisyCircuit,
    PauliChannel,
    amplify_channel,
    amplify_circuit,
    attach_noise,
)


def test_depolarizing_split_1q():
    chan = PauliChannel.depolarizing((0,), 0.001)
    errs = chan.error_terms()
    assert len(errs) == 3
    assert all(abs(p - 0.001 / 3) < 1e-15 for _, _, p in errs)
    assert abs(chan.probs[0] - 0.999) < 1e-15


def test_depolarizing_split_2q():
    chan = PauliChannel.depolarizing((0, 1), 0.01)
    errs = chan.error_terms()
    assert len(errs) == 15
    assert all(abs(p - 0.01 / 15) < 1e-15 for _, _, p in errs)


def test_channel_validation():
    with pytest.raises(NoiseError):
        PauliChannel((0, 0), (1.0, 0, 0, 0))
    with pytest.raises(NoiseError):
        PauliChannel.from_error_probs((0,), {(0, 0): 0.1})
    with pytest.raises(NoiseError):
        PauliChannel((0,), (0.5, 0.5, 0.5, 0.5))


def test_depolarizing_eigenvalues():
    p = 0.01
    chan = PauliChannel.depolarizing((0,), p)
    eig = chan.eigenvalues()
    assert abs(eig[0] - 1.0) < 1e-15
    assert np.allclose(eig[1:], 1.0 - 4.0 * p / 3.0)
    assert abs(chan.eigenvalue_at(1, 0) - (1.0 - 4.0 * p / 3.0)) < 1e-15


def test_eigenvalue_round_trip():
    rng = np.random.default_rng(1)
    for qubits in ((0,), (0, 1)):
        k = len(qubits)
        probs = rng.dirichlet(np.ones(1 << (2 * k))) * 0.3
        probs[0] = 1.0 - probs[1:].sum()
        chan = PauliChannel(tuple(qubits), tuple(probs))
        back = PauliChannel.from_eigenvalues(qubits, chan.eigenvalues())
        assert np.allclose(back.probs, chan.probs, atol=1e-12)


def test_amplify_identity_exponent():
    chan = PauliChannel.depolarizing((0,), 0.01)
    assert amplify_channel(chan, 1.0) == chan


def test_amplify_zero_strength():
    chan = PauliChannel.depolarizing((0,), 0.0)
    out = amplify_channel(chan, 2.7)
    assert out.total_error_prob == 0.0


def test_amplify_closed_form():
    p = 0.01
    alpha = 1.58
    out = amplify_channel(PauliChannel.depolarizing((0,), p), alpha)
    expected = 0.75 * (1.0 - (1.0 - 4.0 * p / 3.0) ** alpha)
    assert abs(out.total_error_prob - expected) < 1e-12
    assert abs(expected - 0.015739) < 5e-7

    squared = amplify_channel(PauliChannel.depolarizing((0,), p), 2.0)
    assert abs(squared.total_error_prob - 0.75 * (1 - (1 - 4 * p / 3) ** 2)) < 1e-12


def test_amplify_alpha_zero_gives_identity():
    out = amplify_channel(PauliChannel.depolarizing((0, 1), 0.3), 0.0)
    assert out.is_identity()


def test_amplify_semigroup():
    chan = PauliChannel.depolarizing((0, 1), 0.05)
    a, b = 1.3, 2.1
    once = amplify_channel(chan, a * b)
    twice = amplify_channel(amplify_channel(chan, a), b)
    assert np.allclose(once.eigenvalues(), twice.eigenvalues(), atol=1e-12)


def test_amplify_rejects_negative_eigenvalue():
    # 1q depolarizing with p > 3/4 has negative transfer eigenvalues
    chan = PauliChannel.depolarizing((0,), 0.9)
    with pytest.raises(NoiseError):
        amplify_channel(chan, 1.5)


def test_channel_probs_stay_normalized_under_amplification():
    rng = np.random.default_rng(2)
    for _ in range(20):
        chan = PauliChannel.depolarizing((0, 1), float(rng.uniform(0, 0.4)))
        out = amplify_channel(chan, float(rng.uniform(0, 3)))
        arr = np.asarray(out.probs)
        assert arr.min() >= -1e-12
        assert arr.sum() <= 1 + 1e-12


def test_attach_noise_counts_and_strengths():
    circ = build_ansatz(AnsatzSpec("vqe", n=2, m=1))
    noisy = attach_noise(circ, NoiseModel())
    assert len(noisy.channels) == 5
    one_q = [c for c in noisy.channels if c.k == 1]
    two_q = [c for c in noisy.channels if c.k == 2]
    assert len(one_q) == 4 and len(two_q) == 1
    for chan in one_q:
        assert abs(chan.total_error_prob - 0.001) < 1e-15
    assert abs(two_q[0].total_error_prob - 0.01) < 1e-15


def test_attach_noise_zero_strength():
    circ = build_ansatz(AnsatzSpec("vqe", n=2, m=1))
    noisy = attach_noise(circ, NoiseModel(p1=0.0, p2=0.0))
    assert all(c.is_identity() for c in noisy.channels)


def test_amplify_circuit_alpha_one():
    circ = build_ansatz(AnsatzSpec("vqe", n=2, m=1))
    noisy = attach_noise(circ, NoiseModel())
    assert amplify_circuit(noisy, 1.0) == noisy


def test_noisy_circuit_validation():
    circ = build_ansatz(AnsatzSpec("vqe", n=2, m=1))
    with pytest.raises(NoiseError):
        NoisyCircuit(circ, (None,))


def test_pauli_channel_commutes_with_pauli_gates():
    # superoperator identity: E . P = P . E for 1q channels, dense n <= 2 check
    from nilqem.cliffords import raw_pauli_matrix

    rng = np.random.default_rng(3)
    for _ in range(10):
        probs = rng.dirichlet(np.ones(4)) * 0.5
        probs[0] = 1.0 - probs[1:].sum()
        chan = PauliChannel((0,), tuple(probs))
        k_super = chan.superoperator()
        for x, z in ((1, 0), (0, 1), (1, 1)):
            pauli = raw_pauli_matrix(x, z, 1)
            p_super = np.kron(pauli.conj(), pauli)
            assert np.allclose(k_super @ p_super, p_super @ k_super, atol=1e-12)


def test_noise_model_dict_round_trip():
    model = NoiseModel(p1=0.002, p2=0.02, alpha=1.34)
    assert NoiseModel.from_dict(model.to_dict()) == model
    with pytest.raises(NoiseError):
        NoiseModel(p1=-0.1)
