import numpy as np
import pytest

from nilqem.circuits import AnsatzSpec, Circuit, Gate, bind_uniform, build_ansatz, is_clifford
from nilqem.cliffords import clifford1_matrix, resolve_clifford1
from nilqem.exact import noisy_expectation
from nilqem.neighbors import (
    DEFAULT_ZNE_ALPHAS,
    InsertionSlot,
    NeighborMap,
    NeighborSpec,
    apply,
    cptp_map,
    enumerate_slots,
    random_subset_map,
    weight1_pauli_map,
    weightk_pauli_map,
    zne_map,
    zne_plus_pauli_map,
)
from nilqem.noise import NoiseModel, attach_noise
from nilqem.paulis import Observable, PauliString


def small_circuit():
    return Circuit(2, (Gate.rot("z", 0, 0.5), Gate.c2("cz", 0, 1)), (0, 0))


def test_enumerate_slots_counts():
    assert len(enumerate_slots(small_circuit())) == 3
    assert enumerate_slots(Circuit(1, (), ())) == []
    vqe = build_ansatz(AnsatzSpec("vqe", n=6, m=4))
    assert len(enumerate_slots(vqe)) == 30 + 2 * 20


def test_weight1_map_layout():
    nmap = weight1_pauli_map(small_circuit())
    assert len(nmap) == 1 + 9
    assert nmap.specs[0].variant == "identity"
    assert nmap.identity_column() == 0
    vqe = build_ansatz(AnsatzSpec("vqe", n=6, m=4))
    assert len(weight1_pauli_map(vqe)) == 1 + 210
    assert weight1_pauli_map(vqe) == weight1_pauli_map(vqe)


def test_random_subset_map():
    full = weight1_pauli_map(small_circuit())
    sub = random_subset_map(full, 4, np.random.default_rng(0))
    assert len(sub) == 5
    assert sub.specs[0].variant == "identity"
    again = random_subset_map(full, 4, np.random.default_rng(0))
    assert sub == again
    everything = random_subset_map(full, len(full) - 1, np.random.default_rng(1))
    assert everything.specs == full.specs
    only_id = random_subset_map(full, 0, np.random.default_rng(2))
    assert len(only_id) == 1
    with pytest.raises(ValueError):
        random_subset_map(full, len(full), np.random.default_rng(3))


def test_weightk_map_counts_and_distinctness():
    circ = small_circuit()
    w1 = weightk_pauli_map(circ, 1, 0, np.random.default_rng(0))
    assert w1.specs == weight1_pauli_map(circ).specs

    wk = weightk_pauli_map(circ, 2, 5, np.random.default_rng(1))
    assert len(wk) == 10 + 5
    keys = {(s.variant, frozenset(s.insertions), s.alpha) for s in wk.specs}
    assert len(keys) == len(wk)
    for spec in wk.specs[10:]:
        assert spec.weight == 2


def test_cptp_map_gates_are_cliffords():
    nmap = cptp_map(small_circuit())
    assert len(nmap) == 1 + 27
    for spec in nmap.specs[1:]:
        (_, name), = spec.insertions
        resolve_clifford1(name)
    # the K = S H identity pins the conjugated set members
    k = clifford1_matrix("K")
    sh = clifford1_matrix("S") @ clifford1_matrix("H")
    assert np.allclose(np.abs(k.conj().T @ sh), np.eye(2), atol=1e-9)


def test_zne_map_layout():
    nmap = zne_map()
    assert [s.alpha for s in nmap.specs] == list(DEFAULT_ZNE_ALPHAS)
    assert len(nmap) == 4
    assert nmap.identity_column() == 0  # alpha = 1 plays the identity role
    single = zne_map([1.0])
    assert len(single) == 1


def test_zne_plus_pauli_layout():
    circ = small_circuit()
    nmap = zne_plus_pauli_map(circ)
    assert len(nmap) == 4 + 9
    assert nmap.specs[0].alpha == 1.0
    assert all(s.variant == "pauli" for s in nmap.specs[4:])


def test_map_json_round_trip():
    circ = small_circuit()
    for nmap in (
        weight1_pauli_map(circ),
        cptp_map(circ),
        zne_map(),
        zne_plus_pauli_map(circ),
        weightk_pauli_map(circ, 2, 3, np.random.default_rng(7)),
    ):
        assert NeighborMap.from_json(nmap.to_json()) == nmap


def test_apply_identity_and_noise_scale():
    circ = small_circuit()
    noisy = attach_noise(circ, NoiseModel())
    assert apply(NeighborSpec("identity"), noisy) is noisy
    scaled = apply(NeighborSpec("noise_scale", alpha=2.0), noisy)
    assert scaled.circuit == circ
    assert scaled.channels != noisy.channels


def test_apply_splices_before_channel():
    circ = small_circuit()
    noisy = attach_noise(circ, NoiseModel())
    spec = NeighborSpec("pauli", ((InsertionSlot(0, 0), "X"),))
    out = apply(spec, noisy)
    kinds = [g.kind for g in out.circuit.gates]
    assert kinds == ["rot", "clifford1", "clifford2"]
    # the rotation's channel moved behind the insertion
    assert out.channels[0] is None
    assert out.channels[1] == noisy.channels[0]
    assert out.channels[2] == noisy.channels[1]
    assert is_clifford(apply(spec, attach_noise(
        Circuit(2, (Gate.rot("z", 0, np.pi), Gate.c2("cz", 0, 1)), (0, 0)),
        NoiseModel(),
    )).circuit)


def test_apply_validates_slots():
    circ = small_circuit()
    noisy = attach_noise(circ, NoiseModel())
    with pytest.raises(ValueError):
        apply(NeighborSpec("pauli", ((InsertionSlot(5, 0), "X"),)), noisy)
    with pytest.raises(ValueError):
        apply(NeighborSpec("pauli", ((InsertionSlot(0, 1), "X"),)), noisy)


def test_insertion_sign_flip_single_qubit():
    # Z after a Z rotation leaves <Z> unchanged; X negates it
    circ = Circuit(1, (Gate.rot("z", 0, np.pi / 2),), (0,))
    noisy = attach_noise(circ, NoiseModel(p1=0.05, p2=0.0))
    obs = Observable.from_terms([(1.0, PauliString.from_label("Z"))])
    base = noisy_expectation(noisy, obs)
    z_spec = NeighborSpec("pauli", ((InsertionSlot(0, 0), "Z"),))
    x_spec = NeighborSpec("pauli", ((InsertionSlot(0, 0), "X"),))
    assert noisy_expectation(apply(z_spec, noisy), obs) == pytest.approx(base, abs=1e-12)
    assert noisy_expectation(apply(x_spec, noisy), obs) == pytest.approx(-base, abs=1e-12)


def test_spec_validation():
    with pytest.raises(ValueError):
        NeighborSpec("pauli", ())
    with pytest.raises(ValueError):
        NeighborSpec("pauli", ((InsertionSlot(0, 0), "Q"),))
    with pytest.raises(ValueError):
        NeighborSpec("noise_scale")
    with pytest.raises(ValueError):
        NeighborSpec(
            "pauli",
            ((InsertionSlot(0, 0), "X"), (InsertionSlot(0, 0), "Y")),
        )
    with pytest.raises(ValueError):
        NeighborSpec("bogus")
