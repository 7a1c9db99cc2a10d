import math

import numpy as np
import pytest

from nilqem.circuits import AnsatzSpec, bind_uniform, build_ansatz, gen_training_2design
from nilqem.exact import noisy_expectation
from nilqem.features import estimate_features, features_with_variance
from nilqem.neighbors import (
    apply,
    cptp_map,
    weight1_pauli_map,
    weightk_pauli_map,
    zne_map,
    zne_plus_pauli_map,
)
from nilqem.noise import NoiseModel, attach_noise
from nilqem.paulis import LatticeGraph, build_tfi
from nilqem.sampler import ShotPlan


MODEL = NoiseModel(p1=0.004, p2=0.02)


def _reference_features(circ, nmap, obs):
    noisy = attach_noise(circ, MODEL)
    return np.array([noisy_expectation(apply(s, noisy), obs) for s in nmap.specs])


@pytest.mark.parametrize("map_builder", [
    weight1_pauli_map,
    cptp_map,
    lambda c: zne_map(),
    zne_plus_pauli_map,
    lambda c: weightk_pauli_map(c, 2, 6, np.random.default_rng(0)),
])
def test_exact_clifford_fast_path_matches_density_matrix(map_builder):
    rng = np.random.default_rng(1)
    obs = build_tfi(LatticeGraph.line(3), 1.0, 2.0)
    for _ in range(3):
        circ = gen_training_2design(build_ansatz(AnsatzSpec("vqe", n=3, m=1)), rng)
        nmap = map_builder(circ)
        fast = estimate_features(circ, nmap, MODEL, obs)
        slow = _reference_features(circ, nmap, obs)
        assert np.allclose(fast, slow, atol=1e-10)


@pytest.mark.parametrize("map_builder", [
    weight1_pauli_map,
    cptp_map,
    lambda c: zne_map(),
    lambda c: weightk_pauli_map(c, 2, 6, np.random.default_rng(0)),
])
def test_exact_dense_path_matches_direct_splice(map_builder):
    rng = np.random.default_rng(2)
    obs = build_tfi(LatticeGraph.line(3), 1.0, 2.0)
    circ = bind_uniform(build_ansatz(AnsatzSpec("vqe", n=3, m=1)), rng)
    nmap = map_builder(circ)
    fast = estimate_features(circ, nmap, MODEL, obs)
    slow = _reference_features(circ, nmap, obs)
    assert np.allclose(fast, slow, atol=1e-10)


def test_identity_neighbor_equals_base_estimate():
    rng = np.random.default_rng(3)
    obs = build_tfi(LatticeGraph.line(3), 1.0, 2.0)
    circ = gen_training_2design(build_ansatz(AnsatzSpec("vqe", n=3, m=1)), rng)
    nmap = weight1_pauli_map(circ)
    x = estimate_features(circ, nmap, MODEL, obs)
    noisy = attach_noise(circ, MODEL)
    assert x[0] == pytest.approx(noisy_expectation(noisy, obs), abs=1e-10)


def test_feature_vector_order_and_length():
    rng = np.random.default_rng(4)
    obs = build_tfi(LatticeGraph.line(2), 1.0, 2.0)
    circ = gen_training_2design(build_ansatz(AnsatzSpec("vqe", n=2, m=1)), rng)
    nmap = weight1_pauli_map(circ)
    x = estimate_features(circ, nmap, MODEL, obs)
    assert x.shape == (len(nmap),)


def test_sampled_features_deterministic_per_spawn_key():
    rng = np.random.default_rng(5)
    obs = build_tfi(LatticeGraph.line(3), 1.0, 2.0)
    circ = gen_training_2design(build_ansatz(AnsatzSpec("vqe", n=3, m=1)), rng)
    nmap = weight1_pauli_map(circ)
    plan = ShotPlan(256, seed=11)
    a = estimate_features(circ, nmap, MODEL, obs, plan=plan, spawn_key=(0, 4))
    b = estimate_features(circ, nmap, MODEL, obs, plan=plan, spawn_key=(0, 4))
    c = estimate_features(circ, nmap, MODEL, obs, plan=plan, spawn_key=(0, 5))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sampled_features_converge_to_exact_clifford():
    rng = np.random.default_rng(6)
    obs = build_tfi(LatticeGraph.line(3), 1.0, 2.0)
    circ = gen_training_2design(build_ansatz(AnsatzSpec("vqe", n=3, m=2)), rng)
    nmap = zne_plus_pauli_map(circ)
    exact_x = estimate_features(circ, nmap, MODEL, obs)
    plan = ShotPlan(4000, seed=21)
    x, var = features_with_variance(circ, nmap, MODEL, obs, plan=plan)
    # every neighbor estimate within 5 standard errors of its exact value
    se = np.sqrt(np.maximum(var, 1e-12))
    assert np.all(np.abs(x - exact_x) < 5 * se + 1e-9)


def test_sampled_features_converge_to_exact_dense():
    rng = np.random.default_rng(7)
    obs = build_tfi(LatticeGraph.line(2), 1.0, 2.0)
    circ = bind_uniform(build_ansatz(AnsatzSpec("vqe", n=2, m=1)), rng)
    nmap = weight1_pauli_map(circ)
    exact_x = estimate_features(circ, nmap, MODEL, obs)
    plan = ShotPlan(4000, seed=22)
    x, var = features_with_variance(circ, nmap, MODEL, obs, plan=plan)
    se = np.sqrt(np.maximum(var, 1e-12))
    assert np.all(np.abs(x - exact_x) < 5 * se + 1e-9)


def test_cptp_sampled_path_runs():
    rng = np.random.default_rng(8)
    obs = build_tfi(LatticeGraph.line(2), 1.0, 2.0)
    circ = gen_training_2design(build_ansatz(AnsatzSpec("vqe", n=2, m=1)), rng)
    nmap = cptp_map(circ)
    exact_x = estimate_features(circ, nmap, MODEL, obs)
    x, var = features_with_variance(circ, nmap, MODEL, obs, plan=ShotPlan(3000, seed=9))
    se = np.sqrt(np.maximum(var, 1e-12))
    assert np.all(np.abs(x - exact_x) < 5 * se + 1e-9)
