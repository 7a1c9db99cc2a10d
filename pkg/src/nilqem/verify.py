"""Executable checks of the pipeline's structural identities.

Each check returns a CheckResult with the measured residual so the CLI can
print one line per check; the acceptance test suite reuses the same
functions with its own (larger) sample sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import exact, features, learning, tableau
from .circuits import (
    FOUR_ANGLE_SET,
    Circuit,
    Gate,
    gen_training_all_clifford,
    haar_single_qubit_test_circuit,
)
from .neighbors import NeighborSpec, apply, enumerate_slots, weight1_pauli_map
from .noise import NoiseModel, PauliChannel, amplify_channel, attach_noise
from .paulis import LatticeGraph, Observable, PauliString, build_tfi


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _result(name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(name, bool(passed), detail)


def check_rotation_design_moments(n_axes: int = 20, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_axes):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        for t in (1, 2):
            worst = max(worst, exact.check_rotation_2design(axis, t))
    return _result(
        "rotation-design-moments",
        worst < 1e-12,
        f"max residual {worst:.3e} over {n_axes} axes, t in {{1,2}} (tol 1e-12)",
    )


def check_rotation_design_negative_control() -> CheckResult:
    residual = exact.check_rotation_2design((0.0, 0.0, 1.0), 2, angles=(0.0, math.pi))
    return _result(
        "rotation-design-negative-control",
        residual > 1e-2,
        f"two-angle set residual {residual:.3e} (must exceed 1e-2)",
    )


def check_channel_power_semigroup(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        qubits = (0,) if rng.integers(0, 2) else (0, 1)
        chan = PauliChannel.depolarizing(qubits, float(rng.uniform(0.0, 0.4)))
        a, b = float(rng.uniform(0.1, 2.0)), float(rng.uniform(0.1, 2.0))
        once = amplify_channel(chan, a * b).eigenvalues()
        twice = amplify_channel(amplify_channel(chan, a), b).eigenvalues()
        worst = max(worst, float(np.max(np.abs(once - twice))))
    return _result(
        "channel-power-semigroup",
        worst < 1e-12,
        f"max eigenvalue mismatch {worst:.3e} (tol 1e-12)",
    )


def check_pauli_insertion_sign_lemma(n_circuits: int = 50, seed: int = 0) -> CheckResult:
    """Exact equality <neighbor> = sign * <base> for Pauli insertions."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < n_circuits:
        n = int(rng.integers(1, 6))
        circ = _random_clifford(rng, n, int(rng.integers(1, 9)))
        slots = enumerate_slots(circ)
        if not slots:
            continue
        x = int(rng.integers(0, 1 << n))
        z = int(rng.integers(0, 1 << n))
        if x == 0 and z == 0:
            z = 1
        obs = Observable.from_terms([(1.0, PauliString(n, x, z, 0))], n_qubits=n)
        noisy = attach_noise(circ, NoiseModel(p1=0.03, p2=0.06))
        base = exact.noisy_expectation(noisy, obs)
        weight = int(rng.integers(1, min(3, len(slots)) + 1))
        picks = rng.choice(len(slots), size=weight, replace=False)
        insertions = tuple(
            sorted(
                ((slots[i], "XYZ"[rng.integers(0, 3)]) for i in picks),
                key=lambda pair: pair[0],
            )
        )
        spec = NeighborSpec("pauli", insertions)
        neighbor = exact.noisy_expectation(apply(spec, noisy), obs)
        _, records = tableau.suffix_images(noisy, record_all=True)
        img_x = img_z = 0
        for slot, letter in insertions:
            ix, iz, _ = tableau.propagated_insertion(
                records, slot.gate_index, slot.qubit, letter
            )
            img_x ^= ix
            img_z ^= iz
        par = ((img_x & z).bit_count() + (img_z & x).bit_count()) & 1
        sign = -1.0 if par else 1.0
        worst = max(worst, abs(neighbor - sign * base))
        done += 1
    return _result(
        "pauli-insertion-sign-lemma",
        worst < 1e-10,
        f"max |<neighbor> - sign*<base>| = {worst:.3e} over {n_circuits} circuits (tol 1e-10)",
    )


def _random_clifford(rng, n, n_gates) -> Circuit:
    gates = []
    for _ in range(n_gates):
        kind = rng.integers(0, 3)
        if kind == 0:
            gates.append(
                Gate.rot(
                    "xyz"[rng.integers(0, 3)],
                    int(rng.integers(0, n)),
                    float(rng.integers(0, 4)) * math.pi / 2,
                )
            )
        elif kind == 1:
            gates.append(Gate.c1(f"c{int(rng.integers(0, 24)):02d}", int(rng.integers(0, n))))
        elif n >= 2:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(Gate.c2(["cz", "cnot"][rng.integers(0, 2)], int(a), int(b)))
        else:
            gates.append(Gate.c1("H", 0))
    return Circuit(n, tuple(gates), tuple([0] * len(gates)))


def _moment_toy():
    """Two-qubit, two-rotation noisy circuit used by the moment checks."""
    circuit = Circuit(
        2,
        (Gate.rot("x", 0), Gate.c2("cz", 0, 1), Gate.rot("y", 1)),
        (0, 1, 2),
    )
    obs = build_tfi(LatticeGraph.line(2), 1.0, 2.0)
    model = NoiseModel()
    nmap = weight1_pauli_map(circuit)
    return circuit, obs, model, nmap


def _moment_summary(circuits, nmap, model, obs):
    data = learning.collect_dataset(circuits, nmap, model, obs, plan=None)
    return learning.moments(data)


def _bind_angles(circuit: Circuit, angles) -> Circuit:
    from dataclasses import replace

    it = iter(angles)
    gates = [
        replace(g, angle=float(next(it))) if g.is_parametric else g
        for g in circuit.gates
    ]
    return circuit.with_gates(gates)


def moment_summaries_for_toy(n_quad: int = 64):
    """Exhaustive four-angle moments and quadrature uniform-angle moments."""
    circuit, obs, model, nmap = _moment_toy()
    design_circuits = [
        _bind_angles(circuit, (a1, a2))
        for a1 in FOUR_ANGLE_SET
        for a2 in FOUR_ANGLE_SET
    ]
    design = _moment_summary(design_circuits, nmap, model, obs)
    grid = [2 * math.pi * j / n_quad for j in range(n_quad)]
    uniform_circuits = [_bind_angles(circuit, (a1, a2)) for a1 in grid for a2 in grid]
    uniform = _moment_summary(uniform_circuits, nmap, model, obs)
    return design, uniform


def check_moment_equality(n_quad: int = 64) -> CheckResult:
    """Exhaustive four-angle training moments match uniform-angle moments."""
    design, uniform = moment_summaries_for_toy(n_quad)
    worst = max(
        float(np.max(np.abs(design.second_moment - uniform.second_moment))),
        float(np.max(np.abs(design.cross_moment - uniform.cross_moment))),
        abs(design.label_second_moment - uniform.label_second_moment),
    )
    return _result(
        "training-moment-equality",
        worst < 1e-10,
        f"max entrywise moment gap {worst:.3e} (tol 1e-10)",
    )


def check_all_clifford_training_bias(seed: int = 0, n_haar: int = 2000) -> CheckResult:
    """Uniform-Clifford replacement matches Haar-gate targets, not rotations.

    The 24-element replacement's moments must differ measurably from the
    uniform-rotation-angle moments while agreeing with moments of circuits
    whose single-qubit slots are Haar-random unitaries.
    """
    circuit, obs, model, nmap = _moment_toy()
    rng = np.random.default_rng(seed)
    clifford_circuits = [
        gen_training_all_clifford(circuit, rng) for _ in range(1500)
    ]
    clifford_mom = _moment_summary(clifford_circuits, nmap, model, obs)
    _, uniform = moment_summaries_for_toy(n_quad=32)
    gap_uniform = float(
        np.max(np.abs(clifford_mom.second_moment - uniform.second_moment))
    )
    haar_circuits = [
        haar_single_qubit_test_circuit(circuit, rng) for _ in range(n_haar)
    ]
    haar_mom = _moment_summary(haar_circuits, nmap, model, obs)
    gap_haar = float(np.max(np.abs(clifford_mom.second_moment - haar_mom.second_moment)))
    # both replacement families are Monte Carlo sampled here; allow ~4 sigma
    tol_haar = 4.0 * obs.l1_norm**2 * math.sqrt(1.0 / 1500 + 1.0 / n_haar)
    passed = gap_uniform > 1e-3 and gap_haar < tol_haar
    return _result(
        "all-clifford-training-bias",
        passed,
        f"gap to rotation moments {gap_uniform:.3e} (> 1e-3), "
        f"gap to Haar moments {gap_haar:.3e} (< {tol_haar:.3e})",
    )


def check_shot_noise_regularization(
    n_shots: int = 100, rows: int = 30000, seed: int = 0
) -> CheckResult:
    """Measured feature second moments carry the variance/N_s ridge term."""
    p = 0.3
    eta = 1 - 4 * p / 3
    circ = Circuit(1, (Gate.c1("X", 0),), (0,))
    obs = Observable.from_terms([(1.0, PauliString.from_label("Z"))])
    from .neighbors import NeighborMap

    nmap = NeighborMap((NeighborSpec("identity"),), kind="pauli-w1")
    data = learning.collect_dataset(
        [circ] * rows,
        nmap,
        NoiseModel(p1=p, p2=0.0),
        obs,
        plan=sampler_plan(n_shots, seed),
    )
    mom = learning.moments(data)
    offset = mom.second_moment[0, 0] - eta**2
    expected = (1 - eta**2) / n_shots
    se = math.sqrt(4 * eta**2 * (1 - eta**2) / n_shots / rows)
    passed = abs(offset - expected) < 3 * se
    return _result(
        "shot-noise-regularization",
        passed,
        f"N_s={n_shots}: second-moment offset {offset:.3e} vs variance/N_s "
        f"{expected:.3e} (3 sigma = {3 * se:.3e})",
    )


def sampler_plan(n_shots: int, seed: int):
    from .sampler import ShotPlan

    return ShotPlan(n_shots, seed=seed)


def check_lasso_consistency(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_gap = 0.0
    worst_violation = 0.0
    for _ in range(25):
        t, n = int(rng.integers(8, 40)), int(rng.integers(2, 10))
        x = rng.normal(size=(t, n))
        y = rng.normal(size=t)
        data = learning.Dataset(x, y)
        gamma = float(rng.uniform(0.1, 2.0))
        est = learning.fit_lasso(data, gamma)
        worst_violation = max(worst_violation, est.l1_norm - gamma)
        wide = learning.fit_lasso(data, 1e7)
        ols = learning.fit_ols(data)
        worst_gap = max(
            worst_gap,
            abs(learning.evaluate_mse(wide, data) - learning.evaluate_mse(ols, data)),
        )
    passed = worst_violation <= 1e-9 and worst_gap <= 1e-9
    return _result(
        "lasso-solver-consistency",
        passed,
        f"max budget violation {worst_violation:.3e}, max gap to least squares "
        f"{worst_gap:.3e} (tol 1e-9)",
    )


def check_commuting_groups(seed: int = 0) -> CheckResult:
    from .paulis import group_commuting, qubitwise_compatible

    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(50):
        n = int(rng.integers(2, 6))
        terms = []
        for _ in range(int(rng.integers(2, 10))):
            x = int(rng.integers(0, 1 << n))
            z = int(rng.integers(0, 1 << n))
            terms.append((1.0, PauliString(n, x, z, 0)))
        obs = Observable.from_terms(terms, n_qubits=n)
        groups = group_commuting(obs)
        flat = sorted(i for g in groups for i in g)
        ok &= flat == list(range(len(terms)))
        for g in groups:
            ok &= all(
                qubitwise_compatible(obs.terms[a][1], obs.terms[b][1])
                for a in g
                for b in g
            )
    return _result(
        "commuting-group-partition",
        ok,
        "groups partition the terms and share per-qubit bases",
    )


def run_verification(seed: int = 0, quadrature_points: int = 64) -> list[CheckResult]:
    """The default check battery behind the `verify` command."""
    return [
        check_rotation_design_moments(seed=seed),
        check_rotation_design_negative_control(),
        check_channel_power_semigroup(seed=seed),
        check_commuting_groups(seed=seed),
        check_pauli_insertion_sign_lemma(seed=seed),
        check_moment_equality(n_quad=quadrature_points),
        check_all_clifford_training_bias(seed=seed),
        check_shot_noise_regularization(seed=seed),
        check_lasso_consistency(seed=seed),
    ]
