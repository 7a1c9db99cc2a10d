"""Feature vectors: one noisy estimate per neighbor circuit.

Routing:

* exact features, Clifford circuit      -> analytic channel-eigenvalue sweep
  (Pauli insertions reduce to sign flips of the base term values; noise
  scaling reduces to re-exponentiating the per-term eigenvalue products)
* exact features, non-Clifford circuit  -> density-matrix sweep with cached
  per-position states and back-propagated observables
* sampled features, Clifford circuit    -> Pauli-frame Monte Carlo plans
* sampled features, non-Clifford        -> density matrix + outcome sampling

All paths share estimator semantics (same commuting-group split, same shot
accounting) so datasets built from different engines are statistically
interchangeable.
"""

from __future__ import annotations

import numpy as np

from . import exact, neighbors, sampler, tableau
from .circuits import Circuit, is_clifford
from .neighbors import NeighborMap, NeighborSpec
from .noise import NoiseModel, NoisyCircuit, attach_noise
from .paulis import Observable, commutation_sign, group_commuting
from .sampler import ShotPlan

_LETTER_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


def _exact_clifford_features(noisy: NoisyCircuit, nmap: NeighborMap, obs: Observable) -> np.ndarray:
    """Analytic features for a Clifford base circuit under Pauli noise."""
    term_values = []
    term_lambdas = []
    for _, pauli in obs.terms:
        value, lams = tableau.term_noise_sweep(noisy, *pauli.raw())
        term_values.append(value)
        term_lambdas.append(lams)
    coefs = np.array([c for c, _ in obs.terms])
    base_terms = np.array(
        [v * float(np.prod(l)) for v, l in zip(term_values, term_lambdas)]
    )
    base_value = float(coefs @ base_terms)

    needs_records = any(s.variant == "pauli" for s in nmap.specs)
    records = None
    if needs_records:
        _, records = tableau.suffix_images(noisy, record_all=True)

    out = np.empty(len(nmap.specs))
    for j, spec in enumerate(nmap.specs):
        if spec.variant == "identity":
            out[j] = base_value
        elif spec.variant == "noise_scale":
            scaled = np.array(
                [
                    v * float(np.prod(l**spec.alpha))
                    for v, l in zip(term_values, term_lambdas)
                ]
            )
            out[j] = float(coefs @ scaled)
        elif spec.variant == "pauli":
            # inserted Paulis commute through Pauli channels, so the neighbor
            # value is the base value with per-term commutation signs
            img_x = img_z = 0
            for slot, letter in spec.insertions:
                x, z, _ = tableau.propagated_insertion(
                    records, slot.gate_index, slot.qubit, letter
                )
                img_x ^= x
                img_z ^= z
            total = 0.0
            for coef, (bt, (_, pauli)) in zip(coefs, zip(base_terms, obs.terms)):
                if bt == 0.0:
                    continue
                par = ((img_x & pauli.z).bit_count() + (img_z & pauli.x).bit_count()) & 1
                total += coef * (-bt if par else bt)
            out[j] = total
        else:  # cptp insertion: no sign shortcut, run the spliced sweep
            out[j] = tableau.noisy_clifford_expectation(
                neighbors.apply(spec, noisy), obs
            )
    return out


def _exact_dense_features(
    noisy: NoisyCircuit, nmap: NeighborMap, obs: Observable, cap: int
) -> np.ndarray:
    """Density-matrix features for small non-Clifford circuits."""
    from .circuits import Gate

    needs_sweep = any(
        s.variant in ("pauli", "cptp") and s.weight == 1 for s in nmap.specs
    )
    rhos = obs_backs = None
    rho_final = None
    if needs_sweep:
        rhos, obs_backs, rho_final = exact.insertion_sweep(noisy, obs, cap=cap)

    n = noisy.n_qubits
    out = np.empty(len(nmap.specs))
    base_value = None
    for j, spec in enumerate(nmap.specs):
        if spec.variant == "identity":
            if base_value is None:
                if rho_final is None:
                    rho_final = exact.density_matrix(noisy, cap=cap)
                base_value = exact.expectation_from_density(rho_final, obs)
            out[j] = base_value
        elif spec.variant in ("pauli", "cptp") and spec.weight == 1 and rhos is not None:
            slot, name = spec.insertions[0]
            gate = Gate.c1(name, slot.qubit)
            out[j] = exact.inserted_gate_feature(
                rhos[slot.gate_index], obs_backs[slot.gate_index], gate, n
            )
        else:
            out[j] = exact.noisy_expectation(neighbors.apply(spec, noisy), obs, cap=cap)
    return out


def _sampled_clifford_features(
    noisy: NoisyCircuit,
    nmap: NeighborMap,
    obs: Observable,
    plan: ShotPlan,
    spawn_key: tuple[int, ...],
) -> tuple[np.ndarray, np.ndarray]:
    plans = sampler.build_group_plans(noisy, obs)
    shots = plan.group_shots(len(plans))
    scale_tables: dict[float, list] = {}
    out = np.empty(len(nmap.specs))
    var = np.empty(len(nmap.specs))
    for j, spec in enumerate(nmap.specs):
        flips = None
        tables_by_group = None
        group_plans = plans
        if spec.variant == "pauli":
            flips = [
                g.insertion_flip(
                    [(s.gate_index, s.qubit, letter) for s, letter in spec.insertions]
                )
                for g in plans
            ]
        elif spec.variant == "noise_scale":
            if spec.alpha not in scale_tables:
                scale_tables[spec.alpha] = [g.rescaled_tables(spec.alpha) for g in plans]
            tables_by_group = scale_tables[spec.alpha]
        elif spec.variant == "cptp":
            group_plans = sampler.build_group_plans(neighbors.apply(spec, noisy), obs)
        total = 0.0
        total_var = 0.0
        for g, gplan in enumerate(group_plans):
            rng = np.random.default_rng(
                np.random.SeedSequence(plan.seed, spawn_key=spawn_key + (j, g))
            )
            mean, v = gplan.estimate(
                shots[g],
                rng,
                sign_flips=None if flips is None else flips[g],
                tables=None if tables_by_group is None else tables_by_group[g],
            )
            total += mean
            total_var += v
        out[j] = total
        var[j] = total_var
    return out, var


def _sampled_dense_features(
    noisy: NoisyCircuit,
    nmap: NeighborMap,
    obs: Observable,
    plan: ShotPlan,
    spawn_key: tuple[int, ...],
    cap: int,
) -> tuple[np.ndarray, np.ndarray]:
    groups = group_commuting(obs)
    shots = plan.group_shots(len(groups))
    out = np.empty(len(nmap.specs))
    var = np.empty(len(nmap.specs))
    for j, spec in enumerate(nmap.specs):
        rho = exact.density_matrix(neighbors.apply(spec, noisy), cap=cap)
        est = 0.0
        est_var = 0.0
        for g, group in enumerate(groups):
            rng = np.random.default_rng(
                np.random.SeedSequence(plan.seed, spawn_key=spawn_key + (j, g))
            )
            sub = Observable(obs.n_qubits, tuple(obs.terms[t] for t in group))
            mean, v = exact.measure_groups_sampled(
                noisy, sub, [shots[g]], rng, cap=cap, rho_flat=rho
            )
            est += mean
            est_var += v
        out[j] = est
        var[j] = est_var
    return out, var


def features_with_variance(
    base: Circuit,
    nmap: NeighborMap,
    model: NoiseModel,
    obs: Observable,
    plan: ShotPlan | None,
    cap: int = exact.DEFAULT_QUBIT_CAP,
    spawn_key: tuple[int, ...] = (),
) -> tuple[np.ndarray, np.ndarray]:
    """Feature vector plus per-feature estimator variance (zero in exact mode)."""
    noisy = attach_noise(base, model)
    if plan is None:
        if is_clifford(base):
            x = _exact_clifford_features(noisy, nmap, obs)
        else:
            x = _exact_dense_features(noisy, nmap, obs, cap)
        return x, np.zeros_like(x)
    if is_clifford(base):
        return _sampled_clifford_features(noisy, nmap, obs, plan, spawn_key)
    return _sampled_dense_features(noisy, nmap, obs, plan, spawn_key, cap)


def estimate_features(
    base: Circuit,
    nmap: NeighborMap,
    model: NoiseModel,
    obs: Observable,
    plan: ShotPlan | None = None,
    cap: int = exact.DEFAULT_QUBIT_CAP,
    spawn_key: tuple[int, ...] = (),
) -> np.ndarray:
    """One noisy estimate per neighbor spec, in map order.

    ``plan=None`` requests exact (shot-free) features; otherwise each
    neighbor gets an independent budget of ``plan.total_shots`` measurements
    split equally over the observable's commuting groups.
    """
    return features_with_variance(base, nmap, model, obs, plan, cap, spawn_key)[0]
