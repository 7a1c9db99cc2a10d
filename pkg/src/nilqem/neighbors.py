"""Neighbor-circuit constructions: Pauli / CPTP gate insertion, noise
scaling, random subsets, and their application to noisy circuits.

A neighbor map is an ordered list of specs; the position of a spec is the
feature column it produces, and that order is part of the serialization
contract.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate
from .cliffords import cptp_basis_gate_names
from .noise import NoisyCircuit, amplify_circuit

PAULI_LETTERS = ("X", "Y", "Z")
DEFAULT_ZNE_ALPHAS = (1.0, 1.1, 1.34, 1.58)


@dataclass(frozen=True, order=True)
class InsertionSlot:
    """One insertion position: a gate and one qubit of its support."""

    gate_index: int
    qubit: int

    def validate(self, circuit: Circuit) -> None:
        if not 0 <= self.gate_index < len(circuit.gates):
            raise ValueError(f"slot gate index {self.gate_index} out of range")
        if self.qubit not in circuit.gates[self.gate_index].qubits:
            raise ValueError(
                f"qubit {self.qubit} not in support of gate {self.gate_index}"
            )


@dataclass(frozen=True)
class NeighborSpec:
    """A single neighbor-circuit recipe.

    variant 'identity'     the unmodified circuit
    variant 'pauli'        insertions = ((slot, letter), ...) with letters X/Y/Z
    variant 'cptp'         insertions = ((slot, clifford-name), ...)
    variant 'noise_scale'  alpha exponent applied to every channel
    """

    variant: str
    insertions: tuple[tuple[InsertionSlot, str], ...] = ()
    alpha: float | None = None

    def __post_init__(self):
        if self.variant == "identity":
            if self.insertions or self.alpha is not None:
                raise ValueError("identity spec takes no parameters")
        elif self.variant in ("pauli", "cptp"):
            if not self.insertions:
                raise ValueError("insertion spec needs at least one insertion")
            slots = [slot for slot, _ in self.insertions]
            if len(set(slots)) != len(slots):
                raise ValueError("insertion slots must be distinct")
            if self.variant == "pauli":
                for _, letter in self.insertions:
                    if letter not in PAULI_LETTERS:
                        raise ValueError(f"invalid Pauli letter {letter!r}")
        elif self.variant == "noise_scale":
            if self.alpha is None or self.alpha < 0:
                raise ValueError("noise_scale spec needs alpha >= 0")
            if self.insertions:
                raise ValueError("noise_scale spec takes no insertions")
        else:
            raise ValueError(f"unknown neighbor variant {self.variant!r}")

    @property
    def weight(self) -> int:
        return len(self.insertions)

    def to_obj(self) -> dict:
        obj: dict = {"variant": self.variant}
        if self.insertions:
            obj["insertions"] = [
                [slot.gate_index, slot.qubit, gate] for slot, gate in self.insertions
            ]
        if self.alpha is not None:
            obj["alpha"] = self.alpha
        return obj

    @classmethod
    def from_obj(cls, obj: dict) -> "NeighborSpec":
        insertions = tuple(
            (InsertionSlot(g, q), gate) for g, q, gate in obj.get("insertions", ())
        )
        return cls(obj["variant"], insertions, obj.get("alpha"))


@dataclass(frozen=True)
class NeighborMap:
    """Ordered neighbor specs plus the provenance needed to rebuild them."""

    specs: tuple[NeighborSpec, ...]
    kind: str
    params: dict | None = None

    def __post_init__(self):
        if len(set(map(repr, self.specs))) != len(self.specs):
            raise ValueError("neighbor specs must be distinct")

    def __len__(self) -> int:
        return len(self.specs)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "params": self.params or {},
                "specs": [s.to_obj() for s in self.specs],
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "NeighborMap":
        obj = json.loads(text)
        specs = tuple(NeighborSpec.from_obj(o) for o in obj["specs"])
        return cls(specs, obj["kind"], obj.get("params") or None)

    def identity_column(self) -> int | None:
        """Column of the unmodified circuit: an identity spec, else alpha=1."""
        for j, spec in enumerate(self.specs):
            if spec.variant == "identity":
                return j
        for j, spec in enumerate(self.specs):
            if spec.variant == "noise_scale" and spec.alpha == 1.0:
                return j
        return None


def enumerate_slots(circuit: Circuit) -> list[InsertionSlot]:
    """All (gate, support-qubit) pairs in gate order, then qubit order."""
    return [
        InsertionSlot(i, q)
        for i, gate in enumerate(circuit.gates)
        for q in gate.qubits
    ]


def weight1_pauli_map(circuit: Circuit) -> NeighborMap:
    """Identity first, then every (slot, Pauli letter) single insertion."""
    specs = [NeighborSpec("identity")]
    for slot in enumerate_slots(circuit):
        for letter in PAULI_LETTERS:
            specs.append(NeighborSpec("pauli", ((slot, letter),)))
    return NeighborMap(tuple(specs), kind="pauli-w1")


def random_subset_map(full: NeighborMap, size: int, rng: np.random.Generator) -> NeighborMap:
    """Keep the identity spec plus ``size`` non-identity specs, order preserved."""
    identity_positions = [
        j for j, s in enumerate(full.specs) if s.variant == "identity"
    ]
    rest = [j for j in range(len(full.specs)) if j not in identity_positions]
    if size > len(rest):
        raise ValueError(f"subset size {size} exceeds {len(rest)} available specs")
    chosen = rng.choice(len(rest), size=size, replace=False)
    keep = sorted(identity_positions + [rest[j] for j in chosen])
    return NeighborMap(
        tuple(full.specs[j] for j in keep),
        kind="subset",
        params={"base": full.kind, "size": size},
    )


def weightk_pauli_map(
    circuit: Circuit, max_weight: int, budget: int, rng: np.random.Generator
) -> NeighborMap:
    """All weight-1 specs plus ``budget`` random distinct specs of weight 2..k."""
    if max_weight < 1:
        raise ValueError("max weight must be >= 1")
    base = weight1_pauli_map(circuit)
    specs = list(base.specs)
    if max_weight == 1:
        if budget:
            raise ValueError("weight-1 map has no room for extra specs")
        return NeighborMap(tuple(specs), kind="pauli-wk", params={"max_weight": 1})
    slots = enumerate_slots(circuit)
    seen = {_spec_key(s) for s in specs}
    attempts = 0
    cap = 1000 * max(budget, 1)
    while len(specs) < len(base.specs) + budget:
        attempts += 1
        if attempts > cap:
            raise ValueError("budget exceeds the number of distinct specs reachable")
        w = int(rng.integers(2, max_weight + 1))
        if w > len(slots):
            continue
        idx = rng.choice(len(slots), size=w, replace=False)
        ins = tuple(
            sorted(
                (
                    (slots[i], PAULI_LETTERS[int(rng.integers(0, 3))])
                    for i in idx
                ),
                key=lambda pair: pair[0],
            )
        )
        spec = NeighborSpec("pauli", ins)
        key = _spec_key(spec)
        if key not in seen:
            seen.add(key)
            specs.append(spec)
    return NeighborMap(
        tuple(specs),
        kind="pauli-wk",
        params={"max_weight": max_weight, "budget": budget},
    )


def _spec_key(spec: NeighborSpec):
    return (spec.variant, frozenset(spec.insertions), spec.alpha)


def cptp_map(circuit: Circuit) -> NeighborMap:
    """Identity plus the nine-gate CPTP insertion alphabet at every slot."""
    names = cptp_basis_gate_names()
    specs = [NeighborSpec("identity")]
    for slot in enumerate_slots(circuit):
        for name in names:
            specs.append(NeighborSpec("cptp", ((slot, name),)))
    return NeighborMap(tuple(specs), kind="cptp")


def zne_map(alphas=DEFAULT_ZNE_ALPHAS) -> NeighborMap:
    """One noise-scaling spec per amplification exponent, in the given order."""
    alphas = tuple(float(a) for a in alphas)
    if not alphas or any(a < 0 for a in alphas):
        raise ValueError("need a nonempty list of exponents >= 0")
    specs = tuple(NeighborSpec("noise_scale", alpha=a) for a in alphas)
    return NeighborMap(specs, kind="zne", params={"alphas": list(alphas)})


def zne_plus_pauli_map(circuit: Circuit, alphas=DEFAULT_ZNE_ALPHAS) -> NeighborMap:
    """Noise-scaling specs followed by all weight-1 Pauli insertions."""
    scale = zne_map(alphas)
    pauli = [s for s in weight1_pauli_map(circuit).specs if s.variant != "identity"]
    return NeighborMap(
        scale.specs + tuple(pauli),
        kind="zne+pauli",
        params={"alphas": list(scale.params["alphas"])},
    )


def apply(spec: NeighborSpec, noisy: NoisyCircuit) -> NoisyCircuit:
    """Materialize a neighbor circuit.

    Inserted gates are spliced immediately after the slot gate and before
    that gate's noise channel, and carry no channel of their own.
    """
    if spec.variant == "identity":
        return noisy
    if spec.variant == "noise_scale":
        return amplify_circuit(noisy, spec.alpha)

    base = noisy.circuit
    gates = list(base.gates)
    channels = list(noisy.channels)
    layers = list(base.layers)
    for slot, gate_name in sorted(spec.insertions, key=lambda p: p[0], reverse=True):
        slot.validate(base)
        new_gate = Gate.c1(gate_name, slot.qubit)
        i = slot.gate_index
        gates.insert(i + 1, new_gate)
        layers.insert(i + 1, layers[i])
        # the slot gate's channel moves behind the insertion so the order is
        # gate, inserted gate, channel
        channels.insert(i + 1, channels[i])
        channels[i] = None
    circuit = Circuit(base.n_qubits, tuple(gates), tuple(layers))
    return NoisyCircuit(circuit, tuple(channels))
