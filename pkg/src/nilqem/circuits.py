"""Gate-level circuit IR, hardware-efficient ansatz builders, and the
training-circuit generators (four-angle, all-Clifford, and mixed-depth)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import cliffords
from .paulis import LatticeGraph, grid_brickwork_layers

HALF_PI = math.pi / 2.0
FOUR_ANGLE_SET = (0.0, HALF_PI, math.pi, 3 * HALF_PI)

GATE_KINDS = ("rot", "rot2", "clifford1", "clifford2", "unitary1")


@dataclass(frozen=True)
class Gate:
    """One circuit operation.

    kind:
      rot        single-qubit Pauli rotation, axis in {x, y, z}
      rot2       two-qubit ZZ rotation
      clifford1  fixed gate from the 24-element single-qubit Clifford set
      clifford2  fixed two-qubit Clifford, name in {cz, cnot}
      unitary1   arbitrary single-qubit unitary (exact simulator only)

    An ``angle`` of None marks an unbound parameter slot.
    """

    kind: str
    qubits: tuple[int, ...]
    axis: str | None = None
    angle: float | None = None
    name: str | None = None
    matrix: tuple | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        n = len(self.qubits)
        if self.kind in ("rot", "clifford1", "unitary1") and n != 1:
            raise ValueError(f"{self.kind} acts on exactly one qubit")
        if self.kind in ("rot2", "clifford2"):
            if n != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"{self.kind} needs two distinct qubits")
        if self.kind == "rot" and self.axis not in ("x", "y", "z"):
            raise ValueError("rotation axis must be x, y, or z")
        if self.kind == "rot2" and self.axis != "zz":
            raise ValueError("two-qubit rotations support the zz axis only")
        if self.angle is not None and not math.isfinite(self.angle):
            raise ValueError("angle must be finite")
        if self.kind == "clifford1":
            cliffords.resolve_clifford1(self.name)  # raises on bad names
        if self.kind == "clifford2" and self.name not in ("cz", "cnot"):
            raise ValueError("two-qubit Clifford name must be cz or cnot")
        if self.kind == "unitary1" and self.matrix is None:
            raise ValueError("unitary1 gate needs a matrix")

    @classmethod
    def rot(cls, axis: str, qubit: int, angle: float | None = None) -> "Gate":
        return cls("rot", (qubit,), axis=axis, angle=angle)

    @classmethod
    def rot2(cls, q0: int, q1: int, angle: float | None = None) -> "Gate":
        return cls("rot2", (q0, q1), axis="zz", angle=angle)

    @classmethod
    def c1(cls, name: str, qubit: int) -> "Gate":
        return cls("clifford1", (qubit,), name=name)

    @classmethod
    def c2(cls, name: str, q0: int, q1: int) -> "Gate":
        return cls("clifford2", (q0, q1), name=name)

    @classmethod
    def u1(cls, matrix: np.ndarray, qubit: int) -> "Gate":
        mt = tuple(tuple(complex(v) for v in row) for row in np.asarray(matrix))
        return cls("unitary1", (qubit,), matrix=mt)

    @property
    def is_parametric(self) -> bool:
        return self.kind in ("rot", "rot2")

    def unitary(self) -> np.ndarray:
        """Local dense matrix; local bit i corresponds to self.qubits[i]."""
        if self.kind == "rot":
            if self.angle is None:
                raise ValueError("unbound rotation has no matrix")
            return cliffords.rotation_matrix(self.axis, self.angle)
        if self.kind == "rot2":
            if self.angle is None:
                raise ValueError("unbound rotation has no matrix")
            return cliffords.rotation2_matrix(self.angle)
        if self.kind == "clifford1":
            return cliffords.clifford1_matrix(self.name)
        if self.kind == "clifford2":
            return cliffords.cz_matrix() if self.name == "cz" else cliffords.cnot_matrix()
        return np.array(self.matrix, dtype=complex)

    def clifford_key(self) -> tuple | None:
        """Hashable key identifying the gate's Clifford action, or None."""
        if self.kind == "clifford1":
            return ("c1", cliffords.resolve_clifford1(self.name))
        if self.kind == "clifford2":
            return ("c2", self.name)
        if self.kind in ("rot", "rot2") and self.angle is not None:
            steps = self.angle / HALF_PI
            k = round(steps)
            if abs(steps - k) <= 1e-12 / HALF_PI:
                return (self.kind, self.axis, k % 4)
        return None


@lru_cache(maxsize=None)
def _conj_tables(key: tuple) -> tuple[dict, dict]:
    if key[0] == "c1":
        mat = cliffords.CLIFFORD1_MATRICES[key[1]]
    elif key[0] == "c2":
        mat = cliffords.cz_matrix() if key[1] == "cz" else cliffords.cnot_matrix()
    elif key[0] == "rot":
        mat = cliffords.rotation_matrix(key[1], key[2] * HALF_PI)
    else:
        mat = cliffords.rotation2_matrix(key[2] * HALF_PI)
    return cliffords.conj_table(mat), cliffords.conj_table(mat.conj().T)


def gate_conj_table(gate: Gate, inverse: bool = False) -> dict:
    """Pauli conjugation table of a Clifford gate (image under U . U^dag)."""
    key = gate.clifford_key()
    if key is None:
        raise ValueError("gate is not Clifford; no conjugation table")
    fwd, inv = _conj_tables(key)
    return inv if inverse else fwd


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list with a non-decreasing layer index per gate."""

    n_qubits: int
    gates: tuple[Gate, ...]
    layers: tuple[int, ...]

    def __post_init__(self):
        if len(self.gates) != len(self.layers):
            raise ValueError("one layer index per gate required")
        prev = -1
        for gate, layer in zip(self.gates, self.layers):
            for q in gate.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"gate qubit {q} out of range")
            if layer < prev:
                raise ValueError("layer indices must be non-decreasing")
            prev = layer

    @property
    def n_params(self) -> int:
        return sum(1 for g in self.gates if g.is_parametric)

    @property
    def n_layers(self) -> int:
        return self.layers[-1] + 1 if self.layers else 0

    def with_gates(self, gates) -> "Circuit":
        return replace(self, gates=tuple(gates))

    def to_json(self) -> str:
        payload = {
            "n_qubits": self.n_qubits,
            "gates": [_gate_to_obj(g) for g in self.gates],
            "layers": list(self.layers),
        }
        return json.dumps(payload, indent=None, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        payload = json.loads(text)
        gates = tuple(_gate_from_obj(o) for o in payload["gates"])
        return cls(payload["n_qubits"], gates, tuple(payload["layers"]))


def _gate_to_obj(gate: Gate) -> dict:
    obj: dict = {"kind": gate.kind, "qubits": list(gate.qubits)}
    if gate.axis is not None:
        obj["axis"] = gate.axis
    if gate.is_parametric:
        obj["angle"] = "param" if gate.angle is None else gate.angle
    if gate.name is not None:
        obj["name"] = gate.name
    if gate.matrix is not None:
        obj["matrix"] = [[[v.real, v.imag] for v in row] for row in gate.matrix]
    return obj


def _gate_from_obj(obj: dict) -> Gate:
    angle = obj.get("angle")
    if angle == "param":
        angle = None
    matrix = None
    if "matrix" in obj:
        matrix = tuple(
            tuple(complex(re, im) for re, im in row) for row in obj["matrix"]
        )
    return Gate(
        kind=obj["kind"],
        qubits=tuple(obj["qubits"]),
        axis=obj.get("axis"),
        angle=angle,
        name=obj.get("name"),
        matrix=matrix,
    )


@dataclass(frozen=True)
class AnsatzSpec:
    """Which circuit family to build.

    vqe(n, m):    m blocks of [random-axis rotation layer, CZ brickwork even,
                  CZ brickwork odd] plus a final rotation layer; the rotation
                  axes are fixed per (layer, qubit) by ``axis_seed``.
    vqeRy(n, m):  m blocks of [Ry layer, CZ even, Ry layer, CZ odd] plus a
                  final Ry layer.
    hva(n1, n2, m): per block, one coupling rotation per grid edge compiled
                  as CNOT / Rz / CNOT over brickwork sublayers, followed by
                  one X-rotation layer; every angle is an independent
                  parameter.  The compiled form reproduces the published
                  depths for this family (20 layers at 3x2 blocks=2, 26 at
                  5x4 blocks=2).
    """

    family: str
    n: int | None = None
    m: int | None = None
    n1: int | None = None
    n2: int | None = None
    axis_seed: int = 0

    def __post_init__(self):
        if self.family in ("vqe", "vqeRy"):
            if not (self.n and self.m and self.n >= 1 and self.m >= 1):
                raise ValueError(f"{self.family} needs n >= 1 and m >= 1")
        elif self.family == "hva":
            if not (self.n1 and self.n2 and self.m) or min(self.n1, self.n2, self.m) < 1:
                raise ValueError("hva needs n1, n2, m >= 1")
        else:
            raise ValueError(f"unknown ansatz family {self.family!r}")

    @property
    def n_qubits(self) -> int:
        return self.n if self.family in ("vqe", "vqeRy") else self.n1 * self.n2

    def graph(self) -> LatticeGraph:
        if self.family == "hva":
            return LatticeGraph.grid(self.n1, self.n2)
        return LatticeGraph.line(self.n)

    def label(self) -> str:
        if self.family == "hva":
            return f"hva-{self.n1}-{self.n2}-{self.m}"
        return f"{self.family}-{self.n}-{self.m}"


def _line_cz_pairs(n: int, parity: int) -> list[tuple[int, int]]:
    return [(q, q + 1) for q in range(parity, n - 1, 2)]


def build_ansatz(spec: AnsatzSpec) -> Circuit:
    """Build the circuit family with unbound rotation slots."""
    if spec.family == "vqe":
        rng = np.random.default_rng(np.random.SeedSequence(spec.axis_seed))
        axes_table = rng.choice(["x", "y", "z"], size=(spec.m + 1, spec.n))
        return _build_vqe(spec.n, spec.m, lambda layer, q: str(axes_table[layer, q]))
    if spec.family == "vqeRy":
        return _build_vqe_ry(spec.n, spec.m)
    return _build_hva(spec.n1, spec.n2, spec.m)


def _build_vqe(n: int, m: int, axis_of) -> Circuit:
    gates: list[Gate] = []
    layers: list[int] = []
    layer = 0
    for block in range(m + 1):
        for q in range(n):
            gates.append(Gate.rot(axis_of(block, q), q))
            layers.append(layer)
        layer += 1
        if block == m:
            break
        for parity in (0, 1):
            pairs = _line_cz_pairs(n, parity)
            for a, b in pairs:
                gates.append(Gate.c2("cz", a, b))
                layers.append(layer)
            if pairs:
                layer += 1
    return Circuit(n, tuple(gates), tuple(layers))


def _build_vqe_ry(n: int, m: int) -> Circuit:
    gates: list[Gate] = []
    layers: list[int] = []
    layer = 0
    for block in range(m):
        for parity in (0, 1):
            for q in range(n):
                gates.append(Gate.rot("y", q))
                layers.append(layer)
            layer += 1
            pairs = _line_cz_pairs(n, parity)
            for a, b in pairs:
                gates.append(Gate.c2("cz", a, b))
                layers.append(layer)
            if pairs:
                layer += 1
    for q in range(n):
        gates.append(Gate.rot("y", q))
        layers.append(layer)
    return Circuit(n, tuple(gates), tuple(layers))


def _build_hva(n1: int, n2: int, m: int) -> Circuit:
    # each edge coupling exp(-i theta ZZ / 2) is compiled as CNOT-Rz-CNOT;
    # the single-qubit Rz is what the training generators act on
    n = n1 * n2
    sublayers = grid_brickwork_layers(n1, n2)
    gates: list[Gate] = []
    layers: list[int] = []
    layer = 0
    for _ in range(m):
        for sub in sublayers:
            for a, b in sub:
                gates.append(Gate.c2("cnot", a, b))
                layers.append(layer)
            for _, b in sub:
                gates.append(Gate.rot("z", b))
                layers.append(layer + 1)
            for a, b in sub:
                gates.append(Gate.c2("cnot", a, b))
                layers.append(layer + 2)
            layer += 3
        for q in range(n):
            gates.append(Gate.rot("x", q))
            layers.append(layer)
        layer += 1
    return Circuit(n, tuple(gates), tuple(layers))


def bind_uniform(circuit: Circuit, rng: np.random.Generator) -> Circuit:
    """Draw every rotation angle i.i.d. uniform on [0, 2*pi)."""
    gates = [
        replace(g, angle=float(rng.uniform(0.0, 2 * math.pi))) if g.is_parametric else g
        for g in circuit.gates
    ]
    return circuit.with_gates(gates)


def gen_training_2design(circuit: Circuit, rng: np.random.Generator) -> Circuit:
    """Replace every rotation angle with a uniform draw from the four-angle set.

    The output is always a Clifford circuit; non-rotation gates are untouched
    and structure (gate count, qubits, layers) is preserved.
    """
    gates = [
        replace(g, angle=FOUR_ANGLE_SET[int(rng.integers(0, 4))]) if g.is_parametric else g
        for g in circuit.gates
    ]
    return circuit.with_gates(gates)


def gen_training_all_clifford(circuit: Circuit, rng: np.random.Generator) -> Circuit:
    """Replace single-qubit rotations with uniform draws over all 24 Cliffords.

    Two-qubit ZZ rotations have no single-qubit Clifford analogue, so they
    fall back to the four-angle replacement to keep the output Clifford.
    """
    gates = []
    for g in circuit.gates:
        if g.kind == "rot":
            name = cliffords.CLIFFORD1_NAMES[int(rng.integers(0, 24))]
            gates.append(Gate.c1(name, g.qubits[0]))
        elif g.kind == "rot2":
            gates.append(replace(g, angle=FOUR_ANGLE_SET[int(rng.integers(0, 4))]))
        else:
            gates.append(g)
    return circuit.with_gates(gates)


def gen_training_mixed(circuit: Circuit, shallow_layers: int, rng: np.random.Generator) -> Circuit:
    """Uniform angles in the first ``shallow_layers`` layers, four-angle after.

    shallow_layers = 0 reproduces the four-angle generator; setting it to the
    total layer count reproduces the uniform binding.
    """
    if shallow_layers < 0:
        raise ValueError("layer count must be non-negative")
    gates = []
    for g, layer in zip(circuit.gates, circuit.layers):
        if not g.is_parametric:
            gates.append(g)
        elif layer < shallow_layers:
            gates.append(replace(g, angle=float(rng.uniform(0.0, 2 * math.pi))))
        else:
            gates.append(replace(g, angle=FOUR_ANGLE_SET[int(rng.integers(0, 4))]))
    return circuit.with_gates(gates)


def is_clifford(circuit: Circuit) -> bool:
    """True iff every gate has a Clifford action (rotation angles at k*pi/2)."""
    return all(g.clifford_key() is not None for g in circuit.gates)


def haar_random_unitary1(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed 2x2 unitary via QR of a complex Ginibre matrix."""
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_single_qubit_test_circuit(circuit: Circuit, rng: np.random.Generator) -> Circuit:
    """Swap each single-qubit rotation slot for a Haar-random unitary gate.

    Two-qubit rotations are left in place; the result is only simulable by
    the exact engine.
    """
    gates = [
        Gate.u1(haar_random_unitary1(rng), g.qubits[0]) if g.kind == "rot" else g
        for g in circuit.gates
    ]
    return circuit.with_gates(gates)
