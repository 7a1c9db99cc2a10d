"""Pauli-string algebra, weighted-Pauli observables, and lattice Hamiltonians.

Pauli words are stored in symplectic form: two integer bitmasks ``x`` and
``z`` where bit ``q`` marks an X (resp. Z) factor on qubit ``q``, and a
phase drawn from {+1, -1, +i, -i}.  Bit ``q`` of a basis-state index is the
outcome of qubit ``q``, i.e. qubit 0 is the least significant bit, and
character ``q`` of a text label like ``"XIZ"`` addresses qubit ``q``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}

_PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _mul_raw(x1: int, z1: int, p1: int, x2: int, z2: int, p2: int) -> tuple[int, int, int]:
    # Product in the raw convention  i^p * X^x * Z^z ; moving Z^z1 past X^x2
    # contributes (-1) per overlapping bit.
    p = (p1 + p2 + 2 * ((z1 & x2).bit_count() & 1)) & 3
    return x1 ^ x2, z1 ^ z2, p


def _commutes_raw(x1: int, z1: int, x2: int, z2: int) -> bool:
    return ((x1 & z2).bit_count() + (z1 & x2).bit_count()) & 1 == 0


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli word with a tracked phase in {+1, -1, +i, -i}.

    The operator is ``phase * W`` where ``W`` is the tensor product of
    I/X/Y/Z letters encoded by the ``x``/``z`` bitmasks, so ``i_pow`` is the
    phase as a power of i.
    """

    n_qubits: int
    x: int
    z: int
    i_pow: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("need at least one qubit")
        limit = 1 << self.n_qubits
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError("bitmask exceeds qubit count")
        if self.i_pow not in (0, 1, 2, 3):
            raise ValueError("phase must be a power of i in 0..3")

    @classmethod
    def from_label(cls, label: str, phase: complex = 1.0) -> "PauliString":
        x = z = 0
        for q, letter in enumerate(label.upper()):
            try:
                xb, zb = _LETTER_BITS[letter]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {letter!r}") from None
            x |= xb << q
            z |= zb << q
        i_pow = min(range(4), key=lambda k: abs(_PHASES[k] - phase))
        if abs(_PHASES[i_pow] - phase) > 1e-12:
            raise ValueError(f"phase {phase!r} is not a power of i")
        return cls(len(label), x, z, i_pow)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0, 0)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str) -> "PauliString":
        xb, zb = _LETTER_BITS[letter.upper()]
        return cls(n_qubits, xb << qubit, zb << qubit)

    @property
    def phase(self) -> complex:
        return _PHASES[self.i_pow]

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def letter(self, qubit: int) -> str:
        return _BITS_LETTER[((self.x >> qubit) & 1, (self.z >> qubit) & 1)]

    def label(self) -> str:
        return "".join(self.letter(q) for q in range(self.n_qubits))

    def raw(self) -> tuple[int, int, int]:
        """Symplectic triple in the raw convention i^p * X^x * Z^z."""
        p = (self.i_pow + ((self.x & self.z).bit_count() & 3)) & 3
        return self.x, self.z, p

    @classmethod
    def from_raw(cls, n_qubits: int, x: int, z: int, p: int) -> "PauliString":
        i_pow = (p - ((x & z).bit_count() & 3)) & 3
        return cls(n_qubits, x, z, i_pow)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_multiply(self, other)

    def commutes(self, other: "PauliString") -> bool:
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit counts differ")
        return _commutes_raw(self.x, self.z, other.x, other.z)

    def dense(self) -> np.ndarray:
        """Dense matrix (qubit 0 least significant); meant for small n."""
        mat = np.array([[1.0 + 0.0j]])
        for q in range(self.n_qubits):
            mat = np.kron(_PAULI_MATS[self.letter(q)], mat)
        return self.phase * mat

    def __repr__(self) -> str:
        sign = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.i_pow]
        return f"{sign}{self.label()}"


def pauli_multiply(p: PauliString, q: PauliString) -> PauliString:
    """Product ``p * q`` with exact phase tracking."""
    if p.n_qubits != q.n_qubits:
        raise ValueError("qubit counts differ")
    x1, z1, p1 = p.raw()
    x2, z2, p2 = q.raw()
    x, z, ph = _mul_raw(x1, z1, p1, x2, z2, p2)
    return PauliString.from_raw(p.n_qubits, x, z, ph)


def commutation_sign(q: PauliString, o: PauliString) -> int:
    """+1 when ``q`` and ``o`` commute, -1 when they anticommute."""
    if q.n_qubits != o.n_qubits:
        raise ValueError("qubit counts differ")
    return 1 if q.commutes(o) else -1


def qubitwise_compatible(p: PauliString, q: PauliString) -> bool:
    """True when on every qubit the letters agree or one side is identity."""
    both = (p.x | p.z) & (q.x | q.z)
    return ((p.x ^ q.x) | (p.z ^ q.z)) & both == 0


@dataclass(frozen=True)
class Observable:
    """A real-weighted sum of Pauli words on a fixed qubit register."""

    n_qubits: int
    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        for coef, pauli in self.terms:
            if pauli.n_qubits != self.n_qubits:
                raise ValueError("term qubit count mismatch")
            if not np.isfinite(coef):
                raise ValueError("coefficients must be finite")
            if pauli.i_pow not in (0, 2):
                raise ValueError("observable terms must carry a real phase")

    @classmethod
    def from_terms(cls, pairs, n_qubits: int | None = None) -> "Observable":
        pairs = tuple((float(c), p) for c, p in pairs)
        if not pairs and n_qubits is None:
            raise ValueError("empty observable needs an explicit qubit count")
        n = n_qubits if n_qubits is not None else pairs[0][1].n_qubits
        return cls(n, pairs)

    @property
    def l1_norm(self) -> float:
        """Sum of |coefficient| * |phase|; an upper bound on the spectral norm."""
        return float(sum(abs(c) for c, _ in self.terms))

    def signed_terms(self):
        """Terms folded to (+|coef| or -|coef|, positive-phase word)."""
        for coef, pauli in self.terms:
            sign = 1.0 if pauli.i_pow == 0 else -1.0
            yield coef * sign, PauliString(pauli.n_qubits, pauli.x, pauli.z, 0)

    def dense(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        for coef, pauli in self.terms:
            mat += coef * pauli.dense()
        return mat

    def to_text(self) -> str:
        lines = [f"{coef:.17g} {pauli.label()}" for coef, pauli in self.signed_terms()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Observable":
        pairs = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected '<coef> <pauli-word>'")
            pairs.append((float(parts[0]), PauliString.from_label(parts[1])))
        if not pairs:
            raise ValueError("no observable terms found")
        n = pairs[0][1].n_qubits
        return cls.from_terms(pairs, n_qubits=n)


def group_commuting(obs: Observable) -> list[list[int]]:
    """Partition term indices into qubit-wise compatible groups.

    Greedy first-fit in term order: each term joins the first group whose
    members it is qubit-wise compatible with, so every group shares a single
    product measurement basis.
    """
    if not obs.terms:
        raise ValueError("observable has no terms")
    groups: list[list[int]] = []
    for idx, (_, pauli) in enumerate(obs.terms):
        for group in groups:
            if all(qubitwise_compatible(pauli, obs.terms[j][1]) for j in group):
                group.append(idx)
                break
        else:
            groups.append([idx])
    return groups


def group_measurement_basis(obs: Observable, group: list[int]) -> dict[int, str]:
    """Per-qubit measurement letter shared by a qubit-wise compatible group.

    Qubits untouched by the group are omitted (any basis works for them).
    """
    basis: dict[int, str] = {}
    for idx in group:
        pauli = obs.terms[idx][1]
        for q in range(obs.n_qubits):
            letter = pauli.letter(q)
            if letter == "I":
                continue
            if basis.setdefault(q, letter) != letter:
                raise ValueError("group is not qubit-wise compatible")
    return basis


@dataclass(frozen=True)
class LatticeGraph:
    """Vertex/edge list for the interaction graphs used by the ansatz families."""

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    kind: str = "custom"
    dims: tuple[int, int] | None = field(default=None)

    def __post_init__(self):
        for a, b in self.edges:
            if not (0 <= a < self.n_vertices and 0 <= b < self.n_vertices) or a == b:
                raise ValueError(f"edge ({a},{b}) references invalid vertices")

    @classmethod
    def line(cls, n: int) -> "LatticeGraph":
        if n < 1:
            raise ValueError("line needs at least one vertex")
        return cls(n, tuple((i, i + 1) for i in range(n - 1)), kind="line")

    @classmethod
    def grid(cls, n1: int, n2: int) -> "LatticeGraph":
        """n1 x n2 grid; vertex (r, c) has index r * n2 + c.

        Edges are listed brickwork-style (horizontal even/odd columns, then
        vertical even/odd rows) so ansatz layers can consume them directly.
        """
        if n1 < 1 or n2 < 1:
            raise ValueError("grid dimensions must be positive")
        edges = [e for layer in grid_brickwork_layers(n1, n2) for e in layer]
        return cls(n1 * n2, tuple(edges), kind="grid", dims=(n1, n2))


def grid_brickwork_layers(n1: int, n2: int) -> list[list[tuple[int, int]]]:
    """Grid edges split into the four brickwork sublayers (empty ones dropped)."""

    def vid(r: int, c: int) -> int:
        return r * n2 + c

    layers = []
    for parity in (0, 1):  # horizontal: within a row, varying column
        layer = [
            (vid(r, c), vid(r, c + 1))
            for r in range(n1)
            for c in range(parity, n2 - 1, 2)
        ]
        if layer:
            layers.append(layer)
    for parity in (0, 1):  # vertical: within a column, varying row
        layer = [
            (vid(r, c), vid(r + 1, c))
            for r in range(parity, n1 - 1, 2)
            for c in range(n2)
        ]
        if layer:
            layers.append(layer)
    return layers


def build_tfi(graph: LatticeGraph, coupling: float, field_strength: float) -> Observable:
    """Transverse-field Ising observable: -J ZZ per edge, -h X per vertex.

    Zero-coefficient terms are dropped so e.g. h=0 leaves only couplings.
    """
    if graph.n_vertices == 0:
        raise ValueError("empty graph")
    n = graph.n_vertices
    pairs = []
    if coupling != 0.0:
        for a, b in graph.edges:
            word = PauliString(n, 0, (1 << a) | (1 << b))
            pairs.append((-coupling, word))
    if field_strength != 0.0:
        for v in range(n):
            pairs.append((-field_strength, PauliString(n, 1 << v, 0)))
    if not pairs:
        raise ValueError("TFI observable has no terms (J = h = 0)")
    return Observable.from_terms(pairs, n_qubits=n)
