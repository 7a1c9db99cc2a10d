"""Single-qubit Clifford catalogue and Pauli conjugation tables for gates.

The 24 phase-distinct single-qubit Cliffords are generated by closing
{H, S} under multiplication and deduplicating up to global phase.  Every
Clifford gate in the circuit IR resolves here to a unitary matrix plus a
lookup table describing how it conjugates Pauli operators, computed
numerically once and cached.
"""

from __future__ import annotations

import numpy as np

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_PAULI1 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _canonical_phase(mat: np.ndarray) -> np.ndarray:
    flat = mat.ravel()
    pivot = flat[np.argmax(np.abs(flat) > 1e-8)]
    return mat * (abs(pivot) / pivot)


def _key(mat: np.ndarray) -> tuple:
    canon = _canonical_phase(mat)
    return tuple(np.round(canon.ravel(), 9).tolist())


def _build_clifford1() -> list[np.ndarray]:
    seen = {_key(np.eye(2, dtype=complex)): 0}
    elements = [np.eye(2, dtype=complex)]
    frontier = [np.eye(2, dtype=complex)]
    while frontier:
        nxt = []
        for mat in frontier:
            for gen in (_H, _S):
                cand = _canonical_phase(gen @ mat)
                k = _key(cand)
                if k not in seen:
                    seen[k] = len(elements)
                    elements.append(cand)
                    nxt.append(cand)
        frontier = nxt
    if len(elements) != 24:  # closure sanity; the group has exactly 24 elements
        raise RuntimeError(f"single-qubit Clifford closure produced {len(elements)} elements")
    return elements


CLIFFORD1_MATRICES: list[np.ndarray] = _build_clifford1()
CLIFFORD1_NAMES: list[str] = [f"c{i:02d}" for i in range(24)]

_INDEX_BY_KEY = {_key(m): i for i, m in enumerate(CLIFFORD1_MATRICES)}


def clifford1_index(mat: np.ndarray) -> int:
    """Index of a single-qubit unitary within the 24-element set (phase ignored)."""
    try:
        return _INDEX_BY_KEY[_key(mat)]
    except KeyError:
        raise ValueError("matrix is not a single-qubit Clifford") from None


_K = _S @ _H  # the 'K' gate used by the CPTP insertion basis

CLIFFORD1_ALIASES: dict[str, int] = {
    "I": clifford1_index(np.eye(2, dtype=complex)),
    "X": clifford1_index(_PAULI1["X"]),
    "Y": clifford1_index(_PAULI1["Y"]),
    "Z": clifford1_index(_PAULI1["Z"]),
    "H": clifford1_index(_H),
    "S": clifford1_index(_S),
    "SDG": clifford1_index(_S.conj().T),
    "K": clifford1_index(_K),
    "KDG": clifford1_index(_K.conj().T),
}


def resolve_clifford1(name: str) -> int:
    name = name.strip()
    upper = name.upper()
    if upper in CLIFFORD1_ALIASES:
        return CLIFFORD1_ALIASES[upper]
    if name.lower().startswith("c"):
        try:
            idx = int(name[1:])
        except ValueError:
            raise ValueError(f"unknown Clifford name {name!r}") from None
        if 0 <= idx < 24:
            return idx
    raise ValueError(f"unknown Clifford name {name!r}")


def clifford1_matrix(name: str) -> np.ndarray:
    return CLIFFORD1_MATRICES[resolve_clifford1(name)]


CLIFFORD1_INVERSE_INDEX: list[int] = [
    clifford1_index(m.conj().T) for m in CLIFFORD1_MATRICES
]


def cptp_basis_gate_names() -> list[str]:
    """The nine-gate insertion alphabet extending {X, Y, Z} to a CPTP basis.

    All members are single-qubit Cliffords; they are returned as canonical
    names from the 24-element catalogue, in a fixed order.
    """
    kd = _K.conj().T
    sd = _S.conj().T
    mats = [
        _PAULI1["X"],
        _PAULI1["Y"],
        _PAULI1["Z"],
        kd @ sd @ _K,
        _K @ sd @ kd,
        sd,
        _K @ _H @ kd,
        _H,
        kd @ _H @ _K,
    ]
    return [CLIFFORD1_NAMES[clifford1_index(m)] for m in mats]


def rotation_matrix(axis: str, theta: float) -> np.ndarray:
    """exp(-i theta P / 2) for a single-qubit Pauli axis."""
    try:
        pauli = _PAULI1[axis.upper()]
    except KeyError:
        raise ValueError(f"invalid rotation axis {axis!r}") from None
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * pauli


def rotation2_matrix(theta: float) -> np.ndarray:
    """exp(-i theta (Z x Z) / 2); local index = bit0 + 2*bit1."""
    zz = np.diag([1.0, -1.0, -1.0, 1.0])
    return np.cos(theta / 2) * np.eye(4) - 1j * np.sin(theta / 2) * zz


def cz_matrix() -> np.ndarray:
    return np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)


def cnot_matrix() -> np.ndarray:
    """CNOT with control = local qubit 0, target = local qubit 1."""
    mat = np.zeros((4, 4), dtype=complex)
    for c in (0, 1):
        for t in (0, 1):
            mat[c + 2 * (t ^ c), c + 2 * t] = 1.0
    return mat


def raw_pauli_matrix(x: int, z: int, k: int) -> np.ndarray:
    """Dense matrix of X^x Z^z on k qubits (raw convention, local bit q = qubit q)."""
    dim = 1 << k
    mat = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    signs = np.array([(-1.0) ** ((c & z).bit_count() & 1) for c in cols])
    mat[cols ^ x, cols] = signs
    return mat


def conj_table(unitary: np.ndarray) -> dict[tuple[int, int], tuple[int, int, int]]:
    """Images (x', z', p) of every raw local Pauli X^x Z^z under U . U^dag.

    The image satisfies U X^x Z^z U^dag = i^p X^x' Z^z'; raises if the
    unitary is not Clifford on its support.
    """
    k = int(np.log2(unitary.shape[0]))
    candidates = [(x, z, raw_pauli_matrix(x, z, k)) for x in range(1 << k) for z in range(1 << k)]
    table: dict[tuple[int, int], tuple[int, int, int]] = {}
    for x in range(1 << k):
        for z in range(1 << k):
            img = unitary @ raw_pauli_matrix(x, z, k) @ unitary.conj().T
            for xc, zc, cand in candidates:
                pivot = np.argmax(np.abs(cand) > 1e-9)
                r, c = divmod(int(pivot), cand.shape[1])
                if abs(img[r, c]) < 1e-9:
                    continue
                ratio = img[r, c] / cand[r, c]
                if np.allclose(img, ratio * cand, atol=1e-9):
                    p = int(np.argmin([abs(ratio - 1j**t) for t in range(4)]))
                    if abs(ratio - 1j**p) > 1e-9:
                        raise ValueError("gate is not Clifford (non-unit Pauli phase)")
                    table[(x, z)] = (xc, zc, p)
                    break
            else:
                raise ValueError("gate is not Clifford (image is not a Pauli)")
    return table
