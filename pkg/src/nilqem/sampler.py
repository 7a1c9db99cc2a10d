"""Shot-sampled noisy estimates for Clifford circuits with Pauli noise.

Per (circuit, commuting group) a measurement plan is prepared once: the
group's basis change is appended, every channel's possible errors are
propagated to the end of the circuit, and the final stabilizer state's
computational-basis support is solved as an affine GF(2) subspace.  A shot
then only needs coin flips for the free subspace directions plus sampled
channel errors, both of which reduce to parity flips on the group's term
outcomes, so sampling vectorizes over shots.

Pauli-insertion neighbors reuse the same plan: the inserted Pauli propagates
to a fixed end-of-circuit frame that just flips the deterministic part of
each term's outcome.  Noise-scaled neighbors reuse the plan with reweighted
channel probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Gate, is_clifford
from .noise import NoisyCircuit, PauliChannel
from .paulis import Observable, group_commuting, group_measurement_basis, _mul_raw
from . import cliffords
from .tableau import NonCliffordError, stabilizer_affine_support, suffix_images

_BASIS_CHANGE_NAME = {
    "X": "H",
    "Y": cliffords.CLIFFORD1_NAMES[
        cliffords.clifford1_index(
            cliffords.clifford1_matrix("H") @ cliffords.clifford1_matrix("SDG")
        )
    ],
}


@dataclass(frozen=True)
class ShotPlan:
    """Total measurement budget for one neighbor-circuit estimate.

    The budget is split equally across commuting groups, any remainder going
    to the first groups.
    """

    total_shots: int
    seed: int = 0

    def group_shots(self, n_groups: int) -> list[int]:
        if self.total_shots < n_groups:
            raise ValueError("need at least one shot per commuting group")
        base, extra = divmod(self.total_shots, n_groups)
        return [base + (1 if g < extra else 0) for g in range(n_groups)]


class GroupPlan:
    """Sampling plan for one commuting group of one noisy Clifford circuit."""

    def __init__(self, noisy: NoisyCircuit, obs: Observable, group: list[int]):
        n = noisy.n_qubits
        basis = group_measurement_basis(obs, group)
        end_gates = tuple(
            Gate.c1(_BASIS_CHANGE_NAME[letter], q)
            for q, letter in sorted(basis.items())
            if letter != "Z"
        )
        smap, records = suffix_images(noisy, end_gates=end_gates)
        self.records = records
        support = stabilizer_affine_support(
            [smap.row("Z", q) for q in range(n)], n
        )

        self.term_masks = [
            obs.terms[idx][1].x | obs.terms[idx][1].z for idx in group
        ]
        self.coefs = np.array([obs.terms[idx][0] for idx in group])
        signs = np.array(
            [1.0 if obs.terms[idx][1].i_pow == 0 else -1.0 for idx in group]
        )
        self.coefs = self.coefs * signs
        self.det_signs = np.array(
            [
                -1.0 if (support.shift & mask).bit_count() & 1 else 1.0
                for mask in self.term_masks
            ]
        )
        self.free_matrix = np.array(
            [
                [(vec & mask).bit_count() & 1 for mask in self.term_masks]
                for vec in support.basis
            ],
            dtype=np.float32,
        ).reshape(len(support.basis), len(group))

        # flattened channel-error tables: for channel c the cumulative error
        # probabilities live in flat_cums[start[c]:start[c]+n_err[c]], offset
        # by c so the whole array is strictly increasing for searchsorted.
        self.channel_indices: list[int] = []
        self.channel_objects: list[PauliChannel] = []
        pi_rows: list[list[int]] = []
        for i, channel in enumerate(noisy.channels):
            if channel is None:
                continue
            self.channel_indices.append(i)
            self.channel_objects.append(channel)
            k = channel.k
            for idx in range(1, 1 << (2 * k)):
                xs, zs = idx & ((1 << k) - 1), idx >> k
                img_x = 0
                for j, q in enumerate(channel.qubits):
                    rx, rz = records[i][q]
                    if (xs >> j) & 1:
                        img_x ^= rx[0]
                    if (zs >> j) & 1:
                        img_x ^= rz[0]
                pi_rows.append(
                    [(img_x & mask).bit_count() & 1 for mask in self.term_masks]
                )
        self.pi = np.array(pi_rows, dtype=np.uint8).reshape(
            len(pi_rows), len(group)
        )
        # byte-packed parity rows keep the per-shot XOR accumulation small
        self.pi_packed = np.packbits(self.pi, axis=1)
        self._base_tables = self._error_tables(self.channel_objects)

    def _error_tables(self, channel_objects):
        # float32 thresholds match the float32 uniforms drawn per shot; the
        # <= 1e-7 relative rounding of event probabilities is far below any
        # statistical resolution reachable here.  Cumulatives are capped at
        # the float32 threshold so accepted uniforms always fall inside the
        # channel's own searchsorted range.
        ptot = np.zeros(len(channel_objects), dtype=np.float32)
        flat_cums = []
        for c, channel in enumerate(channel_objects):
            cums = np.cumsum(np.asarray(channel.probs[1:]))
            if cums.size:
                ptot[c] = np.float32(cums[-1])
                cums = np.minimum(cums, np.float64(ptot[c]))
            flat_cums.append(cums + c)
        flat = np.concatenate(flat_cums) if flat_cums else np.empty(0)
        return ptot, ptot.astype(np.float64), flat

    def rescaled_tables(self, alpha: float):
        from .noise import amplify_channel

        return self._error_tables(
            [amplify_channel(ch, alpha) for ch in self.channel_objects]
        )

    def insertion_flip(self, insertions) -> np.ndarray:
        """Outcome parity flips caused by inserted Paulis, one per term.

        ``insertions`` holds (gate_index, qubit, letter) triples; the letters
        propagate independently to the circuit end and their X-parts combine.
        """
        from .paulis import _LETTER_BITS

        img_x = 0
        for gate_index, qubit, letter in insertions:
            xb, zb = _LETTER_BITS[letter.upper()]
            rx, rz = self.records[gate_index][qubit]
            if xb:
                img_x ^= rx[0]
            if zb:
                img_x ^= rz[0]
        return np.array(
            [(img_x & mask).bit_count() & 1 for mask in self.term_masks],
            dtype=np.uint8,
        )

    def estimate(
        self,
        shots: int,
        rng: np.random.Generator,
        sign_flips: np.ndarray | None = None,
        tables=None,
    ) -> tuple[float, float]:
        """Monte Carlo estimate of the group's contribution to <O>.

        Returns (mean, variance-of-the-mean).  ``sign_flips`` toggles the
        deterministic outcome parities (Pauli insertions); ``tables``
        substitutes rescaled channel probabilities (noise scaling).
        """
        n_terms = len(self.term_masks)
        det = self.det_signs if sign_flips is None else self.det_signs * (
            1.0 - 2.0 * sign_flips.astype(float)
        )
        ptot, ptot64, flat_cums = self._base_tables if tables is None else tables

        nb = self.free_matrix.shape[0]
        if nb:
            coins = rng.integers(0, 2, size=(shots, nb), dtype=np.uint8)
            s1 = (coins.astype(np.float32) @ self.free_matrix).astype(np.int32) & 1
            parity = s1.astype(np.uint8)
        else:
            parity = np.zeros((shots, n_terms), dtype=np.uint8)

        n_ch = len(self.channel_indices)
        if n_ch:
            # error events are sparse: draw a binomial count per channel and
            # place the events on a uniformly random distinct shot subset
            # (iid draws with duplicate resampling; exact by exchangeability)
            counts = rng.binomial(shots, ptot64)
            total = int(counts.sum())
            if total:
                ev_ch = np.repeat(np.arange(n_ch, dtype=np.int32), counts)
                ev_shot = rng.integers(0, shots, size=total, dtype=np.int32)
                key = ev_shot * np.int32(n_ch) + ev_ch
                for _ in range(200):
                    order = np.argsort(key, kind="stable")
                    sk = key[order]
                    dup = order[1:][sk[1:] == sk[:-1]]
                    if dup.size == 0:
                        break
                    ev_shot[dup] = rng.integers(0, shots, size=dup.size, dtype=np.int32)
                    key[dup] = ev_shot[dup] * np.int32(n_ch) + ev_ch[dup]
                else:
                    raise RuntimeError("error-position resampling failed to settle")
                queries = rng.random(total) * ptot64[ev_ch] + ev_ch
                # flat_cums index == pi row index by construction
                flat_idx = np.searchsorted(flat_cums, queries, side="right")
                err_rows = self.pi_packed[flat_idx[order]]
                ev_shot = ev_shot[order]
                seg = np.flatnonzero(
                    np.r_[True, ev_shot[1:] != ev_shot[:-1]]
                )
                xor = np.bitwise_xor.reduceat(err_rows, seg, axis=0)
                flips = np.unpackbits(xor, axis=1, count=n_terms)
                parity[ev_shot[seg]] ^= flips

        signs = 1.0 - 2.0 * parity.astype(np.float32)
        per_shot = signs @ (self.coefs * det).astype(np.float32)
        mean = float(per_shot.mean())
        var = float(per_shot.var(ddof=1)) / shots if shots > 1 else 0.0
        return mean, var


def build_group_plans(noisy: NoisyCircuit, obs: Observable) -> list[GroupPlan]:
    if not is_clifford(noisy.circuit):
        raise NonCliffordError("shot sampler requires a Clifford circuit")
    return [GroupPlan(noisy, obs, group) for group in group_commuting(obs)]


def sample_noisy_estimate(
    noisy: NoisyCircuit,
    obs: Observable,
    plan: ShotPlan,
    rng: np.random.Generator | None = None,
) -> float:
    """Unbiased shot-sampled estimate of the noisy expectation value."""
    plans = build_group_plans(noisy, obs)
    shots = plan.group_shots(len(plans))
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(plan.seed))
    total = 0.0
    for gplan, s in zip(plans, shots):
        mean, _ = gplan.estimate(s, rng)
        total += mean
    return total
