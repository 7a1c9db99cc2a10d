"""Dataset assembly, linear / L1-constrained fitting, and sample planning.

The Lasso here solves the constrained form

    minimize (1/T) ||X c - y||^2   subject to  ||c||_1 <= gamma

by monotone accelerated projected gradient with exact Euclidean projection
onto the L1 ball, which stays dependency-free and handles thousands of
feature columns.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import exact, features, tableau
from .circuits import Circuit, is_clifford
from .neighbors import NeighborMap
from .noise import NoiseModel
from .paulis import Observable
from .sampler import ShotPlan

OLS_RCOND = 1e-10
LASSO_TOL = 1e-12
LASSO_MAX_ITER = 100_000


@dataclass
class Dataset:
    """Feature matrix (rows = circuits, columns = neighbors) with exact labels."""

    features: np.ndarray
    labels: np.ndarray
    meta: dict = field(default_factory=dict)
    feature_variances: np.ndarray | None = None

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=float))
        self.labels = np.asarray(self.labels, dtype=float)
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("feature rows and labels disagree")
        if not (np.all(np.isfinite(self.features)) and np.all(np.isfinite(self.labels))):
            raise ValueError("dataset entries must be finite")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow([f"x_{j}" for j in range(self.n_features)] + ["y"])
        for row, label in zip(self.features, self.labels):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(label))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Dataset":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        if header[-1] != "y":
            raise ValueError("last CSV column must be the label 'y'")
        data = np.array([[float(v) for v in row] for row in body])
        return cls(data[:, :-1], data[:, -1])


def _collect_row(circuit, nmap, model, obs, plan, cap, spawn_key):
    x, v = features.features_with_variance(
        circuit, nmap, model, obs, plan, cap=cap, spawn_key=spawn_key
    )
    if is_clifford(circuit):
        y = tableau.clifford_ideal_expectation(circuit, obs)
    else:
        y = exact.ideal_expectation(circuit, obs, cap=cap)
    return x, v, y


def _collect_chunk(payload):
    indices, circuits, nmap, model, obs, plan, cap, spawn_base = payload
    return [
        (i, *_collect_row(c, nmap, model, obs, plan, cap, spawn_base + (i,)))
        for i, c in zip(indices, circuits)
    ]


def collect_dataset(
    circuits: list[Circuit],
    nmap: NeighborMap,
    model: NoiseModel,
    obs: Observable,
    plan: ShotPlan | None = None,
    cap: int = exact.DEFAULT_QUBIT_CAP,
    spawn_base: tuple[int, ...] = (0,),
    meta: dict | None = None,
    n_workers: int | None = None,
) -> Dataset:
    """Features from every neighbor of every circuit, labels from ideal runs.

    Labels use tableau propagation for Clifford circuits and the statevector
    engine otherwise (which bounds the usable qubit count by ``cap``).  Rows
    carry their own seed streams keyed by row index, so the result is
    identical for any worker count.
    """
    n_rows = len(circuits)
    x = np.zeros((n_rows, len(nmap.specs)))
    variances = np.zeros_like(x)
    y = np.zeros(n_rows)
    if n_workers and n_workers > 1 and n_rows > 1:
        from concurrent.futures import ProcessPoolExecutor

        splits = np.array_split(np.arange(n_rows), min(n_workers * 4, n_rows))
        payloads = [
            (
                [int(i) for i in idx],
                [circuits[int(i)] for i in idx],
                nmap, model, obs, plan, cap, spawn_base,
            )
            for idx in splits
            if idx.size
        ]
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for rows in pool.map(_collect_chunk, payloads):
                for i, xi, vi, yi in rows:
                    x[i], variances[i], y[i] = xi, vi, yi
    else:
        for i, circuit in enumerate(circuits):
            x[i], variances[i], y[i] = _collect_row(
                circuit, nmap, model, obs, plan, cap, spawn_base + (i,)
            )
    info = dict(meta or {})
    info.setdefault("shots", None if plan is None else plan.total_shots)
    info.setdefault("map_kind", nmap.kind)
    return Dataset(x, y, meta=info, feature_variances=variances)


@dataclass
class Estimator:
    """A linear combiner c with optional L1 budget and solver diagnostics."""

    coeffs: np.ndarray
    gamma: float | None = None
    report: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.gamma is not None and self.l1_norm > self.gamma + 1e-9:
            raise ValueError("coefficients violate the L1 budget")

    @property
    def l1_norm(self) -> float:
        return float(np.abs(self.coeffs).sum())

    def to_json(self) -> str:
        return json.dumps(
            {
                "gamma": self.gamma,
                "coeffs": self.coeffs.tolist(),
                "report": self.report,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Estimator":
        obj = json.loads(text)
        return cls(np.array(obj["coeffs"]), obj.get("gamma"), obj.get("report", {}))


def predict(est: Estimator, feature_vec: np.ndarray) -> float:
    feature_vec = np.asarray(feature_vec, dtype=float)
    if feature_vec.shape[-1] != est.coeffs.shape[0]:
        raise ValueError("feature length does not match the estimator")
    return float(feature_vec @ est.coeffs)


def evaluate_mse(est: Estimator, data: Dataset) -> float:
    if data.n_features != est.coeffs.shape[0]:
        raise ValueError("estimator and dataset column counts differ")
    resid = data.features @ est.coeffs - data.labels
    return float(np.mean(resid**2))


def fit_ols(data: Dataset) -> Estimator:
    """Least squares via SVD pseudoinverse (rank cutoff 1e-10 relative)."""
    coeffs, _, rank, _ = np.linalg.lstsq(data.features, data.labels, rcond=OLS_RCOND)
    resid = data.features @ coeffs - data.labels
    report = {
        "solver": "ols-pinv",
        "rank": int(rank),
        "objective": float(np.mean(resid**2)),
    }
    return Estimator(coeffs, gamma=None, report=report)


def project_l1_ball(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto {c : ||c||_1 <= radius} (sort-based, exact)."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    mags = np.abs(v)
    if mags.sum() <= radius:
        return v.copy()
    u = np.sort(mags)[::-1]
    cumulative = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, v.size + 1) > (cumulative - radius))[0][-1]
    theta = (cumulative[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.clip(mags - theta, 0.0, None)


def fit_lasso(data: Dataset, gamma: float) -> Estimator:
    """L1-ball-constrained least squares by monotone accelerated projected
    gradient with backtracking; the objective never increases across
    iterations and the feasibility ||c||_1 <= gamma is exact."""
    if gamma <= 0:
        raise ValueError("the L1 budget must be positive")
    x = data.features
    y = data.labels
    t_rows, n = x.shape

    use_gram = t_rows >= n or n <= 4096
    if use_gram:
        gram = (x.T @ x) / t_rows
        cross = (x.T @ y) / t_rows
        label_sq = float(y @ y) / t_rows

        def objective(c):
            return float(c @ (gram @ c) - 2.0 * (cross @ c) + label_sq)

        def gradient(c):
            return 2.0 * (gram @ c - cross)

    else:

        def objective(c):
            r = x @ c - y
            return float(r @ r) / t_rows

        def gradient(c):
            return 2.0 * (x.T @ (x @ c - y)) / t_rows

    c = np.zeros(n)
    momentum = c.copy()
    t_acc = 1.0
    step = 1.0
    f_c = objective(c)
    small_streak = 0
    converged = False
    n_iter = 0
    for n_iter in range(1, LASSO_MAX_ITER + 1):
        step *= 1.2  # let the step recover between backtracks
        grad = gradient(momentum)
        f_m = objective(momentum)
        while True:
            cand = project_l1_ball(momentum - step * grad, gamma)
            diff = cand - momentum
            quad = f_m + grad @ diff + (diff @ diff) / (2.0 * step)
            f_cand = objective(cand)
            if f_cand <= quad + 1e-15 or step < 1e-18:
                break
            step *= 0.5
        if f_cand > f_c:
            # momentum overshot: restart acceleration from the best iterate
            momentum = c.copy()
            t_acc = 1.0
            small_streak = 0
            continue
        rel_change = (f_c - f_cand) / max(abs(f_c), 1e-30)
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_acc * t_acc))
        momentum = cand + ((t_acc - 1.0) / t_next) * (cand - c)
        t_acc = t_next
        c, f_c = cand, f_cand
        small_streak = small_streak + 1 if rel_change < LASSO_TOL else 0
        if small_streak >= 3:
            converged = True
            break

    residual = float(
        np.linalg.norm(c - project_l1_ball(c - step * gradient(c), gamma)) / max(step, 1e-30)
    )
    report = {
        "solver": "projected-gradient",
        "iterations": n_iter,
        "objective": f_c,
        "stationarity_residual": residual,
        "converged": converged,
    }
    return Estimator(c, gamma=gamma, report=report)


@dataclass
class Moments:
    """Empirical second-moment summary of a dataset."""

    second_moment: np.ndarray
    cross_moment: np.ndarray
    label_second_moment: float
    shot_variance_diag: np.ndarray

    def quadratic_objective(self, coeffs: np.ndarray) -> float:
        c = np.asarray(coeffs)
        return float(
            c @ (self.second_moment @ c)
            - 2.0 * (self.cross_moment @ c)
            + self.label_second_moment
        )


def moments(data: Dataset) -> Moments:
    """A = mean(x x^T), b = mean(y x), plus the shot-noise diagonal when the
    sampler recorded per-feature estimator variances."""
    if data.n_rows < 1:
        raise ValueError("need at least one row")
    x = data.features
    second = (x.T @ x) / data.n_rows
    cross = (x.T @ data.labels) / data.n_rows
    label_sq = float(data.labels @ data.labels) / data.n_rows
    if data.feature_variances is not None:
        shot_diag = np.asarray(data.feature_variances).mean(axis=0)
    else:
        shot_diag = np.zeros(data.n_features)
    return Moments(second, cross, label_sq, shot_diag)


def plan_training_size(
    n_neighbors: int, delta: float, gamma: float, obs_norm: float, epsilon: float
) -> int:
    """Worst-case training-set size guaranteeing epsilon-optimal loss whp."""
    if min(n_neighbors, gamma, obs_norm, epsilon) <= 0 or not 0 < delta < 1:
        raise ValueError("arguments must be positive with delta in (0, 1)")
    bound = (
        math.log(6.0 * n_neighbors**2 / delta)
        * (12.0 * gamma**2 * obs_norm**2) ** 2
        / epsilon**2
    )
    return math.ceil(bound)


def empirical_training_size(n_neighbors: int, gamma: float, epsilon: float) -> int:
    """Observed convergence scaling: 2 * gamma * ln(N) / sqrt(epsilon)."""
    if min(n_neighbors, gamma, epsilon) <= 0:
        raise ValueError("arguments must be positive")
    return math.ceil(2.0 * gamma * math.log(n_neighbors) / math.sqrt(epsilon))


def chebyshev_envelope(train_mse: float, k: float) -> tuple[float, float]:
    """Single-instance error threshold with its confidence level.

    With training MSE ``eps``, any fixed configuration deviates by more than
    (k+1) * sqrt(eps) with probability at most 1/k^2.
    """
    if train_mse < 0 or k <= 1:
        raise ValueError("need train_mse >= 0 and k > 1")
    return ((k + 1.0) * math.sqrt(train_mse), 1.0 - 1.0 / (k * k))
