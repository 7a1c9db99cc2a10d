"""Configuration-driven experiment orchestration.

A single JSON config describes circuit family, observable, noise, neighbor
map, training generator, dataset sizes, shot budget, solver, and seeds; the
command functions build reproducible pipelines from it.  Randomness is
derived from three independent seed streams (circuit generation, shot
sampling, subset selection) so ablations can vary one source at a time.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import exact, learning, verify, zne
from .circuits import (
    AnsatzSpec,
    Circuit,
    bind_uniform,
    build_ansatz,
    gen_training_2design,
    gen_training_all_clifford,
    gen_training_mixed,
)
from .learning import Dataset, Estimator, collect_dataset, evaluate_mse, fit_lasso, fit_ols
from .neighbors import (
    NeighborMap,
    cptp_map,
    random_subset_map,
    weight1_pauli_map,
    weightk_pauli_map,
    zne_map,
    zne_plus_pauli_map,
)
from .noise import NoiseModel
from .paulis import LatticeGraph, Observable, build_tfi
from .sampler import ShotPlan

_TRAIN_STREAM = 0
_TEST_STREAM = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    circuit: dict
    observable: dict = field(default_factory=lambda: {"kind": "tfi"})
    noise: dict = field(default_factory=dict)
    neighbors: dict = field(default_factory=lambda: {"kind": "pauli-w1"})
    generator: dict = field(default_factory=lambda: {"kind": "2design"})
    train_size: int = 5000
    test_size: int = 1000
    shots: dict = field(default_factory=lambda: {"mode": "exact"})
    solver: dict = field(default_factory=lambda: {"kind": "lasso"})
    seeds: dict = field(default_factory=lambda: {"circuits": 0, "shots": 0, "subset": 0})
    qubit_cap: int = exact.DEFAULT_QUBIT_CAP

    def __post_init__(self):
        if self.train_size < 0 or self.test_size < 0:
            raise ConfigError("dataset sizes must be non-negative")
        for key in ("circuits", "shots", "subset"):
            if key not in self.seeds:
                raise ConfigError(f"missing seed stream {key!r}")
        if self.shots.get("mode") not in ("exact", "sampled"):
            raise ConfigError("shots.mode must be 'exact' or 'sampled'")
        if self.shots["mode"] == "sampled" and int(self.shots.get("total", 0)) < 1:
            raise ConfigError("sampled mode needs shots.total >= 1")

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "circuit" not in obj:
            raise ConfigError("config needs a 'circuit' block")
        return cls(**obj)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text())

    def to_dict(self) -> dict:
        return {
            "circuit": self.circuit,
            "observable": self.observable,
            "noise": self.noise,
            "neighbors": self.neighbors,
            "generator": self.generator,
            "train_size": self.train_size,
            "test_size": self.test_size,
            "shots": self.shots,
            "solver": self.solver,
            "seeds": self.seeds,
            "qubit_cap": self.qubit_cap,
        }

    def content_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def with_seed_offset(self, offset: int) -> "ExperimentConfig":
        seeds = {k: int(v) + offset for k, v in self.seeds.items()}
        return replace(self, seeds=seeds)


# -- config resolution -------------------------------------------------------

def build_circuit(config: ExperimentConfig) -> Circuit:
    spec = config.circuit
    kind = spec.get("kind", "ansatz")
    if kind == "file":
        return Circuit.from_json(Path(spec["path"]).read_text())
    if kind == "ansatz":
        fields = {k: v for k, v in spec.items() if k != "kind"}
        return build_ansatz(AnsatzSpec(**fields))
    raise ConfigError(f"unknown circuit kind {kind!r}")


def _ansatz_graph(config: ExperimentConfig, circuit: Circuit) -> LatticeGraph:
    spec = config.circuit
    if spec.get("kind", "ansatz") == "ansatz":
        fields = {k: v for k, v in spec.items() if k != "kind"}
        return AnsatzSpec(**fields).graph()
    return LatticeGraph.line(circuit.n_qubits)


def build_observable(config: ExperimentConfig, circuit: Circuit) -> Observable:
    spec = config.observable
    kind = spec.get("kind", "tfi")
    if kind == "file":
        obs = Observable.from_text(Path(spec["path"]).read_text())
        if obs.n_qubits != circuit.n_qubits:
            raise ConfigError("observable qubit count does not match the circuit")
        return obs
    if kind == "tfi":
        graph = _ansatz_graph(config, circuit)
        return build_tfi(graph, spec.get("coupling", 1.0), spec.get("field", 2.0))
    raise ConfigError(f"unknown observable kind {kind!r}")


def build_neighbor_map(config: ExperimentConfig, circuit: Circuit) -> NeighborMap:
    return _map_from_spec(config.neighbors, circuit, int(config.seeds["subset"]))


def _map_from_spec(spec: dict, circuit: Circuit, subset_seed: int) -> NeighborMap:
    kind = spec.get("kind", "pauli-w1")
    if kind == "pauli-w1":
        return weight1_pauli_map(circuit)
    if kind == "pauli-wk":
        rng = np.random.default_rng(np.random.SeedSequence(subset_seed, spawn_key=(2,)))
        return weightk_pauli_map(
            circuit, int(spec.get("max_weight", 3)), int(spec.get("budget", 0)), rng
        )
    if kind == "cptp":
        return cptp_map(circuit)
    if kind == "zne":
        return zne_map(spec.get("alphas", list(zne.DEFAULT_ZNE_ALPHAS)))
    if kind == "zne+pauli":
        return zne_plus_pauli_map(circuit, spec.get("alphas", list(zne.DEFAULT_ZNE_ALPHAS)))
    if kind == "subset":
        base = _map_from_spec(spec["base"], circuit, subset_seed)
        rng = np.random.default_rng(np.random.SeedSequence(subset_seed, spawn_key=(1,)))
        return random_subset_map(base, int(spec["size"]), rng)
    raise ConfigError(f"unknown neighbor map kind {kind!r}")


def _generator_fn(config: ExperimentConfig):
    kind = config.generator.get("kind", "2design")
    if kind == "2design":
        return gen_training_2design
    if kind == "allClifford":
        return gen_training_all_clifford
    if kind == "mixed":
        layers = int(config.generator.get("layers", 0))
        return lambda circ, rng: gen_training_mixed(circ, layers, rng)
    raise ConfigError(f"unknown generator kind {kind!r}")


def training_circuits(config: ExperimentConfig, template: Circuit, count: int) -> list[Circuit]:
    gen = _generator_fn(config)
    out = []
    for i in range(count):
        rng = np.random.default_rng(
            np.random.SeedSequence(int(config.seeds["circuits"]), spawn_key=(_TRAIN_STREAM, i))
        )
        out.append(gen(template, rng))
    return out


def test_circuits(config: ExperimentConfig, template: Circuit, count: int) -> list[Circuit]:
    out = []
    for i in range(count):
        rng = np.random.default_rng(
            np.random.SeedSequence(int(config.seeds["circuits"]), spawn_key=(_TEST_STREAM, i))
        )
        out.append(bind_uniform(template, rng))
    return out


def shot_plan(config: ExperimentConfig) -> ShotPlan | None:
    if config.shots["mode"] == "exact":
        return None
    return ShotPlan(int(config.shots["total"]), seed=int(config.seeds["shots"]))


def default_gamma(nmap: NeighborMap) -> float:
    base_kind = nmap.kind if nmap.kind != "subset" else (nmap.params or {}).get("base", "")
    return 5.0 if base_kind in ("zne", "zne+pauli") else 2.0


def fit_from_config(config: ExperimentConfig, data: Dataset, nmap: NeighborMap) -> Estimator:
    kind = config.solver.get("kind", "lasso")
    if kind == "ols":
        return fit_ols(data)
    if kind == "lasso":
        gamma = config.solver.get("gamma")
        return fit_lasso(data, float(gamma) if gamma is not None else default_gamma(nmap))
    raise ConfigError(f"unknown solver kind {kind!r}")


# -- reports -----------------------------------------------------------------

@dataclass
class Report:
    command: str
    train_mse: float | None
    test_mse: float | None
    unmitigated_train_mse: float | None
    unmitigated_test_mse: float | None
    estimator_l1: float | None
    n_neighbors: int | None
    comparisons: dict
    solver_report: dict
    wall_clock_s: float
    config_echo: dict
    content_hash: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _unmitigated_mse(data: Dataset, nmap: NeighborMap) -> float | None:
    column = nmap.identity_column()
    if column is None:
        return None
    unit = np.zeros(data.n_features)
    unit[column] = 1.0
    return evaluate_mse(Estimator(unit), data)


@dataclass
class RunArtifacts:
    report: Report
    estimator: Estimator
    train_data: Dataset
    test_data: Dataset | None
    test_predictions: np.ndarray | None
    nmap: NeighborMap


def cmd_run(config: ExperimentConfig, n_workers: int | None = None) -> RunArtifacts:
    """Generate training circuits, fit, and score on a held-out uniform set.

    Test circuits use the same neighbor map and shot mode as training.  When
    the register exceeds the dense-simulation cap (or test_size is zero) the
    run degrades to large-circuit mode: no test set, and the training MSE is
    reported as the benchmark proxy.
    """
    start = time.perf_counter()
    template = build_circuit(config)
    obs = build_observable(config, template)
    nmap = build_neighbor_map(config, template)
    model = NoiseModel.from_dict(config.noise)
    plan = shot_plan(config)

    train = training_circuits(config, template, config.train_size)
    train_data = collect_dataset(
        train, nmap, model, obs, plan=plan, cap=config.qubit_cap,
        spawn_base=(_TRAIN_STREAM,), meta={"generator": config.generator},
        n_workers=n_workers,
    )
    estimator = fit_from_config(config, train_data, nmap)
    train_mse = evaluate_mse(estimator, train_data)

    large_mode = config.test_size == 0 or template.n_qubits > config.qubit_cap
    test_data = None
    predictions = None
    test_mse = None
    unmit_test = None
    if not large_mode:
        test = test_circuits(config, template, config.test_size)
        test_data = collect_dataset(
            test, nmap, model, obs, plan=plan, cap=config.qubit_cap,
            spawn_base=(_TEST_STREAM,), meta={"generator": {"kind": "uniform-test"}},
            n_workers=n_workers,
        )
        test_mse = evaluate_mse(estimator, test_data)
        predictions = test_data.features @ estimator.coeffs
        unmit_test = _unmitigated_mse(test_data, nmap)

    report = Report(
        command="run",
        train_mse=train_mse,
        test_mse=test_mse,
        unmitigated_train_mse=_unmitigated_mse(train_data, nmap),
        unmitigated_test_mse=unmit_test,
        estimator_l1=estimator.l1_norm,
        n_neighbors=len(nmap),
        comparisons={"large_circuit_mode": large_mode},
        solver_report=estimator.report,
        wall_clock_s=time.perf_counter() - start,
        config_echo=config.to_dict(),
        content_hash=config.content_hash(),
    )
    return RunArtifacts(report, estimator, train_data, test_data, predictions, nmap)


@dataclass
class CurveArtifacts:
    report: Report
    rows: list[tuple[int, float, float]]

    def to_csv(self) -> str:
        lines = ["n_neighbors,train_mse,test_mse"]
        for s, train, test in self.rows:
            lines.append(f"{s},{train!r},{test!r}")
        return "\n".join(lines) + "\n"


def cmd_curve(config: ExperimentConfig, grid: list[int], n_workers: int | None = None) -> CurveArtifacts:
    """MSE versus neighbor-count over nested random subsets of the full map.

    Features are collected once for the full map; a subset of size s keeps
    the identity column plus the first s columns of one seeded permutation,
    so the subsets are nested and reuse the same measurements.
    """
    start = time.perf_counter()
    template = build_circuit(config)
    obs = build_observable(config, template)
    full_map = build_neighbor_map(config, template)
    model = NoiseModel.from_dict(config.noise)
    plan = shot_plan(config)

    identity_col = full_map.identity_column()
    rest = [j for j in range(len(full_map)) if j != identity_col]
    rng = np.random.default_rng(np.random.SeedSequence(int(config.seeds["subset"]), spawn_key=(0,)))
    order = [rest[int(k)] for k in rng.permutation(len(rest))]
    if any(s > len(rest) for s in grid):
        raise ConfigError(f"grid exceeds the {len(rest)} available non-identity specs")

    train = training_circuits(config, template, config.train_size)
    train_data = collect_dataset(
        train, full_map, model, obs, plan=plan, cap=config.qubit_cap,
        spawn_base=(_TRAIN_STREAM,), n_workers=n_workers,
    )
    large_mode = config.test_size == 0 or template.n_qubits > config.qubit_cap
    test_data = None
    if not large_mode:
        test = test_circuits(config, template, config.test_size)
        test_data = collect_dataset(
            test, full_map, model, obs, plan=plan, cap=config.qubit_cap,
            spawn_base=(_TEST_STREAM,), n_workers=n_workers,
        )

    rows = []
    for s in grid:
        cols = sorted(([identity_col] if identity_col is not None else []) + order[:s])
        sub_map = NeighborMap(
            tuple(full_map.specs[j] for j in cols), kind="subset",
            params={"base": full_map.kind, "size": s},
        )
        sub_train = Dataset(train_data.features[:, cols], train_data.labels)
        est = fit_from_config(config, sub_train, sub_map)
        train_mse = evaluate_mse(est, sub_train)
        test_mse = float("nan")
        if test_data is not None:
            sub_test = Dataset(test_data.features[:, cols], test_data.labels)
            test_mse = evaluate_mse(est, sub_test)
        rows.append((s, train_mse, test_mse))

    report = Report(
        command="curve",
        train_mse=rows[-1][1] if rows else None,
        test_mse=rows[-1][2] if rows else None,
        unmitigated_train_mse=_unmitigated_mse(train_data, full_map),
        unmitigated_test_mse=None if test_data is None else _unmitigated_mse(test_data, full_map),
        estimator_l1=None,
        n_neighbors=len(full_map),
        comparisons={"grid": list(grid)},
        solver_report={},
        wall_clock_s=time.perf_counter() - start,
        config_echo=config.to_dict(),
        content_hash=config.content_hash(),
    )
    return CurveArtifacts(report, rows)


def cmd_compare_zne(config: ExperimentConfig) -> Report:
    """Plain extrapolation versus a learned combiner on the same circuits."""
    start = time.perf_counter()
    zne_config = replace(
        config,
        neighbors={"kind": "zne", "alphas": config.neighbors.get(
            "alphas", list(zne.DEFAULT_ZNE_ALPHAS)
        )},
    )
    template = build_circuit(zne_config)
    obs = build_observable(zne_config, template)
    model = NoiseModel.from_dict(zne_config.noise)
    plan = shot_plan(zne_config)
    alphas = zne_config.neighbors["alphas"]

    artifacts = cmd_run(zne_config)
    if artifacts.test_data is None:
        raise ConfigError("compare-zne needs a test set (small-circuit mode)")

    # plain ZNE reuses the very same per-circuit noise-scaled measurements
    mse_nil = artifacts.report.test_mse
    labels = artifacts.test_data.labels
    zne_values = np.empty_like(labels)
    for i in range(labels.size):
        points = list(zip(alphas, artifacts.test_data.features[i, : len(alphas)]))
        zne_values[i] = zne.extrapolate_exponential(points, bound=obs.l1_norm).value
    mse_zne = float(np.mean((zne_values - labels) ** 2))

    degenerate = mse_nil < 1e-24 and mse_zne < 1e-24
    ratio = None if degenerate else (mse_zne / mse_nil if mse_nil > 0 else float("inf"))
    report = Report(
        command="compare-zne",
        train_mse=artifacts.report.train_mse,
        test_mse=mse_nil,
        unmitigated_train_mse=artifacts.report.unmitigated_train_mse,
        unmitigated_test_mse=artifacts.report.unmitigated_test_mse,
        estimator_l1=artifacts.estimator.l1_norm,
        n_neighbors=len(alphas),
        comparisons={
            "zne_mse": mse_zne,
            "nil_mse": mse_nil,
            "ratio": "NA" if ratio is None else ratio,
        },
        solver_report=artifacts.estimator.report,
        wall_clock_s=time.perf_counter() - start,
        config_echo=zne_config.to_dict(),
        content_hash=zne_config.content_hash(),
    )
    return report


def cmd_plan(
    n_neighbors: int,
    gamma: float,
    epsilon: float,
    delta: float = 0.01,
    obs_norm: float = 1.0,
    mode: str = "bound",
    shots_per_neighbor: int | None = None,
) -> dict:
    """Training-set size from either the worst-case bound or the observed fit."""
    if mode == "bound":
        t = learning.plan_training_size(n_neighbors, delta, gamma, obs_norm, epsilon)
    elif mode == "empirical":
        t = learning.empirical_training_size(n_neighbors, gamma, epsilon)
    else:
        raise ConfigError("mode must be 'bound' or 'empirical'")
    out = {"mode": mode, "training_circuits": t, "n_neighbors": n_neighbors}
    if shots_per_neighbor is not None:
        out["total_circuit_executions"] = t * n_neighbors * shots_per_neighbor
    return out


def cmd_verify(seed: int = 0) -> list[verify.CheckResult]:
    return verify.run_verification(seed=seed)
