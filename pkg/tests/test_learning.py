import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nilqem.circuits import AnsatzSpec, Circuit, Gate, build_ansatz, gen_training_2design
from nilqem.learning import (
    Dataset,
    Estimator,
    chebyshev_envelope,
    collect_dataset,
    empirical_training_size,
    evaluate_mse,
    fit_lasso,
    fit_ols,
    moments,
    plan_training_size,
    predict,
    project_l1_ball,
)
from nilqem.neighbors import NeighborMap, NeighborSpec, weight1_pauli_map
from nilqem.noise import NoiseModel
from nilqem.paulis import LatticeGraph, Observable, PauliString, build_tfi
from nilqem.sampler import ShotPlan


def identity_map():
    return NeighborMap((NeighborSpec("identity"),), kind="pauli-w1")


def test_ols_scalar_case():
    data = Dataset(np.array([[2.0]]), np.array([1.0]))
    est = fit_ols(data)
    assert est.coeffs[0] == pytest.approx(0.5, abs=1e-12)


def test_ols_duplicate_columns_use_pseudoinverse():
    rng = np.random.default_rng(0)
    col = rng.normal(size=50)
    y = 3.0 * col + rng.normal(scale=0.01, size=50)
    data = Dataset(np.column_stack([col, col]), y)
    est = fit_ols(data)
    single = fit_ols(Dataset(col[:, None], y))
    assert evaluate_mse(est, data) == pytest.approx(
        evaluate_mse(single, Dataset(col[:, None], y)), abs=1e-12
    )
    assert np.all(np.isfinite(est.coeffs))
    assert est.coeffs[0] == pytest.approx(est.coeffs[1], abs=1e-9)


def test_ols_perfect_identity_feature():
    y = np.array([0.3, -0.7, 1.1])
    data = Dataset(y[:, None], y)
    est = fit_ols(data)
    assert est.coeffs[0] == pytest.approx(1.0, abs=1e-12)
    assert evaluate_mse(est, data) == pytest.approx(0.0, abs=1e-15)


def test_lasso_interior_and_active_constraint():
    data = Dataset(np.array([[2.0]]), np.array([1.0]))
    interior = fit_lasso(data, gamma=2.0)
    assert interior.coeffs[0] == pytest.approx(0.5, abs=1e-9)
    active = fit_lasso(data, gamma=0.25)
    assert active.coeffs[0] == pytest.approx(0.25, abs=1e-10)
    assert evaluate_mse(active, data) == pytest.approx(0.25, abs=1e-9)


def test_lasso_matches_ols_for_huge_budget():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(60, 8))
    y = x @ rng.normal(size=8) + 0.01 * rng.normal(size=60)
    data = Dataset(x, y)
    ols = fit_ols(data)
    lasso = fit_lasso(data, gamma=1e6)
    assert evaluate_mse(lasso, data) == pytest.approx(evaluate_mse(ols, data), abs=1e-9)


def test_lasso_feasibility_on_random_problems():
    rng = np.random.default_rng(2)
    for _ in range(100):
        t, n = int(rng.integers(5, 40)), int(rng.integers(1, 12))
        x = rng.normal(size=(t, n))
        y = rng.normal(size=t)
        gamma = float(rng.uniform(0.05, 3.0))
        est = fit_lasso(Dataset(x, y), gamma)
        assert est.l1_norm <= gamma + 1e-9
        assert est.report["objective"] >= -1e-12


def test_lasso_reports_convergence_metadata():
    data = Dataset(np.array([[1.0, 0.3], [0.2, 1.0]]), np.array([1.0, -1.0]))
    est = fit_lasso(data, gamma=1.5)
    assert set(est.report) >= {"iterations", "objective", "stationarity_residual", "converged"}
    assert est.report["stationarity_residual"] < 1e-6


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.floats(-50, 50), min_size=1, max_size=12),
    st.floats(0.01, 20.0),
)
def test_l1_projection_properties(values, radius):
    v = np.array(values)
    w = project_l1_ball(v, radius)
    assert np.abs(w).sum() <= radius + 1e-9
    if np.abs(v).sum() <= radius:
        assert np.allclose(w, v)
    else:
        assert np.abs(w).sum() == pytest.approx(radius, abs=1e-9)
    # projection never moves a coordinate past the origin or flips its sign
    assert np.all(w * v >= -1e-12)
    assert np.all(np.abs(w) <= np.abs(v) + 1e-12)


def test_evaluate_mse_cases():
    est = Estimator(np.array([0.5]))
    data = Dataset(np.array([[1.0], [1.0]]), np.array([1.0, 0.0]))
    assert evaluate_mse(est, data) == pytest.approx(0.25)
    zero = Estimator(np.array([0.0]))
    assert evaluate_mse(zero, data) == pytest.approx(0.5)  # mean of y^2
    with pytest.raises(ValueError):
        evaluate_mse(Estimator(np.array([1.0, 2.0])), data)


def test_predict():
    est = Estimator(np.array([0.0, 1.0]))
    assert predict(est, np.array([5.0, 2.5])) == 2.5
    assert predict(Estimator(np.zeros(2)), np.array([1.0, 1.0])) == 0.0
    with pytest.raises(ValueError):
        predict(est, np.array([1.0]))


def test_moments_on_constant_feature():
    data = Dataset(np.ones((4, 1)), np.ones(4))
    mom = moments(data)
    assert mom.second_moment[0, 0] == pytest.approx(1.0)
    assert mom.cross_moment[0] == pytest.approx(1.0)
    assert mom.label_second_moment == pytest.approx(1.0)
    assert mom.shot_variance_diag[0] == 0.0


def test_moments_shot_diag_matches_binomial_variance():
    # single-qubit toy: X gate + depolarizing p, observable Z
    p = 0.3
    eta = 1 - 4 * p / 3
    circ = Circuit(1, (Gate.c1("X", 0),), (0,))
    obs = Observable.from_terms([(1.0, PauliString.from_label("Z"))])
    n_shots = 100
    rows = 4000
    data = collect_dataset(
        [circ] * rows,
        identity_map(),
        NoiseModel(p1=p, p2=0.0),
        obs,
        plan=ShotPlan(n_shots, seed=5),
    )
    mom = moments(data)
    expected = (1 - eta**2) / n_shots
    # the recorded estimator variances agree with the analytic binomial value
    assert mom.shot_variance_diag[0] == pytest.approx(expected, rel=0.1)
    # and the empirical second-moment offset reproduces it
    offset = mom.second_moment[0, 0] - (-eta) ** 2
    se = math.sqrt(4 * eta**2 * (1 - eta**2) / n_shots / rows)
    assert abs(offset - expected) < 4 * se


def test_collect_dataset_exact_labels_and_features():
    rng = np.random.default_rng(3)
    obs = build_tfi(LatticeGraph.line(3), 1.0, 2.0)
    base = build_ansatz(AnsatzSpec("vqe", n=3, m=1))
    circuits = [gen_training_2design(base, rng) for _ in range(6)]
    data = collect_dataset(
        circuits, identity_map(), NoiseModel(p1=0.0, p2=0.0), obs
    )
    assert data.n_rows == 6 and data.n_features == 1
    assert np.allclose(data.features[:, 0], data.labels, atol=1e-10)
    assert np.all(np.abs(data.labels) <= obs.l1_norm + 1e-12)


def test_collect_dataset_empty():
    obs = build_tfi(LatticeGraph.line(2), 1.0, 2.0)
    data = collect_dataset([], identity_map(), NoiseModel(), obs)
    assert data.n_rows == 0


def test_dataset_csv_round_trip():
    rng = np.random.default_rng(4)
    data = Dataset(rng.normal(size=(5, 3)), rng.normal(size=5))
    back = Dataset.from_csv(data.to_csv())
    assert np.array_equal(back.features, data.features)
    assert np.array_equal(back.labels, data.labels)
    assert data.to_csv().splitlines()[0] == "x_0,x_1,x_2,y"


def test_estimator_json_round_trip():
    est = Estimator(np.array([0.1, -0.2]), gamma=2.0, report={"iterations": 3})
    back = Estimator.from_json(est.to_json())
    assert np.array_equal(back.coeffs, est.coeffs)
    assert back.gamma == 2.0
    assert back.report["iterations"] == 3


def test_plan_training_size_hand_values():
    t = plan_training_size(300, 0.01, 2.0, 1.0, 0.1)
    expected = math.ceil(
        math.log(6 * 300**2 / 0.01) * (12 * 4 * 1) ** 2 / 0.1**2
    )
    assert t == expected
    assert abs(t - 4_102_000) < 2_000

    # epsilon halves -> exactly 4x more circuits
    assert plan_training_size(300, 0.01, 2.0, 1.0, 0.05) == pytest.approx(4 * t, abs=4)

    # squaring N only multiplies by the log-factor ratio
    t_sq = plan_training_size(300**2, 0.01, 2.0, 1.0, 0.1)
    ratio = math.log(6 * 300**4 / 0.01) / math.log(6 * 300**2 / 0.01)
    assert t_sq / t == pytest.approx(ratio, rel=1e-6)


def test_empirical_training_size_hand_values():
    assert empirical_training_size(300, 2.0, 1e-4) == 2282
    assert empirical_training_size(math.e, 0.5, 1.0) == 1
    sizes = [empirical_training_size(n, 2.0, 1e-4) for n in (10, 100, 1000)]
    assert sizes == sorted(sizes)


def test_chebyshev_envelope_values():
    threshold, confidence = chebyshev_envelope(1e-4, 10)
    assert threshold == pytest.approx(0.11)
    assert confidence == pytest.approx(0.99)
    assert chebyshev_envelope(0.0, 5)[0] == 0.0
    with pytest.raises(ValueError):
        chebyshev_envelope(1e-4, 1.0)


def test_argument_validation():
    with pytest.raises(ValueError):
        plan_training_size(0, 0.1, 1, 1, 0.1)
    with pytest.raises(ValueError):
        plan_training_size(10, 1.5, 1, 1, 0.1)
    with pytest.raises(ValueError):
        empirical_training_size(10, -1, 0.1)
    with pytest.raises(ValueError):
        fit_lasso(Dataset(np.ones((1, 1)), np.ones(1)), gamma=0.0)
