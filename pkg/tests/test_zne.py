import math

import numpy as np
import pytest

from nilqem.circuits import AnsatzSpec, Circuit, Gate, bind_uniform, build_ansatz
from nilqem.exact import ideal_expectation
from nilqem.neighbors import DEFAULT_ZNE_ALPHAS
from nilqem.noise import NoiseModel
from nilqem.paulis import LatticeGraph, Observable, PauliString, build_tfi
from nilqem.zne import (
    extrapolate_exponential,
    extrapolate_linear,
    zne_mitigate,
    zne_noisy_values,
)


def test_linear_recovers_exact_line():
    points = [(a, 1.0 - 0.5 * a) for a in (1.0, 1.3, 2.0)]
    assert extrapolate_linear(points) == pytest.approx(1.0, abs=1e-12)
    two = [(1.0, 0.5), (2.0, 0.4)]
    assert extrapolate_linear(two) == pytest.approx(0.6, abs=1e-12)
    const = [(a, 0.77) for a in (1.0, 1.1, 1.34)]
    assert extrapolate_linear(const) == pytest.approx(0.77, abs=1e-12)


def test_linear_rejects_bad_points():
    with pytest.raises(ValueError):
        extrapolate_linear([(1.0, 0.5)])
    with pytest.raises(ValueError):
        extrapolate_linear([(1.0, 0.5), (1.0, 0.4)])


def test_exponential_recovers_synthetic_decay():
    points = [(a, 0.9 * 0.8**a) for a in DEFAULT_ZNE_ALPHAS]
    out = extrapolate_exponential(points, bound=3.0)
    assert out.method == "exponential"
    assert out.value == pytest.approx(0.9, abs=1e-9)
    negative = [(a, -0.9 * 0.8**a) for a in DEFAULT_ZNE_ALPHAS]
    out = extrapolate_exponential(negative, bound=3.0)
    assert out.value == pytest.approx(-0.9, abs=1e-9)


def test_exponential_fallback_rules():
    alternating = [(1.0, 0.5), (1.1, -0.5), (1.34, 0.5), (1.58, -0.5)]
    out = extrapolate_exponential(alternating, bound=1.0)
    assert out.method == "linear"
    assert "sign" in out.fallback_reason

    tiny = [(1.0, 1e-14), (1.1, 1e-14), (1.34, 1e-14)]
    out = extrapolate_exponential(tiny, bound=1.0)
    assert out.method == "linear"

    # blow-up beyond the observable bound falls back too
    steep = [(a, 0.01 * math.exp(-8 * (a - 1.0)) + 5e-4) for a in DEFAULT_ZNE_ALPHAS]
    out = extrapolate_exponential(steep, bound=0.02)
    assert out.method == "linear" or abs(out.value) <= 0.021


def test_exponential_fallback_is_deterministic():
    points = [(1.0, 0.5), (1.1, -0.5), (1.34, 0.5), (1.58, -0.5)]
    a = extrapolate_exponential(points, bound=1.0)
    b = extrapolate_exponential(points, bound=1.0)
    assert a == b


def test_extrapolators_scale_equivariantly():
    rng = np.random.default_rng(0)
    points = [(a, float(v)) for a, v in zip(DEFAULT_ZNE_ALPHAS, 0.5 + 0.1 * rng.random(4))]
    scale = 3.7
    scaled = [(a, scale * v) for a, v in points]
    assert extrapolate_linear(scaled) == pytest.approx(
        scale * extrapolate_linear(points), abs=1e-12
    )
    base = extrapolate_exponential(points, bound=10.0)
    big = extrapolate_exponential(scaled, bound=scale * 10.0)
    assert big.value == pytest.approx(scale * base.value, abs=1e-9)


def test_global_depolarizing_toy_recovers_exactly():
    # single qubit, X gate then Z measurement: value(alpha) = -(1 - 4p/3)^alpha
    p = 0.05
    circ = Circuit(1, (Gate.c1("X", 0),), (0,))
    obs = Observable.from_terms([(1.0, PauliString.from_label("Z"))])
    model = NoiseModel(p1=p, p2=0.0)
    values = zne_noisy_values(circ, model, obs)
    lam = 1 - 4 * p / 3
    assert np.allclose(values, [-(lam**a) for a in DEFAULT_ZNE_ALPHAS], atol=1e-12)
    out = zne_mitigate(circ, model, obs)
    assert out.method == "exponential"
    assert out.value == pytest.approx(-1.0, abs=1e-9)


def test_zne_mitigate_noiseless_returns_ideal():
    rng = np.random.default_rng(1)
    circ = bind_uniform(build_ansatz(AnsatzSpec("vqe", n=3, m=1)), rng)
    obs = build_tfi(LatticeGraph.line(3), 1.0, 2.0)
    out = zne_mitigate(circ, NoiseModel(p1=0.0, p2=0.0), obs)
    assert out.value == pytest.approx(ideal_expectation(circ, obs), abs=1e-9)


def test_zne_mitigate_improves_over_raw_noisy_value():
    rng = np.random.default_rng(2)
    obs = build_tfi(LatticeGraph.line(4), 1.0, 2.0)
    model = NoiseModel()
    better = 0
    total = 0
    for _ in range(10):
        circ = bind_uniform(build_ansatz(AnsatzSpec("vqe", n=4, m=2)), rng)
        ideal = ideal_expectation(circ, obs)
        values = zne_noisy_values(circ, model, obs)
        raw_err = abs(values[0] - ideal)
        mit_err = abs(zne_mitigate(circ, model, obs).value - ideal)
        total += 1
        if mit_err <= raw_err:
            better += 1
    assert better >= 8  # extrapolation wins almost always on this family
