"""Zero-noise extrapolation baseline.

The exponential fit is sign-stabilized log-linear least squares with an
explicit fallback ruleset (sign changes, near-zero samples, a worse fit
residual than the straight line, or an implausibly large intercept), so the
baseline's behavior is deterministic and testable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, is_clifford
from .neighbors import DEFAULT_ZNE_ALPHAS
from .noise import NoiseModel, amplify_circuit, attach_noise
from .paulis import Observable
from . import exact, tableau
from .sampler import ShotPlan, sample_noisy_estimate


@dataclass(frozen=True)
class ExtrapolationResult:
    value: float
    method: str
    fallback_reason: str | None = None

    def __float__(self) -> float:
        return self.value


def _check_points(points) -> tuple[np.ndarray, np.ndarray]:
    pts = sorted((float(a), float(v)) for a, v in points)
    alphas = np.array([a for a, _ in pts])
    values = np.array([v for _, v in pts])
    if alphas.size < 2:
        raise ValueError("need at least two extrapolation points")
    if np.any(np.diff(alphas) <= 0) or np.any(alphas < 0):
        raise ValueError("noise scales must be distinct and >= 0")
    if not np.all(np.isfinite(values)):
        raise ValueError("extrapolation values must be finite")
    return alphas, values


def extrapolate_linear(points) -> float:
    """Least-squares line through (alpha, value), evaluated at alpha = 0."""
    alphas, values = _check_points(points)
    slope, intercept = np.polyfit(alphas, values, 1)
    del slope
    return float(intercept)


def _linear_residual(alphas: np.ndarray, values: np.ndarray) -> float:
    coeffs = np.polyfit(alphas, values, 1)
    return float(np.sum((np.polyval(coeffs, alphas) - values) ** 2))


def extrapolate_exponential(points, bound: float) -> ExtrapolationResult:
    """Fit value = a * exp(-b * alpha) and report value at alpha = 0.

    Falls back to the linear extrapolator whenever the exponential model is
    untrustworthy; ``bound`` caps plausible magnitudes (use the observable's
    L1 norm).
    """
    alphas, values = _check_points(points)
    if alphas.size < 3:
        raise ValueError("exponential extrapolation needs at least three points")

    def fallback(reason: str) -> ExtrapolationResult:
        return ExtrapolationResult(
            extrapolate_linear(zip(alphas, values)), "linear", reason
        )

    signs = np.sign(values)
    if np.any(np.abs(values) < 1e-12):
        return fallback("a sample magnitude is below 1e-12")
    if not (np.all(signs > 0) or np.all(signs < 0)):
        return fallback("samples change sign across noise scales")
    sign = signs[0]
    log_mag = np.log(np.abs(values))
    slope, intercept = np.polyfit(alphas, log_mag, 1)
    fitted = sign * np.exp(np.polyval([slope, intercept], alphas))
    if float(np.sum((fitted - values) ** 2)) > _linear_residual(alphas, values):
        return fallback("exponential fit residual exceeds the linear fit")
    value = float(sign * np.exp(intercept))
    if abs(value) > 1.05 * bound:
        return fallback("extrapolated magnitude exceeds the observable bound")
    return ExtrapolationResult(value, "exponential", None)


def zne_noisy_values(
    circuit: Circuit,
    model: NoiseModel,
    obs: Observable,
    alphas=DEFAULT_ZNE_ALPHAS,
    plan: ShotPlan | None = None,
    cap: int = exact.DEFAULT_QUBIT_CAP,
) -> list[float]:
    """Noisy expectation at each amplification, exact or shot-sampled."""
    noisy = attach_noise(circuit, model)
    values = []
    for alpha in alphas:
        scaled = amplify_circuit(noisy, alpha)
        if plan is not None:
            values.append(sample_noisy_estimate(scaled, obs, plan))
        elif is_clifford(circuit):
            values.append(tableau.noisy_clifford_expectation(scaled, obs))
        else:
            values.append(exact.noisy_expectation(scaled, obs, cap=cap))
    return values


def zne_mitigate(
    circuit: Circuit,
    model: NoiseModel,
    obs: Observable,
    alphas=DEFAULT_ZNE_ALPHAS,
    plan: ShotPlan | None = None,
    cap: int = exact.DEFAULT_QUBIT_CAP,
) -> ExtrapolationResult:
    """Full baseline: measure at each noise scale, extrapolate to zero noise."""
    values = zne_noisy_values(circuit, model, obs, alphas, plan, cap)
    points = list(zip(alphas, values))
    if len(points) >= 3:
        return extrapolate_exponential(points, bound=obs.l1_norm)
    return ExtrapolationResult(extrapolate_linear(points), "linear", "fewer than three points")
