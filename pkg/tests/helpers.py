"""Shared parameter factories and independent reference implementations.

The oracles here deliberately avoid the library's own code paths: the
matrix exponential is plain scaling-and-squaring Taylor summation, the
spectral radius oracle is power iteration, and the vector-field oracle is
a scalar transcription of the four model equations.
"""

from __future__ import annotations

import math

import numpy as np

from perivir import ModelParameters, SinusoidalCoefficient

OMEGA = 2.0 * math.pi / 24.0


def table_coefficients(amps: float = 1.0, beta_scale: float = 1.0,
                       omega: float = OMEGA):
    """The standard circadian coefficient constants, optionally rescaled."""
    mu = SinusoidalCoefficient(0.1, 0.05 * amps, omega)
    beta = SinusoidalCoefficient(0.3 * beta_scale, 0.1 * amps * beta_scale, omega)
    d = SinusoidalCoefficient(0.01, 0.005 * amps, omega)
    return mu, beta, d


def baseline_params(amps: float = 1.0, beta_scale: float = 1.0) -> ModelParameters:
    mu, beta, d = table_coefficients(amps=amps, beta_scale=beta_scale)
    return ModelParameters(mu=mu, beta=beta, d=d, k=0.2, delta=0.09, p=0.5,
                           c=0.18, c1=0.1, c2=0.1)


def persistence_params(amps: float = 1.0) -> ModelParameters:
    mu, beta, d = table_coefficients(amps=amps)
    return ModelParameters(mu=mu, beta=beta, d=d, k=0.2, delta=0.1, p=0.5,
                           c=0.1, c1=0.1, c2=0.1)


def rescaled_extinction_params() -> ModelParameters:
    """Baseline constants with the infection rate divided by 100 (R0 < 1)."""
    return baseline_params(beta_scale=0.01)


def skewed_params() -> ModelParameters:
    """Amplitudes out of proportion so T*(t) genuinely varies over the period."""
    return ModelParameters(
        mu=SinusoidalCoefficient(0.1, 0.03, OMEGA),
        beta=SinusoidalCoefficient(0.3, 0.05, OMEGA),
        d=SinusoidalCoefficient(0.01, 0.004, OMEGA),
        k=0.2, delta=0.1, p=0.5, c=0.1, c1=0.1, c2=0.1)


def zero_beta_params() -> ModelParameters:
    mu, _, d = table_coefficients()
    return ModelParameters(mu=mu, beta=SinusoidalCoefficient(0.0, 0.0, OMEGA),
                           d=d, k=0.2, delta=0.09, p=0.5, c=0.18, c1=0.1, c2=0.1)


def beta_at_threshold(mu0, d0, k, delta, p, c, c1) -> float:
    """Mean infection rate putting the autonomous reproduction number at 1."""
    return c * (d0 + delta) * (d0 + k) * (d0 + c1 * mu0) / (p * k * mu0)


def random_rate_set(rng: np.random.Generator) -> dict:
    """Random scalar rates within the model's usual magnitudes (all <= ~0.6/h)."""
    return {
        "mu0": rng.uniform(0.02, 0.3),
        "d0": rng.uniform(0.005, 0.05),
        "k": rng.uniform(0.05, 0.6),
        "delta": rng.uniform(0.02, 0.6),
        "p": rng.uniform(0.1, 0.6),
        "c": rng.uniform(0.05, 0.6),
        "c1": rng.uniform(0.0, 0.3),
        "c2": rng.uniform(0.0, 0.3),
    }


def random_autonomous_params(rng: np.random.Generator):
    """Random zero-amplitude parameter set with R0 spread around 1 (log-uniform)."""
    r = random_rate_set(rng)
    beta_c = beta_at_threshold(r["mu0"], r["d0"], r["k"], r["delta"], r["p"],
                               r["c"], r["c1"])
    beta0 = beta_c * 10.0 ** rng.uniform(-1.5, 1.5)
    params = ModelParameters(
        mu=SinusoidalCoefficient(r["mu0"], 0.0, OMEGA),
        beta=SinusoidalCoefficient(beta0, 0.0, OMEGA),
        d=SinusoidalCoefficient(r["d0"], 0.0, OMEGA),
        k=r["k"], delta=r["delta"], p=r["p"], c=r["c"], c1=r["c1"], c2=r["c2"])
    return params


def random_periodic_params(rng: np.random.Generator) -> ModelParameters:
    """Random parameter set with nonzero amplitudes, R0 spread around 1."""
    r = random_rate_set(rng)
    beta_c = beta_at_threshold(r["mu0"], r["d0"], r["k"], r["delta"], r["p"],
                               r["c"], r["c1"])
    beta0 = beta_c * 10.0 ** rng.uniform(-1.5, 1.5)
    return ModelParameters(
        mu=SinusoidalCoefficient(r["mu0"], rng.uniform(0.0, 0.9) * r["mu0"], OMEGA),
        beta=SinusoidalCoefficient(beta0, rng.uniform(0.0, 0.9) * beta0, OMEGA),
        d=SinusoidalCoefficient(r["d0"], rng.uniform(0.0, 0.9) * r["d0"], OMEGA),
        k=r["k"], delta=r["delta"], p=r["p"], c=r["c"], c1=r["c1"], c2=r["c2"])


def closed_form_r0(params: ModelParameters) -> float:
    """The autonomous formula evaluated on the coefficient means."""
    mu0, beta0, d0 = params.mu.mean, params.beta.mean, params.d.mean
    return (params.p * beta0 * params.k * mu0) / (
        params.c * (d0 + params.delta) * (d0 + params.k) * (d0 + params.c1 * mu0))


def expm_reference(A: np.ndarray) -> np.ndarray:
    """Scaling-and-squaring Taylor matrix exponential, independent of the integrator."""
    A = np.asarray(A, dtype=float)
    norm = float(np.max(np.sum(np.abs(A), axis=1)))
    s = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    B = A / (2.0 ** s)
    n = A.shape[0]
    term = np.eye(n)
    total = np.eye(n)
    for i in range(1, 40):
        term = term @ B / i
        total = total + term
        if float(np.max(np.abs(term))) < 1e-20:
            break
    for _ in range(s):
        total = total @ total
    return total


def power_iteration_radius(M: np.ndarray, iters: int = 10000) -> float:
    """Perron root of a nonnegative matrix by plain power iteration."""
    M = np.asarray(M, dtype=float)
    v = np.ones(M.shape[0])
    lam = 0.0
    for _ in range(iters):
        w = M @ v
        lam = float(np.max(np.abs(w)))
        if lam == 0.0:
            return 0.0
        v = w / lam
    return lam


def rhs_by_hand(t: float, y, params: ModelParameters):
    """Scalar transcription of the four model equations, plain floats only."""
    T, E, I, V = (float(v) for v in y)
    w = params.angular_frequency
    mu_t = params.mu.mean + params.mu.amplitude * math.sin(w * t)
    beta_t = params.beta.mean + params.beta.amplitude * math.sin(w * t)
    d_t = params.d.mean + params.d.amplitude * math.sin(w * t)
    inc = beta_t * T * V / ((1.0 + params.c1 * T) * (1.0 + params.c2 * V))
    return np.array([
        mu_t - inc - d_t * T,
        inc - (params.k + d_t) * E,
        params.k * E - (params.delta + d_t) * I,
        params.p * I - params.c * V,
    ])


def fd_jacobian(f, t: float, y: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central finite differences of a vector field with respect to the state."""
    y = np.asarray(y, dtype=float)
    n = len(y)
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        cols.append((np.asarray(f(t, y + e)) - np.asarray(f(t, y - e))) / (2.0 * h))
    return np.column_stack(cols)
