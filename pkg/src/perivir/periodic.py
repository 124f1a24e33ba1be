"""Periodic solutions: the virus-free orbit, the Poincare map, and shooting.

With no virus present the healthy-cell density obeys the scalar linear
equation dT/dt = mu(t) - d(t)*T, which has exactly one periodic solution
T*(t); (T*(t), 0, 0, 0) is the virus-free periodic orbit of the full
model. T* is computed both in closed form (integrating factor plus
quadrature) and numerically (fixed point of the scalar period map), and
the two routes cross-check each other.

Interior (endemic) periodic orbits are located as fixed points of the
full Poincare map by Newton shooting, with the Newton Jacobian taken from
the variational equation integrated along the trajectory rather than from
finite differences of the map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrate import IntegratorConfig, integrate
from .model import (
    ModelParameters,
    State,
    clamp_small_negatives,
    jacobian,
    rhs,
    vector_field,
)

__all__ = [
    "DegenerateDecay",
    "NewtonDiverged",
    "ConvergedToBoundary",
    "VirusFreeSolution",
    "PeriodicOrbit",
    "virus_free_closed_form",
    "virus_free_numeric",
    "poincare_map",
    "find_periodic_orbit",
    "warm_start_guess",
    "floquet_multipliers",
]

BOUNDARY_EPS = 1e-10
ORBIT_SAMPLES = 256


class DegenerateDecay(ValueError):
    """The death rate integrates to <= 0 over one period (corrupted input)."""


class NewtonDiverged(RuntimeError):
    """Shooting residual grew or the iteration budget ran out."""


class ConvergedToBoundary(RuntimeError):
    """Newton collapsed onto the virus-free orbit: no interior orbit from this guess."""


def _periodic_cubic_eval(tau, period: float, values: np.ndarray):
    """Cubic Lagrange interpolation on a uniform periodic grid.

    `values` holds samples at j*period/n for j = 0..n with
    values[0] == values[-1]; tau may be a scalar or an array and is
    wrapped modulo the period.
    """
    n = len(values) - 1
    scalar = np.ndim(tau) == 0
    s = (np.asarray(tau, dtype=float) % period) * (n / period)
    i = np.minimum(s.astype(int), n - 1)
    th = s - i
    vm1 = values[(i - 1) % n]
    v0 = values[i]
    v1 = values[(i + 1) % n]
    v2 = values[(i + 2) % n]
    w_m1 = -th * (th - 1.0) * (th - 2.0) / 6.0
    w_0 = (th + 1.0) * (th - 1.0) * (th - 2.0) / 2.0
    w_1 = -(th + 1.0) * th * (th - 2.0) / 2.0
    w_2 = (th + 1.0) * th * (th - 1.0) / 6.0
    out = w_m1 * vm1 + w_0 * v0 + w_1 * v1 + w_2 * v2
    return float(out) if scalar else out


@dataclass(frozen=True)
class VirusFreeSolution:
    """One-period sampling of T*(t) on a uniform grid over [0, P]."""

    params_hash: str
    t_star_initial: float
    times: np.ndarray
    values: np.ndarray
    period: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if np.any(self.values <= 0.0):
            raise ValueError("T* must be strictly positive at every sample")
        wrap = abs(self.values[-1] - self.values[0])
        if wrap > 1e-8 * max(1.0, abs(self.values[0])):
            raise ValueError("T* samples do not close up over one period")

    def value(self, t):
        """T*(t) for scalar or array t, extended periodically."""
        return _periodic_cubic_eval(t, self.period, self.values)


@dataclass(frozen=True)
class PeriodicOrbit:
    """A located periodic solution of the full system."""

    initial_state: State
    times: np.ndarray
    states: np.ndarray
    newton_residual: float
    floquet_multipliers: np.ndarray
    stable: bool
    stability_margin: float
    monodromy: np.ndarray

    @property
    def period(self) -> float:
        return float(self.times[-1] - self.times[0])


def _death_integral(params: ModelParameters, t):
    """Integral of d over [0, t]; analytic for the single-harmonic form."""
    d = params.d
    w = d.angular_frequency
    t = np.asarray(t, dtype=float)
    return d.mean * t + (d.amplitude / w) * (1.0 - np.cos(w * t))


def virus_free_closed_form(params: ModelParameters, n_quad: int = 512) -> VirusFreeSolution:
    """T*(t) by the integrating-factor formula.

    T*(t) = e^{-D(t)} (int_0^t mu(s) e^{D(s)} ds + T*(0)) with
    D(t) = int_0^t d and the periodic initial value
    T*(0) = e^{-D(P)} int_0^P mu e^{D} / (1 - e^{-D(P)}). D is analytic
    for sinusoidal d; the remaining integral is composite Simpson on
    2*n_quad panels, cumulated at the n_quad+1 sample nodes.
    """
    if n_quad < 64:
        raise ValueError("n_quad must be at least 64")
    P = params.period
    DP = float(_death_integral(params, P))
    if DP <= 0.0:
        raise DegenerateDecay("death rate integrates to <= 0 over one period")

    fine = np.linspace(0.0, P, 2 * n_quad + 1)
    g = params.mu.value(fine) * np.exp(_death_integral(params, fine))
    h2 = P / (2 * n_quad)
    panels = (h2 / 3.0) * (g[0:-1:2] + 4.0 * g[1::2] + g[2::2])
    integral = np.concatenate(([0.0], np.cumsum(panels)))

    decay = math.exp(-DP)
    t0_value = decay * integral[-1] / (1.0 - decay)
    times = fine[::2]
    values = np.exp(-_death_integral(params, times)) * (integral + t0_value)
    return VirusFreeSolution(
        params_hash=params.hash_id(),
        t_star_initial=float(t0_value),
        times=times,
        values=values,
        period=P,
    )


def _healthy_field(params: ModelParameters):
    mu, d = params.mu, params.d

    def f(t, y):
        return np.array([mu.value(t) - d.value(t) * y[0]])

    return f


def virus_free_numeric(params: ModelParameters, cfg: IntegratorConfig,
                       n_samples: int = 512) -> VirusFreeSolution:
    """T*(t) as the fixed point of the scalar period map.

    The map T(0) -> T(P) of dT/dt = mu(t) - d(t)T is affine, so two
    integrations (from 0 and from 1) determine it exactly:
    T* (0) = a / (1 - b) with a the image of 0 and b the contraction factor
    e^{-int_0^P d}. One more pass over the period collects the samples.
    """
    P = params.period
    f = _healthy_field(params)
    end = np.array([P])
    _, a_vec = integrate(f, 0.0, P, [0.0], cfg, t_eval=end)
    _, ab_vec = integrate(f, 0.0, P, [1.0], cfg, t_eval=end)
    a = float(a_vec[0])
    b = float(ab_vec[0] - a_vec[0])
    if not 0.0 < b < 1.0:
        raise DegenerateDecay(f"period map contraction factor {b} outside (0, 1)")
    t0_value = a / (1.0 - b)

    grid = np.linspace(0.0, P, n_samples + 1)
    traj, _ = integrate(f, 0.0, P, [t0_value], cfg, t_eval=grid)
    values = traj.states[:, 0].copy()
    values[-1] = values[0]  # closes up to integration accuracy; make it exact
    return VirusFreeSolution(
        params_hash=params.hash_id(),
        t_star_initial=t0_value,
        times=grid,
        values=values,
        period=P,
    )


def poincare_map(params: ModelParameters, x0, cfg: IntegratorConfig) -> State:
    """Solution of the full system at time P started from x0 at time 0.

    Small negative undershoot (within the integrator's absolute tolerance)
    is clamped to zero before the state is rebuilt.
    """
    y0 = x0.as_array() if isinstance(x0, State) else np.asarray(x0, dtype=float)
    if np.any(y0 < 0.0):
        raise ValueError("initial state must lie in the nonnegative cone")
    _, y_final = integrate(vector_field(params), 0.0, params.period, y0, cfg,
                           t_eval=np.array([params.period]))
    return State.from_array(clamp_small_negatives(y_final, cfg.abs_tol))


def _augmented_field(params: ModelParameters):
    """Vector field for state + fundamental matrix of the variational equation."""

    def f(t, ya):
        y = ya[:4]
        phi = ya[4:].reshape(4, 4)
        dy = rhs(t, y, params)
        dphi = jacobian(t, y, params) @ phi
        return np.concatenate([dy, dphi.ravel()])

    return f


def _flow_and_monodromy(params: ModelParameters, x: np.ndarray, cfg: IntegratorConfig):
    """One-period flow of x together with the monodromy of the variational equation."""
    ya0 = np.concatenate([x, np.eye(4).ravel()])
    _, ya = integrate(_augmented_field(params), 0.0, params.period, ya0, cfg,
                      t_eval=np.array([params.period]))
    return ya[:4], ya[4:].reshape(4, 4)


def _flow(params: ModelParameters, x: np.ndarray, cfg: IntegratorConfig) -> np.ndarray:
    _, y = integrate(vector_field(params), 0.0, params.period, x, cfg,
                     t_eval=np.array([params.period]))
    return y


def find_periodic_orbit(params: ModelParameters, guess: State, cfg: IntegratorConfig,
                        newton_tol: float = 1e-10, max_newton_iters: int = 30) -> PeriodicOrbit:
    """Newton shooting for a fixed point of the Poincare map.

    Solves g(x) = flow_P(x) - x = 0 with Jacobian Dg = Phi(P; x) - I from
    the variational equation along the trajectory. Damping halves the
    Newton step up to 8 times when the residual does not decrease.

    Raises ConvergedToBoundary when the fixed point has a component below
    1e-10 (collapse onto the virus-free orbit) and NewtonDiverged when the
    residual stops decreasing or the iteration budget runs out.
    """
    x = guess.as_array() if isinstance(guess, State) else np.asarray(guess, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("guess must be strictly positive componentwise")

    eye = np.eye(4)
    for _ in range(max_newton_iters):
        y_end, mono = _flow_and_monodromy(params, x, cfg)
        g = y_end - x
        res = float(np.max(np.abs(g)))
        if res < newton_tol:
            return _package_orbit(params, x, mono, res, cfg)

        try:
            dx = np.linalg.solve(mono - eye, -g)
        except np.linalg.LinAlgError as exc:
            raise NewtonDiverged(f"singular shooting Jacobian at residual {res:.3e}") from exc

        step = 1.0
        for _ in range(9):
            x_try = x + step * dx
            res_try = float(np.max(np.abs(_flow(params, x_try, cfg) - x_try)))
            if res_try < res:
                break
            step *= 0.5
        else:
            raise NewtonDiverged(f"residual stalled at {res:.3e}")
        x = x + step * dx

    raise NewtonDiverged(f"no convergence within {max_newton_iters} iterations")


def _package_orbit(params: ModelParameters, x: np.ndarray, mono: np.ndarray,
                   residual: float, cfg: IntegratorConfig) -> PeriodicOrbit:
    if np.any(x < BOUNDARY_EPS):
        raise ConvergedToBoundary(
            "fixed point has a component below boundary_eps; "
            "this is the virus-free orbit, not an interior one")
    multipliers = floquet_multipliers(mono)
    max_mod = float(np.abs(multipliers[0]))
    grid = np.linspace(0.0, params.period, ORBIT_SAMPLES + 1)
    traj, _ = integrate(vector_field(params), 0.0, params.period, x, cfg, t_eval=grid)
    states = clamp_small_negatives(traj.states, cfg.abs_tol)
    return PeriodicOrbit(
        initial_state=State.from_array(clamp_small_negatives(x, cfg.abs_tol)),
        times=grid,
        states=states,
        newton_residual=residual,
        floquet_multipliers=multipliers,
        stable=max_mod < 1.0,
        stability_margin=1.0 - max_mod,
        monodromy=mono,
    )


def warm_start_guess(params: ModelParameters, ic: State, transient: float,
                     cfg: IntegratorConfig) -> State:
    """State reached at the last period start within a transient integration.

    In the persistence regime trajectories approach the endemic orbit, so
    the transient endpoint lies in the Newton basin.
    """
    P = params.period
    t_end = math.floor(transient / P) * P
    if t_end <= 0.0:
        raise ValueError("transient must cover at least one period")
    _, y = integrate(vector_field(params), 0.0, t_end, ic.as_array(), cfg,
                     t_eval=np.array([t_end]))
    return State.from_array(clamp_small_negatives(y, cfg.abs_tol))


def floquet_multipliers(monodromy: np.ndarray) -> np.ndarray:
    """Eigenvalues of a monodromy matrix, sorted by modulus, largest first."""
    m = np.asarray(monodromy, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("monodromy matrix must be finite")
    eig = np.linalg.eigvals(m)
    return eig[np.argsort(-np.abs(eig), kind="stable")]
