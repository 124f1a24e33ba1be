"""Regime classification, invariant monitoring, and parameter sweeps.

The reproduction number separates two asymptotic regimes: below 1 the
infection compartments die out and the healthy-cell density converges to
the virus-free periodic solution; above 1 the infection persists with a
positive floor. `classify` decides between them empirically from long
simulations, with Indeterminate as a first-class outcome for
threshold-adjacent parameter sets where a finite horizon cannot decide.

`monitor_invariants` checks what the theory promises pointwise: no
trajectory component goes negative (beyond integration rounding), and the
weighted population

    W(t) = T + E + I + (delta + d(t)) / (2 p) * V

stays bounded with no growth trend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .integrate import IntegrationError, IntegratorConfig, integrate
from .model import (
    ModelParameters,
    State,
    Trajectory,
    clamp_small_negatives,
    positivity_band,
    vector_field,
)
from .periodic import VirusFreeSolution, virus_free_closed_form
from .reproduction import R0Result, r0_periodic

__all__ = [
    "EXTINCTION_EPS",
    "TSTAR_EPS",
    "PERSISTENCE_FLOOR_MIN",
    "DEFAULT_INITIAL_CONDITIONS",
    "Regime",
    "TrajectoryEvidence",
    "ClassificationReport",
    "InvariantLog",
    "SweepRow",
    "simulate",
    "classify",
    "monitor_invariants",
    "sweep",
]

EXTINCTION_EPS = 1e-8
TSTAR_EPS = 1e-4
# well below biologically meaningful densities, well above integrator noise
PERSISTENCE_FLOOR_MIN = 1e-6
# a settled orbit keeps its per-period floor; a slow near-threshold decay
# loses a fraction of it every period and must not be called persistent
FLOOR_TREND_MIN = 0.98
GRID_POINTS_PER_PERIOD = 96

DEFAULT_INITIAL_CONDITIONS = (
    State(10.0, 1.0, 1.0, 1.0),
    State(5.0, 2.0, 0.5, 3.0),
    State(20.0, 0.1, 0.1, 0.1),
)


class Regime:
    EXTINCTION = "Extinction"
    PERSISTENCE = "Persistence"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class TrajectoryEvidence:
    """Per-initial-condition summary backing a classification."""

    initial_state: State
    final_infection_max: float | None = None
    t_star_sup_distance: float | None = None
    infection_floor: float | None = None
    period_floors: tuple[float, ...] = ()
    error: str | None = None


@dataclass(frozen=True)
class ClassificationReport:
    r0: R0Result
    regime: str
    evidence: tuple[TrajectoryEvidence, ...]
    horizon: float
    persistence_eta: float | None = None

    @property
    def eta_relative_variation(self) -> float | None:
        """Spread of the per-period floors over the last 10 periods, max/median - min/median."""
        floors = [f for ev in self.evidence for f in ev.period_floors]
        if not floors:
            return None
        per_ic = [ev.period_floors for ev in self.evidence if ev.period_floors]
        worst = 0.0
        for fl in per_ic:
            med = float(np.median(fl))
            if med <= 0.0:
                return math.inf
            worst = max(worst, (max(fl) - min(fl)) / med)
        return worst


@dataclass(frozen=True)
class InvariantLog:
    """Positivity and boundedness bookkeeping for one trajectory."""

    positivity_violations: int
    worst_undershoot: float
    bound_estimate: float
    first_half_max: float
    second_half_max: float
    bounded: bool


@dataclass(frozen=True)
class SweepRow:
    value: float
    r0: float | None = None
    rho_at_one: float | None = None
    regime: str | None = None
    error: str | None = None


def simulate(params: ModelParameters, initial_state, t_end: float,
             cfg: IntegratorConfig, grid_step: float | None = None,
             t_eval=None) -> Trajectory:
    """Integrate the full model from t = 0 and clamp rounding-level negatives.

    Samples at accepted steps by default; `grid_step` requests a uniform
    output grid (always including 0 and t_end exactly), `t_eval` an
    explicit one.
    """
    y0 = initial_state.as_array() if isinstance(initial_state, State) \
        else np.asarray(initial_state, dtype=float)
    if grid_step is not None:
        if t_eval is not None:
            raise ValueError("pass grid_step or t_eval, not both")
        if grid_step <= 0.0:
            raise ValueError("grid_step must be positive")
        n = int(math.floor(t_end / grid_step + 1e-9))
        ts = grid_step * np.arange(n + 1)
        if ts[-1] < t_end - 1e-9 * max(1.0, t_end):
            ts = np.append(ts, t_end)
        else:
            ts[-1] = t_end
        t_eval = ts
    traj, _ = integrate(vector_field(params), 0.0, t_end, y0, cfg, t_eval=t_eval)
    return Trajectory(traj.times, clamp_small_negatives(traj.states, cfg.abs_tol),
                      params.hash_id())


def _final_period_evidence(traj: Trajectory, t_star: VirusFreeSolution,
                           horizon: float, period: float) -> TrajectoryEvidence:
    last = traj.window(horizon - period, horizon)
    infect = last.states[:, 1:4]
    final_inf = float(np.max(infect))
    sup_t = float(np.max(np.abs(last.states[:, 0] - t_star.value(last.times))))
    floor = float(np.min(infect.min(axis=1)))

    floors = []
    for j in range(10, 0, -1):
        w = traj.window(horizon - j * period, horizon - (j - 1) * period)
        if len(w) == 0:
            continue
        floors.append(float(np.min(w.states[:, 1:4].min(axis=1))))
    return TrajectoryEvidence(
        initial_state=State.from_array(np.maximum(traj.states[0], 0.0)),
        final_infection_max=final_inf,
        t_star_sup_distance=sup_t,
        infection_floor=floor,
        period_floors=tuple(floors),
    )


def classify(params: ModelParameters, initial_conditions, horizon: float,
             cfg: IntegratorConfig,
             extinction_eps: float = EXTINCTION_EPS,
             tstar_eps: float = TSTAR_EPS,
             persistence_floor_min: float = PERSISTENCE_FLOOR_MIN,
             r0_result: R0Result | None = None) -> ClassificationReport:
    """Decide Extinction / Persistence / Indeterminate from long simulations.

    Extinction requires every trajectory to end its final period with
    max(E, I, V) below extinction_eps and sup |T - T*| below tstar_eps.
    Persistence requires every trajectory's final-period infection floor
    to clear persistence_floor_min AND to hold steady across the last 10
    periods (no more than a 2% net decline), which separates a settled
    orbit from a slow near-threshold decay. Anything else, including
    disagreement between trajectories or a failed integration, is
    Indeterminate; parameter sets very close to the threshold genuinely
    cannot be decided on a finite horizon.

    Integration failures are recorded per initial condition, not raised.
    """
    ics = list(initial_conditions)
    if len(ics) < 3:
        raise ValueError("need at least 3 initial conditions")
    period = params.period
    if horizon < 50.0 * period:
        raise ValueError("horizon must cover at least 50 periods")

    if r0_result is None:
        r0_result = r0_periodic(params)
    t_star = virus_free_closed_form(params)
    grid_step = period / GRID_POINTS_PER_PERIOD

    evidence: list[TrajectoryEvidence] = []
    for ic in ics:
        state = ic if isinstance(ic, State) else State.from_array(ic)
        if state.t_cells <= 0 or state.e_cells <= 0 or state.i_cells <= 0 or state.virus <= 0:
            raise ValueError("initial conditions must be strictly positive componentwise")
        try:
            traj = simulate(params, state, horizon, cfg, grid_step=grid_step)
        except IntegrationError as exc:
            evidence.append(TrajectoryEvidence(initial_state=state, error=str(exc)))
            continue
        evidence.append(_final_period_evidence(traj, t_star, horizon, period))

    ok = [ev for ev in evidence if ev.error is None]
    if len(ok) == len(evidence) and ok:
        all_extinct = all(
            ev.final_infection_max < extinction_eps and ev.t_star_sup_distance < tstar_eps
            for ev in ok)
        all_persist = all(
            ev.infection_floor > persistence_floor_min
            and len(ev.period_floors) >= 2
            and ev.period_floors[-1] >= FLOOR_TREND_MIN * ev.period_floors[0]
            for ev in ok)
        if all_extinct:
            regime = Regime.EXTINCTION
        elif all_persist:
            regime = Regime.PERSISTENCE
        else:
            regime = Regime.INDETERMINATE
    else:
        regime = Regime.INDETERMINATE

    eta = None
    if regime == Regime.PERSISTENCE:
        eta = min(ev.infection_floor for ev in ok)
    return ClassificationReport(r0=r0_result, regime=regime, evidence=tuple(evidence),
                                horizon=horizon, persistence_eta=eta)


def monitor_invariants(traj: Trajectory, params: ModelParameters,
                       abs_tol: float = 1e-9) -> InvariantLog:
    """Scan a trajectory for positivity violations and a growing population bound.

    A sample violates positivity when any component lies below the
    rounding band -4*abs_tol (undershoot inside the band is integration
    rounding and was already clamped). The trajectory counts as bounded
    when the running max of W(t) over the second half exceeds the
    first-half max by no more than 1%.
    """
    states = traj.states
    worst = float(min(states.min(), 0.0))
    band = positivity_band(abs_tol)
    violations = int(np.sum(np.any(states < -band, axis=1)))

    d_t = params.d.value(traj.times)
    w = (states[:, 0] + states[:, 1] + states[:, 2]
         + (params.delta + d_t) / (2.0 * params.p) * states[:, 3])
    mid = traj.times[0] + 0.5 * (traj.times[-1] - traj.times[0])
    first = w[traj.times <= mid]
    second = w[traj.times >= mid]
    first_max = float(first.max()) if len(first) else 0.0
    second_max = float(second.max()) if len(second) else 0.0
    bounded = second_max <= 1.01 * first_max
    return InvariantLog(
        positivity_violations=violations,
        worst_undershoot=worst,
        bound_estimate=float(w.max()),
        first_half_max=first_max,
        second_half_max=second_max,
        bounded=bounded,
    )


_COEFF_FIELDS = {"mean", "amplitude"}
_SCALAR_FIELDS = {"k", "delta", "p", "c", "c1", "c2"}


def _with_param(base: ModelParameters, name: str, value: float) -> ModelParameters:
    """Copy of `base` with one scalar field or coefficient mean/amplitude replaced."""
    if name in _SCALAR_FIELDS:
        return replace(base, **{name: value})
    if "." in name:
        coeff_name, attr = name.split(".", 1)
        if coeff_name in ("mu", "beta", "d") and attr in _COEFF_FIELDS:
            coeff = getattr(base, coeff_name)
            return replace(base, **{coeff_name: replace(coeff, **{attr: value})})
    raise ValueError(f"unknown sweep parameter {name!r}")


def sweep(base: ModelParameters, param_name: str, values, horizon: float,
          cfg: IntegratorConfig, initial_conditions=None) -> list[SweepRow]:
    """Classify the model across one varying parameter.

    Returns one row per value, ordered by value. Values that violate the
    model invariants produce a marked row instead of aborting the sweep.
    """
    if initial_conditions is None:
        initial_conditions = DEFAULT_INITIAL_CONDITIONS
    rows: list[SweepRow] = []
    for v in sorted(values):
        try:
            params = _with_param(base, param_name, float(v))
        except ValueError as exc:
            rows.append(SweepRow(value=float(v), error=f"InvalidSweepValue: {exc}"))
            continue
        r0 = r0_periodic(params)
        report = classify(params, initial_conditions, horizon, cfg, r0_result=r0)
        rows.append(SweepRow(value=float(v), r0=r0.value, rho_at_one=r0.rho_at_one,
                             regime=report.regime))
    return rows
