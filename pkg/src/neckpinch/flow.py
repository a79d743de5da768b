"""Volume-normalized DeTurck flow: right-hand sides, stepping, and driver.

The evolved variables are X and S = W/sin^2(psi).  The X equation carries
the volume-normalization term r_hat/3 (the trace part is pure conformal
scaling, so S is untouched by it); the two near-pole reaction terms are
evaluated through the stabilized primitives of the geometry module.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .classify import (Assessment, Classifier, OutcomeKind, RunOutcome,
                       pinch_diagnostics)
from .geometry import (CurvatureProfile, FieldState, average_scalar_curvature,
                       corseted_initial_data, ricci_eigenvalues, stable_mu,
                       stable_phi, _interior_fields)
from .grid import Grid, build_grid, fill_ghosts_inplace

try:
    from . import _kernel
except ImportError:  # pragma: no cover - numba is a hard dependency
    _kernel = None

__all__ = ["FlowConfig", "BlowUpError", "rhs", "stable_dt", "step", "evolve",
           "Observer"]

Observer = Callable[[FieldState, CurvatureProfile, float], None]


@dataclass(frozen=True)
class FlowConfig:
    """Run parameters for one flow.

    lam is the corseting parameter of the initial data.  dt_safety scales
    the diffusive stability limit; fixed_dt, when set, overrides the
    adaptive step entirely.  curvature_blowup should sit well above the
    initial curvature maximum (about 8 for every corseted sphere).
    """

    lam: float
    n_total: int = 402
    dt_safety: float = 0.5
    t_max: float = 50.0
    curvature_blowup: float = 1e6
    round_tol: float = 1e-3
    snapshot_every: int = 100
    fixed_dt: float | None = None

    def __post_init__(self) -> None:
        if not self.lam > 0.0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.n_total < 6:
            raise ValueError(f"n_total must be >= 6, got {self.n_total}")
        if not 0.0 < self.dt_safety <= 1.0:
            raise ValueError(f"dt_safety must be in (0, 1], got {self.dt_safety}")
        if self.t_max < 0.0:
            raise ValueError(f"t_max must be >= 0, got {self.t_max}")
        if self.curvature_blowup <= 0.0:
            raise ValueError("curvature_blowup must be positive")
        if self.round_tol <= 0.0:
            raise ValueError("round_tol must be positive")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        if self.fixed_dt is not None and not self.fixed_dt > 0.0:
            raise ValueError("fixed_dt must be positive when set")


class BlowUpError(Exception):
    """The integration produced non-finite values.

    Carries the last fully finite state and its time so the caller can
    classify the blow-up.
    """

    def __init__(self, state: FieldState | None, t: float):
        super().__init__(f"non-finite values at t={t}")
        self.state = state
        self.t = t


def rhs(state: FieldState, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives (dX, dS) on the interior; ghost entries are zero.

    dX gets the full normalized X equation including r_hat/3; dS is the S
    equation, whose (1 - 4W - e^{-4W})/sin^4 and (1 - e^{-4W})/sin^2
    reaction terms are evaluated as -(3/2) phi(W) S^2 and mu(W) S.  The
    average curvature is recomputed from the current state on every call.
    """
    if not (np.isfinite(state.x).all() and np.isfinite(state.s).all()):
        raise BlowUpError(None, state.t)
    I = grid.interior
    xi, si, xp, xpp, sp, spp, w, wp = _interior_fields(state, grid)
    sin = grid.sin_psi[I]
    cos = grid.cos_psi[I]
    cot = grid.cot[I]
    dx = np.zeros(grid.n_total)
    ds = np.zeros(grid.n_total)
    # states heading into a pinch legitimately overflow; step() turns the
    # resulting non-finite values into a blow-up signal
    with np.errstate(over="ignore", invalid="ignore"):
        em1 = np.expm1(-4.0 * w)
        pref = np.exp(2.0 * (w - xi))
        mu_s = stable_mu(w) * si
        phi_s2 = stable_phi(w) * si * si
        r_hat = average_scalar_curvature(state, grid)
        dx[I] = pref * (xpp + 2.0 * cot * xp - 2.0
                        + 0.5 * (xp * xp + wp * wp) + 3.0 * xp * wp
                        + 0.5 * mu_s + (-em1) * (1.0 + 2.0 * cot * wp)) + r_hat / 3.0
        a = xp / sin
        b = sin * sp + 2.0 * cos * si
        ds[I] = pref * (spp + 6.0 * cot * sp - 8.0 * si - 1.5 * phi_s2
                        + mu_s * (1.0 - 2.0 * (cot * xp + 2.0 * sin * cos * sp
                                               + 4.0 * cos * cos * si))
                        - 0.5 * (a * a + b * b + 6.0 * a * b))
    return dx, ds


def stable_dt(state: FieldState, grid: Grid, dt_safety: float) -> float:
    """Diffusive stability limit dt_safety dpsi^2 / (2 max e^{2(W-X)})."""
    I = grid.interior
    w = state.s[I] * grid.sin_sq[I]
    with np.errstate(over="ignore"):
        dmax = float(np.max(np.exp(2.0 * (w - state.x[I]))))
    return dt_safety * grid.dpsi * grid.dpsi / (2.0 * dmax)


def step(state: FieldState, dt: float, grid: Grid) -> FieldState:
    """One forward-Euler step on the interior, ghosts refilled, t advanced.

    Both right-hand sides come from the time-n state (Jacobi update).
    Raises BlowUpError carrying the input state if the result is not
    finite.
    """
    dx, ds = rhs(state, grid)
    x_new = state.x + dt * dx
    s_new = state.s + dt * ds
    fill_ghosts_inplace(x_new)
    fill_ghosts_inplace(s_new)
    if not (np.isfinite(x_new).all() and np.isfinite(s_new).all()):
        raise BlowUpError(state, state.t)
    return FieldState(t=state.t + dt, x=x_new, s=s_new)


# status codes shared with the jit kernel
_DONE_BLOCK, _DONE_TSTOP, _BLOWUP = 0, 1, 2


def _advance_python(x: np.ndarray, s: np.ndarray, grid: Grid, dt_safety: float,
                    fixed_dt: float, t: float, t_stop: float,
                    max_steps: int) -> tuple[float, int, int]:
    """Reference stepping loop with the same contract as _kernel.advance."""
    state = FieldState(t=t, x=x, s=s)
    steps = 0
    while steps < max_steps:
        if state.t >= t_stop:
            break
        if fixed_dt > 0.0:
            dt = fixed_dt
        else:
            dt = stable_dt(state, grid, dt_safety)
        dt = min(dt, t_stop - state.t)
        try:
            state = step(state, dt, grid)
        except BlowUpError:
            x[:] = state.x
            s[:] = state.s
            return state.t, steps, _BLOWUP
        steps += 1
    x[:] = state.x
    s[:] = state.s
    return state.t, steps, (_DONE_TSTOP if state.t >= t_stop else _DONE_BLOCK)


def _advance_block(x, s, grid: Grid, config: FlowConfig, t: float,
                   scratch) -> tuple[float, int, int]:
    fixed_dt = config.fixed_dt if config.fixed_dt is not None else -1.0
    if _kernel is not None:
        dxb, dsb, x_prev, s_prev = scratch
        return _kernel.advance(x, s, grid.sin_psi, grid.cos_psi, grid.sin_sq,
                               grid.cot, grid.dpsi, config.dt_safety, fixed_dt,
                               t, config.t_max, config.snapshot_every,
                               dxb, dsb, x_prev, s_prev)
    return _advance_python(x, s, grid, config.dt_safety, fixed_dt, t,
                           config.t_max, config.snapshot_every)


def evolve(config: FlowConfig, observer: Observer | None = None) -> RunOutcome:
    """Run one flow from corseted initial data to a terminal classification.

    Every snapshot_every steps (and at step 0) the curvature profile and
    average curvature are evaluated, handed to the observer, and assessed;
    termination is decided entirely by the classifier thresholds or by the
    time horizon (Undecided).  When the integrator runs into non-finite
    values mid-block, the last finite state is assessed instead, which
    turns a pinch that raced through the blow-up threshold between
    snapshots into a Supercritical outcome and anything else into a
    NumericalFailure.  Identical configs produce identical trajectories.
    """
    grid = build_grid(config.n_total)
    state0 = corseted_initial_data(config.lam, grid)
    x = state0.x.copy()
    s = state0.s.copy()
    t = 0.0
    steps = 0
    n = grid.n_total
    scratch = (np.zeros(n), np.zeros(n), np.zeros(n), np.zeros(n))
    classifier = Classifier(config.curvature_blowup, config.round_tol)

    def outcome(kind: OutcomeKind, state: FieldState,
                profile: CurvatureProfile, r_hat: float) -> RunOutcome:
        diags = pinch_diagnostics(profile, state, grid)
        max_abs_s = float(np.max(np.abs(state.s[grid.interior])))
        curvature_value = (diags.max_r_s2 if kind is OutcomeKind.SUBCRITICAL
                          else None)
        return RunOutcome(kind=kind, t_final=state.t, steps=steps,
                          diagnostics=diags, r_hat=r_hat,
                          max_abs_s=max_abs_s, curvature_value=curvature_value,
                          final_state=state, final_profile=profile)

    def snapshot() -> tuple[FieldState, CurvatureProfile, float]:
        state = FieldState(t=t, x=x.copy(), s=s.copy())
        profile = ricci_eigenvalues(state, grid)
        if np.isfinite(state.x).all() and np.isfinite(state.s).all():
            r_hat = average_scalar_curvature(state, grid)
        else:
            r_hat = math.nan
        return state, profile, r_hat

    _VERDICT_KIND = {
        Assessment.SUBCRITICAL: OutcomeKind.SUBCRITICAL,
        Assessment.SUPERCRITICAL: OutcomeKind.SUPERCRITICAL,
        Assessment.FAILURE: OutcomeKind.FAILURE,
    }

    while True:
        if t >= config.t_max:
            state, profile, r_hat = snapshot()
            return outcome(OutcomeKind.UNDECIDED, state, profile, r_hat)
        state, profile, r_hat = snapshot()
        if observer is not None:
            observer(state, profile, r_hat)
        verdict = classifier.assess(profile, state, r_hat)
        if verdict is not Assessment.CONTINUE:
            return outcome(_VERDICT_KIND[verdict], state, profile, r_hat)
        t, done, status = _advance_block(x, s, grid, config, t, scratch)
        steps += done
        if status == _BLOWUP:
            state, profile, r_hat = snapshot()
            verdict = classifier.assess(profile, state, r_hat)
            kind = (OutcomeKind.SUPERCRITICAL
                    if verdict is Assessment.SUPERCRITICAL
                    else OutcomeKind.FAILURE)
            return outcome(kind, state, profile, r_hat)
