"""Run-outcome classification: round-sphere convergence vs neck pinch.

A flow is subcritical when both curvature eigenvalues approach the same
constant and the anisotropy dies, supercritical when the tangential
eigenvalue blows past a threshold (possibly detected post hoc on the last
finite state when the explicit integrator overshoots into non-finite
values), and undecided when the time horizon runs out first.
"""

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import CurvatureProfile, FieldState, sphere_areas
from .grid import Grid

__all__ = [
    "Assessment",
    "OutcomeKind",
    "Classifier",
    "PinchDiagnostics",
    "pinch_diagnostics",
    "RunOutcome",
]

# Snapshots of max r_s2 inspected when deciding whether a non-finite state
# was preceded by genuine curvature growth rather than an instability.
MONOTONE_WINDOW = 10


class Assessment(enum.Enum):
    CONTINUE = "continue"
    SUBCRITICAL = "subcritical"
    SUPERCRITICAL = "supercritical"
    FAILURE = "failure"


class OutcomeKind(enum.Enum):
    SUBCRITICAL = "subcritical"
    SUPERCRITICAL = "supercritical"
    UNDECIDED = "undecided"
    FAILURE = "failure"


def _finite_max(a: np.ndarray) -> float:
    """Max over the finite entries, +inf entries included; -inf if none."""
    finite_or_inf = a[~np.isnan(a)]
    if finite_or_inf.size == 0:
        return -math.inf
    return float(np.max(finite_or_inf))


class Classifier:
    """Stateful snapshot-by-snapshot decision procedure.

    Decisions are deterministic functions of the snapshot sequence, so
    re-running assess over recorded snapshots reproduces the verdicts.
    Order of checks: supercritical precedes subcritical precedes continue,
    making the verdicts mutually exclusive.
    """

    def __init__(self, curvature_blowup: float, round_tol: float):
        if curvature_blowup <= 0.0 or round_tol <= 0.0:
            raise ValueError("thresholds must be positive")
        self.curvature_blowup = curvature_blowup
        self.round_tol = round_tol
        self.max_r_s2_history: list[float] = []
        self._round_streak = 0

    def _growing_tail(self) -> bool:
        """Did the trailing window show the curvature racing upward?

        Either strictly increasing throughout, or ending at the window
        maximum with at least a doubling over the window.  Real pinches
        often dip transiently before the terminal surge, so strict
        monotonicity alone would misread them as failures.
        """
        tail = self.max_r_s2_history[-MONOTONE_WINDOW:]
        if len(tail) < 2:
            return False
        if all(b > a for a, b in zip(tail, tail[1:])):
            return True
        return tail[-1] == max(tail) and tail[-1] >= 2.0 * tail[0]

    def assess(self, profile: CurvatureProfile, state: FieldState,
               r_hat: float) -> Assessment:
        """Classify one snapshot.

        Non-finite diagnostics become supercritical when the tangential
        eigenvalue already exceeds the blow-up threshold wherever it is
        still meaningful (a pinch racing through the threshold between
        checks), or when the preceding snapshots showed monotone growth;
        otherwise they are a numerical failure.
        """
        r_s2 = profile.r_s2
        finite = (np.isfinite(r_s2).all() and np.isfinite(profile.r_perp).all()
                  and np.isfinite(state.x).all() and np.isfinite(state.s).all()
                  and math.isfinite(r_hat))
        if not finite:
            if _finite_max(r_s2) >= self.curvature_blowup:
                return Assessment.SUPERCRITICAL
            if self._growing_tail():
                return Assessment.SUPERCRITICAL
            return Assessment.FAILURE

        m = float(np.max(r_s2))
        self.max_r_s2_history.append(m)
        if m >= self.curvature_blowup:
            return Assessment.SUPERCRITICAL

        # An exactly round sphere needs no persistence.
        if np.array_equal(r_s2, profile.r_perp) and not np.any(state.s):
            return Assessment.SUBCRITICAL

        near_round = (float(np.max(np.abs(r_s2 - profile.r_perp)))
                      <= self.round_tol * abs(r_hat)
                      and float(np.max(np.abs(state.s))) <= self.round_tol)
        if near_round:
            self._round_streak += 1
            if self._round_streak >= 2:
                return Assessment.SUBCRITICAL
        else:
            self._round_streak = 0
        return Assessment.CONTINUE


class PinchDiagnostics(NamedTuple):
    """Locations and extremes of the curvature and cross-section profile."""

    argmax_psi: float
    max_r_s2: float
    max_r_perp: float
    min_area: float
    argmin_area_psi: float


def pinch_diagnostics(profile: CurvatureProfile, state: FieldState,
                      grid: Grid) -> PinchDiagnostics:
    """Locate the curvature maximum and the thinnest cross-section.

    min_area is the smallest cross-section area after dividing out the
    sin^2(psi) profile of the round sphere (4 pi e^{2(X+W)}); without the
    compensation the minimum would always sit at the pole-adjacent points,
    where every smooth metric's spheres shrink to zero.  Locations are
    reported as psi values.  NaN entries are ignored; +/-inf survive.
    """
    psi = grid.psi_interior
    r_s2 = profile.r_s2[grid.interior]
    r_perp = profile.r_perp[grid.interior]
    neck = sphere_areas(state, grid) / grid.sin_sq[grid.interior]

    if np.isnan(r_s2).all():
        argmax_psi = math.nan
        max_r_s2 = math.nan
    else:
        argmax_psi = float(psi[np.nanargmax(r_s2)])
        max_r_s2 = _finite_max(r_s2)
    max_r_perp = math.nan if np.isnan(r_perp).all() else _finite_max(r_perp)
    if np.isnan(neck).all():
        min_area = math.nan
        argmin_area_psi = math.nan
    else:
        min_area = float(np.nanmin(neck))
        argmin_area_psi = float(psi[np.nanargmin(neck)])
    return PinchDiagnostics(argmax_psi, max_r_s2, max_r_perp, min_area,
                            argmin_area_psi)


@dataclass
class RunOutcome:
    """Terminal classification of one flow plus its final diagnostics.

    kind-specific detail: subcritical runs report the common asymptotic
    eigenvalue in curvature_value and the residual anisotropy in
    max_abs_s; supercritical runs report the pinch time (t_final), the
    curvature maximum and its location through diagnostics; failures
    report the last finite time.
    """

    kind: OutcomeKind
    t_final: float
    steps: int
    diagnostics: PinchDiagnostics
    r_hat: float
    max_abs_s: float
    curvature_value: float | None
    final_state: FieldState
    final_profile: CurvatureProfile
