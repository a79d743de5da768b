import math

import numpy as np
import pytest

from neckpinch.classify import (Assessment, Classifier, OutcomeKind,
                                pinch_diagnostics)
from neckpinch.flow import FlowConfig, evolve
from neckpinch.geometry import (CurvatureProfile, FieldState,
                                corseted_initial_data, ricci_eigenvalues,
                                average_scalar_curvature)
from neckpinch.grid import build_grid


def flat_profile(n, r_s2, r_perp):
    return CurvatureProfile(r_s2=np.full(n, float(r_s2)),
                            r_perp=np.full(n, float(r_perp)))


def round_state(n):
    return FieldState(0.0, np.zeros(n), np.zeros(n))


def test_exact_round_sphere_subcritical_first_snapshot():
    c = Classifier(curvature_blowup=1e6, round_tol=1e-3)
    verdict = c.assess(flat_profile(20, 2.0, 2.0), round_state(20), 6.0)
    assert verdict is Assessment.SUBCRITICAL


def test_threshold_supercritical():
    c = Classifier(curvature_blowup=1e6, round_tol=1e-3)
    state = FieldState(0.0, np.zeros(20), np.full(20, 0.5))
    verdict = c.assess(flat_profile(20, 1e7, 3.0), state, 6.0)
    assert verdict is Assessment.SUPERCRITICAL


def test_near_round_requires_two_snapshots():
    c = Classifier(curvature_blowup=1e6, round_tol=1e-3)
    state = FieldState(0.0, np.zeros(20), np.full(20, 1e-4))
    prof = flat_profile(20, 4.0, 4.001)
    assert c.assess(prof, state, 12.0) is Assessment.CONTINUE
    assert c.assess(prof, state, 12.0) is Assessment.SUBCRITICAL


def test_streak_resets_on_excursion():
    c = Classifier(curvature_blowup=1e6, round_tol=1e-3)
    state = FieldState(0.0, np.zeros(20), np.full(20, 1e-4))
    near = flat_profile(20, 4.0, 4.001)
    far = flat_profile(20, 4.0, 5.0)
    assert c.assess(near, state, 12.0) is Assessment.CONTINUE
    assert c.assess(far, state, 12.0) is Assessment.CONTINUE
    assert c.assess(near, state, 12.0) is Assessment.CONTINUE
    assert c.assess(near, state, 12.0) is Assessment.SUBCRITICAL


def test_round_tol_gates_anisotropy_too():
    c = Classifier(curvature_blowup=1e6, round_tol=1e-3)
    state = FieldState(0.0, np.zeros(20), np.full(20, 0.5))  # |S| too big
    prof = flat_profile(20, 4.0, 4.0000001)
    assert c.assess(prof, state, 12.0) is Assessment.CONTINUE
    assert c.assess(prof, state, 12.0) is Assessment.CONTINUE


def test_nonfinite_with_superthreshold_values_is_supercritical():
    c = Classifier(curvature_blowup=1e6, round_tol=1e-3)
    r_s2 = np.full(20, 2e6)
    r_s2[3] = np.nan
    prof = CurvatureProfile(r_s2=r_s2, r_perp=np.full(20, 3.0))
    verdict = c.assess(prof, round_state(20), 6.0)
    assert verdict is Assessment.SUPERCRITICAL


def test_nonfinite_with_monotone_history_is_supercritical():
    c = Classifier(curvature_blowup=1e9, round_tol=1e-3)
    state = FieldState(0.0, np.zeros(20), np.full(20, 0.5))
    for m in (10.0, 20.0, 40.0, 80.0, 160.0):
        assert c.assess(flat_profile(20, m, 3.0), state, 6.0) is Assessment.CONTINUE
    bad = CurvatureProfile(r_s2=np.full(20, np.nan), r_perp=np.full(20, np.nan))
    assert c.assess(bad, state, 6.0) is Assessment.SUPERCRITICAL


def test_nonfinite_without_growth_is_failure():
    c = Classifier(curvature_blowup=1e9, round_tol=1e-3)
    state = FieldState(0.0, np.zeros(20), np.full(20, 0.5))
    for m in (10.0, 20.0, 15.0, 12.0):  # not growing
        c.assess(flat_profile(20, m, 3.0), state, 6.0)
    bad = CurvatureProfile(r_s2=np.full(20, np.nan), r_perp=np.full(20, np.nan))
    assert c.assess(bad, state, 6.0) is Assessment.FAILURE


def test_nonfinite_after_dip_then_surge_is_supercritical():
    # real pinches can dip transiently before the terminal surge
    c = Classifier(curvature_blowup=1e9, round_tol=1e-3)
    state = FieldState(0.0, np.zeros(20), np.full(20, 0.5))
    for m in (190.0, 188.0, 150.0, 160.0, 360.0, 780.0):
        c.assess(flat_profile(20, m, 3.0), state, 6.0)
    bad = CurvatureProfile(r_s2=np.full(20, np.nan), r_perp=np.full(20, np.nan))
    assert c.assess(bad, state, 6.0) is Assessment.SUPERCRITICAL


def test_monotone_in_blowup_threshold():
    # raising the threshold never converts a continue into supercritical
    state = FieldState(0.0, np.zeros(20), np.full(20, 0.5))
    prof = flat_profile(20, 500.0, 3.0)
    verdicts = {}
    for blowup in (1e2, 1e3, 1e6):
        c = Classifier(curvature_blowup=blowup, round_tol=1e-3)
        verdicts[blowup] = c.assess(prof, state, 6.0)
    assert verdicts[1e2] is Assessment.SUPERCRITICAL
    assert verdicts[1e3] is Assessment.CONTINUE
    assert verdicts[1e6] is Assessment.CONTINUE


def test_replay_reproduces_verdicts():
    cfg = FlowConfig(lam=0.2, n_total=102, t_max=2.0)
    snapshots = []

    def observer(state, profile, r_hat):
        snapshots.append((state, profile, r_hat))

    out = evolve(cfg, observer)
    assert out.kind is OutcomeKind.SUBCRITICAL
    replay = Classifier(cfg.curvature_blowup, cfg.round_tol)
    verdicts = [replay.assess(p, s, r) for s, p, r in snapshots]
    assert all(v is Assessment.CONTINUE for v in verdicts[:-1])
    # the terminal snapshot is not passed to the observer; replaying the
    # final state reproduces the subcritical call
    final = replay.assess(out.final_profile, out.final_state, out.r_hat)
    assert final is Assessment.SUBCRITICAL


def test_pinch_diagnostics_round_sphere():
    g = build_grid(102)
    state = round_state(102)
    prof = ricci_eigenvalues(state, g)
    d = pinch_diagnostics(prof, state, g)
    assert d.max_r_s2 == pytest.approx(2.0, abs=1e-12)
    assert d.max_r_perp == pytest.approx(2.0, abs=1e-12)
    assert d.min_area == pytest.approx(4 * np.pi, rel=1e-12)


def test_pinch_diagnostics_corseted():
    g = build_grid(402)
    state = corseted_initial_data(0.1, g)
    prof = ricci_eigenvalues(state, g)
    d = pinch_diagnostics(prof, state, g)
    assert abs(d.argmin_area_psi - np.pi / 2) <= g.dpsi
    assert d.min_area == pytest.approx(4 * np.pi * 0.1, rel=1e-3)
    assert d.max_r_s2 == pytest.approx(8.0, abs=0.05)


def test_pinch_diagnostics_nan_robust():
    g = build_grid(102)
    state = round_state(102)
    prof = ricci_eigenvalues(state, g)
    prof.r_s2[30] = np.nan
    prof.r_s2[40] = np.inf
    d = pinch_diagnostics(prof, state, g)
    assert d.max_r_s2 == np.inf
    assert d.argmax_psi == pytest.approx(g.psi[40], rel=1e-12)

    all_nan = CurvatureProfile(r_s2=np.full(102, np.nan),
                               r_perp=np.full(102, np.nan))
    d = pinch_diagnostics(all_nan, state, g)
    assert math.isnan(d.max_r_s2) and math.isnan(d.argmax_psi)


def test_outcome_kinds_serialize_lowercase():
    assert OutcomeKind.SUBCRITICAL.value == "subcritical"
    assert OutcomeKind.SUPERCRITICAL.value == "supercritical"
    assert OutcomeKind.UNDECIDED.value == "undecided"
    assert OutcomeKind.FAILURE.value == "failure"


def test_supercritical_outcome_satisfies_threshold_invariant():
    out = evolve(FlowConfig(lam=0.11, n_total=202, t_max=30.0))
    assert out.kind is OutcomeKind.SUPERCRITICAL
    assert out.diagnostics.max_r_s2 >= 1e6
