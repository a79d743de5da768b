"""Metric state, corseted initial data, curvature, and integral quantities.

The metric on the three-sphere is parametrized by two functions of psi:

    g = e^{2X} ( e^{-2W} dpsi^2 + e^{2W} sin^2(psi) dOmega^2 )

Regularity at the poles forces W to vanish there as well as W', which is
awkward to impose directly, so the state stores S = W / sin^2(psi) instead;
S only needs a vanishing derivative at the poles, handled by the ghost fill.
W and its derivatives are reconstructed from S wherever the curvature or
flow expressions need them.
"""

from dataclasses import dataclass

import numpy as np

from .grid import Grid, d1_interior, d2_interior, fill_ghosts, integrate

__all__ = [
    "FieldState",
    "CurvatureProfile",
    "corseted_initial_data",
    "w_of",
    "stable_phi",
    "stable_mu",
    "ricci_eigenvalues",
    "curvature_invariants",
    "average_scalar_curvature",
    "volume_normalizer",
    "deturck_vector",
    "sphere_area",
    "sphere_areas",
]

# Below this |w| the direct evaluation of stable_phi loses more than ~1e-12
# relative accuracy to cancellation, so a truncated series takes over.
PHI_SERIES_CUTOFF = 1e-3


@dataclass
class FieldState:
    """Metric degrees of freedom sampled on the grid at flow time t."""

    t: float
    x: np.ndarray
    s: np.ndarray

    def __post_init__(self) -> None:
        if len(self.x) != len(self.s):
            raise ValueError("x and s must have equal length")

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.x.copy(), self.s.copy())


@dataclass
class CurvatureProfile:
    """Ricci eigenvalues tangent (r_s2) and orthogonal (r_perp) to the
    symmetry two-spheres, per grid point."""

    r_s2: np.ndarray
    r_perp: np.ndarray


def corseted_initial_data(lam: float, grid: Grid) -> FieldState:
    """Corseted-sphere initial data with pinch parameter lam > 0.

    The t=0 metric has W = X with

        4 e^{4X} sin^2(psi) = sin^2(2 psi)                          cos^2 >= 1/2
        4 e^{4X} sin^2(psi) = sin^2(2 psi) + 4 lam cos^2(2 psi)     cos^2 <= 1/2

    The outer branch is two round spheres of radius 1/2; lam opens up the
    equatorial junction (equatorial cross-section area 4 pi lam).  At
    lam = 0 the junction is a cusp and the geometry is singular, so
    non-positive lam is rejected.  Ghost points take values by the ghost
    fill rule, not by the formula.
    """
    if not lam > 0.0:
        raise ValueError(f"lam must be positive, got {lam}")
    n = grid.n_total
    cos_sq = grid.cos_psi**2
    x = np.empty(n)
    sphere = cos_sq >= 0.5
    x[sphere] = 0.25 * np.log(cos_sq[sphere])
    corset = ~sphere
    psi_c = grid.psi[corset]
    x[corset] = 0.25 * np.log(
        (np.sin(2.0 * psi_c) ** 2 + 4.0 * lam * np.cos(2.0 * psi_c) ** 2)
        / (4.0 * grid.sin_sq[corset])
    )
    s = x / grid.sin_sq
    return FieldState(t=0.0, x=fill_ghosts(x), s=fill_ghosts(s))


def w_of(state: FieldState, grid: Grid) -> np.ndarray:
    """W_i = S_i sin^2(psi_i) on every grid point."""
    return state.s * grid.sin_sq


def _interior_fields(state: FieldState, grid: Grid):
    """Interior values and derivatives used by the curvature and flow
    expressions: (x, s, x', x'', s', s'', w, w') with w' from the product
    rule w' = sin^2 s' + 2 sin cos s."""
    I = grid.interior
    xi = state.x[I]
    si = state.s[I]
    xp = d1_interior(state.x, grid)
    xpp = d2_interior(state.x, grid)
    sp = d1_interior(state.s, grid)
    spp = d2_interior(state.s, grid)
    sin = grid.sin_psi[I]
    cos = grid.cos_psi[I]
    sin_sq = grid.sin_sq[I]
    w = si * sin_sq
    wp = sin_sq * sp + 2.0 * sin * cos * si
    return xi, si, xp, xpp, sp, spp, w, wp


def stable_phi(w):
    """(1 - 4w - e^{-4w}) / w^2 with the removable singularity filled in.

    phi(0) = -8; for |w| below PHI_SERIES_CUTOFF a truncated Taylor series
    -8 + (32/3) w - (32/3) w^2 + (128/15) w^3 avoids the catastrophic
    cancellation of the direct form, keeping relative error below ~1e-12
    on both sides of the crossover.
    """
    w_arr = np.asarray(w, dtype=float)
    out = np.empty_like(w_arr)
    small = np.abs(w_arr) < PHI_SERIES_CUTOFF
    ws = w_arr[small]
    out[small] = -8.0 + (32.0 / 3.0) * ws - (32.0 / 3.0) * ws**2 + (128.0 / 15.0) * ws**3
    wb = w_arr[~small]
    with np.errstate(over="ignore"):  # e^{-4w} -> inf on blown-up states
        out[~small] = -(np.expm1(-4.0 * wb) + 4.0 * wb) / (wb * wb)
    if np.isscalar(w) or w_arr.ndim == 0:
        return float(out)
    return out


def stable_mu(w):
    """(1 - e^{-4w}) / w with mu(0) = 4, via expm1 (no cancellation)."""
    w_arr = np.asarray(w, dtype=float)
    out = np.full_like(w_arr, 4.0)
    nz = w_arr != 0.0
    with np.errstate(over="ignore"):
        out[nz] = -np.expm1(-4.0 * w_arr[nz]) / w_arr[nz]
    if np.isscalar(w) or w_arr.ndim == 0:
        return float(out)
    return out


def ricci_eigenvalues(state: FieldState, grid: Grid) -> CurvatureProfile:
    """Ricci eigenvalues on the interior; ghost entries mirror neighbors.

        r_perp = -2 e^{2(W-X)} [ -1 + X'' + W'' + (X' + 3W') cot
                                 + 2 (X' + W') W' ]
        r_s2   = -  e^{2(W-X)} [ -2 + (1 - e^{-4W})/sin^2 + X'' + W''
                                 + (3X' + 5W') cot + (X' + W')(X' + 3W') ]

    W, W', W'' are reconstructed from S, and the (1 - e^{-4W})/sin^2 term
    is evaluated as mu(W) S so the poles cost no significant digits.
    """
    I = grid.interior
    xi, si, xp, xpp, sp, spp, w, wp = _interior_fields(state, grid)
    sin = grid.sin_psi[I]
    cos = grid.cos_psi[I]
    cot = grid.cot[I]
    cos2psi = np.cos(2.0 * grid.psi[I])
    wpp = grid.sin_sq[I] * spp + 4.0 * sin * cos * sp + 2.0 * cos2psi * si
    r_perp = np.empty(grid.n_total)
    r_s2 = np.empty(grid.n_total)
    # blown-up states legitimately overflow to inf/nan here; the classifier
    # interprets them
    with np.errstate(over="ignore", invalid="ignore"):
        pref = np.exp(2.0 * (w - xi))
        mu_s = stable_mu(w) * si
        r_perp[I] = -2.0 * pref * (-1.0 + xpp + wpp + (xp + 3.0 * wp) * cot
                                   + 2.0 * (xp + wp) * wp)
        r_s2[I] = -pref * (-2.0 + mu_s + xpp + wpp + (3.0 * xp + 5.0 * wp) * cot
                           + (xp + wp) * (xp + 3.0 * wp))
    return CurvatureProfile(r_s2=fill_ghosts(r_s2[:]), r_perp=fill_ghosts(r_perp[:]))


def curvature_invariants(r_s2, r_perp):
    """Scalar curvature and the quadratic Ricci / Riemann invariants.

    Returns (R, ricci2, riem2) with R = 2 r_s2 + r_perp,
    ricci2 = 2 r_s2^2 + r_perp^2 and riem2 = 2 r_perp^2 + (r_perp - 2 r_s2)^2;
    the identity riem2 = 4 ricci2 - R^2 holds exactly in three dimensions.
    """
    R = 2.0 * r_s2 + r_perp
    ricci2 = 2.0 * r_s2**2 + r_perp**2
    riem2 = 2.0 * r_perp**2 + (r_perp - 2.0 * r_s2) ** 2
    return R, ricci2, riem2


def _rhat_integrand(state: FieldState, grid: Grid) -> np.ndarray:
    """Interior samples of e^{X+3W} (e^{-4W} - 1 - 4 sin cos W'
    + sin^2 [3 + (X'+W')^2]); the (e^{-4W} - 1) factor goes through expm1
    so near-pole values keep full relative accuracy."""
    I = grid.interior
    xi, si, xp, xpp, sp, spp, w, wp = _interior_fields(state, grid)
    sin = grid.sin_psi[I]
    cos = grid.cos_psi[I]
    with np.errstate(over="ignore", invalid="ignore"):
        em1 = np.expm1(-4.0 * w)
        return np.exp(xi + 3.0 * w) * (
            em1 - 4.0 * sin * cos * wp + grid.sin_sq[I] * (3.0 + (xp + wp) ** 2)
        )


def volume_normalizer(state: FieldState, grid: Grid) -> float:
    """Integral of e^{3X+W} sin^2(psi), proportional to the 3-volume.

    This is the conserved quantity of the volume-normalized flow.
    """
    f = np.zeros(grid.n_total)
    I = grid.interior
    w = state.s[I] * grid.sin_sq[I]
    with np.errstate(over="ignore"):
        f[I] = np.exp(3.0 * state.x[I] + w) * grid.sin_sq[I]
    return integrate(f, grid)


def average_scalar_curvature(state: FieldState, grid: Grid) -> float:
    """Volume-averaged scalar curvature driving the normalization term."""
    f = np.zeros(grid.n_total)
    f[grid.interior] = _rhat_integrand(state, grid)
    # the normalizer can underflow to 0 on collapsed states; IEEE semantics
    # (inf/nan) let the blow-up handling see it
    with np.errstate(invalid="ignore", divide="ignore"):
        return float(np.float64(2.0 * integrate(f, grid))
                     / np.float64(volume_normalizer(state, grid)))


def deturck_vector(state: FieldState, grid: Grid) -> np.ndarray:
    """Covariant psi-component of the gauge vector field, diagnostic only.

        V_psi = -(3 W' + X' + 2 cot(psi) [1 - e^{-4W}])

    with the cot term evaluated as 2 sin cos mu(W) S.  Ghost entries are
    zero; the pull-back of the flow along V is out of scope.
    """
    I = grid.interior
    xi, si, xp, xpp, sp, spp, w, wp = _interior_fields(state, grid)
    sin = grid.sin_psi[I]
    cos = grid.cos_psi[I]
    v = np.zeros(grid.n_total)
    v[I] = -(3.0 * wp + xp + 2.0 * sin * cos * stable_mu(w) * si)
    return v


def sphere_area(state: FieldState, i: int, grid: Grid) -> float:
    """Area of the psi = const symmetry two-sphere at interior index i."""
    if not 1 <= i <= grid.n_total - 2:
        raise IndexError(f"index {i} outside interior range 1..{grid.n_total - 2}")
    w_i = state.s[i] * grid.sin_sq[i]
    return 4.0 * np.pi * float(np.exp(2.0 * (state.x[i] + w_i)) * grid.sin_sq[i])


def sphere_areas(state: FieldState, grid: Grid) -> np.ndarray:
    """Cross-section areas on the interior (length n_total - 2)."""
    I = grid.interior
    w = state.s[I] * grid.sin_sq[I]
    with np.errstate(over="ignore"):
        return 4.0 * np.pi * np.exp(2.0 * (state.x[I] + w)) * grid.sin_sq[I]
