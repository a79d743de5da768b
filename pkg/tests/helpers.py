"""Independent oracles shared across test modules.

Everything here is deliberately coded from the governing expressions in
their plain form (direct sin divisions, raw exponentials, no stabilized
primitives), so agreement with the package is a two-route check rather
than a reimplementation test.
"""

import numpy as np

from neckpinch.geometry import FieldState
from neckpinch.grid import Grid


def literal_rhs(state: FieldState, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Plain-form evaluation of the two evolution equations.

    Uses e^{-4W} directly and divides by sin^2/sin^4 literally, which is
    accurate away from the poles.  Derivatives are the same centered
    stencils; W and W' are expressed through S as always.
    """
    I = grid.interior
    dpsi = grid.dpsi
    x, s = state.x, state.s
    sin = grid.sin_psi[I]
    cos = grid.cos_psi[I]
    sin2 = grid.sin_sq[I]
    cot = cos / sin
    xp = (x[2:] - x[:-2]) / (2 * dpsi)
    xpp = (x[2:] + x[:-2] - 2 * x[1:-1]) / dpsi**2
    sp = (s[2:] - s[:-2]) / (2 * dpsi)
    spp = (s[2:] + s[:-2] - 2 * s[1:-1]) / dpsi**2
    si = s[I]
    xi = x[I]
    w = si * sin2
    wp = sin2 * sp + 2 * sin * cos * si
    E = np.exp(-4.0 * w)
    pref = np.exp(2.0 * (w - xi))
    e_num = np.exp(xi + 3.0 * w)
    e_vol = np.exp(3.0 * xi + w)
    vol = dpsi * np.sum(e_vol * sin2)
    r_hat = 2.0 * dpsi * np.sum(
        e_num * ((E - 1.0) - 4.0 * sin * cos * wp + sin2 * (3.0 + (xp + wp) ** 2))
    ) / vol
    dx = np.zeros(grid.n_total)
    ds = np.zeros(grid.n_total)
    dx[I] = pref * (xpp + 2 * cot * xp - 2.0 + 0.5 * (xp**2 + wp**2) + 3 * xp * wp
                    + (1.0 - E) * (1.0 / (2.0 * sin2) + 1.0 + 2.0 * cot * wp)
                    ) + r_hat / 3.0
    ds[I] = pref * (spp + 6 * cot * sp - 8 * si
                    - 1.5 / sin2**2 * (1.0 - 4.0 * w - E)
                    + (1.0 - E) / sin2 * (
                        1.0 - 2.0 * (cot * xp + 2 * sin * cos * sp
                                     + 4 * cos**2 * si))
                    - 0.5 * ((xp / sin) ** 2 + (sin * sp + 2 * cos * si) ** 2
                             + 6 * (xp / sin) * (sin * sp + 2 * cos * si)))
    return dx, ds


def smooth_test_state(grid: Grid, amp_x: float = 0.1,
                      s_const: float = 0.05) -> FieldState:
    """Analytic test metric X = amp_x cos(2 psi), S = s_const; both fields
    are even at the poles, so the ghost copy rule reproduces their smooth
    extension exactly."""
    x = amp_x * np.cos(2.0 * grid.psi)
    s = np.full(grid.n_total, s_const)
    x[0] = x[1]
    x[-1] = x[-2]
    return FieldState(t=0.0, x=x, s=s)


def analytic_eigenvalues(grid: Grid, amp_x: float = 0.1,
                         s_const: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form Ricci eigenvalues of the smooth test metric on the
    interior points, from exact derivatives instead of stencils."""
    psi = grid.psi_interior
    sin = np.sin(psi)
    cos = np.cos(psi)
    cot = cos / sin
    X = amp_x * np.cos(2 * psi)
    Xp = -2 * amp_x * np.sin(2 * psi)
    Xpp = -4 * amp_x * np.cos(2 * psi)
    W = s_const * sin**2
    Wp = s_const * np.sin(2 * psi)
    Wpp = 2 * s_const * np.cos(2 * psi)
    pref = np.exp(2.0 * (W - X))
    r_perp = -2.0 * pref * (-1.0 + Xpp + Wpp + (Xp + 3 * Wp) * cot
                            + 2.0 * (Xp + Wp) * Wp)
    r_s2 = -pref * (-2.0 + (1.0 - np.exp(-4.0 * W)) / sin**2 + Xpp + Wpp
                    + (3 * Xp + 5 * Wp) * cot + (Xp + Wp) * (Xp + 3 * Wp))
    return r_s2, r_perp


def reflect(f: np.ndarray) -> np.ndarray:
    """Mirror a grid function about the equator (index i <-> n-1-i)."""
    return f[::-1].copy()


def symmetrize(f: np.ndarray) -> np.ndarray:
    return 0.5 * (f + reflect(f))


def asymmetry(f: np.ndarray) -> float:
    """Max deviation from reflection symmetry on the interior."""
    g = f[1:-1]
    return float(np.max(np.abs(g - g[::-1])))
