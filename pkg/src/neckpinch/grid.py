"""Staggered 1D mesh on (0, pi) with two ghost points, stencils, and quadrature.

The mesh is cell-centered: for ``n_total`` points the spacing is
``dpsi = pi/(n_total - 2)`` and the points sit at ``psi = (j - 1/2) dpsi``
for j = 0 .. n_total-1, so the first and last points lie just outside the
coordinate range (ghost points at -dpsi/2 and pi + dpsi/2).  No interior
point ever coincides with a pole, which keeps cot(psi) and 1/sin(psi)
finite everywhere derivatives are taken.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Grid", "build_grid", "d1", "d2", "fill_ghosts", "integrate"]


@dataclass(frozen=True)
class Grid:
    """Uniform staggered mesh plus cached trigonometric samples.

    Attributes
    ----------
    n_total : int
        Number of grid points, including the two ghosts.
    dpsi : float
        Uniform spacing pi/(n_total - 2).
    psi : ndarray
        Point coordinates, psi[0] = -dpsi/2, psi[-1] = pi + dpsi/2.
    sin_psi, cos_psi, sin_sq, cot : ndarray
        sin(psi), cos(psi), sin^2(psi) and cot(psi) sampled on the mesh.
        cot is only meaningful on the interior (ghosts are never used in
        stencil evaluations).
    """

    n_total: int
    dpsi: float
    psi: np.ndarray
    sin_psi: np.ndarray = field(repr=False)
    cos_psi: np.ndarray = field(repr=False)
    sin_sq: np.ndarray = field(repr=False)
    cot: np.ndarray = field(repr=False)

    @property
    def interior(self) -> slice:
        """Slice selecting the interior (non-ghost) points."""
        return slice(1, self.n_total - 1)

    @property
    def psi_interior(self) -> np.ndarray:
        return self.psi[self.interior]


def build_grid(n_total: int) -> Grid:
    """Build the staggered mesh with ``n_total`` points (two of them ghosts).

    Requires n_total >= 6 so that at least four interior points exist for
    the second-order stencils and the classification diagnostics.
    """
    if n_total < 6:
        raise ValueError(f"n_total must be >= 6, got {n_total}")
    dpsi = np.pi / (n_total - 2)
    psi = (np.arange(n_total) - 0.5) * dpsi
    sin_psi = np.sin(psi)
    cos_psi = np.cos(psi)
    return Grid(
        n_total=n_total,
        dpsi=dpsi,
        psi=psi,
        sin_psi=sin_psi,
        cos_psi=cos_psi,
        sin_sq=sin_psi * sin_psi,
        cot=cos_psi / sin_psi,
    )


def _check_interior(f: np.ndarray, i: int, grid: Grid) -> None:
    if len(f) != grid.n_total:
        raise ValueError(f"field has length {len(f)}, grid expects {grid.n_total}")
    if not 1 <= i <= grid.n_total - 2:
        raise IndexError(f"index {i} outside interior range 1..{grid.n_total - 2}")


def d1(f: np.ndarray, i: int, grid: Grid) -> float:
    """Centered first derivative (f[i+1] - f[i-1]) / (2 dpsi) at interior i."""
    _check_interior(f, i, grid)
    return (f[i + 1] - f[i - 1]) / (2.0 * grid.dpsi)


def d2(f: np.ndarray, i: int, grid: Grid) -> float:
    """Centered second derivative (f[i+1] + f[i-1] - 2 f[i]) / dpsi^2 at interior i."""
    _check_interior(f, i, grid)
    return (f[i + 1] + f[i - 1] - 2.0 * f[i]) / (grid.dpsi * grid.dpsi)


def d1_interior(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Vectorized d1 over all interior points (length n_total - 2)."""
    return (f[2:] - f[:-2]) / (2.0 * grid.dpsi)


def d2_interior(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Vectorized d2 over all interior points (length n_total - 2)."""
    return (f[2:] + f[:-2] - 2.0 * f[1:-1]) / (grid.dpsi * grid.dpsi)


def fill_ghosts(f: np.ndarray) -> np.ndarray:
    """Return a copy of f with ghost entries mirroring their interior neighbors.

    Copying f[1] into f[0] and f[-2] into f[-1] imposes a vanishing first
    derivative at both poles on the staggered mesh (the pole sits halfway
    between the ghost and the first interior point).
    """
    if len(f) < 4:
        raise ValueError("need at least 4 points to fill ghosts")
    out = np.array(f, dtype=float, copy=True)
    out[0] = out[1]
    out[-1] = out[-2]
    return out


def fill_ghosts_inplace(f: np.ndarray) -> None:
    f[0] = f[1]
    f[-1] = f[-2]


def integrate(f: np.ndarray, grid: Grid) -> float:
    """Midpoint-rule integral over (0, pi): dpsi * sum of interior samples.

    Interior points are the midpoints of a uniform partition of (0, pi),
    so this is second-order accurate; ghost entries are ignored.
    """
    if len(f) != grid.n_total:
        raise ValueError(f"field has length {len(f)}, grid expects {grid.n_total}")
    return grid.dpsi * float(np.sum(f[grid.interior]))
